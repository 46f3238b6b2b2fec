//! Classifying a testing sequence against training sequences with the
//! fixed-length, sequential and two-phase tests.
//!
//! cargo run --example classify_sequences

use mmd_classify::classifiers::{classify_fixed, run_sequential, run_two_phase};
use mmd_classify::clusters::sample;
use mmd_classify::montecarlo::GaussianSource;
use mmd_classify::{Case, GaussianModel, KernelSpec, TestConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mmd_classify::Result<()> {
    let k = KernelSpec::gaussian(1.0)?;
    let centers: Vec<GaussianModel> = (0..4).map(|i| GaussianModel::new(1.5 * i as f64, 1.0)).collect::<Result<_, _>>()?;
    let truth = GaussianModel::new(3.1, 1.0)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = sample(&truth, 30, &mut rng);
    let ys: Vec<_> = centers.iter().map(|c| sample(c, 30, &mut rng)).collect();
    let v = classify_fixed(x.as_slice(), &ys, &k, Case::Simple, None)?;
    println!("fixed-length on stored data: {}", serde_json::to_string(&v).unwrap());
    let v = classify_fixed(x.as_slice(), &ys, &k, Case::General, Some(0.05))?;
    println!("with a null option, lambda=0.05: {}", serde_json::to_string(&v).unwrap());

    let cfg = TestConfig {
        n0: 10,
        n: 10,
        lambda: Some(0.15),
        ..TestConfig::default()
    };
    for seed in 0..3 {
        let src = GaussianSource::new(&truth, &centers, 42, seed);
        let v = run_sequential(src, &cfg, Case::Simple, &k)?;
        let src = GaussianSource::new(&truth, &centers, 42, seed);
        let w = run_two_phase(src, &cfg, Case::Simple, &k)?;
        println!(
            "stream {seed}: sequential {} at tau={}, two-phase {} at tau={} ({:?} phase)",
            v.decision,
            v.tau,
            w.decision,
            w.tau,
            w.phase.unwrap()
        );
    }
    Ok(())
}
