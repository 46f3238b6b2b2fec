//! Unbiased MMD² between two samples, computed in one pass and by streaming.
//!
//! cargo run --example mmd_estimator

use mmd_classify::clusters::{mmd2_population, sample};
use mmd_classify::{mmd2_batch, GaussianModel, KernelSpec, MmdAccumulator, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mmd_classify::Result<()> {
    let k = KernelSpec::gaussian(1.0)?;
    let p = GaussianModel::new(0.0, 1.0)?;
    let q = GaussianModel::new(1.5, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = sample(&p, 200, &mut rng);
    let y = sample(&q, 150, &mut rng);

    let batch = mmd2_batch(x.as_slice(), y.as_slice(), &k)?;

    let mut acc = MmdAccumulator::new(k);
    for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
        acc.push(Side::X, *a)?;
        acc.push(Side::Y, *b)?;
    }
    for a in &x.as_slice()[y.len()..] {
        acc.push(Side::X, *a)?;
    }

    println!("batch estimate       {batch:.10}");
    println!("streaming estimate   {:.10}", acc.value()?);
    println!("population value     {:.10}", mmd2_population(&p, &q, &k)?);

    // Identical samples can give a negative estimate; it is not clipped.
    let same = sample(&p, 5, &mut rng);
    let other = sample(&p, 5, &mut rng);
    println!("same-law estimate    {:.10}", mmd2_batch(same.as_slice(), other.as_slice(), &k)?);
    Ok(())
}
