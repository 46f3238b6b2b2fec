//! Separation distances of a cluster configuration and how they move with
//! the size of the uncertainty sets.
//!
//! cargo run --example cluster_distances

use mmd_classify::clusters::worst_case_q;
use mmd_classify::{ClusterSpec, KernelSpec, Problem};

fn main() -> mmd_classify::Result<()> {
    let k = KernelSpec::gaussian(1.0)?;
    let clusters = (0..10)
        .map(|i| ClusterSpec::mean_interval(1.5 * i as f64, 1.0, 0.1))
        .collect::<mmd_classify::Result<Vec<_>>>()?;
    let null = ClusterSpec::mean_interval(15.0, 1.0, 0.1)?;
    let problem = Problem::new(clusters, Some(null), k, 1.0)?;

    println!("{:>7} {:>12} {:>12} {:>12} {:>12}", "radius", "D1", "D2", "D1_bar", "D2_bar");
    for r in [0.0, 0.05, 0.1, 0.2, 0.3] {
        let p = problem.with_uncertainty_size(r)?;
        println!(
            "{r:>7} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            p.d1()?,
            p.d2()?,
            p.d1_bar()?,
            p.d2_bar()?
        );
    }

    let c0 = problem.clusters()[0];
    let toward = worst_case_q(&c0, Some(&problem.clusters()[1].center), &k)?;
    println!("worst-case law for H1 toward H2: N({}, {})", toward.mean, toward.variance);

    let ball = ClusterSpec::mmd_ball(0.0, 1.0, 0.05)?;
    println!("MMD ball delta=0.05 covers mean shifts up to {:.4}", ball.mean_radius(&k));

    let overlapping = Problem::new(
        vec![ClusterSpec::mean_interval(0.0, 1.0, 0.8)?, ClusterSpec::mean_interval(1.5, 1.0, 0.8)?],
        None,
        k,
        1.0,
    );
    println!("overlapping clusters: {}", overlapping.unwrap_err());
    Ok(())
}
