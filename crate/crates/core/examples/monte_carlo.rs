//! Estimating error probability and expected stopping time by simulation.
//!
//! cargo run --release --example monte_carlo

use mmd_classify::config::ConfigFile;
use mmd_classify::{
    Case, ExperimentSpec, GridOverride, QPolicy, Runner, TestConfig, TestKind, Threshold, ThresholdRules, Truth,
};

fn main() -> mmd_classify::Result<()> {
    let problem = ConfigFile::default().problem()?;
    let runner = Runner::new(std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let fixed = ExperimentSpec {
        problem,
        test: TestKind::Fixed,
        case: Case::Simple,
        cfg: TestConfig::default(),
        thresholds: ThresholdRules {
            lambda: Some(Threshold::Fraction { frac: 0.5 }),
            ..Default::default()
        },
        truth: Truth::Hypothesis(0),
        q_policy: QPolicy::WorstCaseTowardNearest,
        trials: 2000,
        base_seed: 1,
    };
    let sequential = ExperimentSpec {
        test: TestKind::Sequential,
        ..fixed.clone()
    };

    println!("{:<11} {:>6} {:>9} {:>10} {:>9}", "test", "x", "E[tau]", "error", "ci95");
    for (spec, grid) in [
        (&fixed, (5..=30).step_by(5).map(GridOverride::N).collect::<Vec<_>>()),
        (&sequential, (5..=30).step_by(5).map(GridOverride::N0).collect()),
    ] {
        for row in runner.sweep(spec, &grid)? {
            let r = row.result;
            println!(
                "{:<11} {:>6} {:>9.2} {:>10.5} {:>9.5}",
                spec.test.to_string(),
                row.x_value,
                r.mean_tau,
                r.error_prob,
                r.error_ci95
            );
        }
    }
    Ok(())
}
