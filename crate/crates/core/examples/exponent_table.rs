//! Achievable misclassification and false-alarm exponents for every design.
//!
//! cargo run --example exponent_table

use mmd_classify::exponents::{achievable_exponents, finite_n_envelope, g_funcs};
use mmd_classify::{Case, ExponentParams, TestKind, Thresholds};

fn main() -> mmd_classify::Result<()> {
    let p = ExponentParams::new(0.3, 0.1, 1.0, 1.0)?;
    let g = g_funcs(&p, 0.2);
    println!("g1 = {:.6e}  g2(0.2) = {:.6e}  g3(0.2) = {:.6e}", g.g1, g.g2, g.g3);

    let designs = [
        (TestKind::Fixed, Case::Simple, Thresholds::None, None),
        (TestKind::Sequential, Case::Simple, Thresholds::Single(0.28), None),
        (TestKind::TwoPhase, Case::Simple, Thresholds::Single(0.28), Some(2)),
        (TestKind::Fixed, Case::General, Thresholds::Single(0.2), None),
        (TestKind::Sequential, Case::General, Thresholds::Pair(0.12, 0.28), None),
        (TestKind::TwoPhase, Case::General, Thresholds::Triple(0.12, 0.28, 0.2), Some(2)),
    ];
    for (test, case, th, k) in designs {
        let r = achievable_exponents(test, case, &p, th, k)?;
        println!(
            "{:<11} {:<8} mis {:>14}  fa {:>14}  {}",
            test.to_string(),
            case.to_string(),
            r.misclassification.to_string(),
            r.false_alarm.to_string(),
            r.regime_note
        );
    }

    println!("two-phase simple exponent as K grows:");
    for k in [1, 2, 3, 5, 10] {
        let r = achievable_exponents(TestKind::TwoPhase, Case::Simple, &p, Thresholds::Single(0.28), Some(k))?;
        println!("  K={k:<3} {}", r.misclassification);
    }

    for n in [40, 1_000, 100_000] {
        println!("envelope at n={n}: {:.3e}", finite_n_envelope(n, 10, g.g1));
    }
    Ok(())
}
