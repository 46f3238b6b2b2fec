//! Cost of allowing a null hypothesis: fixed-length misclassification with
//! and without a null option as the MMD-ball uncertainty grows.
//!
//! cargo run --release --example null_penalty_sweep

use mmd_classify::config::parse_config;
use mmd_classify::Runner;

const CONFIG: &str = r#"
trials = 3000
null = { mean = 15.0, delta = 0.01 }
clusters = [
  { mean = 0.0, delta = 0.01 }, { mean = 1.5, delta = 0.01 }, { mean = 3.0, delta = 0.01 },
  { mean = 4.5, delta = 0.01 }, { mean = 6.0, delta = 0.01 }, { mean = 7.5, delta = 0.01 },
  { mean = 9.0, delta = 0.01 }, { mean = 10.5, delta = 0.01 }, { mean = 12.0, delta = 0.01 },
  { mean = 13.5, delta = 0.01 },
]

[[tests]]
name = "simple"
test = "fixed"
case = "simple"
n = 25
sweep = { param = "delta", values = [0.01, 0.02, 0.03, 0.04, 0.05] }

[[tests]]
name = "general"
test = "fixed"
case = "general"
n = 25
lambda = { frac = 0.5 }
sweep = { param = "delta", values = [0.01, 0.02, 0.03, 0.04, 0.05] }
"#;

fn main() -> mmd_classify::Result<()> {
    let plan = parse_config(CONFIG)?;
    let runner = Runner::new(std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let rows: Vec<_> = plan
        .experiments
        .iter()
        .map(|e| runner.sweep(&e.spec, &e.grid))
        .collect::<mmd_classify::Result<_>>()?;
    println!("{:>6} {:>10} {:>10}", "delta", "simple", "general");
    for (s, g) in rows[0].iter().zip(&rows[1]) {
        println!("{:>6} {:>10.4} {:>10.4}", s.x_value, s.result.error_prob, g.result.error_prob);
    }
    Ok(())
}
