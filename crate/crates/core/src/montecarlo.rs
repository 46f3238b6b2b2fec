//! Monte Carlo estimation of misclassification and false-alarm
//! probabilities, expected stopping time and running time.
//!
//! Every trial draws from its own random substreams, indexed by
//! `(base_seed, trial_index, stream)`, so results do not depend on how trials
//! are scheduled across threads. Stream 0 is the testing sequence, streams
//! `1..=M` are the training sequences and stream `M + 1` drives per-trial
//! choices such as a uniformly drawn testing law.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classifiers::{run_test, Decision, SampleSource, TestConfig, Verdict};
use crate::clusters::{worst_case_q, GaussianModel, Problem};
use crate::error::{Error, Result};
use crate::exponents::{Case, TestKind};

/// Which hypothesis generates the testing sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    /// Zero-based training cluster index; written `H1..HM`.
    Hypothesis(usize),
    Null,
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::Hypothesis(i) => write!(f, "H{}", i + 1),
            Truth::Null => f.write_str("null"),
        }
    }
}

impl FromStr for Truth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("null") || t.eq_ignore_ascii_case("hr") {
            return Ok(Truth::Null);
        }
        t.strip_prefix(['H', 'h'])
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .map(|i| Truth::Hypothesis(i - 1))
            .ok_or_else(|| Error::invalid("truth", format!("expected H1..HM or null, got {s:?}")))
    }
}

impl Serialize for Truth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Truth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the testing law `Q` is picked inside the true uncertainty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QPolicy {
    /// Interval endpoint closest to the nearest foreign training center.
    #[default]
    WorstCaseTowardNearest,
    Center,
    /// Mean drawn uniformly from the admissible interval, per trial.
    UniformInSet,
}

/// A decision threshold, either absolute or as a fraction of the way from
/// `D2` to `D1` (barred distances in the general case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Value(f64),
    Fraction { frac: f64 },
}

impl Threshold {
    pub fn resolve(&self, d1: f64, d2: f64) -> f64 {
        match *self {
            Threshold::Value(v) => v,
            Threshold::Fraction { frac } => d2 + frac * (d1 - d2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThresholdRules {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Threshold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<Threshold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<Threshold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda3: Option<Threshold>,
}

/// Distances used to resolve fractional thresholds for a case.
pub fn case_distances(problem: &Problem, case: Case) -> Result<(f64, f64)> {
    match case {
        Case::Simple => Ok((problem.d1()?, problem.d2()?)),
        Case::General => Ok((problem.d1_bar()?, problem.d2_bar()?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: Problem,
    pub test: TestKind,
    pub case: Case,
    /// Sample sizes and caps. Threshold fields are filled from `thresholds`.
    pub cfg: TestConfig,
    pub thresholds: ThresholdRules,
    pub truth: Truth,
    pub q_policy: QPolicy,
    pub trials: usize,
    pub base_seed: u64,
}

impl ExperimentSpec {
    /// The test configuration with thresholds resolved against the problem.
    pub fn test_config(&self) -> Result<TestConfig> {
        let needs_null = self.case == Case::General || self.truth == Truth::Null;
        if needs_null && self.problem.null_cluster().is_none() {
            return Err(Error::MissingNull);
        }
        let (d1, d2) = case_distances(&self.problem, self.case)?;
        let r = |t: Option<Threshold>| t.map(|t| t.resolve(d1, d2));
        let cfg = TestConfig {
            alpha: self.problem.alpha(),
            lambda: r(self.thresholds.lambda),
            lambda1: r(self.thresholds.lambda1),
            lambda2: r(self.thresholds.lambda2),
            lambda3: r(self.thresholds.lambda3),
            ..self.cfg
        };
        cfg.validate(self.test, self.case)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<TestConfig> {
        if self.trials < 1 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        match self.truth {
            Truth::Null if self.case == Case::Simple => {
                return Err(Error::invalid("truth", "null hypothesis requires the general case"));
            }
            Truth::Hypothesis(i) if i >= self.problem.num_clusters() => {
                return Err(Error::invalid(
                    "truth",
                    format!("H{} out of range for {} clusters", i + 1, self.problem.num_clusters()),
                ));
            }
            _ => {}
        }
        self.test_config()
    }

    /// Testing law for one trial under the configured policy.
    fn testing_model(&self, rng: &mut ChaCha8Rng) -> Result<GaussianModel> {
        let p = &self.problem;
        let k = p.kernel();
        let (cluster, exclude) = match self.truth {
            Truth::Hypothesis(i) => (p.clusters()[i], Some(i)),
            Truth::Null => (*p.null_cluster().ok_or(Error::MissingNull)?, None),
        };
        let interval = cluster.as_mean_interval(k);
        match self.q_policy {
            QPolicy::Center => Ok(cluster.center),
            QPolicy::WorstCaseTowardNearest => {
                let j = p.nearest_center(&cluster.center, exclude)?;
                worst_case_q(&interval, Some(&p.clusters()[j].center), k)
            }
            QPolicy::UniformInSet => {
                let r = interval.mean_radius(k);
                if !r.is_finite() {
                    return Err(Error::invalid("q_policy", "uniform draw needs a bounded uncertainty set"));
                }
                let eps = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
                Ok(cluster.center.with_mean(cluster.center.mean + eps))
            }
        }
    }

    pub fn with_override(&self, o: &GridOverride) -> Result<Self> {
        let mut s = self.clone();
        match *o {
            GridOverride::N(v) => s.cfg.n = v,
            GridOverride::N0(v) => s.cfg.n0 = v,
            GridOverride::K(v) => s.cfg.k = v,
            GridOverride::Lambda(v) => s.thresholds.lambda = Some(Threshold::Value(v)),
            GridOverride::Lambda1(v) => s.thresholds.lambda1 = Some(Threshold::Value(v)),
            GridOverride::Lambda2(v) => s.thresholds.lambda2 = Some(Threshold::Value(v)),
            GridOverride::Lambda3(v) => s.thresholds.lambda3 = Some(Threshold::Value(v)),
            GridOverride::Trials(v) => s.trials = v,
            GridOverride::Truth(t) => s.truth = t,
            GridOverride::Delta(d) => {
                s.problem = self
                    .problem
                    .with_uncertainty_size(d)
                    .map_err(|e| Error::invalid("delta", e.to_string()))?;
            }
        }
        s.validate().map_err(|e| match e {
            Error::Invalid { field, rule } => Error::invalid(format!("{}: {field}", o.param()), rule),
            other => Error::invalid(o.param(), other.to_string()),
        })?;
        Ok(s)
    }
}

/// Counter-based substream for `(seed, trial, stream)`.
pub fn substream(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos(u128::from(stream) << 40);
    rng
}

/// Gaussian testing and training streams for one trial. Tracks the time
/// spent sampling so it can be excluded from the test's running time.
pub struct GaussianSource {
    test: (Normal<f64>, ChaCha8Rng),
    training: Vec<(Normal<f64>, ChaCha8Rng)>,
    sampling: Duration,
}

impl GaussianSource {
    pub fn new(testing: &GaussianModel, training: &[GaussianModel], seed: u64, trial: u64) -> Self {
        let normal = |m: &GaussianModel| Normal::new(m.mean, m.std_dev()).expect("validated model");
        Self {
            test: (normal(testing), substream(seed, trial, 0)),
            training: training
                .iter()
                .enumerate()
                .map(|(j, m)| (normal(m), substream(seed, trial, j as u64 + 1)))
                .collect(),
            sampling: Duration::ZERO,
        }
    }

    pub fn sampling_time(&self) -> Duration {
        self.sampling
    }
}

impl SampleSource for GaussianSource {
    fn streams(&self) -> usize {
        self.training.len()
    }

    fn next_test(&mut self) -> Result<f64> {
        let t = Instant::now();
        let (d, rng) = &mut self.test;
        let v = d.sample(rng);
        self.sampling += t.elapsed();
        Ok(v)
    }

    fn next_training(&mut self, stream: usize) -> Result<f64> {
        let t = Instant::now();
        let (d, rng) = &mut self.training[stream];
        let v = d.sample(rng);
        self.sampling += t.elapsed();
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    pub correct: bool,
    /// Seconds spent in the test itself, excluding sampling.
    pub wall_time: f64,
}

fn is_correct(truth: Truth, d: Decision) -> bool {
    match (truth, d) {
        (Truth::Hypothesis(i), Decision::Hypothesis(j)) => i == j,
        (Truth::Null, Decision::Null) => true,
        _ => false,
    }
}

fn trial_with(spec: &ExperimentSpec, cfg: &TestConfig, trial_index: u64) -> Result<TrialOutcome> {
    let m = spec.problem.num_clusters();
    let mut policy_rng = substream(spec.base_seed, trial_index, m as u64 + 1);
    let q = spec.testing_model(&mut policy_rng)?;
    let centers: Vec<GaussianModel> = spec.problem.clusters().iter().map(|c| c.center).collect();
    let mut src = GaussianSource::new(&q, &centers, spec.base_seed, trial_index);
    let start = Instant::now();
    let verdict = run_test(&mut src, spec.test, cfg, spec.case, spec.problem.kernel())?;
    let wall = start.elapsed().saturating_sub(src.sampling_time());
    Ok(TrialOutcome {
        verdict,
        correct: is_correct(spec.truth, verdict.decision),
        wall_time: wall.as_secs_f64(),
    })
}

pub fn run_trial(spec: &ExperimentSpec, trial_index: u64) -> Result<TrialOutcome> {
    let cfg = spec.validate()?;
    trial_with(spec, &cfg, trial_index)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub trials: usize,
    pub errors: usize,
    pub censored: usize,
    /// Empirical misclassification (or false alarm) probability.
    pub error_prob: f64,
    /// Half-width of the 95% interval.
    pub error_ci95: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_tau: f64,
    pub mean_wall_time: f64,
    pub censored_fraction: f64,
}

const Z95: f64 = 1.959963984540054;

/// 95% interval for a binomial proportion: Wald in the interior, Wilson when
/// the count is 0 or `n`. Returns `(low, high)` clipped to `[0, 1]`.
pub fn binomial_ci95(count: usize, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = count as f64 / nf;
    if count == 0 || count == n {
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        if count == 0 {
            (0.0, (center + half).min(1.0))
        } else {
            ((center - half).max(0.0), 1.0)
        }
    } else {
        let half = Z95 * (p * (1.0 - p) / nf).sqrt();
        ((p - half).max(0.0), (p + half).min(1.0))
    }
}

impl ExperimentResult {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len();
        let errors = outcomes.iter().filter(|o| !o.correct).count();
        let censored = outcomes.iter().filter(|o| o.verdict.decision == Decision::Censored).count();
        let tau_sum: u64 = outcomes.iter().map(|o| o.verdict.tau as u64).sum();
        let wall: f64 = outcomes.iter().map(|o| o.wall_time).sum();
        let nf = trials as f64;
        let (ci_low, ci_high) = binomial_ci95(errors, trials);
        Self {
            trials,
            errors,
            censored,
            error_prob: errors as f64 / nf,
            error_ci95: (ci_high - ci_low) / 2.0,
            ci_low,
            ci_high,
            mean_tau: tau_sum as f64 / nf,
            mean_wall_time: wall / nf,
            censored_fraction: censored as f64 / nf,
        }
    }
}

/// Runs experiments on a fixed-size worker pool.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// All trial outcomes, in trial-index order.
    pub fn outcomes(&self, spec: &ExperimentSpec) -> Result<Vec<TrialOutcome>> {
        let cfg = spec.validate()?;
        self.pool.install(|| {
            (0..spec.trials as u64)
                .into_par_iter()
                .map(|i| trial_with(spec, &cfg, i))
                .collect()
        })
    }

    pub fn estimate(&self, spec: &ExperimentSpec) -> Result<ExperimentResult> {
        Ok(ExperimentResult::from_outcomes(&self.outcomes(spec)?))
    }

    /// One result per grid point, in grid order.
    pub fn sweep(&self, spec: &ExperimentSpec, grid: &[GridOverride]) -> Result<Vec<SweepRow>> {
        grid.iter()
            .map(|o| {
                let s = spec.with_override(o)?;
                Ok(SweepRow {
                    param: o.param(),
                    x_value: o.x_value(),
                    result: self.estimate(&s)?,
                    seed: s.base_seed,
                })
            })
            .collect()
    }
}

pub fn estimate(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentResult> {
    Runner::new(workers)?.estimate(spec)
}

/// A single-parameter change applied at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridOverride {
    N(usize),
    N0(usize),
    K(usize),
    Lambda(f64),
    Lambda1(f64),
    Lambda2(f64),
    Lambda3(f64),
    Trials(usize),
    Truth(Truth),
    /// Size of every uncertainty set (radius or MMD-ball delta).
    Delta(f64),
}

impl GridOverride {
    pub fn param(&self) -> &'static str {
        match self {
            GridOverride::N(_) => "n",
            GridOverride::N0(_) => "N0",
            GridOverride::K(_) => "K",
            GridOverride::Lambda(_) => "lambda",
            GridOverride::Lambda1(_) => "lambda1",
            GridOverride::Lambda2(_) => "lambda2",
            GridOverride::Lambda3(_) => "lambda3",
            GridOverride::Trials(_) => "trials",
            GridOverride::Truth(_) => "truth",
            GridOverride::Delta(_) => "delta",
        }
    }

    /// Numeric x-axis value; the null hypothesis maps to 0 and `Hi` to `i`.
    pub fn x_value(&self) -> f64 {
        match *self {
            GridOverride::N(v) | GridOverride::N0(v) | GridOverride::K(v) | GridOverride::Trials(v) => v as f64,
            GridOverride::Lambda(v)
            | GridOverride::Lambda1(v)
            | GridOverride::Lambda2(v)
            | GridOverride::Lambda3(v)
            | GridOverride::Delta(v) => v,
            GridOverride::Truth(Truth::Null) => 0.0,
            GridOverride::Truth(Truth::Hypothesis(i)) => (i + 1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: &'static str,
    pub x_value: f64,
    pub result: ExperimentResult,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clusters::ClusterSpec;
    use crate::kernel::KernelSpec;

    fn two_far(radius: f64) -> Problem {
        Problem::new(
            vec![ClusterSpec::mean_interval(0.0, 1.0, radius).unwrap(), ClusterSpec::mean_interval(50.0, 1.0, radius).unwrap()],
            Some(ClusterSpec::mean_interval(100.0, 1.0, radius).unwrap()),
            KernelSpec::gaussian(1.0).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn spec(problem: Problem) -> ExperimentSpec {
        ExperimentSpec {
            problem,
            test: TestKind::Fixed,
            case: Case::Simple,
            cfg: TestConfig { n: 40, ..TestConfig::default() },
            thresholds: ThresholdRules::default(),
            truth: Truth::Hypothesis(0),
            q_policy: QPolicy::WorstCaseTowardNearest,
            trials: 200,
            base_seed: 11,
        }
    }

    #[test]
    fn separated_clusters_never_err() {
        let r = estimate(&spec(two_far(0.0)), 2).unwrap();
        assert_eq!(r.errors, 0);
        assert_eq!(r.mean_tau, 40.0);
        assert!(r.ci_low == 0.0 && r.ci_high > 0.0 && r.ci_high < 0.05);
    }

    #[test]
    fn trial_determinism() {
        let s = spec(two_far(0.1));
        let a = run_trial(&s, 17).unwrap();
        let b = run_trial(&s, 17).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.correct, b.correct);
    }

    #[test]
    fn null_truth_needs_general_case() {
        let s = ExperimentSpec { truth: Truth::Null, ..spec(two_far(0.0)) };
        assert!(matches!(run_trial(&s, 0), Err(Error::Invalid { field, .. }) if field == "truth"));
    }

    #[test]
    fn single_trial_interval() {
        let r = estimate(&ExperimentSpec { trials: 1, ..spec(two_far(0.0)) }, 1).unwrap();
        assert!(r.error_prob == 0.0 || r.error_prob == 1.0);
        assert!(r.ci_low >= 0.0 && r.ci_high <= 1.0);
    }

    #[test]
    fn always_false_alarm_when_lambda_exceeds_range() {
        let s = ExperimentSpec {
            case: Case::General,
            truth: Truth::Null,
            thresholds: ThresholdRules {
                lambda: Some(Threshold::Value(2.5)),
                ..Default::default()
            },
            trials: 10_000,
            cfg: TestConfig { n: 10, ..TestConfig::default() },
            ..spec(two_far(0.1))
        };
        let r = estimate(&s, 4).unwrap();
        assert_eq!(r.error_prob, 1.0);
        assert!(r.censored_fraction <= r.error_prob);
    }

    #[test]
    fn substreams_are_distinct_and_stable() {
        let mut a = substream(1, 2, 3);
        let mut b = substream(1, 2, 3);
        let mut c = substream(1, 2, 4);
        let mut d = substream(1, 3, 3);
        let (x, y, z, w): (u64, u64, u64, u64) = (a.random(), b.random(), c.random(), d.random());
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_ne!(x, w);
    }

    #[test]
    fn truth_parsing() {
        assert_eq!("H1".parse::<Truth>().unwrap(), Truth::Hypothesis(0));
        assert_eq!("null".parse::<Truth>().unwrap(), Truth::Null);
        assert!("H0".parse::<Truth>().is_err());
        assert!("x".parse::<Truth>().is_err());
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let runner = Runner::new(2).unwrap();
        let s = ExperimentSpec { trials: 50, ..spec(two_far(0.1)) };
        assert!(runner.sweep(&s, &[]).unwrap().is_empty());
        let rows = runner.sweep(&s, &[GridOverride::N(5), GridOverride::N(9)]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].result.mean_tau, 9.0);
        assert!(matches!(runner.sweep(&s, &[GridOverride::N(1)]), Err(Error::Invalid { field, .. }) if field.starts_with("n")));
    }

    #[test]
    fn wilson_at_boundaries() {
        let (lo, hi) = binomial_ci95(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
        let (lo, hi) = binomial_ci95(100, 100);
        assert!(lo > 0.96 && hi == 1.0);
        let (lo, hi) = binomial_ci95(50, 100);
        assert!((hi - lo - 2.0 * Z95 * 0.05).abs() < 1e-12);
    }
}
