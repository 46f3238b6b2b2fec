//! Experiment configuration files.
//!
//! A config is a TOML document. Top-level keys set the problem and defaults
//! shared by every experiment; each `[[tests]]` table describes one
//! experiment and an optional one-parameter sweep. Missing keys fall back to
//! the ten-cluster Gaussian setup used throughout the crate's examples.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::TestConfig;
use crate::clusters::{ClusterSpec, Problem, Uncertainty};
use crate::error::{Error, Result};
use crate::exponents::{Case, TestKind};
use crate::kernel::KernelSpec;
use crate::montecarlo::{ExperimentSpec, GridOverride, QPolicy, Threshold, ThresholdRules, Truth};

fn d_alpha() -> f64 {
    1.0
}
fn d_k() -> usize {
    2
}
fn d_seed() -> u64 {
    20_240_501
}
fn d_trials() -> usize {
    50_000
}
fn d_tau_max() -> usize {
    10_000
}
fn d_kernel() -> KernelSpec {
    KernelSpec::gaussian(1.0).expect("positive bandwidth")
}
fn d_n() -> usize {
    40
}
fn d_truth() -> Truth {
    Truth::Hypothesis(0)
}

/// Ten unit-variance clusters at means `0, 1.5, ..., 13.5` with mean radius 0.1.
pub fn default_clusters() -> Vec<ClusterSpec> {
    (0..10)
        .map(|i| ClusterSpec::mean_interval(1.5 * i as f64, 1.0, 0.1).expect("valid cluster"))
        .collect()
}

/// The whole config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    /// Two-phase multiplier.
    #[serde(rename = "K", default = "d_k")]
    pub k: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default = "d_tau_max")]
    pub tau_max: usize,
    #[serde(default)]
    pub q_policy: QPolicy,
    #[serde(default = "d_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "default_clusters")]
    pub clusters: Vec<ClusterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null: Option<ClusterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestEntry>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

/// Thresholds used by the `exponents` report.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    #[serde(flatten)]
    pub thresholds: ThresholdRules,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl ExponentSection {
    /// Thresholds with unset entries filled by fractions of the
    /// separation interval: `lambda` and `lambda3` midway, `lambda1` at a
    /// quarter and `lambda2` at three quarters.
    pub fn resolved_rules(&self) -> ThresholdRules {
        let f = |frac| Some(Threshold::Fraction { frac });
        let t = self.thresholds;
        ThresholdRules {
            lambda: t.lambda.or(f(0.5)),
            lambda1: t.lambda1.or(f(0.25)),
            lambda2: t.lambda2.or(f(0.75)),
            lambda3: t.lambda3.or(f(0.5)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyKind {
    MeanInterval,
    MmdBall,
}

/// One experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestEntry {
    /// Output file stem.
    pub name: String,
    pub test: TestKind,
    pub case: Case,
    #[serde(default = "d_truth")]
    pub truth: Truth,
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(rename = "N0", default = "d_n")]
    pub n0: usize,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(flatten)]
    pub thresholds: ThresholdRules,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_policy: Option<QPolicy>,
    /// Replaces every uncertainty set with this kind, sized by `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(i64),
    Float(f64),
    Text(String),
}

/// A one-parameter grid: explicit `values`, or an inclusive integer `range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<SweepValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
}

/// A validated experiment ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub spec: ExperimentSpec,
    /// Empty when the experiment is a single point.
    pub grid: Vec<GridOverride>,
}

/// Result of parsing: the base problem and every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub problem: Problem,
    pub experiments: Vec<Experiment>,
}

fn problem_error(e: Error, null_field: &str) -> Error {
    match e {
        Error::Separation { d1, d2 } => Error::invalid(
            "clusters",
            format!("d1 <= d2: clusters not separable (d1 = {d1}, d2 = {d2})"),
        ),
        Error::NullTooClose { cluster } => Error::invalid(
            null_field,
            format!("null center lies inside the doubled uncertainty set of cluster {}", cluster + 1),
        ),
        Error::Invalid { field, rule } => Error::Invalid { field, rule },
        other => Error::invalid("clusters", other.to_string()),
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Invalid { field, rule } => Error::Invalid {
            field: format!("{prefix}.{field}"),
            rule,
        },
        Error::MissingNull => Error::invalid(
            format!("{prefix}.case"),
            "general case or null truth requires a null cluster",
        ),
        other => Error::invalid(prefix, other.to_string()),
    }
}

fn int_value(v: &SweepValue, param: &str) -> Result<usize> {
    match v {
        SweepValue::Int(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::invalid(param, format!("expected a nonnegative integer, got {v:?}"))),
    }
}

fn float_value(v: &SweepValue, param: &str) -> Result<f64> {
    match v {
        SweepValue::Int(i) => Ok(*i as f64),
        SweepValue::Float(f) => Ok(*f),
        SweepValue::Text(_) => Err(Error::invalid(param, format!("expected a number, got {v:?}"))),
    }
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<GridOverride>> {
        let values: Vec<SweepValue> = match (&self.range, self.values.is_empty()) {
            (Some(_), false) => return Err(Error::invalid("sweep", "set either values or range, not both")),
            (Some([a, b]), true) => {
                if a > b {
                    return Err(Error::invalid("sweep.range", "start exceeds end"));
                }
                (*a..=*b).map(SweepValue::Int).collect()
            }
            (None, _) => self.values.clone(),
        };
        let p = self.param.as_str();
        values
            .iter()
            .map(|v| {
                Ok(match p {
                    "n" => GridOverride::N(int_value(v, p)?),
                    "N0" => GridOverride::N0(int_value(v, p)?),
                    "K" => GridOverride::K(int_value(v, p)?),
                    "trials" => GridOverride::Trials(int_value(v, p)?),
                    "lambda" => GridOverride::Lambda(float_value(v, p)?),
                    "lambda1" => GridOverride::Lambda1(float_value(v, p)?),
                    "lambda2" => GridOverride::Lambda2(float_value(v, p)?),
                    "lambda3" => GridOverride::Lambda3(float_value(v, p)?),
                    "delta" => GridOverride::Delta(float_value(v, p)?),
                    "truth" => match v {
                        SweepValue::Text(s) => GridOverride::Truth(s.parse()?),
                        _ => return Err(Error::invalid(p, "expected H1..HM or null")),
                    },
                    other => {
                        return Err(Error::invalid(
                            "sweep.param",
                            format!("unknown parameter {other:?}; expected n, N0, K, trials, lambda, lambda1, lambda2, lambda3, delta or truth"),
                        ))
                    }
                })
            })
            .collect()
    }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Canonical TOML rendering; parsing it gives back an equal config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// SHA-256 of the canonical JSON rendering, as lowercase hex.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.clusters.clone(), self.null, self.kernel, self.alpha).map_err(|e| problem_error(e, "null"))
    }

    /// Validates everything and builds the experiments.
    pub fn build(&self) -> Result<Plan> {
        let problem = self.problem()?;
        let mut seen = std::collections::HashSet::new();
        let experiments = self
            .tests
            .iter()
            .map(|t| {
                if t.name.is_empty() || t.name.contains(['/', '\\']) {
                    return Err(Error::invalid("tests.name", format!("{:?} is not a usable file stem", t.name)));
                }
                if !seen.insert(t.name.as_str()) {
                    return Err(Error::invalid("tests.name", format!("duplicate name {:?}", t.name)));
                }
                let prefix = format!("tests[{}]", t.name);
                self.experiment(&problem, t).map_err(|e| prefixed(&prefix, e))
            })
            .collect::<Result<_>>()?;
        Ok(Plan { problem, experiments })
    }

    fn experiment(&self, base: &Problem, t: &TestEntry) -> Result<Experiment> {
        let problem = match (t.uncertainty, t.delta) {
            (None, None) => base.clone(),
            (kind, delta) => {
                let swap = |c: &ClusterSpec| {
                    let size = delta.unwrap_or(c.uncertainty.size());
                    let u = match kind {
                        Some(UncertaintyKind::MmdBall) => Uncertainty::MmdBall { delta: size },
                        Some(UncertaintyKind::MeanInterval) => Uncertainty::MeanInterval { radius: size },
                        None => c.uncertainty.with_size(size),
                    };
                    ClusterSpec::new(c.center, u)
                };
                Problem::new(
                    base.clusters().iter().map(swap).collect::<Result<_>>()?,
                    base.null_cluster().map(swap).transpose()?,
                    *base.kernel(),
                    base.alpha(),
                )
                .map_err(|e| problem_error(e, "null"))?
            }
        };
        let spec = ExperimentSpec {
            problem,
            test: t.test,
            case: t.case,
            cfg: TestConfig {
                alpha: self.alpha,
                n: t.n,
                n0: t.n0,
                k: t.k.unwrap_or(self.k),
                tau_max: t.tau_max.unwrap_or(self.tau_max),
                ..TestConfig::default()
            },
            thresholds: t.thresholds,
            truth: t.truth,
            q_policy: t.q_policy.unwrap_or(self.q_policy),
            trials: t.trials.unwrap_or(self.trials),
            base_seed: t.seed.unwrap_or(self.seed),
        };
        spec.validate()?;
        let grid = match &t.sweep {
            Some(s) => s.grid().map_err(|e| prefixed("sweep", e))?,
            None => Vec::new(),
        };
        for o in &grid {
            spec.with_override(o).map_err(|e| prefixed("sweep", e))?;
        }
        Ok(Experiment {
            name: t.name.clone(),
            spec,
            grid,
        })
    }

    /// Applies command-line overrides to every experiment.
    pub fn override_run(&mut self, seed: Option<u64>, trials: Option<usize>) {
        if let Some(s) = seed {
            self.seed = s;
            for t in &mut self.tests {
                t.seed = None;
            }
        }
        if let Some(n) = trials {
            self.trials = n;
            for t in &mut self.tests {
                t.trials = None;
            }
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<Plan> {
    ConfigFile::from_toml(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_CFG: &str = include_str!("../examples/paper_section5.cfg");

    #[test]
    fn empty_document_is_the_default_problem() {
        let c = ConfigFile::from_toml("").unwrap();
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c.k, 2);
        assert_eq!(c.clusters.len(), 10);
        assert_eq!(c.clusters[3].center.mean, 4.5);
        assert!(c.null.is_none());
        assert!(c.build().unwrap().experiments.is_empty());
    }

    #[test]
    fn shipped_config_parses_to_the_reference_problem() {
        let plan = parse_config(REFERENCE_CFG).unwrap();
        let p = &plan.problem;
        assert_eq!(p.num_clusters(), 10);
        for (i, c) in p.clusters().iter().enumerate() {
            assert_eq!(c.center.mean, 1.5 * i as f64);
            assert_eq!(c.center.variance, 1.0);
            assert_eq!(c.uncertainty, Uncertainty::MeanInterval { radius: 0.1 });
        }
        let null = p.null_cluster().unwrap();
        assert_eq!((null.center.mean, null.center.variance), (15.0, 1.0));
        assert_eq!(p.kernel().sigma0(), 1.0);
        assert_eq!(p.alpha(), 1.0);
        let cfg = ConfigFile::from_toml(REFERENCE_CFG).unwrap();
        assert_eq!(cfg.k, 2);
        let fig1 = plan.experiments.iter().find(|e| e.name == "fig1_fixed").unwrap();
        assert_eq!(fig1.grid.len(), 40);
    }

    #[test]
    fn round_trip() {
        let c = ConfigFile::from_toml(REFERENCE_CFG).unwrap();
        let printed = c.to_toml().unwrap();
        let back = ConfigFile::from_toml(&printed).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.build().unwrap(), c.build().unwrap());
        assert_eq!(back.digest(), c.digest());
    }

    #[test]
    fn lambda_order_is_checked() {
        let text = r#"
            null = { mean = 15.0, radius = 0.1 }
            [[tests]]
            name = "s"
            test = "sequential"
            case = "general"
            lambda1 = 0.2
            lambda2 = 0.1
        "#;
        match parse_config(text) {
            Err(Error::Invalid { field, .. }) => assert!(field.contains("lambda"), "{field}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlapping_clusters_name_separation() {
        let text = "clusters = [{ mean = 0.0, radius = 0.8 }, { mean = 1.5, radius = 0.8 }]";
        match parse_config(text) {
            Err(Error::Invalid { field, rule }) => {
                assert_eq!(field, "clusters");
                assert!(rule.contains("not separable"), "{rule}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn general_case_needs_null() {
        let text = r#"
            [[tests]]
            name = "g"
            test = "fixed"
            case = "general"
            lambda = 0.1
        "#;
        match parse_config(text) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "tests[g].case"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_and_unknown_keys_are_parse_errors() {
        assert!(matches!(parse_config("alpha = "), Err(Error::Parse(_))));
        assert!(matches!(parse_config("alpah = 1.0"), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_sweep_points_are_named() {
        let text = r#"
            [[tests]]
            name = "f"
            test = "fixed"
            case = "simple"
            sweep = { param = "n", values = [5, 1] }
        "#;
        match parse_config(text) {
            Err(Error::Invalid { field, .. }) => assert!(field.starts_with("tests[f].sweep.n"), "{field}"),
            other => panic!("{other:?}"),
        }
        let text = text.replace("\"n\"", "\"sigma\"");
        match parse_config(&text) {
            Err(Error::Invalid { field, .. }) => assert!(field.ends_with("sweep.param"), "{field}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_thresholds_follow_delta() {
        let text = r#"
            [[tests]]
            name = "b"
            test = "sequential"
            case = "simple"
            uncertainty = "mmd_ball"
            delta = 0.01
            lambda = { frac = 0.5 }
            sweep = { param = "delta", values = [0.01, 0.05] }
        "#;
        let plan = parse_config(text).unwrap();
        let e = &plan.experiments[0];
        let a = e.spec.with_override(&e.grid[0]).unwrap().test_config().unwrap().lambda.unwrap();
        let b = e.spec.with_override(&e.grid[1]).unwrap().test_config().unwrap().lambda.unwrap();
        let p = e.spec.problem.with_uncertainty_size(0.05).unwrap();
        assert!((b - (p.d2().unwrap() + p.d1().unwrap()) / 2.0).abs() < 1e-15);
        assert!(b < a);
    }

    #[test]
    fn overrides_clear_per_test_values() {
        let mut c = ConfigFile::from_toml(REFERENCE_CFG).unwrap();
        c.override_run(Some(7), Some(100));
        let plan = c.build().unwrap();
        assert!(plan.experiments.iter().all(|e| e.spec.base_seed == 7 && e.spec.trials == 100));
    }
}
