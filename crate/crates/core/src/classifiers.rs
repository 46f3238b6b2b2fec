//! Fixed-length, sequential and two-phase MMD classifiers, each with and
//! without a null hypothesis.
//!
//! All tests rank the `M` training sequences by their MMD² to the testing
//! sequence. Hypotheses are zero-based indices into the training streams and
//! are rendered as `H1..HM` for display and JSON.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponents::{Case, TestKind};
use crate::kernel::KernelSpec;
use crate::mmd::{mmd2_batch, MmdBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// The testing sequence matches training stream `i` (zero-based).
    Hypothesis(usize),
    Null,
    /// A sequential test reached `tau_max` without stopping.
    Censored,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Hypothesis(i) => write!(f, "H{}", i + 1),
            Decision::Null => f.write_str("null"),
            Decision::Censored => f.write_str("censored"),
        }
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    /// Number of testing samples consumed.
    pub tau: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

/// Training length paired with testing length `n`: `ceil(alpha * n)`.
///
/// Products within `1e-9` of an integer are treated as that integer so that
/// e.g. `0.3 * 10` gives 3.
pub fn training_len(alpha: f64, n: usize) -> usize {
    let v = alpha * n as f64;
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// Parameters of a test run. Thresholds not used by a given design may be
/// left unset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    /// Fixed-length sample size, or first-phase size for the two-phase test.
    pub n: usize,
    /// Sequential start: the first check happens at `n0 - 1` samples.
    pub n0: usize,
    /// Two-phase multiplier.
    pub k: usize,
    pub lambda: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub tau_max: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            n: 40,
            n0: 40,
            k: 2,
            lambda: None,
            lambda1: None,
            lambda2: None,
            lambda3: None,
            tau_max: 10_000,
        }
    }
}

fn need(v: Option<f64>, field: &str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(Error::invalid(field, format!("must be finite, got {x}"))),
        None => Err(Error::invalid(field, "required for this test")),
    }
}

impl TestConfig {
    /// Checks the fields the given design uses.
    pub fn validate(&self, test: TestKind, case: Case) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        match test {
            TestKind::Fixed | TestKind::TwoPhase => {
                if self.n < 2 {
                    return Err(Error::invalid("n", "must be at least 2"));
                }
                if training_len(self.alpha, self.n) < 2 {
                    return Err(Error::invalid("alpha", "ceil(alpha * n) must be at least 2"));
                }
            }
            TestKind::Sequential => {
                if self.n0 < 3 {
                    return Err(Error::invalid("N0", "must be at least 3 so the first check sees 2 samples"));
                }
                if training_len(self.alpha, self.n0 - 1) < 2 {
                    return Err(Error::invalid("alpha", "ceil(alpha * (N0 - 1)) must be at least 2"));
                }
                if self.tau_max < self.n0 {
                    return Err(Error::invalid("tau_max", "must be at least N0"));
                }
            }
        }
        if test == TestKind::TwoPhase && self.k < 1 {
            return Err(Error::invalid("K", "must be at least 1"));
        }
        match (test, case) {
            (TestKind::Fixed, Case::Simple) => {}
            (TestKind::Fixed, Case::General) | (_, Case::Simple) => {
                need(self.lambda, "lambda")?;
            }
            (TestKind::Sequential, Case::General) | (TestKind::TwoPhase, Case::General) => {
                let l1 = need(self.lambda1, "lambda1")?;
                let l2 = need(self.lambda2, "lambda2")?;
                if l1 > l2 {
                    return Err(Error::invalid("lambda1", format!("lambda1 = {l1} must not exceed lambda2 = {l2}")));
                }
                if test == TestKind::TwoPhase {
                    need(self.lambda3, "lambda3")?;
                }
            }
        }
        Ok(())
    }
}

/// Streaming provider of testing and training samples.
pub trait SampleSource {
    /// Number of training streams `M`.
    fn streams(&self) -> usize;
    fn next_test(&mut self) -> Result<f64>;
    fn next_training(&mut self, stream: usize) -> Result<f64>;
}

impl<S: SampleSource + ?Sized> SampleSource for &mut S {
    fn streams(&self) -> usize {
        (**self).streams()
    }

    fn next_test(&mut self) -> Result<f64> {
        (**self).next_test()
    }

    fn next_training(&mut self, stream: usize) -> Result<f64> {
        (**self).next_training(stream)
    }
}

/// Replays fixed sample vectors, optionally cycling them forever.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    test: Vec<f64>,
    training: Vec<Vec<f64>>,
    test_pos: usize,
    training_pos: Vec<usize>,
    cycle: bool,
}

impl ReplaySource {
    pub fn new(test: Vec<f64>, training: Vec<Vec<f64>>) -> Self {
        let m = training.len();
        Self {
            test,
            training,
            test_pos: 0,
            training_pos: vec![0; m],
            cycle: false,
        }
    }

    pub fn cycling(mut self) -> Self {
        self.cycle = true;
        self
    }

    fn take(buf: &[f64], pos: &mut usize, cycle: bool, what: &str) -> Result<f64> {
        if buf.is_empty() || (!cycle && *pos >= buf.len()) {
            return Err(Error::SourceExhausted(format!("{what} has only {} samples", buf.len())));
        }
        let v = buf[*pos % buf.len()];
        *pos += 1;
        Ok(v)
    }
}

impl SampleSource for ReplaySource {
    fn streams(&self) -> usize {
        self.training.len()
    }

    fn next_test(&mut self) -> Result<f64> {
        Self::take(&self.test, &mut self.test_pos, self.cycle, "testing sequence")
    }

    fn next_training(&mut self, stream: usize) -> Result<f64> {
        let what = format!("training sequence {}", stream + 1);
        Self::take(&self.training[stream], &mut self.training_pos[stream], self.cycle, &what)
    }
}

/// Outcome of ranking the training sequences by MMD² to the testing sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank {
    /// Index of the smallest statistic (lowest index on ties).
    pub best: usize,
    pub min: f64,
    /// Smallest statistic over the other indices.
    pub second: f64,
}

pub fn rank_values(values: &[f64]) -> Result<Rank> {
    if values.len() < 2 {
        return Err(Error::invalid("training sequences", "need at least 2"));
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    let second = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    Ok(Rank {
        best,
        min: values[best],
        second,
    })
}

pub fn rank<Y: AsRef<[f64]>>(x: &[f64], ys: &[Y], k: &KernelSpec) -> Result<Rank> {
    let values = ys
        .iter()
        .map(|y| mmd2_batch(x, y.as_ref(), k))
        .collect::<Result<Vec<_>>>()?;
    rank_values(&values)
}

fn decide(r: &Rank, case: Case, lambda: Option<f64>) -> Result<Decision> {
    Ok(match case {
        Case::Simple => Decision::Hypothesis(r.best),
        Case::General => {
            if r.min < need(lambda, "lambda")? {
                Decision::Hypothesis(r.best)
            } else {
                Decision::Null
            }
        }
    })
}

/// Fixed-length decision on complete sequences; `tau` is the testing length.
pub fn classify_fixed<Y: AsRef<[f64]>>(
    x: &[f64],
    ys: &[Y],
    k: &KernelSpec,
    case: Case,
    lambda: Option<f64>,
) -> Result<Verdict> {
    let r = rank(x, ys, k)?;
    Ok(Verdict {
        decision: decide(&r, case, lambda)?,
        tau: x.len(),
        phase: None,
    })
}

/// Buffers drawn from a source so far.
struct Drawn {
    x: Vec<f64>,
    ys: Vec<Vec<f64>>,
}

impl Drawn {
    fn new(m: usize) -> Self {
        Self {
            x: Vec::new(),
            ys: vec![Vec::new(); m],
        }
    }

    fn extend_to<S: SampleSource>(&mut self, src: &mut S, n: usize, alpha: f64) -> Result<()> {
        let big_n = training_len(alpha, n);
        for (j, y) in self.ys.iter_mut().enumerate() {
            while y.len() < big_n {
                y.push(src.next_training(j)?);
            }
        }
        while self.x.len() < n {
            self.x.push(src.next_test()?);
        }
        Ok(())
    }
}

/// Draws `n` testing and `ceil(alpha n)` training samples, then decides.
pub fn run_fixed<S: SampleSource>(mut src: S, cfg: &TestConfig, case: Case, k: &KernelSpec) -> Result<Verdict> {
    cfg.validate(TestKind::Fixed, case)?;
    let mut d = Drawn::new(src.streams());
    d.extend_to(&mut src, cfg.n, cfg.alpha)?;
    classify_fixed(&d.x, &d.ys, k, case, cfg.lambda)
}

fn should_stop(r: &Rank, case: Case, cfg: &TestConfig) -> Result<bool> {
    Ok(match case {
        Case::Simple => r.second > need(cfg.lambda, "lambda")?,
        Case::General => {
            let l1 = need(cfg.lambda1, "lambda1")?;
            let l2 = need(cfg.lambda2, "lambda2")?;
            (r.min < l1 && r.second > l2) || r.min > l2
        }
    })
}

fn final_lambda(case: Case, cfg: &TestConfig) -> Option<f64> {
    match case {
        Case::Simple => None,
        Case::General => cfg.lambda1,
    }
}

/// Sequential test. Checks the stopping rule at `n = N0 - 1, N0, ...` after
/// extending every training stream to `ceil(alpha n)` samples and adding the
/// `n`-th testing sample. Returns `Censored` at `tau_max`.
pub fn run_sequential<S: SampleSource>(mut src: S, cfg: &TestConfig, case: Case, k: &KernelSpec) -> Result<Verdict> {
    cfg.validate(TestKind::Sequential, case)?;
    let m = src.streams();
    let mut bank = MmdBank::new(*k, m);
    let mut values = vec![0.0; m];
    for n in (cfg.n0 - 1)..=cfg.tau_max {
        let big_n = training_len(cfg.alpha, n);
        for j in 0..m {
            while bank.training_len(j) < big_n {
                bank.push_training(j, src.next_training(j)?)?;
            }
        }
        while bank.test_len() < n {
            bank.push_test(src.next_test()?)?;
        }
        for (j, v) in values.iter_mut().enumerate() {
            *v = bank.value(j)?;
        }
        let r = rank_values(&values)?;
        if should_stop(&r, case, cfg)? {
            let ys: Vec<&[f64]> = (0..m).map(|j| bank.training(j)).collect();
            return classify_fixed(bank.test(), &ys, k, case, final_lambda(case, cfg));
        }
    }
    Ok(Verdict {
        decision: Decision::Censored,
        tau: cfg.tau_max,
        phase: None,
    })
}

/// Two-phase test: stops after `n` samples if the first-phase rule fires,
/// otherwise extends the same buffers to `K n` samples and decides there.
pub fn run_two_phase<S: SampleSource>(mut src: S, cfg: &TestConfig, case: Case, k: &KernelSpec) -> Result<Verdict> {
    cfg.validate(TestKind::TwoPhase, case)?;
    let mut d = Drawn::new(src.streams());
    d.extend_to(&mut src, cfg.n, cfg.alpha)?;
    let r = rank(&d.x, &d.ys, k)?;
    if should_stop(&r, case, cfg)? {
        let decision = decide(&r, case, final_lambda(case, cfg))?;
        return Ok(Verdict {
            decision,
            tau: cfg.n,
            phase: Some(Phase::First),
        });
    }
    let total = cfg.k * cfg.n;
    d.extend_to(&mut src, total, cfg.alpha)?;
    let lambda = match case {
        Case::Simple => None,
        Case::General => cfg.lambda3,
    };
    let v = classify_fixed(&d.x, &d.ys, k, case, lambda)?;
    Ok(Verdict {
        phase: Some(Phase::Second),
        ..v
    })
}

/// Dispatches to the configured design.
pub fn run_test<S: SampleSource>(src: S, test: TestKind, cfg: &TestConfig, case: Case, k: &KernelSpec) -> Result<Verdict> {
    match test {
        TestKind::Fixed => run_fixed(src, cfg, case, k),
        TestKind::Sequential => run_sequential(src, cfg, case, k),
        TestKind::TwoPhase => run_two_phase(src, cfg, case, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k1() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn const_source() -> ReplaySource {
        ReplaySource::new(vec![0.0], vec![vec![0.0], vec![5.0]]).cycling()
    }

    fn simple_cfg(lambda: f64) -> TestConfig {
        TestConfig {
            alpha: 1.0,
            n: 4,
            n0: 5,
            k: 2,
            lambda: Some(lambda),
            tau_max: 50,
            ..TestConfig::default()
        }
    }

    #[test]
    fn rank_examples() {
        let r = rank(&[0.0, 0.0], &[vec![0.0, 0.0], vec![5.0, 5.0]], &k1()).unwrap();
        assert_eq!(r.best, 0);
        assert_eq!(r.min, 0.0);
        let expect = 2.0 - 2.0 * (-12.5f64).exp();
        assert!((r.second - expect).abs() < 1e-15);

        let r = rank(&[0.3, 1.0], &[vec![0.0, 2.0], vec![0.0, 2.0]], &k1()).unwrap();
        assert_eq!(r.best, 0);
        assert_eq!(r.min, r.second);

        let ys = [vec![-4.0, -3.0], vec![1.0, 2.0], vec![8.0, 9.0]];
        let r = rank(&[1.0, 2.0], &ys, &k1()).unwrap();
        assert_eq!(r.best, 1);
    }

    #[test]
    fn fixed_examples() {
        let ys = [vec![0.0, 0.0], vec![5.0, 5.0]];
        let v = classify_fixed(&[0.0, 0.0], &ys, &k1(), Case::Simple, None).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Hypothesis(0), tau: 2, phase: None });
        let v = classify_fixed(&[0.0, 0.0], &ys, &k1(), Case::General, Some(1.0)).unwrap();
        assert_eq!(v.decision, Decision::Hypothesis(0));
        let far = [vec![5.0, 5.0], vec![-5.0, -5.0]];
        let v = classify_fixed(&[0.0, 0.0], &far, &k1(), Case::General, Some(0.5)).unwrap();
        assert_eq!(v.decision, Decision::Null);
        assert!(classify_fixed(&[0.0], &ys, &k1(), Case::Simple, None).is_err());
        assert!(classify_fixed(&[0.0, 0.0], &ys, &k1(), Case::General, None).is_err());
    }

    #[test]
    fn sequential_examples() {
        let v = run_sequential(const_source(), &simple_cfg(1.0), Case::Simple, &k1()).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Hypothesis(0), tau: 4, phase: None });
        let v = run_sequential(const_source(), &simple_cfg(-5.0), Case::Simple, &k1()).unwrap();
        assert_eq!(v.tau, 4);
        let v = run_sequential(const_source(), &simple_cfg(3.0), Case::Simple, &k1()).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Censored, tau: 50, phase: None });
    }

    #[test]
    fn sequential_general_rule() {
        // min ~ 0 < l1 and second ~ 2 > l2: stop and accept H1
        let cfg = TestConfig {
            lambda1: Some(0.5),
            lambda2: Some(1.0),
            ..simple_cfg(0.0)
        };
        let v = run_sequential(const_source(), &cfg, Case::General, &k1()).unwrap();
        assert_eq!(v.decision, Decision::Hypothesis(0));
        // testing stream far from both: min > l2 stops and declares null
        let mut src = ReplaySource::new(vec![20.0], vec![vec![0.0], vec![5.0]]).cycling();
        let v = run_sequential(&mut src, &cfg, Case::General, &k1()).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Null, tau: 4, phase: None });
    }

    #[test]
    fn sequential_training_growth() {
        struct Counting {
            inner: ReplaySource,
            tests: usize,
            trains: Vec<usize>,
            seen: Vec<(usize, usize)>,
        }
        impl SampleSource for Counting {
            fn streams(&self) -> usize {
                self.inner.streams()
            }
            fn next_test(&mut self) -> Result<f64> {
                self.tests += 1;
                // every training stream must already hold ceil(alpha n) samples
                self.seen.push((self.tests, *self.trains.iter().min().unwrap()));
                self.inner.next_test()
            }
            fn next_training(&mut self, j: usize) -> Result<f64> {
                self.trains[j] += 1;
                self.inner.next_training(j)
            }
        }
        let mut src = Counting {
            inner: ReplaySource::new(vec![0.0, 0.1], vec![vec![0.0, 0.2], vec![0.05, 0.1]]).cycling(),
            tests: 0,
            trains: vec![0, 0],
            seen: Vec::new(),
        };
        let cfg = TestConfig {
            alpha: 1.5,
            lambda: Some(3.0),
            tau_max: 20,
            ..simple_cfg(3.0)
        };
        let v = run_sequential(&mut src, &cfg, Case::Simple, &k1()).unwrap();
        assert_eq!(v.decision, Decision::Censored);
        for &(n, have) in src.seen.iter().skip(4) {
            assert_eq!(have, training_len(1.5, n));
        }
        assert_eq!(src.trains, vec![30, 30]);
    }

    #[test]
    fn two_phase_examples() {
        let cfg = simple_cfg(1.0);
        let v = run_two_phase(const_source(), &cfg, Case::Simple, &k1()).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Hypothesis(0), tau: 4, phase: Some(Phase::First) });
        let v = run_two_phase(const_source(), &simple_cfg(3.0), Case::Simple, &k1()).unwrap();
        assert_eq!(v, Verdict { decision: Decision::Hypothesis(0), tau: 8, phase: Some(Phase::Second) });
    }

    #[test]
    fn two_phase_k1_equals_fixed() {
        let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin()).collect();
        let ys: Vec<Vec<f64>> = (0..3).map(|j| (0..6).map(|i| j as f64 * 0.4 + (i as f64 * 1.1).cos()).collect()).collect();
        let fixed = classify_fixed(&x, &ys, &k1(), Case::Simple, None).unwrap();
        for lambda in [-1.0, 0.1, 3.0] {
            let cfg = TestConfig { n: 6, k: 1, ..simple_cfg(lambda) };
            let v = run_two_phase(ReplaySource::new(x.clone(), ys.clone()), &cfg, Case::Simple, &k1()).unwrap();
            assert_eq!(v.decision, fixed.decision);
            assert_eq!(v.tau, 6);
        }
    }

    #[test]
    fn source_exhaustion() {
        let src = ReplaySource::new(vec![0.0, 0.0, 0.0], vec![vec![0.0; 3], vec![5.0; 3]]);
        assert!(matches!(
            run_sequential(src, &simple_cfg(3.0), Case::Simple, &k1()),
            Err(Error::SourceExhausted(_))
        ));
    }

    #[test]
    fn config_validation() {
        let base = simple_cfg(0.5);
        assert!(base.validate(TestKind::Sequential, Case::Simple).is_ok());
        assert!(TestConfig { n0: 2, ..base }.validate(TestKind::Sequential, Case::Simple).is_err());
        assert!(TestConfig { tau_max: 3, ..base }.validate(TestKind::Sequential, Case::Simple).is_err());
        assert!(TestConfig { alpha: 0.2, ..base }.validate(TestKind::Fixed, Case::Simple).is_err());
        let general = TestConfig {
            lambda1: Some(0.3),
            lambda2: Some(0.2),
            lambda3: Some(0.2),
            ..base
        };
        assert!(matches!(
            general.validate(TestKind::Sequential, Case::General),
            Err(Error::Invalid { field, .. }) if field == "lambda1"
        ));
        assert!(TestConfig { lambda: None, ..base }.validate(TestKind::Fixed, Case::General).is_err());
        assert!(TestConfig { k: 0, ..base }.validate(TestKind::TwoPhase, Case::Simple).is_err());
    }

    #[test]
    fn training_len_rounding() {
        assert_eq!(training_len(1.0, 30), 30);
        assert_eq!(training_len(0.3, 10), 3);
        assert_eq!(training_len(0.5, 3), 2);
        assert_eq!(training_len(2.0, 7), 14);
    }

    #[test]
    fn verdict_json() {
        let v = Verdict { decision: Decision::Hypothesis(0), tau: 2, phase: None };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"decision":"H1","tau":2}"#);
        let v = Verdict { decision: Decision::Null, tau: 8, phase: Some(Phase::Second) };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"decision":"null","tau":8,"phase":"second"}"#);
    }
}
