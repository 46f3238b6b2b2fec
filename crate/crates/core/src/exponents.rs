//! Achievable error exponents and finite-sample probability envelopes.
//!
//! The exponent functions, for `D2 < a < D1`:
//!
//! ```text
//! g1      = (D1 - D2)^2 / (32 K0^2 (1 + 2/alpha))
//! g2(a)   = (D1 - a)^2  / (32 K0^2 (1 + 1/alpha))
//! g3(a)   = (a - D2)^2  / (32 K0^2 (1 + 1/alpha))
//! ```
//!
//! In the general case (with a null hypothesis) the same formulas are used
//! with the barred distances `(D1_bar, D2_bar)`; callers pass those values in
//! [`ExponentParams`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentParams {
    d1: f64,
    d2: f64,
    k0: f64,
    alpha: f64,
}

impl ExponentParams {
    pub fn new(d1: f64, d2: f64, k0: f64, alpha: f64) -> Result<Self> {
        if !(d2 >= 0.0 && d1 > d2 && d1.is_finite()) {
            return Err(Error::Separation { d1, d2 });
        }
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::invalid("K0", format!("must be positive, got {k0}")));
        }
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(Self { d1, d2, k0, alpha })
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn denom(&self, training_sequences: f64) -> f64 {
        32.0 * self.k0 * self.k0 * (1.0 + training_sequences / self.alpha)
    }

    pub fn g1(&self) -> f64 {
        (self.d1 - self.d2).powi(2) / self.denom(2.0)
    }

    pub fn g2(&self, a: f64) -> f64 {
        (self.d1 - a).powi(2) / self.denom(1.0)
    }

    pub fn g3(&self, a: f64) -> f64 {
        (a - self.d2).powi(2) / self.denom(1.0)
    }

    /// Whether `a` lies strictly between `D2` and `D1`.
    pub fn in_range(&self, a: f64) -> bool {
        self.d2 < a && a < self.d1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValues {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// False when `a` is outside `(D2, D1)`; the values are still the raw
    /// formula evaluations.
    pub in_range: bool,
}

pub fn g_funcs(p: &ExponentParams, a: f64) -> GValues {
    GValues {
        g1: p.g1(),
        g2: p.g2(a),
        g3: p.g3(a),
        in_range: p.in_range(a),
    }
}

/// An exponent bound. `Zero` marks regimes where the bound only
/// guarantees a zero exponent, as distinct from a small positive value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Value(f64),
    Zero,
    NotApplicable,
}

impl Exponent {
    fn of(v: f64) -> Self {
        if v > 0.0 {
            Exponent::Value(v)
        } else {
            Exponent::Zero
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Exponent::Value(v) => Some(v),
            Exponent::Zero => Some(0.0),
            Exponent::NotApplicable => None,
        }
    }

    fn num(self) -> f64 {
        self.value().unwrap_or(0.0)
    }

    fn min(self, other: Exponent) -> Exponent {
        Exponent::of(self.num().min(other.num()))
    }

    fn max(self, other: Exponent) -> Exponent {
        Exponent::of(self.num().max(other.num()))
    }

    fn scale(self, k: f64) -> Exponent {
        match self {
            Exponent::Value(v) => Exponent::of(k * v),
            other => other,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Value(v) => write!(f, "{v:.6e}"),
            Exponent::Zero => f.write_str("0 (zero)"),
            Exponent::NotApplicable => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub misclassification: Exponent,
    pub false_alarm: Exponent,
    pub regime_note: String,
}

impl ExponentReport {
    pub fn not_applicable(note: impl Into<String>) -> Self {
        report(Exponent::NotApplicable, Exponent::NotApplicable, note)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Fixed,
    Sequential,
    TwoPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Simple,
    General,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Fixed => "fixed",
            TestKind::Sequential => "sequential",
            TestKind::TwoPhase => "two_phase",
        })
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Simple => "simple",
            Case::General => "general",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thresholds {
    None,
    Single(f64),
    Pair(f64, f64),
    Triple(f64, f64, f64),
}

impl Thresholds {
    fn arity(&self) -> usize {
        match self {
            Thresholds::None => 0,
            Thresholds::Single(_) => 1,
            Thresholds::Pair(..) => 2,
            Thresholds::Triple(..) => 3,
        }
    }
}

fn report(mis: Exponent, fa: Exponent, note: impl Into<String>) -> ExponentReport {
    ExponentReport {
        misclassification: mis,
        false_alarm: fa,
        regime_note: note.into(),
    }
}

/// Misclassification exponent of the general fixed-length test at threshold `l`.
fn fixed_general_mis(p: &ExponentParams, l: f64) -> (Exponent, &'static str) {
    if l >= p.d1() {
        (Exponent::of(p.g1()), "lambda >= D1: simple-case exponent with barred distances")
    } else if l <= p.d2() {
        (Exponent::Zero, "lambda <= D2: misclassification exponent zero")
    } else {
        let v = p.g1().max(p.g2(l)).min(p.g3(l));
        (Exponent::of(v), "D2 < lambda < D1")
    }
}

fn fixed_general_fa(p: &ExponentParams, l: f64) -> Exponent {
    if l < p.d1() {
        Exponent::of(p.g2(l))
    } else {
        Exponent::Zero
    }
}

/// The achievable misclassification and false-alarm exponents for each
/// test design. For `Case::General`, `p` must hold the barred distances.
///
/// Threshold arity: fixed/simple takes none; sequential/simple,
/// two-phase/simple and fixed/general take one; sequential/general takes
/// `(l1, l2)`; two-phase/general takes `(l1, l2, l3)`. Two-phase designs also
/// need `k >= 1`. Boundary values of a threshold (exactly `D1` or `D2`) fall
/// into the degenerate regime.
pub fn achievable_exponents(
    test: TestKind,
    case: Case,
    p: &ExponentParams,
    thresholds: Thresholds,
    k: Option<u32>,
) -> Result<ExponentReport> {
    let expected = match (test, case) {
        (TestKind::Fixed, Case::Simple) => 0,
        (TestKind::Sequential, Case::Simple) | (TestKind::TwoPhase, Case::Simple) | (TestKind::Fixed, Case::General) => 1,
        (TestKind::Sequential, Case::General) => 2,
        (TestKind::TwoPhase, Case::General) => 3,
    };
    if thresholds.arity() != expected {
        return Err(Error::Arity(format!(
            "{test}/{case} needs {expected} threshold(s), got {}",
            thresholds.arity()
        )));
    }
    let k = match (test, k) {
        (TestKind::TwoPhase, Some(k)) if k >= 1 => f64::from(k),
        (TestKind::TwoPhase, _) => return Err(Error::Arity("two-phase test needs K >= 1".into())),
        _ => 1.0,
    };
    if let Thresholds::Pair(l1, l2) | Thresholds::Triple(l1, l2, _) = thresholds {
        if l1 > l2 {
            return Err(Error::Domain(format!("lambda1 = {l1} must not exceed lambda2 = {l2}")));
        }
    }
    let g1 = Exponent::of(p.g1());
    let na = Exponent::NotApplicable;

    Ok(match (test, case, thresholds) {
        (TestKind::Fixed, Case::Simple, _) => report(g1, na, "fixed-length"),

        (TestKind::Sequential, Case::Simple, Thresholds::Single(l)) => {
            if l <= p.d2() {
                report(g1, na, "lambda <= D2: reduces to fixed-length")
            } else if l >= p.d1() {
                report(Exponent::Zero, na, "lambda >= D1: expected stopping time unbounded")
            } else {
                report(g1.max(Exponent::of(p.g3(l))), na, "D2 < lambda < D1")
            }
        }

        (TestKind::TwoPhase, Case::Simple, Thresholds::Single(l)) => {
            if p.in_range(l) {
                let first = g1.max(Exponent::of(p.g3(l)));
                report(first.min(g1.scale(k)), na, "D2 < lambda < D1")
            } else {
                report(g1, na, "lambda outside (D2, D1): reduces to fixed-length")
            }
        }

        (TestKind::Fixed, Case::General, Thresholds::Single(l)) => {
            let (mis, note) = fixed_general_mis(p, l);
            report(mis, fixed_general_fa(p, l), note)
        }

        (TestKind::Sequential, Case::General, Thresholds::Pair(l1, l2)) => {
            let (mis, mis_note) = if p.in_range(l1) && p.in_range(l2) {
                (Exponent::of(p.g3(l2)), "(lambda1, lambda2) in (D2, D1)^2")
            } else {
                (Exponent::Zero, "(lambda1, lambda2) not in (D2, D1)^2: no misclassification guarantee")
            };
            let fa = if l1 < p.d1() {
                Exponent::of(p.g2(l1))
            } else {
                Exponent::Zero
            };
            report(mis, fa, mis_note)
        }

        (TestKind::TwoPhase, Case::General, Thresholds::Triple(l1, l2, l3)) => {
            let (phase2, _) = fixed_general_mis(p, l3);
            let (mis, note) = if p.in_range(l1) && p.in_range(l2) {
                (Exponent::of(p.g3(l2)).min(phase2.scale(k)), "(lambda1, lambda2) in (D2, D1)^2".to_string())
            } else if l1 >= p.d1() || l2 <= p.d2() {
                (phase2, "degenerate first phase: fixed-length with lambda3".to_string())
            } else {
                (Exponent::Zero, "(lambda1, lambda2) not covered: no misclassification guarantee".to_string())
            };
            let fa = if l1 < p.d1() {
                Exponent::of(p.g2(l1)).min(fixed_general_fa(p, l3).scale(k))
            } else {
                fixed_general_fa(p, l3)
            };
            report(mis, fa, note)
        }

        _ => unreachable!("arity checked above"),
    })
}

/// `min(1, (M - 1) exp(-n * exponent))`, the union-bound envelope on the
/// fixed-length misclassification probability.
pub fn finite_n_envelope(n: usize, m: usize, exponent: f64) -> f64 {
    ((m as f64 - 1.0) * (-(n as f64) * exponent).exp()).min(1.0)
}

/// `min(1, M exp(-n * exponent))`, the envelope on the fixed-length false
/// alarm probability under the null.
pub fn false_alarm_envelope(n: usize, m: usize, exponent: f64) -> f64 {
    (m as f64 * (-(n as f64) * exponent).exp()).min(1.0)
}

/// McDiarmid's bounded-differences tail `exp(-2 eps^2 / sum c_k^2)`.
pub fn mcdiarmid_tail(epsilon: f64, c: &[f64]) -> f64 {
    let s: f64 = c.iter().map(|v| v * v).sum();
    (-2.0 * epsilon * epsilon / s).exp()
}

/// Sum of squared bounded-difference constants for the difference of two
/// MMD² statistics sharing a testing sequence of length `n` (two training
/// sequences of length `alpha * n`).
pub fn lipschitz_sum_two_training(k0: f64, alpha: f64, n: usize) -> f64 {
    64.0 * k0 * k0 / n as f64 * (1.0 + 2.0 / alpha)
}

/// Same for a single MMD² statistic at testing length `t`.
pub fn lipschitz_sum_single(k0: f64, alpha: f64, t: usize) -> f64 {
    64.0 * k0 * k0 / t as f64 * (1.0 + 1.0 / alpha)
}
