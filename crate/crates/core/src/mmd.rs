//! Unbiased MMD² estimator between two sample sequences.
//!
//! For `x` of length `n1` and `y` of length `n2`:
//!
//! ```text
//! MMD²(x, y) = s_xx / (n1 (n1 - 1)) + s_yy / (n2 (n2 - 1)) - 2 s_xy / (n1 n2)
//! ```
//!
//! where `s_xx` and `s_yy` sum the kernel over ordered pairs `i != j` and
//! `s_xy` sums over all cross pairs. The estimator is a U-statistic and can be
//! negative; values are never clipped.
//!
//! [`MmdAccumulator`] keeps the three sums under sample appends, and
//! [`MmdBank`] does the same for one testing stream against many training
//! streams, sharing the testing-side sum.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// An append-only sequence of finite observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sequence(Vec<f64>);

impl Sequence {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(samples))
    }

    pub fn push(&mut self, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            return Err(Error::NonFinite {
                index: self.0.len(),
                value: sample,
            });
        }
        self.0.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Sequence {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn row_sum(k: &KernelSpec, v: f64, others: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for &o in others {
        s.add(k.eval(v, o));
    }
    s.value()
}

fn combine(s_xx: f64, s_yy: f64, s_xy: f64, n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    s_xx / (a * (a - 1.0)) + s_yy / (b * (b - 1.0)) - 2.0 * s_xy / (a * b)
}

fn check_len(what: &'static str, len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::Length { what, len, min: 2 });
    }
    Ok(())
}

/// Sum of `k(x_i, x_j)` over ordered pairs `i != j`.
fn within_sum(k: &KernelSpec, xs: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for (i, &a) in xs.iter().enumerate() {
        s.add(row_sum(k, a, &xs[..i]));
    }
    2.0 * s.value()
}

fn cross_sum(k: &KernelSpec, xs: &[f64], ys: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for &a in xs {
        s.add(row_sum(k, a, ys));
    }
    s.value()
}

/// Batch evaluation of the unbiased MMD² estimator.
pub fn mmd2_batch(x: &[f64], y: &[f64], k: &KernelSpec) -> Result<f64> {
    check_len("x", x.len())?;
    check_len("y", y.len())?;
    Ok(combine(
        within_sum(k, x),
        within_sum(k, y),
        cross_sum(k, x, y),
        x.len(),
        y.len(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// Streaming form of [`mmd2_batch`] for a single pair of sequences.
#[derive(Debug, Clone)]
pub struct MmdAccumulator {
    kernel: KernelSpec,
    x: Vec<f64>,
    y: Vec<f64>,
    s_xx: CompensatedSum,
    s_yy: CompensatedSum,
    s_xy: CompensatedSum,
}

impl MmdAccumulator {
    pub fn new(kernel: KernelSpec) -> Self {
        Self {
            kernel,
            x: Vec::new(),
            y: Vec::new(),
            s_xx: CompensatedSum::default(),
            s_yy: CompensatedSum::default(),
            s_xy: CompensatedSum::default(),
        }
    }

    /// Appends one sample; cost is linear in the current buffer sizes.
    pub fn push(&mut self, side: Side, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            let index = match side {
                Side::X => self.x.len(),
                Side::Y => self.y.len(),
            };
            return Err(Error::NonFinite { index, value: sample });
        }
        let k = &self.kernel;
        match side {
            Side::X => {
                self.s_xx.add(2.0 * row_sum(k, sample, &self.x));
                self.s_xy.add(row_sum(k, sample, &self.y));
                self.x.push(sample);
            }
            Side::Y => {
                self.s_yy.add(2.0 * row_sum(k, sample, &self.y));
                self.s_xy.add(row_sum(k, sample, &self.x));
                self.y.push(sample);
            }
        }
        Ok(())
    }

    pub fn value(&self) -> Result<f64> {
        check_len("x", self.x.len())?;
        check_len("y", self.y.len())?;
        Ok(combine(
            self.s_xx.value(),
            self.s_yy.value(),
            self.s_xy.value(),
            self.x.len(),
            self.y.len(),
        ))
    }

    pub fn n1(&self) -> usize {
        self.x.len()
    }

    pub fn n2(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Raw `(s_xx, s_yy, s_xy)` sums.
    pub fn sums(&self) -> (f64, f64, f64) {
        (self.s_xx.value(), self.s_yy.value(), self.s_xy.value())
    }
}

/// One testing stream compared against `M` training streams.
///
/// The testing-side within-sum is computed once and shared by all `M`
/// statistics. `value(j)` equals `mmd2_batch(test, training[j])`.
#[derive(Debug, Clone)]
pub struct MmdBank {
    kernel: KernelSpec,
    test: Vec<f64>,
    s_test: CompensatedSum,
    train: Vec<Vec<f64>>,
    s_train: Vec<CompensatedSum>,
    s_cross: Vec<CompensatedSum>,
}

impl MmdBank {
    pub fn new(kernel: KernelSpec, streams: usize) -> Self {
        Self {
            kernel,
            test: Vec::new(),
            s_test: CompensatedSum::default(),
            train: vec![Vec::new(); streams],
            s_train: vec![CompensatedSum::default(); streams],
            s_cross: vec![CompensatedSum::default(); streams],
        }
    }

    pub fn streams(&self) -> usize {
        self.train.len()
    }

    pub fn push_test(&mut self, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            return Err(Error::NonFinite {
                index: self.test.len(),
                value: sample,
            });
        }
        let k = &self.kernel;
        self.s_test.add(2.0 * row_sum(k, sample, &self.test));
        for (ys, cross) in self.train.iter().zip(self.s_cross.iter_mut()) {
            cross.add(row_sum(k, sample, ys));
        }
        self.test.push(sample);
        Ok(())
    }

    pub fn push_training(&mut self, stream: usize, sample: f64) -> Result<()> {
        if !sample.is_finite() {
            return Err(Error::NonFinite {
                index: self.train[stream].len(),
                value: sample,
            });
        }
        let k = &self.kernel;
        let ys = &mut self.train[stream];
        self.s_train[stream].add(2.0 * row_sum(k, sample, ys));
        self.s_cross[stream].add(row_sum(k, sample, &self.test));
        ys.push(sample);
        Ok(())
    }

    pub fn test_len(&self) -> usize {
        self.test.len()
    }

    pub fn training_len(&self, stream: usize) -> usize {
        self.train[stream].len()
    }

    pub fn test(&self) -> &[f64] {
        &self.test
    }

    pub fn training(&self, stream: usize) -> &[f64] {
        &self.train[stream]
    }

    pub fn value(&self, stream: usize) -> Result<f64> {
        check_len("testing sequence", self.test.len())?;
        check_len("training sequence", self.train[stream].len())?;
        Ok(combine(
            self.s_test.value(),
            self.s_train[stream].value(),
            self.s_cross[stream].value(),
            self.test.len(),
            self.train[stream].len(),
        ))
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        (0..self.streams()).map(|j| self.value(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k1() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-15
    }

    #[test]
    fn batch_examples() {
        assert_eq!(mmd2_batch(&[0.0, 0.0], &[0.0, 0.0], &k1()).unwrap(), 0.0);
        let v = mmd2_batch(&[0.0, 1.0], &[0.0, 1.0], &k1()).unwrap();
        assert!((v - ((-0.5f64).exp() - 1.0)).abs() < 1e-15);
        assert!((v + 0.39347).abs() < 1e-5);
    }

    #[test]
    fn batch_length_errors() {
        assert!(matches!(
            mmd2_batch(&[0.0], &[0.0, 1.0], &k1()),
            Err(Error::Length { what: "x", len: 1, .. })
        ));
        assert!(matches!(mmd2_batch(&[0.0, 1.0], &[], &k1()), Err(Error::Length { .. })));
    }

    #[test]
    fn accumulator_examples() {
        let mut acc = MmdAccumulator::new(k1());
        for (s, v) in [(Side::X, 0.0), (Side::X, 0.0), (Side::Y, 0.0), (Side::Y, 0.0)] {
            acc.push(s, v).unwrap();
        }
        assert_eq!(acc.value().unwrap(), 0.0);

        let mut acc = MmdAccumulator::new(k1());
        for (s, v) in [(Side::Y, 1.0), (Side::X, 0.0), (Side::Y, 0.0), (Side::X, 1.0)] {
            acc.push(s, v).unwrap();
        }
        assert!((acc.value().unwrap() - ((-0.5f64).exp() - 1.0)).abs() < 1e-15);

        let mut acc = MmdAccumulator::new(k1());
        acc.push(Side::X, 0.0).unwrap();
        acc.push(Side::Y, 0.0).unwrap();
        acc.push(Side::Y, 0.0).unwrap();
        assert!(matches!(acc.value(), Err(Error::Length { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Sequence::new(vec![0.0, f64::NAN]).is_err());
        let mut acc = MmdAccumulator::new(k1());
        assert!(acc.push(Side::X, f64::INFINITY).is_err());
        assert_eq!(acc.n1(), 0);
    }

    #[test]
    fn sums_within_pair_bounds() {
        let mut acc = MmdAccumulator::new(k1());
        for i in 0..30 {
            acc.push(if i % 3 == 0 { Side::Y } else { Side::X }, (i as f64 * 0.37).sin()).unwrap();
        }
        let (xx, yy, xy) = acc.sums();
        let (n1, n2) = (acc.n1() as f64, acc.n2() as f64);
        assert!(xx >= 0.0 && xx <= n1 * (n1 - 1.0));
        assert!(yy >= 0.0 && yy <= n2 * (n2 - 1.0));
        assert!(xy >= 0.0 && xy <= n1 * n2);
    }

    #[test]
    fn bank_matches_batch() {
        let k = KernelSpec::gaussian(0.7).unwrap();
        let mut bank = MmdBank::new(k, 3);
        for i in 0..40 {
            let t = (i as f64 * 1.3).cos();
            bank.push_test(t).unwrap();
            for j in 0..3 {
                if i % (j + 1) == 0 {
                    bank.push_training(j, t + j as f64 + (i as f64).sin()).unwrap();
                }
            }
        }
        for j in 0..3 {
            let b = mmd2_batch(bank.test(), bank.training(j), &k).unwrap();
            assert!(rel_close(bank.value(j).unwrap(), b, 1e-12));
        }
    }

    fn pushes() -> impl Strategy<Value = Vec<(bool, f64)>> {
        prop::collection::vec((any::<bool>(), -5.0f64..5.0), 4..200)
    }

    proptest! {
        #[test]
        fn incremental_equals_batch(ops in pushes(), sigma in 0.2f64..3.0) {
            let k = KernelSpec::gaussian(sigma).unwrap();
            let mut acc = MmdAccumulator::new(k);
            for &(is_x, v) in &ops {
                acc.push(if is_x { Side::X } else { Side::Y }, v).unwrap();
            }
            if acc.n1() >= 2 && acc.n2() >= 2 {
                let inc = acc.value().unwrap();
                let batch = mmd2_batch(acc.x(), acc.y(), &k).unwrap();
                prop_assert!(rel_close(inc, batch, 1e-9), "{} vs {}", inc, batch);
                prop_assert!(inc.abs() <= 2.0 * k.sup_bound() + 1e-12);
            }
        }

        #[test]
        fn permutation_invariant(mut xs in prop::collection::vec(-3.0f64..3.0, 2..30),
                                 ys in prop::collection::vec(-3.0f64..3.0, 2..30)) {
            let k = k1();
            let a = mmd2_batch(&xs, &ys, &k).unwrap();
            xs.reverse();
            xs.rotate_left(1);
            let b = mmd2_batch(&xs, &ys, &k).unwrap();
            prop_assert!(rel_close(a, b, 1e-12));
        }
    }
}
