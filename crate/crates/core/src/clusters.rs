//! Generating distributions, their uncertainty sets, and the inter/intra
//! cluster distances that govern separability.
//!
//! All models are univariate Gaussians. An uncertainty set around a center
//! `P = N(mu, s2)` is either a mean interval (`Q = N(eps, s2)`, `|eps - mu| <= r`)
//! or an MMD ball (`Q = N(eps, s2)` with `MMD²(Q, P) <= delta`). Since the
//! population MMD² between two Gaussians depends on the means only through the
//! cross term, which is monotone in the mean gap, both forms reduce to a mean
//! interval and every min/max over `Q` is attained at a clamped mean.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelKind, KernelSpec};
use crate::mmd::Sequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianModel {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid("mean", "must be finite"));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::invalid("variance", format!("must be positive, got {variance}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn with_mean(self, mean: f64) -> Self {
        Self { mean, ..self }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Draws `n` i.i.d. samples from `model`.
pub fn sample<R: Rng + ?Sized>(model: &GaussianModel, n: usize, rng: &mut R) -> Sequence {
    let normal = Normal::new(model.mean, model.std_dev()).expect("validated model");
    let samples = (0..n).map(|_| normal.sample(rng)).collect();
    Sequence::new(samples).expect("normal samples are finite")
}

/// `E[k(X, Y)]` for independent `X ~ a`, `Y ~ b` under a Gaussian kernel.
fn expected_kernel(a: &GaussianModel, b: &GaussianModel, sigma0: f64) -> f64 {
    let s = sigma0 * sigma0 + a.variance + b.variance;
    let d = a.mean - b.mean;
    sigma0 / s.sqrt() * (-(d * d) / (2.0 * s)).exp()
}

/// Closed-form population MMD² between two Gaussians.
pub fn mmd2_population(a: &GaussianModel, b: &GaussianModel, k: &KernelSpec) -> Result<f64> {
    match k.kind() {
        KernelKind::Gaussian => {
            let s0 = k.sigma0();
            let v = expected_kernel(a, a, s0) - 2.0 * expected_kernel(a, b, s0) + expected_kernel(b, b, s0);
            Ok(v.max(0.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Uncertainty {
    MeanInterval { radius: f64 },
    MmdBall { delta: f64 },
}

impl Uncertainty {
    pub fn size(&self) -> f64 {
        match *self {
            Uncertainty::MeanInterval { radius } => radius,
            Uncertainty::MmdBall { delta } => delta,
        }
    }

    pub fn with_size(self, size: f64) -> Self {
        match self {
            Uncertainty::MeanInterval { .. } => Uncertainty::MeanInterval { radius: size },
            Uncertainty::MmdBall { .. } => Uncertainty::MmdBall { delta: size },
        }
    }
}

/// A generating distribution and the set of testing laws considered close
/// to it. Serialized as `{ mean, variance, radius }` or `{ mean, variance, delta }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCluster", into = "RawCluster")]
pub struct ClusterSpec {
    pub center: GaussianModel,
    pub uncertainty: Uncertainty,
}

impl ClusterSpec {
    pub fn new(center: GaussianModel, uncertainty: Uncertainty) -> Result<Self> {
        let size = uncertainty.size();
        if !(size.is_finite() && size >= 0.0) {
            let field = match uncertainty {
                Uncertainty::MeanInterval { .. } => "radius",
                Uncertainty::MmdBall { .. } => "delta",
            };
            return Err(Error::invalid(field, format!("must be a nonnegative finite number, got {size}")));
        }
        Ok(Self { center, uncertainty })
    }

    pub fn mean_interval(mean: f64, variance: f64, radius: f64) -> Result<Self> {
        Self::new(GaussianModel::new(mean, variance)?, Uncertainty::MeanInterval { radius })
    }

    pub fn mmd_ball(mean: f64, variance: f64, delta: f64) -> Result<Self> {
        Self::new(GaussianModel::new(mean, variance)?, Uncertainty::MmdBall { delta })
    }

    /// Half-width of the admissible mean range. For an MMD ball this solves
    /// `MMD²(N(mu + g, s2), N(mu, s2)) = delta` in closed form; the result is
    /// infinite when `delta` reaches the supremum of that curve.
    pub fn mean_radius(&self, k: &KernelSpec) -> f64 {
        match self.uncertainty {
            Uncertainty::MeanInterval { radius } => radius,
            Uncertainty::MmdBall { delta } => {
                let s0 = k.sigma0();
                let s = s0 * s0 + 2.0 * self.center.variance;
                let c = s0 / s.sqrt();
                if delta >= 2.0 * c {
                    f64::INFINITY
                } else {
                    (-2.0 * s * (1.0 - delta / (2.0 * c)).ln()).sqrt()
                }
            }
        }
    }

    /// The equivalent mean-interval cluster.
    pub fn as_mean_interval(&self, k: &KernelSpec) -> ClusterSpec {
        ClusterSpec {
            center: self.center,
            uncertainty: Uncertainty::MeanInterval {
                radius: self.mean_radius(k),
            },
        }
    }

    fn mean_bounds(&self, k: &KernelSpec) -> (f64, f64) {
        let r = self.mean_radius(k);
        (self.center.mean - r, self.center.mean + r)
    }

    /// Whether `q` lies in the set with its size multiplied by `scale`.
    pub fn contains(&self, q: &GaussianModel, scale: f64, k: &KernelSpec) -> Result<bool> {
        match self.uncertainty {
            Uncertainty::MeanInterval { radius } => {
                Ok(q.variance == self.center.variance && (q.mean - self.center.mean).abs() <= scale * radius)
            }
            Uncertainty::MmdBall { delta } => {
                Ok(q.variance == self.center.variance && mmd2_population(q, &self.center, k)? <= scale * delta)
            }
        }
    }

    /// `min_{Q in S(self)} MMD²(Q, target)`.
    pub fn min_mmd2_to(&self, target: &GaussianModel, k: &KernelSpec) -> Result<f64> {
        let (lo, hi) = self.mean_bounds(k);
        let q = self.center.with_mean(target.mean.clamp(lo, hi));
        mmd2_population(&q, target, k)
    }

    /// `max_{Q in S(self)} MMD²(Q, center)`.
    pub fn max_intra_mmd2(&self, k: &KernelSpec) -> Result<f64> {
        // limit of MMD²(N(mu + g, s2), N(mu, s2)) as g grows without bound
        let sup = match k.kind() {
            KernelKind::Gaussian => 2.0 * expected_kernel(&self.center, &self.center, k.sigma0()),
        };
        match self.uncertainty {
            Uncertainty::MmdBall { delta } => Ok(delta.min(sup)),
            Uncertainty::MeanInterval { radius } if radius.is_infinite() => Ok(sup),
            Uncertainty::MeanInterval { radius } => {
                let q = self.center.with_mean(self.center.mean + radius);
                mmd2_population(&q, &self.center, k)
            }
        }
    }
}

/// Interval-endpoint extremal model of a mean-interval cluster.
///
/// With no target, returns the endpoint farthest (in MMD²) from the center.
/// With a target, returns the endpoint closest to it. Ties go to the lower
/// endpoint.
pub fn worst_case_q(cluster: &ClusterSpec, target: Option<&GaussianModel>, k: &KernelSpec) -> Result<GaussianModel> {
    let radius = match cluster.uncertainty {
        Uncertainty::MeanInterval { radius } => radius,
        Uncertainty::MmdBall { .. } => return Err(Error::UnsupportedUncertainty),
    };
    let lo = cluster.center.with_mean(cluster.center.mean - radius);
    let hi = cluster.center.with_mean(cluster.center.mean + radius);
    if radius == 0.0 {
        return Ok(cluster.center);
    }
    let pick_hi = match target {
        None => mmd2_population(&hi, &cluster.center, k)? > mmd2_population(&lo, &cluster.center, k)?,
        Some(t) => mmd2_population(&hi, t, k)? < mmd2_population(&lo, t, k)?,
    };
    Ok(if pick_hi { hi } else { lo })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCluster {
    mean: f64,
    #[serde(default = "one")]
    variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawCluster> for ClusterSpec {
    type Error = Error;

    fn try_from(raw: RawCluster) -> Result<Self> {
        let center = GaussianModel::new(raw.mean, raw.variance)?;
        let uncertainty = match (raw.radius, raw.delta) {
            (Some(_), Some(_)) => return Err(Error::invalid("cluster", "set either radius or delta, not both")),
            (None, Some(delta)) => Uncertainty::MmdBall { delta },
            (r, None) => Uncertainty::MeanInterval { radius: r.unwrap_or(0.0) },
        };
        ClusterSpec::new(center, uncertainty)
    }
}

impl From<ClusterSpec> for RawCluster {
    fn from(c: ClusterSpec) -> Self {
        let (radius, delta) = match c.uncertainty {
            Uncertainty::MeanInterval { radius } => (Some(radius), None),
            Uncertainty::MmdBall { delta } => (None, Some(delta)),
        };
        RawCluster {
            mean: c.center.mean,
            variance: c.center.variance,
            radius,
            delta,
        }
    }
}

/// The classification problem: `M` training clusters, an optional null
/// cluster, the kernel, and the training/testing length ratio `alpha`.
///
/// Construction enforces `d1 > d2`, and with a null cluster also
/// `d1_bar > d2_bar` and that the null center lies outside every doubled
/// uncertainty set.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    clusters: Vec<ClusterSpec>,
    null_cluster: Option<ClusterSpec>,
    kernel: KernelSpec,
    alpha: f64,
}

impl Problem {
    pub fn new(
        clusters: Vec<ClusterSpec>,
        null_cluster: Option<ClusterSpec>,
        kernel: KernelSpec,
        alpha: f64,
    ) -> Result<Self> {
        if clusters.len() < 2 {
            return Err(Error::invalid("clusters", format!("need at least 2 clusters, got {}", clusters.len())));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        let p = Self {
            clusters,
            null_cluster,
            kernel,
            alpha,
        };
        let (d1, d2) = (p.d1()?, p.d2()?);
        if d1 <= d2 {
            return Err(Error::Separation { d1, d2 });
        }
        if let Some(null) = &p.null_cluster {
            for (i, c) in p.clusters.iter().enumerate() {
                if c.contains(&null.center, 2.0, &p.kernel)? {
                    return Err(Error::NullTooClose { cluster: i });
                }
            }
            let (d1b, d2b) = (p.d1_bar()?, p.d2_bar()?);
            if d1b <= d2b {
                return Err(Error::Separation { d1: d1b, d2: d2b });
            }
        }
        Ok(p)
    }

    pub fn clusters(&self) -> &[ClusterSpec] {
        &self.clusters
    }

    pub fn null_cluster(&self) -> Option<&ClusterSpec> {
        self.null_cluster.as_ref()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Same problem with every uncertainty set resized to `size`.
    pub fn with_uncertainty_size(&self, size: f64) -> Result<Self> {
        let resize = |c: &ClusterSpec| ClusterSpec::new(c.center, c.uncertainty.with_size(size));
        Problem::new(
            self.clusters.iter().map(resize).collect::<Result<_>>()?,
            self.null_cluster.as_ref().map(resize).transpose()?,
            self.kernel,
            self.alpha,
        )
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Problem::new(self.clusters.clone(), self.null_cluster, self.kernel, alpha)
    }

    fn inter_min(&self, with_null: bool) -> Result<f64> {
        let mut best = f64::INFINITY;
        for (i, target) in self.clusters.iter().enumerate() {
            let others = self
                .clusters
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, c)| c)
                .chain(self.null_cluster.iter().filter(|_| with_null));
            for c in others {
                best = best.min(c.min_mmd2_to(&target.center, &self.kernel)?);
            }
        }
        Ok(best)
    }

    fn intra_max(&self, with_null: bool) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for c in self.clusters.iter().chain(self.null_cluster.iter().filter(|_| with_null)) {
            worst = worst.max(c.max_intra_mmd2(&self.kernel)?);
        }
        Ok(worst)
    }

    /// Minimal inter-cluster distance over the training clusters.
    pub fn d1(&self) -> Result<f64> {
        self.inter_min(false)
    }

    /// Maximal intra-cluster distance over the training clusters.
    pub fn d2(&self) -> Result<f64> {
        self.intra_max(false)
    }

    /// As [`Problem::d1`] with the null cluster added to the foreign sets.
    pub fn d1_bar(&self) -> Result<f64> {
        if self.null_cluster.is_none() {
            return Err(Error::MissingNull);
        }
        self.inter_min(true)
    }

    /// As [`Problem::d2`] with the null cluster included.
    pub fn d2_bar(&self) -> Result<f64> {
        if self.null_cluster.is_none() {
            return Err(Error::MissingNull);
        }
        self.intra_max(true)
    }

    /// Index of the training center closest (in population MMD²) to `model`,
    /// skipping `exclude`. Lowest index wins ties.
    pub fn nearest_center(&self, model: &GaussianModel, exclude: Option<usize>) -> Result<usize> {
        let mut best = None;
        for (j, c) in self.clusters.iter().enumerate() {
            if Some(j) == exclude {
                continue;
            }
            let d = mmd2_population(model, &c.center, &self.kernel)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        Ok(best.expect("at least two clusters").0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k1() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn g(m: f64) -> GaussianModel {
        GaussianModel::new(m, 1.0).unwrap()
    }

    fn reference_problem(radius: f64, with_null: bool) -> Problem {
        let clusters = (0..10)
            .map(|i| ClusterSpec::mean_interval(1.5 * i as f64, 1.0, radius).unwrap())
            .collect();
        let null = with_null.then(|| ClusterSpec::mean_interval(15.0, 1.0, radius).unwrap());
        Problem::new(clusters, null, k1(), 1.0).unwrap()
    }

    // Monte Carlo estimate of E[k(X, Y)], independent of the closed form.
    fn mc_expected_kernel(a: &GaussianModel, b: &GaussianModel, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = sample(a, n, &mut rng);
        let ys = sample(b, n, &mut rng);
        let vals: Vec<f64> = xs.as_slice().iter().zip(ys.as_slice()).map(|(&x, &y)| k1().eval(x, y)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn expected_kernel_matches_monte_carlo() {
        for (a, b) in [(g(0.0), g(1.5)), (g(0.0), g(0.0)), (GaussianModel::new(1.0, 2.0).unwrap(), g(-0.5))] {
            let (m, se) = mc_expected_kernel(&a, &b, 100_000, 7);
            let closed = expected_kernel(&a, &b, 1.0);
            assert!((m - closed).abs() < 4.0 * se, "{m} vs {closed} (se {se})");
        }
    }

    #[test]
    fn population_examples() {
        assert_eq!(mmd2_population(&g(0.0), &g(0.0), &k1()).unwrap(), 0.0);
        let v = mmd2_population(&g(0.0), &g(1.5), &k1()).unwrap();
        let expect = 2.0 / 3f64.sqrt() * (1.0 - (-1.5f64 * 1.5 / 6.0).exp());
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 0.3611).abs() < 1e-4);
        let grid: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|&m| mmd2_population(&g(0.0), &g(m), &k1()).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn population_self_distance_is_zero() {
        for (m, v) in [(0.0, 1.0), (3.3, 0.2), (-7.0, 5.0)] {
            let a = GaussianModel::new(m, v).unwrap();
            assert_eq!(mmd2_population(&a, &a, &KernelSpec::gaussian(0.7).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample(&g(0.0), 0, &mut rng).is_empty());
        let s = sample(&g(5.0), 100_000, &mut rng);
        let n = s.len() as f64;
        let mean = s.as_slice().iter().sum::<f64>() / n;
        let var = s.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 5.0).abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 0.05);
        let a = sample(&g(0.0), 10, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample(&g(0.0), 10, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_radius_distances() {
        let p = Problem::new(
            vec![ClusterSpec::mean_interval(0.0, 1.0, 0.0).unwrap(), ClusterSpec::mean_interval(10.0, 1.0, 0.0).unwrap()],
            None,
            k1(),
            1.0,
        )
        .unwrap();
        assert_eq!(p.d2().unwrap(), 0.0);
        assert_eq!(p.d1().unwrap(), mmd2_population(&g(0.0), &g(10.0), &k1()).unwrap());
        assert_eq!(p.d1_bar(), Err(Error::MissingNull));
    }

    // Brute-force the min/max over Q on a fine grid of admissible means.
    fn grid_d1_d2(p: &Problem, with_null: bool) -> (f64, f64) {
        let k = p.kernel();
        let steps = 2001;
        let members = |c: &ClusterSpec| -> Vec<GaussianModel> {
            let r = c.mean_radius(k);
            (0..steps)
                .map(|s| c.center.with_mean(c.center.mean - r + 2.0 * r * s as f64 / (steps - 1) as f64))
                .collect()
        };
        let all: Vec<&ClusterSpec> = p.clusters().iter().chain(p.null_cluster().filter(|_| with_null)).collect();
        let mut d1 = f64::INFINITY;
        for (i, target) in p.clusters().iter().enumerate() {
            for (j, c) in all.iter().enumerate() {
                if j == i {
                    continue;
                }
                for q in members(c) {
                    d1 = d1.min(mmd2_population(&q, &target.center, k).unwrap());
                }
            }
        }
        let mut d2: f64 = 0.0;
        for c in &all {
            for q in members(c) {
                d2 = d2.max(mmd2_population(&q, &c.center, k).unwrap());
            }
        }
        (d1, d2)
    }

    #[test]
    fn reference_distances_match_grid_oracle() {
        let p = reference_problem(0.1, true);
        let d1 = p.d1().unwrap();
        let d2 = p.d2().unwrap();
        assert!((d1 - mmd2_population(&g(0.1), &g(1.5), &k1()).unwrap()).abs() < 1e-15);
        assert!((d2 - mmd2_population(&g(0.1), &g(0.0), &k1()).unwrap()).abs() < 1e-15);
        let (gd1, gd2) = grid_d1_d2(&p, false);
        assert!((d1 - gd1).abs() < 1e-12, "{d1} vs {gd1}");
        assert!((d2 - gd2).abs() < 1e-12);
        let (gd1b, gd2b) = grid_d1_d2(&p, true);
        assert!((p.d1_bar().unwrap() - gd1b).abs() < 1e-12);
        assert!((p.d2_bar().unwrap() - gd2b).abs() < 1e-12);
        assert_eq!(p.d2_bar().unwrap(), d2);
        assert!(p.d1_bar().unwrap() <= d1);
    }

    #[test]
    fn null_nearest_pair() {
        let p = Problem::new(
            vec![ClusterSpec::mean_interval(0.0, 1.0, 0.0).unwrap(), ClusterSpec::mean_interval(10.0, 1.0, 0.0).unwrap()],
            Some(ClusterSpec::mean_interval(30.0, 1.0, 0.0).unwrap()),
            k1(),
            1.0,
        )
        .unwrap();
        assert_eq!(p.d1_bar().unwrap(), mmd2_population(&g(0.0), &g(10.0), &k1()).unwrap());
    }

    #[test]
    fn mmd_ball_distances() {
        let clusters = (0..10).map(|i| ClusterSpec::mmd_ball(1.5 * i as f64, 1.0, 0.05).unwrap()).collect();
        let p = Problem::new(clusters, Some(ClusterSpec::mmd_ball(15.0, 1.0, 0.05).unwrap()), k1(), 1.0).unwrap();
        assert_eq!(p.d2().unwrap(), 0.05);
        // the mean radius reproduces delta exactly on the boundary
        let c = p.clusters()[0];
        let r = c.mean_radius(&k1());
        let edge = mmd2_population(&g(r), &g(0.0), &k1()).unwrap();
        assert!((edge - 0.05).abs() < 1e-12);
        let (gd1, _) = grid_d1_d2(&p, false);
        assert!((p.d1().unwrap() - gd1).abs() < 1e-12);
        assert!(c.contains(&g(0.9 * r), 1.0, &k1()).unwrap());
        assert!(!c.contains(&g(1.1 * r), 1.0, &k1()).unwrap());
    }

    #[test]
    fn huge_ball_has_infinite_radius() {
        let c = ClusterSpec::mmd_ball(0.0, 1.0, 5.0).unwrap();
        assert!(c.mean_radius(&k1()).is_infinite());
        let sup = 2.0 / 3f64.sqrt();
        assert!((c.max_intra_mmd2(&k1()).unwrap() - sup).abs() < 1e-15);
    }

    #[test]
    fn separation_and_null_checks() {
        let overlapping = vec![ClusterSpec::mean_interval(0.0, 1.0, 1.0).unwrap(), ClusterSpec::mean_interval(1.5, 1.0, 1.0).unwrap()];
        assert!(matches!(Problem::new(overlapping, None, k1(), 1.0), Err(Error::Separation { .. })));
        let two = vec![ClusterSpec::mean_interval(0.0, 1.0, 0.1).unwrap(), ClusterSpec::mean_interval(5.0, 1.0, 0.1).unwrap()];
        let close_null = ClusterSpec::mean_interval(5.15, 1.0, 0.1).unwrap();
        assert!(matches!(Problem::new(two.clone(), Some(close_null), k1(), 1.0), Err(Error::NullTooClose { cluster: 1 })));
        assert!(Problem::new(two[..1].to_vec(), None, k1(), 1.0).is_err());
        assert!(Problem::new(two, None, k1(), 0.0).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let c = ClusterSpec::mean_interval(0.0, 1.0, 0.1).unwrap();
        assert_eq!(worst_case_q(&c, None, &k1()).unwrap(), g(-0.1));
        assert_eq!(worst_case_q(&c, Some(&g(1.5)), &k1()).unwrap(), g(0.1));
        let c0 = ClusterSpec::mean_interval(2.0, 1.0, 0.0).unwrap();
        assert_eq!(worst_case_q(&c0, Some(&g(1.5)), &k1()).unwrap(), g(2.0));
        let ball = ClusterSpec::mmd_ball(0.0, 1.0, 0.05).unwrap();
        assert_eq!(worst_case_q(&ball, None, &k1()), Err(Error::UnsupportedUncertainty));
        assert!(worst_case_q(&ball.as_mean_interval(&k1()), None, &k1()).is_ok());
    }

    #[test]
    fn superset_property_on_random_problems() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut checked = 0;
        while checked < 100 {
            let m = rng.random_range(2..6);
            let radius = rng.random_range(0.0..0.3);
            let spacing = rng.random_range(1.0..3.0);
            let var = rng.random_range(0.5..2.0);
            let clusters: Vec<_> = (0..m).map(|i| ClusterSpec::mean_interval(spacing * i as f64, var, radius).unwrap()).collect();
            let null = ClusterSpec::mean_interval(spacing * m as f64 + rng.random_range(0.0..3.0), var, radius).unwrap();
            let Ok(p) = Problem::new(clusters, Some(null), KernelSpec::gaussian(rng.random_range(0.5..2.0)).unwrap(), 1.0) else {
                continue;
            };
            assert!(p.d1_bar().unwrap() <= p.d1().unwrap());
            assert!(p.d2_bar().unwrap() >= p.d2().unwrap());
            checked += 1;
        }
    }

    #[test]
    fn serde_shape() {
        let c: ClusterSpec = toml::from_str("mean = 1.5\nvariance = 1.0\nradius = 0.1").unwrap();
        assert_eq!(c, ClusterSpec::mean_interval(1.5, 1.0, 0.1).unwrap());
        let b: ClusterSpec = toml::from_str("mean = 0.0\ndelta = 0.05").unwrap();
        assert_eq!(b.uncertainty, Uncertainty::MmdBall { delta: 0.05 });
        assert!(toml::from_str::<ClusterSpec>("mean = 0.0\ndelta = 0.05\nradius = 0.1").is_err());
        assert!(toml::from_str::<ClusterSpec>("mean = 0.0\nvariance = -1.0").is_err());
    }
}
