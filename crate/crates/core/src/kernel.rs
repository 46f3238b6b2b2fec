//! Bounded positive-definite kernels on scalar observations.
//!
//! Every error-exponent formula in this crate is scaled by the kernel's
//! uniform bound `K0 = sup k(x, y)`, so a kernel is only admissible if that
//! bound is finite. The Gaussian kernel attains `K0 = 1` on the diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Gaussian,
}

/// A kernel together with its bandwidth.
///
/// Serialized as `{ kind = "gaussian", sigma0 = 1.0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct KernelSpec {
    kind: KernelKind,
    sigma0: f64,
    inv_two_var: f64,
}

impl KernelSpec {
    /// Gaussian kernel `exp(-(x - y)^2 / (2 sigma0^2))`.
    pub fn gaussian(sigma0: f64) -> Result<Self> {
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(Error::invalid("kernel.sigma0", format!("must be a positive finite number, got {sigma0}")));
        }
        Ok(Self {
            kind: KernelKind::Gaussian,
            sigma0,
            inv_two_var: 1.0 / (2.0 * sigma0 * sigma0),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => {
                let d = x - y;
                (-d * d * self.inv_two_var).exp()
            }
        }
    }

    /// The uniform bound `K0 = max k(x, y)`.
    pub fn sup_bound(&self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => 1.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    kind: KernelKind,
    sigma0: f64,
}

impl TryFrom<RawKernel> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernel) -> Result<Self> {
        match raw.kind {
            KernelKind::Gaussian => KernelSpec::gaussian(raw.sigma0),
        }
    }
}

impl From<KernelSpec> for RawKernel {
    fn from(k: KernelSpec) -> Self {
        RawKernel {
            kind: k.kind,
            sigma0: k.sigma0,
        }
    }
}
