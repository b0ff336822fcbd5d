//! Stationary kernels with length-scale rescaling.
//!
//! Every kernel here is of the form `k_theta(x, x') = k(x/theta, x'/theta)`
//! with `k(x, x) = 1`, so rescaling the length scale is the same as rescaling
//! distances. Supported families:
//!
//! * RBF: `exp(-||x - x'||^2 / theta^2)`
//! * Matérn with half-integer smoothness 1/2, 3/2, 5/2, via the closed-form
//!   polynomial-times-exponential expressions (no Bessel evaluation needed).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Smallest jitter added to a Gram diagonal before attempting a Cholesky
/// factorization; escalated by 10x on failure up to [`MAX_JITTER`].
pub const BASE_JITTER: f64 = 1e-9;
/// Jitter ceiling; factorization failure at this level is a hard error.
pub const MAX_JITTER: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Rbf,
    /// Matérn kernel with smoothness `nu`; only 0.5, 1.5 and 2.5 are
    /// supported.
    Matern(f64),
}

impl KernelFamily {
    fn validate(&self) -> Result<()> {
        match self {
            KernelFamily::Rbf => Ok(()),
            KernelFamily::Matern(nu) => {
                if *nu == 0.5 || *nu == 1.5 || *nu == 2.5 {
                    Ok(())
                } else {
                    Err(Error::Unsupported(format!(
                        "Matérn smoothness {nu} has no closed form here; use 0.5, 1.5 or 2.5"
                    )))
                }
            }
        }
    }
}

/// A stationary kernel: family, length scale and input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Length scale in input units; strictly positive.
    pub lengthscale: f64,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64, dim: usize) -> Result<Self> {
        family.validate()?;
        if !(lengthscale > 0.0) || !lengthscale.is_finite() {
            return Err(Error::input(format!(
                "length scale must be positive and finite, got {lengthscale}"
            )));
        }
        if dim == 0 {
            return Err(Error::input("input dimension must be at least 1"));
        }
        Ok(KernelSpec {
            family,
            lengthscale,
            dim,
        })
    }

    pub fn rbf(lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Rbf, lengthscale, dim)
    }

    pub fn matern(nu: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern(nu), lengthscale, dim)
    }

    /// Same family and dimension with a different length scale.
    pub fn with_lengthscale(&self, lengthscale: f64) -> Result<Self> {
        Self::new(self.family, lengthscale, self.dim)
    }

    /// Kernel value for two points, in `[0, 1]`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let mut sq = 0.0;
        for (a, b) in x.iter().zip(y.iter()) {
            let d = a - b;
            sq += d * d;
        }
        self.correlation_sq(sq.max(0.0))
    }

    /// Kernel value as a function of squared distance `||x - x'||^2`.
    fn correlation_sq(&self, sq_dist: f64) -> Result<f64> {
        let z2 = sq_dist / (self.lengthscale * self.lengthscale);
        match self.family {
            KernelFamily::Rbf => Ok((-z2).exp()),
            KernelFamily::Matern(nu) => {
                // z = sqrt(2 nu) * r / theta
                let z = (2.0 * nu * z2).sqrt();
                if nu == 0.5 {
                    Ok((-z).exp())
                } else if nu == 1.5 {
                    Ok((1.0 + z) * (-z).exp())
                } else if nu == 2.5 {
                    Ok((1.0 + z + z * z / 3.0) * (-z).exp())
                } else {
                    Err(Error::Unsupported(format!(
                        "Matérn smoothness {nu} has no closed form here; use 0.5, 1.5 or 2.5"
                    )))
                }
            }
        }
    }

    /// Gram matrix of a point set: symmetric, unit diagonal, PSD up to jitter.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let n = points.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = 1.0;
            for j in 0..i {
                let v = self.eval(&points[i], &points[j])?;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross-covariance vector `k(x, x_i)` against a point set.
    pub fn cross(&self, points: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.eval(p, x)).collect()
    }
}

/// Cholesky factor of a symmetric PSD matrix. The raw matrix is attempted
/// first; on failure a diagonal jitter escalates from [`BASE_JITTER`] by 10x
/// up to [`MAX_JITTER`], after which the failure is a hard error.
///
/// Returns the lower factor together with the jitter that was used.
pub fn cholesky_with_jitter(a: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((a, 0.0));
    }
    if let Some(chol) = a.clone().cholesky() {
        return Ok((chol.unpack(), 0.0));
    }
    let mut jitter = BASE_JITTER;
    loop {
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] += jitter;
        }
        if let Some(chol) = b.cholesky() {
            return Ok((chol.unpack(), jitter));
        }
        if jitter >= MAX_JITTER {
            let diag_min = (0..n).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min);
            let diag_max = (0..n).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::Numerical(format!(
                "Cholesky failed for {n}x{n} matrix even with jitter {jitter:.1e} \
                 (diag range [{diag_min:.3e}, {diag_max:.3e}])"
            )));
        }
        jitter *= 10.0;
    }
}
