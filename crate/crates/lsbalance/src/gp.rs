//! Exact Gaussian-process regression over a shared observation buffer.
//!
//! The posterior served here is the standard closed form
//!
//! ```text
//! mu(x)      = k(x)' (K + sigma_n^2 I)^-1 y
//! sigma2(x)  = k(x, x) - k(x)' (K + sigma_n^2 I)^-1 k(x)
//! ```
//!
//! computed through a cached Cholesky factor. Observations can be z-scored
//! before fitting (`standardize`); the reported mean is mapped back to
//! original units and the variance is scaled back by the squared
//! standardization scale, so acquisition values keep consistent units while
//! the kernel output scale stays fixed at 1. Refits are from scratch each
//! call; at the horizons this crate targets (a few hundred points) the cubic
//! solve is cheap enough that incremental updates are not worth the
//! complexity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{cholesky_with_jitter, KernelSpec};

/// Floor for the standardization scale, guarding constant observations.
const MIN_STD: f64 = 1e-12;

/// Ordered (x, y) observations plus the noise scale used as regularizer.
#[derive(Debug, Clone)]
pub struct ObservationLog {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    sigma_n: f64,
}

impl ObservationLog {
    pub fn new(sigma_n: f64) -> Result<Self> {
        if !(sigma_n > 0.0) || !sigma_n.is_finite() {
            return Err(Error::input(format!(
                "noise scale must be positive and finite, got {sigma_n}"
            )));
        }
        Ok(ObservationLog {
            points: Vec::new(),
            values: Vec::new(),
            sigma_n,
        })
    }

    pub fn from_parts(points: Vec<Vec<f64>>, values: Vec<f64>, sigma_n: f64) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::input(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let mut log = Self::new(sigma_n)?;
        log.points = points;
        log.values = values;
        Ok(log)
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.points.push(x);
        self.values.push(y);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// Copy of this log with z-scored values (used by likelihood searches so
    /// every candidate model sees identically scaled data).
    pub fn standardized(&self) -> ObservationLog {
        let st = Standardizer::fit(&self.values);
        ObservationLog {
            points: self.points.clone(),
            values: self.values.iter().map(|y| st.forward(*y)).collect(),
            sigma_n: self.sigma_n,
        }
    }
}

/// Affine record mapping raw observations to z-scores and back.
#[derive(Debug, Clone, Copy)]
pub struct Standardizer {
    pub mean: f64,
    pub scale: f64,
}

impl Standardizer {
    pub fn identity() -> Self {
        Standardizer {
            mean: 0.0,
            scale: 1.0,
        }
    }

    /// Sample mean and sample standard deviation (n-1 divisor), the scale
    /// clamped below by `1e-12`.
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::identity();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let ss = values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        };
        Standardizer {
            mean,
            scale: std.max(MIN_STD),
        }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.scale
    }

    pub fn inverse(&self, z: f64) -> f64 {
        self.mean + self.scale * z
    }
}

/// Factorized GP posterior for one (kernel, observation log) pair.
///
/// Immutable after [`fit`]; serving means and variances is read-only.
#[derive(Debug, Clone)]
pub struct PosteriorModel {
    spec: KernelSpec,
    train_x: Vec<Vec<f64>>,
    train_y_raw: Vec<f64>,
    /// Lower Cholesky factor of `K + sigma_n^2 I (+ jitter I)`.
    chol_l: DMatrix<f64>,
    /// `(K + sigma_n^2 I)^-1 y` in standardized units.
    alpha: DVector<f64>,
    standardizer: Standardizer,
    sigma_n: f64,
    jitter: f64,
}

/// Fit an exact GP to the log under the given kernel.
pub fn fit(log: &ObservationLog, spec: &KernelSpec, standardize: bool) -> Result<PosteriorModel> {
    if let Some(p) = log.points().first() {
        if p.len() != spec.dim {
            return Err(Error::DimensionMismatch {
                expected: spec.dim,
                got: p.len(),
            });
        }
    }
    let n = log.len();
    let standardizer = if standardize {
        Standardizer::fit(log.values())
    } else {
        Standardizer::identity()
    };
    if n == 0 {
        return Ok(PosteriorModel {
            spec: spec.clone(),
            train_x: Vec::new(),
            train_y_raw: Vec::new(),
            chol_l: DMatrix::zeros(0, 0),
            alpha: DVector::zeros(0),
            standardizer,
            sigma_n: log.sigma_n(),
            jitter: 0.0,
        });
    }
    let mut a = spec.gram(log.points())?;
    let s2 = log.sigma_n() * log.sigma_n();
    for i in 0..n {
        a[(i, i)] += s2;
    }
    let (chol_l, jitter) = cholesky_with_jitter(a)?;
    let z = DVector::from_iterator(n, log.values().iter().map(|y| standardizer.forward(*y)));
    let alpha = solve_with_factor(&chol_l, z)?;
    Ok(PosteriorModel {
        spec: spec.clone(),
        train_x: log.points().to_vec(),
        train_y_raw: log.values().to_vec(),
        chol_l,
        alpha,
        standardizer,
        sigma_n: log.sigma_n(),
        jitter,
    })
}

/// `(L L')^-1 b` from a lower factor.
fn solve_with_factor(l: &DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let w = l
        .solve_lower_triangular(&b)
        .ok_or_else(|| Error::Numerical("singular lower factor".into()))?;
    l.transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| Error::Numerical("singular upper factor".into()))
}

impl PosteriorModel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn standardizer(&self) -> Standardizer {
        self.standardizer
    }

    /// Conditioning point with the highest raw observed value.
    pub fn incumbent(&self) -> Option<&[f64]> {
        let mut best: Option<(usize, f64)> = None;
        for (i, y) in self.train_y_raw.iter().enumerate() {
            if best.map_or(true, |(_, by)| *y > by) {
                best = Some((i, *y));
            }
        }
        best.map(|(i, _)| self.train_x[i].as_slice())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Posterior mean in original observation units.
    pub fn posterior_mean(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posterior(x)?.0)
    }

    /// Posterior variance in original units (standardized variance scaled by
    /// the squared standardization scale), clamped at zero.
    pub fn posterior_var(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posterior(x)?.1)
    }

    /// `(mean, variance)` at one point.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        if self.train_x.is_empty() {
            let scale = self.standardizer.scale;
            return Ok((self.standardizer.inverse(0.0), scale * scale));
        }
        let k = DVector::from_vec(self.spec.cross(&self.train_x, x)?);
        let mean_std = k.dot(&self.alpha);
        let w = self
            .chol_l
            .solve_lower_triangular(&k)
            .ok_or_else(|| Error::Numerical("singular lower factor".into()))?;
        let var_std = (1.0 - w.norm_squared()).max(0.0);
        let scale = self.standardizer.scale;
        Ok((self.standardizer.inverse(mean_std), var_std * scale * scale))
    }

    /// Batched `(mean, variance)` for many query points. One triangular solve
    /// over the whole block, which is substantially faster than per-point
    /// queries in the acquisition inner loop.
    pub fn posterior_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        let m = xs.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        for x in xs {
            self.check_dim(x)?;
        }
        if self.train_x.is_empty() {
            let scale = self.standardizer.scale;
            return Ok(vec![(self.standardizer.inverse(0.0), scale * scale); m]);
        }
        let n = self.train_x.len();
        let mut kstar = DMatrix::zeros(n, m);
        for (j, x) in xs.iter().enumerate() {
            for (i, p) in self.train_x.iter().enumerate() {
                kstar[(i, j)] = self.spec.eval(p, x)?;
            }
        }
        let means = kstar.transpose() * &self.alpha;
        let w = self
            .chol_l
            .solve_lower_triangular(&kstar)
            .ok_or_else(|| Error::Numerical("singular lower factor".into()))?;
        let scale = self.standardizer.scale;
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let var_std = (1.0 - w.column(j).norm_squared()).max(0.0);
            out.push((
                self.standardizer.inverse(means[j]),
                var_std * scale * scale,
            ));
        }
        Ok(out)
    }
}

/// Gaussian log evidence of the raw values under `N(0, K + sigma_n^2 I)`.
pub fn log_marginal_likelihood(log: &ObservationLog, spec: &KernelSpec) -> Result<f64> {
    let n = log.len();
    if n == 0 {
        return Err(Error::input(
            "log marginal likelihood needs at least one observation",
        ));
    }
    let mut a = spec.gram(log.points())?;
    let s2 = log.sigma_n() * log.sigma_n();
    for i in 0..n {
        a[(i, i)] += s2;
    }
    let (l, _) = cholesky_with_jitter(a)?;
    let y = DVector::from_column_slice(log.values());
    let alpha = solve_with_factor(&l, y.clone())?;
    let log_det_half: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
    Ok(-0.5 * y.dot(&alpha) - log_det_half - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
}
