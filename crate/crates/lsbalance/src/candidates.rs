//! Candidate grids for length scales and norms, and the growth schedules that
//! control when new candidates are admitted.
//!
//! Length-scale candidates form the exponential grid `q(i) = theta0 e^(-i/d)`
//! and norm candidates `v(j) = N0 e^j`. A growth function
//! `g(t) = max(t0, t^a)` sets the admission pace: candidate `q(l+1)` enters as
//! soon as `q(l+1) <= theta0 / g(t)`.

use crate::error::{Error, Result};

/// Hard floor on candidate length scales relative to `theta0`; admission stops
/// there so pathological growth configurations cannot run away. `e^-12`.
pub const LENGTHSCALE_FLOOR_RATIO: f64 = 6.144212353328210e-6;

/// Ceiling on norm candidates relative to `N0`, mirroring the length-scale
/// floor. `e^12`.
pub const NORM_CAP_RATIO: f64 = 162754.79141900392;

/// Growth schedule `g(t) = max(t0, t^a)`.
///
/// `exponent = 0` gives the constant schedule `g == t0` (with `t0 = 1` the
/// degenerate schedule that never admits anything new through a ratio test).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrowthFn {
    pub t0: f64,
    pub exponent: f64,
}

impl GrowthFn {
    pub fn new(t0: f64, exponent: f64) -> Result<Self> {
        if !(t0 >= 1.0) || !t0.is_finite() {
            return Err(Error::input(format!("growth t0 must be >= 1, got {t0}")));
        }
        if !(0.0..=1.0).contains(&exponent) {
            return Err(Error::input(format!(
                "growth exponent must be in [0, 1], got {exponent}"
            )));
        }
        Ok(GrowthFn { t0, exponent })
    }

    /// The constant schedule `g(t) = 1`.
    pub fn constant_one() -> Self {
        GrowthFn {
            t0: 1.0,
            exponent: 0.0,
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.t0 == 1.0 && self.exponent == 0.0
    }

    /// `g(t) = max(t0, t^a)` for `t >= 1`.
    pub fn eval(&self, t: usize) -> f64 {
        debug_assert!(t >= 1);
        let grown = if self.exponent == 0.0 {
            1.0
        } else {
            (t as f64).powf(self.exponent)
        };
        self.t0.max(grown)
    }
}

/// `i`-th length-scale candidate `q(i) = theta0 e^(-i/d)`; `q(0) = theta0`.
pub fn lengthscale_candidate(i: usize, theta0: f64, dim: usize) -> f64 {
    theta0 * (-(i as f64) / dim as f64).exp()
}

/// `j`-th norm candidate `v(j) = N0 e^j`; `v(0) = N0`.
pub fn norm_candidate(j: usize, norm0: f64) -> f64 {
    norm0 * (j as f64).exp()
}

/// Smallest `t0` so that the admission test at `g(1) = t0` lets in the first
/// `k` length-scale candidates: `q(i) <= theta0 / t0` for `i = 1..=k` solves
/// to `t0 = e^(k/d)`.
pub fn default_t0(dim: usize, k: usize) -> f64 {
    (k as f64 / dim as f64).exp()
}

/// Candidate-grid parameters for one run.
#[derive(Debug, Clone)]
pub struct CandidateSchedule {
    pub theta0: f64,
    pub norm0: f64,
    pub dim: usize,
    pub lengthscale_growth: GrowthFn,
    /// Norm growth `b(t)`; `None` keeps the norm grid at `{N0}` forever.
    pub norm_growth: Option<GrowthFn>,
}

impl CandidateSchedule {
    pub fn new(
        theta0: f64,
        norm0: f64,
        dim: usize,
        lengthscale_growth: GrowthFn,
        norm_growth: Option<GrowthFn>,
    ) -> Result<Self> {
        if !(theta0 > 0.0) || !(norm0 > 0.0) {
            return Err(Error::input(format!(
                "theta0 and norm0 must be positive, got {theta0}, {norm0}"
            )));
        }
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        Ok(CandidateSchedule {
            theta0,
            norm0,
            dim,
            lengthscale_growth,
            norm_growth,
        })
    }

    pub fn lengthscale(&self, i: usize) -> f64 {
        lengthscale_candidate(i, self.theta0, self.dim)
    }

    pub fn norm(&self, j: usize) -> f64 {
        norm_candidate(j, self.norm0)
    }

    /// Whether candidate `q(l+1)` would fall below the hard floor.
    pub fn lengthscale_at_floor(&self, l: usize) -> bool {
        self.lengthscale(l + 1) < self.theta0 * LENGTHSCALE_FLOOR_RATIO
    }

    /// Whether candidate `v(j+1)` would exceed the norm cap.
    pub fn norm_at_cap(&self, j: usize) -> bool {
        self.norm(j + 1) > self.norm0 * NORM_CAP_RATIO
    }
}

/// Admission test for the next length-scale candidate: with `l` candidates
/// already introduced, `q(l+1)` enters iff `q(l+1) <= theta0 / g(t)`.
pub fn should_add_lengthscale(l: usize, t: usize, schedule: &CandidateSchedule) -> bool {
    schedule.lengthscale(l + 1) <= schedule.theta0 / schedule.lengthscale_growth.eval(t)
}

/// Admission test for the next norm candidate: with `j` candidates already
/// introduced, `v(j+1)` enters iff `v(j+1) < N0 b(t)`. Always false without a
/// norm growth schedule.
pub fn should_add_norm(j: usize, t: usize, schedule: &CandidateSchedule) -> bool {
    match &schedule.norm_growth {
        None => false,
        Some(b) => schedule.norm(j + 1) < schedule.norm0 * b.eval(t),
    }
}
