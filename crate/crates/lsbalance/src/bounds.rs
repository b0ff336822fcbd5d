//! Closed-form information-gain bounds, confidence radii, length-scale
//! dependent norms and suspected regret bounds.
//!
//! The suspected regret bound of a GP-UCB learner with kernel `k_theta` and
//! norm bound `B` is `R(T) = sqrt(T) (B sqrt(gamma_T) + gamma_T)` where
//! `gamma_T` bounds the maximum information gain of the kernel. Balancing only
//! needs these bounds up to a constant, so the formulas here drop absolute
//! constants and keep the length-scale and horizon dependence explicit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{cholesky_with_jitter, KernelFamily, KernelSpec};

/// Which maximum-information-gain bound to use for Matérn kernels.
///
/// The two differ in the horizon exponent: `MainText` uses
/// `T^(d(d+1)/(2 nu + d(d+1)))`; `AppendixVakili` follows from polynomial
/// eigendecay and uses the tighter `T^(d/(2 nu + d))`. Both share the
/// `theta^-d` length-scale prefactor and the same log factor. RBF kernels use
/// `theta^-d log(T)^(d+1)` under either variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MigVariant {
    MainText,
    #[default]
    AppendixVakili,
}

/// Upper bound `gamma_T` on the maximum information gain after `t` queries.
pub fn mig_bound(spec: &KernelSpec, t: usize, variant: MigVariant) -> Result<f64> {
    if t < 2 {
        return Err(Error::input(format!(
            "information-gain bound needs t >= 2 so that log t > 0, got {t}"
        )));
    }
    let d = spec.dim as f64;
    let theta = spec.lengthscale;
    let tf = t as f64;
    let log_t = tf.ln();
    let prefactor = theta.powf(-d);
    match spec.family {
        KernelFamily::Rbf => Ok(prefactor * log_t.powf(d + 1.0)),
        KernelFamily::Matern(nu) => {
            let t_exp = match variant {
                MigVariant::MainText => d * (d + 1.0) / (2.0 * nu + d * (d + 1.0)),
                MigVariant::AppendixVakili => d / (2.0 * nu + d),
            };
            let log_exp = 2.0 * nu / (2.0 * nu + d);
            Ok(prefactor * tf.powf(t_exp) * log_t.powf(log_exp))
        }
    }
}

/// Exact information gain `0.5 log det(I + sigma_n^-2 K)` of a design with
/// Gram matrix `K`, via a stable Cholesky factorization.
pub fn exact_info_gain(gram: &DMatrix<f64>, sigma_n: f64) -> Result<f64> {
    let n = gram.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if !(sigma_n > 0.0) {
        return Err(Error::input(format!(
            "noise scale must be positive, got {sigma_n}"
        )));
    }
    let inv_s2 = 1.0 / (sigma_n * sigma_n);
    let mut m = gram * inv_s2;
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    let (l, _) = cholesky_with_jitter(m)?;
    // log det = 2 sum log L_ii, info gain is half of it
    Ok((0..n).map(|i| l[(i, i)].ln()).sum::<f64>().max(0.0))
}

/// Length-scale dependent norm `B(theta, N) = (theta0 / theta)^(d/2) N`.
///
/// `N` is the norm bound at `theta0`; shrinking the length scale earns norm
/// headroom at this rate without changing the regret bound's order.
pub fn norm_for_lengthscale(theta0: f64, theta: f64, n: f64, dim: usize) -> Result<f64> {
    if !(theta > 0.0) || !(theta0 > 0.0) {
        return Err(Error::input(format!(
            "length scales must be positive, got theta0={theta0}, theta={theta}"
        )));
    }
    if theta > theta0 {
        return Err(Error::input(format!(
            "candidate length scale {theta} exceeds the upper bound {theta0}"
        )));
    }
    if !(n > 0.0) {
        return Err(Error::input(format!("norm must be positive, got {n}")));
    }
    Ok(norm_scale(theta0, theta, dim) * n)
}

/// `(theta0 / theta)^(d/2)` without the `theta <= theta0` guard; baselines
/// that follow a likelihood fit can legitimately land above `theta0`.
pub(crate) fn norm_scale(theta0: f64, theta: f64, dim: usize) -> f64 {
    (theta0 / theta).powf(dim as f64 / 2.0)
}

/// Noise-concentration confidence parameter
/// `xi_t = 2 sigma_n^2 log(|A| pi^2 t^2 / (6 delta_b))` for `|A|` introduced
/// candidates. `delta_b` is the share of the failure probability assigned to
/// the noise event (callers using a total budget `delta` pass `delta / 2`).
pub fn xi(t: usize, num_candidates: usize, delta_b: f64, sigma_n: f64) -> f64 {
    xi_real(t, num_candidates as f64, delta_b, sigma_n)
}

/// [`xi`] with a real-valued candidate count, for the closed-form
/// `|A| = d ln g(t)` option.
pub fn xi_real(t: usize, num_candidates: f64, delta_b: f64, sigma_n: f64) -> f64 {
    let tf = t as f64;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    2.0 * sigma_n * sigma_n * (num_candidates * pi2 * tf * tf / (6.0 * delta_b)).ln()
}

/// Shared bound parameters for one optimization run.
#[derive(Debug, Clone)]
pub struct BoundConfig {
    pub family: KernelFamily,
    pub dim: usize,
    /// Initial length-scale upper bound; no candidate exceeds it.
    pub theta0: f64,
    /// Norm parameter at `theta0`.
    pub norm: f64,
    /// Total failure probability, split evenly between the confidence-radius
    /// event and the noise-concentration event.
    pub delta: f64,
    pub sigma_n: f64,
    pub mig: MigVariant,
}

impl BoundConfig {
    pub fn new(
        family: KernelFamily,
        dim: usize,
        theta0: f64,
        norm: f64,
        delta: f64,
        sigma_n: f64,
        mig: MigVariant,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::input(format!("delta must be in (0,1), got {delta}")));
        }
        if !(theta0 > 0.0) || !(norm > 0.0) {
            return Err(Error::input(format!(
                "theta0 and norm must be positive, got {theta0}, {norm}"
            )));
        }
        if !(sigma_n >= 0.0) {
            return Err(Error::input(format!(
                "noise scale must be nonnegative, got {sigma_n}"
            )));
        }
        Ok(BoundConfig {
            family,
            dim,
            theta0,
            norm,
            delta,
            sigma_n,
            mig,
        })
    }

    pub fn kernel_spec(&self, theta: f64) -> Result<KernelSpec> {
        KernelSpec::new(self.family, theta, self.dim)
    }

    fn gamma(&self, theta: f64, t: usize) -> Result<f64> {
        mig_bound(&self.kernel_spec(theta)?, t.max(2), self.mig)
    }

    /// Confidence radius
    /// `beta_t = B(theta, N) + sigma_n sqrt(2 (gamma_(t-1) + 1 + ln(2/delta)))`
    /// with the information-gain bound clamped at horizon 2.
    pub fn beta(&self, theta: f64, t: usize) -> Result<f64> {
        self.beta_with_norm(theta, self.norm, t)
    }

    pub fn beta_with_norm(&self, theta: f64, norm: f64, t: usize) -> Result<f64> {
        if t < 1 {
            return Err(Error::input("beta needs t >= 1"));
        }
        let b = norm_for_lengthscale(self.theta0, theta, norm, self.dim)?;
        let gamma = self.gamma(theta, t.saturating_sub(1))?;
        Ok(b + self.sigma_n * (2.0 * (gamma + 1.0 + (2.0 / self.delta).ln())).sqrt())
    }

    /// Confidence radius for a learner whose norm term is supplied directly
    /// (A-GP-UCB scales it by its growth function, and a likelihood fit may
    /// land above `theta0`).
    pub fn beta_with_raw_norm_term(&self, theta: f64, norm_term: f64, t: usize) -> Result<f64> {
        if t < 1 {
            return Err(Error::input("beta needs t >= 1"));
        }
        let gamma = self.gamma(theta, t.saturating_sub(1))?;
        Ok(norm_term + self.sigma_n * (2.0 * (gamma + 1.0 + (2.0 / self.delta).ln())).sqrt())
    }

    /// Raw suspected regret bound `sqrt(t) (B sqrt(gamma_t) + gamma_t)`.
    pub fn regret_bound_raw(&self, theta: f64, norm: f64, t: usize) -> Result<f64> {
        if t < 1 {
            return Err(Error::input("regret bound needs t >= 1"));
        }
        let b = norm_for_lengthscale(self.theta0, theta, norm, self.dim)?;
        let gamma = self.gamma(theta, t)?;
        Ok((t as f64).sqrt() * (b * gamma.sqrt() + gamma))
    }

    /// Suspected regret bound with per-step increments clamped at `2B`.
    ///
    /// A regret bound that grows by more than twice the norm bound per step is
    /// trivially improvable (no single step can lose more than `2B`), and the
    /// balancing analysis relies on that non-triviality. The raw formula can
    /// violate it at small `t` where the clamped horizon makes `gamma` flat,
    /// so increments are capped; the flag reports whether the cap engaged.
    pub fn suspected_regret_bound_detailed(
        &self,
        theta: f64,
        norm: f64,
        t: usize,
    ) -> Result<(f64, bool)> {
        if t < 1 {
            return Err(Error::input("regret bound needs t >= 1"));
        }
        let b = norm_for_lengthscale(self.theta0, theta, norm, self.dim)?;
        let mut r = self.regret_bound_raw(theta, norm, 1)?;
        let mut clamped = false;
        for s in 2..=t {
            let raw = self.regret_bound_raw(theta, norm, s)?;
            let capped = r + 2.0 * b;
            if raw > capped {
                clamped = true;
                r = capped;
            } else {
                r = raw;
            }
        }
        Ok((r, clamped))
    }

    /// Clamped suspected regret bound at the configured norm.
    pub fn suspected_regret_bound(&self, theta: f64, t: usize) -> Result<f64> {
        Ok(self
            .suspected_regret_bound_detailed(theta, self.norm, t)?
            .0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rbf_cfg(dim: usize, theta0: f64, norm: f64, delta: f64, sigma_n: f64) -> BoundConfig {
        BoundConfig::new(
            KernelFamily::Rbf,
            dim,
            theta0,
            norm,
            delta,
            sigma_n,
            MigVariant::AppendixVakili,
        )
        .unwrap()
    }

    #[test]
    fn mig_rbf_formula() {
        let spec = KernelSpec::rbf(0.5, 2).unwrap();
        let v = mig_bound(&spec, 10, MigVariant::AppendixVakili).unwrap();
        let expected = 4.0 * 10f64.ln().powi(3);
        assert_relative_eq!(v, expected, max_relative = 1e-14);
        assert!((v - 48.84).abs() < 0.02, "got {v}");
        // variant does not matter for RBF
        assert_eq!(v, mig_bound(&spec, 10, MigVariant::MainText).unwrap());
    }

    #[test]
    fn mig_matern_variants() {
        let spec = KernelSpec::matern(2.5, 1.0, 1).unwrap();
        let vak = mig_bound(&spec, 100, MigVariant::AppendixVakili).unwrap();
        let expected = 100f64.powf(1.0 / 6.0) * 100f64.ln().powf(5.0 / 6.0);
        assert_relative_eq!(vak, expected, max_relative = 1e-14);

        let main = mig_bound(&spec, 100, MigVariant::MainText).unwrap();
        let expected_main = 100f64.powf(2.0 / 7.0) * 100f64.ln().powf(5.0 / 6.0);
        assert_relative_eq!(main, expected_main, max_relative = 1e-14);
        assert!(main > vak);
    }

    #[test]
    fn mig_needs_t_at_least_two() {
        let spec = KernelSpec::rbf(1.0, 1).unwrap();
        assert!(mig_bound(&spec, 1, MigVariant::AppendixVakili).is_err());
    }

    #[test]
    fn info_gain_trivial_cases() {
        assert_eq!(exact_info_gain(&DMatrix::zeros(0, 0), 1.0).unwrap(), 0.0);
        let one = DMatrix::from_element(1, 1, 1.0);
        assert_relative_eq!(
            exact_info_gain(&one, 1.0).unwrap(),
            0.5 * 2f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn info_gain_matches_eigenvalue_oracle() {
        let spec = KernelSpec::rbf(0.4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let gram = spec.gram(&pts).unwrap();
        let sigma = 0.3;
        let ig = exact_info_gain(&gram, sigma).unwrap();
        let eig = gram.clone().symmetric_eigen();
        let oracle: f64 = eig
            .eigenvalues
            .iter()
            .map(|l| (1.0 + l.max(0.0) / (sigma * sigma)).ln())
            .sum::<f64>()
            * 0.5;
        assert_relative_eq!(ig, oracle, epsilon = 1e-8);
    }

    #[test]
    fn norm_reparameterization() {
        assert_eq!(norm_for_lengthscale(2.0, 2.0, 3.0, 4).unwrap(), 3.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(
            norm_for_lengthscale(1.0, 1.0 / e, 1.0, 2).unwrap(),
            e,
            max_relative = 1e-14
        );
        // composed with the candidate grid: theta = q(1) at d = 5
        let theta = crate::candidates::lengthscale_candidate(1, 1.0, 5);
        assert_relative_eq!(
            norm_for_lengthscale(1.0, theta, 2.0, 5).unwrap(),
            2.0 * 0.5f64.exp(),
            max_relative = 1e-14
        );
        assert!(norm_for_lengthscale(1.0, 1.5, 1.0, 2).is_err());
    }

    #[test]
    fn beta_noiseless_degenerate_equals_norm() {
        let cfg = rbf_cfg(1, 1.0, 1.0, 0.5, 0.0);
        assert_eq!(cfg.beta(1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn beta_matches_independent_composition() {
        let cfg = rbf_cfg(1, 1.0, 1.0, 0.1, 0.1);
        let beta = cfg.beta(1.0, 10).unwrap();
        // independent arithmetic: gamma at t-1 = 9 for RBF d=1 is (ln 9)^2
        let gamma = 9f64.ln().powi(2);
        let expected = 1.0 + 0.1 * (2.0 * (gamma + 1.0 + 20f64.ln())).sqrt();
        assert_relative_eq!(beta, expected, max_relative = 1e-14);
    }

    #[test]
    fn halving_theta_doubles_norm_term_in_two_dims() {
        let cfg = rbf_cfg(2, 1.0, 1.5, 0.1, 0.0);
        // with sigma_n = 0, beta reduces to the norm term
        let b1 = cfg.beta(0.8, 5).unwrap();
        let b2 = cfg.beta(0.4, 5).unwrap();
        assert_relative_eq!(b2, 2.0 * b1, max_relative = 1e-14);
    }

    #[test]
    fn beta_monotone_over_grid() {
        let cfg = rbf_cfg(2, 1.0, 1.0, 0.1, 0.05);
        let thetas: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let ts: Vec<usize> = (1..=20).map(|i| i * 5).collect();
        for w in thetas.windows(2) {
            for &t in &ts {
                assert!(cfg.beta(w[0], t).unwrap() >= cfg.beta(w[1], t).unwrap());
            }
        }
        for &theta in &thetas {
            for w in ts.windows(2) {
                assert!(cfg.beta(theta, w[0]).unwrap() <= cfg.beta(theta, w[1]).unwrap());
            }
        }
    }

    #[test]
    fn regret_bound_example_and_monotonicity() {
        let cfg = rbf_cfg(1, 1.0, 1.0, 0.1, 0.1);
        // t = 1 evaluates gamma at the clamped horizon 2
        let r1 = cfg.suspected_regret_bound(1.0, 1).unwrap();
        let g2 = 2f64.ln().powi(2);
        assert_relative_eq!(r1, g2.sqrt() + g2, max_relative = 1e-14);

        // strictly increasing in t, and increments never exceed 2B
        let thetas: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        for &theta in &thetas {
            let b = norm_for_lengthscale(1.0, theta, 1.0, 1).unwrap();
            let mut prev = cfg.suspected_regret_bound(theta, 1).unwrap();
            for t in 2..=40 {
                let r = cfg.suspected_regret_bound(theta, t).unwrap();
                assert!(r > prev, "not strictly increasing at theta={theta}, t={t}");
                assert!(
                    r - prev <= 2.0 * b + 1e-12,
                    "increment above 2B at theta={theta}, t={t}"
                );
                prev = r;
            }
        }

        // shorter length scales carry larger bounds at a fixed horizon
        for w in thetas.windows(2) {
            let lo = cfg.suspected_regret_bound(w[0], 100).unwrap();
            let hi = cfg.suspected_regret_bound(w[1], 100).unwrap();
            assert!(lo > hi, "R({}) <= R({}) at t=100", w[0], w[1]);
        }
    }

    #[test]
    fn regret_bound_doubling_t_with_frozen_gamma() {
        // with gamma held fixed the sqrt(t) factor is exact algebra
        let cfg = rbf_cfg(1, 1.0, 1.0, 0.1, 0.1);
        let gamma = mig_bound(&cfg.kernel_spec(1.0).unwrap(), 50, cfg.mig).unwrap();
        let r = |t: f64| t.sqrt() * (gamma.sqrt() + gamma);
        assert_relative_eq!(r(100.0), 2f64.sqrt() * r(50.0), max_relative = 1e-14);
    }

    #[test]
    fn xi_examples() {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        // ln 1 = 0 when |A| pi^2 t^2 = 6 delta_b
        assert_relative_eq!(xi(1, 1, pi2 / 6.0, 1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            xi(10, 3, 0.05, 1.0),
            2.0 * (3.0 * pi2 * 100.0 / 0.3).ln(),
            max_relative = 1e-14
        );
        // doubling t adds exactly 2 sigma^2 ln 4
        let s = 0.7;
        let a = xi(8, 4, 0.05, s);
        let b = xi(16, 4, 0.05, s);
        assert_relative_eq!(b - a, 2.0 * s * s * 4f64.ln(), max_relative = 1e-12);
        // non-decreasing in t and candidate count
        assert!(xi(11, 3, 0.05, 1.0) > xi(10, 3, 0.05, 1.0));
        assert!(xi(10, 4, 0.05, 1.0) > xi(10, 3, 0.05, 1.0));
    }
}
