//! UCB acquisition and its maximization over box and discrete domains.
//!
//! The box maximizer is deliberately simple and fully deterministic: a seeded
//! uniform scan plus the best conditioning point, refined by coordinate-wise
//! golden-section ascent from the top starts. That avoids kernel-gradient
//! plumbing and is accurate enough at the dimensions this crate targets; its
//! quality is pinned by tests against a dense grid oracle rather than
//! guaranteed analytically.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::PosteriorModel;

/// Where the optimizer may query.
#[derive(Debug, Clone)]
pub enum DomainSpec {
    /// Axis-aligned box, `lower < upper` coordinate-wise.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Finite candidate table. Queried rows are excluded from further
    /// selection unless `allow_requery` is set.
    Discrete {
        points: Arc<Vec<Vec<f64>>>,
        queried: BTreeSet<usize>,
        allow_requery: bool,
    },
}

impl DomainSpec {
    pub fn box_domain(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::input(format!(
                "box bounds must be nonempty and of equal length, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(Error::input(format!(
                    "box needs lower < upper coordinate-wise, got [{l}, {u}]"
                )));
            }
        }
        Ok(DomainSpec::Box { lower, upper })
    }

    pub fn unit_box(dim: usize) -> Result<Self> {
        Self::box_domain(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn discrete(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("discrete domain needs at least one point"));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::input(
                "discrete domain points must share a positive dimension",
            ));
        }
        Ok(DomainSpec::Discrete {
            points: Arc::new(points),
            queried: BTreeSet::new(),
            allow_requery: false,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { lower, .. } => lower.len(),
            DomainSpec::Discrete { points, .. } => points[0].len(),
        }
    }

    /// Indices still admissible for selection (all of them for a box).
    pub fn admissible_count(&self) -> Option<usize> {
        match self {
            DomainSpec::Box { .. } => None,
            DomainSpec::Discrete {
                points,
                queried,
                allow_requery,
            } => Some(if *allow_requery {
                points.len()
            } else {
                points.len() - queried.len()
            }),
        }
    }

    pub fn mark_queried(&mut self, index: usize) {
        if let DomainSpec::Discrete { queried, .. } = self {
            queried.insert(index);
        }
    }

    /// One uniform draw from the admissible part of the domain.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Result<(Vec<f64>, Option<usize>)> {
        match self {
            DomainSpec::Box { lower, upper } => {
                let x = lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| rng.gen_range(*l..*u))
                    .collect();
                Ok((x, None))
            }
            DomainSpec::Discrete {
                points,
                queried,
                allow_requery,
            } => {
                let admissible: Vec<usize> = (0..points.len())
                    .filter(|i| *allow_requery || !queried.contains(i))
                    .collect();
                if admissible.is_empty() {
                    return Err(Error::ExhaustedDomain);
                }
                let idx = admissible[rng.gen_range(0..admissible.len())];
                Ok((points[idx].clone(), Some(idx)))
            }
        }
    }
}

/// Evaluation budget for the box maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaximizerBudget {
    /// Uniform samples in the scan stage.
    pub samples: usize,
    /// Golden-section evaluations per refined start.
    pub refine_evals: usize,
    /// How many of the best scan points get refined.
    pub top_starts: usize,
}

impl MaximizerBudget {
    /// Default budget: `1024 d` samples, 64 refinement evaluations from the
    /// top 4 starts.
    pub fn for_dim(dim: usize) -> Self {
        MaximizerBudget {
            samples: 1024 * dim.max(1),
            refine_evals: 64,
            top_starts: 4,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

/// `UCB(x) = mu(x) + beta sigma(x)` with `sigma = sqrt(max(var, 0))`.
pub fn ucb_value(model: &PosteriorModel, beta: f64, x: &[f64]) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::input(format!("beta must be nonnegative, got {beta}")));
    }
    let (mean, var) = model.posterior(x)?;
    Ok(mean + beta * var.max(0.0).sqrt())
}

fn ucb_from_posterior(beta: f64, mean: f64, var: f64) -> f64 {
    mean + beta * var.max(0.0).sqrt()
}

/// Result of a UCB maximization.
#[derive(Debug, Clone)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Row index for discrete domains.
    pub discrete_index: Option<usize>,
}

/// Argmax of the UCB surface over the domain. See [`maximize_ucb_detailed`].
pub fn maximize_ucb(
    model: &PosteriorModel,
    beta: f64,
    domain: &DomainSpec,
    budget: &MaximizerBudget,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(maximize_ucb_detailed(model, beta, domain, budget, seed)?.point)
}

/// Full maximization result.
///
/// Box domains: `budget.samples` uniform draws from
/// `ChaCha8Rng::seed_from_u64(seed)` (point-major, coordinate by coordinate)
/// plus the incumbent conditioning point, then coordinate-wise golden-section
/// ascent from the best `top_starts` scan points. Deterministic in all
/// arguments. Discrete domains: exact argmax over admissible rows, ties to
/// the lowest index.
pub fn maximize_ucb_detailed(
    model: &PosteriorModel,
    beta: f64,
    domain: &DomainSpec,
    budget: &MaximizerBudget,
    seed: u64,
) -> Result<Maximum> {
    if !(beta >= 0.0) {
        return Err(Error::input(format!("beta must be nonnegative, got {beta}")));
    }
    match domain {
        DomainSpec::Discrete {
            points,
            queried,
            allow_requery,
        } => {
            let admissible: Vec<usize> = (0..points.len())
                .filter(|i| *allow_requery || !queried.contains(i))
                .collect();
            if admissible.is_empty() {
                return Err(Error::ExhaustedDomain);
            }
            let xs: Vec<Vec<f64>> = admissible.iter().map(|&i| points[i].clone()).collect();
            let post = model.posterior_batch(&xs)?;
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (k, (m, v)) in post.iter().enumerate() {
                let u = ucb_from_posterior(beta, *m, *v);
                if u > best_val {
                    best_val = u;
                    best = k;
                }
            }
            Ok(Maximum {
                point: xs[best].clone(),
                value: best_val,
                discrete_index: Some(admissible[best]),
            })
        }
        DomainSpec::Box { lower, upper } => {
            let dim = lower.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xs: Vec<Vec<f64>> = Vec::with_capacity(budget.samples + 1);
            for _ in 0..budget.samples {
                xs.push(
                    lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| rng.gen_range(*l..*u))
                        .collect(),
                );
            }
            if let Some(inc) = model.incumbent() {
                if inc.len() == dim {
                    let inside = inc
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(x, (l, u))| x >= l && x <= u);
                    if inside {
                        xs.push(inc.to_vec());
                    }
                }
            }
            let post = model.posterior_batch(&xs)?;
            let values: Vec<f64> = post
                .iter()
                .map(|(m, v)| ucb_from_posterior(beta, *m, *v))
                .collect();

            let mut order: Vec<usize> = (0..xs.len()).collect();
            order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());

            let mut best_point = xs[order[0]].clone();
            let mut best_value = values[order[0]];
            for &start_idx in order.iter().take(budget.top_starts.max(1)) {
                let mut point = xs[start_idx].clone();
                let mut value = values[start_idx];
                refine_point(
                    |x| eval_ucb(model, beta, x),
                    &mut point,
                    &mut value,
                    lower,
                    upper,
                    budget.refine_evals,
                );
                if value > best_value {
                    best_value = value;
                    best_point = point;
                }
            }
            Ok(Maximum {
                point: best_point,
                value: best_value,
                discrete_index: None,
            })
        }
    }
}

/// Internal UCB evaluation on a model known to be consistent with `x`.
fn eval_ucb(model: &PosteriorModel, beta: f64, x: &[f64]) -> f64 {
    let (mean, var) = model
        .posterior(x)
        .expect("model and query dimensions are consistent here");
    ucb_from_posterior(beta, mean, var)
}

/// Coordinate-wise golden-section ascent. Spends roughly `evals` function
/// evaluations cycling once over the coordinates; the point is only updated
/// when a coordinate move improves the value.
pub(crate) fn refine_point<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    point: &mut Vec<f64>,
    value: &mut f64,
    lower: &[f64],
    upper: &[f64],
    evals: usize,
) {
    let dim = point.len();
    let iters_per_coord = (evals / dim.max(1)).max(4);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for j in 0..dim {
        let (mut a, mut b) = (lower[j], upper[j]);
        let mut probe = point.clone();
        let mut best_x = point[j];
        let mut best_v = *value;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        probe[j] = c;
        let mut fc = f(&probe);
        probe[j] = d;
        let mut fd = f(&probe);
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
        for _ in 0..iters_per_coord.saturating_sub(2) {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                probe[j] = c;
                fc = f(&probe);
                if fc > best_v {
                    best_v = fc;
                    best_x = c;
                }
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                probe[j] = d;
                fd = f(&probe);
                if fd > best_v {
                    best_v = fd;
                    best_x = d;
                }
            }
        }
        if best_v > *value {
            *value = best_v;
            point[j] = best_x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{fit, ObservationLog};
    use crate::kernels::KernelSpec;
    use approx::assert_abs_diff_eq;

    fn empty_model(dim: usize) -> PosteriorModel {
        let log = ObservationLog::new(0.1).unwrap();
        fit(&log, &KernelSpec::rbf(0.5, dim).unwrap(), false).unwrap()
    }

    fn peaked_model() -> PosteriorModel {
        // single observation makes a sharp posterior bump at its location
        let mut log = ObservationLog::new(0.05).unwrap();
        log.push(vec![0.62], 1.0);
        log.push(vec![0.1], -0.4);
        log.push(vec![0.95], -0.2);
        fit(&log, &KernelSpec::rbf(0.08, 1).unwrap(), false).unwrap()
    }

    #[test]
    fn ucb_with_zero_beta_is_the_mean() {
        let model = peaked_model();
        for x in [0.0, 0.3, 0.62, 0.9] {
            assert_eq!(
                ucb_value(&model, 0.0, &[x]).unwrap(),
                model.posterior_mean(&[x]).unwrap()
            );
        }
    }

    #[test]
    fn ucb_on_prior_equals_beta() {
        let model = empty_model(2);
        assert_eq!(ucb_value(&model, 2.0, &[0.5, 0.5]).unwrap(), 2.0);
    }

    #[test]
    fn ucb_composes_mean_and_sd() {
        let model = peaked_model();
        let x = [0.41];
        let (m, v) = model.posterior(&x).unwrap();
        assert_abs_diff_eq!(
            ucb_value(&model, 1.7, &x).unwrap(),
            m + 1.7 * v.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn discrete_single_admissible_point_is_returned() {
        let model = empty_model(1);
        let mut domain = DomainSpec::discrete(vec![vec![0.1], vec![0.7], vec![0.9]]).unwrap();
        domain.mark_queried(0);
        domain.mark_queried(2);
        let m = maximize_ucb_detailed(&model, 1.0, &domain, &MaximizerBudget::for_dim(1), 0)
            .unwrap();
        assert_eq!(m.discrete_index, Some(1));
        assert_eq!(m.point, vec![0.7]);
    }

    #[test]
    fn discrete_exhaustion_errors() {
        let model = empty_model(1);
        let mut domain = DomainSpec::discrete(vec![vec![0.1]]).unwrap();
        domain.mark_queried(0);
        let err = maximize_ucb(&model, 1.0, &domain, &MaximizerBudget::for_dim(1), 0);
        assert!(matches!(err, Err(Error::ExhaustedDomain)));
    }

    #[test]
    fn discrete_ties_break_to_lowest_index() {
        let model = empty_model(1);
        // prior is flat, so all points tie at value beta
        let domain = DomainSpec::discrete(vec![vec![0.4], vec![0.6], vec![0.8]]).unwrap();
        let m = maximize_ucb_detailed(&model, 1.0, &domain, &MaximizerBudget::for_dim(1), 0)
            .unwrap();
        assert_eq!(m.discrete_index, Some(0));
    }

    #[test]
    fn flat_prior_surface_returns_value_beta() {
        let model = empty_model(2);
        let domain = DomainSpec::unit_box(2).unwrap();
        let m = maximize_ucb_detailed(&model, 2.0, &domain, &MaximizerBudget::for_dim(2), 5)
            .unwrap();
        assert_eq!(m.value, 2.0);
        assert!(m.point.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn sharp_peak_matches_grid_oracle() {
        let model = peaked_model();
        let beta = 1.5;
        let domain = DomainSpec::unit_box(1).unwrap();
        let m = maximize_ucb_detailed(&model, beta, &domain, &MaximizerBudget::for_dim(1), 11)
            .unwrap();
        // dense grid oracle
        let mut best_v = f64::NEG_INFINITY;
        let mut best_x = 0.0;
        for i in 0..=100_000 {
            let x = i as f64 / 100_000.0;
            let v = ucb_value(&model, beta, &[x]).unwrap();
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
        assert!(
            (m.point[0] - best_x).abs() < 1e-2,
            "argmax {} vs oracle {best_x}",
            m.point[0]
        );
        assert!(best_v - m.value <= 1e-4, "value gap {}", best_v - m.value);
    }

    #[test]
    fn returned_value_dominates_every_scan_sample() {
        let model = peaked_model();
        let beta = 1.0;
        let budget = MaximizerBudget::for_dim(1);
        let seed = 99;
        let m = maximize_ucb_detailed(
            &model,
            beta,
            &DomainSpec::unit_box(1).unwrap(),
            &budget,
            seed,
        )
        .unwrap();
        // replicate the documented sampling order
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget.samples {
            let x: Vec<f64> = vec![rng.gen_range(0.0..1.0)];
            assert!(ucb_value(&model, beta, &x).unwrap() <= m.value + 1e-12);
        }
    }

    #[test]
    fn maximizer_is_bit_deterministic() {
        let model = peaked_model();
        let domain = DomainSpec::unit_box(1).unwrap();
        let budget = MaximizerBudget::for_dim(1);
        let a = maximize_ucb_detailed(&model, 1.3, &domain, &budget, 7).unwrap();
        let b = maximize_ucb_detailed(&model, 1.3, &domain, &budget, 7).unwrap();
        assert_eq!(a.point[0].to_bits(), b.point[0].to_bits());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
