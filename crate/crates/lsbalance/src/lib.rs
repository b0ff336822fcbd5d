//! Bayesian optimization with Gaussian-process UCB learners that is robust to
//! unknown kernel hyperparameters.
//!
//! Most BO implementations pick the kernel length scale by maximizing marginal
//! likelihood on the data observed so far, which silently fails when the
//! objective is rougher in regions not yet explored. This crate implements
//! regret balancing with elimination over a growing family of GP-UCB base
//! learners instead:
//!
//! * [`balancer`] — LB-GP-UCB (length-scale balancing), LNB-GP-UCB (length
//!   scale and norm balancing) and the generic fixed-set hyperparameter
//!   balancer. At every step the learner with the smallest suspected regret
//!   bound is played; learners whose observed reward falls behind by more than
//!   their confidence slack are eliminated.
//! * [`baselines`] — fixed-length-scale oracle GP-UCB, A-GP-UCB (monotone
//!   length-scale decay) and MLE-GP-UCB, all running on the same GP /
//!   acquisition / bookkeeping stack so traces are directly comparable.
//! * [`kernels`], [`gp`], [`bounds`], [`candidates`], [`acquisition`] — the
//!   underlying pieces: stationary kernels, exact GP regression, information
//!   gain and confidence-radius formulas, candidate grids and growth
//!   schedules, and deterministic UCB maximization.
//! * [`benchmarks`], [`harness`] — objectives (including RKHS-sampled test
//!   functions with known smoothness and tabular lookup tasks) and a seeded,
//!   byte-reproducible experiment runner with CSV regret traces.
//!
//! The `examples/` directory contains one runnable example per major
//! capability; the thin `lsbalance` binary exposes the experiment runner on
//! the command line.

pub mod acquisition;
pub mod balancer;
pub mod baselines;
pub mod benchmarks;
pub mod bounds;
pub mod candidates;
mod engine;
pub mod error;
pub mod gp;
pub mod harness;
pub mod kernels;
pub mod trace;

pub use acquisition::{maximize_ucb, ucb_value, DomainSpec, MaximizerBudget};
pub use balancer::{BalancerConfig, BalancerMode, BalancerState, HyperCandidate};
pub use bounds::{exact_info_gain, mig_bound, norm_for_lengthscale, xi, BoundConfig, MigVariant};
pub use candidates::{default_t0, lengthscale_candidate, norm_candidate, CandidateSchedule, GrowthFn};
pub use error::{Error, Result};
pub use gp::{fit, log_marginal_likelihood, ObservationLog, PosteriorModel};
pub use kernels::{KernelFamily, KernelSpec};
pub use trace::{IterationRecord, RegretTrace};
