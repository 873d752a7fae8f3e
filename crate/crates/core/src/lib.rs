//! Counting epsilon-misses of estimator sequences.
//!
//! `Q_eps` is the number of sample sizes `n` at which an estimator is at
//! least `eps` away from its target. First-order comparisons of `E Q_eps`
//! recover asymptotic relative efficiency; the limit of the difference
//! `E(Q_1 - Q_2)` as `eps -> 0` (the asymptotic relative deficiency) is the
//! second-order comparison this crate computes in closed form and by
//! simulation.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod ard;
pub mod brownian;
pub mod dist;
pub mod edgeworth;
pub mod error;
pub mod mc;
pub mod qsim;
pub mod running;
pub mod seed;
pub mod special;
pub mod stats;

pub use ard::{argmin_c, ArdValue, Argmin, Formula, QuadraticCurve, TransformSpec};
pub use brownian::{sample_ab_pair, simulate_q, AbSampler, PathConfig, QLawSample};
pub use dist::{Generator, MomentSpec, Sampler};
pub use edgeworth::{edgeworth_cdf, semi_analytic_eq, tail_bound, EdgeworthCdf, SemiAnalyticEq};
pub use error::{Error, Result};
pub use mc::{
    run_ard_experiment, run_qlaw_experiment, run_secondorder, ArdExperiment, ExperimentPlan, McEstimate,
    SecondOrderPlan, SeedLineage, Verdict,
};
pub use qsim::{
    count_q, coupled_diff, scaled_diff_sample, Cutoff, EstimatorFamily, MissCounter, QConfig, QCount, QWindow,
    TransformTag, VarianceMode, VarianceScale,
};
pub use running::RunningState;
