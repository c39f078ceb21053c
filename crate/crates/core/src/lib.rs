//! Solvers and stationarity measures for composite minimax problems
//!
//! ```text
//! min_x max_y  f(x) + Phi(x, y) - h(y)
//! ```
//!
//! where `Phi` is smooth, nonconvex in `x` and concave (possibly strongly
//! concave) in `y`, and `f`, `h` are proper closed convex regularizers with
//! cheap proximal maps.
//!
//! The crate provides:
//!
//! * [`problem`]: the problem interface, its smoothness/curvature
//!   constants, and built-in instances (a scalar toy saddle, a bilinear
//!   game, distributionally robust logistic regression, and a worst-group
//!   fair learning objective);
//! * [`solver`]: proximal alternating GDA together with simultaneous GDA,
//!   extragradient, and GDmax baselines, plus the stepsize schedules under
//!   which the convergence guarantees hold in each of the four regimes
//!   (merely/strongly concave, exact/stochastic gradients);
//! * [`stationarity`]: near-stationarity measures. Where the second player
//!   is strongly concave the max function is differentiable and the
//!   gradient norm applies; in the merely concave case stationarity is
//!   measured through the Moreau envelope of the weakly convex value
//!   function, whose gradient norm certifies proximity to a point with a
//!   small proximal subgradient;
//! * [`oracle`]: exact and seeded stochastic first-order oracles with
//!   counter-based streams, so runs are reproducible and parallel cells
//!   never share noise;
//! * [`prox`]: proximal maps for the supported regularizers;
//! * [`reference`]: slow independent oracles (finite differences, a
//!   brute-force simplex projector) for self-checks.

pub mod error;
pub mod oracle;
pub mod problem;
pub mod prox;
pub mod reference;
pub mod solver;
pub mod stationarity;
mod vecmath;

pub use error::{MinimaxError, Result};
pub use oracle::{Axis, ExactOracle, GradientOracle, StochasticOracle};
pub use problem::{
    bilinear_problem, dro_logistic_problem, fair_learning_problem, fair_ripple_classes,
    toy_problem, ClassLoss, MinimaxProblem, ProblemConstants,
};
pub use prox::ProxMap;
pub use solver::{
    alt_gda_step, extragradient_step, gdmax_step, run, schedule_nc_concave,
    schedule_nc_concave_stochastic, schedule_nc_strongly_concave,
    schedule_nc_strongly_concave_stochastic,
    schedule_nc_strongly_concave_stochastic_large_step, sim_gda_step, IterateState, Method,
    RunResult, SolverConfig, StepsizePlan, TerminationReason, TraceRecord,
    DIVERGENCE_THRESHOLD,
};
pub use stationarity::{
    best_response, best_response_warm, danskin_gradient, default_moreau_lambda,
    delta_diagnostics, max_value, moreau_envelope_gradient, near_stationary_witness,
    prox_residual, psi_value, BestResponse, DeltaDiagnostics, MoreauGradient,
    StationarityMetric, StationarityReport, Witness,
};

pub use vecmath::{axpy, dist_sq, dot, norm};
