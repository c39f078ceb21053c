//! Proximal gradient descent-ascent solvers and their stepsize schedules.
//!
//! Four methods share one iterate/accounting model:
//!
//! * alternating GDA: descend in `x`, then ascend in `y` using the gradient
//!   at the *new* `x` (the defining property of the method);
//! * simultaneous GDA: both players step from the old pair;
//! * extragradient: a prox half-step to a midpoint, then a full step from
//!   the old pair using midpoint gradients (twice the oracle cost);
//! * GDmax: several ascent steps to near-maximize `y` at fixed `x`, then
//!   one descent step.
//!
//! The schedules return the stepsize tuples under which the convergence
//! guarantees for the four problem regimes (merely concave or strongly
//! concave second player, exact or stochastic gradients) are stated. They
//! refuse problems whose constants are infinite rather than substituting
//! guesses.

use serde::Serialize;

use crate::error::{MinimaxError, Result};
use crate::oracle::{ExactOracle, GradientOracle, StochasticOracle};
use crate::problem::{MinimaxProblem, ProblemConstants};
use crate::stationarity::{
    danskin_gradient, default_moreau_lambda, delta_diagnostics, moreau_envelope_gradient,
    prox_residual, StationarityMetric, StationarityReport, Witness,
};
use crate::vecmath::{all_finite, axpy, norm};

/// Iterate norm beyond which a run is declared divergent: large enough not
/// to mask slow growth, small enough to trigger long before overflow.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Solver family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AltGda,
    SimGda,
    Extragradient,
    GdMax,
}

impl Method {
    /// Oracle calls one iteration consumes, per minibatch sample.
    pub fn calls_per_iteration(&self, gdmax_inner_steps: usize) -> u64 {
        match self {
            Method::AltGda | Method::SimGda => 2,
            Method::Extragradient => 4,
            Method::GdMax => gdmax_inner_steps as u64 + 1,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::AltGda => "alt-gda",
            Method::SimGda => "sim-gda",
            Method::Extragradient => "eg",
            Method::GdMax => "gdmax",
        };
        f.write_str(s)
    }
}

/// Current iterate pair with cumulative oracle-call counters.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iteration: usize,
    pub calls_x: u64,
    pub calls_y: u64,
}

impl IterateState {
    pub fn start(x: Vec<f64>, y: Vec<f64>) -> Self {
        IterateState {
            x,
            y,
            iteration: 0,
            calls_x: 0,
            calls_y: 0,
        }
    }

    pub fn total_calls(&self) -> u64 {
        self.calls_x + self.calls_y
    }
}

fn check_steps(eta_x: f64, eta_y: f64) {
    assert!(
        eta_x.is_finite() && eta_x > 0.0,
        "eta_x must be finite and positive, got {eta_x}"
    );
    assert!(
        eta_y.is_finite() && eta_y > 0.0,
        "eta_y must be finite and positive, got {eta_y}"
    );
}

fn finite_or_abort(g: &[f64], context: &'static str) -> Result<()> {
    if all_finite(g) {
        Ok(())
    } else {
        Err(MinimaxError::NonFinite { context })
    }
}

/// One alternating step: `x` descends with the gradient at `(x_k, y_k)`,
/// then `y` ascends with the gradient at `(x_{k+1}, y_k)`.
pub fn alt_gda_step(
    problem: &MinimaxProblem,
    state: &IterateState,
    eta_x: f64,
    eta_y: f64,
    oracle: &mut dyn GradientOracle,
) -> Result<IterateState> {
    check_steps(eta_x, eta_y);
    let m = oracle.samples_per_call();
    let gx = oracle.grad_x(problem, &state.x, &state.y);
    finite_or_abort(&gx, "alt-gda x-gradient")?;
    let x_next = problem.prox_x(&axpy(&state.x, -eta_x, &gx), eta_x);
    // the ascent gradient is evaluated at the just-computed x
    let gy = oracle.grad_y(problem, &x_next, &state.y);
    finite_or_abort(&gy, "alt-gda y-gradient")?;
    let y_next = problem.prox_y(&axpy(&state.y, eta_y, &gy), eta_y);
    Ok(IterateState {
        x: x_next,
        y: y_next,
        iteration: state.iteration + 1,
        calls_x: state.calls_x + m,
        calls_y: state.calls_y + m,
    })
}

/// One simultaneous step: both gradients taken at `(x_k, y_k)`.
pub fn sim_gda_step(
    problem: &MinimaxProblem,
    state: &IterateState,
    eta_x: f64,
    eta_y: f64,
    oracle: &mut dyn GradientOracle,
) -> Result<IterateState> {
    check_steps(eta_x, eta_y);
    let m = oracle.samples_per_call();
    let gx = oracle.grad_x(problem, &state.x, &state.y);
    finite_or_abort(&gx, "sim-gda x-gradient")?;
    let gy = oracle.grad_y(problem, &state.x, &state.y);
    finite_or_abort(&gy, "sim-gda y-gradient")?;
    let x_next = problem.prox_x(&axpy(&state.x, -eta_x, &gx), eta_x);
    let y_next = problem.prox_y(&axpy(&state.y, eta_y, &gy), eta_y);
    Ok(IterateState {
        x: x_next,
        y: y_next,
        iteration: state.iteration + 1,
        calls_x: state.calls_x + m,
        calls_y: state.calls_y + m,
    })
}

/// One extragradient step: prox half-step to a midpoint, then a full step
/// from the original pair using midpoint gradients. Costs two calls per
/// player.
pub fn extragradient_step(
    problem: &MinimaxProblem,
    state: &IterateState,
    eta_x: f64,
    eta_y: f64,
    oracle: &mut dyn GradientOracle,
) -> Result<IterateState> {
    check_steps(eta_x, eta_y);
    let m = oracle.samples_per_call();
    let gx = oracle.grad_x(problem, &state.x, &state.y);
    finite_or_abort(&gx, "extragradient x-gradient")?;
    let gy = oracle.grad_y(problem, &state.x, &state.y);
    finite_or_abort(&gy, "extragradient y-gradient")?;
    let x_mid = problem.prox_x(&axpy(&state.x, -eta_x, &gx), eta_x);
    let y_mid = problem.prox_y(&axpy(&state.y, eta_y, &gy), eta_y);
    let gx_mid = oracle.grad_x(problem, &x_mid, &y_mid);
    finite_or_abort(&gx_mid, "extragradient midpoint x-gradient")?;
    let gy_mid = oracle.grad_y(problem, &x_mid, &y_mid);
    finite_or_abort(&gy_mid, "extragradient midpoint y-gradient")?;
    let x_next = problem.prox_x(&axpy(&state.x, -eta_x, &gx_mid), eta_x);
    let y_next = problem.prox_y(&axpy(&state.y, eta_y, &gy_mid), eta_y);
    Ok(IterateState {
        x: x_next,
        y: y_next,
        iteration: state.iteration + 1,
        calls_x: state.calls_x + 2 * m,
        calls_y: state.calls_y + 2 * m,
    })
}

/// One GDmax step: `inner_steps` proximal ascent steps on `y` at fixed
/// `x_k` (warm started from the current `y`), then one descent step on `x`
/// using the final `y`.
pub fn gdmax_step(
    problem: &MinimaxProblem,
    state: &IterateState,
    eta_x: f64,
    eta_y: f64,
    inner_steps: usize,
    oracle: &mut dyn GradientOracle,
) -> Result<IterateState> {
    check_steps(eta_x, eta_y);
    assert!(inner_steps >= 1, "gdmax needs at least one ascent step");
    let m = oracle.samples_per_call();
    let mut y = state.y.clone();
    for _ in 0..inner_steps {
        let gy = oracle.grad_y(problem, &state.x, &y);
        finite_or_abort(&gy, "gdmax ascent gradient")?;
        y = problem.prox_y(&axpy(&y, eta_y, &gy), eta_y);
    }
    let gx = oracle.grad_x(problem, &state.x, &y);
    finite_or_abort(&gx, "gdmax descent gradient")?;
    let x_next = problem.prox_x(&axpy(&state.x, -eta_x, &gx), eta_x);
    Ok(IterateState {
        x: x_next,
        y,
        iteration: state.iteration + 1,
        calls_x: state.calls_x + m,
        calls_y: state.calls_y + inner_steps as u64 * m,
    })
}

/// Stepsize tuple prescribed by one of the four regime guarantees.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepsizePlan {
    pub eta_x: f64,
    pub eta_y: f64,
    /// Minibatch size; 1 outside the stochastic strongly concave regime.
    pub batch_size: u64,
    /// Envelope parameter for the stationarity measure, where the regime
    /// prescribes one.
    pub moreau_lambda: Option<f64>,
    /// Regime identifier: one of `nc-c`, `nc-c-stoch`, `nc-sc`,
    /// `nc-sc-stoch`.
    pub regime: &'static str,
}

fn require_finite(
    schedule: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(MinimaxError::ScheduleUnavailable {
            schedule,
            requirement,
            found: format!("{value}"),
        })
    }
}

fn require_positive(
    schedule: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MinimaxError::ScheduleUnavailable {
            schedule,
            requirement,
            found: format!("{value}"),
        })
    }
}

/// Deterministic merely-concave schedule:
/// `eta_x = min(eps^4 / (S rho^2 D^2 (L + L_f)^2), eps^2 / (rho L^2))`,
/// `eta_y = 1 / S`, envelope parameter `1 / (2 rho)`, single-sample.
pub fn schedule_nc_concave(c: &ProblemConstants, epsilon: f64) -> Result<StepsizePlan> {
    const NAME: &str = "nc-c";
    assert!(epsilon > 0.0, "schedule requires a positive target accuracy");
    let l = require_finite(NAME, "a finite Lipschitz bound in x", c.lipschitz_x)?;
    let lf = require_finite(NAME, "a finite x-regularizer Lipschitz bound", c.lipschitz_reg_x)?;
    let d = require_finite(NAME, "a bounded second-player domain", c.y_domain_diameter)?;
    let rho = require_positive(NAME, "weak convexity rho > 0", c.weak_convexity)?;
    let s = c.gradient_smoothness;
    let e2 = epsilon * epsilon;
    let e4 = e2 * e2;
    let eta_x = (e4 / (s * rho * rho * d * d * (l + lf) * (l + lf)))
        .min(e2 / (rho * l * l));
    let eta_x = require_positive(NAME, "a usable x-stepsize from the constants", eta_x)?;
    Ok(StepsizePlan {
        eta_x,
        eta_y: 1.0 / s,
        batch_size: 1,
        moreau_lambda: Some(1.0 / (2.0 * rho)),
        regime: NAME,
    })
}

/// Stochastic merely-concave schedule (single sample per step):
/// `eta_x` the three-way minimum in `eps^2`, `eps^4`, `eps^6`, and
/// `eta_y = min(1 / (2 S), eps^2 / (rho sigma^2))`.
pub fn schedule_nc_concave_stochastic(
    c: &ProblemConstants,
    epsilon: f64,
) -> Result<StepsizePlan> {
    const NAME: &str = "nc-c-stoch";
    assert!(epsilon > 0.0, "schedule requires a positive target accuracy");
    let l = require_finite(NAME, "a finite Lipschitz bound in x", c.lipschitz_x)?;
    let lf = require_finite(NAME, "a finite x-regularizer Lipschitz bound", c.lipschitz_reg_x)?;
    let d = require_finite(NAME, "a bounded second-player domain", c.y_domain_diameter)?;
    let rho = require_positive(NAME, "weak convexity rho > 0", c.weak_convexity)?;
    let s = c.gradient_smoothness;
    let sigma = c.noise_std;
    let e2 = epsilon * epsilon;
    let e4 = e2 * e2;
    let e6 = e4 * e2;
    // with sigma = 0 the noise-driven terms divide by zero and drop out of
    // the minima as infinities
    let eta_x = (e2 / (rho * (l * l + sigma * sigma)))
        .min(e4 / (rho * rho * l * (l + lf + sigma) * d * d * s))
        .min(e6 / (rho * rho * rho * l * (l + lf + sigma) * sigma * sigma * d * d));
    let eta_x = require_positive(NAME, "a usable x-stepsize from the constants", eta_x)?;
    let eta_y = (1.0 / (2.0 * s)).min(e2 / (rho * sigma * sigma));
    Ok(StepsizePlan {
        eta_x,
        eta_y,
        batch_size: 1,
        moreau_lambda: Some(1.0 / (2.0 * rho)),
        regime: NAME,
    })
}

fn kappa_for(schedule: &'static str, c: &ProblemConstants) -> Result<f64> {
    c.condition_number().ok_or(MinimaxError::ScheduleUnavailable {
        schedule,
        requirement: "strong concavity (mu > 0)",
        found: format!("mu = {}", c.strong_concavity),
    })
}

/// Deterministic strongly concave schedule: `eta_y = 1 / S`,
/// `eta_x = 1 / (3 (kappa + 1)^2 S)`.
pub fn schedule_nc_strongly_concave(c: &ProblemConstants) -> Result<StepsizePlan> {
    let kappa = kappa_for("nc-sc", c)?;
    let s = c.gradient_smoothness;
    Ok(StepsizePlan {
        eta_x: 1.0 / (3.0 * (kappa + 1.0) * (kappa + 1.0) * s),
        eta_y: 1.0 / s,
        batch_size: 1,
        moreau_lambda: None,
        regime: "nc-sc",
    })
}

/// Stochastic strongly concave schedule as stated: `eta_y = 1 / S`,
/// `eta_x = 1 / (4 (1 + kappa)^2 S)`, minibatch
/// `M = max(1, ceil(batch_scale * kappa * sigma^2 / eps^2))`. The guarantee
/// fixes only the order of `M`; `batch_scale` is the constant in front
/// (1 reproduces the default).
pub fn schedule_nc_strongly_concave_stochastic(
    c: &ProblemConstants,
    epsilon: f64,
    batch_scale: f64,
) -> Result<StepsizePlan> {
    schedule_nc_sc_stochastic_impl(c, epsilon, batch_scale, 4.0)
}

/// Variant of the stochastic strongly concave schedule with the larger
/// x-stepsize `1 / (3 (1 + kappa)^2 S)` that the same convergence argument
/// supports; the default schedule keeps the smaller stated constant.
pub fn schedule_nc_strongly_concave_stochastic_large_step(
    c: &ProblemConstants,
    epsilon: f64,
    batch_scale: f64,
) -> Result<StepsizePlan> {
    schedule_nc_sc_stochastic_impl(c, epsilon, batch_scale, 3.0)
}

fn schedule_nc_sc_stochastic_impl(
    c: &ProblemConstants,
    epsilon: f64,
    batch_scale: f64,
    denominator_factor: f64,
) -> Result<StepsizePlan> {
    assert!(epsilon > 0.0, "schedule requires a positive target accuracy");
    assert!(
        batch_scale.is_finite() && batch_scale > 0.0,
        "batch_scale must be finite and positive"
    );
    let kappa = kappa_for("nc-sc-stoch", c)?;
    let s = c.gradient_smoothness;
    let sigma = c.noise_std;
    let raw = batch_scale * kappa * sigma * sigma / (epsilon * epsilon);
    let batch_size = (raw.ceil() as u64).max(1);
    Ok(StepsizePlan {
        eta_x: 1.0 / (denominator_factor * (1.0 + kappa) * (1.0 + kappa) * s),
        eta_y: 1.0 / s,
        batch_size,
        moreau_lambda: None,
        regime: "nc-sc-stoch",
    })
}

/// Full solver configuration for `run`.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub eta_x: f64,
    pub eta_y: f64,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    /// Iteration budget; 0 returns immediately with an empty trace.
    pub max_iters: usize,
    /// Early-stop residual threshold; 0 disables early stopping.
    pub stop_tolerance: f64,
    pub metric: StationarityMetric,
    /// Envelope parameter for the envelope metric; `None` picks the
    /// problem's default.
    pub moreau_lambda: Option<f64>,
    /// Evaluate the residual every this many iterations.
    pub check_every: usize,
    /// Record a trace row every this many iterations (terminal rows are
    /// always recorded).
    pub trace_every: usize,
    /// Minibatch size when the problem carries a stochastic oracle.
    pub batch_size: u64,
    pub gdmax_inner_steps: usize,
    pub seed: u64,
    /// Stream separator for concurrent runs sharing a seed.
    pub run_id: u64,
    /// Inner tolerance for measurement solves (residuals, diagnostics).
    pub inner_tol: f64,
    /// Compute the primal gap and best-response distance per trace row
    /// (needs an inner solve per row).
    pub diagnostics: bool,
    /// Attach iterate snapshots to trace rows.
    pub keep_iterates: bool,
}

impl SolverConfig {
    /// Configuration with manual stepsizes and library defaults elsewhere.
    pub fn new(method: Method, eta_x: f64, eta_y: f64, x0: Vec<f64>, y0: Vec<f64>) -> Self {
        SolverConfig {
            method,
            eta_x,
            eta_y,
            x0,
            y0,
            max_iters: 1000,
            stop_tolerance: 0.0,
            metric: StationarityMetric::GradPairNorm,
            moreau_lambda: None,
            check_every: 1,
            trace_every: 1,
            batch_size: 1,
            gdmax_inner_steps: 10,
            seed: 0,
            run_id: 0,
            inner_tol: crate::stationarity::DEFAULT_INNER_TOL,
            diagnostics: false,
            keep_iterates: false,
        }
    }

    /// Adopts a schedule's stepsizes, batch size, and envelope parameter.
    pub fn apply_plan(&mut self, plan: &StepsizePlan) {
        self.eta_x = plan.eta_x;
        self.eta_y = plan.eta_y;
        self.batch_size = plan.batch_size;
        if plan.moreau_lambda.is_some() {
            self.moreau_lambda = plan.moreau_lambda;
        }
    }

    fn validate(&self, problem: &MinimaxProblem) -> Result<()> {
        if !(self.eta_x.is_finite() && self.eta_x > 0.0) {
            return Err(MinimaxError::Invalid(format!(
                "eta_x must be finite and positive, got {}",
                self.eta_x
            )));
        }
        if !(self.eta_y.is_finite() && self.eta_y > 0.0) {
            return Err(MinimaxError::Invalid(format!(
                "eta_y must be finite and positive, got {}",
                self.eta_y
            )));
        }
        if self.x0.len() != problem.dim_x() || self.y0.len() != problem.dim_y() {
            return Err(MinimaxError::Invalid(format!(
                "start point dimensions ({}, {}) do not match problem ({}, {})",
                self.x0.len(),
                self.y0.len(),
                problem.dim_x(),
                problem.dim_y()
            )));
        }
        if !(self.stop_tolerance >= 0.0 && self.stop_tolerance.is_finite()) {
            return Err(MinimaxError::Invalid(format!(
                "stop tolerance must be finite and nonnegative, got {}",
                self.stop_tolerance
            )));
        }
        if self.check_every == 0 || self.trace_every == 0 {
            return Err(MinimaxError::Invalid(
                "check_every and trace_every must be at least 1".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(MinimaxError::Invalid("batch_size must be at least 1".into()));
        }
        if self.method == Method::GdMax && self.gdmax_inner_steps == 0 {
            return Err(MinimaxError::Invalid(
                "gdmax needs at least one inner ascent step".into(),
            ));
        }
        if !(self.inner_tol > 0.0) {
            return Err(MinimaxError::Invalid("inner_tol must be positive".into()));
        }
        match self.metric {
            StationarityMetric::MaxGradNorm | StationarityMetric::ProxResidual => {
                if problem.constants.strong_concavity <= 0.0 {
                    return Err(MinimaxError::Invalid(format!(
                        "metric {} needs strong concavity; use moreau-grad-norm or grad-pair-norm",
                        self.metric
                    )));
                }
            }
            StationarityMetric::MoreauGradNorm => {
                if !problem.best_response_defined() {
                    return Err(MinimaxError::Invalid(format!(
                        "metric {} needs a computable best response; use grad-pair-norm",
                        self.metric
                    )));
                }
            }
            StationarityMetric::GradPairNorm => {}
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    /// Residual reached the stop tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// Iterate norm exceeded the divergence threshold.
    Diverged,
    /// A gradient or iterate stopped being finite.
    NonFinite,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminationReason::Converged => "converged",
            TerminationReason::MaxIters => "max-iters",
            TerminationReason::Diverged => "diverged",
            TerminationReason::NonFinite => "non-finite",
        };
        f.write_str(s)
    }
}

/// One recorded trace row. Quantities that were not evaluated at this row
/// (off-stride residuals, disabled diagnostics) hold NaN.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iteration: usize,
    pub residual: f64,
    pub delta_gap: f64,
    pub delta_dist: f64,
    pub psi: f64,
    pub objective: f64,
    pub calls_x: u64,
    pub calls_y: u64,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
}

/// Outcome of a run.
#[derive(Debug)]
pub struct RunResult {
    pub trace: Vec<TraceRecord>,
    pub final_state: IterateState,
    pub reason: TerminationReason,
    /// Stationarity of the final iterate; absent when the run left the
    /// measurable region (divergence, nonfinite values).
    pub report: Option<StationarityReport>,
}

fn evaluate_metric(
    problem: &MinimaxProblem,
    x: &[f64],
    y: &[f64],
    metric: StationarityMetric,
    lambda: f64,
    eta_x: f64,
    inner_tol: f64,
) -> Result<(f64, Option<Witness>)> {
    match metric {
        StationarityMetric::MaxGradNorm => {
            let g = danskin_gradient(problem, x, inner_tol)?;
            Ok((norm(&g), None))
        }
        StationarityMetric::MoreauGradNorm => {
            let env = moreau_envelope_gradient(problem, x, lambda, inner_tol)?;
            let value = norm(&env.gradient);
            Ok((
                value,
                Some(Witness {
                    point: env.prox_point,
                    residual: value,
                }),
            ))
        }
        StationarityMetric::ProxResidual => {
            Ok((prox_residual(problem, x, eta_x, inner_tol)?, None))
        }
        StationarityMetric::GradPairNorm => {
            // measurement uses exact gradients regardless of the run's oracle
            let gx = problem.grad_x(x, y);
            let gy = problem.grad_y(x, y);
            let sq: f64 = gx.iter().chain(gy.iter()).map(|v| v * v).sum();
            Ok((sq.sqrt(), None))
        }
    }
}

/// Runs the configured method until the residual reaches the stop
/// tolerance, the iteration budget runs out, or the iterates leave the
/// finite region. Residuals are evaluated with exact oracles on a
/// configurable stride; the y-best-response diagnostics are computed per
/// trace row only when enabled.
pub fn run(problem: &MinimaxProblem, config: &SolverConfig) -> Result<RunResult> {
    config.validate(problem)?;
    let lambda = config
        .moreau_lambda
        .unwrap_or_else(|| default_moreau_lambda(problem));

    let sigma = problem.constants.noise_std;
    let mut stochastic;
    let mut exact = ExactOracle;
    let oracle: &mut dyn GradientOracle = if sigma > 0.0 {
        stochastic = StochasticOracle::new(sigma, config.seed, config.run_id, config.batch_size);
        &mut stochastic
    } else {
        &mut exact
    };

    let mut state = IterateState::start(config.x0.clone(), config.y0.clone());
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut reason = TerminationReason::MaxIters;

    let diagnostics_available = config.diagnostics && problem.best_response_defined();

    let record =
        |state: &IterateState, residual: f64, trace: &mut Vec<TraceRecord>| -> Result<()> {
            let objective = problem.objective(&state.x, &state.y);
            let (gap, dist, psi) = if diagnostics_available {
                let d = delta_diagnostics(problem, &state.x, &state.y, config.inner_tol)?;
                (d.primal_gap, d.response_dist_sq, d.primal_gap + objective)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            trace.push(TraceRecord {
                iteration: state.iteration,
                residual,
                delta_gap: gap,
                delta_dist: dist,
                psi,
                objective,
                calls_x: state.calls_x,
                calls_y: state.calls_y,
                x: config.keep_iterates.then(|| state.x.clone()),
                y: config.keep_iterates.then(|| state.y.clone()),
            });
            Ok(())
        };

    for k in 1..=config.max_iters {
        let stepped = match config.method {
            Method::AltGda => alt_gda_step(problem, &state, config.eta_x, config.eta_y, oracle),
            Method::SimGda => sim_gda_step(problem, &state, config.eta_x, config.eta_y, oracle),
            Method::Extragradient => {
                extragradient_step(problem, &state, config.eta_x, config.eta_y, oracle)
            }
            Method::GdMax => gdmax_step(
                problem,
                &state,
                config.eta_x,
                config.eta_y,
                config.gdmax_inner_steps,
                oracle,
            ),
        };
        state = match stepped {
            Ok(next) => next,
            Err(MinimaxError::NonFinite { .. }) => {
                reason = TerminationReason::NonFinite;
                break;
            }
            Err(e) => return Err(e),
        };

        if !(all_finite(&state.x) && all_finite(&state.y)) {
            reason = TerminationReason::NonFinite;
            break;
        }
        let norm_sq: f64 = state
            .x
            .iter()
            .chain(state.y.iter())
            .map(|v| v * v)
            .sum();
        if norm_sq > DIVERGENCE_THRESHOLD * DIVERGENCE_THRESHOLD {
            reason = TerminationReason::Diverged;
            record(&state, f64::NAN, &mut trace)?;
            break;
        }

        let evaluate = k % config.check_every == 0;
        let residual = if evaluate {
            evaluate_metric(
                problem,
                &state.x,
                &state.y,
                config.metric,
                lambda,
                config.eta_x,
                config.inner_tol,
            )?
            .0
        } else {
            f64::NAN
        };

        let converged = evaluate && config.stop_tolerance > 0.0 && residual <= config.stop_tolerance;
        if k % config.trace_every == 0 || converged || k == config.max_iters {
            record(&state, residual, &mut trace)?;
        }
        if converged {
            reason = TerminationReason::Converged;
            break;
        }
    }

    let report = match reason {
        TerminationReason::Converged | TerminationReason::MaxIters if config.max_iters > 0 => {
            let (value, witness) = evaluate_metric(
                problem,
                &state.x,
                &state.y,
                config.metric,
                lambda,
                config.eta_x,
                config.inner_tol,
            )?;
            Some(StationarityReport {
                metric: config.metric,
                value,
                moreau_lambda: (config.metric == StationarityMetric::MoreauGradNorm)
                    .then_some(lambda),
                witness_point: witness.as_ref().map(|w| w.point.clone()),
                witness_residual: witness.as_ref().map(|w| w.residual),
            })
        }
        _ => None,
    };

    Ok(RunResult {
        trace,
        final_state: state,
        reason,
        report,
    })
}
