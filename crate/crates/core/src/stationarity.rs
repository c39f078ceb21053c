//! Stationarity measures for the composite minimax objective.
//!
//! With `psi(x) = max_y { Phi(x, y) - h(y) } + f(x)` the natural residuals
//! are, in increasing generality:
//!
//! * the gradient norm of the max function (strongly concave case, where
//!   the max function is differentiable and its gradient is the partial
//!   x-gradient at the best response);
//! * the prox-gradient residual of `psi` (strongly concave case with an
//!   x-regularizer);
//! * the Moreau envelope gradient norm (weakly convex case, where `psi` may
//!   be nonsmooth): `psi_lambda(x) = min_z psi(z) + ||z - x||^2 / (2
//!   lambda)` is differentiable for `lambda` below the inverse
//!   weak-convexity modulus, with gradient `(x - prox) / lambda`. A small
//!   envelope gradient certifies a nearby point (the prox point, at
//!   distance `lambda` times the gradient norm) that is stationary to the
//!   same accuracy.
//!
//! Everything here is measurement: all evaluations use exact oracles, never
//! the stochastic ones, and none of it counts toward solver oracle-call
//! accounting.

use serde::Serialize;

use crate::error::{MinimaxError, Result};
use crate::problem::MinimaxProblem;
use crate::vecmath::{all_finite, axpy, dist_sq, norm, sub};

/// Default fixed-point tolerance for inner solves.
pub const DEFAULT_INNER_TOL: f64 = 1e-8;

/// Default iteration cap for inner ascent loops.
pub const DEFAULT_MAX_INNER: usize = 500_000;

/// Iteration cap for the outer envelope solve.
const MAX_ENVELOPE_ITERS: usize = 200_000;

/// Step budget for the best-effort envelope solve on merely concave
/// problems, where only a subgradient method is available.
const MERELY_CONCAVE_ENVELOPE_STEPS: usize = 2_000;

/// Inner-solve cap per subgradient step on the merely concave path. Near a
/// tie of the max function the best response degenerates and stalls; the
/// subgradient selection only needs a near-maximizer, so partial solves are
/// accepted rather than escalated. The cap is deliberately small: ascent
/// warm starts from the previous selection and is monotone, so progress
/// accumulates across subgradient steps instead of being re-earned per call.
const MERELY_CONCAVE_INNER_CAP: usize = 500;

/// Residual norm the solvers track. The first three need a computable best
/// response; the pair gradient norm is the fallback for problems (such as
/// unregularized bilinear games) whose max function is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationarityMetric {
    /// Norm of the max-function gradient at the current `x`.
    MaxGradNorm,
    /// Norm of the Moreau envelope gradient at the current `x`.
    MoreauGradNorm,
    /// Prox-gradient residual of `psi` at the current `x`.
    ProxResidual,
    /// Norm of the joint partial-gradient pair at the current `(x, y)`.
    GradPairNorm,
}

impl std::fmt::Display for StationarityMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StationarityMetric::MaxGradNorm => "max-grad-norm",
            StationarityMetric::MoreauGradNorm => "moreau-grad-norm",
            StationarityMetric::ProxResidual => "prox-residual",
            StationarityMetric::GradPairNorm => "grad-pair-norm",
        };
        f.write_str(s)
    }
}

/// Final stationarity measurement attached to a run.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    pub metric: StationarityMetric,
    pub value: f64,
    /// Envelope parameter, present when the metric is the envelope gradient.
    pub moreau_lambda: Option<f64>,
    /// Near-stationary point certified by the envelope gradient.
    pub witness_point: Option<Vec<f64>>,
    /// Subgradient residual the witness point satisfies.
    pub witness_residual: Option<f64>,
}

/// Result of an inner best-response solve.
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub y_star: Vec<f64>,
    pub inner_iters: usize,
    /// Fixed-point residual of the last completed ascent step.
    pub inner_residual: f64,
    /// False when the iteration cap was reached first; the fields then hold
    /// the partial result.
    pub converged: bool,
}

/// Gradient of the Moreau envelope together with the prox point realizing
/// it.
#[derive(Debug, Clone)]
pub struct MoreauGradient {
    pub gradient: Vec<f64>,
    /// Minimizer of `psi(z) + ||z - x||^2 / (2 lambda)`; the near-stationary
    /// witness.
    pub prox_point: Vec<f64>,
    pub outer_iters: usize,
    /// True when the inner solve certified the requested tolerance. The
    /// merely concave path is best effort and reports false.
    pub converged: bool,
}

/// Near-stationary point certified by the envelope gradient: `point` lies
/// within `lambda * residual` of the query and satisfies a subgradient
/// residual of at most `residual` (in exact arithmetic).
#[derive(Debug, Clone)]
pub struct Witness {
    pub point: Vec<f64>,
    pub residual: f64,
}

/// Duality-style diagnostics of an iterate pair.
#[derive(Debug, Clone, Copy)]
pub struct DeltaDiagnostics {
    /// `psi(x) - [f(x) + Phi(x, y) - h(y)]`, nonnegative up to inner
    /// tolerance.
    pub primal_gap: f64,
    /// Squared distance from `y` to the computed best response.
    pub response_dist_sq: f64,
    /// True when strong concavity makes the best response unique; otherwise
    /// the distance is to one particular maximizer and is representative
    /// only.
    pub maximizer_unique: bool,
}

/// Default envelope parameter: half the inverse weak-convexity modulus, or
/// 1 for convex-in-x problems where any positive value is admissible.
pub fn default_moreau_lambda(problem: &MinimaxProblem) -> f64 {
    let rho = problem.constants.weak_convexity;
    if rho > 0.0 {
        1.0 / (2.0 * rho)
    } else {
        1.0
    }
}

/// Proximal gradient ascent on `Phi(x, .) - h` from a canonical feasible
/// start, run until the fixed-point residual drops to `tol` or `max_inner`
/// steps elapse (the latter returns the partial result with `converged`
/// false).
///
/// Requires a maximizer to exist: strong concavity or a bounded
/// second-player domain.
pub fn best_response(
    problem: &MinimaxProblem,
    x: &[f64],
    tol: f64,
    max_inner: usize,
) -> Result<BestResponse> {
    let y0 = problem.reg_y().feasible_point(problem.dim_y());
    best_response_warm(problem, x, &y0, tol, max_inner)
}

/// `best_response` from a caller-supplied starting point, used to warm
/// start repeated solves along a trajectory.
pub fn best_response_warm(
    problem: &MinimaxProblem,
    x: &[f64],
    y0: &[f64],
    tol: f64,
    max_inner: usize,
) -> Result<BestResponse> {
    if !problem.best_response_defined() {
        return Err(MinimaxError::BestResponseUnavailable);
    }
    assert!(tol > 0.0, "best_response: tolerance must be positive");
    assert!(max_inner >= 1, "best_response: need at least one iteration");
    let step = 1.0 / problem.constants.gradient_smoothness;
    let mut y = y0.to_vec();
    let mut residual = f64::INFINITY;
    for iters in 1..=max_inner {
        let g = problem.grad_y(x, &y);
        if !all_finite(&g) {
            return Err(MinimaxError::NonFinite {
                context: "best response ascent gradient",
            });
        }
        let next = problem.prox_y(&axpy(&y, step, &g), step);
        residual = norm(&sub(&y, &next)) / step;
        y = next;
        if residual <= tol {
            return Ok(BestResponse {
                y_star: y,
                inner_iters: iters,
                inner_residual: residual,
                converged: true,
            });
        }
    }
    Ok(BestResponse {
        y_star: y,
        inner_iters: max_inner,
        inner_residual: residual,
        converged: false,
    })
}

fn converged_response(
    problem: &MinimaxProblem,
    x: &[f64],
    y0: Option<&[f64]>,
    tol: f64,
) -> Result<BestResponse> {
    let br = match y0 {
        Some(y0) => best_response_warm(problem, x, y0, tol, DEFAULT_MAX_INNER)?,
        None => best_response(problem, x, tol, DEFAULT_MAX_INNER)?,
    };
    if !br.converged {
        return Err(MinimaxError::InnerNotConverged {
            context: "best response",
            tol,
            residual: br.inner_residual,
            iters: br.inner_iters,
        });
    }
    Ok(br)
}

/// Max-function value `phi(x) = Phi(x, y*(x)) - h(y*(x))`.
///
/// The value error is second order in `tol`: the computed response is
/// feasible and near-optimal, and the objective is flat to first order at
/// the maximizer.
pub fn max_value(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<f64> {
    let br = converged_response(problem, x, None, tol)?;
    Ok(problem.coupling_value(x, &br.y_star) - problem.reg_y_value(&br.y_star))
}

/// Regularized max value `psi(x) = phi(x) + f(x)`.
pub fn psi_value(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<f64> {
    Ok(max_value(problem, x, tol)? + problem.reg_x_value(x))
}

/// Gradient of the max function at `x` for strongly concave problems: the
/// partial x-gradient evaluated at the best response.
///
/// The error degrades linearly with the inner tolerance: the result is
/// within `gradient_smoothness * tol / strong_concavity` of the exact
/// gradient, since the inner residual bounds the response error through
/// strong concavity.
pub fn danskin_gradient(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    if problem.constants.strong_concavity <= 0.0 {
        return Err(MinimaxError::RequiresStrongConcavity {
            operation: "max-function gradient",
        });
    }
    let br = converged_response(problem, x, None, tol)?;
    Ok(problem.grad_x(x, &br.y_star))
}

fn check_lambda(problem: &MinimaxProblem, lambda: f64) -> Result<()> {
    let rho = problem.constants.weak_convexity;
    let limit = if rho > 0.0 { 1.0 / rho } else { f64::INFINITY };
    if !(lambda > 0.0 && lambda < limit) {
        return Err(MinimaxError::InvalidMoreauParameter { lambda, limit, rho });
    }
    Ok(())
}

/// Gradient of the Moreau envelope `psi_lambda` at `x`, computed through
/// its prox point: `gradient = (x - prox_point) / lambda`.
///
/// Strongly concave problems solve the envelope subproblem by proximal
/// gradient descent on the smooth max function (Danskin gradients, inner
/// solves warm started along the way) and certify `tol`. Merely concave
/// problems fall back to a proximal subgradient method with decreasing
/// steps on the strongly convex subproblem; that path is best effort and
/// reports `converged = false`.
pub fn moreau_envelope_gradient(
    problem: &MinimaxProblem,
    x: &[f64],
    lambda: f64,
    tol: f64,
) -> Result<MoreauGradient> {
    check_lambda(problem, lambda)?;
    assert!(tol > 0.0, "moreau envelope: tolerance must be positive");
    if !problem.best_response_defined() {
        return Err(MinimaxError::BestResponseUnavailable);
    }
    let inner_tol = (tol * 1e-2).max(1e-12);
    let constants = &problem.constants;

    if constants.strong_concavity > 0.0 {
        // smooth path: the max function has Lipschitz gradient
        // (1 + kappa) * gradient_smoothness
        let kappa = constants.condition_number().expect("mu > 0");
        let max_fn_smoothness = (1.0 + kappa) * constants.gradient_smoothness;
        let step = 1.0 / (max_fn_smoothness + 1.0 / lambda);
        let mut z = x.to_vec();
        let mut y_warm = problem.reg_y().feasible_point(problem.dim_y());
        let mut residual = f64::INFINITY;
        for outer in 1..=MAX_ENVELOPE_ITERS {
            let br = converged_response(problem, &z, Some(&y_warm), inner_tol)?;
            y_warm = br.y_star;
            let grad_max = problem.grad_x(&z, &y_warm);
            // gradient of phi(z) + ||z - x||^2 / (2 lambda)
            let total: Vec<f64> = grad_max
                .iter()
                .zip(z.iter().zip(x))
                .map(|(g, (zi, xi))| g + (zi - xi) / lambda)
                .collect();
            if !all_finite(&total) {
                return Err(MinimaxError::NonFinite {
                    context: "moreau envelope gradient step",
                });
            }
            let next = problem.prox_x(&axpy(&z, -step, &total), step);
            residual = norm(&sub(&z, &next)) / step;
            z = next;
            if residual <= tol {
                let gradient: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| (xi - zi) / lambda).collect();
                return Ok(MoreauGradient {
                    gradient,
                    prox_point: z,
                    outer_iters: outer,
                    converged: true,
                });
            }
        }
        Err(MinimaxError::InnerNotConverged {
            context: "moreau envelope prox point",
            tol,
            residual,
            iters: MAX_ENVELOPE_ITERS,
        })
    } else {
        // best-effort path: subgradient selections through the best
        // response, decreasing steps sized for the strongly convex
        // subproblem; stalled inner solves contribute their partial result
        let modulus = 1.0 / lambda - constants.weak_convexity;
        let mut z = x.to_vec();
        let mut y_warm = problem.reg_y().feasible_point(problem.dim_y());
        for j in 0..MERELY_CONCAVE_ENVELOPE_STEPS {
            let br =
                best_response_warm(problem, &z, &y_warm, inner_tol, MERELY_CONCAVE_INNER_CAP)?;
            y_warm = br.y_star;
            let grad_sel = problem.grad_x(&z, &y_warm);
            let total: Vec<f64> = grad_sel
                .iter()
                .zip(z.iter().zip(x))
                .map(|(g, (zi, xi))| g + (zi - xi) / lambda)
                .collect();
            if !all_finite(&total) {
                return Err(MinimaxError::NonFinite {
                    context: "moreau envelope subgradient step",
                });
            }
            let step = 2.0 / (modulus * (j + 2) as f64);
            z = problem.prox_x(&axpy(&z, -step, &total), step);
        }
        let gradient: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| (xi - zi) / lambda).collect();
        Ok(MoreauGradient {
            gradient,
            prox_point: z,
            outer_iters: MERELY_CONCAVE_ENVELOPE_STEPS,
            converged: false,
        })
    }
}

/// Near-stationary point certified by the envelope gradient at `x`.
pub fn near_stationary_witness(
    problem: &MinimaxProblem,
    x: &[f64],
    lambda: f64,
    tol: f64,
) -> Result<Witness> {
    let env = moreau_envelope_gradient(problem, x, lambda, tol)?;
    Ok(Witness {
        residual: norm(&env.gradient),
        point: env.prox_point,
    })
}

/// Prox-gradient residual of `psi` at `x` with the given step:
/// `||x - prox_f(x - step * grad phi(x))|| / step`. Requires strong
/// concavity (the max-function gradient must exist).
pub fn prox_residual(problem: &MinimaxProblem, x: &[f64], step: f64, tol: f64) -> Result<f64> {
    assert!(
        step.is_finite() && step > 0.0,
        "prox_residual: step must be finite and positive"
    );
    let g = danskin_gradient(problem, x, tol)?;
    let moved = problem.prox_x(&axpy(x, -step, &g), step);
    Ok(norm(&sub(x, &moved)) / step)
}

/// Primal gap and best-response distance of an iterate pair; the inner
/// solve warm starts from the supplied `y`.
///
/// Because the ascent starts at `y` itself and is monotone, the gap stays
/// nonnegative even when the inner solve stalls (it then underestimates
/// the true gap). Merely concave problems can stall near ties of the max
/// function, so their inner budget is capped rather than escalated.
pub fn delta_diagnostics(
    problem: &MinimaxProblem,
    x: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<DeltaDiagnostics> {
    let max_inner = if problem.constants.strong_concavity > 0.0 {
        DEFAULT_MAX_INNER
    } else {
        MERELY_CONCAVE_INNER_CAP
    };
    let br = best_response_warm(problem, x, y, tol, max_inner)?;
    let psi = problem.coupling_value(x, &br.y_star) - problem.reg_y_value(&br.y_star)
        + problem.reg_x_value(x);
    let objective = problem.objective(x, y);
    Ok(DeltaDiagnostics {
        primal_gap: psi - objective,
        response_dist_sq: dist_sq(y, &br.y_star),
        maximizer_unique: problem.constants.strong_concavity > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        bilinear_problem, fair_learning_problem, fair_ripple_classes, toy_problem,
        MinimaxProblem, ProblemConstants,
    };
    use crate::prox::ProxMap;
    use approx::assert_abs_diff_eq;

    #[test]
    fn toy_best_response_tracks_identity() {
        let p = toy_problem();
        let br = best_response(&p, &[1.0], 1e-10, 10_000).unwrap();
        assert!(br.converged);
        assert_abs_diff_eq!(br.y_star[0], 1.0, epsilon = 1e-9);
        let br0 = best_response(&p, &[0.0], 1e-10, 10_000).unwrap();
        assert_abs_diff_eq!(br0.y_star[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bilinear_best_response_unavailable() {
        let p = bilinear_problem(1.0).unwrap();
        assert!(matches!(
            best_response(&p, &[1.0], 1e-8, 100),
            Err(MinimaxError::BestResponseUnavailable)
        ));
    }

    #[test]
    fn exhausted_inner_budget_flags_partial_result() {
        let p = toy_problem();
        let br = best_response(&p, &[100.0], 1e-12, 1).unwrap();
        assert!(!br.converged);

        // nearly flat ascent direction: the maximizer sits at x / mu = 1e9,
        // far beyond what the capped inner loop can reach
        let constants = ProblemConstants {
            lipschitz_x: f64::INFINITY,
            lipschitz_reg_x: 0.0,
            gradient_smoothness: 1.0,
            weak_convexity: 1.0,
            strong_concavity: 1e-9,
            y_domain_diameter: f64::INFINITY,
            noise_std: 0.0,
        };
        let slow = MinimaxProblem::new(
            "slow-ascent",
            1,
            1,
            constants,
            Box::new(|x, y| x[0] * y[0] - 0.5e-9 * y[0] * y[0]),
            Box::new(|_x, y| vec![y[0]]),
            Box::new(|x, y| vec![x[0] - 1e-9 * y[0]]),
            ProxMap::Zero,
            ProxMap::Zero,
        );
        assert!(matches!(
            max_value(&slow, &[1.0], 1e-12),
            Err(MinimaxError::InnerNotConverged { .. })
        ));
    }

    #[test]
    fn toy_max_value_quarter_square() {
        let p = toy_problem();
        assert_abs_diff_eq!(max_value(&p, &[1.0], 1e-9).unwrap(), 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(psi_value(&p, &[1.0], 1e-9).unwrap(), 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(max_value(&p, &[-2.0], 1e-9).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn toy_danskin_gradient_half_x() {
        let p = toy_problem();
        let g = danskin_gradient(&p, &[1.0], 1e-8).unwrap();
        assert_abs_diff_eq!(g[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn danskin_requires_strong_concavity() {
        let p = fair_learning_problem(fair_ripple_classes(3), 2).unwrap();
        assert!(matches!(
            danskin_gradient(&p, &[0.0, 0.0], 1e-8),
            Err(MinimaxError::RequiresStrongConcavity { .. })
        ));
    }

    #[test]
    fn toy_moreau_gradient_third_of_x() {
        // with the max function x^2/4 and lambda = 1 the envelope minimizer
        // is 2x/3 and the gradient is x/3
        let p = toy_problem();
        for x in [1.0, -0.7, 3.2] {
            let env = moreau_envelope_gradient(&p, &[x], 1.0, 1e-8).unwrap();
            assert!(env.converged);
            assert_abs_diff_eq!(env.gradient[0], x / 3.0, epsilon = 1e-6);
            assert_abs_diff_eq!(env.prox_point[0], 2.0 * x / 3.0, epsilon = 1e-6);
            // identity between gradient and prox point holds exactly
            assert_eq!(x - 1.0 * env.gradient[0], env.prox_point[0]);
        }
    }

    #[test]
    fn moreau_lambda_range_enforced() {
        let p = toy_problem(); // weak convexity 1/2, admissible range (0, 2)
        assert!(matches!(
            moreau_envelope_gradient(&p, &[1.0], 2.0, 1e-8),
            Err(MinimaxError::InvalidMoreauParameter { .. })
        ));
        assert!(matches!(
            moreau_envelope_gradient(&p, &[1.0], 0.0, 1e-8),
            Err(MinimaxError::InvalidMoreauParameter { .. })
        ));
        assert!(moreau_envelope_gradient(&p, &[1.0], 1.9, 1e-8).is_ok());
    }

    #[test]
    fn witness_relation_matches_envelope_gradient() {
        let p = toy_problem();
        let x = [1.0];
        let w = near_stationary_witness(&p, &x, 1.0, 1e-8).unwrap();
        // distance to the witness is lambda times the certified residual
        assert_abs_diff_eq!((x[0] - w.point[0]).abs(), 1.0 * w.residual, epsilon = 1e-12);
        // the witness satisfies the same residual through the max-function
        // gradient |x_hat| / 2 = |x| / 3
        let g_at_witness = danskin_gradient(&p, &w.point, 1e-9).unwrap();
        assert_abs_diff_eq!(g_at_witness[0].abs(), w.residual, epsilon = 1e-6);
    }

    #[test]
    fn toy_prox_residual_is_gradient_norm() {
        let p = toy_problem();
        for step in [0.1, 1.0] {
            let r = prox_residual(&p, &[1.0], step, 1e-8).unwrap();
            assert_abs_diff_eq!(r, 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn prox_residual_vanishes_at_active_bound() {
        // same coupling as the toy but x constrained to [0.1, 0.2]: at the
        // lower bound the max-function gradient 0.05 pushes against the
        // constraint, so the projected step returns the same point
        let toy = toy_problem();
        let p = MinimaxProblem::new(
            "toy-box",
            1,
            1,
            toy.constants,
            Box::new(|x, y| -x[0] * x[0] / 4.0 + x[0] * y[0] - y[0] * y[0] / 2.0),
            Box::new(|x, y| vec![-x[0] / 2.0 + y[0]]),
            Box::new(|x, y| vec![x[0] - y[0]]),
            ProxMap::Box {
                lower: vec![0.1],
                upper: vec![0.2],
            },
            ProxMap::Zero,
        );
        let r = prox_residual(&p, &[0.1], 0.1, 1e-9).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn toy_delta_diagnostics_start_values() {
        let p = toy_problem();
        let d = delta_diagnostics(&p, &[1.0], &[-0.4], 1e-9).unwrap();
        assert_abs_diff_eq!(d.primal_gap, 0.98, epsilon = 1e-9);
        assert_abs_diff_eq!(d.response_dist_sq, 1.96, epsilon = 1e-7);
        assert!(d.maximizer_unique);
    }

    #[test]
    fn primal_gap_nonnegative_at_sampled_points() {
        let p = toy_problem();
        for i in 0..20 {
            let x = [-2.0 + 0.21 * i as f64];
            let y = [1.5 - 0.17 * i as f64];
            let d = delta_diagnostics(&p, &x, &y, 1e-9).unwrap();
            assert!(d.primal_gap >= -1e-9, "gap {} at {x:?}, {y:?}", d.primal_gap);
        }
    }

    #[test]
    fn fair_best_response_picks_worst_class_vertex() {
        let p = fair_learning_problem(fair_ripple_classes(3), 2).unwrap();
        // at the origin the class losses are 0.5, 0.6, 0.7: the last class
        // is the unique worst, so ascent lands on its vertex
        let br = best_response(&p, &[0.0, 0.0], 1e-10, 200_000).unwrap();
        assert!(br.converged);
        assert_abs_diff_eq!(br.y_star[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(br.y_star[1], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(br.y_star[2], 1.0, epsilon = 1e-8);
        let d = delta_diagnostics(&p, &[0.0, 0.0], &[1.0, 0.0, 0.0], 1e-9).unwrap();
        assert!(!d.maximizer_unique);
        // worst-class value 0.7 against the mixture value 0.5
        assert_abs_diff_eq!(d.primal_gap, 0.2, epsilon = 1e-7);
    }

    #[test]
    fn merely_concave_envelope_is_best_effort() {
        let p = fair_learning_problem(fair_ripple_classes(3), 2).unwrap();
        let env = moreau_envelope_gradient(&p, &[0.0, 0.0], 1.0, 1e-6).unwrap();
        assert!(!env.converged);
        assert!(all_finite(&env.gradient));
    }

    #[test]
    fn default_lambda_respects_weak_convexity() {
        let toy = toy_problem();
        assert_eq!(default_moreau_lambda(&toy), 1.0);
        let fair = fair_learning_problem(fair_ripple_classes(3), 2).unwrap();
        assert_eq!(default_moreau_lambda(&fair), 1.0);
        let mut constants = toy.constants;
        constants.weak_convexity = 4.0;
        let steep = MinimaxProblem::new(
            "steep",
            1,
            1,
            constants,
            Box::new(|x, y| -x[0] * x[0] / 4.0 + x[0] * y[0] - y[0] * y[0] / 2.0),
            Box::new(|x, y| vec![-x[0] / 2.0 + y[0]]),
            Box::new(|x, y| vec![x[0] - y[0]]),
            ProxMap::Zero,
            ProxMap::Zero,
        );
        assert_eq!(default_moreau_lambda(&steep), 0.125);
    }
}
