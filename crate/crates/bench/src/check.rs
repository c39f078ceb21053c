//! The `check` subcommand: a named battery of self-checks that verify the
//! library's analytic pieces against independent references (finite
//! differences, brute-force projection, closed forms, sampled witnesses).
//! Each check prints one line; any failure flips the exit code. A named
//! fault can be injected to demonstrate that the battery actually detects
//! a broken component.

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minimax_core::reference::{brute_force_simplex_qp, central_difference};
use minimax_core::{
    alt_gda_step, best_response, danskin_gradient, delta_diagnostics, dist_sq,
    extragradient_step, fair_ripple_classes, fair_learning_problem, max_value,
    moreau_envelope_gradient, norm, psi_value, schedule_nc_concave,
    schedule_nc_concave_stochastic, schedule_nc_strongly_concave,
    schedule_nc_strongly_concave_stochastic, sim_gda_step, toy_problem, ExactOracle,
    GradientOracle, IterateState, MinimaxProblem, ProblemConstants, ProxMap, StochasticOracle,
};

use crate::problems;

#[derive(Args, Debug, Default)]
pub struct CheckArgs {
    /// Run only checks whose name contains this substring
    #[arg(long)]
    pub filter: Option<String>,
    /// Break a named component to prove the battery catches it
    #[arg(long)]
    pub inject_fault: Option<String>,
}

pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<(), String>,
}

/// Substring of every fault name this battery can inject.
const KNOWN_FAULTS: &[&str] = &["simplex-vs-qp"];

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn grad_fd(problem: &MinimaxProblem, points: &[(Vec<f64>, Vec<f64>)]) -> Result<(), String> {
    for (x, y) in points {
        let gx = problem.grad_x(x, y);
        let fd_x = central_difference(&|v: &[f64]| problem.coupling_value(v, y), x);
        let gy = problem.grad_y(x, y);
        let fd_y = central_difference(&|v: &[f64]| problem.coupling_value(x, v), y);
        for (axis, (analytic, numeric)) in [("x", (&gx, &fd_x)), ("y", (&gy, &fd_y))] {
            for (a, n) in analytic.iter().zip(numeric) {
                if !close(*a, *n, 1e-5) {
                    return Err(format!(
                        "{}-gradient mismatch at ({x:?}, {y:?}): analytic {a}, finite difference {n}",
                        axis
                    ));
                }
            }
        }
    }
    Ok(())
}

fn sample_points(
    r: &mut ChaCha8Rng,
    n: usize,
    dim_x: usize,
    dim_y: usize,
    span: f64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..n)
        .map(|_| {
            let x = (0..dim_x).map(|_| r.gen_range(-span..span)).collect();
            let y = (0..dim_y).map(|_| r.gen_range(-span..span)).collect();
            (x, y)
        })
        .collect()
}

fn check_grad_fd_toy() -> Result<(), String> {
    let p = toy_problem();
    grad_fd(&p, &sample_points(&mut rng(1), 12, 1, 1, 1.5))
}

fn check_grad_fd_bilinear() -> Result<(), String> {
    let p = problems::build("bilinear", &["scale=1.3".into()], None, None)?.problem;
    grad_fd(&p, &sample_points(&mut rng(2), 12, 1, 1, 3.0))
}

fn check_grad_fd_dro() -> Result<(), String> {
    let instance = problems::build("dro-logistic", &[], None, None)?;
    let mut r = rng(3);
    // perturbed features stay in the certified band around the anchor
    let points: Vec<(Vec<f64>, Vec<f64>)> = (0..12)
        .map(|_| {
            let x = (0..2).map(|_| r.gen_range(-3.0..3.0)).collect();
            let y = instance
                .y0
                .iter()
                .map(|v| v + r.gen_range(-0.11..0.11))
                .collect();
            (x, y)
        })
        .collect();
    grad_fd(&instance.problem, &points)
}

fn check_grad_fd_fair() -> Result<(), String> {
    let p = fair_learning_problem(fair_ripple_classes(3), 2).map_err(|e| e.to_string())?;
    let mut r = rng(4);
    let points: Vec<(Vec<f64>, Vec<f64>)> = (0..12)
        .map(|_| {
            let x = (0..2).map(|_| r.gen_range(-6.0..6.0)).collect();
            let raw: Vec<f64> = (0..3).map(|_| r.gen_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            (x, raw.into_iter().map(|v| v / s).collect())
        })
        .collect();
    grad_fd(&p, &points)
}

fn danskin_fd(problem: &MinimaxProblem, xs: &[Vec<f64>]) -> Result<(), String> {
    for x in xs {
        let analytic = danskin_gradient(problem, x, 1e-10).map_err(|e| e.to_string())?;
        let numeric = central_difference(
            &|v: &[f64]| max_value(problem, v, 1e-10).expect("inner solve"),
            x,
        );
        for (a, n) in analytic.iter().zip(&numeric) {
            if !close(*a, *n, 1e-5) {
                return Err(format!(
                    "max-function gradient mismatch at {x:?}: analytic {a}, finite difference {n}"
                ));
            }
        }
    }
    Ok(())
}

fn check_danskin_fd_toy() -> Result<(), String> {
    let p = toy_problem();
    let mut r = rng(5);
    let xs: Vec<Vec<f64>> = (0..8).map(|_| vec![r.gen_range(-1.5..1.5)]).collect();
    danskin_fd(&p, &xs)
}

fn check_danskin_fd_dro() -> Result<(), String> {
    let p = problems::build("dro-logistic", &[], None, None)?.problem;
    let mut r = rng(6);
    let xs: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..2).map(|_| r.gen_range(-2.0..2.0)).collect())
        .collect();
    danskin_fd(&p, &xs)
}

/// Deliberately wrong projection for fault injection: clipping negatives
/// and renormalizing is not the Euclidean projection.
fn broken_simplex_projection(point: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = point.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    if s <= 0.0 {
        return vec![1.0 / point.len() as f64; point.len()];
    }
    clipped.into_iter().map(|v| v / s).collect()
}

fn check_simplex_vs_qp(fault: bool) -> Result<(), String> {
    let mut r = rng(7);
    for i in 0..200 {
        let dim = 1 + (i % 7);
        let point: Vec<f64> = (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect();
        let candidate = if fault {
            broken_simplex_projection(&point)
        } else {
            ProxMap::Simplex.prox(&point, 1.0)
        };
        let exact = brute_force_simplex_qp(&point);
        if dist_sq(&candidate, &exact).sqrt() > 1e-8 {
            return Err(format!(
                "projection of {point:?} gave {candidate:?}, support enumeration gives {exact:?}"
            ));
        }
    }
    Ok(())
}

fn check_prox_nonexpansive() -> Result<(), String> {
    let maps: Vec<(&str, ProxMap, usize)> = vec![
        ("zero", ProxMap::Zero, 3),
        (
            "box",
            ProxMap::Box {
                lower: vec![-1.0, 0.0, -0.5],
                upper: vec![1.0, 2.0, 0.5],
            },
            3,
        ),
        ("l2-ball", ProxMap::L2Ball { radius: 1.5 }, 3),
        ("simplex", ProxMap::Simplex, 4),
        ("l1", ProxMap::L1 { weight: 0.7 }, 3),
        ("quadratic", ProxMap::Quadratic { weight: 2.0 }, 3),
    ];
    let mut r = rng(8);
    for (name, map, dim) in &maps {
        for _ in 0..160 {
            let u: Vec<f64> = (0..*dim).map(|_| r.gen_range(-3.0..3.0)).collect();
            let v: Vec<f64> = (0..*dim).map(|_| r.gen_range(-3.0..3.0)).collect();
            let step = r.gen_range(0.01..2.0);
            let du = map.prox(&u, step);
            let dv = map.prox(&v, step);
            let before = dist_sq(&u, &v).sqrt();
            let after = dist_sq(&du, &dv).sqrt();
            if after > before + 1e-12 {
                return Err(format!(
                    "{name} prox expanded a pair: {after} > {before} for {u:?}, {v:?}"
                ));
            }
        }
    }
    Ok(())
}

fn check_moreau_closed_form() -> Result<(), String> {
    // the one-dimensional built-in has a piecewise-quadratic max function
    // whose envelope gradient at parameter 1 is x / 3 near the origin
    let p = toy_problem();
    for &x in &[0.4, 0.8, -0.6, 1.2] {
        let env = moreau_envelope_gradient(&p, &[x], 1.0, 1e-9).map_err(|e| e.to_string())?;
        let expect = x / 3.0;
        if !close(env.gradient[0], expect, 1e-6) {
            return Err(format!(
                "envelope gradient at {x}: got {}, closed form {expect}",
                env.gradient[0]
            ));
        }
    }
    Ok(())
}

fn check_moreau_identity() -> Result<(), String> {
    let p = toy_problem();
    for &(x, lambda) in &[(0.9, 1.0), (-1.1, 0.5), (0.3, 1.7)] {
        let env = moreau_envelope_gradient(&p, &[x], lambda, 1e-9).map_err(|e| e.to_string())?;
        let reconstructed = x - lambda * env.gradient[0];
        if (reconstructed - env.prox_point[0]).abs() > 1e-12 * (1.0 + x.abs()) {
            return Err(format!(
                "x - lambda * gradient = {reconstructed} but prox point is {}",
                env.prox_point[0]
            ));
        }
    }
    Ok(())
}

fn check_witness_relation() -> Result<(), String> {
    let p = toy_problem();
    for &(x, lambda) in &[(0.7, 1.0), (1.3, 0.4), (-0.5, 1.9)] {
        let env = moreau_envelope_gradient(&p, &[x], lambda, 1e-9).map_err(|e| e.to_string())?;
        let lhs = (x - env.prox_point[0]).abs();
        let rhs = lambda * norm(&env.gradient);
        if (lhs - rhs).abs() > 1e-12 * (1.0 + lhs) {
            return Err(format!(
                "|x - witness| = {lhs} but lambda * |envelope gradient| = {rhs}"
            ));
        }
    }
    Ok(())
}

fn check_solution_map_lipschitz() -> Result<(), String> {
    let p = toy_problem();
    let kappa = p.constants.condition_number().expect("strongly concave");
    let mut r = rng(9);
    for _ in 0..60 {
        let a: f64 = r.gen_range(-1.5..1.5);
        let mut b: f64 = r.gen_range(-1.5..1.5);
        if (a - b).abs() < 0.05 {
            b += 0.1;
        }
        let ya = best_response(&p, &[a], 1e-11, 500_000).map_err(|e| e.to_string())?;
        let yb = best_response(&p, &[b], 1e-11, 500_000).map_err(|e| e.to_string())?;
        let ratio = (ya.y_star[0] - yb.y_star[0]).abs() / (a - b).abs();
        if ratio > kappa + 1e-6 {
            return Err(format!(
                "best response moved {ratio} per unit between {a} and {b}, bound is {kappa}"
            ));
        }
    }
    Ok(())
}

fn check_max_fn_lipschitz() -> Result<(), String> {
    let p = fair_learning_problem(fair_ripple_classes(3), 2).map_err(|e| e.to_string())?;
    let bound = p.constants.lipschitz_x;
    // the max over the simplex of a linear payoff sits at a vertex
    let vertex_max = |theta: &[f64]| -> f64 {
        (0..3)
            .map(|i| {
                let mut t = vec![0.0; 3];
                t[i] = 1.0;
                p.coupling_value(theta, &t)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut r = rng(10);
    for _ in 0..200 {
        let a: Vec<f64> = (0..2).map(|_| r.gen_range(-7.0..7.0)).collect();
        let b: Vec<f64> = (0..2).map(|_| r.gen_range(-7.0..7.0)).collect();
        let gap = (vertex_max(&a) - vertex_max(&b)).abs();
        let dist = dist_sq(&a, &b).sqrt();
        if gap > bound * dist + 1e-9 {
            return Err(format!(
                "max function moved {gap} over distance {dist}, bound is {bound}"
            ));
        }
    }
    Ok(())
}

fn check_smoothness_witness() -> Result<(), String> {
    let dro = problems::build("dro-logistic", &[], None, None)?;
    let fair = fair_learning_problem(fair_ripple_classes(3), 2).map_err(|e| e.to_string())?;
    let fair_center = fair.reg_y().feasible_point(fair.dim_y());
    // (problem, x span, y center, y perturbation) over the certified region;
    // fair mixing weights are projected back onto the simplex below
    let cases: Vec<(MinimaxProblem, f64, Vec<f64>, f64)> = vec![
        (toy_problem(), 1.5, vec![0.0], 2.0),
        (dro.problem, 3.0, dro.y0.clone(), 0.08),
        (fair, 6.0, fair_center, 0.3),
    ];
    let mut r = rng(11);
    for (p, span_x, y_center, span_y) in &cases {
        let smooth = p.constants.gradient_smoothness;
        let simplex_y = *p.reg_y() == ProxMap::Simplex;
        for _ in 0..80 {
            let xa: Vec<f64> = (0..p.dim_x()).map(|_| r.gen_range(-span_x..*span_x)).collect();
            let xb: Vec<f64> = (0..p.dim_x()).map(|_| r.gen_range(-span_x..*span_x)).collect();
            let mut sample_y = || -> Vec<f64> {
                let raw: Vec<f64> = y_center
                    .iter()
                    .map(|v| v + r.gen_range(-span_y..*span_y))
                    .collect();
                if simplex_y {
                    ProxMap::Simplex.prox(&raw, 1.0)
                } else {
                    raw
                }
            };
            let ya = sample_y();
            let yb = sample_y();
            let ga: Vec<f64> = p
                .grad_x(&xa, &ya)
                .into_iter()
                .chain(p.grad_y(&xa, &ya))
                .collect();
            let gb: Vec<f64> = p
                .grad_x(&xb, &yb)
                .into_iter()
                .chain(p.grad_y(&xb, &yb))
                .collect();
            let joint_a: Vec<f64> = xa.iter().chain(&ya).copied().collect();
            let joint_b: Vec<f64> = xb.iter().chain(&yb).copied().collect();
            let moved = dist_sq(&ga, &gb).sqrt();
            let dist = dist_sq(&joint_a, &joint_b).sqrt();
            if moved > smooth * dist + 1e-9 {
                return Err(format!(
                    "{}: joint gradient moved {moved} over distance {dist}, bound is {smooth}",
                    p.name()
                ));
            }
        }
    }
    Ok(())
}

fn check_weak_convexity_witness() -> Result<(), String> {
    let cases: Vec<(MinimaxProblem, f64)> = vec![
        (toy_problem(), 1.5),
        (
            fair_learning_problem(fair_ripple_classes(3), 2).map_err(|e| e.to_string())?,
            6.0,
        ),
    ];
    let mut r = rng(12);
    for (p, span) in &cases {
        let rho = p.constants.weak_convexity;
        let y = p.reg_y().feasible_point(p.dim_y());
        for _ in 0..60 {
            let x: Vec<f64> = (0..p.dim_x()).map(|_| r.gen_range(-span..*span)).collect();
            let mut d: Vec<f64> = (0..p.dim_x()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let n = norm(&d);
            if n < 1e-9 {
                d[0] = 1.0;
            } else {
                d.iter_mut().for_each(|v| *v /= n);
            }
            let t = r.gen_range(0.01..0.2);
            let plus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let minus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
            let second = p.coupling_value(&plus, &y) + p.coupling_value(&minus, &y)
                - 2.0 * p.coupling_value(&x, &y);
            if second < -rho * t * t - 1e-10 {
                return Err(format!(
                    "{}: second difference {second} at scale {t} violates modulus {rho}",
                    p.name()
                ));
            }
        }
    }
    Ok(())
}

fn check_envelope_bounds() -> Result<(), String> {
    let p = toy_problem();
    for &(x, lambda) in &[(0.8, 1.0), (1.4, 0.5), (-0.9, 1.9)] {
        let env = moreau_envelope_gradient(&p, &[x], lambda, 1e-9).map_err(|e| e.to_string())?;
        let at_prox = psi_value(&p, &env.prox_point, 1e-10).map_err(|e| e.to_string())?;
        let envelope =
            at_prox + dist_sq(&env.prox_point, &[x]) / (2.0 * lambda);
        let at_x = psi_value(&p, &[x], 1e-10).map_err(|e| e.to_string())?;
        if envelope > at_x + 1e-8 {
            return Err(format!(
                "envelope value {envelope} exceeds the function value {at_x} at {x}"
            ));
        }
        if envelope < -1e-8 {
            return Err(format!(
                "envelope value {envelope} fell below the infimum 0 at {x}"
            ));
        }
    }
    Ok(())
}

fn check_variance_scaling() -> Result<(), String> {
    let mut p = toy_problem();
    p.constants.noise_std = 1.0;
    let x = vec![0.7];
    let y = vec![-0.3];
    let exact = p.grad_x(&x, &y);
    let n_samples = 4000;
    for &m in &[1u64, 4, 16] {
        let mut oracle = StochasticOracle::new(1.0, 41, m, m);
        let mut mean_sq = 0.0;
        for _ in 0..n_samples {
            let g = oracle.grad_x(&p, &x, &y);
            mean_sq += dist_sq(&g, &exact) / n_samples as f64;
        }
        let expect = 1.0 / m as f64;
        if (mean_sq - expect).abs() > 0.25 * expect {
            return Err(format!(
                "minibatch {m}: noise energy {mean_sq}, expected about {expect}"
            ));
        }
    }
    Ok(())
}

fn check_schedule_hand_values() -> Result<(), String> {
    let flat = ProblemConstants {
        lipschitz_x: 1.0,
        lipschitz_reg_x: 0.0,
        gradient_smoothness: 1.0,
        weak_convexity: 1.0,
        strong_concavity: 0.0,
        y_domain_diameter: std::f64::consts::SQRT_2,
        noise_std: 0.0,
    };
    let plan = schedule_nc_concave(&flat, 0.1).map_err(|e| e.to_string())?;
    if !close(plan.eta_x, 5e-5, 1e-12) || !close(plan.eta_y, 1.0, 1e-12) {
        return Err(format!(
            "merely concave plan: eta_x {} (want 5e-5), eta_y {} (want 1)",
            plan.eta_x, plan.eta_y
        ));
    }
    if plan.moreau_lambda != Some(0.5) {
        return Err(format!("merely concave plan: lambda {:?} (want 0.5)", plan.moreau_lambda));
    }

    let noisy = ProblemConstants {
        noise_std: 1.0,
        ..flat
    };
    let plan = schedule_nc_concave_stochastic(&noisy, 0.1).map_err(|e| e.to_string())?;
    if !close(plan.eta_y, 0.01, 1e-12) {
        return Err(format!("stochastic concave plan: eta_y {} (want 0.01)", plan.eta_y));
    }

    let toy = toy_problem();
    let plan = schedule_nc_strongly_concave(&toy.constants).map_err(|e| e.to_string())?;
    let kappa = toy.constants.condition_number().expect("mu > 0");
    let identity = plan.eta_x * 3.0 * (kappa + 1.0) * (kappa + 1.0) * toy.constants.gradient_smoothness;
    if !close(plan.eta_y, 0.5615528128088303, 1e-12) || !close(identity, 1.0, 1e-12) {
        return Err(format!(
            "strongly concave plan: eta_y {} and stepsize identity {identity}",
            plan.eta_y
        ));
    }

    let unit = ProblemConstants {
        gradient_smoothness: 1.0,
        strong_concavity: 1.0,
        weak_convexity: 1.0,
        lipschitz_x: f64::INFINITY,
        lipschitz_reg_x: 0.0,
        y_domain_diameter: f64::INFINITY,
        noise_std: 1.0,
    };
    let plan =
        schedule_nc_strongly_concave_stochastic(&unit, 0.5, 1.0).map_err(|e| e.to_string())?;
    if plan.batch_size != 4 || !close(plan.eta_x, 1.0 / 16.0, 1e-12) {
        return Err(format!(
            "stochastic strongly concave plan: batch {} (want 4), eta_x {} (want 1/16)",
            plan.batch_size, plan.eta_x
        ));
    }
    Ok(())
}

fn check_step_hand_values() -> Result<(), String> {
    let toy = toy_problem();
    let bilinear = problems::build("bilinear", &[], None, None)?.problem;
    let mut oracle = ExactOracle;

    let start = IterateState::start(vec![1.0], vec![-0.4]);
    let alt = alt_gda_step(&toy, &start, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(close(alt.x[0], 1.45, 1e-14) && close(alt.y[0], 0.525, 1e-14)) {
        return Err(format!("alternating step on the 1-d built-in: ({}, {})", alt.x[0], alt.y[0]));
    }
    let sim = sim_gda_step(&toy, &start, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(close(sim.x[0], 1.45, 1e-14) && close(sim.y[0], 0.3, 1e-14)) {
        return Err(format!("simultaneous step on the 1-d built-in: ({}, {})", sim.x[0], sim.y[0]));
    }
    let origin = IterateState::start(vec![0.0], vec![0.0]);
    let eg = extragradient_step(&toy, &origin, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(eg.x[0] == 0.0 && eg.y[0] == 0.0) {
        return Err(format!("extragradient fixed point moved: ({}, {})", eg.x[0], eg.y[0]));
    }

    let start = IterateState::start(vec![1.0], vec![1.0]);
    let alt = alt_gda_step(&bilinear, &start, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(close(alt.x[0], 0.5, 1e-14) && close(alt.y[0], 1.25, 1e-14)) {
        return Err(format!("alternating step on the bilinear game: ({}, {})", alt.x[0], alt.y[0]));
    }
    let sim = sim_gda_step(&bilinear, &start, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(close(sim.x[0], 0.5, 1e-14) && close(sim.y[0], 1.5, 1e-14)) {
        return Err(format!("simultaneous step on the bilinear game: ({}, {})", sim.x[0], sim.y[0]));
    }
    let eg = extragradient_step(&bilinear, &start, 0.5, 0.5, &mut oracle).map_err(|e| e.to_string())?;
    if !(close(eg.x[0], 0.25, 1e-14) && close(eg.y[0], 1.25, 1e-14)) {
        return Err(format!("extragradient step on the bilinear game: ({}, {})", eg.x[0], eg.y[0]));
    }
    Ok(())
}

fn check_delta_nonnegative() -> Result<(), String> {
    let cases: Vec<(MinimaxProblem, f64)> = vec![
        (toy_problem(), 1.5),
        (
            fair_learning_problem(fair_ripple_classes(3), 2).map_err(|e| e.to_string())?,
            5.0,
        ),
    ];
    let mut r = rng(13);
    for (p, span) in &cases {
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.dim_x()).map(|_| r.gen_range(-span..*span)).collect();
            let raw: Vec<f64> = (0..p.dim_y()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let y = p.prox_y(&raw, 1.0);
            let d = delta_diagnostics(p, &x, &y, 1e-9).map_err(|e| e.to_string())?;
            if d.primal_gap < -1e-8 {
                return Err(format!(
                    "{}: primal gap {} at ({x:?}, {y:?})",
                    p.name(),
                    d.primal_gap
                ));
            }
        }
    }
    Ok(())
}

type CheckFn = Box<dyn Fn() -> Result<(), String>>;

fn battery(fault: Option<&str>) -> Vec<(&'static str, CheckFn)> {
    let simplex_fault = fault == Some("simplex-vs-qp");
    vec![
        ("grad-fd-toy", Box::new(check_grad_fd_toy) as CheckFn),
        ("grad-fd-bilinear", Box::new(check_grad_fd_bilinear)),
        ("grad-fd-dro", Box::new(check_grad_fd_dro)),
        ("grad-fd-fair", Box::new(check_grad_fd_fair)),
        ("danskin-fd-toy", Box::new(check_danskin_fd_toy)),
        ("danskin-fd-dro", Box::new(check_danskin_fd_dro)),
        (
            "simplex-vs-qp",
            Box::new(move || check_simplex_vs_qp(simplex_fault)),
        ),
        ("prox-nonexpansive", Box::new(check_prox_nonexpansive)),
        ("moreau-closed-form", Box::new(check_moreau_closed_form)),
        ("moreau-identity", Box::new(check_moreau_identity)),
        ("witness-relation", Box::new(check_witness_relation)),
        ("solution-map-lipschitz", Box::new(check_solution_map_lipschitz)),
        ("max-fn-lipschitz", Box::new(check_max_fn_lipschitz)),
        ("smoothness-witness", Box::new(check_smoothness_witness)),
        ("weak-convexity-witness", Box::new(check_weak_convexity_witness)),
        ("envelope-bounds", Box::new(check_envelope_bounds)),
        ("variance-scaling", Box::new(check_variance_scaling)),
        ("schedule-hand-values", Box::new(check_schedule_hand_values)),
        ("step-hand-values", Box::new(check_step_hand_values)),
        ("delta-nonnegative", Box::new(check_delta_nonnegative)),
    ]
}

pub fn run_battery(args: &CheckArgs) -> Result<Vec<CheckOutcome>, String> {
    if let Some(fault) = &args.inject_fault {
        if !KNOWN_FAULTS.contains(&fault.as_str()) {
            return Err(format!(
                "unknown fault {fault:?}; available: {}",
                KNOWN_FAULTS.join(", ")
            ));
        }
    }
    let selected: Vec<(&'static str, CheckFn)> = battery(args.inject_fault.as_deref())
        .into_iter()
        .filter(|(name, _)| match &args.filter {
            Some(f) => name.contains(f.as_str()),
            None => true,
        })
        .collect();
    if selected.is_empty() {
        return Err(format!(
            "no check matches filter {:?}",
            args.filter.as_deref().unwrap_or("")
        ));
    }
    Ok(selected
        .into_iter()
        .map(|(name, f)| CheckOutcome { name, result: f() })
        .collect())
}

/// Runs the battery and prints one line per check. `Ok(true)` means all
/// selected checks passed.
pub fn execute(args: &CheckArgs) -> Result<bool, String> {
    let outcomes = run_battery(args)?;
    let mut failed = Vec::new();
    for o in &outcomes {
        match &o.result {
            Ok(()) => println!("check {}: ok", o.name),
            Err(detail) => {
                println!("check {}: FAILED: {detail}", o.name);
                failed.push(o.name);
            }
        }
    }
    if failed.is_empty() {
        println!("all {} checks passed", outcomes.len());
        Ok(true)
    } else {
        println!("{} of {} checks failed: {}", failed.len(), outcomes.len(), failed.join(", "));
        Ok(false)
    }
}
