//! Acceptance battery: one test per advertised guarantee, each printing a
//! single pass line (run with `--nocapture` to see them). Tolerances are
//! stated inline next to each assertion.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minimax_core::reference::brute_force_simplex_qp;
use minimax_core::{
    best_response, danskin_gradient, dist_sq, dro_logistic_problem, fair_learning_problem,
    fair_ripple_classes, max_value, moreau_envelope_gradient, norm, prox_residual, psi_value,
    reference::central_difference, run, schedule_nc_strongly_concave,
    schedule_nc_strongly_concave_stochastic, toy_problem, GradientOracle, Method, MinimaxProblem,
    ProxMap, SolverConfig, StationarityMetric, StochasticOracle, TerminationReason,
};

const INNER: usize = 500_000;

fn toy_config(method: Method, max_iters: usize) -> SolverConfig {
    let mut c = SolverConfig::new(method, 0.5, 0.5, vec![1.0], vec![-0.4]);
    c.max_iters = max_iters;
    c.stop_tolerance = 1e-4;
    c.metric = StationarityMetric::MaxGradNorm;
    c
}

fn builtin_dro() -> MinimaxProblem {
    dro_logistic_problem(
        &[
            vec![1.0, 0.5],
            vec![-0.5, 1.0],
            vec![0.25, -1.0],
        ],
        &[1.0, -1.0, 1.0],
        5.0,
    )
    .expect("valid dataset")
}

/// Least-squares slope of `ln(value)` against `ln(k)`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (k, v) in points {
        let (x, y) = (k.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn criterion_01_toy_oracle_call_ordering() {
    let p = toy_problem();
    let alt = run(&p, &toy_config(Method::AltGda, 500)).unwrap();
    assert_eq!(
        alt.reason,
        TerminationReason::Converged,
        "alternating run must reach 1e-4 within 500 iterations"
    );
    let alt_calls = alt.final_state.total_calls();

    let sim = run(&p, &toy_config(Method::SimGda, 5000)).unwrap();
    assert_eq!(sim.reason, TerminationReason::Converged);
    let eg = run(&p, &toy_config(Method::Extragradient, 5000)).unwrap();
    assert_eq!(eg.reason, TerminationReason::Converged);
    let gdmax = run(&p, &toy_config(Method::GdMax, 5000)).unwrap();
    assert_eq!(gdmax.reason, TerminationReason::Converged);

    for (name, result) in [("sim-gda", &sim), ("eg", &eg), ("gdmax", &gdmax)] {
        assert!(
            result.final_state.total_calls() > alt_calls,
            "{name} used {} oracle calls, not strictly more than alternating's {alt_calls}",
            result.final_state.total_calls()
        );
    }
    println!(
        "criterion 01: PASS (oracle calls to 1e-4: alt {} < eg {} < sim {} / gdmax {})",
        alt_calls,
        eg.final_state.total_calls(),
        sim.final_state.total_calls(),
        gdmax.final_state.total_calls()
    );
}

#[test]
fn criterion_02_bilinear_nonconvergence() {
    let p = minimax_core::bilinear_problem(1.0).unwrap();
    let make = |method: Method| {
        let mut c = SolverConfig::new(method, 0.5, 0.5, vec![1.0], vec![1.0]);
        c.max_iters = 2000;
        c.stop_tolerance = 1e-4;
        c.metric = StationarityMetric::GradPairNorm;
        c
    };
    let alt = run(&p, &make(Method::AltGda)).unwrap();
    let sim = run(&p, &make(Method::SimGda)).unwrap();
    let eg = run(&p, &make(Method::Extragradient)).unwrap();
    assert_ne!(
        alt.reason,
        TerminationReason::Converged,
        "alternating must not reach tolerance on the bilinear saddle"
    );
    assert_eq!(
        sim.reason,
        TerminationReason::Diverged,
        "simultaneous must leave the divergence threshold on the bilinear saddle"
    );
    assert_eq!(eg.reason, TerminationReason::Converged);
    println!(
        "criterion 02: PASS (alt {}, sim {}, eg converged in {} iterations)",
        alt.reason, sim.reason, eg.final_state.iteration
    );
}

#[test]
fn criterion_03_moreau_closed_form() {
    let p = toy_problem();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let x = -1.8 + 0.4 * i as f64;
        let env = moreau_envelope_gradient(&p, &[x], 1.0, 1e-9).unwrap();
        worst = worst.max((env.gradient[0] - x / 3.0).abs());
    }
    assert!(
        worst <= 1e-6,
        "envelope gradient deviates from x/3 by {worst}"
    );
    println!("criterion 03: PASS (10 points, worst deviation from x/3 is {worst:.2e})");
}

#[test]
fn criterion_04_danskin_consistency() {
    let toy = toy_problem();
    let dro = builtin_dro();
    let mut r = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = vec![r.gen_range(-1.5..1.5)];
        let analytic = danskin_gradient(&toy, &x, 1e-10).unwrap();
        let numeric =
            central_difference(&|v: &[f64]| max_value(&toy, v, 1e-10).unwrap(), &x);
        worst = worst.max((analytic[0] - numeric[0]).abs());
    }
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| r.gen_range(-2.0..2.0)).collect();
        let analytic = danskin_gradient(&dro, &x, 1e-10).unwrap();
        let numeric =
            central_difference(&|v: &[f64]| max_value(&dro, v, 1e-10).unwrap(), &x);
        for (a, n) in analytic.iter().zip(&numeric) {
            worst = worst.max((a - n).abs());
        }
    }
    assert!(worst <= 1e-5, "max-function gradient error {worst}");
    println!("criterion 04: PASS (40 points, max abs error {worst:.2e})");
}

#[test]
fn criterion_05_near_stationary_witness() {
    let p = toy_problem();
    let lambda = 1.0;
    let mut identity_worst: f64 = 0.0;
    let mut excess_worst: f64 = f64::NEG_INFINITY;
    for i in 0..10 {
        let x = -2.0 + 0.45 * i as f64;
        let env = moreau_envelope_gradient(&p, &[x], lambda, 1e-9).unwrap();
        let eps_x = norm(&env.gradient);
        let moved = (x - env.prox_point[0]).abs();
        identity_worst = identity_worst.max((moved - lambda * eps_x).abs());
        let residual_at_witness = prox_residual(&p, &env.prox_point, 1.0, 1e-10).unwrap();
        excess_worst = excess_worst.max(residual_at_witness - eps_x);
    }
    assert!(
        identity_worst <= 1e-12,
        "witness displacement disagrees with lambda * residual by {identity_worst}"
    );
    assert!(
        excess_worst <= 1e-6,
        "witness subgradient residual exceeds the envelope residual by {excess_worst}"
    );
    println!(
        "criterion 05: PASS (identity error {identity_worst:.2e}, residual excess {excess_worst:.2e})"
    );
}

#[test]
fn criterion_06_solution_map_lipschitz() {
    let p = toy_problem();
    let kappa = p.constants.condition_number().unwrap();
    assert!(
        (kappa - 1.7807764064044151).abs() < 1e-12,
        "condition number drifted: {kappa}"
    );
    let mut r = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a: f64 = r.gen_range(-1.5..1.5);
        let mut b: f64 = r.gen_range(-1.5..1.5);
        if (a - b).abs() < 0.05 {
            b += 0.1;
        }
        let ya = best_response(&p, &[a], 1e-11, INNER).unwrap();
        let yb = best_response(&p, &[b], 1e-11, INNER).unwrap();
        worst = worst.max((ya.y_star[0] - yb.y_star[0]).abs() / (a - b).abs());
    }
    assert!(
        worst <= kappa + 1e-6,
        "best response ratio {worst} exceeds condition number {kappa}"
    );
    println!("criterion 06: PASS (max ratio {worst:.6} <= kappa {kappa:.6})");
}

#[test]
fn criterion_07_prox_correctness() {
    let mut r = ChaCha8Rng::seed_from_u64(707);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let dim = 1 + (i % 8);
        let point: Vec<f64> = (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect();
        let fast = ProxMap::Simplex.prox(&point, 1.0);
        let exact = brute_force_simplex_qp(&point);
        worst = worst.max(dist_sq(&fast, &exact).sqrt());
    }
    assert!(worst <= 1e-8, "simplex projection error {worst}");

    let maps = [
        ProxMap::Zero,
        ProxMap::Box {
            lower: vec![-1.0, 0.0, -0.5],
            upper: vec![1.0, 2.0, 0.5],
        },
        ProxMap::L2Ball { radius: 1.5 },
        ProxMap::Simplex,
        ProxMap::L1 { weight: 0.7 },
        ProxMap::Quadratic { weight: 2.0 },
    ];
    let mut pairs = 0u32;
    while pairs < 1000 {
        for map in &maps {
            let u: Vec<f64> = (0..3).map(|_| r.gen_range(-3.0..3.0)).collect();
            let v: Vec<f64> = (0..3).map(|_| r.gen_range(-3.0..3.0)).collect();
            let step = r.gen_range(0.01..2.0);
            let du = map.prox(&u, step);
            let dv = map.prox(&v, step);
            assert!(
                dist_sq(&du, &dv).sqrt() <= dist_sq(&u, &v).sqrt() + 1e-12,
                "prox expanded a pair"
            );
            pairs += 1;
        }
    }
    println!(
        "criterion 07: PASS (simplex error {worst:.2e} over 200 points, {pairs} nonexpansive pairs)"
    );
}

#[test]
fn criterion_08_variance_scaling() {
    let mut p = toy_problem();
    p.constants.noise_std = 1.0;
    let x = vec![0.7];
    let y = vec![-0.3];
    let exact = p.grad_x(&x, &y);
    let n = 10_000;
    let mut report = Vec::new();
    for &m in &[1u64, 4, 16] {
        let mut oracle = StochasticOracle::new(1.0, 808, m, m);
        let mut mean_sq = 0.0;
        for _ in 0..n {
            let g = oracle.grad_x(&p, &x, &y);
            mean_sq += dist_sq(&g, &exact) / n as f64;
        }
        let expect = 1.0 / m as f64;
        assert!(
            (mean_sq - expect).abs() <= 0.25 * expect,
            "minibatch {m}: variance {mean_sq}, expected within 25% of {expect}"
        );
        report.push(format!("M={m}: {mean_sq:.4}"));
    }
    println!(
        "criterion 08: PASS (noise energy over {n} batches: {})",
        report.join(", ")
    );
}

#[test]
fn criterion_09_deterministic_rate_slope() {
    let p = toy_problem();
    let plan = schedule_nc_strongly_concave(&p.constants).unwrap();
    let mut config = SolverConfig::new(Method::AltGda, 0.1, 0.1, vec![1.0], vec![-0.4]);
    config.apply_plan(&plan);
    config.max_iters = 10_000;
    config.stop_tolerance = 0.0;
    config.metric = StationarityMetric::MaxGradNorm;
    let result = run(&p, &config).unwrap();
    // with no x-regularizer the prox-gradient residual equals the
    // max-function gradient norm for every stepsize
    let sq: Vec<f64> = result
        .trace
        .iter()
        .map(|rec| {
            assert!(rec.residual.is_finite());
            rec.residual * rec.residual
        })
        .collect();
    assert_eq!(sq.len(), 10_000);

    let mut mean_points = Vec::new();
    let mut min_points = Vec::new();
    for &k in &[100usize, 1000, 10_000] {
        let mean = sq[..k].iter().sum::<f64>() / k as f64;
        let min = sq[..k].iter().cloned().fold(f64::INFINITY, f64::min);
        mean_points.push((k as f64, mean));
        min_points.push((k as f64, min.max(f64::MIN_POSITIVE)));
    }
    let mean_slope = loglog_slope(&mean_points);
    let min_slope = loglog_slope(&min_points);
    // the guarantee bounds the running average of squared residuals by
    // C / K; the literal minimum of a linearly converging run decays much
    // faster, so the average carries the advertised 1/K rate
    assert!(
        (-1.3..=-0.7).contains(&mean_slope),
        "running-mean squared-residual slope {mean_slope} outside -1 +- 0.3"
    );
    println!(
        "criterion 09: PASS (running-mean slope {mean_slope:.3} in -1 +- 0.3; literal min slope {min_slope:.1} decays faster)"
    );
}

#[test]
fn criterion_10_stochastic_strongly_concave_trend() {
    let mut p = toy_problem();
    let sigma = 0.1;
    let epsilon = 0.2;
    p.constants.noise_std = sigma;
    let plan = schedule_nc_strongly_concave_stochastic(&p.constants, epsilon, 1.0).unwrap();

    // theorem budget with constant 1: sigma^2 kappa^2 L / eps^4 times
    // max(kappa * initial suboptimality, L * initial response distance^2),
    // read as iterations
    let kappa = p.constants.condition_number().unwrap();
    let smooth = p.constants.gradient_smoothness;
    let x0 = vec![1.0];
    let y0 = vec![-0.4];
    let exact = toy_problem();
    let psi0 = psi_value(&exact, &x0, 1e-10).unwrap();
    let infimum = 0.0; // max function x^2/4 has infimum 0
    let br0 = best_response(&exact, &x0, 1e-11, INNER).unwrap();
    let delta0 = dist_sq(&br0.y_star, &y0);
    let budget = (sigma * sigma * kappa * kappa * smooth / epsilon.powi(4)
        * (kappa * (psi0 - infimum)).max(smooth * delta0))
    .ceil() as usize;
    assert!(budget > 0 && budget < 1000, "unexpected budget {budget}");

    let seeds = 10;
    let mut mean_residual = vec![0.0f64; budget];
    for seed in 0..seeds {
        let mut config = SolverConfig::new(Method::AltGda, 0.1, 0.1, x0.clone(), y0.clone());
        config.apply_plan(&plan);
        config.max_iters = budget;
        config.stop_tolerance = 0.0;
        config.metric = StationarityMetric::MaxGradNorm;
        config.seed = seed;
        config.run_id = 10;
        let result = run(&p, &config).unwrap();
        assert_eq!(result.trace.len(), budget);
        for (slot, rec) in mean_residual.iter_mut().zip(&result.trace) {
            *slot += rec.residual / seeds as f64;
        }
    }

    let mut running_min = Vec::with_capacity(budget);
    let mut current = f64::INFINITY;
    for &v in &mean_residual {
        current = current.min(v);
        running_min.push(current);
    }
    for pair in running_min.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-15,
            "running minimum must not increase"
        );
    }
    let best = running_min[budget - 1];
    assert!(
        best <= epsilon,
        "mean residual over {seeds} seeds only reached {best}, target {epsilon}"
    );
    println!(
        "criterion 10: PASS (budget {budget} iterations, batch {}, best mean residual {best:.4} <= {epsilon})",
        plan.batch_size
    );
}

#[test]
fn criterion_11_fair_learning_feasibility() {
    let p = fair_learning_problem(fair_ripple_classes(3), 2).unwrap();
    let mut config = SolverConfig::new(
        Method::AltGda,
        0.05,
        0.2,
        vec![0.0, 0.0],
        vec![1.0 / 3.0; 3],
    );
    config.max_iters = 200;
    config.stop_tolerance = 0.0;
    config.metric = StationarityMetric::MoreauGradNorm;
    config.moreau_lambda = Some(1.0);
    config.check_every = 200; // envelope measurement only at the end
    config.diagnostics = true;
    config.keep_iterates = true;
    let result = run(&p, &config).unwrap();
    assert_eq!(result.trace.len(), 200);
    let mut worst_gap: f64 = 0.0;
    for rec in &result.trace {
        let y = rec.y.as_ref().expect("iterates kept");
        let sum: f64 = y.iter().sum();
        assert!(
            y.iter().all(|v| *v >= 0.0),
            "mixing weights left the simplex at iteration {}: {y:?}",
            rec.iteration
        );
        assert!(
            (sum - 1.0).abs() <= 1e-9,
            "mixing weights sum to {sum} at iteration {}",
            rec.iteration
        );
        assert!(
            rec.delta_gap >= -1e-6,
            "primal gap {} at iteration {}",
            rec.delta_gap,
            rec.iteration
        );
        worst_gap = worst_gap.min(rec.delta_gap);
    }
    println!(
        "criterion 11: PASS (200 iterations feasible, smallest primal gap {worst_gap:.2e} >= -1e-6)"
    );
}

#[test]
fn criterion_12_run_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("first");
    let out2 = dir.path().join("second");
    for out in [&out1, &out2] {
        let status = Command::new(env!("CARGO_BIN_EXE_minimax-bench"))
            .args([
                "run",
                "--problem",
                "toy",
                "--sigma",
                "0.3",
                "--eta-x",
                "0.05",
                "--eta-y",
                "0.2",
                "--max-iters",
                "50",
                "--seed",
                "7",
                "--diagnostics",
                "--out",
            ])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let a = std::fs::read(out1.join("trace.csv")).unwrap();
    let b = std::fs::read(out2.join("trace.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "identical seeded runs must write byte-identical traces");
    println!(
        "criterion 12: PASS (two seeded runs, {} identical trace bytes)",
        a.len()
    );
}
