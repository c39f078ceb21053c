//! The `grid` subcommand: sweep a log-spaced stepsize grid per method and
//! report oracle calls to reach a target residual under a fixed call
//! budget. Cells that diverge or exhaust the budget score the budget
//! itself, so the heatmap stays comparable across methods with different
//! per-iteration call counts.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use minimax_core::{run, Method, SolverConfig, TerminationReason};

use crate::output::fmt_f64;
use crate::problems;
use crate::run::{parse_method, parse_metric};

pub const HEATMAP_HEADER: &str = "eta_x,eta_y,method,calls";

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Problem key: toy, bilinear, dro-logistic, fair
    #[arg(long)]
    pub problem: String,
    /// Comma-separated methods to sweep
    #[arg(long, default_value = "alt-gda,sim-gda,eg,gdmax")]
    pub methods: String,
    #[arg(long, default_value_t = 1e-3)]
    pub eta_x_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_x_max: f64,
    #[arg(long, default_value_t = 20)]
    pub eta_x_points: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eta_y_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_y_max: f64,
    #[arg(long, default_value_t = 20)]
    pub eta_y_points: usize,
    /// Oracle-call budget per grid cell
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Residual that counts as converged
    #[arg(long, default_value_t = 1e-4)]
    pub target: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gradient noise level (overrides the problem's own)
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub batch: u64,
    #[arg(long, default_value_t = 10)]
    pub gdmax_steps: usize,
    #[arg(long, default_value_t = 1)]
    pub check_every: usize,
    /// Residual: max-grad, moreau-grad, prox-residual, grad-pair
    #[arg(long)]
    pub metric: Option<String>,
    /// Problem parameter as key=value (repeatable)
    #[arg(long)]
    pub param: Vec<String>,
    /// Dataset CSV for dro-logistic
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for heatmap.csv
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (0 = rayon default)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// `n` points log-spaced over [lo, hi] inclusive; a single point sits at lo.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n > 0, "log grid needs 0 < lo <= hi, n > 0");
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub struct GridRow {
    pub eta_x: f64,
    pub eta_y: f64,
    pub method: Method,
    pub calls: u64,
}

struct Cell {
    method_idx: usize,
    ix: usize,
    iy: usize,
    method: Method,
    eta_x: f64,
    eta_y: f64,
}

pub fn sweep(args: &GridArgs) -> Result<Vec<GridRow>, String> {
    let methods = args
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_method)
        .collect::<Result<Vec<Method>, String>>()?;
    if methods.is_empty() {
        return Err("--methods must name at least one method".into());
    }
    if !(args.target.is_finite() && args.target > 0.0) {
        return Err(format!("--target must be finite and positive, got {}", args.target));
    }
    let instance = problems::build(&args.problem, &args.param, args.sigma, args.data.as_deref())?;
    let metric = match &args.metric {
        Some(name) => parse_metric(name)?,
        None => crate::run::default_metric(None, &instance.problem),
    };

    let xs = log_space(args.eta_x_min, args.eta_x_max, args.eta_x_points);
    let ys = log_space(args.eta_y_min, args.eta_y_max, args.eta_y_points);

    let mut cells = Vec::with_capacity(methods.len() * xs.len() * ys.len());
    for (mi, &method) in methods.iter().enumerate() {
        for (ix, &ex) in xs.iter().enumerate() {
            for (iy, &ey) in ys.iter().enumerate() {
                cells.push(Cell {
                    method_idx: mi,
                    ix,
                    iy,
                    method,
                    eta_x: ex,
                    eta_y: ey,
                });
            }
        }
    }

    let nx = xs.len();
    let ny = ys.len();
    // the exact oracle counts one call per gradient; only a noisy oracle
    // consumes a full minibatch
    let samples = if instance.problem.constants.noise_std > 0.0 {
        args.batch.max(1)
    } else {
        1
    };
    let run_cell = |cell: &Cell| -> Result<GridRow, String> {
        let calls_per_iter = cell.method.calls_per_iteration(args.gdmax_steps) * samples;
        let max_iters = (args.budget / calls_per_iter) as usize;
        if max_iters == 0 {
            // budget cannot afford a single iteration: score the budget
            return Ok(GridRow {
                eta_x: cell.eta_x,
                eta_y: cell.eta_y,
                method: cell.method,
                calls: args.budget,
            });
        }
        let mut config = SolverConfig::new(
            cell.method,
            cell.eta_x,
            cell.eta_y,
            instance.x0.clone(),
            instance.y0.clone(),
        );
        config.max_iters = max_iters;
        config.stop_tolerance = args.target;
        config.metric = metric;
        config.check_every = args.check_every;
        config.trace_every = usize::MAX; // only the final row matters
        config.batch_size = args.batch;
        config.gdmax_inner_steps = args.gdmax_steps;
        config.seed = args.seed;
        config.run_id = (cell.method_idx * nx * ny + cell.ix * ny + cell.iy) as u64;
        let result = run(&instance.problem, &config).map_err(|e| e.to_string())?;
        // the iterate counters already include the minibatch factor
        let calls = match result.reason {
            TerminationReason::Converged => result.final_state.total_calls(),
            _ => args.budget,
        };
        Ok(GridRow {
            eta_x: cell.eta_x,
            eta_y: cell.eta_y,
            method: cell.method,
            calls,
        })
    };

    let rows: Result<Vec<GridRow>, String> = if args.threads == 1 {
        cells.iter().map(run_cell).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| format!("cannot build thread pool: {e}"))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    };
    let mut rows = rows?;
    rows.sort_by(|a, b| {
        (a.method.to_string(), a.eta_x, a.eta_y)
            .partial_cmp(&(b.method.to_string(), b.eta_x, b.eta_y))
            .expect("finite grid coordinates")
    });
    Ok(rows)
}

pub fn heatmap_csv(rows: &[GridRow]) -> String {
    let mut out = String::from(HEATMAP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(r.eta_x),
            fmt_f64(r.eta_y),
            r.method,
            r.calls
        ));
    }
    out
}

pub fn execute(args: &GridArgs) -> Result<(), String> {
    let rows = sweep(args)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    let path = args.out.join("heatmap.csv");
    fs::write(&path, heatmap_csv(&rows)).map_err(|e| format!("cannot write {}: {e}", path.display()))?;

    let converged = rows.iter().filter(|r| r.calls < args.budget).count();
    let best = rows
        .iter()
        .min_by_key(|r| r.calls)
        .expect("at least one cell");
    println!(
        "{} cells, {} converged within budget {}; best: {} at eta_x={:.3e} eta_y={:.3e} ({} calls)",
        rows.len(),
        converged,
        args.budget,
        best.method,
        best.eta_x,
        best.eta_y,
        best.calls
    );
    Ok(())
}
