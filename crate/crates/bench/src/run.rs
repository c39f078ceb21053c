//! The `run` subcommand: one solver run with a trace CSV and a metadata
//! JSON. Settings come from flags, optionally underlaid by a JSON config
//! file whose keys mirror the long flag names; flags win.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde_json::{json, Value};

use minimax_core::{
    run, schedule_nc_concave, schedule_nc_concave_stochastic, schedule_nc_strongly_concave,
    schedule_nc_strongly_concave_stochastic, Method, MinimaxProblem, RunResult, SolverConfig,
    StationarityMetric, StepsizePlan, TraceRecord,
};

use crate::output::{fmt_f64, parse_f64_list};
use crate::problems;

pub const TRACE_HEADER: &str = "k,residual,delta_gap,delta_dist,psi,Psi,calls_x,calls_y";

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// JSON config file; explicit flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem key: toy, bilinear, dro-logistic, fair
    #[arg(long)]
    pub problem: Option<String>,
    /// Solver: alt-gda, sim-gda, eg, gdmax
    #[arg(long)]
    pub method: Option<String>,
    /// Stepsize schedule: nc-c, nc-c-stoch, nc-sc, nc-sc-stoch
    #[arg(long)]
    pub schedule: Option<String>,
    /// Target accuracy the schedule is tuned for
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub eta_x: Option<f64>,
    #[arg(long)]
    pub eta_y: Option<f64>,
    /// Gradient noise level (overrides the problem's own)
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Minibatch size
    #[arg(long)]
    pub batch: Option<u64>,
    /// Constant in front of the schedule-prescribed batch size
    #[arg(long)]
    pub batch_scale: Option<f64>,
    /// Inner ascent steps per gdmax iteration
    #[arg(long)]
    pub gdmax_steps: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop when the residual reaches this value (0 disables early stop)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Residual: max-grad, moreau-grad, prox-residual, grad-pair
    #[arg(long)]
    pub metric: Option<String>,
    /// Envelope parameter for the moreau-grad metric
    #[arg(long)]
    pub moreau_lambda: Option<f64>,
    /// Evaluate the residual every N iterations
    #[arg(long)]
    pub check_every: Option<usize>,
    /// Record a trace row every N iterations
    #[arg(long)]
    pub trace_every: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise stream separator for runs sharing a seed
    #[arg(long)]
    pub run_id: Option<u64>,
    /// Comma-separated start point for the first player
    #[arg(long)]
    pub x0: Option<String>,
    /// Comma-separated start point for the second player
    #[arg(long)]
    pub y0: Option<String>,
    /// Problem parameter as key=value (repeatable)
    #[arg(long)]
    pub param: Vec<String>,
    /// Dataset CSV for dro-logistic (feature columns then a +-1 label)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for trace.csv and run.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write iterates.csv with the visited points
    #[arg(long)]
    pub save_iterates: bool,
    /// Compute the primal gap and best-response distance per trace row
    #[arg(long)]
    pub diagnostics: bool,
}

const CONFIG_KEYS: &[&str] = &[
    "problem",
    "method",
    "schedule",
    "epsilon",
    "eta-x",
    "eta-y",
    "sigma",
    "batch",
    "batch-scale",
    "gdmax-steps",
    "max-iters",
    "tol",
    "metric",
    "moreau-lambda",
    "check-every",
    "trace-every",
    "seed",
    "run-id",
    "x0",
    "y0",
    "param",
    "data",
    "out",
    "save-iterates",
    "diagnostics",
];

struct ConfigFile(serde_json::Map<String, Value>);

impl ConfigFile {
    fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| format!("config {}: invalid JSON: {e}", path.display()))?;
        let map = match value {
            Value::Object(map) => map,
            _ => return Err(format!("config {}: expected a JSON object", path.display())),
        };
        for key in map.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(format!(
                    "config {}: unknown key {key:?}; known keys: {}",
                    path.display(),
                    CONFIG_KEYS.join(", ")
                ));
            }
        }
        Ok(ConfigFile(map))
    }

    fn empty() -> Self {
        ConfigFile(serde_json::Map::new())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| format!("config key {key:?}: expected a number")),
        }
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| format!("config key {key:?}: expected a nonnegative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| format!("config key {key:?}: expected a string")),
        }
    }

    fn boolean(&self, key: &str) -> Result<bool, String> {
        match self.0.get(key) {
            None => Ok(false),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| format!("config key {key:?}: expected a boolean")),
        }
    }

    fn point(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => parse_f64_list(s).map(Some),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| format!("config key {key:?}: expected numbers"))
                })
                .collect::<Result<Vec<f64>, String>>()
                .map(Some),
            Some(_) => Err(format!("config key {key:?}: expected an array or string")),
        }
    }

    fn string_list(&self, key: &str) -> Result<Vec<String>, String> {
        match self.0.get(key) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| format!("config key {key:?}: expected strings"))
                })
                .collect(),
            Some(_) => Err(format!("config key {key:?}: expected an array of strings")),
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "alt-gda" => Ok(Method::AltGda),
        "sim-gda" => Ok(Method::SimGda),
        "eg" | "extragradient" => Ok(Method::Extragradient),
        "gdmax" => Ok(Method::GdMax),
        other => Err(format!(
            "unknown method {other:?}; available: alt-gda, sim-gda, eg, gdmax"
        )),
    }
}

pub fn parse_metric(s: &str) -> Result<StationarityMetric, String> {
    match s {
        "max-grad" | "max-grad-norm" => Ok(StationarityMetric::MaxGradNorm),
        "moreau-grad" | "moreau-grad-norm" => Ok(StationarityMetric::MoreauGradNorm),
        "prox-residual" => Ok(StationarityMetric::ProxResidual),
        "grad-pair" | "grad-pair-norm" => Ok(StationarityMetric::GradPairNorm),
        other => Err(format!(
            "unknown metric {other:?}; available: max-grad, moreau-grad, prox-residual, grad-pair"
        )),
    }
}

pub fn resolve_schedule(
    name: &str,
    problem: &MinimaxProblem,
    epsilon: f64,
    batch_scale: f64,
) -> Result<StepsizePlan, String> {
    let c = &problem.constants;
    let plan = match name {
        "nc-c" => schedule_nc_concave(c, epsilon),
        "nc-c-stoch" => schedule_nc_concave_stochastic(c, epsilon),
        "nc-sc" => schedule_nc_strongly_concave(c),
        "nc-sc-stoch" => schedule_nc_strongly_concave_stochastic(c, epsilon, batch_scale),
        other => {
            return Err(format!(
                "unknown schedule {other:?}; available: nc-c, nc-c-stoch, nc-sc, nc-sc-stoch"
            ))
        }
    };
    plan.map_err(|e| format!("schedule {name} on {}: {e}", problem.name()))
}

/// Default metric: what the relevant guarantee bounds when a schedule is
/// named, otherwise the strongest metric the problem supports.
pub fn default_metric(schedule: Option<&str>, problem: &MinimaxProblem) -> StationarityMetric {
    match schedule {
        Some("nc-c") | Some("nc-c-stoch") => StationarityMetric::MoreauGradNorm,
        Some("nc-sc") | Some("nc-sc-stoch") => StationarityMetric::MaxGradNorm,
        _ => {
            if problem.constants.strong_concavity > 0.0 {
                StationarityMetric::MaxGradNorm
            } else if problem.best_response_defined() {
                StationarityMetric::MoreauGradNorm
            } else {
                StationarityMetric::GradPairNorm
            }
        }
    }
}

/// Everything `run` resolved from flags and config, ready to execute.
pub struct ResolvedRun {
    pub problem_key: String,
    pub instance: problems::ProblemInstance,
    pub config: SolverConfig,
    pub schedule: Option<String>,
    pub plan: Option<StepsizePlan>,
    pub out_dir: PathBuf,
    pub save_iterates: bool,
}

pub fn resolve(args: &RunArgs) -> Result<ResolvedRun, String> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::empty(),
    };

    let problem_key = args
        .problem
        .clone()
        .or(file.string("problem")?)
        .ok_or("missing --problem")?;
    let sigma = args.sigma.or(file.f64("sigma")?);
    let mut params = args.param.clone();
    if params.is_empty() {
        params = file.string_list("param")?;
    }
    let data = args
        .data
        .clone()
        .or(file.string("data")?.map(PathBuf::from));
    let instance = problems::build(&problem_key, &params, sigma, data.as_deref())?;

    let method = parse_method(
        &args
            .method
            .clone()
            .or(file.string("method")?)
            .unwrap_or_else(|| "alt-gda".into()),
    )?;
    let schedule = args.schedule.clone().or(file.string("schedule")?);
    let epsilon = args.epsilon.or(file.f64("epsilon")?).unwrap_or(0.1);
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(format!("--epsilon must be finite and positive, got {epsilon}"));
    }
    let batch_scale = args.batch_scale.or(file.f64("batch-scale")?).unwrap_or(1.0);

    let plan = match &schedule {
        Some(name) => Some(resolve_schedule(name, &instance.problem, epsilon, batch_scale)?),
        None => None,
    };

    let x0 = match args.x0.clone().map(|s| parse_f64_list(&s)).transpose()? {
        Some(v) => v,
        None => file.point("x0")?.unwrap_or_else(|| instance.x0.clone()),
    };
    let y0 = match args.y0.clone().map(|s| parse_f64_list(&s)).transpose()? {
        Some(v) => v,
        None => file.point("y0")?.unwrap_or_else(|| instance.y0.clone()),
    };

    let metric = match args.metric.clone().or(file.string("metric")?) {
        Some(name) => parse_metric(&name)?,
        None => default_metric(schedule.as_deref(), &instance.problem),
    };

    let eta_x_flag = args.eta_x.or(file.f64("eta-x")?);
    let eta_y_flag = args.eta_y.or(file.f64("eta-y")?);
    if plan.is_none() && (eta_x_flag.is_none() || eta_y_flag.is_none()) {
        return Err("missing stepsizes: pass --eta-x and --eta-y or pick --schedule".into());
    }
    let mut config = SolverConfig::new(method, 0.1, 0.1, x0, y0);
    if let Some(p) = &plan {
        config.apply_plan(p);
    }
    // explicit stepsizes override the schedule
    if let Some(v) = eta_x_flag {
        config.eta_x = v;
    }
    if let Some(v) = eta_y_flag {
        config.eta_y = v;
    }
    if let Some(v) = args.batch.or(file.unsigned("batch")?) {
        config.batch_size = v;
    }
    config.metric = metric;
    config.moreau_lambda = args
        .moreau_lambda
        .or(file.f64("moreau-lambda")?)
        .or(config.moreau_lambda);
    config.max_iters = args
        .max_iters
        .or(file.unsigned("max-iters")?.map(|v| v as usize))
        .unwrap_or(1000);
    config.stop_tolerance = args.tol.or(file.f64("tol")?).unwrap_or(0.0);
    config.check_every = args
        .check_every
        .or(file.unsigned("check-every")?.map(|v| v as usize))
        .unwrap_or(1);
    config.trace_every = args
        .trace_every
        .or(file.unsigned("trace-every")?.map(|v| v as usize))
        .unwrap_or(1);
    config.gdmax_inner_steps = args
        .gdmax_steps
        .or(file.unsigned("gdmax-steps")?.map(|v| v as usize))
        .unwrap_or(10);
    config.seed = args.seed.or(file.unsigned("seed")?).unwrap_or(0);
    config.run_id = args.run_id.or(file.unsigned("run-id")?).unwrap_or(0);
    config.diagnostics = args.diagnostics || file.boolean("diagnostics")?;
    let save_iterates = args.save_iterates || file.boolean("save-iterates")?;
    config.keep_iterates = save_iterates;

    let out_dir = args
        .out
        .clone()
        .or(file.string("out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(ResolvedRun {
        problem_key,
        instance,
        config,
        schedule,
        plan,
        out_dir,
        save_iterates,
    })
}

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.iteration,
            fmt_f64(r.residual),
            fmt_f64(r.delta_gap),
            fmt_f64(r.delta_dist),
            fmt_f64(r.psi),
            fmt_f64(r.objective),
            r.calls_x,
            r.calls_y
        ));
    }
    out
}

fn iterates_csv(trace: &[TraceRecord], dim_x: usize, dim_y: usize) -> String {
    let mut header = String::from("k");
    for i in 0..dim_x {
        header.push_str(&format!(",x{i}"));
    }
    for i in 0..dim_y {
        header.push_str(&format!(",y{i}"));
    }
    let mut out = header;
    out.push('\n');
    for r in trace {
        let (Some(x), Some(y)) = (&r.x, &r.y) else {
            continue;
        };
        out.push_str(&r.iteration.to_string());
        for v in x.iter().chain(y) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn metadata_json(
    resolved: &ResolvedRun,
    result: &RunResult,
    final_residual: f64,
    wall_seconds: f64,
) -> Value {
    let cfg = &resolved.config;
    json!({
        "command": "run",
        "problem": resolved.problem_key,
        "problem_name": resolved.instance.problem.name(),
        "method": cfg.method,
        "schedule": resolved.schedule,
        "schedule_plan": resolved.plan,
        "eta_x": cfg.eta_x,
        "eta_y": cfg.eta_y,
        "batch_size": cfg.batch_size,
        "gdmax_inner_steps": cfg.gdmax_inner_steps,
        "sigma": resolved.instance.problem.constants.noise_std,
        "seed": cfg.seed,
        "run_id": cfg.run_id,
        "metric": cfg.metric,
        "moreau_lambda": cfg.moreau_lambda,
        "stop_tolerance": cfg.stop_tolerance,
        "max_iters": cfg.max_iters,
        "check_every": cfg.check_every,
        "trace_every": cfg.trace_every,
        "diagnostics": cfg.diagnostics,
        "x0": cfg.x0,
        "y0": cfg.y0,
        "termination": result.reason,
        "iterations": result.final_state.iteration,
        "calls_x": result.final_state.calls_x,
        "calls_y": result.final_state.calls_y,
        "final_residual": final_residual,
        "report": result.report,
        "wall_time_seconds": wall_seconds,
    })
}

pub fn execute(args: &RunArgs) -> Result<(), String> {
    let resolved = resolve(args)?;
    let started = Instant::now();
    let result = run(&resolved.instance.problem, &resolved.config).map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64();

    let final_residual = result
        .report
        .as_ref()
        .map(|r| r.value)
        .or_else(|| {
            result
                .trace
                .iter()
                .rev()
                .map(|r| r.residual)
                .find(|v| v.is_finite())
        })
        .unwrap_or(f64::NAN);

    fs::create_dir_all(&resolved.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", resolved.out_dir.display()))?;
    let trace_path = resolved.out_dir.join("trace.csv");
    fs::write(&trace_path, trace_csv(&result.trace))
        .map_err(|e| format!("cannot write {}: {e}", trace_path.display()))?;
    let meta_path = resolved.out_dir.join("run.json");
    let meta = metadata_json(&resolved, &result, final_residual, wall);
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("serializable metadata"),
    )
    .map_err(|e| format!("cannot write {}: {e}", meta_path.display()))?;
    if resolved.save_iterates {
        let p = resolved.instance.problem.dim_x();
        let q = resolved.instance.problem.dim_y();
        let path = resolved.out_dir.join("iterates.csv");
        fs::write(&path, iterates_csv(&result.trace, p, q))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    println!(
        "final residual {:.6e} after {} iterations ({} oracle calls, reason: {})",
        final_residual,
        result.final_state.iteration,
        result.final_state.total_calls(),
        result.reason
    );
    Ok(())
}
