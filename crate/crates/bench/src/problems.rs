//! Problem registry for the CLI: builds the built-in instances by key,
//! applies `--param` overrides, ingests external datasets, and supplies
//! canonical starting points.

use std::collections::BTreeMap;
use std::path::Path;

use minimax_core::{
    bilinear_problem, dro_logistic_problem, fair_learning_problem, fair_ripple_classes,
    toy_problem, MinimaxProblem,
};

pub const PROBLEM_KEYS: &[&str] = &["toy", "bilinear", "dro-logistic", "fair"];

/// A constructed problem with its canonical starting pair.
pub struct ProblemInstance {
    pub problem: MinimaxProblem,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
}

fn parse_params(params: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| format!("--param needs key=value, got {p:?}"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|e| format!("--param {k}: bad value {v:?}: {e}"))?;
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}

fn take(map: &mut BTreeMap<String, f64>, key: &str) -> Option<f64> {
    map.remove(key)
}

fn reject_leftovers(map: &BTreeMap<String, f64>, key: &str) -> Result<(), String> {
    if let Some(unknown) = map.keys().next() {
        return Err(format!("problem {key} does not take --param {unknown}"));
    }
    Ok(())
}

/// Built-in dataset for the distributionally robust instance when no
/// `--data` file is given: three examples, two features.
fn builtin_dro_data() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        vec![vec![1.0, 0.5], vec![-0.5, 1.0], vec![0.25, -1.0]],
        vec![1.0, -1.0, 1.0],
    )
}

/// Reads a dataset CSV: each row is the feature columns followed by a
/// label column that must be -1 or 1. No header row.
pub fn load_dataset(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>), String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("row {i}: {e}"))?;
        if record.len() < 2 {
            return Err(format!("row {i}: need at least one feature and a label"));
        }
        let mut row = Vec::with_capacity(record.len() - 1);
        for field in record.iter().take(record.len() - 1) {
            row.push(
                field
                    .parse::<f64>()
                    .map_err(|e| format!("row {i}: bad feature {field:?}: {e}"))?,
            );
        }
        let label: f64 = record[record.len() - 1]
            .parse()
            .map_err(|e| format!("row {i}: bad label: {e}"))?;
        features.push(row);
        labels.push(label);
    }
    if features.is_empty() {
        return Err("dataset is empty".into());
    }
    Ok((features, labels))
}

/// Builds a problem instance by key. `sigma` overrides the oracle noise
/// level; `data` supplies an external dataset for `dro-logistic`.
pub fn build(
    key: &str,
    params: &[String],
    sigma: Option<f64>,
    data: Option<&Path>,
) -> Result<ProblemInstance, String> {
    let mut map = parse_params(params)?;
    if data.is_some() && key != "dro-logistic" {
        return Err(format!("--data only applies to dro-logistic, not {key}"));
    }
    let mut instance = match key {
        "toy" => {
            reject_leftovers(&map, key)?;
            ProblemInstance {
                problem: toy_problem(),
                x0: vec![1.0],
                y0: vec![-0.4],
            }
        }
        "bilinear" => {
            let scale = take(&mut map, "scale").unwrap_or(1.0);
            reject_leftovers(&map, key)?;
            ProblemInstance {
                problem: bilinear_problem(scale).map_err(|e| e.to_string())?,
                x0: vec![1.0],
                y0: vec![1.0],
            }
        }
        "dro-logistic" => {
            let gamma = take(&mut map, "gamma").unwrap_or(5.0);
            reject_leftovers(&map, key)?;
            let (features, labels) = match data {
                Some(path) => load_dataset(path)?,
                None => builtin_dro_data(),
            };
            let problem =
                dro_logistic_problem(&features, &labels, gamma).map_err(|e| e.to_string())?;
            if problem.constants.strong_concavity == 0.0 {
                eprintln!(
                    "warning: dro-logistic with gamma = {gamma} cannot certify strong \
                     concavity over the operating region; strongly concave schedules and \
                     metrics will refuse this instance"
                );
            }
            let x0 = vec![0.0; problem.dim_x()];
            let y0: Vec<f64> = features.concat();
            ProblemInstance { problem, x0, y0 }
        }
        "fair" => {
            let classes = take(&mut map, "classes").unwrap_or(3.0);
            reject_leftovers(&map, key)?;
            if classes < 2.0 || classes.fract() != 0.0 || classes > 64.0 {
                return Err(format!(
                    "fair: classes must be an integer in [2, 64], got {classes}"
                ));
            }
            let n = classes as usize;
            let problem = fair_learning_problem(fair_ripple_classes(n), 2)
                .map_err(|e| e.to_string())?;
            ProblemInstance {
                problem,
                x0: vec![0.0, 0.0],
                y0: vec![1.0 / n as f64; n],
            }
        }
        other => {
            return Err(format!(
                "unknown problem {other:?}; available: {}",
                PROBLEM_KEYS.join(", ")
            ))
        }
    };
    if let Some(s) = sigma {
        if !(s.is_finite() && s >= 0.0) {
            return Err(format!("--sigma must be finite and nonnegative, got {s}"));
        }
        instance.problem.constants.noise_std = s;
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_key_with_defaults() {
        for key in PROBLEM_KEYS {
            let inst = build(key, &[], None, None).unwrap();
            assert_eq!(inst.x0.len(), inst.problem.dim_x());
            assert_eq!(inst.y0.len(), inst.problem.dim_y());
        }
    }

    #[test]
    fn rejects_unknown_key_and_param() {
        assert!(build("mystery", &[], None, None).is_err());
        assert!(build("toy", &["scale=2".into()], None, None).is_err());
        assert!(build("bilinear", &["scale".into()], None, None).is_err());
    }

    #[test]
    fn sigma_override_lands_in_constants() {
        let inst = build("toy", &[], Some(0.3), None).unwrap();
        assert_eq!(inst.problem.constants.noise_std, 0.3);
        assert!(build("toy", &[], Some(-1.0), None).is_err());
    }

    #[test]
    fn bilinear_scale_param() {
        let inst = build("bilinear", &["scale=2.5".into()], None, None).unwrap();
        assert_eq!(inst.problem.constants.gradient_smoothness, 2.5);
    }
}
