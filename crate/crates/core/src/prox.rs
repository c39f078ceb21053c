//! Proximal maps and projections for the regularizers used by the solvers.
//!
//! Every supported regularizer is proper closed convex with a closed-form
//! prox, so solver steps never need an inner iterative subproblem. A
//! `ProxMap` bundles the prox operator with the regularizer's extended-real
//! value, which objective evaluations need.

use crate::vecmath::norm;

/// Tolerance used when evaluating indicator functions at points produced by
/// floating-point projections.
const FEASIBILITY_TOL: f64 = 1e-9;

/// A proper closed convex regularizer with closed-form prox.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxMap {
    /// Identically zero; prox is the identity.
    Zero,
    /// Indicator of the box `[lower, upper]` (componentwise); prox clamps.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Indicator of the Euclidean ball of the given radius; prox rescales.
    L2Ball { radius: f64 },
    /// Indicator of the probability simplex; prox is Euclidean projection.
    Simplex,
    /// `weight * ||v||_1`; prox is soft thresholding.
    L1 { weight: f64 },
    /// `(weight / 2) * ||v||^2`; prox shrinks by `1 / (1 + step * weight)`.
    Quadratic { weight: f64 },
}

impl ProxMap {
    /// Evaluates `argmin_z r(z) + ||z - point||^2 / (2 * step)`.
    ///
    /// Panics if `step` is not finite and positive, or if `point` has the
    /// wrong dimension for a box map.
    pub fn prox(&self, point: &[f64], step: f64) -> Vec<f64> {
        assert!(
            step.is_finite() && step > 0.0,
            "prox: step must be finite and positive, got {step}"
        );
        match self {
            ProxMap::Zero => point.to_vec(),
            ProxMap::Box { lower, upper } => project_box(point, lower, upper),
            ProxMap::L2Ball { radius } => {
                let n = norm(point);
                if n <= *radius {
                    point.to_vec()
                } else {
                    point.iter().map(|v| v * radius / n).collect()
                }
            }
            ProxMap::Simplex => project_simplex(point),
            ProxMap::L1 { weight } => {
                let t = weight * step;
                point
                    .iter()
                    .map(|v| v.signum() * (v.abs() - t).max(0.0))
                    .collect()
            }
            ProxMap::Quadratic { weight } => {
                let shrink = 1.0 / (1.0 + step * weight);
                point.iter().map(|v| v * shrink).collect()
            }
        }
    }

    /// Extended-real value of the regularizer at `point`.
    ///
    /// Indicator values use a small feasibility tolerance so that points
    /// produced by the corresponding projection always evaluate to zero.
    pub fn value(&self, point: &[f64]) -> f64 {
        match self {
            ProxMap::Zero => 0.0,
            ProxMap::Box { lower, upper } => {
                let inside = point
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (lo, hi))| *v >= lo - FEASIBILITY_TOL && *v <= hi + FEASIBILITY_TOL);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxMap::L2Ball { radius } => {
                if norm(point) <= radius + FEASIBILITY_TOL * radius.max(1.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxMap::Simplex => {
                let sum: f64 = point.iter().sum();
                let feasible = point.iter().all(|v| *v >= -FEASIBILITY_TOL)
                    && (sum - 1.0).abs() <= FEASIBILITY_TOL;
                if feasible {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxMap::L1 { weight } => weight * point.iter().map(|v| v.abs()).sum::<f64>(),
            ProxMap::Quadratic { weight } => {
                0.5 * weight * point.iter().map(|v| v * v).sum::<f64>()
            }
        }
    }

    /// A point with zero regularizer value, used to start inner ascent.
    pub fn feasible_point(&self, dim: usize) -> Vec<f64> {
        match self {
            ProxMap::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| 0.0f64.clamp(*lo, *hi))
                .collect(),
            ProxMap::Simplex => vec![1.0 / dim as f64; dim],
            _ => vec![0.0; dim],
        }
    }

    /// Strong-convexity modulus contributed by the regularizer (zero for
    /// all indicator and l1 maps).
    pub fn convexity_modulus(&self) -> f64 {
        match self {
            ProxMap::Quadratic { weight } => *weight,
            _ => 0.0,
        }
    }
}

/// Euclidean projection onto the probability simplex.
///
/// Sorted cumulative-sum rule: with entries sorted in decreasing order, the
/// threshold is `(sum of the largest j entries - 1) / j` for the largest `j`
/// keeping every kept entry positive. Ties sort equal and receive equal
/// output, so the result is deterministic for equal inputs. Output entries
/// are nonnegative and sum to 1 within 1e-12 for inputs of moderate size.
pub fn project_simplex(point: &[f64]) -> Vec<f64> {
    assert!(!point.is_empty(), "project_simplex: empty input");
    let mut sorted = point.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("project_simplex: NaN input"));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    point.iter().map(|v| (v - threshold).max(0.0)).collect()
}

/// Componentwise clamp onto the box `[lower, upper]`.
///
/// Panics if the bounds disagree in length with the point or if any
/// `lower[i] > upper[i]`.
pub fn project_box(point: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    assert_eq!(point.len(), lower.len(), "project_box: length mismatch");
    assert_eq!(point.len(), upper.len(), "project_box: length mismatch");
    point
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (lo, hi))| {
            assert!(lo <= hi, "project_box: lower bound {lo} above upper bound {hi}");
            v.clamp(*lo, *hi)
        })
        .collect()
}
