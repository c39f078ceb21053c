//! Composite minimax problem model.
//!
//! A problem is `min_x max_y f(x) + Phi(x, y) - h(y)` where `Phi` is smooth
//! in both arguments, concave (possibly strongly concave) in `y`, and weakly
//! convex in `x`; `f` and `h` are proper closed convex regularizers with
//! closed-form prox. The struct carries first-order oracles for `Phi`
//! together with the regularity constants the stepsize schedules and
//! stationarity measures consume. Unknown or unbounded constants use the
//! `f64::INFINITY` sentinel; consumers that need a finite value refuse it
//! explicitly rather than guessing.

use std::sync::Arc;

use crate::error::{MinimaxError, Result};
use crate::prox::ProxMap;
use crate::vecmath::norm;

type ValueFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Regularity constants describing a problem instance.
///
/// All constants are nonnegative; `f64::INFINITY` marks a bound that does
/// not exist (unbounded domain, non-Lipschitz coupling). Constants for the
/// built-in factories are certified over a documented operating region, not
/// over all of space, and the factory docs state that region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    /// Uniform Lipschitz bound of `Phi(., y)` over the second player's
    /// domain; infinite when no uniform bound exists.
    pub lipschitz_x: f64,
    /// Lipschitz bound of the x-regularizer `f` on its domain.
    pub lipschitz_reg_x: f64,
    /// Lipschitz constant of the joint gradient of `Phi`.
    pub gradient_smoothness: f64,
    /// Weak-convexity modulus of `Phi(., y)`: adding this much quadratic
    /// makes it convex. Zero means convex.
    pub weak_convexity: f64,
    /// Strong-concavity modulus of `Phi(x, .) `; zero means merely concave.
    pub strong_concavity: f64,
    /// Diameter of the second player's effective domain (dom h).
    pub y_domain_diameter: f64,
    /// Standard deviation of the stochastic gradient oracle; zero when the
    /// oracle is exact. This is the total per-call deviation: noise vectors
    /// satisfy `E ||noise||^2 = noise_std^2`.
    pub noise_std: f64,
}

impl ProblemConstants {
    /// Condition number `max(gradient_smoothness / strong_concavity, 1)`,
    /// defined only for strongly concave problems.
    pub fn condition_number(&self) -> Option<f64> {
        if self.strong_concavity > 0.0 {
            Some((self.gradient_smoothness / self.strong_concavity).max(1.0))
        } else {
            None
        }
    }

    fn assert_valid(&self) {
        assert!(
            self.gradient_smoothness.is_finite() && self.gradient_smoothness > 0.0,
            "gradient_smoothness must be finite and positive"
        );
        for (name, v) in [
            ("lipschitz_x", self.lipschitz_x),
            ("lipschitz_reg_x", self.lipschitz_reg_x),
            ("weak_convexity", self.weak_convexity),
            ("strong_concavity", self.strong_concavity),
            ("y_domain_diameter", self.y_domain_diameter),
            ("noise_std", self.noise_std),
        ] {
            assert!(!v.is_nan() && v >= 0.0, "{name} must be nonnegative, got {v}");
        }
    }
}

/// A composite minimax problem with first-order oracles.
///
/// Oracles are pure functions of their arguments, so a problem can be
/// evaluated concurrently from several threads.
pub struct MinimaxProblem {
    name: String,
    dim_x: usize,
    dim_y: usize,
    /// Regularity constants; `noise_std` may be adjusted after construction
    /// to run the same instance with a stochastic oracle.
    pub constants: ProblemConstants,
    coupling: ValueFn,
    grad_x: GradFn,
    grad_y: GradFn,
    reg_x: ProxMap,
    reg_y: ProxMap,
}

impl MinimaxProblem {
    /// Assembles a problem from oracles and constants. Panics on empty
    /// dimensions or invalid constants; oracle consistency is the caller's
    /// responsibility (the `reference` module has finite-difference checks).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim_x: usize,
        dim_y: usize,
        constants: ProblemConstants,
        coupling: ValueFn,
        grad_x: GradFn,
        grad_y: GradFn,
        reg_x: ProxMap,
        reg_y: ProxMap,
    ) -> Self {
        assert!(dim_x >= 1 && dim_y >= 1, "dimensions must be positive");
        constants.assert_valid();
        MinimaxProblem {
            name: name.into(),
            dim_x,
            dim_y,
            constants,
            coupling,
            grad_x,
            grad_y,
            reg_x,
            reg_y,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    /// Smooth coupling value `Phi(x, y)`.
    pub fn coupling_value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.check_dims(x, y);
        (self.coupling)(x, y)
    }

    /// Exact partial gradient of `Phi` in the first argument.
    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.check_dims(x, y);
        (self.grad_x)(x, y)
    }

    /// Exact partial gradient of `Phi` in the second argument.
    pub fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.check_dims(x, y);
        (self.grad_y)(x, y)
    }

    /// Extended-real value of the x-regularizer `f`.
    pub fn reg_x_value(&self, x: &[f64]) -> f64 {
        self.reg_x.value(x)
    }

    /// Extended-real value of the y-regularizer `h`.
    pub fn reg_y_value(&self, y: &[f64]) -> f64 {
        self.reg_y.value(y)
    }

    /// Prox of the x-regularizer.
    pub fn prox_x(&self, point: &[f64], step: f64) -> Vec<f64> {
        self.reg_x.prox(point, step)
    }

    /// Prox of the y-regularizer.
    pub fn prox_y(&self, point: &[f64], step: f64) -> Vec<f64> {
        self.reg_y.prox(point, step)
    }

    pub fn reg_x(&self) -> &ProxMap {
        &self.reg_x
    }

    pub fn reg_y(&self) -> &ProxMap {
        &self.reg_y
    }

    /// Full saddle objective `f(x) + Phi(x, y) - h(y)`.
    pub fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        self.reg_x_value(x) + self.coupling_value(x, y) - self.reg_y_value(y)
    }

    /// True when a maximizer of `Phi(x, .) - h` is guaranteed to exist:
    /// either strong concavity or a bounded second-player domain.
    pub fn best_response_defined(&self) -> bool {
        self.constants.strong_concavity > 0.0 || self.constants.y_domain_diameter.is_finite()
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) {
        assert_eq!(x.len(), self.dim_x, "x has wrong dimension");
        assert_eq!(y.len(), self.dim_y, "y has wrong dimension");
    }
}

/// Two-dimensional saddle `Phi(x, y) = -x^2/4 + x*y - y^2/2` with no
/// regularizers.
///
/// The induced max function is `x^2/4` with maximizer `y*(x) = x`, which
/// makes every quantity in the crate checkable in closed form. The coupling
/// Hessian is constant, so the smoothness constant is its spectral norm
/// `(3 + sqrt(17)) / 4`; the coupling is 1/2-weakly convex in `x` and
/// 1-strongly concave in `y`. No uniform Lipschitz bound in `x` exists, so
/// `lipschitz_x` is infinite.
pub fn toy_problem() -> MinimaxProblem {
    let constants = ProblemConstants {
        lipschitz_x: f64::INFINITY,
        lipschitz_reg_x: 0.0,
        gradient_smoothness: (3.0 + 17f64.sqrt()) / 4.0,
        weak_convexity: 0.5,
        strong_concavity: 1.0,
        y_domain_diameter: f64::INFINITY,
        noise_std: 0.0,
    };
    MinimaxProblem::new(
        "toy",
        1,
        1,
        constants,
        Box::new(|x, y| -x[0] * x[0] / 4.0 + x[0] * y[0] - y[0] * y[0] / 2.0),
        Box::new(|x, y| vec![-x[0] / 2.0 + y[0]]),
        Box::new(|x, y| vec![x[0] - y[0]]),
        ProxMap::Zero,
        ProxMap::Zero,
    )
}

/// Unregularized bilinear saddle `Phi(x, y) = scale * x * y`.
///
/// Merely concave with an unbounded second player, so the max function is
/// infinite everywhere and no best-response-based measure applies; the pair
/// gradient norm is the usable residual. The problem exists to separate
/// methods: simultaneous gradient steps spiral outward, alternating steps
/// orbit, extragradient contracts.
pub fn bilinear_problem(scale: f64) -> Result<MinimaxProblem> {
    if !scale.is_finite() || scale == 0.0 {
        return Err(MinimaxError::Invalid(format!(
            "bilinear scale must be finite and nonzero, got {scale}"
        )));
    }
    let constants = ProblemConstants {
        lipschitz_x: f64::INFINITY,
        lipschitz_reg_x: 0.0,
        gradient_smoothness: scale.abs(),
        weak_convexity: 0.0,
        strong_concavity: 0.0,
        y_domain_diameter: f64::INFINITY,
        noise_std: 0.0,
    };
    Ok(MinimaxProblem::new(
        "bilinear",
        1,
        1,
        constants,
        Box::new(move |x, y| scale * x[0] * y[0]),
        Box::new(move |_x, y| vec![scale * y[0]]),
        Box::new(move |x, _y| vec![scale * x[0]]),
        ProxMap::Zero,
        ProxMap::Zero,
    ))
}

/// Operating radius for the model parameter over which the distributionally
/// robust logistic constants are certified.
pub const DRO_PARAMETER_RADIUS: f64 = 5.0;

fn logistic_loss(margin: f64) -> f64 {
    // log(1 + exp(-margin)) evaluated without overflow
    (-margin).max(0.0) + (-(-margin).abs()).exp().ln_1p()
}

fn logistic_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

struct DroData {
    anchor: Vec<f64>, // flattened clean features, one block per example
    labels: Vec<f64>,
    n: usize,
    p: usize,
    gamma: f64,
}

/// Distributionally robust logistic regression.
///
/// The first player is the model parameter `theta` (dimension `p`); the
/// second player is the flattened perturbed dataset `z` (dimension `n * p`,
/// block `i` holding example `i`). The coupling is
///
/// ```text
/// Phi(theta, z) = (1/n) * sum_i log(1 + exp(-labels[i] * <theta, z_i>))
///                 - gamma * ||z - anchor||^2
/// ```
///
/// so the adversary perturbs each example away from its clean value against
/// a quadratic penalty. Constants are certified over
/// `||theta|| <= DRO_PARAMETER_RADIUS` and the band around the anchor that
/// any ascent on `z` stays inside (best responses displace each block by at
/// most `radius / (2 * gamma * n)`). Strong concavity holds when
/// `2 * gamma` exceeds the per-block loss curvature bound
/// `radius^2 / (4n)`; otherwise `strong_concavity` is set to zero, which
/// flags the instance as uncertified and makes strongly-concave-only
/// schedules refuse it. The parameter player is unpenalized here, so no
/// uniform Lipschitz bound in `theta` exists and `lipschitz_x` is infinite.
pub fn dro_logistic_problem(
    features: &[Vec<f64>],
    labels: &[f64],
    gamma: f64,
) -> Result<MinimaxProblem> {
    if features.is_empty() {
        return Err(MinimaxError::Invalid("dro: empty dataset".into()));
    }
    if features.len() != labels.len() {
        return Err(MinimaxError::Invalid(format!(
            "dro: {} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(MinimaxError::Invalid(format!(
            "dro: gamma must be finite and positive, got {gamma}"
        )));
    }
    let p = features[0].len();
    if p == 0 {
        return Err(MinimaxError::Invalid("dro: empty feature rows".into()));
    }
    let mut anchor = Vec::with_capacity(features.len() * p);
    for (i, row) in features.iter().enumerate() {
        if row.len() != p {
            return Err(MinimaxError::Invalid(format!(
                "dro: row {i} has {} features, expected {p}",
                row.len()
            )));
        }
        if !row.iter().all(|v| v.is_finite()) {
            return Err(MinimaxError::Invalid(format!("dro: row {i} has nonfinite feature")));
        }
        anchor.extend_from_slice(row);
    }
    for (i, b) in labels.iter().enumerate() {
        if *b != 1.0 && *b != -1.0 {
            return Err(MinimaxError::Invalid(format!(
                "dro: label {i} must be -1 or 1, got {b}"
            )));
        }
    }

    let n = features.len();
    let nf = n as f64;
    let radius = DRO_PARAMETER_RADIUS;
    // Ascent iterates stay within this displacement of the anchor per block.
    let band = radius / (2.0 * gamma * nf);
    let block_norms: Vec<f64> = features.iter().map(|row| norm(row)).collect();
    let max_block = block_norms.iter().cloned().fold(0.0, f64::max) + band;
    let mean_block_sq =
        block_norms.iter().map(|b| (b + band) * (b + band)).sum::<f64>() / nf;

    // Joint Hessian blocks over the certified region, combined through the
    // bound ||[[A, B], [B^T, C]]|| <= max(||A||, ||C||) + ||B||.
    let hess_xx = mean_block_sq / 4.0;
    let hess_yy = 2.0 * gamma + radius * radius / (4.0 * nf);
    let hess_cross = (1.0 + max_block * radius / 4.0) / nf.sqrt();
    let smoothness = hess_xx.max(hess_yy) + hess_cross;

    let concavity_margin = 2.0 * gamma - radius * radius / (4.0 * nf);
    let strong_concavity = concavity_margin.max(0.0);

    let constants = ProblemConstants {
        lipschitz_x: f64::INFINITY,
        lipschitz_reg_x: 0.0,
        gradient_smoothness: smoothness,
        weak_convexity: 0.0,
        strong_concavity,
        y_domain_diameter: f64::INFINITY,
        noise_std: 0.0,
    };

    let data = Arc::new(DroData {
        anchor,
        labels: labels.to_vec(),
        n,
        p,
        gamma,
    });

    let d = data.clone();
    let coupling: ValueFn = Box::new(move |theta, z| {
        let mut loss = 0.0;
        let mut penalty = 0.0;
        for i in 0..d.n {
            let zi = &z[i * d.p..(i + 1) * d.p];
            let margin = d.labels[i] * crate::vecmath::dot(theta, zi);
            loss += logistic_loss(margin);
            for j in 0..d.p {
                let dev = zi[j] - d.anchor[i * d.p + j];
                penalty += dev * dev;
            }
        }
        loss / d.n as f64 - d.gamma * penalty
    });

    let d = data.clone();
    let grad_x: GradFn = Box::new(move |theta, z| {
        let mut g = vec![0.0; d.p];
        for i in 0..d.n {
            let zi = &z[i * d.p..(i + 1) * d.p];
            let margin = d.labels[i] * crate::vecmath::dot(theta, zi);
            let w = -d.labels[i] * logistic_sigmoid(-margin);
            for j in 0..d.p {
                g[j] += w * zi[j];
            }
        }
        for gj in &mut g {
            *gj /= d.n as f64;
        }
        g
    });

    let d = data.clone();
    let grad_y: GradFn = Box::new(move |theta, z| {
        let mut g = vec![0.0; d.n * d.p];
        for i in 0..d.n {
            let zi = &z[i * d.p..(i + 1) * d.p];
            let margin = d.labels[i] * crate::vecmath::dot(theta, zi);
            let w = -d.labels[i] * logistic_sigmoid(-margin) / d.n as f64;
            for j in 0..d.p {
                g[i * d.p + j] =
                    w * theta[j] - 2.0 * d.gamma * (zi[j] - d.anchor[i * d.p + j]);
            }
        }
        g
    });

    Ok(MinimaxProblem::new(
        "dro-logistic",
        p,
        n * p,
        constants,
        coupling,
        grad_x,
        grad_y,
        ProxMap::Zero,
        ProxMap::Zero,
    ))
}

/// One class in a fair-learning objective: a smooth loss with certified
/// constants over the operating region.
pub struct ClassLoss {
    pub value: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub gradient: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// Lipschitz constant of the loss gradient.
    pub smoothness: f64,
    /// Bound on the loss gradient norm over the operating region.
    pub gradient_bound: f64,
    /// Weak-convexity modulus of the loss (zero if convex).
    pub weak_convexity: f64,
}

/// Fair learning over class weights: the second player mixes per-class
/// losses over the probability simplex, so the max function is the worst
/// class loss.
///
/// `Phi(theta, t) = sum_i t[i] * loss_i(theta)` with `h` the simplex
/// indicator. The coupling is linear in `t`, hence merely concave; the
/// simplex has diameter `sqrt(2)`. Smoothness combines the worst per-class
/// smoothness (the `tt` block vanishes and the mixed block stacks the class
/// gradients): `max_i smoothness_i + sqrt(sum_i gradient_bound_i^2)`.
pub fn fair_learning_problem(classes: Vec<ClassLoss>, dim: usize) -> Result<MinimaxProblem> {
    let n = classes.len();
    if n < 2 {
        return Err(MinimaxError::Invalid(format!(
            "fair: need at least 2 classes, got {n}"
        )));
    }
    if dim == 0 {
        return Err(MinimaxError::Invalid("fair: dimension must be positive".into()));
    }
    let mut grad_bound_sq = 0.0;
    let mut max_smooth = 0.0f64;
    let mut max_bound = 0.0f64;
    let mut rho = 0.0f64;
    for (i, c) in classes.iter().enumerate() {
        if !(c.smoothness.is_finite() && c.gradient_bound.is_finite()) {
            return Err(MinimaxError::Invalid(format!(
                "fair: class {i} needs finite smoothness and gradient bound"
            )));
        }
        grad_bound_sq += c.gradient_bound * c.gradient_bound;
        max_smooth = max_smooth.max(c.smoothness);
        max_bound = max_bound.max(c.gradient_bound);
        rho = rho.max(c.weak_convexity);
    }
    let constants = ProblemConstants {
        lipschitz_x: max_bound,
        lipschitz_reg_x: 0.0,
        gradient_smoothness: max_smooth + grad_bound_sq.sqrt(),
        weak_convexity: rho,
        strong_concavity: 0.0,
        y_domain_diameter: 2f64.sqrt(),
        noise_std: 0.0,
    };

    let classes = Arc::new(classes);

    let c = classes.clone();
    let coupling: ValueFn = Box::new(move |theta, t| {
        c.iter()
            .zip(t)
            .map(|(class, w)| w * (class.value)(theta))
            .sum()
    });

    let c = classes.clone();
    let grad_x: GradFn = Box::new(move |theta, t| {
        let mut g = vec![0.0; theta.len()];
        for (class, w) in c.iter().zip(t) {
            let gi = (class.gradient)(theta);
            for (a, b) in g.iter_mut().zip(&gi) {
                *a += w * b;
            }
        }
        g
    });

    let c = classes.clone();
    let grad_y: GradFn = Box::new(move |theta, _t| {
        c.iter().map(|class| (class.value)(theta)).collect()
    });

    Ok(MinimaxProblem::new(
        "fair",
        dim,
        n,
        constants,
        coupling,
        grad_x,
        grad_y,
        ProxMap::Zero,
        ProxMap::Simplex,
    ))
}

/// Operating radius for the parameter in the built-in fair instance.
pub const FAIR_PARAMETER_RADIUS: f64 = 10.0;

/// Ripple amplitude in the built-in fair losses; 0.75 makes the Hessian
/// eigenvalues range over `1 +- 1.5 sin`, so each loss is genuinely
/// nonconvex with weak-convexity modulus 1/2.
const FAIR_RIPPLE: f64 = 0.75;

/// Built-in two-dimensional fair instance: rippled quadratic class losses
///
/// ```text
/// loss_i(theta) = 0.5 * ||theta - c_i||^2 + 0.1 * i
///                 + 0.75 * sin(theta_1 + theta_2)
/// ```
///
/// with anchors `c_i` on the unit circle. The offsets break ties so the
/// worst class is unique at generic points; the sine ripple makes every
/// loss weakly convex (modulus 1/2) rather than convex, and being shared
/// across classes it never changes which class is worst. Constants are
/// certified over `||theta|| <= FAIR_PARAMETER_RADIUS`.
pub fn fair_ripple_classes(n_classes: usize) -> Vec<ClassLoss> {
    (0..n_classes)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / n_classes as f64;
            let anchor = [angle.cos(), angle.sin()];
            let offset = 0.1 * i as f64;
            ClassLoss {
                value: Box::new(move |theta: &[f64]| {
                    let dx = theta[0] - anchor[0];
                    let dy = theta[1] - anchor[1];
                    0.5 * (dx * dx + dy * dy) + offset
                        + FAIR_RIPPLE * (theta[0] + theta[1]).sin()
                }),
                gradient: Box::new(move |theta: &[f64]| {
                    let wave = FAIR_RIPPLE * (theta[0] + theta[1]).cos();
                    vec![theta[0] - anchor[0] + wave, theta[1] - anchor[1] + wave]
                }),
                // Hessian is I - 0.75 sin(.) * ones(2, 2): norm at most
                // 1 + 1.5, lowest eigenvalue at least 1 - 1.5
                smoothness: 1.0 + 2.0 * FAIR_RIPPLE,
                gradient_bound: FAIR_PARAMETER_RADIUS + 1.0 + FAIR_RIPPLE * 2f64.sqrt(),
                weak_convexity: 2.0 * FAIR_RIPPLE - 1.0,
            }
        })
        .collect()
}
