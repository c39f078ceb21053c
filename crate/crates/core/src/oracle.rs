//! Gradient oracles: exact evaluation and seeded stochastic perturbation.
//!
//! The stochastic oracle adds isotropic Gaussian noise with a fixed total
//! variance: a noise vector in dimension `d` has per-coordinate standard
//! deviation `noise_std / sqrt(d)`, so `E ||noise||^2 = noise_std^2`
//! regardless of dimension. Every draw is generated from a counter-based
//! stream keyed by `(seed, run_id, draw_index)`, which makes sampling
//! reproducible independent of thread scheduling: a run re-executed with the
//! same identity consumes the identical noise sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::problem::MinimaxProblem;

/// Which partial gradient a sample refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// First-order oracle abstraction consumed by the solver steps. The
/// `samples_per_call` factor is what each returned gradient costs in
/// oracle-call accounting (the minibatch size for stochastic oracles).
pub trait GradientOracle {
    fn grad_x(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn grad_y(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn samples_per_call(&self) -> u64;
}

/// Exact deterministic oracle; every call costs one oracle call.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactOracle;

impl GradientOracle for ExactOracle {
    fn grad_x(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        problem.grad_x(x, y)
    }

    fn grad_y(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        problem.grad_y(x, y)
    }

    fn samples_per_call(&self) -> u64 {
        1
    }
}

/// Domain separator so noise streams never collide with other consumers of
/// the same seed.
const STREAM_TAG: [u8; 8] = *b"gradnois";

/// Seeded stochastic gradient oracle with counter-based streams.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    noise_std: f64,
    seed: u64,
    run_id: u64,
    batch_size: u64,
    draws: u64,
}

impl StochasticOracle {
    /// Creates an oracle for the given stream identity. `batch_size` is the
    /// minibatch the `GradientOracle` interface averages per call.
    ///
    /// Panics on negative or nonfinite `noise_std` or zero `batch_size`.
    pub fn new(noise_std: f64, seed: u64, run_id: u64, batch_size: u64) -> Self {
        assert!(
            noise_std.is_finite() && noise_std >= 0.0,
            "noise_std must be finite and nonnegative, got {noise_std}"
        );
        assert!(batch_size >= 1, "batch_size must be at least 1");
        StochasticOracle {
            noise_std,
            seed,
            run_id,
            batch_size,
            draws: 0,
        }
    }

    /// Number of noise draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// One stochastic sample of the x-gradient (a single draw).
    pub fn sample_grad_x(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.sample(problem, x, y, Axis::X)
    }

    /// One stochastic sample of the y-gradient (a single draw).
    pub fn sample_grad_y(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.sample(problem, x, y, Axis::Y)
    }

    /// Average of `batch` fresh samples; the noise variance shrinks to
    /// `noise_std^2 / batch`. Panics if `batch` is zero.
    pub fn minibatch_grad(
        &mut self,
        problem: &MinimaxProblem,
        x: &[f64],
        y: &[f64],
        batch: u64,
        axis: Axis,
    ) -> Vec<f64> {
        assert!(batch >= 1, "minibatch size must be at least 1");
        let mut acc = self.sample(problem, x, y, axis);
        for _ in 1..batch {
            let s = self.sample(problem, x, y, axis);
            for (a, b) in acc.iter_mut().zip(&s) {
                *a += b;
            }
        }
        if batch > 1 {
            let inv = 1.0 / batch as f64;
            for a in &mut acc {
                *a *= inv;
            }
        }
        acc
    }

    fn sample(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64], axis: Axis) -> Vec<f64> {
        let mut g = match axis {
            Axis::X => problem.grad_x(x, y),
            Axis::Y => problem.grad_y(x, y),
        };
        // a zero-noise oracle is the exact oracle, bit for bit
        if self.noise_std == 0.0 {
            return g;
        }
        let draw = self.draws;
        self.draws += 1;
        let mut rng = self.stream(draw);
        let scale = self.noise_std / (g.len() as f64).sqrt();
        for gi in &mut g {
            let n: f64 = rng.sample(StandardNormal);
            *gi += scale * n;
        }
        g
    }

    fn stream(&self, draw: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.run_id.to_le_bytes());
        key[16..24].copy_from_slice(&draw.to_le_bytes());
        key[24..32].copy_from_slice(&STREAM_TAG);
        ChaCha8Rng::from_seed(key)
    }
}

impl GradientOracle for StochasticOracle {
    fn grad_x(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        let batch = self.batch_size;
        self.minibatch_grad(problem, x, y, batch, Axis::X)
    }

    fn grad_y(&mut self, problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
        let batch = self.batch_size;
        self.minibatch_grad(problem, x, y, batch, Axis::Y)
    }

    fn samples_per_call(&self) -> u64 {
        self.batch_size
    }
}
