//! Slow, independent reference implementations used to cross-check the
//! analytic gradients and projections: central finite differences and a
//! brute-force simplex projector. These are for verification and small
//! dimensions only, not for use inside solvers.

use crate::vecmath::norm;

/// Central-difference gradient of a scalar function, with a step scaled by
/// the point's magnitude: `h = 1e-5 * (1 + ||x||)`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-5 * (1.0 + norm(x));
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

/// Exact Euclidean projection onto the probability simplex by enumerating
/// candidate supports. The projection is the unique feasible candidate at
/// minimal distance; every support yields at most one candidate, so trying
/// all `2^n - 1` of them finds it. Intended for `n <= 8`.
pub fn brute_force_simplex_qp(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 1, "projection needs at least one coordinate");
    assert!(n <= 20, "support enumeration is exponential; keep n small");
    assert!(v.iter().all(|c| c.is_finite()), "coordinates must be finite");

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        // on the support, the KKT system gives z_i = v_i + shift with the
        // shift chosen so the coordinates sum to one
        let sum: f64 = support.iter().map(|&i| v[i]).sum();
        let shift = (1.0 - sum) / support.len() as f64;
        let mut z = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            z[i] = v[i] + shift;
            if z[i] < 0.0 {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let dist: f64 = z.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(d, _)| dist < *d) {
            best = Some((dist, z));
        }
    }
    best.expect("some singleton support is always feasible").1
}
