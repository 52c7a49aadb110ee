//! Brute-force reference computations for the test suites.
//!
//! Nothing here depends on `recon-core`: every routine works on plain slices
//! and uses either dense linear algebra (nalgebra) or elementary numerics
//! (bisection, finite differences, smoothed projected gradient), so the
//! checks stay independent of the implementation they verify.

use nalgebra::{DMatrix, DVector};

/// Largest singular value of a row-major `rows x cols` matrix.
pub fn largest_singular_value(rows: usize, cols: usize, data: &[f64]) -> f64 {
    let m = DMatrix::from_row_slice(rows, cols, data);
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Minimum-norm least-squares solution of `A x = b` for row-major `A`.
pub fn least_squares(rows: usize, cols: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(rows, cols, a);
    let rhs = DVector::from_column_slice(b);
    let svd = m.svd(true, true);
    svd.solve(&rhs, 1e-14).expect("svd solve").iter().copied().collect()
}

/// Solves `A x = b` for square row-major `A`.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let rhs = DVector::from_column_slice(b);
    m.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

/// Root of a nondecreasing function on `[lo, hi]`, bisected until the
/// bracket stops shrinking.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "root not bracketed");
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `argmin_u 1/2 (u - z)^2 + sigma f*(u)` for the scalar
/// `f(v) = (v + eta) - y + y log(y / (v + eta))`, whose conjugate is
/// `f*(u) = -eta u - y log(1 - u)` on `u < 1` (`u <= 1` when `y = 0`).
/// Solved by bisection on the optimality condition.
pub fn kl_conjugate_prox(z: f64, sigma: f64, y: f64, eta: f64) -> f64 {
    let shifted = z + sigma * eta;
    if y == 0.0 {
        return shifted.min(1.0);
    }
    let dphi = |u: f64| u - shifted + sigma * y / (1.0 - u);
    let lo = shifted.min(0.0) - sigma * y - 1.0;
    // walk towards 1 until the derivative turns positive
    let mut gap = 1.0;
    while dphi(1.0 - gap) < 0.0 {
        gap *= 0.5;
    }
    bisect(dphi, lo, 1.0 - gap)
}

/// `argmin_v 1/2 (v - w)^2 + tau f(v)` for the same scalar KL term,
/// restricted to `v + eta > 0` (`>= 0` when `y = 0`).
pub fn kl_prox(w: f64, tau: f64, y: f64, eta: f64) -> f64 {
    if y == 0.0 {
        return (w - tau).max(-eta);
    }
    let dphi = |v: f64| v - w + tau * (1.0 - y / (v + eta));
    let hi = w.max(-eta) + y * tau + 1.0;
    let mut gap = 1.0;
    while dphi(-eta + gap) > 0.0 {
        gap *= 0.5;
    }
    bisect(dphi, -eta + gap, hi)
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Forward differences with Neumann boundary, row-major.
fn differences(rows: usize, cols: usize, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dv = vec![0.0; u.len()];
    let mut dh = vec![0.0; u.len()];
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if r + 1 < rows {
                dv[i] = u[i + cols] - u[i];
            }
            if c + 1 < cols {
                dh[i] = u[i + 1] - u[i];
            }
        }
    }
    (dv, dh)
}

/// Isotropic TV with Neumann boundary.
pub fn total_variation(rows: usize, cols: usize, u: &[f64]) -> f64 {
    let (dv, dh) = differences(rows, cols, u);
    dv.iter().zip(&dh).map(|(a, b)| (a * a + b * b).sqrt()).sum()
}

/// `argmin_u 1/2 |u - b|^2 + lambda TV(u)` (optionally over `u >= 0`).
///
/// Projected accelerated gradient with adaptive restart on the smoothed
/// objective `sum sqrt(|Du|^2 + eps^2)`, continued from `eps = 1e-1` down to
/// `eps = 1e-8`; each stage runs to gradient-mapping norm `1e-11`.
pub fn tv_prox(rows: usize, cols: usize, b: &[f64], lambda: f64, nonneg: bool) -> Vec<f64> {
    let n = b.len();
    let project = |u: &mut [f64]| {
        if nonneg {
            u.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    };
    let mut x = b.to_vec();
    project(&mut x);
    if lambda == 0.0 {
        return x;
    }
    let mut eps = 1e-1;
    while eps >= 1e-8 * 0.999 {
        let lip = 1.0 + 8.0 * lambda / eps;
        let grad = |u: &[f64]| -> Vec<f64> {
            let (dv, dh) = differences(rows, cols, u);
            let mut pv = vec![0.0; n];
            let mut ph = vec![0.0; n];
            for i in 0..n {
                let m = (dv[i] * dv[i] + dh[i] * dh[i] + eps * eps).sqrt();
                pv[i] = dv[i] / m;
                ph[i] = dh[i] / m;
            }
            let mut g: Vec<f64> = u.iter().zip(b).map(|(a, c)| a - c).collect();
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    let mut acc = 0.0;
                    if r + 1 < rows {
                        acc -= pv[i];
                    }
                    if r > 0 {
                        acc += pv[i - cols];
                    }
                    if c + 1 < cols {
                        acc -= ph[i];
                    }
                    if c > 0 {
                        acc += ph[i - 1];
                    }
                    g[i] += lambda * acc;
                }
            }
            g
        };
        let mut z = x.clone();
        let mut t: f64 = 1.0;
        for _ in 0..5_000_000 {
            let g = grad(&z);
            let mut next: Vec<f64> = z.iter().zip(&g).map(|(a, d)| a - d / lip).collect();
            project(&mut next);
            let mapping: f64 = z.iter().zip(&next).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() * lip;
            // restart when momentum points uphill
            let uphill: f64 = g.iter().zip(next.iter().zip(&x)).map(|(d, (a, c))| d * (a - c)).sum();
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
            t = if uphill > 0.0 { 1.0 } else { t_next };
            z = next.iter().zip(&x).map(|(a, c)| a + beta * (a - c)).collect();
            x = next;
            if mapping <= 1e-11 {
                break;
            }
        }
        eps *= 0.1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_diagonal() {
        assert!((largest_singular_value(2, 2, &[3.0, 0.0, 0.0, -5.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_prox_known_points() {
        assert!(kl_conjugate_prox(1.0, 1.0, 1.0, 0.0).abs() < 1e-12);
        assert!((kl_conjugate_prox(0.0, 1.0, 1.0, 0.0) - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(kl_conjugate_prox(3.0, 1.0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn tv_prox_flattens_a_step_for_large_lambda() {
        let u = tv_prox(2, 2, &[0.0, 2.0, 0.0, 2.0], 10.0, true);
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-6), "{u:?}");
    }

    #[test]
    fn tv_prox_small_lambda_shrinks_the_step() {
        // 1x2 signal [0, 2]: solution [lambda, 2 - lambda] for lambda < 1
        let u = tv_prox(1, 2, &[0.0, 2.0], 0.25, false);
        assert!((u[0] - 0.25).abs() < 1e-6 && (u[1] - 1.75).abs() < 1e-6, "{u:?}");
    }
}
