//! Box-constrained Nelder–Mead simplex search.
//!
//! Candidate points are projected onto the bounds box before evaluation, so
//! every accepted vertex is feasible. Good enough for the five-parameter
//! square-pulse designs; not intended as a general-purpose optimizer.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop when the vertex objective spread falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iters: 4000, f_tol: 1e-12, x_tol: 1e-10 }
    }
}

pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
}

fn clamp_into(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].max(lo[i]).min(hi[i]);
    }
}

/// Minimize `f` over the box [lo, hi] starting from `x0`.
pub fn minimize_box(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    assert!(n >= 1);
    assert_eq!(lo.len(), n);
    assert_eq!(hi.len(), n);

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut eval = |x: &[f64]| f(x);

    // Initial simplex: x0 plus per-axis offsets scaled to the box width.
    let mut start = x0.to_vec();
    clamp_into(&mut start, lo, hi);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.clone());
    for i in 0..n {
        let width = hi[i] - lo[i];
        let h = if width > 0.0 { 0.08 * width } else { 0.0 };
        let mut v = start.clone();
        // Step towards the side with more room.
        if hi[i] - v[i] >= v[i] - lo[i] {
            v[i] += h;
        } else {
            v[i] -= h;
        }
        clamp_into(&mut v, lo, hi);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    for _ in 0..opts.max_iters {
        // Order the simplex by objective.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| math::abs(a - b))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let mut reflected: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n][i]))
            .collect();
        clamp_into(&mut reflected, lo, hi);
        let f_r = eval(&reflected);

        if f_r < values[0] {
            let mut expanded: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflected[i] - centroid[i]))
                .collect();
            clamp_into(&mut expanded, lo, hi);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }

        // Contraction, outside or inside depending on the reflection value.
        let base: &[f64] = if f_r < values[n] { &reflected } else { &simplex[n] };
        let mut contracted: Vec<f64> =
            (0..n).map(|i| centroid[i] + rho * (base[i] - centroid[i])).collect();
        clamp_into(&mut contracted, lo, hi);
        let f_c = eval(&contracted);
        if f_c < values[n].min(f_r) {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }

        // Shrink towards the best vertex.
        for k in 1..=n {
            for i in 0..n {
                simplex[k][i] = simplex[0][i] + sigma * (simplex[k][i] - simplex[0][i]);
            }
            clamp_into(&mut simplex[k], lo, hi);
            values[k] = eval(&simplex[k]);
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    SimplexResult { x: simplex[best].clone(), f: values[best] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum_inside_box() {
        let f = |x: &[f64]| (x[0] - 0.7).powi(2) + 3.0 * (x[1] + 0.2).powi(2);
        let res = minimize_box(f, &[0.0, 0.0], &[-2.0, -2.0], &[2.0, 2.0], &Default::default());
        assert!((res.x[0] - 0.7).abs() < 1e-5);
        assert!((res.x[1] + 0.2).abs() < 1e-5);
    }

    #[test]
    fn respects_active_bound() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2);
        let res = minimize_box(f, &[0.3], &[0.0], &[1.0], &Default::default());
        assert!((res.x[0] - 1.0).abs() < 1e-6, "got {}", res.x[0]);
    }

    #[test]
    fn rosenbrock_two_dim() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let res = minimize_box(f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &Default::default());
        assert!(res.f < 1e-8, "objective {}", res.f);
    }

    #[test]
    fn degenerate_box_returns_single_point() {
        let f = |x: &[f64]| x[0] * x[0] + x[1];
        let res = minimize_box(f, &[9.0, 9.0], &[2.0, 3.0], &[2.0, 3.0], &Default::default());
        assert_eq!(res.x, alloc::vec![2.0, 3.0]);
        assert_eq!(res.f, 7.0);
    }
}
