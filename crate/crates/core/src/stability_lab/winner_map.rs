//! The pure-noise winner map `g_i(x) = P(Z_i/√x_i is the largest of Z_j/√x_j)`.
//!
//! Quadrature evaluates, for each coordinate `i`,
//!
//! ```text
//! g_i = ∫ φ(z) Π_{ℓ≠i} Φ((σ_i/σ_ℓ) z) dz,    σ_k = x_k^{-1/2}
//! ```
//!
//! on a geometrically graded Gauss–Legendre mesh. Near the simplex boundary
//! the ratios σ_i/σ_ℓ reach the hundreds and `Φ(a z)` becomes a near-step at
//! the origin; the grading puts panels down to a quarter of that step width.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::stats_core::{std_normal_cdf, std_normal_pdf, RngStream};

use super::simplex::SimplexPoint;

pub const DEFAULT_NODES: usize = 256;
/// Maximum disagreement accepted between `n`- and `2n`-node evaluations.
pub const REFINEMENT_TOLERANCE: f64 = 1e-9;

/// Panels per half line.
const PANELS: usize = 16;
/// Truncation point; the neglected mass is below 2·Φ(−10) ≈ 1.5e-23.
const HALF_WIDTH: f64 = 10.0;

/// Gauss–Legendre nodes and weights on [−1, 1].
fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut deriv = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / deriv;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Panel breakpoints on [0, HALF_WIDTH], finest next to the origin.
fn graded_breakpoints(finest_scale: f64) -> Vec<f64> {
    let inner = finest_scale / 4.0;
    let ratio = (inner / HALF_WIDTH).powf(1.0 / (PANELS - 1) as f64);
    let mut points = Vec::with_capacity(PANELS + 1);
    points.push(0.0);
    for k in (0..PANELS).rev() {
        points.push(HALF_WIDTH * ratio.powi(k as i32));
    }
    points
}

fn winner_integral(i: usize, scales: &[f64], rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let ratios: Vec<f64> = scales
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != i)
        .map(|(_, &s)| scales[i] / s)
        .collect();
    let steepest = ratios.iter().copied().fold(1.0, f64::max);
    let breaks = graded_breakpoints(1.0 / steepest);
    let integrand = |z: f64| {
        ratios
            .iter()
            .fold(std_normal_pdf(z), |acc, &a| acc * std_normal_cdf(a * z))
    };

    let (nodes, weights) = rule;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&t, &wt) in nodes.iter().zip(weights) {
            let z = mid + half * t;
            total += half * wt * (integrand(z) + integrand(-z));
        }
    }
    total
}

/// Single quadrature evaluation with `node_count` nodes, no refinement check.
pub fn winner_map_quadrature_fixed(x: &SimplexPoint, node_count: usize) -> Result<Vec<f64>> {
    if node_count < 64 {
        return Err(LabError::domain(
            "winner_map_quadrature",
            format!("node_count {node_count} < 64"),
        ));
    }
    let order = (node_count / (2 * PANELS)).max(2);
    let rule = gauss_legendre(order);
    let scales = x.scales();
    Ok((0..x.dim())
        .map(|i| winner_integral(i, &scales, &rule))
        .collect())
}

/// Winner map by quadrature, accepted only if doubling the node count moves
/// no coordinate by more than [`REFINEMENT_TOLERANCE`].
pub fn winner_map_quadrature(x: &SimplexPoint, node_count: usize) -> Result<Vec<f64>> {
    let coarse = winner_map_quadrature_fixed(x, node_count)?;
    let fine = winner_map_quadrature_fixed(x, 2 * node_count)?;
    let gap = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > REFINEMENT_TOLERANCE {
        return Err(LabError::domain(
            "winner_map_quadrature",
            format!("refinement moved g by {gap:e} at x = {:?}", x.coords()),
        ));
    }
    Ok(coarse)
}

/// Winner frequencies of `Z_i/√x_i` over `n_samples` draws.
pub fn winner_map_mc(x: &SimplexPoint, n_samples: u64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n_samples < 10_000 {
        return Err(LabError::domain(
            "winner_map_mc",
            format!("n_samples {n_samples} < 10^4"),
        ));
    }
    let scales = x.scales();
    let mut wins = vec![0u64; x.dim()];
    for _ in 0..n_samples {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &s) in scales.iter().enumerate() {
            let v = s * rng.std_normal();
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        wins[best] += 1;
    }
    let n = n_samples as f64;
    Ok(wins.into_iter().map(|w| w as f64 / n).collect())
}

/// Binomial standard errors of Monte Carlo frequencies.
pub fn mc_standard_errors(freqs: &[f64], n_samples: u64) -> Vec<f64> {
    freqs
        .iter()
        .map(|&p| (p * (1.0 - p) / n_samples as f64).sqrt())
        .collect()
}

/// `Σ x_i g_i` and whether it respects the `1/r` ceiling (slack 1e-7).
pub fn check_dotprod(x: &SimplexPoint, g: &[f64]) -> Result<(f64, bool)> {
    if g.len() != x.dim() {
        return Err(LabError::LengthMismatch {
            expected: x.dim(),
            got: g.len(),
        });
    }
    let value: f64 = x.coords().iter().zip(g).map(|(a, b)| a * b).sum();
    Ok((value, value <= 1.0 / x.dim() as f64 + 1e-7))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: &[f64]) -> SimplexPoint {
        SimplexPoint::new(x.to_vec()).unwrap()
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(8);
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_point_is_uniform() {
        for r in 2..=7 {
            let g =
                winner_map_quadrature(&SimplexPoint::uniform(r).unwrap(), DEFAULT_NODES).unwrap();
            for gi in g {
                assert!((gi - 1.0 / r as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn two_coordinates_always_split_evenly() {
        let g = winner_map_quadrature(&point(&[0.9, 0.1]), DEFAULT_NODES).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-10 && (g[1] - 0.5).abs() < 1e-10);
        let g = winner_map_quadrature(&point(&[0.9999, 0.0001]), DEFAULT_NODES).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn three_coordinates_order_and_mc_agreement() {
        let x = point(&[0.5, 0.3, 0.2]);
        let g = winner_map_quadrature(&x, DEFAULT_NODES).unwrap();
        assert!(g[0] < g[1] && g[1] < g[2]);
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        let n = 1_000_000;
        let mc = winner_map_mc(&x, n, &mut RngStream::new(17, 0, 0)).unwrap();
        let se = mc_standard_errors(&mc, n);
        for i in 0..3 {
            assert!((mc[i] - g[i]).abs() < 4.0 * se[i], "{mc:?} vs {g:?}");
        }
    }

    #[test]
    fn near_boundary_points_converge() {
        let x = point(&[0.99988, 0.0001, 0.00001, 0.00001]);
        let g = winner_map_quadrature(&x, DEFAULT_NODES).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dotprod_examples() {
        let x = SimplexPoint::uniform(5).unwrap();
        let g = winner_map_quadrature(&x, DEFAULT_NODES).unwrap();
        let (v, ok) = check_dotprod(&x, &g).unwrap();
        assert!(ok && (v - 0.2).abs() < 1e-9);

        let x = point(&[0.3, 0.7]);
        let g = winner_map_quadrature(&x, DEFAULT_NODES).unwrap();
        assert!((check_dotprod(&x, &g).unwrap().0 - 0.5).abs() < 1e-9);

        let x = point(&[0.7, 0.1, 0.1, 0.1]);
        let g = winner_map_quadrature(&x, DEFAULT_NODES).unwrap();
        let (v, ok) = check_dotprod(&x, &g).unwrap();
        assert!(ok && v < 0.25 - 1e-4, "{v}");
        assert!(check_dotprod(&x, &g[..2]).is_err());
    }

    #[test]
    fn mc_validation_and_reproducibility() {
        let x = SimplexPoint::uniform(3).unwrap();
        assert!(winner_map_mc(&x, 100, &mut RngStream::new(1, 0, 0)).is_err());
        let a = winner_map_mc(&x, 20_000, &mut RngStream::new(1, 0, 0)).unwrap();
        let b = winner_map_mc(&x, 20_000, &mut RngStream::new(1, 0, 0)).unwrap();
        assert_eq!(a, b);
        assert!(winner_map_quadrature(&x, 32).is_err());
    }
}
