use crate::error::{LabError, Result};
use crate::stats_core::RngStream;

use super::simplex::SimplexPoint;

/// Largest sign sweep attempted (2^12 patterns).
const MAX_DIM: usize = 12;

/// Worst winner-probability shift caused by bounded index perturbations.
///
/// With `Y_i = σ_i Z_i` (`σ_i = x_i^{-1/2}`) and `W_i = Y_i ± η σ_i`, every
/// sign pattern is evaluated on the same draws of `Z`, and the largest
/// `|P̂(W_i wins) − P̂(Y_i wins)|` over patterns and coordinates is returned.
pub fn perturb_gap_mc(
    x: &SimplexPoint,
    eta: f64,
    n_samples: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    let r = x.dim();
    if r > MAX_DIM {
        return Err(LabError::domain(
            "perturb_gap_mc",
            format!("dimension {r} exceeds {MAX_DIM}; the sign sweep has 2^r patterns"),
        ));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(LabError::domain(
            "perturb_gap_mc",
            format!("eta = {eta} must be >= 0"),
        ));
    }
    if n_samples == 0 {
        return Err(LabError::domain(
            "perturb_gap_mc",
            "n_samples must be positive",
        ));
    }
    let scales = x.scales();
    let patterns = 1usize << r;
    // net[pattern][i] = (#W_i wins) − (#Y_i wins)
    let mut net = vec![vec![0i64; r]; patterns];
    let mut z = vec![0.0; r];

    let argmax = |vals: &mut dyn Iterator<Item = f64>| {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in vals.enumerate() {
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        best
    };

    for _ in 0..n_samples {
        for zi in z.iter_mut() {
            *zi = rng.std_normal();
        }
        let base = argmax(&mut z.iter().zip(&scales).map(|(zi, s)| zi * s));
        for (mask, row) in net.iter_mut().enumerate() {
            let shifted = argmax(&mut (0..r).map(|i| {
                let sign = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                scales[i] * (z[i] + sign * eta)
            }));
            if shifted != base {
                row[shifted] += 1;
                row[base] -= 1;
            }
        }
    }
    let n = n_samples as f64;
    Ok(net
        .iter()
        .flatten()
        .map(|&d| d.unsigned_abs() as f64 / n)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_has_zero_gap() {
        let x = SimplexPoint::new(vec![0.5, 0.3, 0.2]).unwrap();
        let gap = perturb_gap_mc(&x, 0.0, 50_000, &mut RngStream::new(3, 0, 0)).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn gap_grows_with_eta_and_stays_linear() {
        let mut rng = RngStream::new(8, 0, 0);
        for r in 2..=5 {
            let x = SimplexPoint::random(r, &mut rng).unwrap();
            let mut prev = 0.0;
            for step in 0..=10 {
                let eta = 0.01 * step as f64;
                // common random numbers across the η grid
                let gap =
                    perturb_gap_mc(&x, eta, 40_000, &mut RngStream::new(9, r as u64, 0)).unwrap();
                assert!(gap + 0.004 >= prev, "r {r} eta {eta}: {gap} < {prev}");
                assert!(
                    gap <= 2.0 * r as f64 * eta + 1e-12,
                    "r {r} eta {eta}: {gap}"
                );
                prev = gap;
            }
        }
    }

    #[test]
    fn rejects_large_dimension_and_negative_eta() {
        let x = SimplexPoint::uniform(13).unwrap();
        assert!(perturb_gap_mc(&x, 0.1, 10, &mut RngStream::new(0, 0, 0)).is_err());
        let x = SimplexPoint::uniform(3).unwrap();
        assert!(perturb_gap_mc(&x, -0.1, 10, &mut RngStream::new(0, 0, 0)).is_err());
    }
}
