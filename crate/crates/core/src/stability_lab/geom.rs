use crate::error::{LabError, Result};
use crate::stats_core::RngStream;

/// Below this success probability a geometric draw is taken in log space.
const LOG_SPACE_BELOW: f64 = 1e-10;

/// `log p_k` for `p_k = min(1, √(σ/k) · exp(−α k / σ))`.
pub fn loglaw_success_log_prob(alpha: f64, sigma: f64, k: u64) -> f64 {
    let k = k as f64;
    (0.5 * (sigma / k).ln() - alpha * k / sigma).min(0.0)
}

/// Simulates `(σ/n) · log Σ_{k=k0}^{n} G_k` with independent
/// `G_k ~ Geometric(p_k)`.
///
/// Draws with tiny `p_k` overflow any integer type, so each `log G_k` is
/// formed directly (`log G = log E − log p` with `E ~ Exp(1)`, exact to
/// relative order `p`) and the sum is accumulated with log-sum-exp.
pub fn geom_loglaw_sim(
    alpha: f64,
    sigma: f64,
    n: u64,
    k0: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LabError::domain(
            "geom_loglaw_sim",
            format!("alpha = {alpha} must be > 0"),
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(LabError::domain(
            "geom_loglaw_sim",
            format!("sigma = {sigma} must be > 0"),
        ));
    }
    if !(1 <= k0 && k0 < n) {
        return Err(LabError::domain(
            "geom_loglaw_sim",
            format!("need 1 <= k0 < n, got k0 = {k0}, n = {n}"),
        ));
    }
    let mut log_terms = Vec::with_capacity((n - k0 + 1) as usize);
    for k in k0..=n {
        let log_p = loglaw_success_log_prob(alpha, sigma, k);
        let log_g = if log_p > LOG_SPACE_BELOW.ln() {
            rng.geometric_real(log_p.exp())?.ln()
        } else {
            (-rng.uniform_open().ln()).ln() - log_p
        };
        log_terms.push(log_g);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = peak + log_terms.iter().map(|v| (v - peak).exp()).sum::<f64>().ln();
    Ok(sigma / n as f64 * log_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn median_of_runs(n: u64, k0: u64, seed: u64) -> f64 {
        let mut runs: Vec<f64> = (0..50)
            .map(|rep| {
                geom_loglaw_sim(0.5, 20.0, n, k0, &mut RngStream::new(seed, rep, 0)).unwrap()
            })
            .collect();
        runs.sort_by(f64::total_cmp);
        0.5 * (runs[24] + runs[25])
    }

    #[test]
    fn log_growth_limit() {
        let base = median_of_runs(4000, 1, 1);
        assert!((base - 0.5).abs() < 0.05, "{base}");
        let doubled = median_of_runs(8000, 1, 2);
        assert!((doubled - base).abs() < 0.05, "{doubled} vs {base}");
        let trimmed = median_of_runs(4000, 64, 3);
        assert!((trimmed - 0.5).abs() < 0.05, "{trimmed}");
    }

    #[test]
    fn small_exact_case_matches_integer_sum() {
        // only the exact branch is used for small n/σ
        let mut a = RngStream::new(6, 0, 0);
        let mut b = RngStream::new(6, 0, 0);
        let got = geom_loglaw_sim(0.5, 20.0, 40, 1, &mut a).unwrap();
        let sum: f64 = (1..=40)
            .map(|k| {
                b.geometric_real(loglaw_success_log_prob(0.5, 20.0, k).exp())
                    .unwrap()
            })
            .sum();
        assert!((got - 20.0 / 40.0 * sum.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut rng = RngStream::new(0, 0, 0);
        assert!(geom_loglaw_sim(0.5, 20.0, 10, 10, &mut rng).is_err());
        assert!(geom_loglaw_sim(0.5, 20.0, 10, 0, &mut rng).is_err());
        assert!(geom_loglaw_sim(0.0, 20.0, 10, 1, &mut rng).is_err());
        assert!(geom_loglaw_sim(0.5, -1.0, 10, 1, &mut rng).is_err());
    }
}
