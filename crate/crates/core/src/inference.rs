//! Per-arm estimators, studentized statistics and Wald intervals.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::{from_count, lit, Real};
use crate::stats_core::{std_normal_cdf, std_normal_quantile};

/// Pull count, sample mean and sample standard deviation of one arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmEstimate<F: Real> {
    pub n: u64,
    pub mean: F,
    /// Unbiased standard deviation; fixed at 1 for a single pull.
    pub sample_std: F,
}

/// Computes the estimate from streamed sufficient statistics.
///
/// The variance numerator `Σr² − n·mean²` is clamped at zero so cancellation
/// on constant rewards cannot produce a NaN.
pub fn arm_estimate<F: Real>(n: u64, sum: F, sumsq: F) -> Result<ArmEstimate<F>> {
    if n == 0 {
        return Err(LabError::domain("arm_estimate", "arm has no pulls"));
    }
    let nf = from_count::<F>(n);
    let mean = sum / nf;
    let sample_std = if n == 1 {
        F::one()
    } else {
        let ss = (sumsq - nf * mean * mean).max(F::zero());
        (ss / (nf - F::one())).sqrt()
    };
    Ok(ArmEstimate {
        n,
        mean,
        sample_std,
    })
}

/// `√n (mean − μ) / sd`.
///
/// With a zero standard deviation the statistic is ±∞ when the mean misses
/// the truth and 0 when it hits it exactly.
pub fn studentized<F: Real>(est: &ArmEstimate<F>, mu_true: F) -> F {
    let diff = est.mean - mu_true;
    if est.sample_std == F::zero() {
        return if diff == F::zero() {
            F::zero()
        } else {
            F::infinity().copysign(diff)
        };
    }
    from_count::<F>(est.n).sqrt() * diff / est.sample_std
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval<F: Real> {
    pub lower: F,
    pub upper: F,
    /// Nominal coverage `1 − α`.
    pub level: F,
}

impl<F: Real> WaldInterval<F> {
    /// Closed-interval membership; endpoint hits count as covered.
    pub fn contains(&self, value: F) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> F {
        self.upper - self.lower
    }
}

/// `mean ∓ Φ⁻¹(1 − α/2) · sd / √n`.
pub fn wald_ci<F: Real>(est: &ArmEstimate<F>, alpha: F) -> Result<WaldInterval<F>> {
    if !(alpha > F::zero() && alpha < F::one()) {
        return Err(LabError::domain(
            "wald_ci",
            format!("alpha = {alpha} not in (0, 1)"),
        ));
    }
    if est.n == 0 {
        return Err(LabError::domain("wald_ci", "arm has no pulls"));
    }
    let z = std_normal_quantile(F::one() - alpha / lit(2.0))?;
    let half = z * est.sample_std / from_count::<F>(est.n).sqrt();
    Ok(WaldInterval {
        lower: est.mean - half,
        upper: est.mean + half,
        level: F::one() - alpha,
    })
}

/// Fraction of intervals that contain their truth.
pub fn coverage_tally<F: Real>(intervals: &[WaldInterval<F>], truths: &[F]) -> Result<f64> {
    if intervals.len() != truths.len() {
        return Err(LabError::LengthMismatch {
            expected: intervals.len(),
            got: truths.len(),
        });
    }
    if intervals.is_empty() {
        return Err(LabError::domain("coverage_tally", "no intervals"));
    }
    let hits = intervals
        .iter()
        .zip(truths)
        .filter(|(ci, &mu)| ci.contains(mu))
        .count();
    Ok(hits as f64 / intervals.len() as f64)
}

/// Outcome of a one-sample Kolmogorov–Smirnov test against Φ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

impl KsOutcome {
    pub fn rejected_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// One-sample KS test of `samples` against the standard normal.
///
/// Infinite samples are legal and sit at the ends of the empirical CDF.
pub fn ks_test_std_normal(samples: &[f64]) -> Result<KsOutcome> {
    if samples.is_empty() {
        return Err(LabError::domain("ks_test_std_normal", "no samples"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(LabError::domain("ks_test_std_normal", "NaN sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = std_normal_cdf(x);
            let above = (i as f64 + 1.0) / n - cdf;
            let below = cdf - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsOutcome {
        n: sorted.len(),
        statistic,
        p_value: kolmogorov_pvalue(statistic, sorted.len()),
    })
}

/// Asymptotic Kolmogorov tail with Stephens' finite-sample correction.
pub fn kolmogorov_pvalue(statistic: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = sign * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats_core::RngStream;
    use proptest::prelude::*;

    fn from_rewards(rewards: &[f64]) -> ArmEstimate<f64> {
        let sum = rewards.iter().sum();
        let sumsq = rewards.iter().map(|r| r * r).sum();
        arm_estimate(rewards.len() as u64, sum, sumsq).unwrap()
    }

    #[test]
    fn estimate_examples() {
        let e = from_rewards(&[1.0, 1.0, 1.0]);
        assert_eq!((e.mean, e.sample_std), (1.0, 0.0));
        let e = from_rewards(&[-3.7]);
        assert_eq!((e.mean, e.sample_std), (-3.7, 1.0));
        let e = from_rewards(&[0.0, 2.0]);
        assert_eq!(e.mean, 1.0);
        assert!((e.sample_std - 2f64.sqrt()).abs() < 1e-15);
        assert!(arm_estimate(0, 0.0_f64, 0.0).is_err());
    }

    #[test]
    fn constant_rewards_clamp() {
        let e = from_rewards(&[0.1; 7]);
        assert!(e.sample_std >= 0.0 && e.sample_std < 1e-7);
    }

    #[test]
    fn studentized_examples() {
        let est: ArmEstimate<f64> = ArmEstimate {
            n: 100,
            mean: 0.7,
            sample_std: 1.0,
        };
        assert_eq!(studentized(&est, 0.7), 0.0);
        assert!((studentized(&est, 0.5) - 2.0).abs() < 1e-12);
        let scaled: ArmEstimate<f64> = ArmEstimate {
            n: 100,
            mean: 0.5 + 0.2 * 3.5,
            sample_std: 3.5,
        };
        assert!((studentized(&scaled, 0.5) - 2.0).abs() < 1e-12);
        let flat = ArmEstimate {
            n: 5,
            mean: 1.0,
            sample_std: 0.0,
        };
        assert_eq!(studentized(&flat, 0.0), f64::INFINITY);
        assert_eq!(studentized(&flat, 2.0), f64::NEG_INFINITY);
        assert_eq!(studentized(&flat, 1.0), 0.0);
    }

    #[test]
    fn wald_examples() {
        let est: ArmEstimate<f64> = ArmEstimate {
            n: 100,
            mean: 0.5,
            sample_std: 1.0,
        };
        let ci = wald_ci(&est, 0.05).unwrap();
        assert!((ci.lower - 0.304_00).abs() < 1e-4);
        assert!((ci.upper - 0.696_00).abs() < 1e-4);
        assert!((ci.width() - 2.0 * 1.959_963_984_540_054 * 0.1).abs() < 1e-12);
        assert_eq!(ci.level, 0.95);

        let mut prev = ci.width();
        for alpha in [0.01, 1e-3, 1e-6, 1e-12] {
            let w = wald_ci(&est, alpha).unwrap().width();
            assert!(w > prev);
            prev = w;
        }

        let flat = ArmEstimate {
            n: 9,
            mean: 2.0,
            sample_std: 0.0,
        };
        let ci = wald_ci(&flat, 0.05).unwrap();
        assert_eq!((ci.lower, ci.upper), (2.0, 2.0));
        assert!(ci.contains(2.0));

        assert!(wald_ci(&est, 0.0).is_err());
        assert!(wald_ci(&est, 1.0).is_err());
    }

    #[test]
    fn coverage_examples() {
        let mus = [0.0, 1.0, -2.0];
        let around: Vec<_> = mus
            .iter()
            .map(|&m| WaldInterval {
                lower: m - 1.0,
                upper: m + 1.0,
                level: 0.95,
            })
            .collect();
        assert_eq!(coverage_tally(&around, &mus).unwrap(), 1.0);
        let shifted: Vec<_> = mus
            .iter()
            .map(|&m| WaldInterval {
                lower: m + 1.0,
                upper: m + 2.0,
                level: 0.95,
            })
            .collect();
        assert_eq!(coverage_tally(&shifted, &mus).unwrap(), 0.0);
        let touching = [WaldInterval {
            lower: 1.0,
            upper: 2.0,
            level: 0.9,
        }];
        assert_eq!(coverage_tally(&touching, &[2.0]).unwrap(), 1.0);
        assert!(coverage_tally(&around, &mus[..2]).is_err());
    }

    #[test]
    fn ks_accepts_normal_and_rejects_shift() {
        let mut rng = RngStream::new(31, 0, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.std_normal()).collect();
        let ok = ks_test_std_normal(&xs).unwrap();
        assert!(!ok.rejected_at(0.01), "{ok:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.15).collect();
        assert!(ks_test_std_normal(&shifted).unwrap().rejected_at(0.01));
    }

    #[test]
    fn kolmogorov_critical_value() {
        // 1% critical value of the limiting distribution is 1.6276
        let n = 1_000_000;
        let d = 1.627_6 / (n as f64).sqrt();
        assert!((kolmogorov_pvalue(d, n) - 0.01).abs() < 2e-4);
    }

    proptest! {
        #[test]
        fn wider_level_contains_narrower(mean in -5.0..5.0f64, sd in 0.0..3.0f64, n in 1u64..10_000,
                                         a1 in 0.001..0.5f64, a2 in 0.001..0.5f64) {
            let est = ArmEstimate { n, mean, sample_std: sd };
            let (big, small) = if a1 >= a2 { (a1, a2) } else { (a2, a1) };
            let narrow = wald_ci(&est, big).unwrap();
            let wide = wald_ci(&est, small).unwrap();
            prop_assert!(wide.lower <= narrow.lower && narrow.upper <= wide.upper);
        }

        #[test]
        fn estimate_ignores_reward_order(mut rewards in prop::collection::vec(-10.0..10.0f64, 2..40)) {
            let a = from_rewards(&rewards);
            rewards.reverse();
            let b = from_rewards(&rewards);
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
            prop_assert!((a.sample_std - b.sample_std).abs() < 1e-9);
        }
    }
}
