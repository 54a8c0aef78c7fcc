use crate::bandit_env::BanditInstance;
use crate::error::{LabError, Result};
use crate::policies::PolicyMode;
use crate::scalar::{from_count, lit, Real};

/// Deterministic pull-count targets `N*_a`: `T/m` for optimal arms and
/// `2 c log T / Δ_a²` for suboptimal ones, where `c` is the variance scale
/// (variance inflation) or the bonus strength (mean bonus).
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityTarget<F: Real> {
    pub mode: PolicyMode,
    pub horizon: u64,
    pub per_arm: Vec<F>,
}

pub fn stability_target<F: Real>(
    instance: &BanditInstance<F>,
    mode: PolicyMode,
    horizon: u64,
    c_a: F,
) -> Result<StabilityTarget<F>> {
    if mode == PolicyMode::Vanilla {
        return Err(LabError::domain(
            "stability_target",
            "vanilla sampling has no deterministic target",
        ));
    }
    if horizon < 3 {
        return Err(LabError::domain(
            "stability_target",
            format!("horizon {horizon} < 3"),
        ));
    }
    if !(c_a > F::zero() && c_a.is_finite()) {
        return Err(LabError::domain(
            "stability_target",
            format!("scale {c_a} must be > 0"),
        ));
    }
    let t = from_count::<F>(horizon);
    let optimal = t / from_count(instance.num_optimal() as u64);
    let explore = lit::<F>(2.0) * c_a * t.ln();
    let per_arm = (0..instance.arms())
        .map(|a| match instance.gap(a) {
            None => optimal,
            Some(gap) => explore / (gap * gap),
        })
        .collect();
    Ok(StabilityTarget {
        mode,
        horizon,
        per_arm,
    })
}

/// Ratios `N_a / N*_a`.
pub fn stability_ratios<F: Real>(counts: &[u64], target: &StabilityTarget<F>) -> Result<Vec<F>> {
    if counts.len() != target.per_arm.len() {
        return Err(LabError::LengthMismatch {
            expected: target.per_arm.len(),
            got: counts.len(),
        });
    }
    Ok(counts
        .iter()
        .zip(&target.per_arm)
        .map(|(&n, &goal)| from_count::<F>(n) / goal)
        .collect())
}

/// Squared distance of the pull proportions from uniform, `Σ (y_i − 1/m)²`.
pub fn lyapunov_v<F: Real>(optimal_counts: &[u64]) -> Result<F> {
    let m = optimal_counts.len();
    if m < 2 {
        return Err(LabError::domain("lyapunov_v", "need at least two arms"));
    }
    let total: u64 = optimal_counts.iter().sum();
    if total == 0 {
        return Err(LabError::domain("lyapunov_v", "all counts are zero"));
    }
    let total = from_count::<F>(total);
    let uniform = F::one() / from_count(m as u64);
    Ok(optimal_counts
        .iter()
        .map(|&c| {
            let d = from_count::<F>(c) / total - uniform;
            d * d
        })
        .fold(F::zero(), |acc, v| acc + v))
}
