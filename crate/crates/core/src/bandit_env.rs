//! Gaussian K-armed bandit with unit-variance noise.

use std::collections::BTreeMap;

use crate::error::{LabError, Result};
use crate::scalar::{from_count, lit, Real};
use crate::stats_core::RngStream;

/// Ground-truth arm means and the quantities derived from them.
///
/// The optimal set uses exact equality on the stored means: two arms are
/// tied only if their means are bit-for-bit the same value.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditInstance<F: Real> {
    means: Vec<F>,
    mu_star: F,
    optimal_set: Vec<usize>,
    gaps: BTreeMap<usize, F>,
}

impl<F: Real> BanditInstance<F> {
    pub fn new(means: Vec<F>) -> Result<Self> {
        if means.len() < 2 {
            return Err(LabError::InvalidConfig(format!(
                "a bandit needs at least 2 arms, got {}",
                means.len()
            )));
        }
        if let Some(bad) = means.iter().position(|m| !m.is_finite()) {
            return Err(LabError::InvalidConfig(format!(
                "mean of arm {bad} is not finite"
            )));
        }
        let mu_star = means.iter().copied().fold(F::neg_infinity(), F::max);
        let optimal_set = (0..means.len()).filter(|&a| means[a] == mu_star).collect();
        let gaps = means
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != mu_star)
            .map(|(a, &m)| (a, mu_star - m))
            .collect();
        Ok(Self {
            means,
            mu_star,
            optimal_set,
            gaps,
        })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[F] {
        &self.means
    }

    pub fn mean(&self, arm: usize) -> Result<F> {
        self.means.get(arm).copied().ok_or(LabError::ArmOutOfRange {
            index: arm,
            arms: self.arms(),
        })
    }

    pub fn mu_star(&self) -> F {
        self.mu_star
    }

    pub fn optimal_set(&self) -> &[usize] {
        &self.optimal_set
    }

    /// Number of optimal arms, `m`.
    pub fn num_optimal(&self) -> usize {
        self.optimal_set.len()
    }

    pub fn is_optimal(&self, arm: usize) -> bool {
        arm < self.arms() && !self.gaps.contains_key(&arm)
    }

    /// Gap of a suboptimal arm; `None` for optimal arms.
    pub fn gap(&self, arm: usize) -> Option<F> {
        self.gaps.get(&arm).copied()
    }

    pub fn gaps(&self) -> &BTreeMap<usize, F> {
        &self.gaps
    }

    /// Draws `μ_arm + Z` with `Z` from the arm's reward lane.
    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<F> {
        let mean = self.mean(arm)?;
        Ok(mean + lit(rng.std_normal()))
    }

    /// Pseudo-regret of a pull-count vector, `Σ_{a∉S*} Δ_a N_a`.
    pub fn regret_of_counts(&self, counts: &[u64]) -> Result<F> {
        if counts.len() != self.arms() {
            return Err(LabError::LengthMismatch {
                expected: self.arms(),
                got: counts.len(),
            });
        }
        Ok(self.gaps.iter().fold(F::zero(), |acc, (&a, &gap)| {
            acc + gap * from_count(counts[a])
        }))
    }
}

pub fn make_instance<F: Real>(means: Vec<F>) -> Result<BanditInstance<F>> {
    BanditInstance::new(means)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_optimal_arm() {
        let inst = make_instance(vec![1.0, 0.0]).unwrap();
        assert_eq!(inst.num_optimal(), 1);
        assert_eq!(inst.optimal_set(), &[0]);
        assert_eq!(inst.gap(1), Some(1.0));
        assert_eq!(inst.gap(0), None);
    }

    #[test]
    fn tied_optimal_arms() {
        let inst = make_instance(vec![1.0, 1.0, 0.5]).unwrap();
        assert_eq!(inst.num_optimal(), 2);
        assert_eq!(inst.optimal_set(), &[0, 1]);
        assert_eq!(inst.gap(2), Some(0.5));
        assert!(inst.is_optimal(1) && !inst.is_optimal(2));
    }

    #[test]
    fn all_arms_optimal() {
        let inst = make_instance(vec![0.3_f64, 0.3, 0.3]).unwrap();
        assert_eq!(inst.num_optimal(), 3);
        assert!(inst.gaps().is_empty());
    }

    #[test]
    fn near_ties_are_not_ties() {
        let inst = make_instance(vec![1.0, 1.0 - 1e-15]).unwrap();
        assert_eq!(inst.num_optimal(), 1);
        assert!(inst.gap(1).unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_means() {
        assert!(make_instance(vec![1.0_f64]).is_err());
        assert!(make_instance::<f64>(vec![]).is_err());
        assert!(make_instance(vec![1.0, f64::NAN]).is_err());
        assert!(make_instance(vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn pull_moments_and_determinism() {
        let inst = make_instance(vec![0.0, 3.0]).unwrap();
        let mut rng = RngStream::new(3, 0, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| inst.pull(0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(mean.abs() < 0.013);
        assert!((var - 1.0).abs() < 0.02);

        let mut a = RngStream::new(3, 1, 0);
        let mut b = RngStream::new(3, 1, 0);
        for _ in 0..100 {
            assert_eq!(inst.pull(1, &mut a).unwrap(), inst.pull(1, &mut b).unwrap());
        }
        assert!(inst.pull(2, &mut a).is_err());
    }

    #[test]
    fn substreams_give_independent_rewards() {
        let inst = make_instance(vec![0.0, 0.0]).unwrap();
        let mut lane0 = RngStream::new(8, 0, 0);
        let mut lane1 = lane0.substream(1);
        let n = 100_000;
        let mut sxy = 0.0;
        for _ in 0..n {
            sxy += inst.pull(0, &mut lane0).unwrap() * inst.pull(1, &mut lane1).unwrap();
        }
        assert!((sxy / n as f64).abs() < 0.013);
    }

    #[test]
    fn regret_identity() {
        let inst = make_instance(vec![1.0, 1.0, 0.5, 0.0]).unwrap();
        let r = inst.regret_of_counts(&[10, 20, 4, 2]).unwrap();
        assert_eq!(r, 0.5 * 4.0 + 1.0 * 2.0);
        assert!(inst.regret_of_counts(&[1, 2]).is_err());
    }
}
