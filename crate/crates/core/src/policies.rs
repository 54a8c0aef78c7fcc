//! Gaussian Thompson-sampling index policies: vanilla, variance-inflated and
//! mean-bonus, sharing one sampling rule
//!
//! ```text
//! θ_a ~ N(center_a, σ / N_a),   A = argmax_a θ_a
//! ```
//!
//! where `center_a` is the running mean (plus the bonus `√(2β log T / N_a)`
//! in mean-bonus mode) and `σ` is the variance scale (1 unless inflated).

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::{from_count, lit, Real};
use crate::stats_core::{std_normal_sf, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// `σ = 1`, no bonus.
    Vanilla,
    /// `σ > 1`, no bonus.
    VarianceInflated,
    /// `σ = 1`, mean shifted by the bonus.
    MeanBonus,
}

impl PolicyMode {
    pub fn label(self) -> &'static str {
        match self {
            PolicyMode::Vanilla => "vanilla",
            PolicyMode::VarianceInflated => "variance_inflated",
            PolicyMode::MeanBonus => "mean_bonus",
        }
    }
}

/// A horizon-dependent tuning parameter, evaluated once at the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// `max(floor, (log log T)^power)` with natural logarithms.
    LogLog {
        power: f64,
        floor: f64,
    },
}

impl Schedule {
    /// Default variance-inflation schedule, `max(4, (log log T)²)`.
    pub const DEFAULT_SIGMA: Schedule = Schedule::LogLog {
        power: 2.0,
        floor: 4.0,
    };
    /// Default bonus-strength schedule, `max(1, (log log T)²)`.
    pub const DEFAULT_BETA: Schedule = Schedule::LogLog {
        power: 2.0,
        floor: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { value } if !(value > 0.0 && value.is_finite()) => Err(
                LabError::InvalidConfig(format!("constant schedule value {value} must be > 0")),
            ),
            Schedule::LogLog { power, floor }
                if !(power > 0.0 && power.is_finite() && floor >= 1.0 && floor.is_finite()) =>
            {
                Err(LabError::InvalidConfig(format!(
                    "loglog schedule needs power > 0 and floor >= 1, got power {power}, floor {floor}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate<F: Real>(&self, horizon: u64) -> F {
        match *self {
            Schedule::Constant { value } => lit(value),
            Schedule::LogLog { power, floor } => {
                let floor = lit::<F>(floor);
                let loglog = from_count::<F>(horizon).ln().ln();
                if loglog.is_finite() && loglog > F::zero() {
                    loglog.powf(lit(power)).max(floor)
                } else {
                    floor
                }
            }
        }
    }
}

/// Optimism bonus `√(2 β log T / n)`.
pub fn bonus<F: Real>(beta: F, horizon: u64, n: u64) -> Result<F> {
    if n == 0 {
        return Err(LabError::domain("bonus", "pull count must be >= 1"));
    }
    if horizon < 2 {
        return Err(LabError::domain("bonus", format!("horizon {horizon} < 2")));
    }
    Ok(bonus_with_scale(bonus_scale(beta, horizon), n))
}

#[inline]
fn bonus_scale<F: Real>(beta: F, horizon: u64) -> F {
    lit::<F>(2.0) * beta * from_count::<F>(horizon).ln()
}

#[inline]
fn bonus_with_scale<F: Real>(scale: F, n: u64) -> F {
    (scale / from_count(n)).sqrt()
}

/// Probability that an index drawn around `mean` with `n` pulls and variance
/// scale `sigma` lands at or above `level`.
pub fn index_exceedance_probability<F: Real>(mean: F, n: u64, sigma: F, level: F) -> F {
    std_normal_sf((level - mean) * (from_count::<F>(n) / sigma).sqrt())
}

/// Per-replication state of an index policy.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyState<F: Real> {
    mode: PolicyMode,
    horizon: u64,
    sigma: F,
    beta: F,
    bonus_scale: F,
    counts: Vec<u64>,
    sums: Vec<F>,
    sumsq: Vec<F>,
    t: u64,
}

impl<F: Real> PolicyState<F> {
    /// Builds a policy from schedules frozen at the horizon.
    ///
    /// Vanilla mode ignores both schedules; variance inflation ignores `beta`;
    /// mean bonus ignores `sigma`.
    pub fn init(
        mode: PolicyMode,
        arms: usize,
        horizon: u64,
        sigma_schedule: &Schedule,
        beta_schedule: &Schedule,
    ) -> Result<Self> {
        let (sigma, beta) = match mode {
            PolicyMode::Vanilla => (F::one(), F::zero()),
            PolicyMode::VarianceInflated => {
                sigma_schedule.validate()?;
                (sigma_schedule.evaluate(horizon), F::zero())
            }
            PolicyMode::MeanBonus => {
                beta_schedule.validate()?;
                (F::one(), beta_schedule.evaluate(horizon))
            }
        };
        Self::with_parameters(mode, arms, horizon, sigma, beta)
    }

    /// Builds a policy from explicit `σ` and `β`.
    ///
    /// Accepts the boundary values `σ = 1` (variance inflation) and `β = 0`
    /// (mean bonus), at which both modes coincide with vanilla sampling.
    pub fn with_parameters(
        mode: PolicyMode,
        arms: usize,
        horizon: u64,
        sigma: F,
        beta: F,
    ) -> Result<Self> {
        if arms < 2 {
            return Err(LabError::InvalidConfig(format!(
                "need >= 2 arms, got {arms}"
            )));
        }
        if horizon <= arms as u64 {
            return Err(LabError::InvalidConfig(format!(
                "horizon {horizon} must exceed the number of arms {arms}"
            )));
        }
        match mode {
            PolicyMode::Vanilla if sigma != F::one() || beta != F::zero() => {
                return Err(LabError::InvalidConfig(
                    "vanilla mode requires sigma = 1 and beta = 0".into(),
                ))
            }
            PolicyMode::VarianceInflated if !(sigma >= F::one() && sigma.is_finite()) => {
                return Err(LabError::InvalidConfig(format!(
                    "variance inflation requires sigma >= 1, got {sigma}"
                )))
            }
            PolicyMode::MeanBonus
                if sigma != F::one() || !(beta >= F::zero() && beta.is_finite()) =>
            {
                return Err(LabError::InvalidConfig(format!(
                    "mean bonus requires sigma = 1 and beta >= 0, got sigma {sigma}, beta {beta}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            mode,
            horizon,
            sigma,
            beta,
            bonus_scale: bonus_scale(beta, horizon),
            counts: vec![0; arms],
            sums: vec![F::zero(); arms],
            sumsq: vec![F::zero(); arms],
            t: 0,
        })
    }

    pub fn mode(&self) -> PolicyMode {
        self.mode
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn sigma(&self) -> F {
        self.sigma
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    /// Rounds played so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[F] {
        &self.sums
    }

    pub fn sumsq(&self) -> &[F] {
        &self.sumsq
    }

    /// Running mean of an arm; `None` before its first pull.
    pub fn mean(&self, arm: usize) -> Option<F> {
        match self.counts.get(arm) {
            Some(&n) if n > 0 => Some(self.sums[arm] / from_count(n)),
            _ => None,
        }
    }

    /// Center of the sampling distribution for an arm with at least one pull.
    fn center(&self, arm: usize) -> F {
        let n = self.counts[arm];
        let mean = self.sums[arm] / from_count(n);
        match self.mode {
            PolicyMode::MeanBonus => mean + bonus_with_scale(self.bonus_scale, n),
            _ => mean,
        }
    }

    /// Chooses the next arm.
    ///
    /// During the first `K` rounds arm `t` is forced and no randomness is
    /// consumed. Afterwards one standard normal is drawn from each arm's lane,
    /// in arm order.
    pub fn select_arm(&self, lanes: &mut [RngStream]) -> usize {
        let arms = self.arms();
        if self.t < arms as u64 {
            return self.t as usize;
        }
        assert_eq!(lanes.len(), arms, "one noise lane per arm");
        let mut best = 0;
        let mut best_index = F::neg_infinity();
        for (arm, lane) in lanes.iter_mut().enumerate() {
            let index = self.index(arm, lit(lane.std_normal()));
            if index > best_index {
                best = arm;
                best_index = index;
            }
        }
        best
    }

    /// Chooses the next arm from explicit standard-normal noise, one value per
    /// arm. Ties go to the lowest index.
    pub fn select_arm_with_noise(&self, noise: &[F]) -> Result<usize> {
        let arms = self.arms();
        if self.t < arms as u64 {
            return Ok(self.t as usize);
        }
        if noise.len() != arms {
            return Err(LabError::LengthMismatch {
                expected: arms,
                got: noise.len(),
            });
        }
        let mut best = 0;
        let mut best_index = F::neg_infinity();
        for (arm, &z) in noise.iter().enumerate() {
            let index = self.index(arm, z);
            if index > best_index {
                best = arm;
                best_index = index;
            }
        }
        Ok(best)
    }

    #[inline]
    fn index(&self, arm: usize, z: F) -> F {
        let n = self.counts[arm];
        self.center(arm) + (self.sigma / from_count(n)).sqrt() * z
    }

    pub fn update(&mut self, arm: usize, reward: F) -> Result<()> {
        if arm >= self.arms() {
            return Err(LabError::ArmOutOfRange {
                index: arm,
                arms: self.arms(),
            });
        }
        self.counts[arm] += 1;
        self.sums[arm] = self.sums[arm] + reward;
        self.sumsq[arm] = self.sumsq[arm] + reward * reward;
        self.t += 1;
        Ok(())
    }
}

pub fn init_policy<F: Real>(
    mode: PolicyMode,
    arms: usize,
    horizon: u64,
    sigma_schedule: &Schedule,
    beta_schedule: &Schedule,
) -> Result<PolicyState<F>> {
    PolicyState::init(mode, arms, horizon, sigma_schedule, beta_schedule)
}
