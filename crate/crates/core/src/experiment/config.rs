use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bandit_env::BanditInstance;
use crate::error::{LabError, Result};
use crate::policies::{PolicyMode, Schedule};
use crate::stability_lab::LemmaConfig;

/// Policy block of the config: mode plus the two tuning schedules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub mode: PolicyMode,
    #[serde(default = "default_sigma")]
    pub sigma: Schedule,
    #[serde(default = "default_beta")]
    pub beta: Schedule,
}

fn default_sigma() -> Schedule {
    Schedule::DEFAULT_SIGMA
}

fn default_beta() -> Schedule {
    Schedule::DEFAULT_BETA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("ots-lab-out"),
        }
    }
}

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub means: Vec<f64>,
    pub policy: PolicyConfig,
    #[serde(alias = "T")]
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    pub alpha: f64,
    /// Round counts at which trajectories are recorded. Defaults to
    /// `{T/100, T/10, T/3, T}`, dropping entries shorter than the forced phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub lemmas: LemmaConfig,
}

impl ExperimentConfig {
    /// A config with default schedules, checkpoints, outputs and lemma sizes.
    pub fn new(
        means: Vec<f64>,
        mode: PolicyMode,
        horizon: u64,
        replications: u64,
        seed: u64,
    ) -> Self {
        Self {
            means,
            policy: PolicyConfig {
                mode,
                sigma: Schedule::DEFAULT_SIGMA,
                beta: Schedule::DEFAULT_BETA,
            },
            horizon,
            replications,
            seed,
            alpha: 0.05,
            checkpoints: None,
            outputs: OutputConfig::default(),
            lemmas: LemmaConfig::default(),
        }
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| LabError::Json {
            path: origin.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    /// Checkpoints actually used, sorted and deduplicated.
    pub fn resolved_checkpoints(&self) -> Vec<u64> {
        match &self.checkpoints {
            Some(list) => list.clone(),
            None => {
                let t = self.horizon;
                let k = self.arms() as u64;
                let mut list: Vec<u64> = [t / 100, t / 10, t / 3, t]
                    .into_iter()
                    .filter(|&c| c >= k)
                    .collect();
                list.dedup();
                list
            }
        }
    }

    pub fn instance(&self) -> Result<BanditInstance<f64>> {
        BanditInstance::new(self.means.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidConfig(msg));
        self.instance()?;
        let k = self.arms() as u64;
        if self.horizon <= k {
            return bad(format!(
                "T = {} must exceed the number of arms {k}",
                self.horizon
            ));
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} not in (0, 1)", self.alpha));
        }
        self.policy.sigma.validate()?;
        self.policy.beta.validate()?;
        let checkpoints = self.resolved_checkpoints();
        if checkpoints.is_empty() {
            return bad("checkpoints must be nonempty".into());
        }
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing".into());
        }
        if checkpoints[0] < k {
            return bad(format!(
                "first checkpoint {} precedes the {k} forced rounds",
                checkpoints[0]
            ));
        }
        if *checkpoints.last().expect("nonempty") != self.horizon {
            return bad(format!("last checkpoint must equal T = {}", self.horizon));
        }
        self.lemmas.validate()
    }

    /// Tuning scale frozen at the horizon: `σ` for variance inflation, `β`
    /// for the mean bonus, 1 for vanilla.
    pub fn sigma_value(&self) -> f64 {
        match self.policy.mode {
            PolicyMode::VarianceInflated => self.policy.sigma.evaluate(self.horizon),
            _ => 1.0,
        }
    }

    pub fn beta_value(&self) -> f64 {
        match self.policy.mode {
            PolicyMode::MeanBonus => self.policy.beta.evaluate(self.horizon),
            _ => 0.0,
        }
    }

    /// Constant entering the suboptimal stability target, if the mode has one.
    pub fn target_scale(&self) -> Option<f64> {
        match self.policy.mode {
            PolicyMode::Vanilla => None,
            PolicyMode::VarianceInflated => Some(self.sigma_value()),
            PolicyMode::MeanBonus => Some(self.beta_value()),
        }
    }

    /// SHA-256 of the serialized config with checkpoints resolved, in hex.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.checkpoints = Some(self.resolved_checkpoints());
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(
            vec![1.0, 1.0, 0.0],
            PolicyMode::VarianceInflated,
            10_000,
            4,
            1,
        )
    }

    #[test]
    fn minimal_json_parses_with_defaults() {
        let text = r#"{
            "means": [1.0, 0.0],
            "policy": {"mode": "mean_bonus"},
            "T": 1000,
            "replications": 3,
            "seed": 9,
            "alpha": 0.1
        }"#;
        let cfg = ExperimentConfig::from_json_str(text, Path::new("inline")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.horizon, 1000);
        assert_eq!(cfg.policy.beta, Schedule::DEFAULT_BETA);
        assert_eq!(cfg.resolved_checkpoints(), vec![10, 100, 333, 1000]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"means": [1.0, 0.0], "policy": {"mode": "vanilla"}, "T": 100,
                       "replications": 1, "seed": 0, "alpha": 0.05, "horizn": 5}"#;
        assert!(ExperimentConfig::from_json_str(text, Path::new("x")).is_err());
        let text = r#"{"means": [1.0, 0.0], "policy": {"mode": "vanilla", "sigmaa": 2}, "T": 100,
                       "replications": 1, "seed": 0, "alpha": 0.05}"#;
        assert!(ExperimentConfig::from_json_str(text, Path::new("x")).is_err());
    }

    #[test]
    fn validation_failures() {
        let mut c = base();
        c.checkpoints = Some(vec![]);
        assert!(c.validate().is_err());
        c.checkpoints = Some(vec![100, 5000]);
        assert!(c.validate().is_err());
        c.checkpoints = Some(vec![5000, 100, 10_000]);
        assert!(c.validate().is_err());
        c.checkpoints = Some(vec![2, 10_000]);
        assert!(c.validate().is_err());
        c.checkpoints = Some(vec![3, 10_000]);
        c.validate().unwrap();

        let mut c = base();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.horizon = 3;
        assert!(c.validate().is_err());
        let mut c = base();
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.means = vec![1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_every_field() {
        let h = base().config_hash();
        assert_eq!(h, base().config_hash());
        assert_eq!(h.len(), 64);
        let variants: Vec<ExperimentConfig> = vec![
            ExperimentConfig { seed: 2, ..base() },
            ExperimentConfig {
                replications: 5,
                ..base()
            },
            ExperimentConfig {
                horizon: 10_001,
                ..base()
            },
            ExperimentConfig {
                alpha: 0.1,
                ..base()
            },
            ExperimentConfig {
                means: vec![1.0, 1.0, 0.5],
                ..base()
            },
            ExperimentConfig {
                checkpoints: Some(vec![10_000]),
                ..base()
            },
            ExperimentConfig {
                outputs: OutputConfig {
                    dir: "elsewhere".into(),
                },
                ..base()
            },
        ];
        for v in variants {
            assert_ne!(v.config_hash(), h);
        }
        let mut v = base();
        v.policy.sigma = Schedule::Constant { value: 4.0 };
        assert_ne!(v.config_hash(), h);
        let mut v = base();
        v.lemmas.seed += 1;
        assert_ne!(v.config_hash(), h);
        // spelling out the default checkpoints is the same experiment
        let explicit = ExperimentConfig {
            checkpoints: Some(base().resolved_checkpoints()),
            ..base()
        };
        assert_eq!(explicit.config_hash(), h);
    }

    #[test]
    fn scales_follow_mode() {
        let c = ExperimentConfig::new(vec![1.0, 0.0], PolicyMode::VarianceInflated, 100_000, 1, 0);
        assert!((c.sigma_value() - 5.970_547_388_870_876).abs() < 1e-12);
        assert_eq!(c.beta_value(), 0.0);
        let c = ExperimentConfig::new(vec![1.0, 0.0], PolicyMode::MeanBonus, 100_000, 1, 0);
        assert_eq!(c.sigma_value(), 1.0);
        assert_eq!(c.target_scale(), Some(c.beta_value()));
        let c = ExperimentConfig::new(vec![1.0, 0.0], PolicyMode::Vanilla, 100_000, 1, 0);
        assert_eq!(c.target_scale(), None);
    }
}
