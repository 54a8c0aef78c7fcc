//! Acceptance bands evaluated on finished runs.

use serde::{Deserialize, Serialize};

use crate::bandit_env::BanditInstance;
use crate::error::Result;
use crate::policies::PolicyMode;
use crate::stability_lab::LemmaReport;

use super::config::ExperimentConfig;
use super::engine::AggregateReport;

pub const OPTIMAL_RATIO_BAND: (f64, f64) = (0.85, 1.15);
pub const SUBOPTIMAL_RATIO_BAND: (f64, f64) = (0.5, 1.5);
pub const COVERAGE_BAND: (f64, f64) = (0.92, 0.97);
pub const KS_LEVEL: f64 = 0.01;
pub const ENVELOPE_SLACK: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandOutcome {
    pub name: String,
    pub observed: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl BandOutcome {
    fn within(name: String, observed: f64, (lo, hi): (f64, f64)) -> Self {
        Self {
            name,
            observed,
            lower: Some(lo),
            upper: Some(hi),
            pass: lo <= observed && observed <= hi,
        }
    }

    fn at_least(name: String, observed: f64, lo: f64) -> Self {
        Self {
            name,
            observed,
            lower: Some(lo),
            upper: None,
            pass: observed >= lo,
        }
    }

    /// Strict upper bound.
    fn below(name: String, observed: f64, hi: f64) -> Self {
        Self {
            name,
            observed,
            lower: None,
            upper: Some(hi),
            pass: observed < hi,
        }
    }
}

impl std::fmt::Display for BandOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let range = match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => format!("[{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("< {hi:.6}"),
            (None, None) => String::new(),
        };
        write!(f, "{verdict} {}: {:.6} {range}", self.name, self.observed)
    }
}

/// Median ratio bands at the horizon. Empty for vanilla sampling, which has
/// no target.
pub fn stability_bands(report: &AggregateReport) -> Vec<BandOutcome> {
    let last = report.final_checkpoint();
    last.arms
        .iter()
        .filter_map(|arm| {
            let ratio = arm.ratio.as_ref()?;
            let band = if arm.optimal {
                OPTIMAL_RATIO_BAND
            } else {
                SUBOPTIMAL_RATIO_BAND
            };
            Some(BandOutcome::within(
                format!("stability.median_ratio.arm{}", arm.arm),
                ratio.median,
                band,
            ))
        })
        .collect()
}

/// Per-arm coverage and KS bands at the horizon. Empty for vanilla sampling.
pub fn coverage_bands(report: &AggregateReport) -> Vec<BandOutcome> {
    if report.metadata.mode == PolicyMode::Vanilla {
        return Vec::new();
    }
    let last = report.final_checkpoint();
    let mut out = Vec::new();
    for arm in &last.arms {
        out.push(BandOutcome::within(
            format!("coverage.arm{}", arm.arm),
            arm.coverage,
            COVERAGE_BAND,
        ));
        out.push(BandOutcome::at_least(
            format!("coverage.ks_pvalue.arm{}", arm.arm),
            arm.studentized_ks.p_value,
            KS_LEVEL,
        ));
    }
    out
}

/// Regret envelope at the horizon with unit constant, or `None` for vanilla.
///
/// Variance inflation: `Σ σ log(TΔ²/σ)/Δ²`.
/// Mean bonus: `Σ 2β(1 + β^{-1/4}) log T / Δ`.
pub fn regret_envelope(
    instance: &BanditInstance<f64>,
    mode: PolicyMode,
    horizon: u64,
    sigma: f64,
    beta: f64,
) -> Option<f64> {
    let t = horizon as f64;
    let gaps = instance.gaps().values();
    match mode {
        PolicyMode::Vanilla => None,
        PolicyMode::VarianceInflated => Some(
            gaps.map(|&d| sigma * (t * d * d / sigma).ln() / (d * d))
                .sum(),
        ),
        PolicyMode::MeanBonus => Some(
            gaps.map(|&d| 2.0 * beta * (1.0 + beta.powf(-0.25)) * t.ln() / d)
                .sum(),
        ),
    }
}

/// Mean regret at the horizon against [`ENVELOPE_SLACK`] times the envelope,
/// and sublinearity: median regret per round at the horizon below that at
/// the checkpoint closest to `T/10`.
pub fn regret_bands(
    config: &ExperimentConfig,
    report: &AggregateReport,
) -> Result<Vec<BandOutcome>> {
    let instance = config.instance()?;
    let mut out = Vec::new();
    let last = report.final_checkpoint();
    if let Some(env) = regret_envelope(
        &instance,
        config.policy.mode,
        config.horizon,
        report.metadata.sigma,
        report.metadata.beta,
    ) {
        out.push(BandOutcome::below(
            "regret.mean_vs_envelope".into(),
            last.regret.mean,
            ENVELOPE_SLACK * env,
        ));
        let tenth = config.horizon as f64 / 10.0;
        let earlier = report.checkpoints[..report.checkpoints.len() - 1]
            .iter()
            .min_by(|a, b| {
                (a.t as f64 - tenth)
                    .abs()
                    .total_cmp(&(b.t as f64 - tenth).abs())
            });
        if let Some(early) = earlier {
            out.push(BandOutcome::below(
                format!("regret.sublinear.t{}_vs_t{}", last.t, early.t),
                last.regret.median / last.t as f64,
                early.regret.median / early.t as f64,
            ));
        }
    }
    Ok(out)
}

pub fn lemma_bands(report: &LemmaReport) -> Vec<BandOutcome> {
    report
        .checks
        .iter()
        .map(|c| BandOutcome {
            name: format!("lemmas.{}", c.name),
            observed: c.worst_violation,
            lower: None,
            upper: Some(c.tolerance),
            pass: c.pass,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit_env::make_instance;

    #[test]
    fn envelopes() {
        let inst = make_instance(vec![1.0, 1.0, 0.0]).unwrap();
        let sigma: f64 = 5.970_547_388_870_876;
        let b = regret_envelope(&inst, PolicyMode::VarianceInflated, 100_000, sigma, 0.0).unwrap();
        assert!((b - sigma * (100_000.0 / sigma).ln()).abs() < 1e-12);
        let c = regret_envelope(&inst, PolicyMode::MeanBonus, 100_000, 1.0, 1.0).unwrap();
        assert!((c - 4.0 * 100_000f64.ln()).abs() < 1e-12);
        assert!(regret_envelope(&inst, PolicyMode::Vanilla, 100, 1.0, 0.0).is_none());

        let inst = make_instance(vec![1.0, 0.5, 0.0]).unwrap();
        let c = regret_envelope(&inst, PolicyMode::MeanBonus, 1000, 1.0, 2.0).unwrap();
        let unit = 2.0 * 2.0 * (1.0 + 2f64.powf(-0.25)) * 1000f64.ln();
        assert!((c - unit * 3.0).abs() < 1e-10);
    }

    #[test]
    fn band_edges() {
        assert!(BandOutcome::within("x".into(), 0.92, COVERAGE_BAND).pass);
        assert!(!BandOutcome::within("x".into(), 0.9199, COVERAGE_BAND).pass);
        assert!(!BandOutcome::below("x".into(), 1.0, 1.0).pass);
        assert!(BandOutcome::at_least("x".into(), 0.01, KS_LEVEL).pass);
        let text = BandOutcome::within("coverage.arm2".into(), 0.5, COVERAGE_BAND).to_string();
        assert!(text.starts_with("FAIL coverage.arm2"));
    }
}
