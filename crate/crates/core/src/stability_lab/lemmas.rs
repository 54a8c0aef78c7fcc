//! Grid and Monte Carlo sweeps behind `lemmas.json`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stats_core::{mills_bracket, std_normal_cdf, std_normal_pdf, RngStream};

use super::geom::geom_loglaw_sim;
use super::perturb::perturb_gap_mc;
use super::simplex::SimplexPoint;
use super::winner_map::{
    check_dotprod, winner_map_mc, winner_map_quadrature, winner_map_quadrature_fixed,
};

/// Sizes and seeds of the lemma sweeps. Defaults are the full acceptance sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    pub seed: u64,
    pub node_count: usize,
    /// Random interior points per dimension r = 2..=6.
    pub points_per_dim: usize,
    /// Random interior points per dimension r = 3..=5 for the ordering check.
    pub monotone_points: usize,
    pub monotone_min_gap: f64,
    /// Points for the quadrature-vs-Monte-Carlo comparison, cycled over r = 2..=6.
    pub mc_points: usize,
    pub mc_draws: u64,
    pub mc_max_z: f64,
    pub perturb_draws: u64,
    pub perturb_max_constant: f64,
    pub loglaw_runs: usize,
    pub loglaw_alpha: f64,
    pub loglaw_sigma: f64,
    pub loglaw_n: u64,
    pub loglaw_tolerance: f64,
    pub tail_grid: usize,
    pub sqrt_grid: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            seed: 2026,
            node_count: super::winner_map::DEFAULT_NODES,
            points_per_dim: 1000,
            monotone_points: 500,
            monotone_min_gap: 1e-3,
            mc_points: 100,
            mc_draws: 10_000_000,
            mc_max_z: 3.0,
            perturb_draws: 100_000,
            perturb_max_constant: 2.0,
            loglaw_runs: 50,
            loglaw_alpha: 0.5,
            loglaw_sigma: 20.0,
            loglaw_n: 4000,
            loglaw_tolerance: 0.05,
            tail_grid: 10_000,
            sqrt_grid: 512,
        }
    }
}

impl LemmaConfig {
    /// Reduced sizes for smoke runs.
    pub fn quick() -> Self {
        Self {
            points_per_dim: 60,
            monotone_points: 40,
            mc_points: 10,
            mc_draws: 200_000,
            perturb_draws: 20_000,
            loglaw_runs: 21,
            tail_grid: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(LabError::InvalidConfig(format!("lemmas.{what}")));
        if self.node_count < 64 {
            return bad("node_count must be >= 64");
        }
        if self.points_per_dim == 0 || self.monotone_points == 0 || self.mc_points == 0 {
            return bad("point counts must be positive");
        }
        if self.mc_draws < 10_000 {
            return bad("mc_draws must be >= 10000");
        }
        if self.loglaw_runs == 0 || self.loglaw_n < 4 {
            return bad("loglaw_runs must be positive and loglaw_n >= 4");
        }
        if self.perturb_draws == 0 || self.tail_grid == 0 || self.sqrt_grid == 0 {
            return bad("grid sizes must be positive");
        }
        Ok(())
    }
}

/// One verified property: the worst value of its statistic over the grid and
/// whether that stays within tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub grid_size: usize,
    pub tolerance: f64,
    pub worst_violation: f64,
    pub pass: bool,
    pub detail: String,
}

impl LemmaCheck {
    fn at_most(name: &str, grid_size: usize, tolerance: f64, worst: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            grid_size,
            tolerance,
            worst_violation: worst,
            pass: worst <= tolerance,
            detail,
        }
    }

    /// Pass only when the worst signed margin is strictly negative.
    fn strictly_below(name: &str, grid_size: usize, worst: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            grid_size,
            tolerance: 0.0,
            worst_violation: worst,
            pass: worst < 0.0,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

// stream ids of the individual sweeps
const GRID_STREAM: u64 = 1;
const MONOTONE_STREAM: u64 = 2;
const MC_POINT_STREAM: u64 = 3;
const MC_DRAW_STREAM: u64 = 4;
const PERTURB_STREAM: u64 = 5;
const LOGLAW_STREAM: u64 = 6;

const DIMS: std::ops::RangeInclusive<usize> = 2..=6;

pub fn run_lemma_checks(config: &LemmaConfig) -> Result<LemmaReport> {
    config.validate()?;
    let mut checks = Vec::new();
    checks.extend(winner_map_grid(config)?);
    checks.push(monotonicity(config)?);
    checks.push(quadrature_vs_mc(config)?);
    checks.extend(perturbation(config)?);
    checks.extend(geometric_loglaw(config)?);
    checks.extend(normal_tails(config));
    checks.push(sqrt_inequalities(config));
    Ok(LemmaReport {
        seed: config.seed,
        checks,
    })
}

struct GridPoint {
    x: SimplexPoint,
    g: Vec<f64>,
    refinement_gap: f64,
}

fn winner_map_grid(config: &LemmaConfig) -> Result<Vec<LemmaCheck>> {
    let jobs: Vec<(usize, usize)> = DIMS
        .flat_map(|r| (0..config.points_per_dim).map(move |k| (r, k)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(r, k)| {
            let mut rng = RngStream::new(config.seed, GRID_STREAM, (r * 1_000_000 + k) as u64);
            let x = SimplexPoint::random(r, &mut rng)?;
            let g = winner_map_quadrature_fixed(&x, config.node_count)?;
            let fine = winner_map_quadrature_fixed(&x, 2 * config.node_count)?;
            let refinement_gap = g
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(GridPoint {
                x,
                g,
                refinement_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = points.len();

    let norm = points
        .iter()
        .map(|p| (p.g.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let refine = points.iter().map(|p| p.refinement_gap).fold(0.0, f64::max);

    let mut bound = f64::NEG_INFINITY;
    let mut pair_equality = 0.0_f64;
    let mut strict = f64::NEG_INFINITY;
    let mut strict_count = 0;
    for p in &points {
        let r = p.x.dim();
        let (value, _) = check_dotprod(&p.x, &p.g)?;
        bound = bound.max(value - 1.0 / r as f64);
        if r == 2 {
            pair_equality = pair_equality.max((value - 0.5).abs());
        } else if p.x.spread() >= 0.2 {
            strict = strict.max(value - (1.0 / r as f64 - 1e-4));
            strict_count += 1;
        }
    }

    let mut perm_gap = 0.0_f64;
    let mut perm_count = 0;
    for p in points.iter().step_by(5) {
        let r = p.x.dim();
        let perm: Vec<usize> = (0..r).rev().collect();
        let g = winner_map_quadrature_fixed(&p.x.permuted(&perm)?, config.node_count)?;
        for (k, &i) in perm.iter().enumerate() {
            perm_gap = perm_gap.max((g[k] - p.g[i]).abs());
        }
        perm_count += 1;
    }

    Ok(vec![
        LemmaCheck::at_most(
            "winner_map_normalization",
            n,
            1e-8,
            norm,
            "max |Σ g_i − 1| over random interior points, r = 2..6".into(),
        ),
        LemmaCheck::at_most(
            "winner_map_refinement",
            n,
            super::winner_map::REFINEMENT_TOLERANCE,
            refine,
            format!("max |g(n) − g(2n)| with n = {}", config.node_count),
        ),
        LemmaCheck::at_most(
            "dotprod_bound",
            n,
            1e-7,
            bound,
            "max (Σ x_i g_i − 1/r), r = 2..6".into(),
        ),
        LemmaCheck::at_most(
            "dotprod_equality_r2",
            config.points_per_dim,
            1e-8,
            pair_equality,
            "max |Σ x_i g_i − 1/2| for r = 2".into(),
        ),
        LemmaCheck {
            pass: strict < 0.0 || strict_count == 0,
            ..LemmaCheck::strictly_below(
                "dotprod_strict_margin",
                strict_count,
                strict,
                "max (Σ x_i g_i − 1/r + 1e-4) for r >= 3 with spread >= 0.2".into(),
            )
        },
        LemmaCheck::at_most(
            "winner_map_exchangeability",
            perm_count,
            1e-9,
            perm_gap,
            "max |g(πx) − πg(x)| under coordinate reversal".into(),
        ),
    ])
}

fn monotonicity(config: &LemmaConfig) -> Result<LemmaCheck> {
    let jobs: Vec<(usize, usize)> = (3..=5)
        .flat_map(|r| (0..config.monotone_points).map(move |k| (r, k)))
        .collect();
    let margins = jobs
        .par_iter()
        .map(|&(r, k)| {
            let mut rng = RngStream::new(config.seed, MONOTONE_STREAM, (r * 1_000_000 + k) as u64);
            let x = SimplexPoint::random(r, &mut rng)?;
            let g = winner_map_quadrature(&x, config.node_count)?;
            let xs = x.coords();
            let mut worst = f64::NEG_INFINITY;
            for i in 0..r {
                for j in 0..r {
                    if xs[i] - xs[j] > config.monotone_min_gap {
                        worst = worst.max(g[i] - g[j]);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = margins.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(LemmaCheck::strictly_below(
        "winner_map_monotonicity",
        jobs.len(),
        worst,
        format!(
            "max (g_i − g_j) over pairs with x_i − x_j > {}, r = 3..5",
            config.monotone_min_gap
        ),
    ))
}

fn quadrature_vs_mc(config: &LemmaConfig) -> Result<LemmaCheck> {
    let dims: Vec<usize> = DIMS.collect();
    let zs = (0..config.mc_points)
        .into_par_iter()
        .map(|k| {
            let r = dims[k % dims.len()];
            let mut rng = RngStream::new(config.seed, MC_POINT_STREAM, k as u64);
            let x = SimplexPoint::random(r, &mut rng)?;
            let g = winner_map_quadrature(&x, config.node_count)?;
            let mut draws = RngStream::new(config.seed, MC_DRAW_STREAM, k as u64);
            let mc = winner_map_mc(&x, config.mc_draws, &mut draws)?;
            Ok(g.iter()
                .zip(&mc)
                .map(|(&gi, &mi)| {
                    let se = (gi * (1.0 - gi) / config.mc_draws as f64).sqrt();
                    (mi - gi).abs() / se
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = zs.iter().copied().fold(0.0, f64::max);
    Ok(LemmaCheck::at_most(
        "winner_map_quadrature_vs_mc",
        config.mc_points,
        config.mc_max_z,
        worst,
        format!(
            "max |ĝ_mc − g| in binomial standard errors, {} draws per point",
            config.mc_draws
        ),
    ))
}

fn perturbation(config: &LemmaConfig) -> Result<Vec<LemmaCheck>> {
    let etas: Vec<f64> = (0..=10).map(|s| 0.01 * s as f64).collect();
    let rows = (2..=5usize)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(config.seed, PERTURB_STREAM, r as u64);
            let x = SimplexPoint::random(r, &mut rng)?;
            etas.iter()
                .map(|&eta| {
                    // common random numbers across η
                    let mut draws = RngStream::new(config.seed, PERTURB_STREAM, 1000 + r as u64);
                    perturb_gap_mc(&x, eta, config.perturb_draws, &mut draws)
                })
                .collect::<Result<Vec<f64>>>()
                .map(|gaps| (r, gaps))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut zero_gap = 0.0_f64;
    let mut constant = 0.0_f64;
    let mut drop = f64::NEG_INFINITY;
    for (r, gaps) in &rows {
        zero_gap = zero_gap.max(gaps[0]);
        for (k, &gap) in gaps.iter().enumerate().skip(1) {
            constant = constant.max(gap / (*r as f64 * etas[k]));
            drop = drop.max(gaps[k - 1] - gap);
        }
    }
    let noise = 3.0 * (0.25 / config.perturb_draws as f64).sqrt();
    let grid = rows.len() * etas.len();
    Ok(vec![
        LemmaCheck::at_most(
            "winner_perturbation_zero_shift",
            rows.len(),
            3.0 * (0.25 / config.perturb_draws as f64).sqrt(),
            zero_gap,
            "gap at η = 0".into(),
        ),
        LemmaCheck::at_most(
            "winner_perturbation_order",
            grid,
            config.perturb_max_constant,
            constant,
            format!("empirical constant max gap/(r η) = {constant:.4}, r = 2..5, η ≤ 0.1"),
        ),
        LemmaCheck::at_most(
            "winner_perturbation_monotone",
            grid,
            noise,
            drop.max(0.0),
            "largest decrease of the gap between consecutive η".into(),
        ),
    ])
}

fn geometric_loglaw(config: &LemmaConfig) -> Result<Vec<LemmaCheck>> {
    let n = config.loglaw_n;
    let root = (n as f64).sqrt().ceil() as u64;
    let median = |n: u64, k0: u64, variant: u64| -> Result<f64> {
        let mut runs = (0..config.loglaw_runs as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = RngStream::new(config.seed, LOGLAW_STREAM, variant * 1_000_000 + rep);
                geom_loglaw_sim(config.loglaw_alpha, config.loglaw_sigma, n, k0, &mut rng)
            })
            .collect::<Result<Vec<f64>>>()?;
        runs.sort_by(f64::total_cmp);
        let m = runs.len();
        Ok(if m % 2 == 1 {
            runs[m / 2]
        } else {
            0.5 * (runs[m / 2 - 1] + runs[m / 2])
        })
    };
    let base = median(n, 1, 0)?;
    let trimmed = median(n, root, 1)?;
    let doubled = median(2 * n, 1, 2)?;
    let tol = config.loglaw_tolerance;
    let alpha = config.loglaw_alpha;
    Ok(vec![
        LemmaCheck::at_most(
            "geometric_loglaw",
            config.loglaw_runs,
            tol,
            (base - alpha).abs(),
            format!("median {base:.4} vs limit {alpha}, n = {n}, k0 = 1"),
        ),
        LemmaCheck::at_most(
            "geometric_loglaw_trimmed",
            config.loglaw_runs,
            tol,
            (trimmed - alpha).abs(),
            format!("median {trimmed:.4} vs limit {alpha}, n = {n}, k0 = {root}"),
        ),
        LemmaCheck::at_most(
            "geometric_loglaw_doubled",
            config.loglaw_runs,
            tol,
            (doubled - base).abs(),
            format!(
                "median {doubled:.4} at n = {} vs {base:.4} at n = {n}",
                2 * n
            ),
        ),
    ])
}

fn normal_tails(config: &LemmaConfig) -> Vec<LemmaCheck> {
    let m = config.tail_grid;
    let grid = |k: usize| 10.0 * (k + 1) as f64 / m as f64;

    let mut bracket = f64::NEG_INFINITY;
    let mut half_mills = f64::NEG_INFINITY;
    let mut crude = f64::NEG_INFINITY;
    for k in 0..m {
        let x = grid(k);
        let tail = std_normal_cdf(-x);
        let (lo, hi) = mills_bracket(x).expect("grid is positive");
        bracket = bracket.max((lo - tail) / tail).max((tail - hi) / tail);
        if x >= 1.0 {
            half_mills = half_mills.max(std_normal_pdf(x) / (2.0 * x) / tail - 1.0);
        }
        crude = crude.max(tail / (-x * x / 2.0).exp() - 1.0);
    }
    crude = crude.max(std_normal_cdf(0.0) - 1.0);
    vec![
        LemmaCheck::at_most(
            "normal_tail_mills_bracket",
            m,
            0.0,
            bracket,
            "relative excursion of Φ(−x) outside [xφ/(1+x²), φ/x], x ∈ (0, 10]".into(),
        ),
        LemmaCheck::at_most(
            "normal_tail_half_mills_lower",
            m,
            0.0,
            half_mills,
            "max φ(x)/(2x)/Φ(−x) − 1 for x ≥ 1".into(),
        ),
        LemmaCheck::at_most(
            "normal_tail_crude",
            m + 1,
            0.0,
            crude,
            "max Φ(−x)/exp(−x²/2) − 1 on [0, 10]".into(),
        ),
    ]
}

fn sqrt_inequalities(config: &LemmaConfig) -> LemmaCheck {
    let m = config.sqrt_grid;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..m {
        let x = k as f64 / (m - 1).max(1) as f64;
        worst = worst.max((1.0 + x).sqrt().recip() - (1.0 - x / 4.0));
        if x < 1.0 {
            worst = worst.max((1.0 + x / 2.0) - (1.0 - x).sqrt().recip());
        }
    }
    LemmaCheck::at_most(
        "sqrt_inequalities",
        m,
        0.0,
        worst,
        "1/√(1+x) ≤ 1 − x/4 and 1/√(1−x) ≥ 1 + x/2 on [0, 1]".into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_sweep_passes() {
        let report = run_lemma_checks(&LemmaConfig::quick()).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(report.get("winner_map_monotonicity").is_some());
        let json = serde_json::to_string(&report).unwrap();
        let back: LemmaReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn config_validation() {
        let cfg = LemmaConfig {
            mc_draws: 10,
            ..LemmaConfig::default()
        };
        assert!(cfg.validate().is_err());
        let parsed: LemmaConfig = serde_json::from_str(r#"{"seed": 5}"#).unwrap();
        assert_eq!(parsed.seed, 5);
        assert_eq!(parsed.points_per_dim, 1000);
        assert!(serde_json::from_str::<LemmaConfig>(r#"{"sed": 5}"#).is_err());
    }
}
