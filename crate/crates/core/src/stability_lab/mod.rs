//! Stability targets, trajectory diagnostics and numerical checks of the
//! winner-map, perturbation and geometric log-growth facts.

mod geom;
mod lemmas;
mod perturb;
mod simplex;
mod targets;
mod winner_map;

pub use geom::{geom_loglaw_sim, loglaw_success_log_prob};
pub use lemmas::{run_lemma_checks, LemmaCheck, LemmaConfig, LemmaReport};
pub use perturb::perturb_gap_mc;
pub use simplex::SimplexPoint;
pub use targets::{lyapunov_v, stability_ratios, stability_target, StabilityTarget};
pub use winner_map::{
    check_dotprod, mc_standard_errors, winner_map_mc, winner_map_quadrature,
    winner_map_quadrature_fixed, DEFAULT_NODES, REFINEMENT_TOLERANCE,
};
