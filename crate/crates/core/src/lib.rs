//! Leggett-Garg correlators for three-flavor neutrino oscillations in matter
//! of constant density.
//!
//! The crate evaluates flavor probabilities from a second-order double
//! expansion in the mass hierarchy parameter α and sin θ13, builds the
//! four-time correlator `C = C12 + C23 + C34 − C14` over equally spaced
//! baselines, locates its maxima, and cross-checks everything against exact
//! unitary evolution. A Monte Carlo simulator of the negative-result
//! measurement protocol draws its outcomes from the exact evolution.
//!
//! Module map:
//!
//! - [`params`]: physical inputs, unit conversions, flavors.
//! - [`expansion`]: series-expansion probabilities and joint probabilities.
//! - [`correlator`]: pair correlators and the LGI quantity `C`.
//! - [`oracle`]: PMNS matrix, Hermitian eigensolver, exact propagation.
//! - [`optimize`]: grid scans, local refinement, parameter sweeps.
//! - [`montecarlo`]: negative-result-measurement simulation.
//! - [`reproduce`]: the four reference maxima and derived deltas.
//! - [`cli`]: configuration files, CSV/text output, subcommands.

pub mod cli;
pub mod correlator;
pub mod error;
pub mod expansion;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod reproduce;

pub use correlator::{lgi_correlator, pair_correlator, BaselineSchedule, CorrelatorResult};
pub use error::{Error, Result};
pub use expansion::{
    conditional_return_probabilities, flavor_probabilities_from_e, joint_probability_e_then,
    kinematic_factors, FlavorProbabilities, KinematicFactors, ReturnPhase, ReturnProbabilities,
};
pub use optimize::{
    grid_scan, parameter_sweep, refine_maximum, Evaluator, MaximumReport, ScanGrid, SweepAxis,
};
pub use oracle::{
    evolution_operator, exact_lgi_correlator, exact_transition_matrix, pmns_matrix, PmnsMatrix,
    TransitionMatrix,
};
pub use params::{potential_from_density, Flavor, OscillationParams};
