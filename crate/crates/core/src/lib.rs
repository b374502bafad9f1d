//! Joint power splitting and antenna selection for a multi-antenna relay
//! that powers its forwarding entirely from harvested RF energy.
//!
//! A single-antenna source reaches a single-antenna destination through an
//! `N`-antenna relay. The relay splits the antennas into a forwarding set,
//! which divides its received power between information (`lambda`) and
//! harvesting (`1 - lambda`), and a harvest-only set. The harvested power
//! then drives amplify-and-forward transmission to the destination.
//!
//! * [`channel`] holds the link model and the SNR through the relay gain.
//! * [`ps`] finds the optimal splitting ratio for a fixed set in closed form.
//! * [`selection`] chooses the forwarding set, greedily or exhaustively.
//! * [`baselines`] implements the comparison strategies and rate conversion.
//! * [`experiments`] draws Rayleigh channels and runs the Monte-Carlo sweeps.
//! * [`verify`] runs the randomized oracle checks used by the CLI.

pub mod antenna;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod ps;
pub mod selection;
pub mod units;
pub mod verify;

pub use antenna::AntennaSet;
pub use baselines::{rate_from_snr, RateReport, Strategy};
pub use channel::{
    amplification_gain, harvested_power, received_powers, snr_direct_form, ChannelRealization,
    ReceivedPowerProfile, SystemParams,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, Geometry, Sweep, SweepRow, SweepVar};
pub use ps::{
    grid_search_lambda, j_lambda, j_lambda_derivative, kkt_roots, optimal_lambda, set_statistics,
    Branch, KktRoots, PsSolution, SetStatistics,
};
pub use selection::{
    exhaustive_select, exhaustive_select_with_limit, greedy_select, SelectionMethod, SelectionResult,
};
