//! Comparison strategies and the rate conversion.
//!
//! Every strategy reports `W log2(1 + SNR)` with no half-duplex pre-log, so
//! rates of relayed and direct links are directly comparable.

use std::fmt;
use std::str::FromStr;

use crate::antenna::AntennaSet;
use crate::channel::{ChannelRealization, ReceivedPowerProfile, SystemParams};
use crate::error::{Error, Result};
use crate::ps::{j_lambda, optimal_lambda, set_statistics, stats_for_indices};
use crate::selection::{
    best_subset, exhaustive_select, greedy_select, mask_indices, SelectionMethod, SelectionResult,
    DEFAULT_EXHAUSTIVE_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Joint power splitting and antenna selection; greedy unless the
    /// caller picks another [`SelectionMethod`].
    Proposed,
    /// Joint power splitting and exhaustive antenna selection.
    Exhaustive,
    /// Same algorithm as [`Strategy::Proposed`], reported under its own column.
    Greedy,
    /// Every antenna forwards; only the splitting ratio is optimized.
    PurePs,
    /// Best subset with no splitting (`lambda = 1`).
    PureAs,
    /// Grid-powered amplify-and-forward relay with `P/2` at source and relay.
    Af,
    /// Source to destination without a relay.
    Direct,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Proposed,
        Strategy::Exhaustive,
        Strategy::Greedy,
        Strategy::PurePs,
        Strategy::PureAs,
        Strategy::Af,
        Strategy::Direct,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Proposed => "proposed",
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
            Strategy::PurePs => "pure_ps",
            Strategy::PureAs => "pure_as",
            Strategy::Af => "af",
            Strategy::Direct => "direct",
        }
    }

    /// Whether the strategy enumerates all antenna subsets.
    pub fn is_exhaustive(self) -> bool {
        matches!(self, Strategy::Exhaustive | Strategy::PureAs)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts the tags with either `_` or `-` as separator.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.tag() == norm)
            .ok_or_else(|| Error::UnknownStrategy {
                tag: s.to_owned(),
                valid: Strategy::ALL.map(Strategy::tag).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub strategy: Strategy,
    /// Achievable rate, bits per second.
    pub rate: f64,
    pub snr: f64,
    /// Forwarding set and splitting ratio, for strategies that choose them.
    pub detail: Option<(AntennaSet, f64)>,
}

impl RateReport {
    fn new(params: &SystemParams, strategy: Strategy, snr: f64, detail: Option<(AntennaSet, f64)>) -> Self {
        Self {
            strategy,
            rate: rate_from_snr(params, snr),
            snr,
            detail,
        }
    }

    pub fn from_selection(params: &SystemParams, strategy: Strategy, sel: &SelectionResult) -> Self {
        Self::new(params, strategy, sel.ps.snr, Some((sel.set.clone(), sel.ps.lambda_opt)))
    }
}

pub fn rate_from_snr(params: &SystemParams, snr: f64) -> f64 {
    params.bandwidth * (1.0 + snr).log2()
}

pub fn pure_ps_rate(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<RateReport> {
    let set = AntennaSet::full(ch.n_antennas())?;
    let sol = optimal_lambda(params, &set_statistics(ch, rho, &set)?)?;
    Ok(RateReport::new(params, Strategy::PurePs, sol.snr, Some((set, sol.lambda_opt))))
}

/// Best forwarding subset when the forwarding antennas keep all their power
/// for information and only the complement harvests.
pub fn pure_as_rate(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<RateReport> {
    let n = ch.n_antennas();
    if n > DEFAULT_EXHAUSTIVE_LIMIT {
        return Err(Error::ExhaustiveLimit {
            n_antennas: n,
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
        });
    }
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            set: rho.len(),
            channel: n,
        });
    }
    let r_n = rho.total();
    let (snr, mask) = best_subset(n, |mask| {
        j_lambda(params, &stats_for_indices(ch, rho, r_n, mask_indices(mask)), 1.0)
    })?;
    Ok(RateReport::new(
        params,
        Strategy::PureAs,
        snr,
        Some((AntennaSet::from_mask(mask, n)?, 1.0)),
    ))
}

/// SNR of a grid-powered amplify-and-forward relay that uses all antennas
/// with the same phase alignment. Source and relay each transmit `P/2`.
pub fn af_relay_snr(params: &SystemParams, ch: &ChannelRealization) -> f64 {
    let half = params.p / 2.0;
    let n = ch.n_antennas() as f64;
    let received: f64 = ch.h_sq.iter().map(|h| half * h + params.sigma_a_sq).sum();
    let beta_sq = half / (received + n * params.sigma_b_sq);
    let coherent: f64 = ch.h_sq.iter().zip(&ch.g_sq).map(|(h, g)| (h * g).sqrt()).sum();
    let relay_gain: f64 = ch.g_sq.iter().sum();
    beta_sq * half * coherent * coherent
        / (beta_sq * relay_gain * (params.sigma_a_sq + params.sigma_b_sq) + params.sigma_sq)
}

pub fn af_relay_rate(params: &SystemParams, ch: &ChannelRealization) -> RateReport {
    RateReport::new(params, Strategy::Af, af_relay_snr(params, ch), None)
}

pub fn direct_rate(params: &SystemParams, ch: &ChannelRealization) -> RateReport {
    let snr = params.p * ch.h_sd_sq / params.sigma_sq;
    RateReport::new(params, Strategy::Direct, snr, None)
}

/// Evaluates one strategy on one channel draw; [`Strategy::Proposed`] uses greedy selection.
pub fn evaluate(
    strategy: Strategy,
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<RateReport> {
    evaluate_with(strategy, SelectionMethod::Greedy, params, ch, rho)
}

/// Like [`evaluate`], with `method` choosing the set behind [`Strategy::Proposed`].
pub fn evaluate_with(
    strategy: Strategy,
    method: SelectionMethod,
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<RateReport> {
    Ok(match strategy {
        Strategy::Proposed => {
            RateReport::from_selection(params, strategy, &method.select(params, ch, rho)?)
        }
        Strategy::Greedy => {
            RateReport::from_selection(params, strategy, &greedy_select(params, ch, rho)?)
        }
        Strategy::Exhaustive => {
            RateReport::from_selection(params, strategy, &exhaustive_select(params, ch, rho)?)
        }
        Strategy::PurePs => pure_ps_rate(params, ch, rho)?,
        Strategy::PureAs => pure_as_rate(params, ch, rho)?,
        Strategy::Af => af_relay_rate(params, ch),
        Strategy::Direct => direct_rate(params, ch),
    })
}
