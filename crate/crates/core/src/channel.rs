//! Physical model of the two-hop harvest-and-forward link.
//!
//! Channels are stored as magnitude-squared gains. The relay's per-antenna
//! phase rotation aligns both hops, so the end-to-end SNR depends only on
//! magnitudes and no complex baseband is simulated.

use crate::antenna::AntennaSet;
use crate::error::{Error, Result};

/// Fixed scalars of the link, all in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Source transmit power budget `P` (W). The source always transmits at `P`.
    pub p: f64,
    /// RF-to-DC conversion efficiency, in `(0, 1]`.
    pub eta: f64,
    /// Noise power at the destination (W).
    pub sigma_sq: f64,
    /// Antenna noise power at each relay antenna (W).
    pub sigma_a_sq: f64,
    /// Passband-to-baseband conversion noise at the relay (W).
    pub sigma_b_sq: f64,
    /// Channel bandwidth (Hz).
    pub bandwidth: f64,
    pub n_antennas: usize,
}

impl Default for SystemParams {
    /// P = 10 dBW, eta = 0.2, sigma^2 = -50 dBm, sigma_a^2 = sigma_b^2 = sigma^2 / 2,
    /// W = 1 MHz, N = 10.
    fn default() -> Self {
        let sigma_sq = crate::units::dbm_to_watts(-50.0);
        Self {
            p: crate::units::dbw_to_watts(10.0),
            eta: 0.2,
            sigma_sq,
            sigma_a_sq: sigma_sq / 2.0,
            sigma_b_sq: sigma_sq / 2.0,
            bandwidth: 1e6,
            n_antennas: 10,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParams {
                    name,
                    reason: reason.to_owned(),
                })
            }
        };
        check(self.p.is_finite() && self.p > 0.0, "p", "must be finite and > 0")?;
        check(
            self.eta > 0.0 && self.eta <= 1.0,
            "eta",
            "must lie in (0, 1]",
        )?;
        check(
            self.sigma_sq.is_finite() && self.sigma_sq > 0.0,
            "sigma_sq",
            "must be finite and > 0",
        )?;
        check(
            self.sigma_a_sq.is_finite() && self.sigma_a_sq >= 0.0,
            "sigma_a_sq",
            "must be finite and >= 0",
        )?;
        check(
            self.sigma_b_sq.is_finite() && self.sigma_b_sq > 0.0,
            "sigma_b_sq",
            "must be finite and > 0",
        )?;
        check(
            self.bandwidth.is_finite() && self.bandwidth > 0.0,
            "bandwidth",
            "must be finite and > 0",
        )?;
        check(self.n_antennas >= 1, "n_antennas", "must be >= 1")
    }

    pub fn with_power(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }
}

/// One fading draw: per-antenna S->R and R->D gains plus the direct S->D gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_sq: Vec<f64>,
    pub g_sq: Vec<f64>,
    pub h_sd_sq: f64,
}

impl ChannelRealization {
    pub fn new(h_sq: Vec<f64>, g_sq: Vec<f64>, h_sd_sq: f64) -> Result<Self> {
        if h_sq.len() != g_sq.len() {
            return Err(Error::InvalidChannel(format!(
                "h_sq has {} entries but g_sq has {}",
                h_sq.len(),
                g_sq.len()
            )));
        }
        if h_sq.is_empty() {
            return Err(Error::InvalidChannel("no antennas".into()));
        }
        let bad = |x: f64| !(x.is_finite() && x >= 0.0);
        if let Some((i, x)) = h_sq.iter().enumerate().find(|(_, &x)| bad(x)) {
            return Err(Error::InvalidChannel(format!("h_sq[{i}] = {x} is not a finite non-negative gain")));
        }
        if let Some((i, x)) = g_sq.iter().enumerate().find(|(_, &x)| bad(x)) {
            return Err(Error::InvalidChannel(format!("g_sq[{i}] = {x} is not a finite non-negative gain")));
        }
        if bad(h_sd_sq) {
            return Err(Error::InvalidChannel(format!(
                "h_sd_sq = {h_sd_sq} is not a finite non-negative gain"
            )));
        }
        Ok(Self { h_sq, g_sq, h_sd_sq })
    }

    pub fn n_antennas(&self) -> usize {
        self.h_sq.len()
    }
}

/// Expected received power at each relay antenna, `P |h_i|^2 + sigma_a^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedPowerProfile {
    pub rho: Vec<f64>,
}

impl ReceivedPowerProfile {
    /// `R_N`, the power summed over every antenna.
    pub fn total(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// `R_Omega`, the power summed over the forwarding set.
    pub fn over(&self, set: &AntennaSet) -> f64 {
        set.indices().iter().map(|&i| self.rho[i]).sum()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

pub fn received_powers(params: &SystemParams, ch: &ChannelRealization) -> ReceivedPowerProfile {
    ReceivedPowerProfile {
        rho: ch
            .h_sq
            .iter()
            .map(|h| params.p * h + params.sigma_a_sq)
            .collect(),
    }
}

fn check_inputs(rho: &ReceivedPowerProfile, set: &AntennaSet, lambda: f64) -> Result<()> {
    if set.max_index() >= rho.len() {
        return Err(Error::AntennaOutOfRange {
            index: set.max_index(),
            n_antennas: rho.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::RatioOutOfRange(lambda));
    }
    Ok(())
}

/// Power harvested at the relay: the `1 - lambda` share of the forwarding
/// antennas plus everything received on the harvest-only antennas,
/// `eta (R_N - lambda R_Omega)`.
pub fn harvested_power(
    params: &SystemParams,
    rho: &ReceivedPowerProfile,
    set: &AntennaSet,
    lambda: f64,
) -> Result<f64> {
    check_inputs(rho, set, lambda)?;
    let r_omega = rho.over(set);
    let r_n = rho.total();
    let split = params.eta * (1.0 - lambda) * r_omega;
    let harvest_only = params.eta * (r_n - r_omega);
    Ok((split + harvest_only).max(0.0))
}

/// Relay gain `beta` that spends exactly the harvested power on the
/// forwarded signal plus conversion noise.
pub fn amplification_gain(
    params: &SystemParams,
    rho: &ReceivedPowerProfile,
    set: &AntennaSet,
    lambda: f64,
) -> Result<f64> {
    let p_r = harvested_power(params, rho, set, lambda)?;
    let denom = lambda * rho.over(set) + set.len() as f64 * params.sigma_b_sq;
    if denom <= 0.0 {
        return Err(Error::ZeroGainDenominator);
    }
    Ok((p_r / denom).sqrt())
}

/// End-to-end SNR at the destination evaluated through the relay gain.
pub fn snr_direct_form(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
    set: &AntennaSet,
    lambda: f64,
) -> Result<f64> {
    if ch.n_antennas() != rho.len() {
        return Err(Error::DimensionMismatch {
            set: rho.len(),
            channel: ch.n_antennas(),
        });
    }
    let beta = amplification_gain(params, rho, set, lambda)?;
    let beta_sq = beta * beta;
    let coherent: f64 = set
        .indices()
        .iter()
        .map(|&i| (ch.g_sq[i] * ch.h_sq[i]).sqrt())
        .sum();
    let relay_gain_sum: f64 = set.indices().iter().map(|&i| ch.g_sq[i]).sum();
    let signal = beta_sq * lambda * params.p * coherent * coherent;
    let noise = beta_sq * relay_gain_sum * (lambda * params.sigma_a_sq + params.sigma_b_sq)
        + params.sigma_sq;
    Ok(signal / noise)
}
