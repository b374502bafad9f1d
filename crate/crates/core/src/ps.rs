//! Optimal power splitting for a fixed forwarding set.
//!
//! With the set fixed, the end-to-end SNR is a concave function of the
//! splitting ratio `lambda` on `[0, 1]`:
//!
//! ```text
//!            eta P B lambda (R_N - R_Omega lambda)
//! J(lambda) = -----------------------------------------------------------------
//!            eta A (lambda sa2 + sb2)(R_N - R_Omega lambda) + s2 (n sb2 + R_Omega lambda)
//! ```
//!
//! Its derivative is `C * q(lambda)` with `C >= 0` and `q` a quadratic whose
//! smaller non-negative root is the unconstrained maximizer. [`optimal_lambda`]
//! evaluates that root in closed form and clamps it to 1;
//! [`grid_search_lambda`] is the brute-force oracle it is checked against.

use crate::antenna::AntennaSet;
use crate::channel::{ChannelRealization, ReceivedPowerProfile, SystemParams};
use crate::error::{Error, Result};

/// `|eta sigma_b^2 A - sigma^2| <= EQUAL_CASE_TOL * sigma^2` selects the double-root branch.
pub const EQUAL_CASE_TOL: f64 = 1e-12;

/// Aggregates of a forwarding set that fully determine the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetStatistics {
    /// `A = sum |g_i|^2` over the set.
    pub a: f64,
    /// `B = (sum |g_i h_i|)^2` over the set.
    pub b: f64,
    /// `R_Omega`, received power on the set (W).
    pub r_omega: f64,
    /// `R_N`, received power on all antennas (W).
    pub r_n: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `eta sigma_b^2 A = sigma^2`: the quadratic degenerates and the root is `R_N / (2 R_Omega)`.
    EqualCase,
    /// Interior root of the quadratic.
    Generic,
    /// The stationary point lies at or beyond 1, so `lambda = 1`.
    Clamped,
    /// Produced by [`grid_search_lambda`].
    Grid,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::EqualCase => "equal-case",
            Branch::Generic => "generic",
            Branch::Clamped => "clamped",
            Branch::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsSolution {
    pub lambda_opt: f64,
    pub snr: f64,
    pub branch: Branch,
}

/// Stationary points of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KktRoots {
    /// `eta sigma_b^2 A != sigma^2`. `lambda2` is never feasible; `lambda3 >= 0`.
    Distinct { lambda2: f64, lambda3: f64 },
    /// `eta sigma_b^2 A = sigma^2` (within [`EQUAL_CASE_TOL`]).
    Double { lambda4: f64 },
}

pub fn set_statistics(
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
    set: &AntennaSet,
) -> Result<SetStatistics> {
    if ch.n_antennas() != rho.len() {
        return Err(Error::DimensionMismatch {
            set: rho.len(),
            channel: ch.n_antennas(),
        });
    }
    if set.max_index() >= ch.n_antennas() {
        return Err(Error::AntennaOutOfRange {
            index: set.max_index(),
            n_antennas: ch.n_antennas(),
        });
    }
    Ok(stats_for_indices(ch, rho, rho.total(), set.indices().iter().copied()))
}

/// Unchecked aggregate computation shared by the subset searches.
pub(crate) fn stats_for_indices(
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
    r_n: f64,
    indices: impl Iterator<Item = usize>,
) -> SetStatistics {
    let (mut a, mut coherent, mut r_omega, mut n) = (0.0, 0.0, 0.0, 0);
    for i in indices {
        a += ch.g_sq[i];
        coherent += (ch.g_sq[i] * ch.h_sq[i]).sqrt();
        r_omega += rho.rho[i];
        n += 1;
    }
    SetStatistics {
        a,
        b: coherent * coherent,
        r_omega,
        r_n,
        n,
    }
}

#[inline]
fn denominator(params: &SystemParams, s: &SetStatistics, lambda: f64, remaining: f64) -> f64 {
    params.eta * s.a * (lambda * params.sigma_a_sq + params.sigma_b_sq) * remaining
        + params.sigma_sq * (s.n as f64 * params.sigma_b_sq + s.r_omega * lambda)
}

/// End-to-end SNR as a function of the splitting ratio.
#[inline]
pub fn j_lambda(params: &SystemParams, stats: &SetStatistics, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::RatioOutOfRange(lambda));
    }
    // R_Omega <= R_N, so this is non-negative up to rounding.
    let remaining = (stats.r_n - stats.r_omega * lambda).max(0.0);
    let den = denominator(params, stats, lambda, remaining);
    if den.is_nan() || den <= 0.0 {
        return Err(Error::NonPositiveDenominator(den));
    }
    Ok(params.eta * params.p * stats.b * lambda * remaining / den)
}

/// `E = eta sigma_b^2 A R_N + n sigma^2 sigma_b^2` and `F = sigma^2 R_N + n sigma^2 sigma_b^2`.
fn e_f(params: &SystemParams, s: &SetStatistics) -> (f64, f64) {
    let noise_floor = s.n as f64 * params.sigma_sq * params.sigma_b_sq;
    (
        params.eta * params.sigma_b_sq * s.a * s.r_n + noise_floor,
        params.sigma_sq * s.r_n + noise_floor,
    )
}

/// `eta sigma_b^2 A - sigma^2`; its sign decides which way the quadratic opens.
fn gap(params: &SystemParams, s: &SetStatistics) -> f64 {
    params.eta * params.sigma_b_sq * s.a - params.sigma_sq
}

fn is_equal_case(params: &SystemParams, s: &SetStatistics) -> bool {
    gap(params, s).abs() <= EQUAL_CASE_TOL * params.sigma_sq
}

pub fn kkt_roots(params: &SystemParams, stats: &SetStatistics) -> KktRoots {
    if is_equal_case(params, stats) {
        return KktRoots::Double {
            lambda4: stats.r_n / (2.0 * stats.r_omega),
        };
    }
    let (e, f) = e_f(params, stats);
    let (se, sf) = (e.sqrt(), f.sqrt());
    let g = gap(params, stats);
    let lambda2 = se * (se + sf) / (stats.r_omega * g);
    // sqrt(E)(sqrt(E) - sqrt(F)) / (R_Omega g) with E - F = R_N g cancelled.
    let lambda3 = stats.r_n * se / (stats.r_omega * (se + sf));
    KktRoots::Distinct { lambda2, lambda3 }
}

/// Derivative of [`j_lambda`] with respect to the splitting ratio.
///
/// Uses the factorized form `C R_Omega^2 g (lambda - lambda2)(lambda - lambda3)`
/// away from the equal case and the expanded quadratic otherwise.
pub fn j_lambda_derivative(params: &SystemParams, stats: &SetStatistics, lambda: f64) -> f64 {
    let remaining = stats.r_n - stats.r_omega * lambda;
    let den = denominator(params, stats, lambda, remaining);
    let c = params.eta * params.p * stats.b / (den * den);
    let r = stats.r_omega;
    if r > 0.0 {
        if let KktRoots::Distinct { lambda2, lambda3 } = kkt_roots(params, stats) {
            return c * r * r * gap(params, stats) * (lambda - lambda2) * (lambda - lambda3);
        }
    }
    let (e, _) = e_f(params, stats);
    c * (r * r * gap(params, stats) * lambda * lambda - 2.0 * r * e * lambda + stats.r_n * e)
}

/// Closed-form maximizer of [`j_lambda`] over `[0, 1]`.
pub fn optimal_lambda(params: &SystemParams, stats: &SetStatistics) -> Result<PsSolution> {
    let (star, branch) = if stats.r_omega > 0.0 {
        match kkt_roots(params, stats) {
            KktRoots::Double { lambda4 } => (lambda4, Branch::EqualCase),
            KktRoots::Distinct { lambda3, .. } => (lambda3, Branch::Generic),
        }
    } else {
        // No received power on the set: the derivative is R_N E C >= 0 everywhere.
        (f64::INFINITY, Branch::Generic)
    };
    debug_assert!(star >= 0.0, "stationary point {star} below zero");
    let (lambda_opt, branch) = if star >= 1.0 {
        (1.0, Branch::Clamped)
    } else {
        (star.max(0.0), branch)
    };
    Ok(PsSolution {
        lambda_opt,
        snr: j_lambda(params, stats, lambda_opt)?,
        branch,
    })
}

/// Brute-force maximizer of [`j_lambda`] on the grid `{0, res, 2 res, ..., 1}`.
///
/// Ties go to the smallest ratio.
pub fn grid_search_lambda(
    params: &SystemParams,
    stats: &SetStatistics,
    resolution: f64,
) -> Result<PsSolution> {
    if !(resolution > 0.0 && resolution <= 0.01) {
        return Err(Error::InvalidResolution(resolution));
    }
    let inv = 1.0 / resolution;
    let exact = (inv - inv.round()).abs() < 1e-9 * inv;
    let steps = if exact { inv.round() } else { inv.ceil() } as u64;
    let point = |k: u64| {
        if k == steps {
            1.0
        } else if exact {
            k as f64 / steps as f64
        } else {
            k as f64 * resolution
        }
    };
    let mut best = PsSolution {
        lambda_opt: 0.0,
        snr: j_lambda(params, stats, 0.0)?,
        branch: Branch::Grid,
    };
    for k in 1..=steps {
        let lambda = point(k);
        let snr = j_lambda(params, stats, lambda)?;
        if snr > best.snr {
            best.lambda_opt = lambda;
            best.snr = snr;
        }
    }
    Ok(best)
}
