//! Choice of the forwarding antenna set.
//!
//! Every candidate set is scored by its optimal splitting ratio
//! ([`optimal_lambda`]). [`exhaustive_select`] scores all `2^N - 1` non-empty
//! subsets; [`greedy_select`] grows the set one antenna per stage and stops
//! as soon as the best stage SNR drops, scoring at most `N (N + 1) / 2` sets.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::antenna::AntennaSet;
use crate::channel::{ChannelRealization, ReceivedPowerProfile, SystemParams};
use crate::error::{Error, Result};
use crate::ps::{optimal_lambda, stats_for_indices, PsSolution};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMethod {
    #[default]
    Greedy,
    Exhaustive,
}

impl SelectionMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SelectionMethod::Greedy => "greedy",
            SelectionMethod::Exhaustive => "exhaustive",
        }
    }

    pub fn select(
        self,
        params: &SystemParams,
        ch: &ChannelRealization,
        rho: &ReceivedPowerProfile,
    ) -> Result<SelectionResult> {
        match self {
            SelectionMethod::Greedy => greedy_select(params, ch, rho),
            SelectionMethod::Exhaustive => exhaustive_select(params, ch, rho),
        }
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "greedy" => Ok(SelectionMethod::Greedy),
            "exhaustive" => Ok(SelectionMethod::Exhaustive),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}`; expected greedy or exhaustive"
            ))),
        }
    }
}

/// Masks per parallel work item in the exhaustive search.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    /// Number of forwarding antennas after this stage.
    pub n: usize,
    /// Best SNR over the candidates of this stage.
    pub best_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub set: AntennaSet,
    pub ps: PsSolution,
    /// Number of candidate sets for which the optimal ratio was computed.
    pub evaluations: u64,
    /// Accepted greedy stages, in order. Empty for exhaustive search.
    pub stage_history: Vec<StageRecord>,
}

fn check_dims(ch: &ChannelRealization, rho: &ReceivedPowerProfile) -> Result<usize> {
    if ch.n_antennas() != rho.len() {
        return Err(Error::DimensionMismatch {
            set: rho.len(),
            channel: ch.n_antennas(),
        });
    }
    Ok(ch.n_antennas())
}

pub(crate) fn mask_indices(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Among equal sets of the same cardinality, the one whose lowest
/// differing antenna is its own comes first lexicographically.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

/// Total order used to reduce candidates: higher SNR, then fewer antennas,
/// then the lexicographically smaller index list. Being total, the
/// reduction result does not depend on how the masks were partitioned.
fn better(a: (f64, u64), b: (f64, u64)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => match a.1.count_ones().cmp(&b.1.count_ones()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => lex_less(a.1, b.1),
        },
    }
}

/// Scores every non-empty subset of `n` antennas and returns the best
/// `(score, mask)` under [`better`].
pub(crate) fn best_subset<F>(n: usize, score: F) -> Result<(f64, u64)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    debug_assert!((1..64).contains(&n));
    let last = (1u64 << n) - 1;
    let pick = |a: (f64, u64), b: (f64, u64)| if better(b, a) { b } else { a };
    let fold_range = |lo: u64, hi: u64| {
        (lo..=hi).try_fold((f64::NEG_INFINITY, 0), |acc, m| Ok::<_, Error>(pick(acc, (score(m)?, m))))
    };
    if last <= CHUNK {
        return fold_range(1, last);
    }
    (0..last.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| fold_range((c * CHUNK).max(1), ((c + 1) * CHUNK - 1).min(last)))
        .try_reduce(|| (f64::NEG_INFINITY, 0), |a, b| Ok(pick(a, b)))
}

pub fn exhaustive_select(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<SelectionResult> {
    exhaustive_select_with_limit(params, ch, rho, DEFAULT_EXHAUSTIVE_LIMIT)
}

/// Exhaustive search refusing channels with more than `limit` antennas.
pub fn exhaustive_select_with_limit(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
    limit: usize,
) -> Result<SelectionResult> {
    let n = check_dims(ch, rho)?;
    if n > limit || n > 63 {
        return Err(Error::ExhaustiveLimit {
            n_antennas: n,
            limit: limit.min(63),
        });
    }
    let r_n = rho.total();
    let best = best_subset(n, |mask| {
        let stats = stats_for_indices(ch, rho, r_n, mask_indices(mask));
        Ok(optimal_lambda(params, &stats)?.snr)
    })?;

    let set = AntennaSet::from_mask(best.1, n)?;
    let stats = stats_for_indices(ch, rho, r_n, set.indices().iter().copied());
    Ok(SelectionResult {
        ps: optimal_lambda(params, &stats)?,
        set,
        evaluations: (1u64 << n) - 1,
        stage_history: Vec::new(),
    })
}

/// Stagewise greedy selection.
///
/// Starting from no forwarding antennas, each stage tries adding every
/// remaining antenna, keeps the best (lowest index on ties), and accepts it
/// if its SNR is at least the previous stage's. The stage before the first
/// has SNR 0, so one antenna is always selected.
pub fn greedy_select(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: &ReceivedPowerProfile,
) -> Result<SelectionResult> {
    let n = check_dims(ch, rho)?;
    let r_n = rho.total();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut current: Option<PsSolution> = None;
    let mut prev_snr = 0.0;
    let mut evaluations = 0u64;
    let mut history = Vec::new();

    while chosen.len() < n {
        let mut stage_best: Option<(usize, PsSolution)> = None;
        for cand in (0..n).filter(|i| !chosen.contains(i)) {
            let stats = stats_for_indices(ch, rho, r_n, chosen.iter().copied().chain([cand]));
            let sol = optimal_lambda(params, &stats)?;
            evaluations += 1;
            if stage_best.as_ref().is_none_or(|(_, b)| sol.snr > b.snr) {
                stage_best = Some((cand, sol));
            }
        }
        let (cand, sol) = stage_best.expect("at least one candidate remains");
        if sol.snr < prev_snr {
            break;
        }
        chosen.push(cand);
        prev_snr = sol.snr;
        current = Some(sol);
        history.push(StageRecord {
            n: chosen.len(),
            best_snr: sol.snr,
        });
    }

    debug_assert!(current.is_some(), "stage one always accepts");
    // Re-score on the sorted set so equal sets score identically across searches.
    let set = AntennaSet::new(chosen, n)?;
    let stats = stats_for_indices(ch, rho, r_n, set.indices().iter().copied());
    Ok(SelectionResult {
        ps: optimal_lambda(params, &stats)?,
        set,
        evaluations,
        stage_history: history,
    })
}
