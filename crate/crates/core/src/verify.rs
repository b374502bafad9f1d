//! Randomized oracle suites.
//!
//! Each suite draws independent instances (random antenna count, source
//! power, distances, fading and forwarding subset under the default noise
//! and efficiency values) and checks the closed-form machinery against a
//! route that does not share its code path: grid search, finite
//! differences, the relay-gain form of the SNR, or exhaustive search.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::antenna::AntennaSet;
use crate::channel::{received_powers, snr_direct_form, ChannelRealization, ReceivedPowerProfile, SystemParams};
use crate::error::{Error, Result};
use crate::experiments::{sample_channel, trial_rng, Geometry};
use crate::ps::{
    grid_search_lambda, j_lambda, j_lambda_derivative, kkt_roots, optimal_lambda, set_statistics,
    Branch, KktRoots, SetStatistics,
};
use crate::selection::{exhaustive_select, greedy_select};
use crate::units::dbw_to_watts;

/// Grid step of the splitting-ratio oracle.
pub const GRID_RESOLUTION: f64 = 1e-6;
pub const LAMBDA_TOL: f64 = 1e-5;
pub const SNR_REL_TOL: f64 = 1e-8;
pub const CONCAVITY_POINTS: usize = 1000;
pub const CONCAVITY_TOL: f64 = 1e-9;
pub const EQUIVALENCE_REL_TOL: f64 = 1e-10;
pub const STATIONARITY_TOL: f64 = 1e-9;
pub const DERIVATIVE_POINTS: usize = 100;
pub const DERIVATIVE_REL_TOL: f64 = 1e-6;
/// Largest outer step of the extrapolated central difference; the step also
/// shrinks to an eighth of the distance to either end of `[0, 1]`.
pub const FD_STEP: f64 = 1e-3;
pub const RICHARDSON_LEVELS: usize = 4;
/// Rounding-noise allowance of the extrapolated quotient, in units of `eps |J| / h`.
pub const FD_NOISE_ULPS: f64 = 32.0;
pub const GREEDY_GAP_ANTENNAS: usize = 10;
pub const GREEDY_MEAN_RATIO_MIN: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct Instance {
    pub params: SystemParams,
    pub channel: ChannelRealization,
    pub rho: ReceivedPowerProfile,
    pub set: AntennaSet,
    pub stats: SetStatistics,
}

/// Draws one instance with `1..=max_antennas` antennas, `P` uniform in
/// [0, 20] dBW, `d1` in [1, 10] m, `d2` in [1, 20] m and a uniformly random
/// non-empty forwarding subset.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_antennas: usize) -> Instance {
    let n = rng.random_range(1..=max_antennas);
    let params = SystemParams {
        p: dbw_to_watts(rng.random_range(0.0..=20.0)),
        n_antennas: n,
        ..SystemParams::default()
    };
    let d1 = rng.random_range(1.0..=10.0);
    let d2 = rng.random_range(1.0..=20.0);
    let geometry = Geometry { d1, d2, d3: d1 + d2 };
    let channel = sample_channel(&geometry, &params, rng);
    let rho = received_powers(&params, &channel);
    let mask = rng.random_range(1..(1u64 << n));
    let set = AntennaSet::from_mask(mask, n).expect("mask within range");
    let stats = set_statistics(&channel, &rho, &set).expect("set within range");
    Instance {
        params,
        channel,
        rho,
        set,
        stats,
    }
}

/// Same as [`random_instance`] with exactly `n` antennas.
pub fn random_instance_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Instance {
    let mut inst = random_instance(rng, 1);
    let params = SystemParams {
        n_antennas: n,
        ..inst.params
    };
    let d1 = rng.random_range(1.0..=10.0);
    let d2 = rng.random_range(1.0..=20.0);
    let channel = sample_channel(&Geometry { d1, d2, d3: d1 + d2 }, &params, rng);
    let rho = received_powers(&params, &channel);
    inst.set = AntennaSet::full(n).expect("n >= 1");
    inst.stats = set_statistics(&channel, &rho, &inst.set).expect("full set");
    inst.params = params;
    inst.channel = channel;
    inst.rho = rho;
    inst
}

/// Pass/fail tally of one property over many samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// What `worst` measures; passing samples keep it within `tolerance`.
    pub metric: &'static str,
    pub tolerance: f64,
    pub total: u64,
    pub failures: u64,
    pub worst: f64,
}

impl Check {
    fn new(name: &'static str, metric: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            metric,
            tolerance,
            total: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, value: f64, ok: bool) {
        self.total += 1;
        if !ok {
            self.failures += 1;
        }
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
    }

    /// Records `value <= tolerance`.
    fn at_most(&mut self, value: f64) {
        self.record(value, value <= self.tolerance);
    }

    fn merge(&mut self, other: &Check) {
        self.total += other.total;
        self.failures += other.failures;
        if other.worst > self.worst || other.worst.is_nan() {
            self.worst = other.worst;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.total > 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<28} {}/{} ok   worst {} = {:.3e} (tol {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.total - self.failures,
            self.total,
            self.metric,
            self.worst,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Theorem1,
    Concavity,
    Roots,
    Equivalence,
    GreedyGap,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Theorem1,
        Suite::Concavity,
        Suite::Roots,
        Suite::Equivalence,
        Suite::GreedyGap,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Concavity => "concavity",
            Suite::Roots => "roots",
            Suite::Equivalence => "equivalence",
            Suite::GreedyGap => "greedy-gap",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.tag() == s.trim())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown suite `{s}`; valid suites: {}",
                    Suite::ALL.map(Suite::tag).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub checks: Vec<Check>,
    /// Free-form summary lines (distributions and the like).
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} ({} instances)", self.suite, self.instances)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Theorem1 => theorem1(instances, seed),
        Suite::Concavity => concavity(instances, seed),
        Suite::Roots => roots(instances, seed),
        Suite::Equivalence => equivalence(instances, seed),
        Suite::GreedyGap => greedy_gap(instances, seed),
    }
}

/// Maps each instance through `f` (in parallel) and folds the per-instance
/// checks, in instance order, into the template.
fn tally<F>(instances: usize, seed: u64, mut template: Vec<Check>, f: F) -> Result<Vec<Check>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [Check]) -> Result<()> + Sync,
{
    let empty = template.clone();
    let parts = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut checks = empty.clone();
            f(&mut trial_rng(seed, i), &mut checks)?;
            Ok(checks)
        })
        .collect::<Result<Vec<_>>>()?;
    for part in &parts {
        for (t, c) in template.iter_mut().zip(part) {
            t.merge(c);
        }
    }
    Ok(template)
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn theorem1(instances: usize, seed: u64) -> Result<SuiteReport> {
    let checks = tally(
        instances,
        seed,
        vec![
            Check::new("closed form vs grid (lambda)", "|dlambda|", LAMBDA_TOL),
            Check::new("closed form vs grid (SNR)", "rel dSNR", SNR_REL_TOL),
        ],
        |rng, c| {
            let inst = random_instance(rng, 6);
            let closed = optimal_lambda(&inst.params, &inst.stats)?;
            let grid = grid_search_lambda(&inst.params, &inst.stats, GRID_RESOLUTION)?;
            c[0].at_most((closed.lambda_opt - grid.lambda_opt).abs());
            c[1].at_most(relative(closed.snr, grid.snr));
            Ok(())
        },
    )?;
    Ok(SuiteReport {
        suite: Suite::Theorem1,
        instances,
        checks,
        notes: Vec::new(),
    })
}

/// Largest second central difference of the objective on a uniform grid.
pub fn max_second_difference(params: &SystemParams, stats: &SetStatistics, points: usize) -> Result<f64> {
    let values = (0..points)
        .map(|k| j_lambda(params, stats, k as f64 / (points - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::NEG_INFINITY, f64::max))
}

fn concavity(instances: usize, seed: u64) -> Result<SuiteReport> {
    let checks = tally(
        instances,
        seed,
        vec![Check::new("second difference <= tol", "max d2J", CONCAVITY_TOL)],
        |rng, c| {
            let inst = random_instance(rng, 6);
            c[0].at_most(max_second_difference(&inst.params, &inst.stats, CONCAVITY_POINTS)?);
            Ok(())
        },
    )?;
    Ok(SuiteReport {
        suite: Suite::Concavity,
        instances,
        checks,
        notes: Vec::new(),
    })
}

/// Central difference of the objective refined by Richardson extrapolation
/// over `RICHARDSON_LEVELS` halvings of `step`.
pub fn finite_difference(params: &SystemParams, stats: &SetStatistics, lambda: f64, step: f64) -> Result<f64> {
    let central = |h: f64| -> Result<f64> {
        Ok((j_lambda(params, stats, lambda + h)? - j_lambda(params, stats, lambda - h)?) / (2.0 * h))
    };
    let mut table: Vec<f64> = Vec::with_capacity(RICHARDSON_LEVELS);
    for level in 0..RICHARDSON_LEVELS {
        let mut next = vec![central(step / (1u32 << level) as f64)?];
        for (j, prev) in table.iter().enumerate() {
            let factor = 4f64.powi(j as i32 + 1);
            let cur = next[j];
            next.push(cur + (cur - prev) / (factor - 1.0));
        }
        table = next;
    }
    Ok(*table.last().expect("at least one level"))
}

/// Relative error of the analytic derivative against finite differences at
/// `DERIVATIVE_POINTS` interior points `(k + 1/2) / DERIVATIVE_POINTS`.
///
/// The difference quotient carries rounding noise of order `eps |J| / h`, which
/// dominates at points that land next to the stationary point. That floor is
/// subtracted before dividing by the derivative magnitude.
pub fn worst_derivative_error(params: &SystemParams, stats: &SetStatistics) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..DERIVATIVE_POINTS {
        let lambda = (k as f64 + 0.5) / DERIVATIVE_POINTS as f64;
        let step = FD_STEP.min(lambda / 8.0).min((1.0 - lambda) / 8.0);
        let analytic = j_lambda_derivative(params, stats, lambda);
        let numeric = finite_difference(params, stats, lambda, step)?;
        let noise = FD_NOISE_ULPS * f64::EPSILON * j_lambda(params, stats, lambda)?.abs() / step;
        let scale = analytic.abs().max(numeric.abs());
        if scale > 0.0 {
            worst = worst.max(((analytic - numeric).abs() - noise).max(0.0) / scale);
        }
    }
    Ok(worst)
}

fn roots(instances: usize, seed: u64) -> Result<SuiteReport> {
    let checks = tally(
        instances,
        seed,
        vec![
            Check::new("lambda2 outside [0, 1]", "min(l2, 1 - l2)", 0.0),
            Check::new("lambda3 >= 0", "-lambda3", 0.0),
            Check::new("stationary at interior opt", "|J'(lambda_opt)|", STATIONARITY_TOL),
            Check::new("J' >= 0 when clamped", "-min J'", 0.0),
            Check::new("J' vs finite differences", "rel err past FD noise", DERIVATIVE_REL_TOL),
        ],
        |rng, c| {
            let inst = random_instance(rng, 6);
            let (p, s) = (&inst.params, &inst.stats);
            if let KktRoots::Distinct { lambda2, lambda3 } = kkt_roots(p, s) {
                let depth = lambda2.min(1.0 - lambda2);
                c[0].record(depth, depth < 0.0);
                c[1].record(-lambda3, lambda3 >= 0.0);
            }
            let sol = optimal_lambda(p, s)?;
            match sol.branch {
                Branch::Clamped => {
                    let min = (0..=100)
                        .map(|k| j_lambda_derivative(p, s, k as f64 / 100.0))
                        .fold(f64::INFINITY, f64::min);
                    c[3].record(-min, min >= 0.0);
                }
                _ if sol.lambda_opt > 0.0 && sol.lambda_opt < 1.0 => {
                    c[2].at_most(j_lambda_derivative(p, s, sol.lambda_opt).abs());
                }
                _ => {}
            }
            c[4].at_most(worst_derivative_error(p, s)?);
            Ok(())
        },
    )?;
    Ok(SuiteReport {
        suite: Suite::Roots,
        instances,
        checks,
        notes: Vec::new(),
    })
}

fn equivalence(instances: usize, seed: u64) -> Result<SuiteReport> {
    let checks = tally(
        instances,
        seed,
        vec![Check::new("relay-gain SNR == objective", "rel diff", EQUIVALENCE_REL_TOL)],
        |rng, c| {
            let inst = random_instance(rng, 6);
            let lambda = rng.random_range(0.0..=1.0);
            let direct = snr_direct_form(&inst.params, &inst.channel, &inst.rho, &inst.set, lambda)?;
            let reduced = j_lambda(&inst.params, &inst.stats, lambda)?;
            c[0].at_most(relative(direct, reduced));
            Ok(())
        },
    )?;
    Ok(SuiteReport {
        suite: Suite::Equivalence,
        instances,
        checks,
        notes: Vec::new(),
    })
}

fn greedy_gap(instances: usize, seed: u64) -> Result<SuiteReport> {
    let n = GREEDY_GAP_ANTENNAS;
    let results = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance_with(&mut trial_rng(seed, i), n);
            let ex = exhaustive_select(&inst.params, &inst.channel, &inst.rho)?;
            let gr = greedy_select(&inst.params, &inst.channel, &inst.rho)?;
            Ok((ex, gr))
        })
        .collect::<Result<Vec<_>>>()?;

    let bound = (n * (n + 1) / 2) as u64;
    let mut dominance = Check::new("greedy SNR <= exhaustive", "rel excess", 0.0);
    let mut ex_count = Check::new("exhaustive evaluations", "|evals - (2^N-1)|", 0.0);
    let mut gr_count = Check::new("greedy evaluations <= N(N+1)/2", "evals - bound", 0.0);
    let mut ratios = Vec::with_capacity(results.len());
    for (ex, gr) in &results {
        dominance.at_most((gr.ps.snr - ex.ps.snr) / ex.ps.snr.max(f64::MIN_POSITIVE));
        ex_count.at_most((ex.evaluations as f64 - ((1u64 << n) - 1) as f64).abs());
        gr_count.at_most(gr.evaluations as f64 - bound as f64);
        ratios.push(if ex.ps.snr > 0.0 { gr.ps.snr / ex.ps.snr } else { 1.0 });
    }
    let mut mean_check = Check::new("mean SNR ratio >= 0.95", "-(mean ratio)", -GREEDY_MEAN_RATIO_MIN);
    let mut notes = Vec::new();
    if !ratios.is_empty() {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        mean_check.at_most(-mean);
        ratios.sort_by(f64::total_cmp);
        let q = |p: f64| ratios[((ratios.len() - 1) as f64 * p).round() as usize];
        let optimal = results.iter().filter(|(ex, gr)| ex.set == gr.set).count();
        notes.push(format!(
            "greedy/exhaustive SNR ratio: mean {mean:.6}  min {:.6}  p5 {:.6}  median {:.6}",
            q(0.0),
            q(0.05),
            q(0.5)
        ));
        notes.push(format!(
            "greedy found the exhaustive optimum on {optimal}/{} instances",
            ratios.len()
        ));
    }
    Ok(SuiteReport {
        suite: Suite::GreedyGap,
        instances,
        checks: vec![dominance, ex_count, gr_count, mean_check],
        notes,
    })
}
