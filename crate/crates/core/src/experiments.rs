//! Monte-Carlo sweeps over Rayleigh-faded channels.
//!
//! Each link gain is `X / d^2` with `X` a unit-mean exponential draw.
//! Trial `t` always draws from ChaCha stream `t` of the configured seed, so
//! within a trial every strategy and every sweep point sees the same fading
//! (common random numbers), and trials can run in any order.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::baselines::{evaluate_with, RateReport, Strategy};
use crate::channel::{received_powers, ChannelRealization, SystemParams};
use crate::error::{Error, Result};
use crate::selection::SelectionMethod;
use crate::units::dbw_to_watts;

/// Distances in meters: source-relay, relay-destination, source-destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} = {d} must be > 0")));
            }
        }
        Ok(())
    }

    /// Collinear placement with the relay between source and destination.
    pub fn collinear(d1: f64, d3: f64) -> Result<Self> {
        if d3.is_nan() || d3 <= d1 {
            return Err(Error::InvalidGeometry(format!(
                "d3 = {d3} must exceed d1 = {d1} for a relay between source and destination"
            )));
        }
        let g = Self { d1, d2: d3 - d1, d3 };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Source-destination distance, relay collinear at `d1` from the source.
    D3,
    /// Source power in dBW.
    PDbw,
}

impl SweepVar {
    pub fn key(self) -> &'static str {
        match self {
            SweepVar::D3 => "d3",
            SweepVar::PDbw => "p_dbw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    /// Grid `start, start + step, ...` up to and including `stop` (within rounding).
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step > 0.0 && self.stop >= self.start) {
            return Err(Error::InvalidConfig(format!(
                "sweep needs finite start <= stop and step > 0 (got {} .. {} step {})",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    /// Fixed distances. A `d3` sweep overrides `d2` and `d3`.
    pub geometry: Geometry,
    pub trials: usize,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    /// Antenna selection behind the `proposed` column.
    pub method: SelectionMethod,
    pub sweep: Sweep,
}

impl ExperimentConfig {
    /// Rate versus source-destination distance: `d1 = 1`, `d3` from 2 to 20 m,
    /// `P = 10 dBW`.
    pub fn distance_default() -> Self {
        Self {
            params: SystemParams::default(),
            geometry: Geometry { d1: 1.0, d2: 1.0, d3: 2.0 },
            trials: 1000,
            seed: 1,
            strategies: vec![Strategy::Proposed, Strategy::Af, Strategy::Direct],
            method: SelectionMethod::Greedy,
            sweep: Sweep {
                var: SweepVar::D3,
                start: 2.0,
                stop: 20.0,
                step: 1.0,
            },
        }
    }

    /// Rate versus source power at `d1 = 5`, `d2 = 10`, `d3 = 15`, `P` from 0 to 20 dBW.
    pub fn power_default() -> Self {
        Self {
            params: SystemParams::default(),
            geometry: Geometry { d1: 5.0, d2: 10.0, d3: 15.0 },
            trials: 1000,
            seed: 1,
            strategies: vec![
                Strategy::Greedy,
                Strategy::Exhaustive,
                Strategy::PurePs,
                Strategy::PureAs,
            ],
            method: SelectionMethod::Greedy,
            sweep: Sweep {
                var: SweepVar::PDbw,
                start: 0.0,
                stop: 20.0,
                step: 2.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.geometry.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("no strategies requested".into()));
        }
        for (k, s) in self.strategies.iter().enumerate() {
            if self.strategies[..k].contains(s) {
                return Err(Error::InvalidConfig(format!("strategy `{s}` listed twice")));
            }
        }
        self.sweep.points()?;
        Ok(())
    }
}

/// Random stream for one Monte-Carlo trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `N` S->R gains, then `N` R->D gains, then the S->D gain.
pub fn sample_channel<R: Rng + ?Sized>(
    geometry: &Geometry,
    params: &SystemParams,
    rng: &mut R,
) -> ChannelRealization {
    let n = params.n_antennas;
    let mut draw = |d: f64| -> f64 { rng.sample::<f64, _>(Exp1) / (d * d) };
    let h_sq = (0..n).map(|_| draw(geometry.d1)).collect();
    let g_sq = (0..n).map(|_| draw(geometry.d2)).collect();
    let h_sd_sq = draw(geometry.d3);
    ChannelRealization { h_sq, g_sq, h_sd_sq }
}

/// Evaluates every strategy on the channel of trial `trial`.
pub fn evaluate_trial(
    params: &SystemParams,
    geometry: &Geometry,
    strategies: &[Strategy],
    method: SelectionMethod,
    seed: u64,
    trial: u64,
) -> Result<Vec<RateReport>> {
    let ch = sample_channel(geometry, params, &mut trial_rng(seed, trial));
    let rho = received_powers(params, &ch);
    let mut out: Vec<RateReport> = Vec::with_capacity(strategies.len());
    for &s in strategies {
        // The proposed column duplicates whichever search backs it.
        let backing = |x: Strategy| match x {
            Strategy::Proposed => match method {
                SelectionMethod::Greedy => Strategy::Greedy,
                SelectionMethod::Exhaustive => Strategy::Exhaustive,
            },
            other => other,
        };
        let twin = out.iter().find(|r| backing(r.strategy) == backing(s));
        let report = match twin {
            Some(r) => RateReport { strategy: s, ..r.clone() },
            None => evaluate_with(s, method, params, &ch, &rho)?,
        };
        out.push(report);
    }
    Ok(out)
}

/// Per-trial results at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub params: SystemParams,
    pub geometry: Geometry,
    /// `trials[t][k]` is strategy `k` on trial `t`.
    pub trials: Vec<Vec<RateReport>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub strategy: Strategy,
    /// Mean achievable rate, bits per second.
    pub mean_rate: f64,
    /// Standard error of the mean; zero for a single trial.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub columns: Vec<ColumnStats>,
    pub trials: usize,
}

impl SweepRow {
    pub fn mean(&self, strategy: Strategy) -> Option<f64> {
        self.columns
            .iter()
            .find(|c| c.strategy == strategy)
            .map(|c| c.mean_rate)
    }
}

fn point_setup(config: &ExperimentConfig, value: f64) -> Result<(SystemParams, Geometry)> {
    match config.sweep.var {
        SweepVar::D3 => Ok((
            config.params.clone(),
            Geometry::collinear(config.geometry.d1, value)?,
        )),
        SweepVar::PDbw => Ok((config.params.with_power(dbw_to_watts(value)), config.geometry)),
    }
}

/// Runs every trial at every sweep point, keeping the per-trial reports.
pub fn sweep_trials(config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let points = config.sweep.points()?;
    let setups = points
        .iter()
        .map(|&v| point_setup(config, v))
        .collect::<Result<Vec<_>>>()?;
    points
        .into_iter()
        .zip(setups)
        .map(|(value, (params, geometry))| {
            let trials = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| {
                    evaluate_trial(&params, &geometry, &config.strategies, config.method, config.seed, t)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepPoint {
                value,
                params,
                geometry,
                trials,
            })
        })
        .collect()
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(point: &SweepPoint, strategies: &[Strategy]) -> SweepRow {
    let columns = strategies
        .iter()
        .enumerate()
        .map(|(k, &strategy)| {
            let rates: Vec<f64> = point.trials.iter().map(|t| t[k].rate).collect();
            let (mean_rate, stderr) = mean_and_stderr(&rates);
            ColumnStats {
                strategy,
                mean_rate,
                stderr,
            }
        })
        .collect();
    SweepRow {
        sweep_value: point.value,
        columns,
        trials: point.trials.len(),
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    Ok(sweep_trials(config)?
        .iter()
        .map(|p| summarize(p, &config.strategies))
        .collect())
}

/// Sweeps the source-destination distance with the relay collinear at `d1`.
pub fn run_distance_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if config.sweep.var != SweepVar::D3 {
        return Err(Error::InvalidConfig("distance sweep requires sweep.var = d3".into()));
    }
    run_sweep(config)
}

/// Sweeps the source power (dBW) at fixed geometry.
pub fn run_power_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if config.sweep.var != SweepVar::PDbw {
        return Err(Error::InvalidConfig("power sweep requires sweep.var = p_dbw".into()));
    }
    run_sweep(config)
}

/// Writes `sweep_value,<tag>_rate_bps,<tag>_stderr,...` rows. Numbers use the
/// shortest decimal form that round-trips exactly.
pub fn write_csv<W: Write>(mut out: W, strategies: &[Strategy], rows: &[SweepRow]) -> io::Result<()> {
    write!(out, "sweep_value")?;
    for s in strategies {
        write!(out, ",{0}_rate_bps,{0}_stderr", s.tag())?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{}", row.sweep_value)?;
        for c in &row.columns {
            write!(out, ",{},{}", c.mean_rate, c.stderr)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
