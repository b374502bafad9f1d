//! Flat `key = value` sweep configuration files.
//!
//! Recognised keys: `p_dbw`, `eta`, `sigma_dbm`, `w_hz`, `n_antennas`, `d1`,
//! `d2`, `d3`, `sweep.var` (`d3` or `p_dbw`), `sweep.start`, `sweep.stop`,
//! `sweep.step`, `trials`, `seed`, `strategies` (comma list), `method`
//! (`greedy` or `exhaustive`, backs the `proposed` column), `output` and
//! `format` (`csv`). Unset keys take the defaults of the preset matching
//! `sweep.var`. Antenna and conversion noise are both half of `sigma_dbm`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use harvest_relay_core::units::{dbm_to_watts, dbw_to_watts};
use harvest_relay_core::{ExperimentConfig, SelectionMethod, Strategy, SweepVar};

use crate::channel_file::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub experiment: ExperimentConfig,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Distance,
    Power,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::Distance => ExperimentConfig::distance_default(),
            Preset::Power => ExperimentConfig::power_default(),
        }
    }
}

const KEYS: &[&str] = &[
    "p_dbw",
    "eta",
    "sigma_dbm",
    "w_hz",
    "n_antennas",
    "d1",
    "d2",
    "d3",
    "sweep.var",
    "sweep.start",
    "sweep.stop",
    "sweep.step",
    "trials",
    "seed",
    "strategies",
    "method",
    "output",
    "format",
];

pub fn read(path: &Path) -> anyhow::Result<CliConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config file {}: {e}", path.display()))?;
    Ok(parse(&text, &path.display().to_string())?)
}

pub fn parse(text: &str, source_name: &str) -> Result<CliConfig, ParseError> {
    let err = |line: usize, field: &str, message: String| ParseError {
        source_name: source_name.to_owned(),
        line,
        field: field.to_owned(),
        message,
    };

    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(i + 1, "syntax", format!("expected `key = value`, found `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(err(i + 1, k, format!("unknown key; valid keys: {}", KEYS.join(", "))));
        }
        if let Some((prev, _, _)) = pairs.iter().find(|(_, pk, _)| *pk == k) {
            return Err(err(i + 1, k, format!("duplicate key (first set on line {prev})")));
        }
        pairs.push((i + 1, k, v));
    }

    let get = |key: &str| pairs.iter().find(|(_, k, _)| *k == key).map(|&(l, _, v)| (l, v));
    fn num<T: FromStr>(
        err: &dyn Fn(usize, &str, String) -> ParseError,
        line: usize,
        key: &str,
        v: &str,
    ) -> Result<T, ParseError> {
        v.parse()
            .map_err(|_| err(line, key, format!("`{v}` is not a valid value")))
    }

    let var = match get("sweep.var") {
        None => SweepVar::PDbw,
        Some((_, "d3")) => SweepVar::D3,
        Some((_, "p_dbw")) => SweepVar::PDbw,
        Some((l, v)) => return Err(err(l, "sweep.var", format!("`{v}` is not one of d3, p_dbw"))),
    };
    let preset = match var {
        SweepVar::D3 => Preset::Distance,
        SweepVar::PDbw => Preset::Power,
    };
    let mut cfg = preset.config();
    let mut output = None;

    for &(l, k, v) in &pairs {
        let f = |x: &str| num::<f64>(&err, l, k, x);
        match k {
            "p_dbw" => cfg.params.p = dbw_to_watts(f(v)?),
            "eta" => cfg.params.eta = f(v)?,
            "sigma_dbm" => {
                let s = dbm_to_watts(f(v)?);
                cfg.params.sigma_sq = s;
                cfg.params.sigma_a_sq = s / 2.0;
                cfg.params.sigma_b_sq = s / 2.0;
            }
            "w_hz" => cfg.params.bandwidth = f(v)?,
            "n_antennas" => cfg.params.n_antennas = num(&err, l, k, v)?,
            "d1" => cfg.geometry.d1 = f(v)?,
            "d2" => cfg.geometry.d2 = f(v)?,
            "d3" => cfg.geometry.d3 = f(v)?,
            "sweep.var" => {}
            "sweep.start" => cfg.sweep.start = f(v)?,
            "sweep.stop" => cfg.sweep.stop = f(v)?,
            "sweep.step" => cfg.sweep.step = f(v)?,
            "trials" => cfg.trials = num(&err, l, k, v)?,
            "seed" => cfg.seed = num(&err, l, k, v)?,
            "strategies" => {
                cfg.strategies = v
                    .split(',')
                    .map(|t| t.parse::<Strategy>().map_err(|e| err(l, k, e.to_string())))
                    .collect::<Result<_, _>>()?;
            }
            "method" => {
                cfg.method = v
                    .parse::<SelectionMethod>()
                    .map_err(|e| err(l, k, e.to_string()))?
            }
            "output" => output = Some(PathBuf::from(v)),
            "format" if v == "csv" => {}
            "format" => return Err(err(l, k, format!("unsupported format `{v}`; only csv"))),
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.validate()
        .map_err(|e| err(text.lines().count().max(1), "config", e.to_string()))?;
    Ok(CliConfig {
        experiment: cfg,
        output,
    })
}
