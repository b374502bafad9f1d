//! `harvest-relay`: optimize a single channel, reproduce the rate sweeps, or
//! run the randomized verification suites.

mod channel_file;
mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use harvest_relay_core::experiments::{run_sweep, write_csv};
use harvest_relay_core::units::{dbm_to_watts, dbw_to_watts, linear_to_db};
use harvest_relay_core::verify::{run_suite, Suite};
use harvest_relay_core::{
    exhaustive_select_with_limit, greedy_select, rate_from_snr, received_powers, Error,
    SystemParams,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_GUARD: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(name = "harvest-relay", version, about = "Power splitting and antenna selection for energy-harvesting relays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the forwarding set and splitting ratio for one channel file.
    Optimize(OptimizeArgs),
    /// Run a Monte-Carlo sweep and write a CSV table.
    Sweep(SweepArgs),
    /// Run randomized oracle checks of the optimizer.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Exhaustive,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    /// Channel file (`N=<n>`, n lines `h_sq g_sq`, `h_sd_sq=<gain>`).
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    method: Method,
    /// Source power, dBW.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    p_dbw: f64,
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
    /// Destination noise, dBm. Relay antenna and conversion noise are half of it each.
    #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
    sigma_dbm: f64,
    /// Bandwidth, Hz.
    #[arg(long, default_value_t = 1e6)]
    w_hz: f64,
    /// Largest antenna count accepted by `--method exhaustive`.
    #[arg(long, default_value_t = harvest_relay_core::selection::DEFAULT_EXHAUSTIVE_LIMIT)]
    exhaustive_limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    /// Rate versus source-destination distance.
    Distance,
    /// Rate versus source power.
    Power,
}

#[derive(clap::Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct SweepArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path. Defaults to `<name>.csv` in $HARVEST_RELAY_OUT_DIR (or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HARVEST_RELAY_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Theorem1,
    Concavity,
    Roots,
    Equivalence,
    GreedyGap,
    All,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Instances per suite. Defaults: theorem1 1000, concavity 200, roots 10000,
    /// equivalence 1000, greedy-gap 200.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

/// An error paired with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = if error.downcast_ref::<channel_file::ParseError>().is_some() {
            EXIT_PARSE
        } else if matches!(error.downcast_ref::<Error>(), Some(Error::ExhaustiveLimit { .. })) {
            EXIT_GUARD
        } else {
            EXIT_FAILURE
        };
        Failure { code, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(args) => optimize(args),
        Command::Sweep(args) => sweep(args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn optimize(args: OptimizeArgs) -> Result<(), Failure> {
    let ch = channel_file::read(&args.channel)?;
    let sigma_sq = dbm_to_watts(args.sigma_dbm);
    let params = SystemParams {
        p: dbw_to_watts(args.p_dbw),
        eta: args.eta,
        sigma_sq,
        sigma_a_sq: sigma_sq / 2.0,
        sigma_b_sq: sigma_sq / 2.0,
        bandwidth: args.w_hz,
        n_antennas: ch.n_antennas(),
    };
    params.validate()?;
    let rho = received_powers(&params, &ch);
    let (name, sel) = match args.method {
        Method::Greedy => ("greedy", greedy_select(&params, &ch, &rho)?),
        Method::Exhaustive => (
            "exhaustive",
            exhaustive_select_with_limit(&params, &ch, &rho, args.exhaustive_limit)?,
        ),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "method       {name}")?;
    writeln!(out, "antennas     {}", ch.n_antennas())?;
    writeln!(out, "set          {}", sel.set)?;
    writeln!(out, "lambda_opt   {}", sel.ps.lambda_opt)?;
    writeln!(out, "branch       {}", sel.ps.branch.as_str())?;
    writeln!(out, "snr          {}", sel.ps.snr)?;
    writeln!(out, "snr_db       {:.6}", linear_to_db(sel.ps.snr))?;
    writeln!(out, "rate_bps     {}", rate_from_snr(&params, sel.ps.snr))?;
    writeln!(out, "evaluations  {}", sel.evaluations)?;
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let (cli_cfg, name) = match (&args.config, args.preset) {
        (Some(path), _) => {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sweep".into());
            (config::read(path)?, name)
        }
        (None, Some(p)) => {
            let (preset, name) = match p {
                PresetArg::Distance => (config::Preset::Distance, "distance"),
                PresetArg::Power => (config::Preset::Power, "power"),
            };
            let cfg = config::CliConfig {
                experiment: preset.config(),
                output: None,
            };
            (cfg, name.to_owned())
        }
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    let mut exp = cli_cfg.experiment;
    if let Some(seed) = args.seed {
        exp.seed = seed;
    }
    if let Some(trials) = args.trials {
        exp.trials = trials;
    }
    let path = args
        .out
        .or(cli_cfg.output)
        .unwrap_or_else(|| args.out_dir.unwrap_or_default().join(format!("{name}.csv")));

    let rows = run_sweep(&exp)?;
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, &exp.strategies, &rows)?;
    w.flush()?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::Theorem1 => vec![Suite::Theorem1],
        SuiteArg::Concavity => vec![Suite::Concavity],
        SuiteArg::Roots => vec![Suite::Roots],
        SuiteArg::Equivalence => vec![Suite::Equivalence],
        SuiteArg::GreedyGap => vec![Suite::GreedyGap],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut all_passed = true;
    for suite in suites {
        let instances = args.instances.unwrap_or(match suite {
            Suite::Theorem1 | Suite::Equivalence => 1000,
            Suite::Concavity | Suite::GreedyGap => 200,
            Suite::Roots => 10_000,
        });
        let report = run_suite(suite, instances, args.seed)?;
        print!("{report}");
        all_passed &= report.passed();
    }
    if all_passed {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            error: anyhow::anyhow!("verification failed"),
        })
    }
}
