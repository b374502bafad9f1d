//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use harvest_relay_core::experiments::{
    run_sweep, summarize, sweep_trials, trial_rng, write_csv, ExperimentConfig, SweepPoint,
};
use harvest_relay_core::verify::{random_instance_with, run_suite, Suite, SuiteReport};
use harvest_relay_core::{exhaustive_select, greedy_select, Strategy};

const SEED: u64 = 20240601;

struct Outcome {
    id: &'static str,
    title: &'static str,
    passed: bool,
    details: Vec<String>,
    elapsed: Duration,
    budget: Option<Duration>,
}

fn timed<F: FnOnce() -> (bool, Vec<String>)>(
    id: &'static str,
    title: &'static str,
    budget: Option<Duration>,
    f: F,
) -> Outcome {
    let start = Instant::now();
    let (ok, details) = f();
    let elapsed = start.elapsed();
    let within = budget.is_none_or(|b| elapsed <= b);
    Outcome {
        id,
        title,
        passed: ok && within,
        details,
        elapsed,
        budget,
    }
}

fn suite(kind: Suite, instances: usize) -> (bool, Vec<String>) {
    let report: SuiteReport = run_suite(kind, instances, SEED).expect("suite runs");
    let mut lines: Vec<String> = report.checks.iter().map(|c| c.to_string()).collect();
    lines.extend(report.notes.iter().cloned());
    (report.passed(), lines)
}

fn criterion_complexity() -> (bool, Vec<String>) {
    let n = 10;
    let instances = 500;
    let (mut ex_bad, mut gr_bad, mut gr_max) = (0, 0, 0);
    for i in 0..instances {
        let inst = random_instance_with(&mut trial_rng(SEED, i), n);
        let ex = exhaustive_select(&inst.params, &inst.channel, &inst.rho).unwrap();
        let gr = greedy_select(&inst.params, &inst.channel, &inst.rho).unwrap();
        ex_bad += usize::from(ex.evaluations != 1023);
        gr_bad += usize::from(gr.evaluations > 55);
        gr_max = gr_max.max(gr.evaluations);
    }
    (
        ex_bad == 0 && gr_bad == 0,
        vec![format!(
            "{instances} instances at N=10: exhaustive != 1023 on {ex_bad}; greedy > 55 on {gr_bad} (max {gr_max})"
        )],
    )
}

fn column(cfg: &ExperimentConfig, s: Strategy) -> usize {
    cfg.strategies.iter().position(|&x| x == s).expect("strategy requested")
}

/// Counts trials where `hi` falls below `lo`.
fn violations(points: &[SweepPoint], hi: usize, lo: usize) -> usize {
    points
        .iter()
        .flat_map(|p| &p.trials)
        .filter(|t| t[hi].rate < t[lo].rate)
        .count()
}

fn criterion_power_sweep() -> (bool, Vec<String>) {
    let cfg = ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::power_default()
    };
    assert_eq!((cfg.geometry.d1, cfg.geometry.d2, cfg.geometry.d3), (5.0, 10.0, 15.0));
    assert_eq!((cfg.sweep.start, cfg.sweep.stop, cfg.trials), (0.0, 20.0, 1000));
    let points = sweep_trials(&cfg).expect("sweep runs");
    let [gr, ex, ps, pas] =
        [Strategy::Greedy, Strategy::Exhaustive, Strategy::PurePs, Strategy::PureAs].map(|s| column(&cfg, s));
    let total: usize = points.iter().map(|p| p.trials.len()).sum();

    let pairs = [
        ("exhaustive >= greedy", ex, gr),
        ("exhaustive >= pure_ps", ex, ps),
        ("exhaustive >= pure_as", ex, pas),
        ("greedy >= pure_ps", gr, ps),
        ("greedy >= pure_as", gr, pas),
    ];
    let mut details = Vec::new();
    let mut chain_ok = true;
    for (name, hi, lo) in pairs {
        let v = violations(&points, hi, lo);
        chain_ok &= v == 0;
        details.push(format!("(a) {name}: {v} violations in {total} trials"));
    }

    let mut min_ratio = f64::INFINITY;
    for p in &points {
        let row = summarize(p, &cfg.strategies);
        let ratio = row.columns[gr].mean_rate / row.columns[ex].mean_rate;
        min_ratio = min_ratio.min(ratio);
        details.push(format!(
            "    P = {:>4} dBW  greedy {:.6e}  exhaustive {:.6e}  pure_ps {:.6e}  pure_as {:.6e}  ratio {:.6}",
            p.value,
            row.columns[gr].mean_rate,
            row.columns[ex].mean_rate,
            row.columns[ps].mean_rate,
            row.columns[pas].mean_rate,
            ratio
        ));
    }
    let ratio_ok = min_ratio >= 0.98;
    details.push(format!(
        "(a) {}  (b) {}: min mean greedy/exhaustive rate ratio {min_ratio:.6} (need >= 0.98)",
        if chain_ok { "PASS" } else { "FAIL" },
        if ratio_ok { "PASS" } else { "FAIL" },
    ));
    (chain_ok && ratio_ok, details)
}

fn criterion_distance_sweep() -> (bool, Vec<String>) {
    let cfg = ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::distance_default()
    };
    assert_eq!((cfg.geometry.d1, cfg.sweep.start, cfg.sweep.stop, cfg.trials), (1.0, 2.0, 20.0, 1000));
    assert_eq!(cfg.params.p, 10.0);
    let rows = run_sweep(&cfg).expect("sweep runs");
    let [prop, af, direct] = [Strategy::Proposed, Strategy::Af, Strategy::Direct].map(|s| column(&cfg, s));
    let mut ok = true;
    let mut details = vec!["collinear relay (d2 = d3 - d1); AF relay and source each at P/2".to_string()];
    for r in &rows {
        let (p, a, d) = (r.columns[prop].mean_rate, r.columns[af].mean_rate, r.columns[direct].mean_rate);
        let row_ok = p > a && p > d;
        ok &= row_ok;
        details.push(format!(
            "    d3 = {:>4} m  proposed {p:.6e}  af {a:.6e}  direct {d:.6e}  {}",
            r.sweep_value,
            if row_ok { "ok" } else { "VIOLATION" }
        ));
    }
    (ok, details)
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let rows = run_sweep(cfg).expect("sweep runs");
    let mut buf = Vec::new();
    write_csv(&mut buf, &cfg.strategies, &rows).unwrap();
    buf
}

fn criterion_determinism() -> (bool, Vec<String>) {
    let distance = ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::distance_default()
    };
    let power = ExperimentConfig {
        seed: SEED,
        trials: 100,
        strategies: Strategy::ALL.to_vec(),
        ..ExperimentConfig::power_default()
    };
    let mut ok = true;
    let mut details = Vec::new();
    for (name, cfg) in [("distance sweep", distance), ("power sweep", power)] {
        let (a, b) = (csv_bytes(&cfg), csv_bytes(&cfg));
        ok &= a == b && !a.is_empty();
        details.push(format!("{name}: {} bytes, identical = {}", a.len(), a == b));
    }
    (ok, details)
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let outcomes = [
        timed("1", "Closed-form ratio vs grid search", Some(secs(30)), || suite(Suite::Theorem1, 1000)),
        timed("2", "Concavity in the splitting ratio", Some(secs(10)), || suite(Suite::Concavity, 200)),
        timed("3", "Relay-gain SNR equals reduced objective", None, || suite(Suite::Equivalence, 1000)),
        timed("4", "Stationary-point properties", None, || suite(Suite::Roots, 10_000)),
        timed("5", "Evaluation counts", None, criterion_complexity),
        timed("6", "Power sweep: dominance and near-optimality", Some(secs(300)), criterion_power_sweep),
        timed("7", "Distance sweep: beats AF and direct", Some(secs(300)), criterion_distance_sweep),
        timed("8", "Byte-identical reruns", None, criterion_determinism),
    ];

    let mut failed = 0;
    for o in &outcomes {
        let budget = o
            .budget
            .map(|b| format!(" (budget {}s)", b.as_secs()))
            .unwrap_or_default();
        println!(
            "[{}] criterion {}: {} [{:.1}s{}]",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            budget
        );
        for d in &o.details {
            println!("        {d}");
        }
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
