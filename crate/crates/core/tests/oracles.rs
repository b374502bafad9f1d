//! Fixed-seed examples checked against formulas recomputed from scratch here.

use harvest_relay_core::baselines::{af_relay_snr, direct_rate, pure_as_rate};
use harvest_relay_core::experiments::{
    evaluate_trial, mean_and_stderr, run_sweep, sample_channel, sweep_trials, trial_rng, write_csv,
};
use harvest_relay_core::units::dbw_to_watts;
use harvest_relay_core::{
    exhaustive_select, greedy_select, optimal_lambda, rate_from_snr, received_powers, set_statistics,
    AntennaSet, Branch, ChannelRealization, ExperimentConfig, Geometry, SelectionMethod, Strategy, Sweep,
    SweepVar, SystemParams,
};

const SEED: u64 = 77;

fn draw(n: usize, seed: u64) -> (SystemParams, ChannelRealization) {
    let params = SystemParams {
        n_antennas: n,
        ..SystemParams::default()
    };
    let geometry = Geometry {
        d1: 5.0,
        d2: 10.0,
        d3: 15.0,
    };
    let ch = sample_channel(&geometry, &params, &mut trial_rng(seed, 0));
    (params, ch)
}

/// End-to-end SNR written out from the per-antenna quantities.
fn snr_oracle(p: &SystemParams, ch: &ChannelRealization, set: &[usize], lambda: f64) -> f64 {
    let rho: Vec<f64> = ch.h_sq.iter().map(|h| p.p * h + p.sigma_a_sq).collect();
    let r_all: f64 = rho.iter().sum();
    let r_fwd: f64 = set.iter().map(|&i| rho[i]).sum();
    let harvested = p.eta * (r_all - lambda * r_fwd);
    let beta_sq = harvested / (lambda * r_fwd + set.len() as f64 * p.sigma_b_sq);
    let coherent: f64 = set.iter().map(|&i| (ch.h_sq[i] * ch.g_sq[i]).sqrt()).sum();
    let a: f64 = set.iter().map(|&i| ch.g_sq[i]).sum();
    beta_sq * lambda * p.p * coherent * coherent
        / (beta_sq * a * (lambda * p.sigma_a_sq + p.sigma_b_sq) + p.sigma_sq)
}

/// Grid argmax of [`snr_oracle`]; keeps the first maximum.
fn grid_oracle(p: &SystemParams, ch: &ChannelRealization, set: &[usize], steps: u32) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..=steps {
        let lambda = f64::from(k) / f64::from(steps);
        let snr = snr_oracle(p, ch, set, lambda);
        if snr > best.1 {
            best = (lambda, snr);
        }
    }
    best
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn received_powers_match_elementwise() {
    let (params, ch) = draw(6, SEED);
    let rho = received_powers(&params, &ch);
    for (i, r) in rho.rho.iter().enumerate() {
        assert_eq!(*r, 10.0 * ch.h_sq[i] + 5e-9);
    }
}

#[test]
fn set_statistics_match_independent_sums() {
    let (params, ch) = draw(4, SEED);
    let rho = received_powers(&params, &ch);
    let set = AntennaSet::from_labels(&[2, 4], 4).unwrap();
    let s = set_statistics(&ch, &rho, &set).unwrap();
    let (x, y) = (1, 3);
    let coherent = (ch.g_sq[x] * ch.h_sq[x]).sqrt() + (ch.g_sq[y] * ch.h_sq[y]).sqrt();
    assert!(rel(s.a, ch.g_sq[x] + ch.g_sq[y]) < 1e-15);
    assert!(rel(s.b, coherent * coherent) < 1e-15);
    assert!(rel(s.r_omega, rho.rho[x] + rho.rho[y]) < 1e-15);
    assert!(rel(s.r_n, rho.rho.iter().rev().sum::<f64>()) < 1e-15);
    assert_eq!(s.n, 2);
}

#[test]
fn closed_form_ratio_matches_grid_on_three_antennas() {
    let (params, ch) = draw(3, SEED);
    let rho = received_powers(&params, &ch);
    let set = AntennaSet::full(3).unwrap();
    let sol = optimal_lambda(&params, &set_statistics(&ch, &rho, &set).unwrap()).unwrap();
    let (lambda, snr) = grid_oracle(&params, &ch, set.indices(), 1_000_000);
    assert!((sol.lambda_opt - lambda).abs() <= 1e-5, "{} vs {lambda}", sol.lambda_opt);
    assert!(rel(sol.snr, snr) <= 1e-8);
    assert_eq!(sol.branch, Branch::Generic);
}

#[test]
fn ratio_clamps_when_the_stationary_point_is_past_one() {
    // A large relay-side gain with one weak forwarding antenna among strong
    // harvesters puts the peak beyond one.
    let params = SystemParams {
        n_antennas: 3,
        ..SystemParams::default()
    };
    let ch = ChannelRealization::new(vec![0.01, 1.0, 1.0], vec![1e4, 1e-3, 1e-3], 0.0).unwrap();
    let rho = received_powers(&params, &ch);
    let set = AntennaSet::new([0], 3).unwrap();
    let sol = optimal_lambda(&params, &set_statistics(&ch, &rho, &set).unwrap()).unwrap();
    assert_eq!(sol.branch, Branch::Clamped);
    assert_eq!(sol.lambda_opt, 1.0);
    // The oracle is still rising at the right edge.
    let near = snr_oracle(&params, &ch, &[0], 1.0 - 1e-6);
    let edge = snr_oracle(&params, &ch, &[0], 1.0);
    assert!(edge > near);
    assert!(rel(sol.snr, edge) < 1e-12);
}

#[test]
fn exhaustive_beats_every_subset_on_four_antennas() {
    let (params, ch) = draw(4, SEED);
    let rho = received_powers(&params, &ch);
    let ex = exhaustive_select(&params, &ch, &rho).unwrap();
    assert_eq!(ex.evaluations, 15);
    let mut best = f64::NEG_INFINITY;
    for set in subsets(4) {
        let (_, snr) = grid_oracle(&params, &ch, &set, 100_000);
        assert!(ex.ps.snr >= snr * (1.0 - 1e-12), "{set:?}: {snr} > {}", ex.ps.snr);
        best = best.max(snr);
    }
    assert!(rel(ex.ps.snr, best) < 1e-8);
}

#[test]
fn greedy_finds_the_optimum_on_three_antennas() {
    let (params, ch) = draw(3, SEED);
    let rho = received_powers(&params, &ch);
    let ex = exhaustive_select(&params, &ch, &rho).unwrap();
    let gr = greedy_select(&params, &ch, &rho).unwrap();
    assert!(gr.ps.snr <= ex.ps.snr);
    assert_eq!(gr.set, ex.set);
    assert_eq!(gr.ps.snr, ex.ps.snr);
    assert!(gr.evaluations <= 6);
}

#[test]
fn pure_as_is_the_best_subset_at_full_information_split() {
    let (params, ch) = draw(3, SEED);
    let rho = received_powers(&params, &ch);
    let r = pure_as_rate(&params, &ch, &rho).unwrap();
    let (best_set, best) = subsets(3)
        .map(|s| {
            let snr = snr_oracle(&params, &ch, &s, 1.0);
            (s, snr)
        })
        .fold((vec![], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    assert!(rel(r.snr, best) < 1e-12);
    let (set, lambda) = r.detail.unwrap();
    assert_eq!(set.indices(), best_set.as_slice());
    assert_eq!(lambda, 1.0);
}

#[test]
fn af_and_direct_match_hand_evaluation() {
    let (params, ch) = draw(4, SEED);
    let half = params.p / 2.0;
    let mut received = 0.0;
    let mut coherent = 0.0;
    let mut relay = 0.0;
    for i in 0..4 {
        received += half * ch.h_sq[i] + params.sigma_a_sq + params.sigma_b_sq;
        coherent += (ch.h_sq[i] * ch.g_sq[i]).sqrt();
        relay += ch.g_sq[i];
    }
    let beta_sq = half / received;
    let expected = beta_sq * half * coherent.powi(2)
        / (beta_sq * relay * (params.sigma_a_sq + params.sigma_b_sq) + params.sigma_sq);
    assert!(rel(af_relay_snr(&params, &ch), expected) < 1e-13);

    let direct = direct_rate(&params, &ch);
    let snr = 10.0 * ch.h_sd_sq / 1e-8;
    assert!(rel(direct.rate, 1e6 * (1.0 + snr).ln() / std::f64::consts::LN_2) < 1e-14);
}

#[test]
fn unit_mean_fading_after_path_loss() {
    let params = SystemParams::default();
    let geometry = Geometry {
        d1: 3.0,
        d2: 7.0,
        d3: 9.0,
    };
    let mut rng = trial_rng(SEED, 0);
    let draws = 1_000_000 / params.n_antennas;
    let mut sum = 0.0;
    for _ in 0..draws {
        let ch = sample_channel(&geometry, &params, &mut rng);
        sum += ch.h_sq.iter().map(|h| h * 9.0).sum::<f64>();
    }
    let mean = sum / (draws * params.n_antennas) as f64;
    assert!((mean - 1.0).abs() <= 0.01, "mean {mean}");
}

#[test]
fn doubling_distance_quarters_the_gain() {
    let params = SystemParams::default();
    let near = Geometry {
        d1: 2.0,
        d2: 3.0,
        d3: 4.0,
    };
    let far = Geometry {
        d1: 4.0,
        d2: 6.0,
        d3: 8.0,
    };
    let a = sample_channel(&near, &params, &mut trial_rng(SEED, 3));
    let b = sample_channel(&far, &params, &mut trial_rng(SEED, 3));
    for (x, y) in a.h_sq.iter().zip(&b.h_sq).chain(a.g_sq.iter().zip(&b.g_sq)) {
        assert!(rel(*x, 4.0 * y) < 1e-15);
    }
    assert!(rel(a.h_sd_sq, 4.0 * b.h_sd_sq) < 1e-15);
}

fn single_point(var: SweepVar, value: f64, trials: usize) -> ExperimentConfig {
    let base = match var {
        SweepVar::D3 => ExperimentConfig::distance_default(),
        SweepVar::PDbw => ExperimentConfig::power_default(),
    };
    ExperimentConfig {
        trials,
        seed: SEED,
        sweep: Sweep {
            var,
            start: value,
            stop: value,
            step: 1.0,
        },
        ..base
    }
}

#[test]
fn standard_error_shrinks_with_root_trials() {
    let small = run_sweep(&single_point(SweepVar::D3, 8.0, 250)).unwrap();
    let large = run_sweep(&single_point(SweepVar::D3, 8.0, 1000)).unwrap();
    for k in 0..small[0].columns.len() {
        let ratio = small[0].columns[k].stderr / large[0].columns[k].stderr;
        assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "column {k}: ratio {ratio}");
    }
}

#[test]
fn one_trial_equals_single_shot() {
    let cfg = ExperimentConfig {
        strategies: Strategy::ALL.to_vec(),
        ..single_point(SweepVar::PDbw, 6.0, 1)
    };
    let rows = run_sweep(&cfg).unwrap();
    let params = SystemParams {
        p: dbw_to_watts(6.0),
        ..cfg.params.clone()
    };
    let ch = sample_channel(&cfg.geometry, &params, &mut trial_rng(SEED, 0));
    let rho = received_powers(&params, &ch);
    for (k, s) in cfg.strategies.iter().enumerate() {
        let snr = match s {
            Strategy::Proposed | Strategy::Greedy => greedy_select(&params, &ch, &rho).unwrap().ps.snr,
            Strategy::Exhaustive => exhaustive_select(&params, &ch, &rho).unwrap().ps.snr,
            _ => harvest_relay_core::baselines::evaluate(*s, &params, &ch, &rho).unwrap().snr,
        };
        assert_eq!(rows[0].columns[k].mean_rate, rate_from_snr(&params, snr), "{s}");
        assert_eq!(rows[0].columns[k].stderr, 0.0);
    }
    let (m, e) = mean_and_stderr(&[3.5]);
    assert_eq!((m, e), (3.5, 0.0));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = ExperimentConfig {
        trials: 40,
        seed: SEED,
        ..ExperimentConfig::power_default()
    };
    let csv = || {
        let mut buf = Vec::new();
        write_csv(&mut buf, &cfg.strategies, &run_sweep(&cfg).unwrap()).unwrap();
        buf
    };
    let first = csv();
    assert_eq!(first, csv());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with(
        "sweep_value,greedy_rate_bps,greedy_stderr,exhaustive_rate_bps,exhaustive_stderr,\
         pure_ps_rate_bps,pure_ps_stderr,pure_as_rate_bps,pure_as_stderr\n"
    ));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn rates_rise_with_source_power() {
    let cfg = ExperimentConfig {
        trials: 200,
        seed: SEED,
        strategies: Strategy::ALL.to_vec(),
        ..ExperimentConfig::power_default()
    };
    let points = sweep_trials(&cfg).unwrap();
    for w in points.windows(2) {
        for (t, (lo, hi)) in w[0].trials.iter().zip(&w[1].trials).enumerate() {
            for (a, b) in lo.iter().zip(hi) {
                assert!(b.rate >= a.rate, "trial {t} {}: {} -> {}", a.strategy, a.rate, b.rate);
            }
        }
    }
    let rows = run_sweep(&cfg).unwrap();
    for w in rows.windows(2) {
        for (a, b) in w[0].columns.iter().zip(&w[1].columns) {
            assert!(b.mean_rate >= a.mean_rate);
        }
    }
}

#[test]
fn proposed_mean_tracks_pure_ps_over_distance() {
    let cfg = ExperimentConfig {
        trials: 300,
        seed: SEED,
        strategies: vec![Strategy::Proposed, Strategy::PurePs],
        ..ExperimentConfig::distance_default()
    };
    for row in run_sweep(&cfg).unwrap() {
        let (prop, ps) = (row.columns[0].mean_rate, row.columns[1].mean_rate);
        assert!(prop >= ps, "d3 = {}: {prop} < {ps}", row.sweep_value);
    }
}

#[test]
fn proposed_column_follows_the_method() {
    let params = SystemParams::default();
    let geometry = Geometry::collinear(1.0, 6.0).unwrap();
    let strategies = [Strategy::Proposed, Strategy::Exhaustive, Strategy::Greedy];
    for t in 0..20 {
        let g = evaluate_trial(&params, &geometry, &strategies, SelectionMethod::Greedy, SEED, t).unwrap();
        let e = evaluate_trial(&params, &geometry, &strategies, SelectionMethod::Exhaustive, SEED, t).unwrap();
        assert_eq!(g[0].rate, g[2].rate);
        assert_eq!(e[0].rate, e[1].rate);
        assert_eq!(g[1], e[1]);
    }
}
