use pdma::baselines::BaselineKind;
use pdma::channel::{dbm_to_mw, derive_seed, drop_users, generate_channels, SeedStream};
use pdma::harness::{run_experiment, run_trial, trial_sum_rates, ExperimentConfig, SweepPoint};
use pdma::transceiver::zf_beamformer;

fn config(scenario: BaselineKind, k: usize, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        k_list: vec![k],
        trials,
        base_seed: 11,
        ..ExperimentConfig::default()
    }
}

fn point(k: usize, p_sum_dbm: f64, mu: f64) -> SweepPoint {
    SweepPoint {
        n_users: k,
        p_sum_dbm,
        mu,
    }
}

#[test]
fn oma_rates_match_matched_filter_snr() {
    // With a ZF beamformer and one user per beam, every other beam is nulled
    // at each user, so user k sees SNR P_b |G_k f_k|^2 / s2.
    let cfg = config(BaselineKind::Oma, 3, 1);
    let pt = point(3, 30.0, 1.0);
    let dims = cfg.dims.with_users(3);
    let noise = dbm_to_mw(cfg.noise_power_dbm);
    let p_beam = dbm_to_mw(30.0) / 3.0;
    for trial in 0..20 {
        let r = run_trial(&cfg, &pt, trial).unwrap();
        let geo = drop_users(dims, &cfg.large_scale, derive_seed(11, trial, SeedStream::Geometry)).unwrap();
        let ch = generate_channels(
            dims,
            &geo,
            &cfg.large_scale,
            noise,
            derive_seed(11, trial, SeedStream::SmallScale),
        )
        .unwrap();
        let bf = zf_beamformer(&ch, &r.targets).unwrap();
        let mut total = 0.0;
        for (beam, &user) in r.targets.iter().enumerate() {
            assert!(r.pattern_used.get(beam, user));
            assert!((r.power.p[(beam, user)] - p_beam).abs() <= 1e-12 * p_beam);
            let signal = (&ch.g[user] * bf.f.column(beam)).norm_squared();
            let rate = (1.0 + p_beam * signal / noise).log2();
            assert!(
                (r.per_user_rates[user] - rate).abs() < 1e-9 * rate.max(1.0),
                "trial {trial} user {user}"
            );
            total += rate;
        }
        assert!((r.sum_rate_bits - total).abs() < 1e-9 * total);
    }
}

#[test]
fn optimized_schemes_rarely_lose_to_simple() {
    let trials = 500;
    let pt = point(5, 30.0, 1.0);
    let simple = trial_sum_rates(&config(BaselineKind::PdmaSimple, 5, trials), &pt).unwrap();
    let both = trial_sum_rates(&config(BaselineKind::PdmaOptBoth, 5, trials), &pt).unwrap();
    let wins = simple.iter().zip(&both).filter(|(s, b)| **b >= **s - 1e-9).count();
    assert!(
        wins as f64 >= 0.95 * trials as f64,
        "opt_both >= simple in {wins}/{trials}"
    );
}

#[test]
fn more_trials_extend_the_same_sequence() {
    let pt = point(5, 30.0, 0.5);
    let short = trial_sum_rates(&config(BaselineKind::PdmaOptPower, 5, 8), &pt).unwrap();
    let long = trial_sum_rates(&config(BaselineKind::PdmaOptPower, 5, 16), &pt).unwrap();
    assert_eq!(short[..], long[..8]);
}

#[test]
fn trial_results_are_internally_consistent() {
    for scenario in BaselineKind::ALL {
        let k = scenario.required_users(3).unwrap_or(5);
        let cfg = config(scenario, k, 1);
        let r = run_trial(&cfg, &point(k, 30.0, 0.5), 3).unwrap();
        let per_user: f64 = r.per_user_rates.iter().sum();
        assert!(
            (per_user - r.sum_rate_bits).abs() < 1e-9 * r.sum_rate_bits,
            "{scenario}"
        );
        assert!(r.power.total() <= dbm_to_mw(30.0) * (1.0 + 1e-9), "{scenario}");
        for b in 0..3 {
            for u in 0..k {
                if !r.pattern_used.get(b, u) {
                    assert_eq!(r.power.p[(b, u)], 0.0, "{scenario}");
                }
            }
        }
        let mut t = r.targets.clone();
        t.sort();
        t.dedup();
        assert_eq!(t.len(), 3, "{scenario}: targets distinct");
        assert_eq!(
            r.solver_report.is_some(),
            matches!(scenario, BaselineKind::PdmaOptPower | BaselineKind::PdmaOptBoth),
            "{scenario}"
        );
    }
}

#[test]
fn summary_matches_recomputed_statistics() {
    let cfg = config(BaselineKind::PdmaSimple, 4, 30);
    let rows = run_experiment(&cfg).into_result().unwrap();
    assert_eq!(rows.len(), 1);
    let xs = trial_sum_rates(&cfg, &point(4, 30.0, 1.0)).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    // t quantile, 29 degrees of freedom, 0.975
    let half = 2.045_229_642_132_703 * std / n.sqrt();
    let row = &rows[0];
    assert!((row.mean_sum_rate - mean).abs() < 1e-12 * mean);
    assert!((row.std - std).abs() < 1e-12 * std);
    assert!((row.ci95_lo - (mean - half)).abs() < 1e-9);
    assert!((row.ci95_hi - (mean + half)).abs() < 1e-9);
}
