use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tbs_duality::estimators::{estimate_visibility, flatness_check};
use tbs_duality::montecarlo::*;
use tbs_duality::optics::{Block, CircuitConfig};

fn defaults() -> (SourceConfig, DetectorConfig) {
    (SourceConfig::default(), DetectorConfig::default())
}

#[test]
fn records_identical_across_worker_counts() {
    let (src, det) = defaults();
    let plan = RunPlan::default();
    let run = |workers| {
        sweep_records(
            &plan,
            &src,
            &det,
            SweepOptions {
                model: CountModel::Binomial,
                workers,
            },
        )
        .unwrap()
    };
    let one = run(Some(1));
    assert_eq!(one, run(Some(7)));
    assert_eq!(one, run(None));
    assert_eq!(one.len(), 9 * 3 * 33);
}

#[test]
fn cells_depend_only_on_their_indices() {
    // dropping phi_s values must not change the remaining cells' counts
    let (src, det) = defaults();
    let full = RunPlan::default();
    let head = RunPlan {
        phi_s_values: full.phi_s_values[..2].to_vec(),
        ..full.clone()
    };
    let a = sweep_records(&full, &src, &det, SweepOptions::default()).unwrap();
    let b = sweep_records(&head, &src, &det, SweepOptions::default()).unwrap();
    assert_eq!(&a[..b.len()], &b[..]);
}

#[test]
fn cell_rates_match_click_model() {
    let (src, det) = defaults();
    let (mut inside, mut total) = (0usize, 0usize);
    for seed in 0..100 {
        let plan = RunPlan {
            seed,
            ..Default::default()
        };
        for r in sweep_records(&plan, &src, &det, SweepOptions::default()).unwrap() {
            let cfg = CircuitConfig::new(r.phi_x, r.phi_s, r.block, DEFAULT_COHERENCE).unwrap();
            let (c1, c2) = click_probabilities(&cfg, &src, &det);
            let n = r.pulses as f64;
            for (count, c) in [(r.n1, c1), (r.n2, c2)] {
                let sigma = (c * (1.0 - c) / n).sqrt();
                total += 1;
                if (count / n - c).abs() <= 5.0 * sigma {
                    inside += 1;
                }
            }
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside} of {total}");
}

#[test]
fn photon_level_agrees_with_binomial_clicks() {
    let src = SourceConfig::default();
    // lower loss so the comparison has many clicks
    let det = DetectorConfig {
        system_loss_db: 0.0,
        dark_prob: 1e-3,
        ..Default::default()
    };
    let pulses = 400_000;
    for (phi_x, phi_s, block) in [
        (0.3, 0.7, Block::None),
        (FRAC_PI_2, FRAC_PI_2, Block::None),
        (1.0, 0.4, Block::Path0),
        (2.0, 1.2, Block::Path1),
    ] {
        let cfg = CircuitConfig::new(phi_x, phi_s, block, 0.967).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let c = simulate_point_photons(&cfg, &src, &det, pulses, &mut rng);
        let (e1, e2) = expected_counts(&cfg, &src, &det, pulses);
        for (n, e) in [(c.n1 as f64, e1), (c.n2 as f64, e2)] {
            assert!(
                (n - e).abs() < 5.0 * e.sqrt().max(1.0),
                "{cfg:?}: {n} vs {e}"
            );
        }
    }
}

#[test]
fn multi_photon_fraction_within_three_sigma() {
    let src = SourceConfig::default();
    let mut rng = stream_rng(3, StreamDomain::Photons, 0);
    let s = sample_multi_photon(&src, 2_000_000, &mut rng);
    let expect = src.multi_photon_probability();
    assert!((s.fraction() - expect).abs() < 3.0 * s.sigma(expect));
}

#[test]
fn sweep_examples_full_coherence() {
    let (src, det) = defaults();
    let plan = RunPlan {
        phi_s_values: vec![0.0, FRAC_PI_2],
        blocks: vec![Block::None],
        pulses_per_point: 100_000,
        coherence: Some(1.0),
        ..Default::default()
    };
    let scans = run_sweep(&plan, &src, &det, SweepOptions::default()).unwrap();
    let v0 = estimate_visibility(&scans[0]).unwrap().contrast;
    let v1 = estimate_visibility(&scans[1]).unwrap().contrast;
    assert!(v0.value < 3.0 * v0.sigma, "{v0:?}");
    assert!((v1.value - 1.0).abs() < 3.0 * v1.sigma.max(1e-12), "{v1:?}");

    let blocked = RunPlan {
        blocks: vec![Block::Path0],
        ..plan
    };
    for s in run_sweep(&blocked, &src, &det, SweepOptions::default()).unwrap() {
        assert!(flatness_check(&s, 3.0).unwrap().flat, "{s:?}");
    }
}

#[test]
fn switch_scenario_segments() {
    let plan = SwitchPlan::default();
    let series = run_dynamic_switch(
        &plan,
        &SourceConfig::default(),
        &DetectorConfig::default(),
        CountModel::Binomial,
        DEFAULT_SEED,
    )
    .unwrap();
    assert_eq!(series.len(), 288);
    let segs = segments(&series, plan.bucket_s);
    assert_eq!(segs.len(), 4);
    // whole-segment D1 share: balanced when closed, and also on average when open
    for s in &segs {
        let p = s.n1 / (s.n1 + s.n2);
        assert!((p - 0.5).abs() < 0.05, "{s:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_strictly_lowers_expected_counts(
        loss in 0.0f64..30.0,
        extra in 0.01f64..10.0,
        phi_x in 0.0f64..6.3,
        phi_s in 0.0f64..1.6,
    ) {
        let src = SourceConfig::default();
        let cfg = CircuitConfig::new(phi_x, phi_s, Block::None, 0.967).unwrap();
        let at = |l: f64| {
            let det = DetectorConfig { system_loss_db: l, ..Default::default() };
            let (a, b) = expected_counts(&cfg, &src, &det, 120_000);
            a + b
        };
        prop_assert!(at(loss + extra) < at(loss));
    }

    #[test]
    fn click_probability_is_a_probability(
        mu in 0.0f64..50.0, p in 0.0f64..=1.0, dark in 0.0f64..=1.0,
    ) {
        let c = click_probability(mu, p, dark);
        prop_assert!((0.0..=1.0).contains(&c));
    }
}
