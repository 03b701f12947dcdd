mod common;

use common::*;
use fso_core::sim::{load_config, parse_config, run_sweep, OutputFormat, RunConfig};
use std::path::Path;

fn small() -> RunConfig {
    RunConfig {
        trials: 2,
        bits_per_trial: 1280,
        ..RunConfig::default()
    }
}

#[test]
fn shipped_config_equals_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    assert_eq!(load_config(&path).unwrap(), RunConfig::default());
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = small();
    cfg.scenarios[0].fading_block = Some(64);
    cfg.system.amplifier_noise_figure_db = Some(4.5);
    cfg.metrics.target_ber = 1e-4;
    assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
}

#[test]
fn twenty_cells_and_their_files() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let res = sweep_into(&cfg, 2, dir.path()).unwrap();
    assert_eq!(res.records.len(), 20);

    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "condition,distance_km,ber,q_linear,osnr_db,evm_pct,n_bits,seed"
    );
    assert_eq!(lines.count(), 20);

    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("constellation_")).count(), 20);
    assert_eq!(names.iter().filter(|n| n.starts_with("eye_")).count(), 20);
    assert!(names.iter().any(|n| n == "subcarrier_map.txt"));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], cfg.master_seed);
    assert!((meta["launch_power_dbm"].as_f64().unwrap() - 35.0).abs() < 1e-9);

    let power = std::fs::read_to_string(dir.path().join("power_vs_distance.csv")).unwrap();
    let rows: Vec<Vec<String>> = power
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    for pair in rows.windows(2).filter(|w| w[0][0] == w[1][0]) {
        let (a, b): (f64, f64) = (pair[0][3].parse().unwrap(), pair[1][3].parse().unwrap());
        assert!(b < a, "{pair:?}");
    }
}

#[test]
fn json_format() {
    let cfg = RunConfig {
        format: OutputFormat::Json,
        distances_km: vec![2.0],
        ..small()
    };
    let dir = tempfile::tempdir().unwrap();
    sweep_into(&cfg, 1, dir.path()).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn byte_identical_across_workers_and_repeats() {
    let cfg = RunConfig {
        distances_km: vec![1.0, 3.0],
        ..small()
    };
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, w) in dirs.iter().zip([1, 3, 3]) {
        sweep_into(&cfg, w, d.path()).unwrap();
    }
    assert!(differing_files(dirs[0].path(), dirs[1].path()).unwrap().is_empty());
    assert!(differing_files(dirs[1].path(), dirs[2].path()).unwrap().is_empty());
}

#[test]
fn seed_changes_results() {
    let a = run_sweep(&RunConfig {
        distances_km: vec![2.0],
        ..small()
    })
    .unwrap();
    let b = run_sweep(&RunConfig {
        distances_km: vec![2.0],
        master_seed: 7,
        ..small()
    })
    .unwrap();
    assert_ne!(a.records[3].ber, b.records[3].ber);
    assert_ne!(a.records[0].seed, b.records[0].seed);
}

#[test]
fn trend_checker_flags_inversions() {
    let cfg = RunConfig {
        distances_km: vec![1.0, 4.0],
        ..small()
    };
    let mut res = run_sweep(&cfg).unwrap();
    assert!(ac9_trends(&cfg, &res).is_ok());
    res.records[1].ber = 0.0;
    res.records[0].ber = 0.4;
    res.records[0].ber_std_err = 1e-3;
    res.records[1].ber_std_err = 1e-3;
    assert!(ac9_trends(&cfg, &res).is_err());
}

#[test]
fn noiseless_calm_link_is_error_free() {
    let mut cfg = small();
    cfg.system.receiver.noise = false;
    for s in &mut cfg.scenarios {
        s.turbulence = false;
    }
    let res = run_sweep(&cfg).unwrap();
    for r in &res.records {
        assert_eq!(r.n_errors, 0, "{} {} km", r.condition, r.distance_km);
        assert!(r.osnr_saturated);
    }
}

mod generated {
    use fso_core::phy::LoPhase;
    use fso_core::sim::{parse_config, OutputFormat, RunConfig, ScenarioConfig};
    use proptest::prelude::*;

    fn scenario() -> impl Strategy<Value = ScenarioConfig> {
        (
            "[a-z][a-z ]{0,12}",
            0.0f64..40.0,
            0.01f64..0.3,
            0.05f64..0.5,
            0.1f64..5.0,
            any::<bool>(),
            1e-16f64..1e-13,
            proptest::option::of(1usize..5000),
            0.0f64..6.0,
        )
            .prop_map(|(label, alpha, dt, dr, th, turb, cn2, block, imp)| ScenarioConfig {
                label,
                alpha_db_per_km: alpha,
                tx_aperture_m: dt,
                rx_aperture_m: dr,
                divergence_mrad: th,
                turbulence: turb,
                cn2,
                implementation_loss_db: imp,
                fading_block: block,
                ..ScenarioConfig::from_weather(&fso_core::linkbudget::WeatherAttenuation::new("x", 1.0).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip(
            seed in any::<u64>(),
            trials in 1usize..500,
            bits in 1usize..100_000,
            dists in proptest::collection::vec(0.1f64..20.0, 1..6),
            scenarios in proptest::collection::vec(scenario(), 1..5),
            json in any::<bool>(),
            independent in any::<bool>(),
            gain in 0.0f64..30.0,
            nf in proptest::option::of(3.0f64..9.0),
            mute in any::<[bool; 4]>(),
        ) {
            let mut cfg = RunConfig {
                master_seed: seed,
                trials,
                bits_per_trial: bits,
                distances_km: dists,
                scenarios,
                format: if json { OutputFormat::Json } else { OutputFormat::Csv },
                ..RunConfig::default()
            };
            cfg.system.seed = seed;
            cfg.system.lo_phase = if independent { LoPhase::Independent } else { LoPhase::Shared };
            cfg.system.amplifier_gain_db = gain;
            cfg.system.amplifier_noise_figure_db = nf;
            cfg.system.tributaries = mute;
            let text = cfg.to_toml().unwrap();
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}
