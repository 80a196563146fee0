use std::path::Path;

use pcnet::config::NetworkConfig;
use pcnet::harness::{
    emit_csv, load_sweep, read_csv, run_experiment, run_replication, scenario_config, write_outputs, ControllerSpec,
    ExperimentConfig, BASE_COLUMNS, MANIFEST_FILE,
};
use pcnet::tucrl::TucrlConfig;

/// Two hops, one packet per slot, no randomness anywhere.
const LINE: &str = r#"
nodes = 3
bound = 1

[[links]]
from = 1
to = 2
capacity = 1

[[links]]
from = 2
to = 3
capacity = 1

[[flows]]
source = 1
destination = 3
rate = 1.0
burst = 1

[policy]
kind = "idle"
"#;

fn line(ctrl: ControllerSpec, load: f64, slots: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(NetworkConfig::from_toml(LINE).unwrap(), ctrl, load, slots, 3);
    cfg.stride = 1;
    cfg
}

#[test]
fn csv_matches_the_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let run = run_replication(&line(ControllerSpec::MaxWeight, 1.0, 10), 0).unwrap();
    emit_csv(&run.series, &path).unwrap();
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/line_maxweight.csv")).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden);
}

#[test]
fn ten_slots_give_eleven_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let run = run_replication(&line(ControllerSpec::Tmw, 1.0, 10), 0).unwrap();
    emit_csv(&run.series, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 11);
}

#[test]
fn zero_arrivals_give_zero_metrics() {
    let text = LINE.replace("rate = 1.0", "rate = 0.0");
    for ctrl in [
        ControllerSpec::MaxWeight,
        ControllerSpec::Tmw,
        ControllerSpec::Tucrl(TucrlConfig::new(4)),
    ] {
        let mut cfg = ExperimentConfig::new(NetworkConfig::from_toml(&text).unwrap(), ctrl, 1.0, 200, 9);
        cfg.stride = 1;
        let run = run_replication(&cfg, 0).unwrap();
        let slot = run.series.column("slot").unwrap();
        for row in &run.series.rows {
            for (c, v) in row.iter().enumerate() {
                if c != slot {
                    assert_eq!(*v, 0.0, "{} {}", ctrl.name(), run.series.columns[c]);
                }
            }
        }
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    for ctrl in [ControllerSpec::Tmw, ControllerSpec::Tucrl(TucrlConfig::new(12))] {
        let mut cfg = ExperimentConfig::new(scenario_config("scenario2").unwrap(), ctrl, 0.95, 3000, 21);
        cfg.stride = 7;
        let mut texts = Vec::new();
        for n in 0..2 {
            let path = dir.path().join(format!("{}_{n}.csv", ctrl.name()));
            emit_csv(&run_replication(&cfg, 0).unwrap().series, &path).unwrap();
            texts.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(texts[0], texts[1]);
    }
}

#[test]
fn drop_fraction_round_trips_through_csv() {
    let cfg = {
        let mut c = ExperimentConfig::new(
            scenario_config("scenario2").unwrap(),
            ControllerSpec::Tucrl(TucrlConfig::new(5)),
            0.95,
            2000,
            4,
        );
        c.stride = 3;
        c
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    emit_csv(&run_replication(&cfg, 0).unwrap().series, &path).unwrap();
    let back = read_csv(&path).unwrap();
    let arrivals = back.values("arrivals").unwrap();
    let dropped = back.values("dropped").unwrap();
    let eta = back.values("drop_fraction").unwrap();
    assert!(dropped.last().unwrap() > &0.0);
    for ((a, d), e) in arrivals.iter().zip(&dropped).zip(&eta) {
        let expected = if *a == 0.0 { 0.0 } else { d / a };
        assert!((expected - e).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(e));
    }
}

#[test]
fn cumulative_columns_never_decrease() {
    let mut cfg = ExperimentConfig::new(scenario_config("scenario1").unwrap(), ControllerSpec::Tmw, 0.6, 5000, 2);
    cfg.stride = 10;
    let run = run_replication(&cfg, 0).unwrap();
    for col in ["arrivals", "delivered", "dropped", "slot"] {
        let v = run.series.values(col).unwrap();
        assert!(v.windows(2).all(|w| w[0] <= w[1]), "{col}");
    }
    assert_eq!(&run.series.columns[..BASE_COLUMNS.len()], &BASE_COLUMNS.map(String::from)[..]);
}

#[test]
fn replication_means_tighten() {
    // mean arrivals per slot of each replication, then the standard error of their mean
    let standard_error = |reps: u32| {
        let mut cfg = ExperimentConfig::new(scenario_config("scenario1").unwrap(), ControllerSpec::MaxWeight, 0.2, 500, 100);
        cfg.replications = reps;
        cfg.stride = 500;
        let result = run_experiment(&cfg).unwrap();
        let means: Vec<f64> = result.runs.iter().map(|r| r.summary.arrivals as f64 / 500.0).collect();
        let m = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (means.len() - 1) as f64;
        (m, (var / means.len() as f64).sqrt())
    };
    let (m4, se4) = standard_error(4);
    let (m64, se64) = standard_error(64);
    // arrival mean is 0.2·25 + 5 = 10 per slot
    assert!((m4 - 10.0).abs() < 4.0 * se4 + 1e-9);
    assert!((m64 - 10.0).abs() < 4.0 * se64);
    assert!(se64 < se4 / 2.0, "{se4} {se64}");
}

#[test]
fn replications_use_consecutive_seeds() {
    let mut cfg = line(ControllerSpec::MaxWeight, 0.5, 50);
    cfg.replications = 3;
    let result = run_experiment(&cfg).unwrap();
    let seeds: Vec<u64> = result.runs.iter().map(|r| r.summary.seed).collect();
    assert_eq!(seeds, vec![3, 4, 5]);
    let alone = run_replication(&cfg, 2).unwrap();
    assert_eq!(alone.series, result.runs[2].series);
}

#[test]
fn fig2_maxweight_backlog_grows_at_the_flow_rate() {
    let mut cfg = ExperimentConfig::new(scenario_config("fig2").unwrap(), ControllerSpec::MaxWeight, 1.0, 20_000, 8);
    cfg.stride = 20_000;
    let run = run_replication(&cfg, 0).unwrap();
    assert!((run.summary.queue_slope - 20.0).abs() < 0.5, "{}", run.summary.queue_slope);
}

#[test]
fn sweep_covers_every_load_and_controller() {
    let base = line(ControllerSpec::MaxWeight, 1.0, 500);
    let loads = [0.01, 0.5, 1.0];
    let ctrls = [ControllerSpec::MaxWeight, ControllerSpec::Tmw];
    let points = load_sweep(&base, &loads, &ctrls).unwrap();
    assert_eq!(points.len(), 6);
    for p in points.iter().filter(|p| p.load == 0.01) {
        assert!(p.queue_slope.abs() < 0.01, "{p:?}");
    }
    assert!(load_sweep(&base, &[], &ctrls).is_err());
}

#[test]
fn light_load_is_stable_for_both_controllers() {
    let loads = [0.01];
    let ctrls = [ControllerSpec::MaxWeight, ControllerSpec::Tmw];
    let base = ExperimentConfig::new(scenario_config("scenario1").unwrap(), ControllerSpec::MaxWeight, 0.01, 20_000, 5);
    for p in load_sweep(&base, &loads, &ctrls).unwrap() {
        assert!(p.queue_slope < 0.01, "{p:?}");
    }
}

#[test]
fn outputs_and_manifest_reproduce_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(scenario_config("scenario2").unwrap(), ControllerSpec::Tucrl(TucrlConfig::new(8)), 0.9, 400, 6);
    cfg.replications = 2;
    cfg.stride = 10;
    let result = run_experiment(&cfg).unwrap();
    let files = write_outputs(dir.path(), "test", &cfg, &result).unwrap();
    for name in ["series.csv", "series_0.csv", "series_1.csv", "summary.csv", "episodes.csv", MANIFEST_FILE] {
        assert!(files.iter().any(|f| f.ends_with(name)), "{name} missing from {files:?}");
    }
    let manifest = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let again = ExperimentConfig::from_toml(&manifest).unwrap();
    assert_eq!(again, cfg);
    let rerun = run_experiment(&again).unwrap();
    assert_eq!(rerun.mean, result.mean);
}

#[test]
fn invalid_experiments_are_rejected() {
    let mut cfg = line(ControllerSpec::MaxWeight, 1.0, 10);
    cfg.slots = 0;
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = line(ControllerSpec::MaxWeight, 1.0, 10);
    cfg.replications = 0;
    assert!(run_experiment(&cfg).is_err());
    assert!(run_experiment(&line(ControllerSpec::MaxWeight, -1.0, 10)).is_err());
    // a grid too large to enumerate
    let huge = line(ControllerSpec::Tucrl(TucrlConfig::new(u32::MAX)), 1.0, 10);
    assert!(run_experiment(&huge).is_err());
}
