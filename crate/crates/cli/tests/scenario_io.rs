//! Scenario parsing, validation reporting, and output round-trips.

use std::path::{Path, PathBuf};

use seawatch_cli::commands::{cmd_coverage, cmd_run, cmd_validate, parse_latitudes};
use seawatch_cli::output::ResultTable;
use seawatch_cli::scenario::{
    parse_scenario, parse_scenario_str, required_keys, scenario_from_file, to_toml_string,
};
use seawatch_cli::CliError;
use seawatch_core::{LossDistanceReference, LossMode, ShellType, TargetSpec};

fn repo_scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seawatch-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn reference_scenario_carries_the_reference_parameters() {
    let scenario = parse_scenario(&repo_scenario("starlink-20x20.toml")).unwrap();
    let c = &scenario.config;
    assert_eq!(c.constellation.planes, 20);
    assert_eq!(c.constellation.sats_per_plane, 20);
    assert_eq!(c.constellation.altitude_km, 550.0);
    assert_eq!(c.constellation.inclination_deg, 53.0);
    assert_eq!(c.constellation.shell, ShellType::Delta);
    assert_eq!(c.beta_deg, 50.0);
    assert_eq!(c.compute.f_cpu_hz, 1.8e9);
    assert_eq!(c.compute.n_cores, 8);
    assert_eq!(c.compute.c_mean_cycles_per_bit, 374.2);
    assert_eq!(c.frame.recall, 0.9);
    assert_eq!(c.frame.alpha_vessels, 0.2);
    assert_eq!(c.frame.d_img_bits, 3_131_440.0);
    assert_eq!(c.frame.d_bbox_bits, 67.2);
    assert_eq!(c.frame.gsd_m_per_px, 0.43);
    assert_eq!(c.link.p_min, 0.001);
    assert_eq!(c.link.p_max, 0.1);
    assert_eq!(c.link.loss_mode, LossMode::PerHop);
    assert_eq!(c.link.distance_reference, LossDistanceReference::ConstellationExtent);
    assert_eq!(c.n_processing_satellites, 5);
    assert_eq!(c.ground_station.latitude_deg, 34.05);
    assert_eq!(c.ground_station.longitude_deg, -118.24);
    assert!((c.horizon_s - 86_164.1).abs() < 1e-9);
    match &c.target {
        TargetSpec::Region(rects) => assert_eq!(rects.len(), 3),
        other => panic!("expected region target, got {other:?}"),
    }
    // The derived compression factor matches the reference value.
    let rho = c.frame.compression_factor().unwrap();
    assert!((rho - 23_299.4).abs() / 23_299.4 < 5e-4);
}

#[test]
fn empty_file_lists_every_required_key() {
    let err = parse_scenario_str("", "<empty>").unwrap_err();
    match err {
        CliError::MissingKeys { keys, .. } => {
            for required in required_keys() {
                assert!(keys.contains(&required.to_string()), "missing {required} in report");
            }
        }
        other => panic!("expected missing-keys error, got {other}"),
    }
}

#[test]
fn out_of_range_altitude_names_the_key() {
    let text = std::fs::read_to_string(repo_scenario("quick-look.toml")).unwrap();
    let bad = text.replace("altitude_km = 550.0", "altitude_km = -1.0");
    let err = parse_scenario_str(&bad, "<inline>").unwrap_err();
    let message = err.to_string();
    assert!(message.contains("altitude_km"), "message was: {message}");
}

#[test]
fn unknown_keys_are_rejected() {
    let text = std::fs::read_to_string(repo_scenario("quick-look.toml")).unwrap();
    let bad = text.replace("seed = 7", "seed = 7\nwarp_drive = true");
    let err = parse_scenario_str(&bad, "<inline>").unwrap_err();
    assert!(err.to_string().contains("warp_drive"), "got: {err}");
}

#[test]
fn multiple_violations_are_reported_together() {
    let text = std::fs::read_to_string(repo_scenario("quick-look.toml")).unwrap();
    let bad = text
        .replace("altitude_km = 550.0", "altitude_km = -5.0")
        .replace("recall = 0.9", "recall = 1.5");
    let err = parse_scenario_str(&bad, "<inline>").unwrap_err();
    let message = err.to_string();
    assert!(message.contains("altitude_km") && message.contains("recall"), "got: {message}");
}

#[test]
fn parse_serialize_parse_is_idempotent() {
    for name in ["starlink-20x20.toml", "quick-look.toml", "sweep-planes.toml"] {
        let first = parse_scenario(&repo_scenario(name)).unwrap();
        let serialized = to_toml_string(&first.file).unwrap();
        let second = parse_scenario_str(&serialized, "<round-trip>").unwrap();
        assert_eq!(first.config, second.config, "config drift for {name}");
        assert_eq!(first.sweep, second.sweep);
        assert_eq!(first.seed, second.seed);
        // And the serialization itself is a fixed point.
        assert_eq!(serialized, to_toml_string(&second.file).unwrap());
    }
}

#[test]
fn omitted_target_section_defaults_to_the_ocean_mask() {
    let text = std::fs::read_to_string(repo_scenario("quick-look.toml")).unwrap();
    let no_target = text
        .replace("[target]\nlatitude_deg = 20.0\nlongitude_deg = -140.0\n", "")
        .replace("horizon_s = 4000.0", "horizon_s = 2000.0");
    let scenario = parse_scenario_str(&no_target, "<inline>").unwrap();
    match &scenario.config.target {
        TargetSpec::Region(rects) => assert_eq!(rects.len(), 3),
        other => panic!("expected default regions, got {other:?}"),
    }
    let conflicted = text.replace(
        "[target]\nlatitude_deg = 20.0\nlongitude_deg = -140.0\n",
        "[target]\nlatitude_deg = 20.0\nlongitude_deg = -140.0\n\n[[target.regions]]\nlat_min_deg = 0.0\nlat_max_deg = 1.0\nlon_min_deg = 0.0\nlon_max_deg = 1.0\n",
    );
    assert!(parse_scenario_str(&conflicted, "<inline>").is_err());
}

#[test]
fn validate_command_accepts_every_bundled_scenario() {
    for name in
        ["starlink-20x20.toml", "quick-look.toml", "sweep-planes.toml", "sweep-sats-per-plane.toml", "sweep-processing.toml"]
    {
        let report = cmd_validate(&repo_scenario(name)).unwrap();
        assert!(report.contains("OK"), "validate failed for {name}: {report}");
    }
}

#[test]
fn run_command_writes_a_deterministic_ledger() {
    let dir_a = temp_dir("run-a");
    let dir_b = temp_dir("run-b");
    let scenario = repo_scenario("quick-look.toml");
    let a = cmd_run(&scenario, Some(33), Some(&dir_a)).unwrap();
    let b = cmd_run(&scenario, Some(33), Some(&dir_b)).unwrap();
    let ledger_a = std::fs::read(dir_a.join("ledger.csv")).unwrap();
    let ledger_b = std::fs::read(dir_b.join("ledger.csv")).unwrap();
    assert!(!ledger_a.is_empty());
    assert_eq!(ledger_a, ledger_b);
    assert!(a.report.contains("PAoI"));
    // JSON mirror requested by the scenario's formats list.
    assert!(dir_a.join("run.json").exists());
    assert_eq!(a.files.len(), b.files.len());
    let _ = std::fs::remove_dir_all(&dir_a);
    let _ = std::fs::remove_dir_all(&dir_b);
}

#[test]
fn coverage_command_reports_zero_beyond_the_shell_reach() {
    let dir = temp_dir("coverage");
    let scenario = repo_scenario("quick-look.toml");
    let artifacts = cmd_coverage(&scenario, "70:80:5", Some(&dir)).unwrap();
    let csv = std::fs::read_to_string(dir.join("coverage.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p, 0.0, "latitude above the coverage cap must be unreachable");
        rows += 1;
    }
    assert_eq!(rows, 3);
    assert!(dir.join("coverage.svg").exists());
    assert!(artifacts.report.contains("latitude"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn latitude_ranges_parse_inclusively() {
    assert_eq!(parse_latitudes("0:10:5").unwrap(), vec![0.0, 5.0, 10.0]);
    assert_eq!(parse_latitudes("-10:-10:1").unwrap(), vec![-10.0]);
    assert!(parse_latitudes("10:0:5").is_err());
    assert!(parse_latitudes("0:10:0").is_err());
    assert!(parse_latitudes("0:95:5").is_err());
    assert!(parse_latitudes("nope").is_err());
}

#[test]
fn result_table_rejects_non_finite_and_round_trips() {
    let csv = "sweep_value,aoi_avg_s,aoi_stderr_s,paoi_avg_s,paoi_stderr_s,p_m,delivered,lost_comm,lost_detect\n10,5.51000e1,1.00000e0,6.31000e1,2.50000e0,8.92000e-1,100,50,10\n";
    let table = ResultTable::from_csv(csv).unwrap();
    assert_eq!(table.to_csv(), csv);
}

#[test]
fn scenario_from_file_catches_sweep_mistakes() {
    let text = std::fs::read_to_string(repo_scenario("quick-look.toml")).unwrap();
    let bad = text.replace("parameter = \"processing_satellites\"", "parameter = \"raan\"");
    let err = parse_scenario_str(&bad, "<inline>").unwrap_err();
    assert!(err.to_string().contains("sweep.parameter"));
    let scenario = parse_scenario_str(&text, "<inline>").unwrap();
    let respun = scenario_from_file(scenario.file.clone()).unwrap();
    assert_eq!(respun.config, scenario.config);
}
