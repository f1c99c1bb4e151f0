//! Subcommand implementations, kept library-side so tests can call them.

use std::path::{Path, PathBuf};

use seawatch_core::aoi::{coverage_probability, ledger_to_csv};
use seawatch_core::sim::{monte_carlo, run_scenario, run_seed, sweep};
use seawatch_core::{Constellation, GeodeticPoint, ScenarioResult, TargetSpec};

use crate::output::{fmt_sig, OutputSession, ResultTable};
use crate::scenario::{parse_scenario, Scenario};
use crate::svg::{Chart, Series};
use crate::CliError;

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "SEAWATCH_OUT_DIR";

fn resolve_out_dir(flag: Option<&Path>, scenario: &Scenario) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    scenario.output_directory.clone().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let scenario = parse_scenario(path)?;
    let spec = &scenario.config.constellation;
    Ok(format!(
        "{} OK: {}x{} shell at {} km, {} processing satellite(s), horizon {} s{}",
        path.display(),
        spec.planes,
        spec.sats_per_plane,
        spec.altitude_km,
        scenario.config.n_processing_satellites,
        scenario.config.horizon_s,
        if scenario.sweep.is_some() { ", sweep block present" } else { "" },
    ))
}

fn summary_lines(result: &ScenarioResult) -> String {
    let s = &result.summary;
    let age = |v: Option<f64>| match v {
        Some(x) => format!("{x:.3} s"),
        None => "undefined (no deliveries)".to_string(),
    };
    format!(
        "seed: {}\nconfig hash: {:016x}\ntarget: ({:.4}, {:.4})\nframes: {} (delivered {}, lost to comms {}, lost to detection {})\nAoI avg: {}\nPAoI avg: {}\ncoverage probability: {:.4}\ntiming avg: distribute {:.3} s, process {:.3} s, route {:.3} s, downlink {:.3} s",
        result.seed,
        result.config_hash,
        result.target.latitude_deg,
        result.target.longitude_deg,
        result.ledger.len(),
        s.delivered,
        s.lost_comm,
        s.lost_detection,
        age(s.aoi_avg_s),
        age(s.paoi_avg_s),
        s.coverage_probability,
        result.timing.distribute_s,
        result.timing.process_s,
        result.timing.route_s,
        result.timing.downlink_s,
    )
}

pub struct CommandArtifacts {
    pub report: String,
    pub files: Vec<PathBuf>,
}

pub fn cmd_run(
    path: &Path,
    seed_override: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<CommandArtifacts, CliError> {
    let scenario = parse_scenario(path)?;
    let seed = seed_override.unwrap_or(scenario.seed);
    let result = run_scenario(&scenario.config, seed)?;

    let mut session = OutputSession::new(resolve_out_dir(out_dir, &scenario));
    let mut report = summary_lines(&result);
    let outcome: Result<(), CliError> = (|| {
        let ledger_path = session.write("ledger.csv", &ledger_to_csv(&result.ledger))?;
        report.push_str(&format!("\nwrote {}", ledger_path.display()));
        if scenario.formats.json {
            let s = &result.summary;
            let json = serde_json::json!({
                "seed": result.seed,
                "config_hash": format!("{:016x}", result.config_hash),
                "target": { "latitude_deg": result.target.latitude_deg, "longitude_deg": result.target.longitude_deg },
                "aoi_avg_s": s.aoi_avg_s,
                "paoi_avg_s": s.paoi_avg_s,
                "p_m": s.coverage_probability,
                "delivered": s.delivered,
                "lost_comm": s.lost_comm,
                "lost_detection": s.lost_detection,
                "timing": {
                    "distribute_s": result.timing.distribute_s,
                    "process_s": result.timing.process_s,
                    "route_s": result.timing.route_s,
                    "downlink_s": result.timing.downlink_s,
                },
            });
            let json_path =
                session.write("run.json", &serde_json::to_string_pretty(&json).expect("plain json"))?;
            report.push_str(&format!("\nwrote {}", json_path.display()));
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => Ok(CommandArtifacts { report, files: session.finish() }),
        Err(e) => {
            session.abort();
            Err(e)
        }
    }
}

pub fn cmd_sweep(path: &Path, out_dir: Option<&Path>) -> Result<CommandArtifacts, CliError> {
    let scenario = parse_scenario(path)?;
    let Some(sweep_spec) = scenario.sweep.clone() else {
        return Err(CliError::Output(format!(
            "{} has no [sweep] block; nothing to sweep",
            path.display()
        )));
    };

    let rows = sweep(
        &scenario.config,
        sweep_spec.parameter,
        &sweep_spec.values,
        scenario.seed,
        sweep_spec.n_runs,
    )?;
    let table = ResultTable::from_sweep(&rows)?;

    let mut report = String::new();
    report.push_str("sweep_value  aoi_avg_s  paoi_avg_s  p_m     delivered  lost_comm  lost_detect\n");
    for r in &table.rows {
        report.push_str(&format!(
            "{:<11}  {:<9.3} {:<10.3}  {:<6.4}  {:<9}  {:<9}  {}\n",
            r.sweep_value, r.aoi_avg_s, r.paoi_avg_s, r.p_m, r.delivered, r.lost_comm, r.lost_detect
        ));
    }

    let mut session = OutputSession::new(resolve_out_dir(out_dir, &scenario));
    let outcome: Result<(), CliError> = (|| {
        if scenario.formats.csv {
            let p = session.write("sweep.csv", &table.to_csv())?;
            report.push_str(&format!("wrote {}\n", p.display()));
        }
        if scenario.formats.json {
            let p = session.write("sweep.json", &table.to_json())?;
            report.push_str(&format!("wrote {}\n", p.display()));
        }
        if scenario.formats.svg {
            let x_label = match sweep_spec.parameter {
                seawatch_core::SweepParameter::Planes => "orbital planes",
                seawatch_core::SweepParameter::SatsPerPlane => "satellites per plane",
                seawatch_core::SweepParameter::ProcessingSatellites => "processing satellites",
            };
            let chart = Chart {
                title: "freshness and coverage vs ".to_string() + x_label,
                x_label: x_label.into(),
                y_label: "seconds".into(),
                y2_label: Some("coverage probability".into()),
                series: vec![
                    Series {
                        label: "aoi_avg_s".into(),
                        points: table.rows.iter().map(|r| (r.sweep_value as f64, r.aoi_avg_s)).collect(),
                        right_axis: false,
                    },
                    Series {
                        label: "paoi_avg_s".into(),
                        points: table
                            .rows
                            .iter()
                            .map(|r| (r.sweep_value as f64, r.paoi_avg_s))
                            .collect(),
                        right_axis: false,
                    },
                    Series {
                        label: "p_m".into(),
                        points: table.rows.iter().map(|r| (r.sweep_value as f64, r.p_m)).collect(),
                        right_axis: true,
                    },
                ],
            };
            let p = session.write("sweep.svg", &chart.render())?;
            report.push_str(&format!("wrote {}\n", p.display()));
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => Ok(CommandArtifacts { report, files: session.finish() }),
        Err(e) => {
            session.abort();
            Err(e)
        }
    }
}

/// Latitude range given as `start:end:step` (inclusive ends, positive step).
pub fn parse_latitudes(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Output(format!(
            "latitude range must look like start:end:step (got \"{spec}\")"
        )));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| CliError::Output(format!("latitude range \"{spec}\": {e}")))
    };
    let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(step > 0.0) || end < start || start < -90.0 || end > 90.0 {
        return Err(CliError::Output(format!(
            "latitude range \"{spec}\": need -90 <= start <= end <= 90 and step > 0"
        )));
    }
    let mut lats = Vec::new();
    let mut lat = start;
    while lat <= end + 1e-9 {
        lats.push(lat);
        lat += step;
    }
    Ok(lats)
}

pub fn cmd_coverage(
    path: &Path,
    latitudes: &str,
    out_dir: Option<&Path>,
) -> Result<CommandArtifacts, CliError> {
    let scenario = parse_scenario(path)?;
    let lats = parse_latitudes(latitudes)?;
    let constellation = Constellation::build(scenario.config.constellation)?;
    let lon = match &scenario.config.target {
        TargetSpec::Fixed(p) => p.longitude_deg,
        TargetSpec::Region(_) => 0.0,
    };

    let mut csv = String::from("latitude_deg,p_m\n");
    let mut report = String::from("latitude_deg  p_m\n");
    let mut points = Vec::new();
    for &lat in &lats {
        let p = coverage_probability(
            &constellation,
            &GeodeticPoint::new(lat, lon),
            scenario.config.beta_deg,
            scenario.config.horizon_s,
            scenario.config.step_s,
        );
        csv.push_str(&format!("{},{}\n", fmt_sig(lat), fmt_sig(p)));
        report.push_str(&format!("{lat:<12.2}  {p:.4}\n"));
        points.push((lat, p));
    }

    let mut session = OutputSession::new(resolve_out_dir(out_dir, &scenario));
    let outcome: Result<(), CliError> = (|| {
        if scenario.formats.csv {
            let p = session.write("coverage.csv", &csv)?;
            report.push_str(&format!("wrote {}\n", p.display()));
        }
        if scenario.formats.svg {
            let chart = Chart {
                title: format!(
                    "service availability vs latitude ({}x{} shell)",
                    scenario.config.constellation.planes, scenario.config.constellation.sats_per_plane
                ),
                x_label: "target latitude (deg)".into(),
                y_label: "coverage probability".into(),
                y2_label: None,
                series: vec![Series { label: "p_m".into(), points, right_axis: false }],
            };
            let p = session.write("coverage.svg", &chart.render())?;
            report.push_str(&format!("wrote {}\n", p.display()));
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => Ok(CommandArtifacts { report, files: session.finish() }),
        Err(e) => {
            session.abort();
            Err(e)
        }
    }
}

/// Exposes the Monte Carlo seed derivation for scripting parity checks.
pub fn derived_seed(base: u64, run_index: usize) -> u64 {
    run_seed(base, run_index)
}

/// Convenience for tests: a Monte Carlo batch from a scenario file.
pub fn monte_carlo_from_file(
    path: &Path,
    n_runs: usize,
) -> Result<seawatch_core::MonteCarloResult, CliError> {
    let scenario = parse_scenario(path)?;
    Ok(monte_carlo(&scenario.config, scenario.seed, n_runs)?)
}
