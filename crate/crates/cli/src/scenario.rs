//! Scenario files: a TOML document whose keys carry their units, parsed and
//! validated into a [`ScenarioConfig`]. Unknown keys are rejected and every
//! violated bound is reported with its key path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use seawatch_core::sim::{
    default_ocean_regions, DEFAULT_GAMMA_SHAPE, DEFAULT_HORIZON_S, DEFAULT_MIN_ELEVATION_DEG,
    DEFAULT_N_PROCESSING, DEFAULT_N_VESSELS_MEAN, DEFAULT_PHASING_FACTOR, DEFAULT_STEP_S,
};
use seawatch_core::{
    ComputeModel, ConstellationSpec, DistributionMode, FrameModel, GeodeticPoint, LatLonRect,
    LinkSettings, LossDistanceReference, LossMode, ScenarioConfig, ShellType, SweepParameter,
    TargetSpec,
};

use crate::CliError;

/// Keys a scenario cannot do without; checked up front so an incomplete file
/// reports everything that is missing at once.
const REQUIRED_KEYS: &[&str] = &[
    "constellation.planes",
    "constellation.sats_per_plane",
    "constellation.altitude_km",
    "constellation.inclination_deg",
    "constellation.shell",
    "geometry.beta_deg",
    "ground_station.latitude_deg",
    "ground_station.longitude_deg",
    "frame.frame_area_km2",
    "frame.gsd_m_per_px",
    "frame.image_width_px",
    "frame.image_height_px",
    "frame.d_img_bits",
    "frame.d_bbox_bits",
    "frame.alpha_vessels",
    "frame.recall",
    "compute.f_cpu_hz",
    "compute.n_cores",
    "compute.c_mean_cycles_per_bit",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub constellation: ConstellationSection,
    pub geometry: GeometrySection,
    pub ground_station: PointSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
    pub frame: FrameSection,
    pub compute: ComputeSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSection {
    pub planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// "star" or "delta".
    pub shell: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phasing_factor: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub beta_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_elevation_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSection {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

/// Either a fixed monitored point or water-mask rectangles to draw targets
/// from; omitting the section entirely selects the built-in ocean mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latitude_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub longitude_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionSection>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub frame_area_km2: f64,
    pub gsd_m_per_px: f64,
    pub image_width_px: u32,
    pub image_height_px: u32,
    pub d_img_bits: f64,
    pub d_bbox_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_vessels_mean: Option<f64>,
    pub alpha_vessels: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeSection {
    pub f_cpu_hz: f64,
    pub n_cores: u32,
    pub c_mean_cycles_per_bit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_shape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_fso_intra_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_rf_inter_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_rf_downlink_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_min_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max_km: Option<f64>,
    /// "per-hop" (default) or "per-packet".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_size_bits: Option<f64>,
    /// Distance normalization when d_min/d_max are not pinned:
    /// "constellation-extent" (default) or "isl-adjacent".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_processing_satellites: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// "sequential" (default) or "parallel" fragment fan-out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// "planes", "sats_per_plane" or "processing_satellites".
    pub parameter: String,
    pub values: Vec<u32>,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// Any of "csv", "json", "svg"; defaults to csv + svg.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
}

/// Parsed sweep directives.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<u32>,
    pub n_runs: usize,
}

/// Requested output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, json: false, svg: true }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    pub output_directory: Option<String>,
    pub formats: Formats,
    pub file: ScenarioFile,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario_str(&text, &path.display().to_string())
}

pub fn parse_scenario_str(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let table: toml::Table = toml::from_str(text)
        .map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })?;
    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|key| lookup(&table, key).is_none())
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::MissingKeys { path: origin.into(), keys: missing });
    }
    let file: ScenarioFile = toml::from_str(text)
        .map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })?;
    scenario_from_file(file)
}

fn lookup<'v>(table: &'v toml::Table, dotted: &str) -> Option<&'v toml::Value> {
    let mut parts = dotted.split('.');
    let mut cur = table.get(parts.next()?)?;
    for part in parts {
        cur = cur.as_table()?.get(part)?;
    }
    Some(cur)
}

/// Converts the raw file into a runnable scenario, collecting every violated
/// bound rather than stopping at the first.
pub fn scenario_from_file(file: ScenarioFile) -> Result<Scenario, CliError> {
    let mut problems: Vec<String> = Vec::new();

    let shell = match file.constellation.shell.as_str() {
        "star" => ShellType::Star,
        "delta" => ShellType::Delta,
        other => {
            problems.push(format!("constellation.shell: expected \"star\" or \"delta\" (got \"{other}\")"));
            ShellType::Delta
        }
    };
    let constellation = ConstellationSpec {
        planes: file.constellation.planes,
        sats_per_plane: file.constellation.sats_per_plane,
        altitude_km: file.constellation.altitude_km,
        inclination_deg: file.constellation.inclination_deg,
        shell,
        phasing_factor: file.constellation.phasing_factor.unwrap_or(DEFAULT_PHASING_FACTOR),
    };
    if let Err(e) = constellation.validate() {
        problems.push(format!("constellation.{e}"));
    }

    let ground_station =
        GeodeticPoint::new(file.ground_station.latitude_deg, file.ground_station.longitude_deg);
    if let Err(e) = ground_station.validate() {
        problems.push(format!("ground_station.{e}"));
    }

    let target = match &file.target {
        None => TargetSpec::Region(default_ocean_regions()),
        Some(section) => match (&section.latitude_deg, &section.longitude_deg, &section.regions) {
            (Some(lat), Some(lon), None) => TargetSpec::Fixed(GeodeticPoint::new(*lat, *lon)),
            (None, None, Some(regions)) => TargetSpec::Region(
                regions
                    .iter()
                    .map(|r| LatLonRect {
                        lat_min_deg: r.lat_min_deg,
                        lat_max_deg: r.lat_max_deg,
                        lon_min_deg: r.lon_min_deg,
                        lon_max_deg: r.lon_max_deg,
                    })
                    .collect(),
            ),
            (None, None, None) => TargetSpec::Region(default_ocean_regions()),
            _ => {
                problems.push(
                    "target: give either latitude_deg + longitude_deg or regions, not both".into(),
                );
                TargetSpec::Region(default_ocean_regions())
            }
        },
    };
    if let Err(e) = target.validate() {
        problems.push(format!("target.{e}"));
    }

    let frame = FrameModel {
        frame_area_km2: file.frame.frame_area_km2,
        gsd_m_per_px: file.frame.gsd_m_per_px,
        image_width_px: file.frame.image_width_px,
        image_height_px: file.frame.image_height_px,
        d_img_bits: file.frame.d_img_bits,
        d_bbox_bits: file.frame.d_bbox_bits,
        n_vessels_mean: file.frame.n_vessels_mean.unwrap_or(DEFAULT_N_VESSELS_MEAN),
        alpha_vessels: file.frame.alpha_vessels,
        recall: file.frame.recall,
    };
    if let Err(e) = frame.validate() {
        problems.push(format!("frame.{e}"));
    }

    let compute = ComputeModel {
        f_cpu_hz: file.compute.f_cpu_hz,
        n_cores: file.compute.n_cores,
        c_mean_cycles_per_bit: file.compute.c_mean_cycles_per_bit,
        gamma_shape: file.compute.gamma_shape.unwrap_or(DEFAULT_GAMMA_SHAPE),
    };
    if let Err(e) = compute.validate() {
        problems.push(format!("compute.{e}"));
    }

    let defaults = LinkSettings::default();
    let link_section = file.link.clone().unwrap_or_default();
    let distance_bounds_km = match (link_section.d_min_km, link_section.d_max_km) {
        (Some(min), Some(max)) => Some((min, max)),
        (None, None) => None,
        _ => {
            problems.push("link.d_min_km/d_max_km: give both bounds or neither".into());
            None
        }
    };
    let loss_mode = match link_section.loss_mode.as_deref() {
        None | Some("per-hop") => LossMode::PerHop,
        Some("per-packet") => LossMode::PerPacket,
        Some(other) => {
            problems.push(format!("link.loss_mode: expected \"per-hop\" or \"per-packet\" (got \"{other}\")"));
            LossMode::PerHop
        }
    };
    let distance_reference = match link_section.distance_reference.as_deref() {
        None | Some("constellation-extent") => LossDistanceReference::ConstellationExtent,
        Some("isl-adjacent") => LossDistanceReference::IslAdjacent,
        Some(other) => {
            problems.push(format!(
                "link.distance_reference: expected \"constellation-extent\" or \"isl-adjacent\" (got \"{other}\")"
            ));
            LossDistanceReference::ConstellationExtent
        }
    };
    if loss_mode == LossMode::PerPacket && link_section.packet_size_bits.is_none() {
        problems.push("link.packet_size_bits: required when loss_mode = \"per-packet\"".into());
    }
    let link = LinkSettings {
        rate_fso_intra_bps: link_section.rate_fso_intra_bps.unwrap_or(defaults.rate_fso_intra_bps),
        rate_rf_inter_bps: link_section.rate_rf_inter_bps.unwrap_or(defaults.rate_rf_inter_bps),
        rate_rf_downlink_bps: link_section
            .rate_rf_downlink_bps
            .unwrap_or(defaults.rate_rf_downlink_bps),
        p_min: link_section.p_min.unwrap_or(defaults.p_min),
        p_max: link_section.p_max.unwrap_or(defaults.p_max),
        distance_bounds_km,
        distance_reference,
        loss_mode,
        packet_size_bits: link_section.packet_size_bits.unwrap_or(defaults.packet_size_bits),
    };

    let sim_section = file.simulation.clone().unwrap_or_default();
    let distribution = match sim_section.distribution.as_deref() {
        None | Some("sequential") => DistributionMode::Sequential,
        Some("parallel") => DistributionMode::Parallel,
        Some(other) => {
            problems.push(format!(
                "simulation.distribution: expected \"sequential\" or \"parallel\" (got \"{other}\")"
            ));
            DistributionMode::Sequential
        }
    };

    let config = ScenarioConfig {
        constellation,
        beta_deg: file.geometry.beta_deg,
        ground_station,
        target,
        frame,
        compute,
        link,
        n_processing_satellites: sim_section
            .n_processing_satellites
            .unwrap_or(DEFAULT_N_PROCESSING),
        horizon_s: sim_section.horizon_s.unwrap_or(DEFAULT_HORIZON_S),
        step_s: sim_section.step_s.unwrap_or(DEFAULT_STEP_S),
        min_elevation_deg: file.geometry.min_elevation_deg.unwrap_or(DEFAULT_MIN_ELEVATION_DEG),
        distribution,
    };
    if let Err(e) = config.validate() {
        let text = e.to_string();
        if !problems.iter().any(|p| p.contains(&text)) {
            problems.push(text);
        }
    }

    let sweep = match &file.sweep {
        None => None,
        Some(section) => {
            let parameter = match section.parameter.as_str() {
                "planes" => Some(SweepParameter::Planes),
                "sats_per_plane" => Some(SweepParameter::SatsPerPlane),
                "processing_satellites" => Some(SweepParameter::ProcessingSatellites),
                other => {
                    problems.push(format!(
                        "sweep.parameter: expected \"planes\", \"sats_per_plane\" or \"processing_satellites\" (got \"{other}\")"
                    ));
                    None
                }
            };
            if section.values.is_empty() {
                problems.push("sweep.values: need at least one value".into());
            }
            if section.n_runs == 0 {
                problems.push("sweep.n_runs: must be >= 1".into());
            }
            parameter.map(|parameter| SweepSpec {
                parameter,
                values: section.values.clone(),
                n_runs: section.n_runs,
            })
        }
    };

    let mut formats = Formats::default();
    if let Some(output) = &file.output {
        if let Some(list) = &output.formats {
            formats = Formats { csv: false, json: false, svg: false };
            for f in list {
                match f.as_str() {
                    "csv" => formats.csv = true,
                    "json" => formats.json = true,
                    "svg" => formats.svg = true,
                    other => problems
                        .push(format!("output.formats: expected csv, json or svg (got \"{other}\")")),
                }
            }
        }
    }

    if !problems.is_empty() {
        return Err(CliError::Invalid { problems });
    }

    Ok(Scenario {
        config,
        seed: sim_section.seed.unwrap_or(1),
        sweep,
        output_directory: file.output.as_ref().and_then(|o| o.directory.clone()),
        formats,
        file,
    })
}

/// Serializes a parsed scenario back to TOML (used for round-trip checks and
/// for capturing the effective configuration).
pub fn to_toml_string(file: &ScenarioFile) -> Result<String, CliError> {
    toml::to_string_pretty(file)
        .map_err(|e| CliError::Parse { path: "<serialize>".into(), message: e.to_string() })
}

pub fn required_keys() -> &'static [&'static str] {
    REQUIRED_KEYS
}
