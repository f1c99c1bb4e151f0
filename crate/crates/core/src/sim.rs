//! The end-to-end pipeline: capture → fragment → process → route → downlink,
//! with Monte Carlo replication over randomized ocean targets and sweep
//! drivers for dimensioning the shell.
//!
//! A single run is strictly sequential and fully determined by the pair
//! (configuration, seed). Replications and sweep points run in parallel, each
//! on its own random stream, and aggregate order-independently, so results do
//! not depend on worker scheduling.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::aoi::{
    self, aggregate_arrival, average_aoi, average_paoi, AoiSummary, FrameOutcome, FrameRecord,
};
use crate::constants::{EARTH_RADIUS_KM, SIDEREAL_DAY_S};
use crate::error::Error;
use crate::link::{evaluate_route_loss, LinkModel, LossMode};
use crate::math::Vec3;
use crate::orbital::{
    coverage_central_angle_deg, ground_position, Constellation, ConstellationSpec, GeodeticPoint,
};
use crate::task::{
    detection_succeeds, fragment, processing_time, sample_complexity, ComputeModel, FrameModel,
};
use crate::topology::{
    adjacent_distance_bounds, min_hop_path, pairwise_distance_bounds, route_to_ground, LinkClass,
    RoutePath, Topology,
};
use crate::SatelliteId;

/// A latitude/longitude rectangle; longitudes may wrap across the antimeridian
/// (a span from 150° to −120° runs eastwards over the date line).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLonRect {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
}

impl LatLonRect {
    pub fn validate(&self) -> Result<(), Error> {
        if !(-90.0..=90.0).contains(&self.lat_min_deg)
            || !(-90.0..=90.0).contains(&self.lat_max_deg)
            || self.lat_min_deg >= self.lat_max_deg
        {
            return Err(Error::validation(
                "target.regions.lat",
                format!("need -90 <= lat_min < lat_max <= 90 (got {} and {})", self.lat_min_deg, self.lat_max_deg),
            ));
        }
        if !(-180.0..=180.0).contains(&self.lon_min_deg)
            || !(-180.0..=180.0).contains(&self.lon_max_deg)
        {
            return Err(Error::validation(
                "target.regions.lon",
                format!("longitudes must lie in [-180, 180] (got {} and {})", self.lon_min_deg, self.lon_max_deg),
            ));
        }
        if self.lon_width_deg() <= 0.0 {
            return Err(Error::validation("target.regions.lon", "zero-width longitude span"));
        }
        Ok(())
    }

    pub fn lon_width_deg(&self) -> f64 {
        let w = (self.lon_max_deg - self.lon_min_deg).rem_euclid(360.0);
        if w == 0.0 && self.lon_max_deg != self.lon_min_deg {
            360.0
        } else {
            w
        }
    }

    /// Relative spherical area, used to weight rectangles when sampling.
    fn area_weight(&self) -> f64 {
        let s1 = self.lat_min_deg.to_radians().sin();
        let s2 = self.lat_max_deg.to_radians().sin();
        self.lon_width_deg().to_radians() * (s2 - s1)
    }

    /// Uniform-in-area sample within the rectangle.
    fn sample<R: RngExt>(&self, rng: &mut R) -> GeodeticPoint {
        let s1 = self.lat_min_deg.to_radians().sin();
        let s2 = self.lat_max_deg.to_radians().sin();
        let lat = rng.random_range(s1..s2).asin().to_degrees();
        let lon_raw = self.lon_min_deg + rng.random_range(0.0..self.lon_width_deg());
        let lon = (lon_raw + 180.0).rem_euclid(360.0) - 180.0;
        GeodeticPoint::new(lat, lon)
    }
}

/// What to monitor: a fixed point or a random point per run drawn from
/// water-mask rectangles (area-weighted).
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Fixed(GeodeticPoint),
    Region(Vec<LatLonRect>),
}

impl TargetSpec {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            TargetSpec::Fixed(p) => p.validate(),
            TargetSpec::Region(rects) => {
                if rects.is_empty() {
                    return Err(Error::validation("target.regions", "need at least one rectangle"));
                }
                rects.iter().try_for_each(LatLonRect::validate)
            }
        }
    }

    fn sample<R: RngExt>(&self, rng: &mut R) -> GeodeticPoint {
        match self {
            TargetSpec::Fixed(p) => *p,
            TargetSpec::Region(rects) => {
                let total: f64 = rects.iter().map(LatLonRect::area_weight).sum();
                let mut pick = rng.random_range(0.0..total);
                for rect in rects {
                    let w = rect.area_weight();
                    if pick < w {
                        return rect.sample(rng);
                    }
                    pick -= w;
                }
                rects.last().expect("validated non-empty region").sample(rng)
            }
        }
    }
}

/// Default inter-plane slot offset of a walker shell.
pub const DEFAULT_PHASING_FACTOR: u32 = 1;
/// Default shape of the complexity-randomizing gamma law. Keeps a visible
/// spread (coefficient of variation 0.2) while the slowest of five shares
/// stays compatible with a sub-minute peak-age budget.
pub const DEFAULT_GAMMA_SHAPE: f64 = 25.0;
/// Default mean vessel count per tile.
pub const DEFAULT_N_VESSELS_MEAN: f64 = 2.0;
/// Default size of the processing group (capturer + four neighbours).
pub const DEFAULT_N_PROCESSING: u32 = 5;
/// Default downlink elevation mask (degrees).
pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 10.0;
/// Default scheduler/coverage sampling step (s).
pub const DEFAULT_STEP_S: f64 = 1.0;
/// Default observation horizon: one full Earth rotation (s).
pub const DEFAULT_HORIZON_S: f64 = SIDEREAL_DAY_S;

/// Ocean rectangles used as the default water mask when a scenario does not
/// spell out its own: the Pacific, Atlantic and Indian basins.
pub fn default_ocean_regions() -> Vec<LatLonRect> {
    vec![
        LatLonRect { lat_min_deg: -50.0, lat_max_deg: 50.0, lon_min_deg: 150.0, lon_max_deg: -120.0 },
        LatLonRect { lat_min_deg: -40.0, lat_max_deg: 55.0, lon_min_deg: -60.0, lon_max_deg: -10.0 },
        LatLonRect { lat_min_deg: -40.0, lat_max_deg: 20.0, lon_min_deg: 50.0, lon_max_deg: 100.0 },
    ]
}

/// Whether the capturer's two transmitters serialize the fragment fan-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionMode {
    /// One transmit chain per link class; same-class neighbours queue behind
    /// each other. This is the default: the capturer owns a single optical
    /// and a single radio transmitter.
    Sequential,
    /// Every fragment leaves at the capture instant.
    Parallel,
}

/// Which distances normalize the loss law when the scenario does not pin
/// `d_min`/`d_max` explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossDistanceReference {
    /// Min/max distance over every satellite pair of the shell — the spatial
    /// extent of the constellation. Default.
    ConstellationExtent,
    /// Min/max length over the ISL edges only.
    IslAdjacent,
}

/// Link rates and loss parameters as configured; distance bounds may be left
/// open and are then measured on the constellation being simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSettings {
    pub rate_fso_intra_bps: f64,
    pub rate_rf_inter_bps: f64,
    pub rate_rf_downlink_bps: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub distance_bounds_km: Option<(f64, f64)>,
    pub distance_reference: LossDistanceReference,
    pub loss_mode: LossMode,
    pub packet_size_bits: f64,
}

impl Default for LinkSettings {
    fn default() -> Self {
        LinkSettings {
            rate_fso_intra_bps: 10.0e9,
            rate_rf_inter_bps: 1.0e9,
            rate_rf_downlink_bps: 0.5e9,
            p_min: 0.001,
            p_max: 0.1,
            distance_bounds_km: None,
            distance_reference: LossDistanceReference::ConstellationExtent,
            loss_mode: LossMode::PerHop,
            packet_size_bits: 12_000.0,
        }
    }
}

impl LinkSettings {
    /// Concretizes the loss-law distance bounds against a built shell. Open
    /// bounds are measured over one orbital period of the constellation.
    pub fn resolve(&self, constellation: &Constellation) -> Result<LinkModel, Error> {
        let (d_min_km, d_max_km) = match self.distance_bounds_km {
            Some(bounds) => bounds,
            None => {
                let samples = 128;
                let period = constellation.period_s();
                let times: Vec<f64> =
                    (0..samples).map(|k| k as f64 * period / samples as f64).collect();
                match self.distance_reference {
                    LossDistanceReference::ConstellationExtent => {
                        pairwise_distance_bounds(constellation, &times)?
                    }
                    LossDistanceReference::IslAdjacent => {
                        adjacent_distance_bounds(constellation, &times)?
                    }
                }
            }
        };
        let model = LinkModel {
            rate_fso_intra_bps: self.rate_fso_intra_bps,
            rate_rf_inter_bps: self.rate_rf_inter_bps,
            rate_rf_downlink_bps: self.rate_rf_downlink_bps,
            p_min: self.p_min,
            p_max: self.p_max,
            d_min_km,
            d_max_km,
            loss_mode: self.loss_mode,
            packet_size_bits: self.packet_size_bits,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Full description of one simulated scenario. Deterministic given a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub constellation: ConstellationSpec,
    /// Off-nadir capture limit (degrees).
    pub beta_deg: f64,
    pub ground_station: GeodeticPoint,
    pub target: TargetSpec,
    pub frame: FrameModel,
    pub compute: ComputeModel,
    pub link: LinkSettings,
    /// Satellites sharing each frame: the capturer plus grid neighbours,
    /// 1, 5, 9 or 13 (rings of the torus in plane-first order).
    pub n_processing_satellites: u32,
    /// Observation horizon τ (s).
    pub horizon_s: f64,
    /// Capture scheduler and coverage sampling step Δt (s).
    pub step_s: f64,
    /// Elevation mask for the downlink gateway (degrees).
    pub min_elevation_deg: f64,
    pub distribution: DistributionMode,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.constellation.validate()?;
        if !(self.beta_deg > 0.0 && self.beta_deg <= 180.0) {
            return Err(Error::validation(
                "beta_deg",
                format!("must lie in (0, 180] (got {})", self.beta_deg),
            ));
        }
        self.ground_station.validate()?;
        self.target.validate()?;
        self.frame.validate()?;
        self.compute.validate()?;
        let n = self.n_processing_satellites;
        if n == 0 || n > 13 || n % 4 != 1 {
            return Err(Error::validation(
                "n_processing_satellites",
                format!("must be 1, 5, 9 or 13 (got {n})"),
            ));
        }
        if n > 1 && (self.constellation.planes < 3 || self.constellation.sats_per_plane < 3) {
            return Err(Error::validation(
                "n_processing_satellites",
                "sharing work needs a grid of at least 3x3 satellites",
            ));
        }
        if n > 5 && (self.constellation.planes < 5 || self.constellation.sats_per_plane < 5) {
            return Err(Error::validation(
                "n_processing_satellites",
                "distance-2 rings need a grid of at least 5x5 satellites",
            ));
        }
        if !(self.horizon_s > 0.0) {
            return Err(Error::validation("horizon_s", format!("must be > 0 (got {})", self.horizon_s)));
        }
        if !(self.step_s > 0.0 && self.step_s <= self.horizon_s) {
            return Err(Error::validation(
                "step_s",
                format!("must lie in (0, horizon] (got {})", self.step_s),
            ));
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(Error::validation(
                "min_elevation_deg",
                format!("must lie in [0, 90) (got {})", self.min_elevation_deg),
            ));
        }
        if let Some((d_min, d_max)) = self.link.distance_bounds_km {
            if !(d_min < d_max) {
                return Err(Error::validation(
                    "link.d_min_km/d_max_km",
                    format!("need d_min < d_max (got {d_min} and {d_max})"),
                ));
            }
        }
        if self.link.loss_mode == LossMode::PerPacket && !(self.link.packet_size_bits > 0.0) {
            return Err(Error::validation("link.packet_size_bits", "per-packet losses need a positive packet size"));
        }
        Ok(())
    }

    /// Stable fingerprint of every physical parameter (the seed is not part
    /// of it): two runs of the same scenario share a hash whatever the seed.
    pub fn config_hash(&self) -> u64 {
        let mut h = Fnv64::new();
        let c = &self.constellation;
        h.u32(c.planes).u32(c.sats_per_plane).f64(c.altitude_km).f64(c.inclination_deg);
        h.u8(match c.shell {
            crate::ShellType::Star => 0,
            crate::ShellType::Delta => 1,
        });
        h.u32(c.phasing_factor);
        h.f64(self.beta_deg);
        h.f64(self.ground_station.latitude_deg).f64(self.ground_station.longitude_deg);
        match &self.target {
            TargetSpec::Fixed(p) => {
                h.u8(0).f64(p.latitude_deg).f64(p.longitude_deg);
            }
            TargetSpec::Region(rects) => {
                h.u8(1).u32(rects.len() as u32);
                for r in rects {
                    h.f64(r.lat_min_deg).f64(r.lat_max_deg).f64(r.lon_min_deg).f64(r.lon_max_deg);
                }
            }
        }
        let f = &self.frame;
        h.f64(f.frame_area_km2)
            .f64(f.gsd_m_per_px)
            .u32(f.image_width_px)
            .u32(f.image_height_px)
            .f64(f.d_img_bits)
            .f64(f.d_bbox_bits)
            .f64(f.n_vessels_mean)
            .f64(f.alpha_vessels)
            .f64(f.recall);
        let cm = &self.compute;
        h.f64(cm.f_cpu_hz).u32(cm.n_cores).f64(cm.c_mean_cycles_per_bit).f64(cm.gamma_shape);
        let l = &self.link;
        h.f64(l.rate_fso_intra_bps).f64(l.rate_rf_inter_bps).f64(l.rate_rf_downlink_bps);
        h.f64(l.p_min).f64(l.p_max);
        match l.distance_bounds_km {
            Some((a, b)) => {
                h.u8(1).f64(a).f64(b);
            }
            None => {
                h.u8(0);
            }
        }
        h.u8(match l.distance_reference {
            LossDistanceReference::ConstellationExtent => 0,
            LossDistanceReference::IslAdjacent => 1,
        });
        h.u8(match l.loss_mode {
            LossMode::PerHop => 0,
            LossMode::PerPacket => 1,
        });
        h.f64(l.packet_size_bits);
        h.u32(self.n_processing_satellites);
        h.f64(self.horizon_s).f64(self.step_s).f64(self.min_elevation_deg);
        h.u8(match self.distribution {
            DistributionMode::Sequential => 0,
            DistributionMode::Parallel => 1,
        });
        h.finish()
    }
}

/// FNV-1a, 64 bit; enough for a configuration fingerprint.
struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, data: &[u8]) -> &mut Self {
        for &b in data {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self
    }

    fn f64(&mut self, v: f64) -> &mut Self {
        self.bytes(&v.to_bits().to_le_bytes())
    }

    fn u32(&mut self, v: u32) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    fn u8(&mut self, v: u8) -> &mut Self {
        self.bytes(&[v])
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Mean per-frame durations of the pipeline stages, max-over-satellites per
/// frame (matching the aggregate-arrival convention).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingAverages {
    /// Fragment fan-out from the capturer to the last neighbour.
    pub distribute_s: f64,
    /// Slowest processing share.
    pub process_s: f64,
    /// Slowest route leg (ISL transit plus downlink).
    pub route_s: f64,
    /// Slowest downlink component alone.
    pub downlink_s: f64,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub seed: u64,
    pub config_hash: u64,
    /// The monitored point of this run (sampled per run for region targets).
    pub target: GeodeticPoint,
    pub summary: AoiSummary,
    pub ledger: Vec<FrameRecord>,
    pub timing: TimingAverages,
}

/// Grid offsets of the processing set: the capturer, then the four-neighbour
/// ring, then distance-2 cells in plane-first order.
fn processing_offsets(n: u32) -> Vec<(i64, i64)> {
    let mut v: Vec<(i64, i64)> = vec![(0, 0)];
    if n >= 5 {
        v.extend([(0, -1), (0, 1), (-1, 0), (1, 0)]);
    }
    if n > 5 {
        const RING2: [(i64, i64); 8] =
            [(-2, 0), (-1, -1), (-1, 1), (0, -2), (0, 2), (1, -1), (1, 1), (2, 0)];
        v.extend(RING2.iter().take(n as usize - 5));
    }
    v
}

fn offset_id(base: SatelliteId, offset: (i64, i64), planes: u32, slots: u32) -> SatelliteId {
    SatelliteId {
        plane: (base.plane as i64 + offset.0).rem_euclid(planes as i64) as u32,
        slot: (base.slot as i64 + offset.1).rem_euclid(slots as i64) as u32,
    }
}

/// Runs one scenario to completion. Deterministic for a given (config, seed).
pub fn run_scenario(config: &ScenarioConfig, seed: u64) -> Result<ScenarioResult, Error> {
    config.validate()?;
    let constellation = Constellation::build(config.constellation)?;
    let link = config.link.resolve(&constellation)?;
    run_resolved(config, &constellation, &link, seed)
}

fn run_resolved(
    config: &ScenarioConfig,
    constellation: &Constellation,
    link: &LinkModel,
    seed: u64,
) -> Result<ScenarioResult, Error> {
    let topo = Topology::new(config.constellation());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let target = config.target.sample(&mut rng);

    let rho = config.frame.compression_factor()?;
    if rho < 1.0 {
        return Err(Error::Domain(format!("compression factor below 1 (got {rho})")));
    }
    let frame_bits = config.frame.frame_size_bits();
    let n_proc = config.n_processing_satellites as usize;
    let fragments = fragment(frame_bits, n_proc)?;
    let offsets = processing_offsets(config.n_processing_satellites);

    let radius = constellation.radius_km();
    let cos_lambda =
        coverage_central_angle_deg(config.constellation().altitude_km, config.beta_deg)
            .to_radians()
            .cos();

    let steps = (config.horizon_s / config.step_s + 1e-9).floor() as usize;
    let mut covered_epochs = 0usize;
    let mut hint: Option<usize> = None;
    let mut pipeline_free = 0.0_f64;
    let mut ledger: Vec<FrameRecord> = Vec::new();
    let mut timing_sums = TimingAverages::default();

    let mut capture_positions: Vec<Vec3> = Vec::new();
    let mut leg_positions: Vec<Vec3> = Vec::new();

    for k in 0..=steps {
        let t = k as f64 * config.step_s;
        let target_unit = ground_position(&target, t) * (1.0 / EARTH_RADIUS_KM);
        let covered = aoi::covers(constellation, radius, t, target_unit, cos_lambda, &mut hint);
        if covered {
            covered_epochs += 1;
        }
        if !covered || t + 1e-9 < pipeline_free {
            continue;
        }

        // Capture: the satellite nearest the target (smallest central angle,
        // hence smallest off-nadir) takes the frame; id order breaks ties.
        constellation.positions_into(t, &mut capture_positions);
        let threshold = cos_lambda * radius;
        let mut best: Option<(f64, usize)> = None;
        for (i, pos) in capture_positions.iter().enumerate() {
            let alignment = pos.dot(target_unit);
            if alignment >= threshold && best.map_or(true, |(b, _)| alignment > b) {
                best = Some((alignment, i));
            }
        }
        let capturer_index = best.expect("coverage test found a satellite").1;
        let capturer = constellation.id_at(capturer_index);

        let frame = simulate_frame(FrameContext {
            config,
            constellation,
            topo: &topo,
            link,
            rho,
            fragments: &fragments,
            offsets: &offsets,
            capture_positions: &capture_positions,
            leg_positions: &mut leg_positions,
            capturer,
            t_capture: t,
            index: ledger.len() + 1,
            rng: &mut rng,
        })?;

        pipeline_free = frame.processing_done_s;
        timing_sums.distribute_s += frame.timing.distribute_s;
        timing_sums.process_s += frame.timing.process_s;
        timing_sums.route_s += frame.timing.route_s;
        timing_sums.downlink_s += frame.timing.downlink_s;
        ledger.push(frame.record);
    }

    let coverage = covered_epochs as f64 / (steps + 1) as f64;
    let (aoi_avg, paoi_avg) = match average_aoi(&ledger, config.horizon_s) {
        Ok(aoi) => (Some(aoi), Some(average_paoi(&ledger, config.horizon_s)?)),
        Err(Error::NoDeliveredFrames) => (None, None),
        Err(e) => return Err(e),
    };
    let frames = ledger.len().max(1) as f64;
    let summary = AoiSummary {
        aoi_avg_s: aoi_avg,
        paoi_avg_s: paoi_avg,
        coverage_probability: coverage,
        delivered: ledger.iter().filter(|r| r.outcome == FrameOutcome::Delivered).count(),
        lost_comm: ledger.iter().filter(|r| r.outcome == FrameOutcome::LostComm).count(),
        lost_detection: ledger.iter().filter(|r| r.outcome == FrameOutcome::LostDetection).count(),
        horizon_s: config.horizon_s,
    };
    Ok(ScenarioResult {
        seed,
        config_hash: config.config_hash(),
        target,
        summary,
        ledger,
        timing: TimingAverages {
            distribute_s: timing_sums.distribute_s / frames,
            process_s: timing_sums.process_s / frames,
            route_s: timing_sums.route_s / frames,
            downlink_s: timing_sums.downlink_s / frames,
        },
    })
}

impl ScenarioConfig {
    fn constellation(&self) -> &ConstellationSpec {
        &self.constellation
    }
}

struct FrameContext<'a, R: RngExt> {
    config: &'a ScenarioConfig,
    constellation: &'a Constellation,
    topo: &'a Topology,
    link: &'a LinkModel,
    rho: f64,
    fragments: &'a [u64],
    offsets: &'a [(i64, i64)],
    capture_positions: &'a [Vec3],
    leg_positions: &'a mut Vec<Vec3>,
    capturer: SatelliteId,
    t_capture: f64,
    index: usize,
    rng: &'a mut R,
}

struct SimulatedFrame {
    record: FrameRecord,
    /// When the slowest share finishes processing; the pipeline is busy until
    /// then even if the frame is lost downstream.
    processing_done_s: f64,
    timing: TimingAverages,
}

fn simulate_frame<R: RngExt>(ctx: FrameContext<'_, R>) -> Result<SimulatedFrame, Error> {
    let spec = ctx.config.constellation();
    let processors: Vec<SatelliteId> = ctx
        .offsets
        .iter()
        .map(|&o| offset_id(ctx.capturer, o, spec.planes, spec.sats_per_plane))
        .collect();
    let n = processors.len();
    let t_i = ctx.t_capture;

    // Fragment fan-out. Each leg is the minimum-hop path at the capture
    // snapshot; with one transmit chain per link class, same-class legs queue
    // behind each other (the chain is charged with the first hop's
    // transmission, relays add their own hop times).
    let mut frag_arrival = vec![t_i; n];
    let mut distribution_legs: Vec<(RoutePath, u64)> = Vec::with_capacity(n - 1);
    let mut chain_intra = 0.0_f64;
    let mut chain_inter = 0.0_f64;
    for j in 1..n {
        let path = min_hop_path(ctx.topo, ctx.capture_positions, ctx.capturer, processors[j]);
        let bits = ctx.fragments[j] as f64;
        let hop_tx: Vec<f64> = path.hop_class.iter().map(|&c| bits / ctx.link.rate_for(c)).collect();
        let first_tx = hop_tx[0];
        let relay_tx: f64 = hop_tx[1..].iter().sum();
        let prop = path.hop_km.iter().sum::<f64>() / crate::constants::SPEED_OF_LIGHT_KM_S;
        let arrival = match ctx.config.distribution {
            DistributionMode::Sequential => {
                let chain = match path.hop_class[0] {
                    LinkClass::IntraPlane => &mut chain_intra,
                    LinkClass::InterPlane => &mut chain_inter,
                    LinkClass::Downlink => unreachable!("fan-out never leaves the grid"),
                };
                *chain += first_tx;
                t_i + *chain + relay_tx + prop
            }
            DistributionMode::Parallel => t_i + first_tx + relay_tx + prop,
        };
        frag_arrival[j] = arrival;
        distribution_legs.push((path, ctx.fragments[j]));
    }

    let mut comm_ok = true;
    for (path, bits) in &distribution_legs {
        comm_ok &= evaluate_route_loss(ctx.rng, path, *bits as f64, ctx.link)?;
    }

    // Processing: every participant draws its own complexity.
    let mut processing_done = vec![0.0_f64; n];
    let mut max_t_proc = 0.0_f64;
    for j in 0..n {
        let complexity = sample_complexity(ctx.rng, &ctx.config.compute);
        let t_proc = processing_time(ctx.fragments[j] as f64, complexity, &ctx.config.compute);
        processing_done[j] = frag_arrival[j] + t_proc;
        max_t_proc = max_t_proc.max(t_proc);
    }

    // Routing: each satellite sends its share of the detections when its
    // processing finishes, over the topology as it stands at that instant.
    let mut arrivals = vec![0.0_f64; n];
    let mut max_route = 0.0_f64;
    let mut max_downlink = 0.0_f64;
    for j in 0..n {
        let leg_start = processing_done[j];
        ctx.constellation.positions_into(leg_start, ctx.leg_positions);
        let ground = ground_position(&ctx.config.ground_station, leg_start);
        let payload_bits = ctx.fragments[j] as f64 * ctx.config.frame.alpha_vessels / ctx.rho;
        match route_to_ground(
            ctx.topo,
            ctx.leg_positions,
            processors[j],
            ground,
            ctx.config.min_elevation_deg,
        ) {
            Some(route) => {
                let isl_tx: f64 = route
                    .hop_class
                    .iter()
                    .map(|&c| payload_bits / ctx.link.rate_for(c))
                    .sum();
                let slant = route.downlink_km.expect("ground route carries a downlink hop");
                let downlink_tx = payload_bits / ctx.link.rate_rf_downlink_bps;
                let prop =
                    (route.isl_km() + slant) / crate::constants::SPEED_OF_LIGHT_KM_S;
                let route_time = isl_tx + downlink_tx + prop;
                arrivals[j] = leg_start + route_time;
                comm_ok &= evaluate_route_loss(ctx.rng, &route, payload_bits, ctx.link)?;
                max_route = max_route.max(route_time);
                max_downlink = max_downlink
                    .max(downlink_tx + slant / crate::constants::SPEED_OF_LIGHT_KM_S);
            }
            None => {
                // Nobody sees the ground station at this instant: the share
                // never leaves the grid and the frame is lost to comms.
                arrivals[j] = leg_start;
                comm_ok = false;
            }
        }
    }

    let detected = detection_succeeds(ctx.rng, ctx.config.frame.recall);
    let outcome = if !comm_ok {
        FrameOutcome::LostComm
    } else if !detected {
        FrameOutcome::LostDetection
    } else {
        FrameOutcome::Delivered
    };
    let complete = aggregate_arrival(&arrivals)?;
    let processing_done_s = processing_done.iter().copied().fold(0.0, f64::max);
    let distribute = frag_arrival.iter().copied().fold(0.0, f64::max) - t_i;

    Ok(SimulatedFrame {
        record: FrameRecord {
            index: ctx.index,
            capture_s: t_i,
            arrivals_s: arrivals,
            complete_s: complete,
            outcome,
        },
        processing_done_s,
        timing: TimingAverages {
            distribute_s: distribute,
            process_s: max_t_proc,
            route_s: max_route,
            downlink_s: max_downlink,
        },
    })
}

/// Aggregated outcome of `n_runs` independent replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub n_runs: usize,
    /// Replications that delivered at least one frame (age defined).
    pub runs_with_age: usize,
    pub aoi_mean_s: Option<f64>,
    pub aoi_stderr_s: Option<f64>,
    pub paoi_mean_s: Option<f64>,
    pub paoi_stderr_s: Option<f64>,
    pub p_m_mean: f64,
    pub p_m_stderr: f64,
    pub delivered: u64,
    pub lost_comm: u64,
    pub lost_detection: u64,
    pub config_hash: u64,
    pub run_summaries: Vec<AoiSummary>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-replication seed. Run 0 reuses the base seed so a single-run Monte
/// Carlo reproduces `run_scenario(config, base_seed)` exactly.
pub fn run_seed(base_seed: u64, run_index: usize) -> u64 {
    if run_index == 0 {
        base_seed
    } else {
        splitmix64(base_seed ^ splitmix64(run_index as u64))
    }
}

/// Runs `n_runs` replications in parallel, each with its own random stream
/// (and, for region targets, its own sampled target), and aggregates means
/// and standard errors. Aggregation is ordered by run index, so the result is
/// independent of worker scheduling.
pub fn monte_carlo(
    config: &ScenarioConfig,
    base_seed: u64,
    n_runs: usize,
) -> Result<MonteCarloResult, Error> {
    if n_runs == 0 {
        return Err(Error::Domain("monte carlo needs at least one run".into()));
    }
    config.validate()?;
    let constellation = Constellation::build(config.constellation)?;
    let link = config.link.resolve(&constellation)?;

    let results: Result<Vec<ScenarioResult>, Error> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_resolved(config, &constellation, &link, run_seed(base_seed, i)))
        .collect();
    let results = results?;

    let aoi: Vec<f64> = results.iter().filter_map(|r| r.summary.aoi_avg_s).collect();
    let paoi: Vec<f64> = results.iter().filter_map(|r| r.summary.paoi_avg_s).collect();
    let p_m: Vec<f64> = results.iter().map(|r| r.summary.coverage_probability).collect();
    let (p_m_mean, p_m_stderr) = mean_and_stderr(&p_m);
    let (aoi_mean, aoi_stderr) = mean_and_stderr(&aoi);
    let (paoi_mean, paoi_stderr) = mean_and_stderr(&paoi);

    Ok(MonteCarloResult {
        n_runs,
        runs_with_age: aoi.len(),
        aoi_mean_s: (!aoi.is_empty()).then_some(aoi_mean),
        aoi_stderr_s: (!aoi.is_empty()).then_some(aoi_stderr),
        paoi_mean_s: (!paoi.is_empty()).then_some(paoi_mean),
        paoi_stderr_s: (!paoi.is_empty()).then_some(paoi_stderr),
        p_m_mean,
        p_m_stderr,
        delivered: results.iter().map(|r| r.summary.delivered as u64).sum(),
        lost_comm: results.iter().map(|r| r.summary.lost_comm as u64).sum(),
        lost_detection: results.iter().map(|r| r.summary.lost_detection as u64).sum(),
        config_hash: config.config_hash(),
        run_summaries: results.into_iter().map(|r| r.summary).collect(),
    })
}

/// Which scenario knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Planes,
    SatsPerPlane,
    ProcessingSatellites,
}

impl SweepParameter {
    pub fn apply(&self, config: &mut ScenarioConfig, value: u32) {
        match self {
            SweepParameter::Planes => config.constellation.planes = value,
            SweepParameter::SatsPerPlane => config.constellation.sats_per_plane = value,
            SweepParameter::ProcessingSatellites => config.n_processing_satellites = value,
        }
    }
}

/// One sweep point and its aggregated outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: u32,
    pub outcome: MonteCarloResult,
}

/// Runs a Monte Carlo batch per parameter value, everything else held fixed.
/// Replication seeds depend only on the run index, so every point sees the
/// same targets and draw streams (paired comparisons across points); open
/// loss-law distance bounds are re-measured on each point's constellation.
pub fn sweep(
    config: &ScenarioConfig,
    parameter: SweepParameter,
    values: &[u32],
    base_seed: u64,
    n_runs: usize,
) -> Result<Vec<SweepRow>, Error> {
    if values.is_empty() {
        return Err(Error::Domain("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut point = config.clone();
            parameter.apply(&mut point, value);
            Ok(SweepRow { value, outcome: monte_carlo(&point, base_seed, n_runs)? })
        })
        .collect()
}
