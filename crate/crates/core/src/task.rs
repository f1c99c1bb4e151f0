//! The on-board workload model: how big a captured frame is, how it shrinks
//! to bounding boxes, how it is split across the processing satellites, and
//! how long the detection pass takes.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::Error;
use crate::orbital::SatelliteId;

/// Everything about a captured frame and the detector applied to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameModel {
    /// Ground area covered by one frame (km²).
    pub frame_area_km2: f64,
    /// Ground sample distance (m/pixel).
    pub gsd_m_per_px: f64,
    /// Resolution of the tiles the frame is cut into for processing.
    pub image_width_px: u32,
    pub image_height_px: u32,
    /// Average encoded size of one tile (bits).
    pub d_img_bits: f64,
    /// Average encoded size of one bounding box (bits).
    pub d_bbox_bits: f64,
    /// Mean number of detected vessels per tile.
    pub n_vessels_mean: f64,
    /// Fraction of tiles that contain vessels, in (0, 1].
    pub alpha_vessels: f64,
    /// Detector recall, used as the per-frame success probability, in [0, 1].
    pub recall: f64,
}

impl FrameModel {
    pub fn validate(&self) -> Result<(), Error> {
        let positive: [(&str, f64); 6] = [
            ("frame_area_km2", self.frame_area_km2),
            ("gsd_m_per_px", self.gsd_m_per_px),
            ("d_img_bits", self.d_img_bits),
            ("d_bbox_bits", self.d_bbox_bits),
            ("n_vessels_mean", self.n_vessels_mean),
            ("alpha_vessels", self.alpha_vessels),
        ];
        for (key, value) in positive {
            if !(value > 0.0) {
                return Err(Error::validation(key, format!("must be > 0 (got {value})")));
            }
        }
        if self.image_width_px == 0 || self.image_height_px == 0 {
            return Err(Error::validation("image_resolution", "tile resolution must be nonzero"));
        }
        if self.alpha_vessels > 1.0 {
            return Err(Error::validation(
                "alpha_vessels",
                format!("must lie in (0, 1] (got {})", self.alpha_vessels),
            ));
        }
        if !(0.0..=1.0).contains(&self.recall) {
            return Err(Error::validation(
                "recall",
                format!("must lie in [0, 1] (got {})", self.recall),
            ));
        }
        Ok(())
    }

    /// Number of processing tiles needed to cover the frame area.
    pub fn tiles_per_frame(&self) -> u64 {
        let tile_area_m2 =
            self.gsd_m_per_px * self.gsd_m_per_px * self.pixels_per_tile() as f64;
        (self.frame_area_km2 * 1.0e6 / tile_area_m2).ceil() as u64
    }

    pub fn pixels_per_tile(&self) -> u64 {
        self.image_width_px as u64 * self.image_height_px as u64
    }

    /// Total size of one captured frame in bits: tile count times tile size.
    pub fn frame_size_bits(&self) -> u64 {
        (self.tiles_per_frame() as f64 * self.d_img_bits).round() as u64
    }

    /// Compression factor from imagery to bounding boxes for this model.
    pub fn compression_factor(&self) -> Result<f64, Error> {
        compression_factor(self.d_img_bits, self.n_vessels_mean, self.d_bbox_bits)
    }
}

/// Ratio between the size of a tile and the size of its detected content.
pub fn compression_factor(d_img_bits: f64, n_vessels: f64, d_bbox_bits: f64) -> Result<f64, Error> {
    if !(d_img_bits > 0.0 && n_vessels > 0.0 && d_bbox_bits > 0.0) {
        return Err(Error::Domain(format!(
            "compression factor needs positive inputs (got {d_img_bits}, {n_vessels}, {d_bbox_bits})"
        )));
    }
    Ok(d_img_bits / (n_vessels * d_bbox_bits))
}

/// Bits forwarded to the ground for `x_bits` of captured imagery: the vessel
/// fraction of the frame divided by the compression factor.
pub fn semantic_payload(x_bits: f64, alpha_vessels: f64, rho: f64) -> Result<f64, Error> {
    if x_bits < 0.0 {
        return Err(Error::Domain(format!("frame size must be nonnegative (got {x_bits})")));
    }
    if !(alpha_vessels > 0.0 && alpha_vessels <= 1.0) {
        return Err(Error::Domain(format!("alpha_vessels must lie in (0, 1] (got {alpha_vessels})")));
    }
    if rho < 1.0 {
        return Err(Error::Domain(format!(
            "compression factor below 1 would inflate the payload (got {rho})"
        )));
    }
    Ok(x_bits * alpha_vessels / rho)
}

/// Splits `x_bits` into `n` shares that differ by at most one bit and sum to
/// the whole; earlier shares take the remainder.
pub fn fragment(x_bits: u64, n: usize) -> Result<Vec<u64>, Error> {
    if n == 0 {
        return Err(Error::Domain("cannot fragment into zero shares".into()));
    }
    let base = x_bits / n as u64;
    let remainder = (x_bits % n as u64) as usize;
    Ok((0..n).map(|i| base + u64::from(i < remainder)).collect())
}

/// Compute capability of one satellite plus the randomized detector cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeModel {
    pub f_cpu_hz: f64,
    pub n_cores: u32,
    /// Mean detector complexity (CPU cycles per bit).
    pub c_mean_cycles_per_bit: f64,
    /// Shape of the gamma law that randomizes the complexity. The scale is
    /// `c_mean / shape` so the mean stays `c_mean`; an infinite shape turns
    /// the complexity deterministic.
    pub gamma_shape: f64,
}

impl ComputeModel {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.f_cpu_hz > 0.0) {
            return Err(Error::validation("f_cpu_hz", format!("must be > 0 (got {})", self.f_cpu_hz)));
        }
        if self.n_cores == 0 {
            return Err(Error::validation("n_cores", "must be >= 1"));
        }
        if !(self.c_mean_cycles_per_bit > 0.0) {
            return Err(Error::validation(
                "c_mean_cycles_per_bit",
                format!("must be > 0 (got {})", self.c_mean_cycles_per_bit),
            ));
        }
        if !(self.gamma_shape > 0.0) {
            return Err(Error::validation(
                "gamma_shape",
                format!("must be > 0 (got {})", self.gamma_shape),
            ));
        }
        Ok(())
    }
}

/// Draws a detector complexity (cycles/bit) from the gamma law of `compute`.
pub fn sample_complexity<R: Rng>(rng: &mut R, compute: &ComputeModel) -> f64 {
    if compute.gamma_shape.is_infinite() {
        return compute.c_mean_cycles_per_bit;
    }
    let scale = compute.c_mean_cycles_per_bit / compute.gamma_shape;
    let gamma = Gamma::new(compute.gamma_shape, scale)
        .expect("validated compute model yields a well-formed gamma law");
    gamma.sample(rng)
}

/// Wall-clock seconds to run the detector over `x_fragment_bits` of imagery.
pub fn processing_time(x_fragment_bits: f64, c_cycles_per_bit: f64, compute: &ComputeModel) -> f64 {
    x_fragment_bits * c_cycles_per_bit / (compute.n_cores as f64 * compute.f_cpu_hz)
}

/// One Bernoulli trial with success probability `recall`: does the detector
/// find what is in the frame?
pub fn detection_succeeds<R: rand::RngExt>(rng: &mut R, recall: f64) -> bool {
    debug_assert!((0.0..=1.0).contains(&recall));
    rng.random::<f64>() < recall
}

/// A frame's workload split across the participating satellites.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskAssignment {
    /// The satellite that captured the frame; always the first processor.
    pub capturer: SatelliteId,
    /// Every satellite taking a share, capturer included.
    pub processors: Vec<SatelliteId>,
    /// Fragment size in bits per processor, aligned with `processors`.
    pub fragment_bits: Vec<u64>,
}

impl TaskAssignment {
    pub fn new(capturer: SatelliteId, processors: Vec<SatelliteId>, x_bits: u64) -> Result<Self, Error> {
        if processors.first() != Some(&capturer) {
            return Err(Error::Domain("the capturer must head the processor list".into()));
        }
        let fragment_bits = fragment(x_bits, processors.len())?;
        Ok(TaskAssignment { capturer, processors, fragment_bits })
    }
}
