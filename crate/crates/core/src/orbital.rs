//! Walker-shell construction, circular two-body propagation and the visibility
//! geometry behind frame capture and downlink selection.
//!
//! The Earth is a rotating sphere of radius [`EARTH_RADIUS_KM`]; orbits are
//! circular with no perturbations, so a satellite is fully described by its
//! plane's right ascension, the shell inclination and its anomaly at epoch.
//! Plane 0 / slot 0 crosses the ascending node at t = 0 with RAAN 0°.

use std::fmt;

use crate::constants::{EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S, MU_EARTH_KM3_S2};
use crate::error::Error;
use crate::math::Vec3;

/// Identifies one satellite as (orbital plane, slot within the plane).
/// Ordering is lexicographic, plane first; it is used for deterministic
/// tie-breaking throughout the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SatelliteId {
    pub plane: u32,
    pub slot: u32,
}

impl fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}s{}", self.plane, self.slot)
    }
}

/// How the ascending nodes of the shell are spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShellType {
    /// Near-polar layout, nodes evenly spaced over 180°.
    Star,
    /// Inclined layout, nodes evenly spaced over 360°.
    Delta,
}

/// Geometry of one orbital shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationSpec {
    pub planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub shell: ShellType,
    /// Inter-plane slot offset: plane p is shifted by
    /// `p * phasing_factor * 360 / (planes * sats_per_plane)` degrees of anomaly.
    pub phasing_factor: u32,
}

impl ConstellationSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.planes < 1 {
            return Err(Error::validation("planes", format!("must be >= 1 (got {})", self.planes)));
        }
        if self.sats_per_plane < 1 {
            return Err(Error::validation(
                "sats_per_plane",
                format!("must be >= 1 (got {})", self.sats_per_plane),
            ));
        }
        if !(self.altitude_km > 0.0) {
            return Err(Error::validation(
                "altitude_km",
                format!("must be > 0 (got {})", self.altitude_km),
            ));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::validation(
                "inclination_deg",
                format!("must lie in [0, 180] (got {})", self.inclination_deg),
            ));
        }
        if self.phasing_factor >= self.planes {
            return Err(Error::validation(
                "phasing_factor",
                format!("must lie in [0, planes) (got {} with {} planes)", self.phasing_factor, self.planes),
            ));
        }
        Ok(())
    }

    pub fn satellite_count(&self) -> usize {
        self.planes as usize * self.sats_per_plane as usize
    }

    /// RAAN separation of adjacent planes: 180°/planes for a star shell,
    /// 360°/planes for a delta shell.
    pub fn raan_spacing_deg(&self) -> f64 {
        match self.shell {
            ShellType::Star => 180.0 / self.planes as f64,
            ShellType::Delta => 360.0 / self.planes as f64,
        }
    }

    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }
}

/// Reference frame tag for a Cartesian position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Inertial,
    EarthFixed,
}

/// A position (km) together with the frame it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub position: Vec3,
    pub frame: Frame,
}

/// Latitude/longitude on the spherical Earth, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodeticPoint {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl GeodeticPoint {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Self {
        GeodeticPoint { latitude_deg, longitude_deg }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::validation(
                "latitude_deg",
                format!("must lie in [-90, 90] (got {})", self.latitude_deg),
            ));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::validation(
                "longitude_deg",
                format!("must lie in [-180, 180] (got {})", self.longitude_deg),
            ));
        }
        Ok(())
    }
}

/// Circular-orbit elements assigned to one satellite at epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub raan_deg: f64,
    pub anomaly_deg: f64,
    pub inclination_deg: f64,
    pub radius_km: f64,
}

/// A built walker shell with cached per-plane axes for fast propagation.
#[derive(Debug, Clone)]
pub struct Constellation {
    spec: ConstellationSpec,
    sats: Vec<(SatelliteId, OrbitalElements)>,
    anomaly_rad: Vec<f64>,
    /// Per-plane orthonormal basis of the orbit circle: position(u) is
    /// `radius * (cos u * axes[0] + sin u * axes[1])`.
    plane_axes: Vec<[Vec3; 2]>,
    radius_km: f64,
    mean_motion_rad_s: f64,
}

impl Constellation {
    /// Builds the shell from its spec. Satellites are emitted plane-major and
    /// slot-minor, so the output is deterministic and order-stable.
    pub fn build(spec: ConstellationSpec) -> Result<Self, Error> {
        spec.validate()?;
        let radius_km = spec.orbit_radius_km();
        let mean_motion_rad_s = (MU_EARTH_KM3_S2 / radius_km.powi(3)).sqrt();
        let raan_step = spec.raan_spacing_deg();
        let slot_step = 360.0 / spec.sats_per_plane as f64;
        let phase_step = spec.phasing_factor as f64 * 360.0 / spec.satellite_count() as f64;

        let inc_rad = spec.inclination_deg.to_radians();
        let (sin_i, cos_i) = inc_rad.sin_cos();

        let mut sats = Vec::with_capacity(spec.satellite_count());
        let mut anomaly_rad = Vec::with_capacity(spec.satellite_count());
        let mut plane_axes = Vec::with_capacity(spec.planes as usize);
        for p in 0..spec.planes {
            let raan_deg = p as f64 * raan_step;
            let (sin_o, cos_o) = raan_deg.to_radians().sin_cos();
            // Column vectors of R_z(raan) * R_x(inclination) applied to the
            // in-plane unit vectors.
            plane_axes.push([
                Vec3::new(cos_o, sin_o, 0.0),
                Vec3::new(-sin_o * cos_i, cos_o * cos_i, sin_i),
            ]);
            for s in 0..spec.sats_per_plane {
                let anomaly_deg = (s as f64 * slot_step + p as f64 * phase_step) % 360.0;
                let id = SatelliteId { plane: p, slot: s };
                sats.push((
                    id,
                    OrbitalElements {
                        raan_deg,
                        anomaly_deg,
                        inclination_deg: spec.inclination_deg,
                        radius_km,
                    },
                ));
                anomaly_rad.push(anomaly_deg.to_radians());
            }
        }

        Ok(Constellation { spec, sats, anomaly_rad, plane_axes, radius_km, mean_motion_rad_s })
    }

    pub fn spec(&self) -> &ConstellationSpec {
        &self.spec
    }

    pub fn satellites(&self) -> &[(SatelliteId, OrbitalElements)] {
        &self.sats
    }

    pub fn len(&self) -> usize {
        self.sats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sats.is_empty()
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn mean_motion_rad_s(&self) -> f64 {
        self.mean_motion_rad_s
    }

    pub fn period_s(&self) -> f64 {
        std::f64::consts::TAU / self.mean_motion_rad_s
    }

    pub fn index_of(&self, id: SatelliteId) -> usize {
        id.plane as usize * self.spec.sats_per_plane as usize + id.slot as usize
    }

    pub fn id_at(&self, index: usize) -> SatelliteId {
        self.sats[index].0
    }

    /// Inertial position of satellite `index` at `t` seconds past epoch.
    pub fn position_at(&self, index: usize, t: f64) -> Vec3 {
        let u = self.anomaly_rad[index] + self.mean_motion_rad_s * t;
        let (sin_u, cos_u) = u.sin_cos();
        let axes = &self.plane_axes[index / self.spec.sats_per_plane as usize];
        (axes[0] * cos_u + axes[1] * sin_u) * self.radius_km
    }

    /// Inertial state of a satellite at `t` seconds past epoch (t >= 0).
    pub fn propagate(&self, id: SatelliteId, t: f64) -> CartesianState {
        CartesianState { position: self.position_at(self.index_of(id), t), frame: Frame::Inertial }
    }

    /// Fills `buf` with the inertial positions of every satellite at `t`,
    /// indexed like [`Constellation::satellites`].
    pub fn positions_into(&self, t: f64, buf: &mut Vec<Vec3>) {
        buf.clear();
        buf.reserve(self.sats.len());
        let n = self.spec.sats_per_plane as usize;
        for (i, &anom) in self.anomaly_rad.iter().enumerate() {
            let u = anom + self.mean_motion_rad_s * t;
            let (sin_u, cos_u) = u.sin_cos();
            let axes = &self.plane_axes[i / n];
            buf.push((axes[0] * cos_u + axes[1] * sin_u) * self.radius_km);
        }
    }

    pub fn positions(&self, t: f64) -> Vec<Vec3> {
        let mut buf = Vec::new();
        self.positions_into(t, &mut buf);
        buf
    }
}

/// Inertial position of a ground point at `t` seconds past epoch. The Earth
/// rotates at the sidereal rate; at t = 0 longitude 0 lies along +x.
pub fn ground_to_inertial(pt: &GeodeticPoint, t: f64) -> CartesianState {
    CartesianState { position: ground_position(pt, t), frame: Frame::Inertial }
}

pub(crate) fn ground_position(pt: &GeodeticPoint, t: f64) -> Vec3 {
    let lat = pt.latitude_deg.to_radians();
    let lon = pt.longitude_deg.to_radians() + EARTH_ROTATION_RAD_S * t;
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    Vec3::new(cos_lat * cos_lon, cos_lat * sin_lon, sin_lat) * EARTH_RADIUS_KM
}

/// Angle at the satellite between straight down (towards the Earth centre) and
/// the line of sight to the target, in degrees within [0, 180].
///
/// Both states must share a frame; coincident positions have no defined
/// viewing direction and report a geometry error.
pub fn off_nadir_angle(sat: &CartesianState, target: &CartesianState) -> Result<f64, Error> {
    if sat.frame != target.frame {
        return Err(Error::Geometry("off-nadir angle needs both positions in one frame".into()));
    }
    off_nadir_deg(sat.position, target.position)
}

pub(crate) fn off_nadir_deg(sat: Vec3, target: Vec3) -> Result<f64, Error> {
    let los = target - sat;
    if los.norm_sq() < 1e-12 {
        return Err(Error::Geometry("target coincides with the satellite position".into()));
    }
    Ok((-sat).angle_to(los).to_degrees())
}

/// Elevation of the satellite above the local horizontal of a ground point,
/// in degrees within [-90, 90]. Both states must share a frame.
pub fn elevation_angle(ground: &CartesianState, sat: &CartesianState) -> f64 {
    debug_assert_eq!(ground.frame, sat.frame);
    elevation_deg(ground.position, sat.position)
}

pub(crate) fn elevation_deg(ground: Vec3, sat: Vec3) -> f64 {
    90.0 - ground.angle_to(sat - ground).to_degrees()
}

/// Off-nadir angle at which the Earth limb sits, `asin(R / (R + h))`, degrees.
pub fn horizon_off_nadir_deg(altitude_km: f64) -> f64 {
    (EARTH_RADIUS_KM / (EARTH_RADIUS_KM + altitude_km)).asin().to_degrees()
}

/// Largest Earth-central angle between the sub-satellite point and a surface
/// target that can be captured with an off-nadir limit of `beta_deg`, degrees.
///
/// From the triangle Earth centre / satellite / target,
/// `sin γ = ((R + h) / R) sin β` with the obtuse root for γ, which gives a
/// central angle of `asin((R+h)/R sin β) − β`. An off-nadir limit at or past
/// the limb is capped at the horizon arc `acos(R / (R + h))`: the far side of
/// the Earth is never capturable, whatever the camera cone allows.
pub fn coverage_central_angle_deg(altitude_km: f64, beta_deg: f64) -> f64 {
    let ratio = EARTH_RADIUS_KM / (EARTH_RADIUS_KM + altitude_km);
    let horizon_deg = ratio.acos().to_degrees();
    if beta_deg <= 0.0 {
        return 0.0;
    }
    if beta_deg >= ratio.asin().to_degrees() {
        return horizon_deg;
    }
    let gamma = (beta_deg.to_radians().sin() / ratio).asin().to_degrees();
    (gamma - beta_deg).min(horizon_deg)
}
