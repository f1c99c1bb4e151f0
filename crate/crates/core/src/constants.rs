//! Physical constants used throughout the simulator.
//!
//! Unless a name says otherwise, distances are kilometres, times are seconds
//! and angles are degrees.

/// Standard gravitational parameter of the Earth (km³/s²).
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;

/// Mean Earth radius of the spherical model (km).
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Sidereal rotation period of the Earth (s). One full rotation of the ground
/// relative to the inertial frame; also the default observation horizon.
pub const SIDEREAL_DAY_S: f64 = 86_164.1;

/// Earth rotation rate (rad/s), 2π over the sidereal day.
pub const EARTH_ROTATION_RAD_S: f64 = std::f64::consts::TAU / SIDEREAL_DAY_S;

/// Speed of light in vacuum (km/s).
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;
