//! Simulator of a low-Earth-orbit walker shell that monitors an ocean area for
//! vessels: whichever satellite is in position captures a frame, splits the
//! detection workload with its grid neighbours, and each participant routes its
//! compressed result through the inter-satellite-link mesh down to a ground
//! station. The library measures how fresh the aggregated picture at the ground
//! station stays (average and peak age of information) and how often the target
//! area is capturable at all (coverage probability).
//!
//! Module map:
//!
//! - [`constants`]: physical constants (one place, documented units).
//! - [`math`]: minimal 3-vector support.
//! - [`orbital`]: walker-shell construction, circular-orbit propagation,
//!   Earth-fixed-to-inertial rotation, off-nadir/elevation geometry.
//! - [`topology`]: the 4-neighbour ISL torus, minimum-hop/minimum-distance
//!   routing, gateway selection, adjacent-link distance bounds.
//! - [`task`]: frame sizing, semantic compression, fragmentation, randomized
//!   processing complexity and processing times, detection success.
//! - [`link`]: per-class link rates, transmission/propagation delays, and the
//!   distance-dependent packet-loss law evaluated along routes.
//! - [`aoi`]: the per-frame event ledger and the freshness metrics computed
//!   from it, plus an independent sampled-age oracle and coverage probability.
//! - [`sim`]: the capture→fragment→process→route→downlink event loop with
//!   Monte Carlo replication and constellation-dimensioning sweeps.

pub mod aoi;
pub mod constants;
pub mod error;
pub mod link;
pub mod math;
pub mod orbital;
pub mod sim;
pub mod task;
pub mod topology;

pub use aoi::{AoiSummary, FrameOutcome, FrameRecord};
pub use error::Error;
pub use link::{LinkModel, LossMode};
pub use math::Vec3;
pub use orbital::{
    CartesianState, Constellation, ConstellationSpec, Frame, GeodeticPoint, OrbitalElements,
    SatelliteId, ShellType,
};
pub use sim::{
    DistributionMode, LatLonRect, LinkSettings, LossDistanceReference, MonteCarloResult,
    ScenarioConfig, ScenarioResult, SweepParameter, SweepRow, TargetSpec, TimingAverages,
};
pub use task::{ComputeModel, FrameModel, TaskAssignment};
pub use topology::{LinkClass, RoutePath, Topology};
