//! Phase-coherent narrowband snapshot SLAM for distributed-MIMO networks.
//!
//! A network of `N` phase-synchronized single-antenna access points receives a
//! single narrowband pilot symbol from a single-antenna user equipment (UE),
//! directly and via single-bounce interactions with reflecting surfaces and
//! point scatterers. The crate provides:
//!
//! * [`scene`] — geometric scene model: APs, UE, surfaces, scatterers, and the
//!   mirror-image (virtual UE) construction.
//! * [`forward`] — forward signal model: path delays/gains, per-path phases,
//!   noise, and snapshot synthesis.
//! * [`imaging`] — correlation imaging over dense spatial grids, steering
//!   vectors, the spatial ambiguity function, and peak extraction.
//! * [`slam`] — iterative detect/estimate/cancel snapshot SLAM.
//! * [`montecarlo`] — randomized detection-probability sweeps over grid
//!   resolutions, with an oracle perfect-removal variant.
//! * [`cli`] — scenario files, CSV/PGM emission, and the `snapslam` binary's
//!   subcommand implementations.
//!
//! All core operations are pure functions of their inputs plus an explicit
//! seed, and every parallel kernel is bit-reproducible regardless of thread
//! count.

pub mod cli;
pub mod forward;
pub mod imaging;
pub mod montecarlo;
pub mod rng;
pub mod scene;
pub mod slam;
mod trig;

use thiserror::Error;

/// Errors produced by the core algorithms.
#[derive(Debug, Error)]
pub enum Error {
    /// Line from AP to mirror image never crosses the surface plane.
    #[error("ParallelLine: AP-to-mirror-image line is parallel to the surface")]
    ParallelLine,
    /// A path involves a distance below the coincidence tolerance.
    #[error("DegenerateGeometry: {0}")]
    DegenerateGeometry(String),
    /// Vector lengths disagree (snapshot vs steering vector vs AP count).
    #[error("LengthMismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// Requested grid exceeds the configured cell cap.
    #[error("GridTooLarge: {cells} cells exceeds cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },
    /// Grid bounds or spacing are invalid.
    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),
    /// Image holds no cells.
    #[error("EmptyImage: image has no cells")]
    EmptyImage,
    /// Phase estimate undefined: the projected residual has no energy.
    #[error("DegenerateEstimate: sum of squared projected amplitudes is zero")]
    DegenerateEstimate,
    /// A surface was constructed from a zero normal.
    #[error("ZeroNormal: surface normal must be nonzero")]
    ZeroNormal,
    /// A stop rule must carry at least one criterion.
    #[error("EmptyStopRule: no stopping criterion configured")]
    EmptyStopRule,
    /// Scenario failed validation.
    #[error("InvalidScenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
