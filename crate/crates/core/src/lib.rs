//! Capacity-maximizing UAV swarm placement for a LOS MIMO backhaul.
//!
//! A swarm of `N` single-antenna UAVs talks to a distant `M_x x M_z`
//! uniform rectangular ground array. Pure line-of-sight propagation makes the
//! `M x N` channel highly correlated, so spatial multiplexing gains collapse
//! unless the UAV positions are chosen carefully. This crate implements:
//!
//! * [`geometry`] / [`channel`] — array and swarm geometry, exact-distance
//!   LOS channels, and the disturbance models (Rician fading, log-normal
//!   shadowing, training-based estimation error, motion error).
//! * [`metrics`] — capacity, the single-user bound, Gram orthogonality
//!   residual, LMMSE per-stream SINR / sum rate, and the uplink matched-filter
//!   design.
//! * [`optimal_set`] — the lattice of placements that orthogonalize the
//!   channel (uniform scaled grid, scaled shifts, integer jumps,
//!   permutations), a membership test that recovers the generating
//!   parameters, and the rigid-URA baseline.
//! * [`centralized`] — the offline minimal-travel solver: block coordinate
//!   descent alternating an exact assignment step with a convex shift step.
//! * [`force_field`] — the online distributed protocol where each UAV moves
//!   proportionally to a phase error measured against a designated neighbor.
//! * [`harness`] — scenario construction, seeded Monte-Carlo trial running,
//!   and CSV/JSON report emission.
//!
//! All randomized operations take an explicit RNG and are deterministic per
//! seed; independent trials can run concurrently.

pub mod assignment;
pub mod centralized;
pub mod channel;
pub mod force_field;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod optimal_set;
pub mod rng;

pub use channel::{ChannelMatrix, DisturbanceConfig, Provenance, Scaling};
pub use geometry::{EnvConstants, FarFieldReport, GroundArray, SwarmState};
pub use metrics::{LinkBudget, RateReport};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("swarm is empty")]
    EmptySwarm,
    #[error("UAV {index} is behind the array (y = {y})")]
    BehindArray { index: usize, y: f64 },
    #[error("{n} UAVs exceed the {m} ground antennas available for multiplexing")]
    TooManyStreams { n: usize, m: usize },
    #[error("UAV {uav} coincides with ground antenna {antenna}")]
    CoincidentPositions { uav: usize, antenna: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("K-factor must be non-negative, got {0}")]
    NegativeKFactor(f64),
    #[error("SNR must be non-negative, got {0}")]
    NegativeSnr(f64),
    #[error("operation requires a path-loss scaled channel")]
    RequiresPathLoss,
    #[error("channel has non-finite entries")]
    NonFiniteEntries,
    #[error("operation needs at least two streams, got {0}")]
    NeedTwoStreams(usize),
    #[error("link budget must have positive noise power and transmit power")]
    InvalidBudget,
    #[error("channel is identically zero")]
    ZeroChannel,
    #[error("{what} = {value} outside the admissible range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("{n} UAVs cannot occupy a full sub-grid of a {mx}x{mz} array")]
    GridMismatch { n: usize, mx: usize, mz: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed writing {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
