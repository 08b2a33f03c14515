//! Crate-wide error type.

use crate::lattice::Vertex;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex capacity exceeded: enumeration needs {needed} vertices, cap is {cap}")]
    CapacityExceeded { needed: u128, cap: u64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid conductance law: {0}")]
    InvalidLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("largest cluster has fewer than 2 vertices")]
    EmptyCluster,

    #[error("vertex {0} is not in the metric carrier")]
    CarrierMembership(Vertex),

    #[error("window too small: {0}")]
    InsufficientWindow(String),

    #[error("cubes do not nest inside the window: {0}")]
    Nesting(String),

    #[error("environments are not coupled: {0}")]
    CouplingMismatch(String),

    #[error("start vertex {0} is not in the cluster")]
    StartNotInCluster(Vertex),

    #[error("walk left the window at time {time} (vertex {vertex}); enlarge the window")]
    WindowExit { time: f64, vertex: Vertex },

    #[error("path horizon {have} is shorter than required {needed}")]
    InsufficientHorizon { have: f64, needed: f64 },

    #[error("path never enters the trace carrier within its horizon")]
    NeverEntersTraceCarrier,

    #[error("start vertex is outside the region")]
    StartOutsideRegion,

    #[error("spectral cap exceeded: carrier has {have} vertices, cap is {cap}")]
    SpectralCapExceeded { have: usize, cap: usize },

    #[error("instance carrier is disconnected")]
    Disconnected,

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("function support escapes the window")]
    SupportEscapesWindow,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("snapshot parse error at line {line}: {message}")]
    SnapshotParse { line: usize, message: String },
}
