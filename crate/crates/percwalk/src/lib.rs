//! Random walks among random conductances on lattices with a boundary.
//!
//! The crate simulates variable/constant speed random walks on the largest
//! percolation-type cluster of i.i.d. conductance environments over `Z^d`,
//! orthants `Z_+^{d1} x Z^{d2}`, and boxes `[-n,n]^d`, and verifies at desk
//! scale that the diffusively rescaled walk behaves like a reflecting Brownian
//! motion: marginal laws, heat kernels, mixing times, exit-time envelopes,
//! Dirichlet energies, and the supporting cluster-geometry estimates.
//!
//! Module map:
//! - [`lattice`]: ambient graphs, vertex enumeration, corner-cube decomposition
//! - [`environment`]: conductance sampling, edge classes, clusters and holes
//! - [`geometry`]: chemical metrics, good/very-good balls, block events
//! - [`walk`]: event-driven walk simulation, trace process, path functionals
//! - [`spectral`]: dense generators, resolvents, heat kernels, mixing times
//! - [`continuum`]: reflecting-Brownian-motion reference oracles
//! - [`stats`]: estimators tying simulation to the continuum oracles
//! - [`cli`]: experiment harness behind the `percwalk` binary

pub mod cli;
pub mod continuum;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
