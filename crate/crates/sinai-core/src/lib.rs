//! Numerical core for the finite-horizon Sinai billiard flow.
//!
//! This crate implements the dynamical objects of a planar Lorentz gas with
//! strictly convex scatterers on a rectangular torus: the exact flow and its
//! collision (Poincaré) map, the linearized dynamics in Jacobi coordinates,
//! invariant cone fields, homogeneity strips and singularity curves,
//! admissible stable curves with their backward partitions and growth sums,
//! an approximate unstable foliation built by seeding, pushing forward and
//! interpolating across gaps, and estimators for correlation decay and
//! Ruelle–Pollicott resonances.
//!
//! Everything here is pure computation over immutable table data; IO, file
//! formats and the command line live in the companion `sinai` crate.  The
//! crate is `no_std` compatible (with `alloc`); the default `std` feature
//! only switches float intrinsics and downstream conveniences.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod curves;
pub mod error;
pub mod flow;
pub mod foliation;
pub mod geometry;
pub mod map;
pub mod math;
pub mod rng;
pub mod stats;
pub mod tangent;

pub use error::SinaiError;
pub use flow::{CollisionEvent, FlowPoint, Trajectory};
pub use geometry::{ScattererBoundary, Table, TableConfig, TorusDomain, ValidationReport};
pub use map::MapPoint;
pub use tangent::{Cone, JacobiVector};

/// Crate result alias.
pub type Result<T> = core::result::Result<T, SinaiError>;
