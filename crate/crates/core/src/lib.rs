//! Closed-loop GPS L1 C/A digital twin.
//!
//! The crate synthesizes complex IF sample streams from broadcast ephemerides
//! and user trajectories, runs a software receiver over them and compares the
//! receiver outputs with the truth model that produced the samples.
//!
//! Data flows through the modules in this order:
//!
//! * [`scenario`] parses configuration, RINEX navigation files and builds trajectories.
//! * [`orbits`] evaluates broadcast orbits and frame conversions.
//! * [`channel`] turns geometry, atmosphere and link budget into per-satellite delay tracks.
//! * [`codegen`] produces C/A codes and LNAV navigation bits.
//! * [`synth`] renders samples, adds noise and quantizes.
//! * [`impairments`] adds interference and multipath.
//! * [`receiver`] acquires and tracks signals.
//! * [`navigation`] decodes the message, forms pseudoranges and solves PVT.
//! * [`analysis`] provides PSD, Allan deviation, clock fits and observable comparison.
//! * [`pipeline`] binds everything into the generate / process / validate commands.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod codegen;
pub mod constants;
pub mod error;
pub mod exec;
pub mod impairments;
pub mod io;
pub mod navigation;
pub mod orbits;
pub mod pipeline;
pub mod receiver;
pub mod scenario;
pub mod synth;
pub mod time;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// ECEF or local 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;
