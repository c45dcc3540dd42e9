//! Numerical laboratory for continuous-time random walks on random point
//! processes with jump rates `exp(-|x - y|^alpha)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`pointprocess`] samples environments (homogeneous and inhomogeneous
//!   Poisson, thinned lattices) and computes the local regularity
//!   statistics `R_A` and `S_ell`.
//! * [`walk`] assembles the sparse rate graph and the three reversible
//!   generators (unit, full and hybrid weights).
//! * [`isoperimetry`] computes cut conductances, exact Cheeger constants and
//!   isoperimetric profiles by enumeration, and sweep / trap upper bounds.
//! * [`spectral`] computes spectral gaps, heat kernels, exact uniform mixing
//!   times, spectral profiles and the profile-integral mixing bounds.
//! * [`percolation`] holds the site-percolation diagnostics and the
//!   multiscale grey-cube constructions.
//! * [`experiment`] is the sweep harness: configuration files, scaling and
//!   transition runs, exponent fits and the regularity check.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the default
//! `parallel` feature they run on rayon, otherwise sequentially. Results
//! never depend on the worker count.

pub mod error;
pub mod exec;
pub mod experiment;
pub mod isoperimetry;
pub mod percolation;
pub mod pointprocess;
pub mod rng;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use exec::Execution;
pub use pointprocess::PointSet;
pub use walk::{Model, RateGraph, WalkGenerator};
