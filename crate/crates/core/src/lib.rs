//! Steklov spectra on planar domains and the Fourier–Steklov description of
//! Sobolev trace spaces built on top of them.
//!
//! The crate is `no_std` compatible (it needs `alloc`). Everything that
//! touches files, the command line or serialization lives in the
//! `steklov-trace` companion crate.
//!
//! Module map:
//!
//! - [`geometry`]: disks, rectangle and polygon meshes, boundary parameterizations.
//! - [`disk_spectral`]: per-angular-mode spectra on the disk and the polynomial kernel checker.
//! - [`fem`]: P1 / bicubic Hermite assembly, boundary Schur reduction and the dense eigensolve.
//! - [`trace_spaces`]: Steklov expansions, weighted trace norms, extension, membership verdicts.
//! - [`compatibility`]: total-trace compatibility tests for `(γ0, γ1)` pairs.
//! - [`besov`]: Gagliardo and finite-difference Besov seminorm oracles.
//! - [`asymptotics`]: Weyl-law fits and sequence-space views.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::should_implement_trait
)]

extern crate alloc;

pub mod asymptotics;
pub mod besov;
pub mod compatibility;
pub mod disk_spectral;
mod error;
pub mod fem;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod quadrature;
pub mod spectrum;
pub mod trace_spaces;

pub use error::{Error, Result};
pub use geometry::{
    BoundaryNode, BoundaryParam, BoundarySamples, DiskDomain, ElementType, Mesh2D, Point,
};
pub use spectrum::{Discretization, ProblemKind, Spectrum, SteklovProblemSpec};
