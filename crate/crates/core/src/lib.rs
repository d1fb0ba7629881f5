//! Numerical core for the Brown–Ravenhall operator of a one-electron atom in
//! its Foldy–Wouthuysen representation.
//!
//! The crate is `no_std` (with `alloc`). It provides the pointwise Dirac
//! algebra ([`dirac`]), partial-wave kernels ([`channels`]), radial grids and
//! operator assembly ([`grid`], [`operator`], [`galerkin`]), the half-space
//! extension and Dirichlet-to-Neumann map ([`extension`]), two eigenvalue
//! routes ([`eigen`]) and the numerical experiments ([`experiments`]).

#![no_std]

extern crate alloc;

pub mod channels;
pub mod dirac;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod extension;
pub mod galerkin;
pub mod grid;
pub mod operator;
pub mod params;
pub mod quadrature;
pub mod special;

pub use channels::{ChannelSpec, ChiProfile, RadialKernel};
pub use dirac::{MomentumVector, SpinorMatrix4};
pub use eigen::{MinimizationTrace, SolverRoute, SpectralResult};
pub use error::{Error, Result};
pub use extension::{BoundaryFunction, ExtensionField};
pub use grid::{MetricH12, RadialGrid};
pub use operator::{DiscreteOperator, Scheme};
pub use params::PhysParams;
