//! Two-grid staggered Nyström discretization of the hypersingular boundary
//! integral equation for the exterior Neumann Helmholtz problem in 2D.
//!
//! The numerical core is generic over the real type (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the experiment harness uses.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod dense_solver;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod potential;
pub mod scalar;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = geometry::Vec2<f64>;
pub type Curve = geometry::ParametricCurve<f64>;
pub type Scatterer = geometry::ScattererConfig<f64>;
pub type Grid = assembly::StaggeredGrid<f64>;
pub type Matrix = dense_solver::ComplexMatrix<f64>;
pub type Lu = dense_solver::LuFactors<f64>;
pub type Density = potential::DensitySolution<f64>;
pub type Fourier = spectral::FourierVector<f64>;
