//! Numerical verification toolkit for zero-energy states of line-energy
//! Ginzburg–Landau models: boundary geometry, the triple defect functional,
//! exact eikonal fields with jump sets, kinetic dissipation, Lagrangian
//! characteristic tracing, grid energies and the stability sweeps.

pub mod defect;
pub mod energy;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod kinetic;
pub mod lagrangian;
pub mod numerics;
pub mod report;
pub mod stability;

pub use error::{Error, Result};
pub use geometry::Point;
