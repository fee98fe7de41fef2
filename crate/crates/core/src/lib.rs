//! Gradient flows of closed planar curves written in intrinsic coordinates
//! `U = (κ, g)`, coupled to densities carried by the curve.

pub mod curve_geometry;
pub mod energies;
pub mod error;
pub mod flows;
pub mod grid;
pub mod harness;
pub mod kinematics;
pub mod parallel;
pub mod surface_calculus;

pub use error::{CurveError, Result};
