//! Extremal nonpositively curved metric on Dyck's surface.
//!
//! The crate builds the piecewise-flat surface made of a flat Möbius band
//! and three hexagons, certifies its systole and area, reproduces the
//! hexagon optimization and case analysis, and compares capacities of the
//! flat and hyperbolic collars.

pub mod capacity;
pub mod constants;
pub mod geodesic;
pub mod hexopt;
pub mod surface;

pub use constants::{QuadraticNumber, SurfaceParameters};
pub use surface::ConeSurface;
