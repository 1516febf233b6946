//! Divergence-free mixed finite elements for the 2D Stokes problem.
//!
//! The velocity space couples continuous piecewise-linear vectors with
//! lowest-order Raviart-Thomas enrichment; pressures are piecewise constant
//! with zero mean. The discrete velocity is divergence-free in every element
//! and its error is independent of both the pressure and the viscosity.

pub mod assembly;
pub mod condense;
pub mod elements;
pub mod field;
pub mod harness;
pub mod interp;
pub mod manufactured;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod vtk;
