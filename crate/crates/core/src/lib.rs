//! Fully adaptive multiresolution lattice Boltzmann methods.
//!
//! The solution lives on the complete leaves of a graded dyadic tree. Each time step adapts the
//! tree by thresholding multiresolution details, streams with reconstructed fluxes that mimic the
//! uniform finest-level scheme, and collides on the leaves only.

#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod lbm;
pub mod mesh;
pub mod multiresolution;
pub mod schemes;
pub mod solver;
