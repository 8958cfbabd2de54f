//! Concrete schemes, initial data and boundary setups for the reference problems.

mod advection;
mod euler;
mod navier_stokes;
mod obstacle;

pub use advection::{
    advection_d1q2, advection_d2q4, advection_d3q6, sphere_indicator, LinearAdvection,
};
pub use euler::{
    euler_d2q4, euler_slip_walls, lax_liu, lax_liu_initial, parse_quadrants, EulerEquilibrium, EulerParams, EulerState,
    QuadrantData, GAMMA_GAS,
};
pub use navier_stokes::{ns_boundaries, ns_d2q9, ns_relaxation, NsEquilibrium, NsParams};
pub use obstacle::{apply_obstacle, apply_obstacle_uniform, Disc, ObstacleSpec, VolumeFractions};

use thiserror::Error;

use crate::lbm::{LbmError, SchemeSpec};
use crate::mesh::{CellId, Lattice, MAX_DIM};
use crate::multiresolution::UniformField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("relaxation rate {name} = {value} outside {range}")]
    Relaxation {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("velocity component {v} exceeds the lattice velocity {lambda}")]
    Cfl { v: f64, lambda: f64 },
    #[error("unknown Lax-Liu configuration {0}")]
    UnknownConfig(u32),
    #[error("quadrant data line {line}: {msg}")]
    Quadrants { line: usize, msg: String },
    #[error("initial state at {center:?}: {msg}")]
    InitialState { center: [f64; MAX_DIM], msg: String },
    #[error(transparent)]
    Lbm(#[from] LbmError),
}

pub(crate) fn check_rate(name: &'static str, value: f64, closed: bool) -> Result<(), SchemeError> {
    let ok = value > 0.0 && (value < 2.0 || (closed && value == 2.0));
    if ok {
        Ok(())
    } else {
        Err(SchemeError::Relaxation {
            name,
            value,
            range: if closed { "(0, 2]" } else { "(0, 2)" },
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), SchemeError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SchemeError::Parameter { name, value })
    }
}

/// Populations at equilibrium on every cell of `level`, from conserved moments given as a
/// function of the cell center.
pub fn equilibrium_field<F>(
    scheme: &SchemeSpec,
    lattice: Lattice,
    level: u32,
    mut conserved: F,
) -> Result<UniformField, SchemeError>
where
    F: FnMut([f64; MAX_DIM]) -> Vec<f64>,
{
    let dim = lattice.dim();
    let mut err = None;
    let field = UniformField::from_fn(lattice, level, scheme.q(), |k, out| {
        if err.is_some() {
            return;
        }
        let center = lattice.geometry(&CellId::new(level, k)).center(dim);
        match scheme.equilibrium_populations(&conserved(center)) {
            Ok(f) => out.copy_from_slice(&f),
            Err(e) => {
                err = Some(SchemeError::InitialState {
                    center,
                    msg: e.to_string(),
                })
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(field),
    }
}
