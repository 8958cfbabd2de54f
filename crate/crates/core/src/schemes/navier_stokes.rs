use std::sync::Arc;

use super::{check_positive, check_rate, SchemeError};
use crate::lbm::{BoundaryKind, Boundaries, Equilibrium, EquilibriumError, FaceSide, SchemeSpec};

/// Equilibrium moments of the D2Q9 scheme with lattice velocity `λ`.
#[derive(Debug, Clone, Copy)]
pub struct NsEquilibrium {
    pub lambda: f64,
}

impl Equilibrium for NsEquilibrium {
    fn evaluate(&self, m: &[f64], meq: &mut [f64]) -> Result<(), EquilibriumError> {
        let (rho, qx, qy) = (m[0], m[1], m[2]);
        for v in [rho, qx, qy] {
            if !v.is_finite() {
                return Err(EquilibriumError::NonFinite(v));
            }
        }
        if rho <= 0.0 {
            return Err(EquilibriumError::NonPositiveDensity(rho));
        }
        let cs2 = self.lambda * self.lambda / 3.0;
        let q2 = (qx * qx + qy * qy) / rho;
        meq[0] = rho;
        meq[1] = qx;
        meq[2] = qy;
        meq[3] = 3.0 * (-2.0 * cs2 * rho + q2);
        meq[4] = -3.0 * cs2 * qx;
        meq[5] = -3.0 * cs2 * qy;
        meq[6] = 9.0 * (cs2 * cs2 * rho - cs2 * q2);
        meq[7] = (qx * qx - qy * qy) / rho;
        meq[8] = qx * qy / rho;
        Ok(())
    }
}

/// Physical parameters of the flow past an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsParams {
    pub lambda: f64,
    pub reynolds: f64,
    pub rho0: f64,
    pub u0: f64,
    /// Characteristic length of the obstacle.
    pub length: f64,
    /// Rate of the energy and third-order moments.
    pub s1: f64,
}

impl Default for NsParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            reynolds: 1200.0,
            rho0: 1.0,
            u0: 0.05,
            length: 0.0625,
            s1: 1.5,
        }
    }
}

impl NsParams {
    pub fn sound_speed(&self) -> f64 {
        self.lambda / 3f64.sqrt()
    }

    /// Dynamic viscosity `ρ0 u0 L / Re`.
    pub fn viscosity(&self) -> f64 {
        self.rho0 * self.u0 * self.length / self.reynolds
    }
}

/// `s_2 = (1/2 + μ / (c_s² Δt ρ0))^{-1}`.
pub fn ns_relaxation(params: &NsParams, dt: f64) -> f64 {
    let cs2 = params.lambda * params.lambda / 3.0;
    1.0 / (0.5 + params.viscosity() / (cs2 * dt * params.rho0))
}

/// Nine-velocity scheme for weakly compressible flows, with time step `dt` of the finest level.
pub fn ns_d2q9(params: &NsParams, dt: f64) -> Result<SchemeSpec, SchemeError> {
    check_positive("lambda", params.lambda)?;
    check_positive("reynolds", params.reynolds)?;
    check_positive("rho0", params.rho0)?;
    check_positive("length", params.length)?;
    check_positive("dt", dt)?;
    if !params.u0.is_finite() || params.u0.abs() >= params.sound_speed() {
        return Err(SchemeError::Parameter {
            name: "u0",
            value: params.u0,
        });
    }
    check_rate("s1", params.s1, false)?;
    let s2 = ns_relaxation(params, dt);
    check_rate("s2", s2, false)?;
    let velocities = vec![
        [0, 0, 0],
        [1, 0, 0],
        [0, 1, 0],
        [-1, 0, 0],
        [0, -1, 0],
        [1, 1, 0],
        [-1, 1, 0],
        [-1, -1, 0],
        [1, -1, 0],
    ];
    let l = params.lambda;
    let (l2, l3, l4) = (l * l, l * l * l, l * l * l * l);
    #[rustfmt::skip]
    let m = vec![
        1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
        0.0, l, 0.0, -l, 0.0, l, -l, -l, l,
        0.0, 0.0, l, 0.0, -l, l, l, -l, -l,
        -4.0 * l2, -l2, -l2, -l2, -l2, 2.0 * l2, 2.0 * l2, 2.0 * l2, 2.0 * l2,
        0.0, -2.0 * l3, 0.0, 2.0 * l3, 0.0, l3, -l3, -l3, l3,
        0.0, 0.0, -2.0 * l3, 0.0, 2.0 * l3, l3, l3, -l3, -l3,
        4.0 * l4, -2.0 * l4, -2.0 * l4, -2.0 * l4, -2.0 * l4, l4, l4, l4, l4,
        0.0, l2, -l2, l2, -l2, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, l2, -l2, l2, -l2,
    ];
    let s1 = params.s1;
    let relaxation = vec![0.0, 0.0, 0.0, s1, s1, s1, s1, s2, s2];
    Ok(SchemeSpec::new(
        "ns-d2q9",
        2,
        l,
        velocities,
        m,
        relaxation,
        Arc::new(NsEquilibrium { lambda: l }),
    )?)
}

/// Moving bounce-back imposing `(ρ0, ρ0 u0, 0)` on the inlet, top and bottom; copy on the outlet.
pub fn ns_boundaries(scheme: &SchemeSpec, params: &NsParams) -> Result<Boundaries, SchemeError> {
    let wall = BoundaryKind::moving_wall(
        scheme,
        &[params.rho0, params.rho0 * params.u0, 0.0],
    )?;
    let mut b = Boundaries::uniform(wall);
    b.set(0, FaceSide::High, BoundaryKind::Copy);
    Ok(b)
}
