use std::sync::Arc;

use super::{check_positive, check_rate, equilibrium_field, SchemeError};
use crate::lbm::{BoundaryKind, Boundaries, Equilibrium, EquilibriumError, FaceSide, SchemeSpec};
use crate::mesh::{Index, Lattice};
use crate::multiresolution::UniformField;

/// Ratio of specific heats.
pub const GAMMA_GAS: f64 = 1.4;

const CFG3: &str = include_str!("../../data/lax_liu_cfg3.txt");
const CFG12: &str = include_str!("../../data/lax_liu_cfg12.txt");

/// Conserved variables `(ρ, ρu, ρv, E)` of the two-dimensional Euler system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub qx: f64,
    pub qy: f64,
    pub energy: f64,
}

impl EulerState {
    pub fn from_primitive(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self {
            rho,
            qx: rho * u,
            qy: rho * v,
            energy: p / (GAMMA_GAS - 1.0) + 0.5 * rho * (u * u + v * v),
        }
    }

    pub fn from_conserved(u: [f64; 4]) -> Self {
        Self {
            rho: u[0],
            qx: u[1],
            qy: u[2],
            energy: u[3],
        }
    }

    pub fn conserved(&self) -> [f64; 4] {
        [self.rho, self.qx, self.qy, self.energy]
    }

    pub fn pressure(&self) -> f64 {
        (GAMMA_GAS - 1.0) * (self.energy - 0.5 * (self.qx * self.qx + self.qy * self.qy) / self.rho)
    }

    /// `Φ_x(u)`.
    pub fn flux_x(&self) -> [f64; 4] {
        let p = self.pressure();
        let u = self.qx / self.rho;
        [self.qx, self.qx * u + p, self.qy * u, (self.energy + p) * u]
    }

    /// `Φ_y(u)`.
    pub fn flux_y(&self) -> [f64; 4] {
        let p = self.pressure();
        let v = self.qy / self.rho;
        [self.qy, self.qx * v, self.qy * v + p, (self.energy + p) * v]
    }
}

/// Equilibria of four D2Q4 blocks coupled through the Euler fluxes. Block `i` holds moments
/// `4i..4i+4` = `(u_i, Φ_x,i, Φ_y,i, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EulerEquilibrium;

impl Equilibrium for EulerEquilibrium {
    fn evaluate(&self, m: &[f64], meq: &mut [f64]) -> Result<(), EquilibriumError> {
        let state = EulerState::from_conserved([m[0], m[4], m[8], m[12]]);
        for v in state.conserved() {
            if !v.is_finite() {
                return Err(EquilibriumError::NonFinite(v));
            }
        }
        if state.rho <= 0.0 {
            return Err(EquilibriumError::NonPositiveDensity(state.rho));
        }
        let fx = state.flux_x();
        let fy = state.flux_y();
        let u = state.conserved();
        for i in 0..4 {
            meq[4 * i] = u[i];
            meq[4 * i + 1] = fx[i];
            meq[4 * i + 2] = fy[i];
            meq[4 * i + 3] = 0.0;
        }
        Ok(())
    }
}

/// Parameters of the vectorial D2Q4 Euler scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub lambda: f64,
    /// `s^q` per conserved variable.
    pub s_q: [f64; 4],
    /// `s^{xy}` per conserved variable.
    pub s_xy: [f64; 4],
}

impl Default for EulerParams {
    fn default() -> Self {
        Self {
            lambda: 5.0,
            s_q: [1.9, 1.75, 1.75, 1.75],
            s_xy: [1.0; 4],
        }
    }
}

/// D2Q4 velocities `(1,0), (0,1), (-1,0), (0,-1)`.
pub(crate) fn d2q4_velocities() -> Vec<Index> {
    vec![[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]
}

/// D2Q4 moment matrix (row-major).
pub(crate) fn d2q4_matrix(lambda: f64) -> Vec<f64> {
    let l = lambda;
    let l2 = l * l;
    vec![
        1.0, 1.0, 1.0, 1.0, //
        l, 0.0, -l, 0.0, //
        0.0, l, 0.0, -l, //
        l2, -l2, l2, -l2,
    ]
}

/// Four D2Q4 blocks (population `4i + h`), one per conserved variable.
pub fn euler_d2q4(params: &EulerParams) -> Result<SchemeSpec, SchemeError> {
    check_positive("lambda", params.lambda)?;
    for i in 0..4 {
        check_rate("s_q", params.s_q[i], false)?;
        check_rate("s_xy", params.s_xy[i], false)?;
    }
    let block = d2q4_matrix(params.lambda);
    let q = 16;
    let mut m = vec![0.0; q * q];
    let mut velocities = Vec::with_capacity(q);
    let mut relaxation = Vec::with_capacity(q);
    for b in 0..4 {
        for r in 0..4 {
            for c in 0..4 {
                m[(4 * b + r) * q + 4 * b + c] = block[4 * r + c];
            }
        }
        velocities.extend(d2q4_velocities());
        relaxation.extend([0.0, params.s_q[b], params.s_q[b], params.s_xy[b]]);
    }
    let scheme = SchemeSpec::new(
        "euler-d2q4",
        2,
        params.lambda,
        velocities,
        m,
        relaxation,
        Arc::new(EulerEquilibrium),
    )?
    .with_blocks(4)?;
    Ok(scheme)
}

/// Piecewise-constant quadrant datum `(ρ, u, v, p)` around `(1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantData {
    pub upper_right: [f64; 4],
    pub upper_left: [f64; 4],
    pub lower_left: [f64; 4],
    pub lower_right: [f64; 4],
}

impl QuadrantData {
    /// Primitive state at a point.
    pub fn at(&self, x: f64, y: f64) -> [f64; 4] {
        match (x > 0.5, y > 0.5) {
            (true, true) => self.upper_right,
            (false, true) => self.upper_left,
            (false, false) => self.lower_left,
            (true, false) => self.lower_right,
        }
    }

    pub fn uniform(state: [f64; 4]) -> Self {
        Self {
            upper_right: state,
            upper_left: state,
            lower_left: state,
            lower_right: state,
        }
    }
}

/// Parse four lines `ρ u v p` in the order UR, UL, LL, LR; `#` starts a comment.
pub fn parse_quadrants(text: &str) -> Result<QuadrantData, SchemeError> {
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| SchemeError::Quadrants {
                line: n + 1,
                msg: format!("{e}"),
            })?;
        if vals.len() != 4 {
            return Err(SchemeError::Quadrants {
                line: n + 1,
                msg: format!("expected 4 values, found {}", vals.len()),
            });
        }
        if !(vals[0] > 0.0 && vals[3] > 0.0) {
            return Err(SchemeError::Quadrants {
                line: n + 1,
                msg: "density and pressure must be positive".into(),
            });
        }
        rows.push([vals[0], vals[1], vals[2], vals[3]]);
    }
    if rows.len() != 4 {
        return Err(SchemeError::Quadrants {
            line: 0,
            msg: format!("expected 4 states, found {}", rows.len()),
        });
    }
    Ok(QuadrantData {
        upper_right: rows[0],
        upper_left: rows[1],
        lower_left: rows[2],
        lower_right: rows[3],
    })
}

/// Slip walls for the vectorial Euler scheme: every block bounces back except the block of the
/// momentum normal to the face, which anti-bounces back. Mass and energy stay conserved.
pub fn euler_slip_walls() -> Boundaries {
    let mut b = Boundaries::uniform(BoundaryKind::BounceBack);
    for axis in 0..2 {
        let mut signs = vec![1.0; 16];
        signs[4 * (1 + axis)..4 * (2 + axis)].fill(-1.0);
        for side in [FaceSide::Low, FaceSide::High] {
            b.set(axis, side, BoundaryKind::Reflect { signs: signs.clone() });
        }
    }
    b
}

/// Bundled Lax-Liu configuration (3 or 12).
pub fn lax_liu(config: u32) -> Result<QuadrantData, SchemeError> {
    match config {
        3 => parse_quadrants(CFG3),
        12 => parse_quadrants(CFG12),
        other => Err(SchemeError::UnknownConfig(other)),
    }
}

/// Quadrant datum at equilibrium on the uniform grid of `level`, sampled at cell centers.
pub fn lax_liu_initial(
    scheme: &SchemeSpec,
    lattice: Lattice,
    level: u32,
    data: &QuadrantData,
) -> Result<UniformField, SchemeError> {
    equilibrium_field(scheme, lattice, level, |c| {
        let [rho, u, v, p] = data.at(c[0], c[1]);
        EulerState::from_primitive(rho, u, v, p).conserved().to_vec()
    })
}
