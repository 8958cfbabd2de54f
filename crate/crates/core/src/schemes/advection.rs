use std::sync::Arc;

use super::euler::{d2q4_matrix, d2q4_velocities};
use super::{check_positive, check_rate, SchemeError};
use crate::lbm::{Equilibrium, EquilibriumError, SchemeSpec};
use crate::mesh::MAX_DIM;

/// Equilibrium `(u, V_1 u, …, V_d u, 0, …)` of a single-moment transport scheme whose rows
/// `1..=d` are the first-order moments.
#[derive(Debug, Clone, Copy)]
pub struct LinearAdvection {
    pub dim: usize,
    pub velocity: [f64; MAX_DIM],
}

impl Equilibrium for LinearAdvection {
    fn evaluate(&self, m: &[f64], meq: &mut [f64]) -> Result<(), EquilibriumError> {
        let u = m[0];
        if !u.is_finite() {
            return Err(EquilibriumError::NonFinite(u));
        }
        meq.fill(0.0);
        meq[0] = u;
        for i in 0..self.dim {
            meq[1 + i] = self.velocity[i] * u;
        }
        Ok(())
    }
}

fn check_cfl(lambda: f64, v: &[f64]) -> Result<(), SchemeError> {
    check_positive("lambda", lambda)?;
    for &c in v {
        if !c.is_finite() || c.abs() > lambda {
            return Err(SchemeError::Cfl { v: c, lambda });
        }
    }
    Ok(())
}

/// Two-velocity transport scheme in one dimension.
pub fn advection_d1q2(lambda: f64, v: f64, s: f64) -> Result<SchemeSpec, SchemeError> {
    check_cfl(lambda, &[v])?;
    check_rate("s", s, true)?;
    Ok(SchemeSpec::new(
        "advection-d1q2",
        1,
        lambda,
        vec![[1, 0, 0], [-1, 0, 0]],
        vec![1.0, 1.0, lambda, -lambda],
        vec![0.0, s],
        Arc::new(LinearAdvection {
            dim: 1,
            velocity: [v, 0.0, 0.0],
        }),
    )?)
}

/// Four-velocity transport scheme in two dimensions.
pub fn advection_d2q4(lambda: f64, v: [f64; 2], s_q: f64, s_xy: f64) -> Result<SchemeSpec, SchemeError> {
    check_cfl(lambda, &v)?;
    check_rate("s_q", s_q, true)?;
    check_rate("s_xy", s_xy, true)?;
    Ok(SchemeSpec::new(
        "advection-d2q4",
        2,
        lambda,
        d2q4_velocities(),
        d2q4_matrix(lambda),
        vec![0.0, s_q, s_q, s_xy],
        Arc::new(LinearAdvection {
            dim: 2,
            velocity: [v[0], v[1], 0.0],
        }),
    )?)
}

/// Six-velocity transport scheme in three dimensions.
pub fn advection_d3q6(lambda: f64, v: [f64; 3], s1: f64, s2: f64) -> Result<SchemeSpec, SchemeError> {
    check_cfl(lambda, &v)?;
    check_rate("s1", s1, true)?;
    check_rate("s2", s2, true)?;
    let l = lambda;
    let l2 = l * l;
    #[rustfmt::skip]
    let m = vec![
        1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
        l, -l, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, l, -l, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, l, -l,
        l2, l2, -l2, -l2, 0.0, 0.0,
        l2, l2, 0.0, 0.0, -l2, -l2,
    ];
    Ok(SchemeSpec::new(
        "advection-d3q6",
        3,
        l,
        vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
        m,
        vec![0.0, s1, s1, s1, s2, s2],
        Arc::new(LinearAdvection { dim: 3, velocity: v }),
    )?)
}

/// Indicator of the closed ball of radius `r` around `center`.
pub fn sphere_indicator(center: [f64; MAX_DIM], r: f64, dim: usize) -> impl Fn([f64; MAX_DIM]) -> f64 {
    move |x| {
        let d2: f64 = (0..dim).map(|i| (x[i] - center[i]).powi(2)).sum();
        if d2 <= r * r {
            1.0
        } else {
            0.0
        }
    }
}
