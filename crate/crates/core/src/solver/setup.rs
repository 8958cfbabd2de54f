use super::config::{AdvectionConfig, Profile, ProblemId, RunConfig, Wall};
use super::SolverError;
use crate::lbm::{BoundaryKind, Boundaries, SchemeSpec};
use crate::mesh::{Lattice, MAX_DIM};
use crate::multiresolution::{Prediction, UniformField};
use crate::schemes::{
    advection_d1q2, advection_d2q4, advection_d3q6, equilibrium_field, euler_d2q4, lax_liu,
    lax_liu_initial, ns_boundaries, ns_d2q9, Disc, EulerParams, NsParams, ObstacleSpec,
};

/// Everything needed to start a run: scheme, boundaries, lattice and initial populations.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub scheme: SchemeSpec,
    pub bcs: Boundaries,
    pub lattice: Lattice,
    pub pred: Prediction,
    pub initial: UniformField,
    /// Names of the conserved moments, in the order of [`SchemeSpec::conserved`].
    pub moment_names: Vec<&'static str>,
    pub obstacle: Option<ObstacleSetup>,
}

/// Obstacle and normalisation of the aerodynamic coefficients.
#[derive(Debug, Clone)]
pub struct ObstacleSetup {
    pub spec: ObstacleSpec,
    pub params: NsParams,
    /// Populations of the resting equilibrium `(ρ0, 0, 0)`.
    pub rest: Vec<f64>,
    pub transient: f64,
}

fn wall_kind(w: Wall) -> BoundaryKind {
    match w {
        Wall::Copy => BoundaryKind::Copy,
        Wall::BounceBack => BoundaryKind::BounceBack,
        Wall::AntiBounceBack => BoundaryKind::AntiBounceBack,
    }
}

fn profile_value(a: &AdvectionConfig, x: [f64; MAX_DIM]) -> f64 {
    let r2: f64 = (0..a.dim).map(|i| (x[i] - a.center[i]).powi(2)).sum();
    let r = r2.sqrt();
    if r > a.radius {
        return 0.0;
    }
    match a.profile {
        Profile::Ball => 1.0,
        Profile::Bump => (0.5 * std::f64::consts::PI * r / a.radius).cos().powi(2),
    }
}

impl ProblemSetup {
    pub fn new(cfg: &RunConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let dim = cfg.dim();
        let jbar = cfg.max_level;
        let pred = Prediction::new(dim, cfg.gamma)?;
        match cfg.problem {
            ProblemId::EulerCfg3 | ProblemId::EulerCfg12 => {
                let e = cfg.euler.as_ref().expect("resolved");
                let scheme = euler_d2q4(&EulerParams {
                    lambda: e.lambda,
                    s_q: e.s_q,
                    s_xy: e.s_xy,
                })?;
                let lattice = Lattice::new(2, cfg.min_level, jbar)?;
                let id = if cfg.problem == ProblemId::EulerCfg3 { 3 } else { 12 };
                let initial = lax_liu_initial(&scheme, lattice, jbar, &lax_liu(id)?)?;
                Ok(Self {
                    scheme,
                    bcs: Boundaries::uniform(BoundaryKind::Copy),
                    lattice,
                    pred,
                    initial,
                    moment_names: vec!["rho", "rho_u", "rho_v", "energy"],
                    obstacle: None,
                })
            }
            ProblemId::NsCylinder => {
                let n = cfg.ns.as_ref().expect("resolved");
                let disc = Disc {
                    center: n.center,
                    radius: n.radius,
                };
                let params = NsParams {
                    lambda: n.lambda,
                    reynolds: n.reynolds,
                    rho0: n.rho0,
                    u0: n.u0,
                    length: disc.diameter(),
                    s1: n.s1,
                };
                let scheme = ns_d2q9(&params, cfg.dt())?;
                let bcs = ns_boundaries(&scheme, &params)?;
                let lattice = Lattice::with_base(2, cfg.min_level, jbar, [2, 1, 1])?;
                let initial =
                    equilibrium_field(&scheme, lattice, jbar, |_| vec![n.rho0, n.rho0 * n.u0, 0.0])?;
                let rest = scheme
                    .equilibrium_populations(&[n.rho0, 0.0, 0.0])
                    .map_err(|e| SolverError::Config(format!("ns.rho0: {e}")))?;
                Ok(Self {
                    scheme,
                    bcs,
                    lattice,
                    pred,
                    initial,
                    moment_names: vec!["rho", "qx", "qy"],
                    obstacle: Some(ObstacleSetup {
                        spec: ObstacleSpec::new(disc, n.samples)?,
                        params,
                        rest,
                        transient: n.transient,
                    }),
                })
            }
            ProblemId::Advection3d | ProblemId::Custom => {
                let a = cfg.advection.as_ref().expect("resolved");
                let v = &a.velocity;
                let scheme = match a.dim {
                    1 => advection_d1q2(a.lambda, v[0], a.s1)?,
                    2 => advection_d2q4(a.lambda, [v[0], v[1]], a.s1, a.s2)?,
                    _ => advection_d3q6(a.lambda, [v[0], v[1], v[2]], a.s1, a.s2)?,
                };
                let lattice = Lattice::new(a.dim, cfg.min_level, jbar)?;
                let initial = equilibrium_field(&scheme, lattice, jbar, |x| vec![profile_value(a, x)])?;
                Ok(Self {
                    scheme,
                    bcs: Boundaries::uniform(wall_kind(a.boundary)),
                    lattice,
                    pred,
                    initial,
                    moment_names: vec!["u"],
                    obstacle: None,
                })
            }
        }
    }
}
