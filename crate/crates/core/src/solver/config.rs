use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::multiresolution::MAX_GAMMA;

/// Problems the batch driver knows how to set up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemId {
    EulerCfg3,
    EulerCfg12,
    NsCylinder,
    Advection3d,
    Custom,
}

/// Initial profile of the custom transport problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Indicator of the ball `|x - center| ≤ radius`.
    Ball,
    /// Smooth bump `cos²` supported on the ball.
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Copy,
    BounceBack,
    AntiBounceBack,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEuler {
    lambda: Option<f64>,
    s_q: Option<[f64; 4]>,
    s_xy: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNs {
    lambda: Option<f64>,
    reynolds: Option<f64>,
    rho0: Option<f64>,
    u0: Option<f64>,
    s1: Option<f64>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    samples: Option<usize>,
    transient: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdvection {
    dim: Option<usize>,
    lambda: Option<f64>,
    velocity: Option<Vec<f64>>,
    s1: Option<f64>,
    s2: Option<f64>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
    profile: Option<Profile>,
    boundary: Option<Wall>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: ProblemId,
    min_level: Option<u32>,
    max_level: Option<u32>,
    eps: Option<f64>,
    mu: Option<f64>,
    gamma: Option<u32>,
    final_time: Option<f64>,
    max_steps: Option<u64>,
    snapshot_every: Option<u64>,
    binary_dump: Option<bool>,
    reference: Option<bool>,
    output: Option<PathBuf>,
    euler: Option<RawEuler>,
    ns: Option<RawNs>,
    advection: Option<RawAdvection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerConfig {
    pub lambda: f64,
    pub s_q: [f64; 4],
    pub s_xy: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsConfig {
    pub lambda: f64,
    pub reynolds: f64,
    pub rho0: f64,
    pub u0: f64,
    pub s1: f64,
    pub center: [f64; 2],
    pub radius: f64,
    pub samples: usize,
    /// Lift samples before this time are ignored by the frequency analysis.
    pub transient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvectionConfig {
    pub dim: usize,
    pub lambda: f64,
    pub velocity: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub profile: Profile,
    pub boundary: Wall,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub min_level: u32,
    pub max_level: u32,
    pub eps: f64,
    pub mu: f64,
    pub gamma: u32,
    pub final_time: f64,
    /// Step cap applied after `final_time`.
    pub max_steps: Option<u64>,
    /// Snapshot cadence in steps; 0 writes only the initial and final states.
    pub snapshot_every: u64,
    pub binary_dump: bool,
    /// Advance the uniform finest-level solver alongside and record the additional error.
    pub reference: bool,
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler: Option<EulerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<NsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advection: Option<AdvectionConfig>,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> SolverError {
    SolverError::Config(format!("{key}: {msg}"))
}

impl RunConfig {
    /// Parse and validate a TOML document; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, SolverError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| SolverError::Config(e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self, SolverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Defaults of a problem with nothing overridden.
    pub fn defaults(problem: ProblemId) -> Self {
        let text = format!("problem = \"{}\"", problem.name());
        Self::from_toml(&text).expect("defaults are valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn resolve(raw: RawConfig) -> Result<Self, SolverError> {
        let p = raw.problem;
        let (jmin, jmax, eps, mu, t) = match p {
            ProblemId::EulerCfg3 => (2, 7, 1e-3, 0.0, 0.3),
            ProblemId::EulerCfg12 => (2, 7, 1e-3, 0.0, 0.25),
            ProblemId::NsCylinder => (2, 7, 7.5e-4, 1.0, 60.0),
            ProblemId::Advection3d => (1, 8, 1e-3, 2.0, 0.78125),
            ProblemId::Custom => (2, 6, 1e-3, 1.0, 0.25),
        };
        let euler = matches!(p, ProblemId::EulerCfg3 | ProblemId::EulerCfg12).then(|| {
            let r = raw.euler.clone().unwrap_or_default();
            EulerConfig {
                lambda: r.lambda.unwrap_or(5.0),
                s_q: r.s_q.unwrap_or([1.9, 1.75, 1.75, 1.75]),
                s_xy: r.s_xy.unwrap_or([1.0; 4]),
            }
        });
        let ns = (p == ProblemId::NsCylinder).then(|| {
            let r = raw.ns.clone().unwrap_or_default();
            NsConfig {
                lambda: r.lambda.unwrap_or(1.0),
                reynolds: r.reynolds.unwrap_or(1200.0),
                rho0: r.rho0.unwrap_or(1.0),
                u0: r.u0.unwrap_or(0.05),
                s1: r.s1.unwrap_or(1.5),
                center: r.center.unwrap_or([0.3125, 0.5078125]),
                radius: r.radius.unwrap_or(0.03125),
                samples: r.samples.unwrap_or(16),
                transient: r.transient.unwrap_or(20.0),
            }
        });
        let advection = matches!(p, ProblemId::Advection3d | ProblemId::Custom).then(|| {
            let r = raw.advection.clone().unwrap_or_default();
            let dim = if p == ProblemId::Advection3d { 3 } else { r.dim.unwrap_or(1) };
            AdvectionConfig {
                dim,
                lambda: r.lambda.unwrap_or(1.0),
                // D3Q6 equilibria stay non-negative only for |V_i| ≤ λ/3
                velocity: r.velocity.unwrap_or_else(|| vec![if dim == 3 { 0.25 } else { 0.5 }; dim]),
                s1: r.s1.unwrap_or(if dim == 3 { 1.4 } else { 1.5 }),
                s2: r.s2.unwrap_or(1.0),
                center: r.center.unwrap_or_else(|| vec![0.3; dim]),
                radius: r.radius.unwrap_or(if dim == 3 { 0.15 } else { 0.2 }),
                profile: r.profile.unwrap_or(Profile::Ball),
                boundary: r.boundary.unwrap_or(Wall::Copy),
            }
        });
        let stray = [
            ("euler", raw.euler.is_some() && euler.is_none()),
            ("ns", raw.ns.is_some() && ns.is_none()),
            ("advection", raw.advection.is_some() && advection.is_none()),
        ];
        for (key, bad) in stray {
            if bad {
                return Err(invalid(key, format!("section does not apply to problem {}", p.name())));
            }
        }
        if p == ProblemId::Advection3d && raw.advection.as_ref().is_some_and(|a| a.dim.is_some_and(|d| d != 3)) {
            return Err(invalid("advection.dim", "advection3d is three-dimensional"));
        }
        let cfg = Self {
            problem: p,
            min_level: raw.min_level.unwrap_or(jmin),
            max_level: raw.max_level.unwrap_or(jmax),
            eps: raw.eps.unwrap_or(eps),
            mu: raw.mu.unwrap_or(mu),
            gamma: raw.gamma.unwrap_or(1),
            final_time: raw.final_time.unwrap_or(t),
            max_steps: raw.max_steps,
            snapshot_every: raw.snapshot_every.unwrap_or(0),
            binary_dump: raw.binary_dump.unwrap_or(false),
            reference: raw.reference.unwrap_or(false),
            output: raw.output,
            euler,
            ns,
            advection,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.min_level >= self.max_level {
            return Err(invalid(
                "min_level",
                format!("{} must be below max_level {}", self.min_level, self.max_level),
            ));
        }
        if self.max_level > 12 {
            return Err(invalid("max_level", format!("{} exceeds 12", self.max_level)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(invalid("eps", format!("{} must be finite and non-negative", self.eps)));
        }
        if !(1..=MAX_GAMMA).contains(&self.gamma) {
            return Err(invalid("gamma", format!("{} outside 1..={MAX_GAMMA}", self.gamma)));
        }
        let mu_max = (2 * self.gamma + 1) as f64;
        if !(self.mu >= 0.0 && self.mu <= mu_max) {
            return Err(invalid("mu", format!("{} outside [0, {mu_max}]", self.mu)));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(invalid("final_time", self.final_time));
        }
        if let Some(a) = &self.advection {
            if !(1..=3).contains(&a.dim) {
                return Err(invalid("advection.dim", a.dim));
            }
            if a.velocity.len() != a.dim {
                return Err(invalid("advection.velocity", format!("needs {} components", a.dim)));
            }
            if a.center.len() != a.dim {
                return Err(invalid("advection.center", format!("needs {} components", a.dim)));
            }
        }
        if let Some(n) = &self.ns {
            if n.samples == 0 {
                return Err(invalid("ns.samples", 0));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.problem {
            ProblemId::EulerCfg3 | ProblemId::EulerCfg12 | ProblemId::NsCylinder => 2,
            ProblemId::Advection3d => 3,
            ProblemId::Custom => self.advection.as_ref().map_or(1, |a| a.dim),
        }
    }

    pub fn lambda(&self) -> f64 {
        if let Some(e) = &self.euler {
            e.lambda
        } else if let Some(n) = &self.ns {
            n.lambda
        } else {
            self.advection.as_ref().map_or(1.0, |a| a.lambda)
        }
    }

    /// `Δt = 2^{-J̄} / λ`.
    pub fn dt(&self) -> f64 {
        (-(self.max_level as f64)).exp2() / self.lambda()
    }

    /// Number of steps to reach `final_time` (rounded), capped by `max_steps`.
    pub fn num_steps(&self) -> u64 {
        let n = (self.final_time / self.dt()).round() as u64;
        self.max_steps.map_or(n, |m| n.min(m))
    }
}

impl ProblemId {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EulerCfg3 => "euler_cfg3",
            Self::EulerCfg12 => "euler_cfg12",
            Self::NsCylinder => "ns_cylinder",
            Self::Advection3d => "advection3d",
            Self::Custom => "custom",
        }
    }
}
