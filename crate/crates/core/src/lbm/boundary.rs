use super::{LbmError, SchemeSpec};
use crate::mesh::MAX_DIM;

/// Treatment of populations entering through a domain face.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    /// Homogeneous Neumann: the ghost copies the post-collision value of the nearest interior
    /// leaf, read directly without reconstruction.
    Copy,
    /// Ghost value `f^{h†⋆}` at `x + η^h`.
    BounceBack,
    /// Ghost value `-f^{h†⋆}` at `x + η^h`.
    AntiBounceBack,
    /// Bounce-back plus a per-population correction `f^{h,eq} - f^{h†,eq}` of the wall state,
    /// which imposes a wall velocity.
    MovingWall { correction: Vec<f64> },
    /// Reflection with a sign per population: `+1` bounces back, `-1` anti-bounces back.
    Reflect { signs: Vec<f64> },
}

impl BoundaryKind {
    /// Bounce-back imposing the conserved moments `wall` (for instance `ρ0`, `ρ0 u_w`).
    pub fn moving_wall(scheme: &SchemeSpec, wall: &[f64]) -> Result<Self, LbmError> {
        let feq = scheme
            .equilibrium_populations(wall)
            .map_err(|e| LbmError::Scheme(format!("wall state: {e}")))?;
        let mut correction = vec![0.0; scheme.q()];
        for (h, c) in correction.iter_mut().enumerate() {
            let o = scheme
                .opposite(h)
                .ok_or(LbmError::NoOpposite(scheme.velocities()[h]))?;
            *c = feq[h] - feq[o];
        }
        Ok(Self::MovingWall { correction })
    }

    fn is_wall(&self) -> bool {
        !matches!(self, Self::Copy)
    }

    /// Sign applied to the reflected population `h`, or `None` for copy.
    pub fn reflection_sign(&self, h: usize) -> Option<f64> {
        match self {
            Self::Copy => None,
            Self::BounceBack | Self::MovingWall { .. } => Some(1.0),
            Self::AntiBounceBack => Some(-1.0),
            Self::Reflect { signs } => Some(signs[h]),
        }
    }

    pub fn correction(&self, h: usize) -> f64 {
        match self {
            Self::MovingWall { correction } => correction[h],
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// Boundary kinds for the two faces of every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    faces: [[BoundaryKind; 2]; MAX_DIM],
}

impl Boundaries {
    pub fn uniform(kind: BoundaryKind) -> Self {
        Self {
            faces: std::array::from_fn(|_| [kind.clone(), kind.clone()]),
        }
    }

    pub fn set(&mut self, axis: usize, side: Side, kind: BoundaryKind) -> &mut Self {
        self.faces[axis][side as usize] = kind;
        self
    }

    pub fn face(&self, axis: usize, side: Side) -> &BoundaryKind {
        &self.faces[axis][side as usize]
    }

    /// Requires an opposite velocity for every population if any face reflects.
    pub fn validate(&self, scheme: &SchemeSpec) -> Result<(), LbmError> {
        let reflects = self.faces[..scheme.dim()]
            .iter()
            .flatten()
            .any(|k| k.is_wall());
        if reflects {
            for h in 0..scheme.q() {
                if scheme.opposite(h).is_none() {
                    return Err(LbmError::NoOpposite(scheme.velocities()[h]));
                }
            }
        }
        for face in self.faces[..scheme.dim()].iter().flatten() {
            match face {
                BoundaryKind::MovingWall { correction } if correction.len() != scheme.q() => {
                    return Err(LbmError::Scheme("wall correction length".into()));
                }
                BoundaryKind::Reflect { signs } if signs.len() != scheme.q() => {
                    return Err(LbmError::Scheme("reflection sign length".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Kind governing a ghost that lies below (`-1`), inside (`0`) or above (`+1`) the domain
    /// along each axis. At edges and corners reflecting faces win over copy faces, then the
    /// lowest axis wins.
    pub fn select(&self, dim: usize, classes: &[i8; MAX_DIM]) -> &BoundaryKind {
        let mut first: Option<&BoundaryKind> = None;
        for i in 0..dim {
            let side = match classes[i] {
                -1 => Side::Low,
                1 => Side::High,
                _ => continue,
            };
            let k = self.face(i, side);
            if k.is_wall() {
                return k;
            }
            first.get_or_insert(k);
        }
        first.unwrap_or(&self.faces[0][0])
    }
}
