//! Lattice Boltzmann schemes in moment form, on uniform grids and on adaptive trees.

mod boundary;
mod reference;
mod stream;

pub use boundary::{BoundaryKind, Boundaries, Side as FaceSide};
pub use reference::{reference_collide, reference_step, reference_stream, ReferenceSolver};
pub use stream::{AdaptiveStream, StreamMode, StreamStats};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::mesh::{CellId, CellTree, Index, MAX_DIM};
use crate::multiresolution::{Field, MrError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),
    #[error("non-finite conserved moment {0}")]
    NonFinite(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LbmError {
    #[error("scheme definition: {0}")]
    Scheme(String),
    #[error("equilibrium undefined at level {} index {:?}: {source}", cell.level, cell.k)]
    Equilibrium {
        cell: CellId,
        source: EquilibriumError,
    },
    #[error("velocity {0:?} has no opposite, bounce-back is impossible")]
    NoOpposite(Index),
    #[error("field has {got} components but the scheme has {expected} populations")]
    Components { expected: usize, got: usize },
    #[error(transparent)]
    Multiresolution(#[from] MrError),
}

/// Equilibrium moments as a function of the conserved ones.
pub trait Equilibrium: Send + Sync + fmt::Debug {
    /// Fill all `q` equilibrium moments from `m`; only conserved entries of `m` may be read.
    fn evaluate(&self, m: &[f64], meq: &mut [f64]) -> Result<(), EquilibriumError>;
}

/// A DdQq scheme: velocities, moment matrix, relaxation rates and equilibrium.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    name: String,
    dim: usize,
    lambda: f64,
    velocities: Vec<Index>,
    m: Vec<f64>,
    m_inv: Vec<f64>,
    relaxation: Vec<f64>,
    equilibrium: Arc<dyn Equilibrium>,
    opposite: Vec<Option<usize>>,
    conserved: Vec<usize>,
}

impl SchemeSpec {
    /// `moments` is the `q × q` matrix `M` in row-major order.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        lambda: f64,
        velocities: Vec<Index>,
        moments: Vec<f64>,
        relaxation: Vec<f64>,
        equilibrium: Arc<dyn Equilibrium>,
    ) -> Result<Self, LbmError> {
        let q = velocities.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(LbmError::Scheme(format!("dimension {dim}")));
        }
        if q == 0 || moments.len() != q * q || relaxation.len() != q {
            return Err(LbmError::Scheme(format!(
                "q = {q} needs a {q}×{q} moment matrix and {q} relaxation rates"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LbmError::Scheme(format!("lattice velocity {lambda}")));
        }
        for v in &velocities {
            if v[dim..].iter().any(|&c| c != 0) {
                return Err(LbmError::Scheme(format!("velocity {v:?} exceeds dimension {dim}")));
            }
        }
        let mat = DMatrix::from_row_slice(q, q, &moments);
        let inv = mat
            .clone()
            .try_inverse()
            .ok_or_else(|| LbmError::Scheme("moment matrix is singular".into()))?;
        let mut m_inv = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                m_inv[i * q + j] = inv[(i, j)];
            }
        }
        let opposite = velocities
            .iter()
            .map(|v| {
                let neg = [-v[0], -v[1], -v[2]];
                velocities.iter().position(|w| *w == neg)
            })
            .collect();
        let conserved = relaxation
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            name: name.into(),
            dim,
            lambda,
            velocities,
            m: moments,
            m_inv,
            relaxation,
            equilibrium,
            opposite,
            conserved,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn q(&self) -> usize {
        self.velocities.len()
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn velocities(&self) -> &[Index] {
        &self.velocities
    }
    pub fn moment_matrix(&self) -> &[f64] {
        &self.m
    }
    pub fn inverse_moment_matrix(&self) -> &[f64] {
        &self.m_inv
    }
    pub fn relaxation(&self) -> &[f64] {
        &self.relaxation
    }
    /// Indices of the conserved moments (zero relaxation rate).
    pub fn conserved(&self) -> &[usize] {
        &self.conserved
    }
    /// `h†` with `η^{h†} = -η^h`.
    pub fn opposite(&self, h: usize) -> Option<usize> {
        self.opposite[h]
    }
    pub fn equilibrium(&self) -> &dyn Equilibrium {
        self.equilibrium.as_ref()
    }

    /// Declare `blocks` consecutive groups of populations (vectorial schemes); opposite
    /// velocities are then searched within each group.
    pub fn with_blocks(mut self, blocks: usize) -> Result<Self, LbmError> {
        let q = self.q();
        if blocks == 0 || !q.is_multiple_of(blocks) {
            return Err(LbmError::Scheme(format!("{q} populations do not split into {blocks} blocks")));
        }
        let size = q / blocks;
        self.opposite = (0..q)
            .map(|h| {
                let b = h / size;
                let v = self.velocities[h];
                let neg = [-v[0], -v[1], -v[2]];
                (b * size..(b + 1) * size).find(|&j| self.velocities[j] == neg)
            })
            .collect();
        Ok(self)
    }

    /// Replace the relaxation rates (conserved moments must keep rate zero).
    pub fn with_relaxation(mut self, relaxation: Vec<f64>) -> Result<Self, LbmError> {
        if relaxation.len() != self.q() {
            return Err(LbmError::Scheme("relaxation length".into()));
        }
        self.conserved = relaxation
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(i, _)| i)
            .collect();
        self.relaxation = relaxation;
        Ok(self)
    }

    #[inline]
    fn mat_vec(mat: &[f64], x: &[f64], y: &mut [f64]) {
        let q = x.len();
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &mat[i * q..(i + 1) * q];
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `m = M f`.
    pub fn to_moments(&self, f: &[f64], m: &mut [f64]) {
        Self::mat_vec(&self.m, f, m);
    }

    /// `f = M^{-1} m`.
    pub fn from_moments(&self, m: &[f64], f: &mut [f64]) {
        Self::mat_vec(&self.m_inv, m, f);
    }

    /// Equilibrium populations for the given conserved moments (in the order of
    /// [`SchemeSpec::conserved`]).
    pub fn equilibrium_populations(&self, conserved: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
        let q = self.q();
        let mut m = vec![0.0; q];
        for (&i, &v) in self.conserved.iter().zip(conserved) {
            m[i] = v;
        }
        let mut meq = vec![0.0; q];
        self.equilibrium.evaluate(&m, &mut meq)?;
        for &i in &self.conserved {
            meq[i] = m[i];
        }
        let mut f = vec![0.0; q];
        self.from_moments(&meq, &mut f);
        Ok(f)
    }

    /// Relax one cell in place: `m* = m + S (m^eq - m)`, `f* = M^{-1} m*`.
    pub fn collide_cell(&self, f: &mut [f64], scratch: &mut [f64]) -> Result<(), EquilibriumError> {
        let q = self.q();
        let (m, rest) = scratch.split_at_mut(q);
        let meq = &mut rest[..q];
        self.to_moments(f, m);
        self.equilibrium.evaluate(m, meq)?;
        for i in 0..q {
            let s = self.relaxation[i];
            if s != 0.0 {
                m[i] += s * (meq[i] - m[i]);
            }
        }
        self.from_moments(m, f);
        Ok(())
    }

    /// Conserved moments of a population vector.
    pub fn conserved_moments(&self, f: &[f64]) -> Vec<f64> {
        let q = self.q();
        self.conserved
            .iter()
            .map(|&i| (0..q).map(|j| self.m[i * q + j] * f[j]).sum())
            .collect()
    }

    /// Scratch length needed by [`SchemeSpec::collide_cell`].
    pub fn scratch_len(&self) -> usize {
        2 * self.q()
    }
}

/// Collide on every leaf of an adaptive tree (internal cells are left untouched).
pub fn collide_leaves(scheme: &SchemeSpec, tree: &CellTree, field: &mut Field) -> Result<(), LbmError> {
    if field.q() != scheme.q() {
        return Err(LbmError::Components {
            expected: scheme.q(),
            got: field.q(),
        });
    }
    let mut scratch = vec![0.0; scheme.scratch_len()];
    for &pos in tree.leaves() {
        let pos = pos as usize;
        scheme
            .collide_cell(field.cell_mut(pos), &mut scratch)
            .map_err(|source| LbmError::Equilibrium {
                cell: tree.cell(pos),
                source,
            })?;
    }
    Ok(())
}

/// Conserved totals `Σ_leaves |C| m_i` over a tree.
pub fn conserved_totals(scheme: &SchemeSpec, tree: &CellTree, field: &Field) -> Vec<f64> {
    let lat = tree.lattice();
    let mut out = vec![0.0; scheme.conserved().len()];
    for &pos in tree.leaves() {
        let pos = pos as usize;
        let vol = lat.geometry(&tree.cell(pos)).measure;
        for (o, v) in out.iter_mut().zip(scheme.conserved_moments(field.cell(pos))) {
            *o += vol * v;
        }
    }
    out
}
