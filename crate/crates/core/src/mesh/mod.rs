//! Nested dyadic lattices, cell trees and grading.
//!
//! Cells are addressed by `(level, k)` where `k` is a three-component integer index; unused
//! trailing components are zero. A cell at level `ℓ` has edge `2^-ℓ`, so the finest level
//! `J̄` has edge `Δx = 2^-J̄`. The domain is a box of `base[i]` unit cells per axis, which is the
//! unit hypercube for the default base `(1, 1, 1)`.

mod set;
mod tree;

pub use set::CellSet;
pub use tree::{check_tree, complete_tree, is_tree, make_graded, CellTree, TreeRule, TreeViolation};

use thiserror::Error;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Largest supported refinement level.
pub const MAX_LEVEL: u32 = 20;

/// Integer cell index; components beyond the lattice dimension are zero.
pub type Index = [i32; MAX_DIM];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("cell {0:?} is already on the finest level")]
    LevelOverflow(CellId),
    #[error("cell {0:?} is already on the coarsest level")]
    LevelUnderflow(CellId),
    #[error("dimension must be 1, 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("invalid level range {min}..={max} (finest level at most {MAX_LEVEL})")]
    InvalidLevels { min: u32, max: u32 },
    #[error("base extents must be positive, got {0:?}")]
    InvalidBase([u32; MAX_DIM]),
    #[error("cell {0:?} lies outside the domain")]
    OutOfDomain(CellId),
    #[error("cell set is not a complete tree: {0}")]
    NotATree(TreeViolation),
}

/// A cell `(ℓ, k)` of the nested lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub level: u32,
    pub k: Index,
}

impl CellId {
    pub const fn new(level: u32, k: Index) -> Self {
        Self { level, k }
    }
}

/// Geometric extent of a cell in domain units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub origin: [f64; MAX_DIM],
    pub edge: f64,
    pub measure: f64,
}

impl CellGeometry {
    pub fn center(&self, dim: usize) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for i in 0..dim {
            c[i] = self.origin[i] + 0.5 * self.edge;
        }
        c
    }
}

/// Shape of the nested lattice: dimension, level range and base extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    min_level: u32,
    max_level: u32,
    base: [u32; MAX_DIM],
}

impl Lattice {
    /// Lattice on the unit hypercube.
    pub fn new(dim: usize, min_level: u32, max_level: u32) -> Result<Self, MeshError> {
        Self::with_base(dim, min_level, max_level, [1; MAX_DIM])
    }

    /// Lattice on the box `[0, base_0] × … ` made of square cells.
    pub fn with_base(
        dim: usize,
        min_level: u32,
        max_level: u32,
        base: [u32; MAX_DIM],
    ) -> Result<Self, MeshError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(MeshError::InvalidDimension(dim));
        }
        if min_level > max_level || max_level > MAX_LEVEL {
            return Err(MeshError::InvalidLevels {
                min: min_level,
                max: max_level,
            });
        }
        let mut b = [1u32; MAX_DIM];
        for i in 0..dim {
            if base[i] == 0 || base[i] > 64 {
                return Err(MeshError::InvalidBase(base));
            }
            b[i] = base[i];
        }
        Ok(Self {
            dim,
            min_level,
            max_level,
            base: b,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn min_level(&self) -> u32 {
        self.min_level
    }
    pub fn max_level(&self) -> u32 {
        self.max_level
    }
    pub fn base(&self) -> [u32; MAX_DIM] {
        self.base
    }
    pub fn num_levels(&self) -> usize {
        (self.max_level - self.min_level + 1) as usize
    }
    /// Number of children of a cell, `2^d`.
    pub fn num_children(&self) -> usize {
        1 << self.dim
    }

    /// Same lattice with another level range.
    pub fn with_levels(&self, min_level: u32, max_level: u32) -> Result<Self, MeshError> {
        Self::with_base(self.dim, min_level, max_level, self.base)
    }

    /// Cells per axis on `level`; unused axes report 1.
    pub fn extent(&self, level: u32) -> Index {
        let mut e = [1; MAX_DIM];
        for i in 0..self.dim {
            e[i] = (self.base[i] as i32) << level;
        }
        e
    }

    pub fn cells_on_level(&self, level: u32) -> usize {
        let e = self.extent(level);
        e.iter().map(|&x| x as usize).product()
    }

    /// Total number of cells over all levels `J_min..=J̄`.
    pub fn cells_all_levels(&self) -> usize {
        (self.min_level..=self.max_level)
            .map(|l| self.cells_on_level(l))
            .sum()
    }

    pub fn in_domain(&self, level: u32, k: &Index) -> bool {
        let e = self.extent(level);
        (0..MAX_DIM).all(|i| k[i] >= 0 && k[i] < e[i])
    }

    pub fn contains(&self, cell: &CellId) -> bool {
        cell.level >= self.min_level
            && cell.level <= self.max_level
            && self.in_domain(cell.level, &cell.k)
    }

    /// Nearest in-domain index (componentwise clamp).
    pub fn clamp(&self, level: u32, k: &Index) -> Index {
        let e = self.extent(level);
        let mut out = *k;
        for i in 0..MAX_DIM {
            out[i] = out[i].clamp(0, e[i] - 1);
        }
        out
    }

    /// In-domain index obtained by even reflection across the domain faces.
    ///
    /// Ghost values are defined through this map. Reflection commutes with projection and
    /// with prediction, so ghosts on different levels stay mutually consistent.
    pub fn mirror(&self, level: u32, k: &Index) -> Index {
        let e = self.extent(level);
        let mut out = *k;
        for i in 0..self.dim {
            let n = e[i];
            let mut x = out[i];
            if x < 0 {
                x = -1 - x;
            }
            if x >= n {
                x = 2 * n - 1 - x;
            }
            out[i] = x.clamp(0, n - 1);
        }
        out
    }

    /// Row-major linear index with the first axis fastest.
    pub fn linear(&self, level: u32, k: &Index) -> usize {
        let e = self.extent(level);
        k[0] as usize + e[0] as usize * (k[1] as usize + e[1] as usize * k[2] as usize)
    }

    /// Inverse of [`Lattice::linear`].
    pub fn delinear(&self, level: u32, lin: usize) -> Index {
        let e = self.extent(level);
        let e0 = e[0] as usize;
        let e1 = e[1] as usize;
        [
            (lin % e0) as i32,
            ((lin / e0) % e1) as i32,
            (lin / (e0 * e1)) as i32,
        ]
    }

    /// Offset of child number `c` (first axis fastest).
    pub fn child_offset(&self, c: usize) -> Index {
        let mut d = [0; MAX_DIM];
        for i in 0..self.dim {
            d[i] = ((c >> i) & 1) as i32;
        }
        d
    }

    /// Child number of a cell within its sibling group.
    pub fn child_number(&self, k: &Index) -> usize {
        let mut c = 0;
        for i in 0..self.dim {
            c |= ((k[i] & 1) as usize) << i;
        }
        c
    }

    /// Child `c` of `cell` without level checks.
    pub fn child_unchecked(&self, cell: &CellId, c: usize) -> CellId {
        let d = self.child_offset(c);
        let mut k = [0; MAX_DIM];
        for i in 0..self.dim {
            k[i] = 2 * cell.k[i] + d[i];
        }
        CellId::new(cell.level + 1, k)
    }

    /// The `2^d` children `(ℓ+1, 2k+δ)`, ordered lexicographically by `δ` with the last
    /// axis fastest.
    pub fn children(&self, cell: &CellId) -> Result<Vec<CellId>, MeshError> {
        if cell.level >= self.max_level {
            return Err(MeshError::LevelOverflow(*cell));
        }
        let n = self.num_children();
        let mut out = Vec::with_capacity(n);
        for c in 0..n {
            // reverse bit order so that the last axis varies fastest
            let mut rc = 0;
            for i in 0..self.dim {
                rc |= ((c >> (self.dim - 1 - i)) & 1) << i;
            }
            out.push(self.child_unchecked(cell, rc));
        }
        Ok(out)
    }

    pub fn parent_unchecked(&self, cell: &CellId) -> CellId {
        let mut k = [0; MAX_DIM];
        for i in 0..self.dim {
            k[i] = cell.k[i] >> 1;
        }
        CellId::new(cell.level - 1, k)
    }

    /// Parent `(ℓ-1, ⌊k/2⌋)`; works for ghost indices too.
    pub fn parent(&self, cell: &CellId) -> Result<CellId, MeshError> {
        if cell.level <= self.min_level {
            return Err(MeshError::LevelUnderflow(*cell));
        }
        Ok(self.parent_unchecked(cell))
    }

    pub fn geometry(&self, cell: &CellId) -> CellGeometry {
        let edge = (-(cell.level as f64)).exp2();
        let mut origin = [0.0; MAX_DIM];
        for i in 0..self.dim {
            origin[i] = cell.k[i] as f64 * edge;
        }
        CellGeometry {
            origin,
            edge,
            measure: edge.powi(self.dim as i32),
        }
    }

    /// Finest-level index range `[lo, hi)` covered by a cell, per axis.
    pub fn finest_span(&self, cell: &CellId) -> (Index, Index) {
        let g = self.max_level - cell.level;
        let mut lo = [0; MAX_DIM];
        let mut hi = [1; MAX_DIM];
        for i in 0..self.dim {
            lo[i] = cell.k[i] << g;
            hi[i] = (cell.k[i] + 1) << g;
        }
        (lo, hi)
    }

    /// Enumerate all offsets of the box `[-r, r]^d` with the first axis fastest.
    pub fn box_offsets(&self, r: i32) -> Vec<Index> {
        let mut out = Vec::new();
        let rz = if self.dim > 2 { r } else { 0 };
        let ry = if self.dim > 1 { r } else { 0 };
        for z in -rz..=rz {
            for y in -ry..=ry {
                for x in -r..=r {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

/// Componentwise sum of two indices.
#[inline]
pub fn add(a: &Index, b: &Index) -> Index {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Componentwise difference of two indices.
#[inline]
pub fn sub(a: &Index, b: &Index) -> Index {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
