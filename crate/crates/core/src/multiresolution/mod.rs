//! Multiresolution analysis on cell trees: projection, prediction, details, thresholding,
//! mesh adaptation and reconstruction on the finest level.

mod adapt;
mod codec;
mod prediction;
mod reconstruct;
mod tables;

pub use adapt::{
    adapt, adapt_mesh, details, enlarge, group_metrics, level_threshold, threshold, transfer,
    AdaptParams,
};
pub use codec::{decode, encode, Compression};
pub use prediction::{
    child_delta, derive_prediction_weights, project, tabulated_coefficients, Prediction, Rational,
    MAX_GAMMA,
};
pub use reconstruct::{project_up, reconstruct_uniform, Handle, Reconstructor};
pub use tables::{
    box_difference, compute_ea, ea_boxes, prediction_table, IndexBox, PredictionTable, Side,
    TableBuilder,
};

use thiserror::Error;

use crate::mesh::{Index, Lattice, MeshError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MrError {
    #[error("prediction half-width γ must be 1, 2 or 3, got {0}")]
    InvalidGamma(u32),
    #[error("dimension must be 1, 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("singular moment system while deriving prediction weights")]
    SingularSystem,
    #[error("threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(f64),
    #[error("field has {got} cells but the tree has {expected}")]
    FieldSize { expected: usize, got: usize },
    #[error("level gap {0} too large for exact table arithmetic")]
    GapTooLarge(u32),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Per-cell vectors of `q` components stored along the positions of a [`crate::mesh::CellTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    q: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(q: usize, cells: usize) -> Self {
        Self {
            q,
            data: vec![0.0; q * cells],
        }
    }

    pub fn from_vec(q: usize, data: Vec<f64>) -> Self {
        assert!(q > 0 && data.len().is_multiple_of(q), "data length not a multiple of q");
        Self { q, data }
    }

    pub fn q(&self) -> usize {
        self.q
    }
    pub fn num_cells(&self) -> usize {
        self.data.len() / self.q
    }
    #[inline]
    pub fn cell(&self, pos: usize) -> &[f64] {
        &self.data[pos * self.q..(pos + 1) * self.q]
    }
    #[inline]
    pub fn cell_mut(&mut self, pos: usize) -> &mut [f64] {
        &mut self.data[pos * self.q..(pos + 1) * self.q]
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Dense field on one uniform level, first axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformField {
    lattice: Lattice,
    level: u32,
    q: usize,
    data: Vec<f64>,
}

impl UniformField {
    pub fn zeros(lattice: Lattice, level: u32, q: usize) -> Self {
        Self {
            lattice,
            level,
            q,
            data: vec![0.0; q * lattice.cells_on_level(level)],
        }
    }

    pub fn from_vec(lattice: Lattice, level: u32, q: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), q * lattice.cells_on_level(level));
        Self {
            lattice,
            level,
            q,
            data,
        }
    }

    /// Fill from a function of the cell index.
    pub fn from_fn<F: FnMut(Index, &mut [f64])>(
        lattice: Lattice,
        level: u32,
        q: usize,
        mut f: F,
    ) -> Self {
        let mut out = Self::zeros(lattice, level, q);
        for lin in 0..lattice.cells_on_level(level) {
            let k = lattice.delinear(level, lin);
            f(k, &mut out.data[lin * q..(lin + 1) * q]);
        }
        out
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn num_cells(&self) -> usize {
        self.data.len() / self.q
    }
    #[inline]
    pub fn get(&self, k: &Index) -> &[f64] {
        let lin = self.lattice.linear(self.level, k);
        &self.data[lin * self.q..(lin + 1) * self.q]
    }
    #[inline]
    pub fn get_mut(&mut self, k: &Index) -> &mut [f64] {
        let lin = self.lattice.linear(self.level, k);
        &mut self.data[lin * self.q..(lin + 1) * self.q]
    }
    #[inline]
    pub fn cell(&self, lin: usize) -> &[f64] {
        &self.data[lin * self.q..(lin + 1) * self.q]
    }
    #[inline]
    pub fn cell_mut(&mut self, lin: usize) -> &mut [f64] {
        &mut self.data[lin * self.q..(lin + 1) * self.q]
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
