use std::path::Path;

use serde::Serialize;

use super::output::GridDump;
use super::SolverError;
use crate::diagnostics::occupation_rates;
use crate::multiresolution::{decode, encode, Prediction, UniformField};

/// Result of a compression round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressReport {
    pub max_level: u32,
    pub min_level: u32,
    pub leaves: usize,
    pub cells: usize,
    pub mesh_or: f64,
    pub mem_or: f64,
    /// Mean absolute reconstruction error over cells and components.
    pub l1: f64,
    pub linf: f64,
}

/// Parse a text grid: a first line with the cell counts per axis, then the values (first axis
/// fastest) separated by whitespace.
pub fn parse_text_grid(text: &str) -> Result<GridDump, SolverError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let shape: Vec<u32> = lines
        .next()
        .ok_or_else(|| SolverError::Input("empty grid file".into()))?
        .split_whitespace()
        .map(|s| s.parse().map_err(|e| SolverError::Input(format!("shape: {e}"))))
        .collect::<Result<_, _>>()?;
    if shape.is_empty() || shape.len() > 3 {
        return Err(SolverError::Input(format!("shape has {} axes", shape.len())));
    }
    let n0 = shape[0];
    if !n0.is_power_of_two() || shape.iter().any(|&n| n != n0) {
        return Err(SolverError::Input(format!("shape {shape:?} is not 2^J per axis")));
    }
    let mut data = Vec::new();
    for line in lines {
        for tok in line.split_whitespace() {
            data.push(tok.parse::<f64>().map_err(|e| SolverError::Input(format!("value {tok}: {e}")))?);
        }
    }
    let mut extent = [1u32; 3];
    extent[..shape.len()].copy_from_slice(&shape);
    let dump = GridDump {
        dim: shape.len(),
        level: n0.trailing_zeros(),
        extent,
        components: 1,
        data,
    };
    if dump.data.len() != dump.num_cells() {
        return Err(SolverError::Input(format!(
            "expected {} values, found {}",
            dump.num_cells(),
            dump.data.len()
        )));
    }
    Ok(dump)
}

/// Read a grid in the binary dump format or the text format.
pub fn read_grid(path: &Path) -> Result<GridDump, SolverError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(super::output::GRID_MAGIC) {
        Ok(GridDump::from_bytes(&bytes)?)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| SolverError::Input("grid file is neither binary dump nor text".into()))?;
        parse_text_grid(&text)
    }
}

/// Threshold, grade and reconstruct a uniform grid.
pub fn compress(grid: &GridDump, eps: f64, gamma: u32, min_level: u32) -> Result<CompressReport, SolverError> {
    let lat = grid
        .lattice(min_level)
        .ok_or_else(|| SolverError::Input(format!("extent {:?} is not a power of two", grid.extent)))?;
    let pred = Prediction::new(grid.dim, gamma)?;
    let data = UniformField::from_vec(lat, lat.max_level(), grid.components, grid.data.clone());
    let c = encode(&data, &pred, eps)?;
    let rec = decode(&c.tree, &c.field, &pred);
    let (mem_or, mesh_or) = occupation_rates(&c.tree);
    let mut l1 = 0.0;
    let mut linf = 0.0f64;
    for (a, b) in rec.data().iter().zip(data.data()) {
        let d = (a - b).abs();
        l1 += d;
        linf = linf.max(d);
    }
    Ok(CompressReport {
        max_level: lat.max_level(),
        min_level: lat.min_level(),
        leaves: c.tree.num_leaves(),
        cells: c.tree.len(),
        mesh_or,
        mem_or,
        l1: l1 / data.data().len() as f64,
        linf,
    })
}
