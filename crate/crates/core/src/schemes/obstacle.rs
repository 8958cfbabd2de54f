use rustc_hash::FxHashMap;

use super::{check_positive, SchemeError};
use crate::lbm::SchemeSpec;
use crate::mesh::{CellGeometry, CellId, CellTree, Lattice};
use crate::multiresolution::{Field, UniformField};

/// Disc `|x - center| < radius` in domain units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Obstacle shape plus the subsampling resolution used for volume fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSpec {
    pub disc: Disc,
    /// Sample points per axis and cell.
    pub samples: usize,
}

impl ObstacleSpec {
    pub fn new(disc: Disc, samples: usize) -> Result<Self, SchemeError> {
        check_positive("radius", disc.radius)?;
        if samples == 0 {
            return Err(SchemeError::Parameter {
                name: "samples",
                value: 0.0,
            });
        }
        Ok(Self { disc, samples })
    }

    fn overlaps_bbox(&self, g: &CellGeometry) -> bool {
        let d = &self.disc;
        (0..2).all(|i| {
            g.origin[i] < d.center[i] + d.radius && g.origin[i] + g.edge > d.center[i] - d.radius
        })
    }

    /// `|C ∩ Θ| / |C|` estimated on a regular `samples × samples` grid of sub-cell centers.
    pub fn fraction(&self, g: &CellGeometry) -> f64 {
        if !self.overlaps_bbox(g) {
            return 0.0;
        }
        let n = self.samples;
        let h = g.edge / n as f64;
        let mut inside = 0usize;
        for j in 0..n {
            let y = g.origin[1] + (j as f64 + 0.5) * h;
            for i in 0..n {
                let x = g.origin[0] + (i as f64 + 0.5) * h;
                if self.disc.contains(x, y) {
                    inside += 1;
                }
            }
        }
        inside as f64 / (n * n) as f64
    }
}

/// Per-cell volume fractions, cached across mesh changes.
#[derive(Debug, Clone)]
pub struct VolumeFractions {
    spec: ObstacleSpec,
    cache: FxHashMap<CellId, f64>,
}

impl VolumeFractions {
    pub fn new(spec: ObstacleSpec) -> Self {
        Self {
            spec,
            cache: FxHashMap::default(),
        }
    }

    pub fn spec(&self) -> &ObstacleSpec {
        &self.spec
    }

    pub fn get(&mut self, lattice: &Lattice, cell: CellId) -> f64 {
        let spec = self.spec;
        *self
            .cache
            .entry(cell)
            .or_insert_with(|| spec.fraction(&lattice.geometry(&cell)))
    }

    /// Leaves of `tree` meeting the obstacle, as `(position, α)`.
    pub fn for_tree(&mut self, tree: &CellTree) -> Vec<(usize, f64)> {
        let lat = *tree.lattice();
        let mut out = Vec::new();
        for &pos in tree.leaves() {
            let pos = pos as usize;
            let cell = tree.cell(pos);
            if !self.spec.overlaps_bbox(&lat.geometry(&cell)) {
                continue;
            }
            let a = self.get(&lat, cell);
            if a > 0.0 {
                out.push((pos, a));
            }
        }
        out
    }

    /// Cells of a uniform level meeting the obstacle, as `(linear index, α)`.
    pub fn for_level(&mut self, lattice: &Lattice, level: u32) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for lin in 0..lattice.cells_on_level(level) {
            let cell = CellId::new(level, lattice.delinear(level, lin));
            if !self.spec.overlaps_bbox(&lattice.geometry(&cell)) {
                continue;
            }
            let a = self.get(lattice, cell);
            if a > 0.0 {
                out.push((lin, a));
            }
        }
        out
    }
}

/// `f ← α f_rest + (1-α) f`; returns the momentum `α q |C|` removed from the cell.
fn blend_cell(scheme: &SchemeSpec, f: &mut [f64], alpha: f64, rest: &[f64], m: &mut [f64]) -> [f64; 2] {
    scheme.to_moments(f, m);
    let removed = [alpha * m[1], alpha * m[2]];
    for (v, r) in f.iter_mut().zip(rest) {
        *v = alpha * r + (1.0 - alpha) * *v;
    }
    removed
}

/// Blend the leaves meeting the obstacle toward the resting equilibrium `rest`; returns the
/// total momentum removed.
pub fn apply_obstacle(
    scheme: &SchemeSpec,
    tree: &CellTree,
    field: &mut Field,
    fractions: &[(usize, f64)],
    rest: &[f64],
) -> [f64; 2] {
    let lat = tree.lattice();
    let mut m = vec![0.0; scheme.q()];
    let mut total = [0.0; 2];
    for &(pos, a) in fractions {
        let vol = lat.geometry(&tree.cell(pos)).measure;
        let r = blend_cell(scheme, field.cell_mut(pos), a, rest, &mut m);
        total[0] += vol * r[0];
        total[1] += vol * r[1];
    }
    total
}

/// Same blend on a uniform grid.
pub fn apply_obstacle_uniform(
    scheme: &SchemeSpec,
    field: &mut UniformField,
    fractions: &[(usize, f64)],
    rest: &[f64],
) -> [f64; 2] {
    let lat = *field.lattice();
    let level = field.level();
    let vol = lat.geometry(&CellId::new(level, [0; 3])).measure;
    let mut m = vec![0.0; scheme.q()];
    let mut total = [0.0; 2];
    for &(lin, a) in fractions {
        let r = blend_cell(scheme, field.cell_mut(lin), a, rest, &mut m);
        total[0] += vol * r[0];
        total[1] += vol * r[1];
    }
    total
}
