use rustc_hash::FxHashMap;

use super::{Field, Prediction, UniformField};
use crate::mesh::{add, CellId, CellTree, Index};

/// Overwrite every non-leaf cell with the mean of its children, finest level first.
pub fn project_up(tree: &CellTree, field: &mut Field) {
    let lat = *tree.lattice();
    let q = field.q();
    let n = lat.num_children();
    let inv = 1.0 / n as f64;
    let mut acc = vec![0.0; q];
    for level in (lat.min_level()..lat.max_level()).rev() {
        for pos in tree.level_range(level) {
            if tree.is_leaf(pos) {
                continue;
            }
            let cell = CellId::new(level, tree.index(pos));
            acc.iter_mut().for_each(|a| *a = 0.0);
            for c in 0..n {
                let ch = lat.child_unchecked(&cell, c);
                let cp = tree
                    .position(ch.level, &ch.k)
                    .expect("complete tree holds every child of an internal cell");
                for (a, v) in acc.iter_mut().zip(field.cell(cp)) {
                    *a += v;
                }
            }
            for (dst, a) in field.cell_mut(pos).iter_mut().zip(&acc) {
                *dst = a * inv;
            }
        }
    }
}

/// Reference to a reconstructed value: either a stored tree cell or a memoized prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handle {
    Stored(usize),
    Memo(usize),
}

/// Values of arbitrary cells `(ℓ, k)` implied by a tree and its data.
///
/// Cells of the complete tree return their stored value (projected for internal cells). Cells
/// below a leaf are predicted recursively from the parent level, which amounts to zero details
/// beyond the tree. Ghost indices outside the domain are mirrored back inside first.
#[derive(Debug)]
pub struct Reconstructor<'a> {
    tree: &'a CellTree,
    field: &'a Field,
    pred: &'a Prediction,
    memo: FxHashMap<u128, usize>,
    arena: Vec<f64>,
}

#[inline]
fn key(level: u32, k: &Index) -> u128 {
    ((level as u128) << 96) | ((k[0] as u32 as u128) << 64) | ((k[1] as u32 as u128) << 32) | (k[2] as u32 as u128)
}

impl<'a> Reconstructor<'a> {
    pub fn new(tree: &'a CellTree, field: &'a Field, pred: &'a Prediction) -> Self {
        Self {
            tree,
            field,
            pred,
            memo: FxHashMap::default(),
            arena: Vec::new(),
        }
    }

    pub fn tree(&self) -> &'a CellTree {
        self.tree
    }

    pub fn field(&self) -> &'a Field {
        self.field
    }

    /// Number of memoized predictions.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn resolve(&mut self, level: u32, k: &Index) -> Handle {
        let tree = self.tree;
        let lat = tree.lattice();
        let km = lat.mirror(level, k);
        if let Some(p) = tree.position(level, &km) {
            return Handle::Stored(p);
        }
        let key = key(level, &km);
        if let Some(&base) = self.memo.get(&key) {
            return Handle::Memo(base);
        }
        debug_assert!(level > lat.min_level(), "coarsest level is always stored");
        let q = self.field.q();
        let pred = self.pred;
        let dim = lat.dim();
        let mut parent = km;
        for v in parent.iter_mut().take(dim) {
            *v >>= 1;
        }
        let child = lat.child_number(&km);
        let base = self.arena.len();
        self.arena.resize(base + q, 0.0);
        for (o, &w) in pred.offsets().iter().zip(pred.weights(child)) {
            match self.resolve(level - 1, &add(&parent, o)) {
                Handle::Stored(p) => {
                    let src = self.field.cell(p);
                    for j in 0..q {
                        self.arena[base + j] += w * src[j];
                    }
                }
                Handle::Memo(b) => {
                    for j in 0..q {
                        let v = self.arena[b + j];
                        self.arena[base + j] += w * v;
                    }
                }
            }
        }
        self.memo.insert(key, base);
        Handle::Memo(base)
    }

    #[inline]
    pub fn get(&self, h: Handle) -> &[f64] {
        match h {
            Handle::Stored(p) => self.field.cell(p),
            Handle::Memo(b) => &self.arena[b..b + self.field.q()],
        }
    }

    /// Component `j` behind a handle.
    #[inline]
    pub fn component(&self, h: Handle, j: usize) -> f64 {
        match h {
            Handle::Stored(p) => self.field.data()[p * self.field.q() + j],
            Handle::Memo(b) => self.arena[b + j],
        }
    }

    /// Whether a handle refers to a cell with no finer data beneath it.
    #[inline]
    pub fn is_resolved(&self, h: Handle) -> bool {
        match h {
            Handle::Stored(p) => self.tree.is_leaf(p),
            Handle::Memo(_) => true,
        }
    }

    pub fn value(&mut self, level: u32, k: &Index) -> Vec<f64> {
        let h = self.resolve(level, k);
        self.get(h).to_vec()
    }
}

/// Reconstruct the whole field on `target` (usually the finest level) by predicting level by
/// level wherever the tree holds no data. Equivalent to [`Reconstructor`] on every cell.
pub fn reconstruct_uniform(
    tree: &CellTree,
    field: &Field,
    pred: &Prediction,
    target: u32,
) -> UniformField {
    let lat = *tree.lattice();
    let q = field.q();
    let jmin = lat.min_level();
    let mut cur = UniformField::zeros(lat, jmin, q);
    for pos in tree.level_range(jmin) {
        let k = tree.index(pos);
        cur.get_mut(&k).copy_from_slice(field.cell(pos));
    }
    let offsets = pred.offsets();
    for level in jmin + 1..=target {
        let mut next = UniformField::zeros(lat, level, q);
        for lin in 0..lat.cells_on_level(level) {
            let k = lat.delinear(level, lin);
            if let Some(p) = tree.position(level, &k) {
                next.cell_mut(lin).copy_from_slice(field.cell(p));
                continue;
            }
            let mut parent = k;
            for v in parent.iter_mut().take(lat.dim()) {
                *v >>= 1;
            }
            let child = lat.child_number(&k);
            let out = next.cell_mut(lin);
            for (o, &w) in offsets.iter().zip(pred.weights(child)) {
                let src = cur.get(&lat.mirror(level - 1, &add(&parent, o)));
                for j in 0..q {
                    out[j] += w * src[j];
                }
            }
        }
        cur = next;
    }
    cur
}
