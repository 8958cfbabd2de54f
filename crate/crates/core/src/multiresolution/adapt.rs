use super::{project_up, Field, MrError, Prediction, Reconstructor};
use crate::mesh::{add, make_graded, CellId, CellSet, CellTree, Index, Lattice};

/// Parameters of one mesh adaptation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptParams {
    /// Threshold `ε ≥ 0`.
    pub eps: f64,
    /// Regularity guess `μ ≥ 0` of the refinement rule.
    pub mu: f64,
}

/// Level-dependent threshold `ε_ℓ = 2^{d(ℓ-J̄)} ε`.
pub fn level_threshold(lattice: &Lattice, level: u32, eps: f64) -> f64 {
    let e = lattice.dim() as i32 * (level as i32 - lattice.max_level() as i32);
    eps * (e as f64).exp2()
}

/// Gather the parent-level stencil of `cell` (all components) into `buf`.
fn gather_stencil(
    rec: &mut Reconstructor<'_>,
    pred: &Prediction,
    level: u32,
    k: &Index,
    buf: &mut Vec<f64>,
) {
    buf.clear();
    for o in pred.offsets() {
        let h = rec.resolve(level, &add(k, o));
        buf.extend_from_slice(rec.get(h));
    }
}

fn predict_child(pred: &Prediction, stencil: &[f64], q: usize, child: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (s, &w) in pred.weights(child).iter().enumerate() {
        let src = &stencil[s * q..(s + 1) * q];
        for j in 0..q {
            out[j] += w * src[j];
        }
    }
}

/// Details `d = f - f̂` of every complete-tree cell (zero on the coarsest level).
///
/// `field` must hold projected values on internal cells (see [`project_up`]).
pub fn details(tree: &CellTree, field: &Field, pred: &Prediction) -> Field {
    let lat = *tree.lattice();
    let q = field.q();
    let mut out = Field::zeros(q, tree.len());
    let mut rec = Reconstructor::new(tree, field, pred);
    let mut stencil = Vec::new();
    let mut hat = vec![0.0; q];
    for level in lat.min_level()..lat.max_level() {
        for pos in tree.level_range(level) {
            if tree.is_leaf(pos) {
                continue;
            }
            let k = tree.index(pos);
            gather_stencil(&mut rec, pred, level, &k, &mut stencil);
            let cell = CellId::new(level, k);
            for c in 0..lat.num_children() {
                let ch = lat.child_unchecked(&cell, c);
                let cp = tree.position(ch.level, &ch.k).expect("complete tree");
                predict_child(pred, &stencil, q, c, &mut hat);
                let f = field.cell(cp);
                let d = out.cell_mut(cp);
                for j in 0..q {
                    d[j] = f[j] - hat[j];
                }
            }
        }
    }
    out
}

/// Sibling-group metric `max_h max_δ |d^h_{ℓ+1, 2k+δ}|`, stored at the parent position
/// (zero for leaves).
pub fn group_metrics(tree: &CellTree, field: &Field, pred: &Prediction) -> Vec<f64> {
    let lat = *tree.lattice();
    let q = field.q();
    let mut out = vec![0.0; tree.len()];
    let mut rec = Reconstructor::new(tree, field, pred);
    let mut stencil = Vec::new();
    let mut hat = vec![0.0; q];
    for level in lat.min_level()..lat.max_level() {
        for pos in tree.level_range(level) {
            if tree.is_leaf(pos) {
                continue;
            }
            let k = tree.index(pos);
            gather_stencil(&mut rec, pred, level, &k, &mut stencil);
            let cell = CellId::new(level, k);
            let mut m: f64 = 0.0;
            for c in 0..lat.num_children() {
                let ch = lat.child_unchecked(&cell, c);
                let cp = tree.position(ch.level, &ch.k).expect("complete tree");
                predict_child(pred, &stencil, q, c, &mut hat);
                for (f, h) in field.cell(cp).iter().zip(&hat) {
                    let d = (f - h).abs();
                    if d > m || d.is_nan() {
                        m = if d.is_nan() { f64::INFINITY } else { d };
                    }
                }
            }
            out[pos] = m;
        }
    }
    out
}

fn check_eps(eps: f64) -> Result<(), MrError> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(MrError::InvalidThreshold(eps));
    }
    Ok(())
}

/// Thresholding `T_ε`: the coarsest level plus every sibling group whose metric reaches
/// `ε_ℓ`, closed under ancestry so the result stays a complete tree.
pub fn threshold(tree: &CellTree, metrics: &[f64], eps: f64) -> Result<CellSet, MrError> {
    check_eps(eps)?;
    let lat = *tree.lattice();
    let mut out = CellSet::coarsest(lat);
    for level in lat.min_level()..lat.max_level() {
        let eps_l = level_threshold(&lat, level + 1, eps);
        for pos in tree.level_range(level) {
            if !tree.is_leaf(pos) && metrics[pos] >= eps_l {
                let child = lat.child_unchecked(&CellId::new(level, tree.index(pos)), 0);
                out.insert_closed(&child);
            }
        }
    }
    Ok(out)
}

/// Enlargement `H_ε`: add the upstream neighbour `(ℓ, k - η^h)` of every retained cell for
/// every velocity, and the children of retained cells whose own group metric reaches
/// `2^{μ+d} ε_ℓ` (levels strictly between coarsest and finest).
pub fn enlarge(
    tree: &CellTree,
    thresholded: &CellSet,
    metrics: &[f64],
    eps: f64,
    mu: f64,
    velocities: &[Index],
) -> CellSet {
    let lat = *tree.lattice();
    let mut out = thresholded.clone();
    let factor = (mu + lat.dim() as f64).exp2();
    for cell in thresholded.iter() {
        for eta in velocities {
            let n = CellId::new(cell.level, crate::mesh::sub(&cell.k, eta));
            if lat.contains(&n) && !out.contains(&n) {
                out.insert_closed(&n);
            }
        }
        if cell.level > lat.min_level() && cell.level < lat.max_level() {
            let parent = lat.parent_unchecked(&cell);
            if let Some(pp) = tree.position(parent.level, &parent.k) {
                if metrics[pp] >= factor * level_threshold(&lat, cell.level, eps) {
                    out.insert_closed(&lat.child_unchecked(&cell, 0));
                }
            }
        }
    }
    out
}

/// New complete tree `G ∘ H_ε ∘ T_ε (Λ)` from projected data on `tree`.
pub fn adapt_mesh(
    tree: &CellTree,
    field: &Field,
    pred: &Prediction,
    params: AdaptParams,
    velocities: &[Index],
) -> Result<CellSet, MrError> {
    let metrics = group_metrics(tree, field, pred);
    let t = threshold(tree, &metrics, params.eps)?;
    let h = enlarge(tree, &t, &metrics, params.eps, params.mu, velocities);
    Ok(make_graded(&h, pred.gamma()))
}

/// Carry data from `old` to `new`: kept cells copy, merged cells take the projection already
/// stored on the old tree, created cells are predicted. Internal cells of the result are
/// projected.
pub fn transfer(
    old: &CellTree,
    old_field: &Field,
    pred: &Prediction,
    new: &CellTree,
) -> Result<Field, MrError> {
    if old_field.num_cells() != old.len() {
        return Err(MrError::FieldSize {
            expected: old.len(),
            got: old_field.num_cells(),
        });
    }
    let q = old_field.q();
    let mut out = Field::zeros(q, new.len());
    let mut rec = Reconstructor::new(old, old_field, pred);
    for &pos in new.leaves() {
        let pos = pos as usize;
        let cell = new.cell(pos);
        let h = rec.resolve(cell.level, &cell.k);
        out.cell_mut(pos).copy_from_slice(rec.get(h));
    }
    project_up(new, &mut out);
    Ok(out)
}

/// Full adaptation step: project, analyse, build the new mesh and transfer the data.
pub fn adapt(
    tree: &CellTree,
    field: &mut Field,
    pred: &Prediction,
    params: AdaptParams,
    velocities: &[Index],
) -> Result<(CellTree, Field), MrError> {
    if field.num_cells() != tree.len() {
        return Err(MrError::FieldSize {
            expected: tree.len(),
            got: field.num_cells(),
        });
    }
    project_up(tree, field);
    let set = adapt_mesh(tree, field, pred, params, velocities)?;
    let new_tree = CellTree::from_set(&set)?;
    let new_field = transfer(tree, field, pred, &new_tree)?;
    Ok((new_tree, new_field))
}
