use super::{
    group_metrics, project_up, reconstruct_uniform, threshold, transfer, Field, MrError,
    Prediction, UniformField,
};
use crate::mesh::{make_graded, CellTree};

/// Compressed representation of a uniform field on a graded tree.
#[derive(Debug, Clone)]
pub struct Compression {
    pub tree: CellTree,
    pub field: Field,
}

/// Threshold the details of a finest-level field at `eps` and keep the graded tree of
/// significant cells; leaf values are cell means of the input.
pub fn encode(data: &UniformField, pred: &Prediction, eps: f64) -> Result<Compression, MrError> {
    let lat = *data.lattice();
    if data.level() != lat.max_level() {
        return Err(MrError::FieldSize {
            expected: lat.cells_on_level(lat.max_level()),
            got: data.num_cells(),
        });
    }
    let full = CellTree::full(lat, lat.max_level());
    let mut field = Field::zeros(data.q(), full.len());
    for pos in full.level_range(lat.max_level()) {
        let k = full.index(pos);
        field.cell_mut(pos).copy_from_slice(data.get(&k));
    }
    project_up(&full, &mut field);
    let metrics = group_metrics(&full, &field, pred);
    let set = make_graded(&threshold(&full, &metrics, eps)?, pred.gamma());
    let tree = CellTree::from_set(&set)?;
    let field = transfer(&full, &field, pred, &tree)?;
    Ok(Compression { tree, field })
}

/// Reconstruct the finest-level field (zero details outside the tree).
pub fn decode(tree: &CellTree, field: &Field, pred: &Prediction) -> UniformField {
    reconstruct_uniform(tree, field, pred, tree.lattice().max_level())
}
