use super::{Boundaries, LbmError, SchemeSpec};
use crate::mesh::{CellId, Index, MAX_DIM};
use crate::multiresolution::UniformField;

/// Exact shift on a uniform grid with ghost values supplied by the boundary kinds.
pub fn reference_stream(
    scheme: &SchemeSpec,
    bcs: &Boundaries,
    post: &UniformField,
    out: &mut UniformField,
) -> Result<(), LbmError> {
    bcs.validate(scheme)?;
    let lat = *post.lattice();
    let level = post.level();
    let dim = lat.dim();
    let ext = lat.extent(level);
    let q = scheme.q();
    for lin in 0..lat.cells_on_level(level) {
        let k = lat.delinear(level, lin);
        for (h, eta) in scheme.velocities().iter().enumerate() {
            let src: Index = [k[0] - eta[0], k[1] - eta[1], k[2] - eta[2]];
            let mut classes = [0i8; MAX_DIM];
            for i in 0..dim {
                classes[i] = if src[i] < 0 {
                    -1
                } else if src[i] >= ext[i] {
                    1
                } else {
                    0
                };
            }
            let v = if classes.iter().all(|&c| c == 0) {
                post.get(&src)[h]
            } else {
                let kind = bcs.select(dim, &classes);
                match kind.reflection_sign(h) {
                    None => post.get(&lat.clamp(level, &src))[h],
                    Some(sign) => {
                        let o = scheme.opposite(h).expect("validated");
                        sign * post.cell(lin)[o] + kind.correction(h)
                    }
                }
            };
            out.cell_mut(lin)[h] = v;
        }
    }
    debug_assert_eq!(out.q(), q);
    Ok(())
}

/// Collide every cell of a uniform field in place.
pub fn reference_collide(scheme: &SchemeSpec, field: &mut UniformField) -> Result<(), LbmError> {
    let lat = *field.lattice();
    let level = field.level();
    let mut scratch = vec![0.0; scheme.scratch_len()];
    for lin in 0..field.num_cells() {
        scheme
            .collide_cell(field.cell_mut(lin), &mut scratch)
            .map_err(|source| LbmError::Equilibrium {
                cell: CellId::new(level, lat.delinear(level, lin)),
                source,
            })?;
    }
    Ok(())
}

/// One step of the reference scheme on the finest grid: collide, then shift.
pub fn reference_step(
    scheme: &SchemeSpec,
    bcs: &Boundaries,
    f: &UniformField,
) -> Result<UniformField, LbmError> {
    let mut post = f.clone();
    reference_collide(scheme, &mut post)?;
    let mut out = UniformField::zeros(*f.lattice(), f.level(), f.q());
    reference_stream(scheme, bcs, &post, &mut out)?;
    Ok(out)
}

/// Uniform finest-level solver holding post-collision data, advanced in the same order as
/// the adaptive solver (stream, then collide).
#[derive(Debug, Clone)]
pub struct ReferenceSolver {
    state: UniformField,
    scratch: UniformField,
}

impl ReferenceSolver {
    pub fn new(state: UniformField) -> Self {
        let scratch = state.clone();
        Self { state, scratch }
    }

    pub fn state(&self) -> &UniformField {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut UniformField {
        &mut self.state
    }

    pub fn advance(&mut self, scheme: &SchemeSpec, bcs: &Boundaries) -> Result<(), LbmError> {
        reference_stream(scheme, bcs, &self.state, &mut self.scratch)?;
        std::mem::swap(&mut self.state, &mut self.scratch);
        reference_collide(scheme, &mut self.state)
    }
}
