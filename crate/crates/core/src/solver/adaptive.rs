use crate::lbm::{collide_leaves, conserved_totals, AdaptiveStream, Boundaries, LbmError, SchemeSpec, StreamMode, StreamStats};
use crate::mesh::CellTree;
use crate::multiresolution::{adapt, project_up, reconstruct_uniform, AdaptParams, Field, Prediction, UniformField};

/// Counts of the kernels executed so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelCounts {
    pub steps: u64,
    pub adapts: u64,
    pub streams: u64,
    pub collided_leaves: u64,
    pub last_stream: StreamStats,
}

/// Adaptive solver holding post-collision populations on the complete leaves of a tree.
#[derive(Debug)]
pub struct AdaptiveSolver {
    scheme: SchemeSpec,
    bcs: Boundaries,
    pred: Prediction,
    stream: AdaptiveStream,
    params: AdaptParams,
    tree: CellTree,
    field: Field,
    counts: KernelCounts,
}

impl AdaptiveSolver {
    /// Start from the full finest mesh carrying `initial` (a field on the finest level).
    pub fn new(
        scheme: SchemeSpec,
        bcs: Boundaries,
        pred: Prediction,
        params: AdaptParams,
        initial: &UniformField,
    ) -> Result<Self, LbmError> {
        let lat = *initial.lattice();
        if initial.q() != scheme.q() {
            return Err(LbmError::Components {
                expected: scheme.q(),
                got: initial.q(),
            });
        }
        if initial.level() != lat.max_level() {
            return Err(LbmError::Scheme("initial datum must live on the finest level".into()));
        }
        bcs.validate(&scheme)?;
        let tree = CellTree::full(lat, lat.max_level());
        let mut field = Field::zeros(scheme.q(), tree.len());
        for pos in tree.level_range(lat.max_level()) {
            field.cell_mut(pos).copy_from_slice(initial.get(&tree.index(pos)));
        }
        project_up(&tree, &mut field);
        let stream = AdaptiveStream::new(lat, &pred, scheme.velocities());
        Ok(Self {
            scheme,
            bcs,
            pred,
            stream,
            params,
            tree,
            field,
            counts: KernelCounts::default(),
        })
    }

    pub fn with_stream_mode(mut self, mode: StreamMode) -> Self {
        let lat = *self.tree.lattice();
        self.stream = AdaptiveStream::new(lat, &self.pred, self.scheme.velocities()).with_mode(mode);
        self
    }

    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }
    pub fn prediction(&self) -> &Prediction {
        &self.pred
    }
    pub fn params(&self) -> AdaptParams {
        self.params
    }
    pub fn tree(&self) -> &CellTree {
        &self.tree
    }
    pub fn field(&self) -> &Field {
        &self.field
    }
    /// Modify leaf values; internal cells are re-projected afterwards.
    pub fn modify_leaves<R>(&mut self, f: impl FnOnce(&CellTree, &mut Field) -> R) -> R {
        let r = f(&self.tree, &mut self.field);
        project_up(&self.tree, &mut self.field);
        r
    }
    pub fn counts(&self) -> KernelCounts {
        self.counts
    }

    /// Adapt the mesh, then stream and collide on the new leaves.
    pub fn step(&mut self) -> Result<(), LbmError> {
        let (tree, field) = adapt(
            &self.tree,
            &mut self.field,
            &self.pred,
            self.params,
            self.scheme.velocities(),
        )?;
        self.counts.adapts += 1;
        let mut out = Field::zeros(self.scheme.q(), tree.len());
        let stats = self
            .stream
            .apply(&self.scheme, &self.bcs, &tree, &field, &self.pred, &mut out)?;
        self.counts.streams += 1;
        self.counts.last_stream = stats;
        collide_leaves(&self.scheme, &tree, &mut out)?;
        self.counts.collided_leaves += tree.num_leaves() as u64;
        self.counts.steps += 1;
        project_up(&tree, &mut out);
        self.tree = tree;
        self.field = out;
        Ok(())
    }

    /// Conserved totals over the leaves.
    pub fn totals(&self) -> Vec<f64> {
        conserved_totals(&self.scheme, &self.tree, &self.field)
    }

    /// Reconstruction of the current populations on the finest level.
    pub fn reconstruct(&self) -> UniformField {
        let lat = self.tree.lattice();
        reconstruct_uniform(&self.tree, &self.field, &self.pred, lat.max_level())
    }
}
