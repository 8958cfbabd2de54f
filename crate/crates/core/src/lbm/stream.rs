use std::rc::Rc;

use rustc_hash::FxHashMap;

use super::{Boundaries, LbmError, SchemeSpec};
use crate::mesh::{add, CellTree, Index, Lattice, MAX_DIM};
use crate::multiresolution::{
    ea_boxes, Field, IndexBox, Prediction, PredictionTable, Reconstructor, TableBuilder,
};

/// How reconstructed sums over `E` and `A` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// Precomputed tables on same-level values, falling back to recursion where the stencil
    /// meets finer cells.
    Flattened,
    /// Recursive reconstruction of every finest cell involved.
    Recursive,
}

/// Counters describing how the last stream was evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub table_sums: usize,
    pub recursive_sums: usize,
    pub boundary_leaves: usize,
}

#[derive(Debug)]
struct GapTables {
    e_boxes: Vec<Vec<IndexBox>>,
    a_boxes: Vec<Vec<IndexBox>>,
    union: Vec<Index>,
    incoming: Vec<Vec<(usize, f64)>>,
    outgoing: Vec<Vec<(usize, f64)>>,
}

/// Adaptive stream: `f_new = f⋆ + 2^{-d(J̄-ℓ)} (Σ_E f̂̂⋆ - Σ_A f̂̂⋆)` on every complete leaf.
#[derive(Debug)]
pub struct AdaptiveStream {
    lattice: Lattice,
    velocities: Vec<Index>,
    max_eta: i32,
    builder: TableBuilder,
    gaps: Vec<Option<GapTables>>,
    dynamic: FxHashMap<(u32, Vec<IndexBox>), Rc<PredictionTable>>,
    mode: StreamMode,
}

impl AdaptiveStream {
    pub fn new(lattice: Lattice, pred: &Prediction, velocities: &[Index]) -> Self {
        let max_eta = velocities
            .iter()
            .flat_map(|v| v.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0);
        Self {
            lattice,
            velocities: velocities.to_vec(),
            max_eta,
            builder: TableBuilder::new(pred),
            gaps: Vec::new(),
            dynamic: FxHashMap::default(),
            mode: StreamMode::Flattened,
        }
    }

    pub fn with_mode(mut self, mode: StreamMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> StreamMode {
        self.mode
    }

    fn gap_tables(&mut self, gap: u32) -> Result<&GapTables, LbmError> {
        let g = gap as usize;
        if self.gaps.len() <= g {
            self.gaps.resize_with(g + 1, || None);
        }
        if self.gaps[g].is_none() {
            let dim = self.lattice.dim();
            let mut union: Vec<Index> = Vec::new();
            let slot = |s: Index, union: &mut Vec<Index>| match union.iter().position(|u| *u == s) {
                Some(i) => i,
                None => {
                    union.push(s);
                    union.len() - 1
                }
            };
            let mut e_boxes = Vec::new();
            let mut a_boxes = Vec::new();
            let mut incoming = Vec::new();
            let mut outgoing = Vec::new();
            for eta in &self.velocities {
                let (e, a) = ea_boxes(gap, eta, dim);
                let te = self.builder.boxes_table(gap, &e)?;
                let ta = self.builder.boxes_table(gap, &a)?;
                incoming.push(
                    te.shifts
                        .iter()
                        .zip(&te.weights)
                        .map(|(s, &w)| (slot(*s, &mut union), w))
                        .collect(),
                );
                outgoing.push(
                    ta.shifts
                        .iter()
                        .zip(&ta.weights)
                        .map(|(s, &w)| (slot(*s, &mut union), w))
                        .collect(),
                );
                e_boxes.push(e);
                a_boxes.push(a);
            }
            self.gaps[g] = Some(GapTables {
                e_boxes,
                a_boxes,
                union,
                incoming,
                outgoing,
            });
        }
        Ok(self.gaps[g].as_ref().expect("just built"))
    }

    /// Stream the post-collision leaves of `post` (internal cells must hold projections) into
    /// the leaves of `out`.
    pub fn apply(
        &mut self,
        scheme: &SchemeSpec,
        bcs: &Boundaries,
        tree: &CellTree,
        post: &Field,
        pred: &Prediction,
        out: &mut Field,
    ) -> Result<StreamStats, LbmError> {
        bcs.validate(scheme)?;
        if post.q() != scheme.q() || out.q() != scheme.q() {
            return Err(LbmError::Components {
                expected: scheme.q(),
                got: post.q(),
            });
        }
        let lat = *tree.lattice();
        let dim = lat.dim();
        let jbar = lat.max_level();
        let q = scheme.q();
        let finest_ext = lat.extent(jbar);
        for g in 0..=(jbar - lat.min_level()) {
            self.gap_tables(g)?;
        }
        let mut stats = StreamStats::default();
        let mut rec = Reconstructor::new(tree, post, pred);
        let mut handles = Vec::new();
        let mut resolved = Vec::new();
        let mut new_vals = vec![0.0; q];
        for &pos in tree.leaves() {
            let pos = pos as usize;
            let level = tree.level_of(pos);
            let k = tree.index(pos);
            let g = jbar - level;
            let mut fo = [0; MAX_DIM];
            for i in 0..dim {
                fo[i] = k[i] << g;
            }
            let interior = (0..dim).all(|i| {
                fo[i] - self.max_eta >= 0 && fo[i] + (1 << g) + self.max_eta <= finest_ext[i]
            });
            let fstar = post.cell(pos);
            let scale = (-((dim as u32 * g) as f64)).exp2();
            if interior && self.mode == StreamMode::Flattened {
                let gt = self.gaps[g as usize].as_ref().expect("built");
                handles.clear();
                resolved.clear();
                for s in &gt.union {
                    let h = rec.resolve(level, &add(&k, s));
                    resolved.push(rec.is_resolved(h));
                    handles.push(h);
                }
                for h in 0..q {
                    let sum = |list: &[(usize, f64)], rec: &Reconstructor| -> Option<f64> {
                        let mut acc = 0.0;
                        for &(u, w) in list {
                            if !resolved[u] {
                                return None;
                            }
                            acc += w * rec.component(handles[u], h);
                        }
                        Some(acc)
                    };
                    let vin = match sum(&gt.incoming[h], &rec) {
                        Some(v) => {
                            stats.table_sums += 1;
                            v
                        }
                        None => {
                            stats.recursive_sums += 1;
                            recursive_sum(&mut rec, jbar, &fo, &gt.e_boxes[h], h)
                        }
                    };
                    if g == 0 && self.velocities[h] != [0; MAX_DIM] {
                        new_vals[h] = vin;
                        continue;
                    }
                    let vout = match sum(&gt.outgoing[h], &rec) {
                        Some(v) => {
                            stats.table_sums += 1;
                            v
                        }
                        None => {
                            stats.recursive_sums += 1;
                            recursive_sum(&mut rec, jbar, &fo, &gt.a_boxes[h], h)
                        }
                    };
                    new_vals[h] = fstar[h] + scale * (vin - vout);
                }
            } else {
                if !interior {
                    stats.boundary_leaves += 1;
                }
                let mut dom = IndexBox::new([0; MAX_DIM], [1; MAX_DIM]);
                for i in 0..dim {
                    dom.lo[i] = -fo[i];
                    dom.hi[i] = finest_ext[i] - fo[i];
                }
                let block = IndexBox::cube(dim, 1 << g);
                for h in 0..q {
                    let (e_boxes, a_boxes) = {
                        let gt = self.gaps[g as usize].as_ref().expect("built");
                        (gt.e_boxes[h].clone(), gt.a_boxes[h].clone())
                    };
                    let mut vin = 0.0;
                    let mut inner = Vec::new();
                    for b in &e_boxes {
                        let c = b.intersect(&dom);
                        if !c.is_empty() {
                            inner.push(c);
                        }
                        for (part, classes) in exterior_parts(b, &dom, dim) {
                            let kind = bcs.select(dim, &classes);
                            let count = part.count() as f64;
                            match kind.reflection_sign(h) {
                                None => {
                                    let mut cl = part;
                                    for i in 0..dim {
                                        cl.lo[i] = part.lo[i].clamp(dom.lo[i], dom.hi[i] - 1);
                                        cl.hi[i] = (part.hi[i] - 1).clamp(dom.lo[i], dom.hi[i] - 1) + 1;
                                    }
                                    if block.contains_box(&cl) {
                                        vin += count * fstar[h];
                                    } else {
                                        for x in part.iter() {
                                            let abs = lat.clamp(jbar, &add(&fo, &x));
                                            let leaf = tree
                                                .covering_leaf(jbar, &abs)
                                                .expect("finest cells are covered by leaves");
                                            vin += post.cell(leaf)[h];
                                        }
                                    }
                                }
                                Some(sign) => {
                                    let o = scheme.opposite(h).expect("validated");
                                    let shifted = part.shifted(&self.velocities[h]);
                                    let r = self.box_sum(&mut rec, &mut stats, level, &k, g, &fo, &[shifted], o)?;
                                    vin += sign * r + count * kind.correction(h);
                                }
                            }
                        }
                    }
                    vin += self.box_sum(&mut rec, &mut stats, level, &k, g, &fo, &inner, h)?;
                    if g == 0 && self.velocities[h] != [0; MAX_DIM] {
                        new_vals[h] = vin;
                        continue;
                    }
                    let vout = self.box_sum(&mut rec, &mut stats, level, &k, g, &fo, &a_boxes, h)?;
                    new_vals[h] = fstar[h] + scale * (vin - vout);
                }
            }
            out.cell_mut(pos).copy_from_slice(&new_vals);
        }
        Ok(stats)
    }

    /// Sum of reconstructed component `h` over finest boxes relative to the leaf block.
    #[allow(clippy::too_many_arguments)]
    fn box_sum(
        &mut self,
        rec: &mut Reconstructor<'_>,
        stats: &mut StreamStats,
        level: u32,
        k: &Index,
        gap: u32,
        fo: &Index,
        boxes: &[IndexBox],
        h: usize,
    ) -> Result<f64, LbmError> {
        if boxes.iter().all(|b| b.is_empty()) {
            return Ok(0.0);
        }
        let jbar = self.lattice.max_level();
        if self.mode == StreamMode::Flattened {
            let key = (gap, boxes.to_vec());
            let table = match self.dynamic.get(&key) {
                Some(t) => t.clone(),
                None => {
                    let t = Rc::new(self.builder.boxes_table(gap, boxes)?);
                    self.dynamic.insert(key, t.clone());
                    t
                }
            };
            let mut acc = 0.0;
            let mut ok = true;
            for (s, &w) in table.shifts.iter().zip(&table.weights) {
                let hd = rec.resolve(level, &add(k, s));
                if !rec.is_resolved(hd) {
                    ok = false;
                    break;
                }
                acc += w * rec.component(hd, h);
            }
            if ok {
                stats.table_sums += 1;
                return Ok(acc);
            }
        }
        stats.recursive_sums += 1;
        Ok(recursive_sum(rec, jbar, fo, boxes, h))
    }
}

fn recursive_sum(rec: &mut Reconstructor<'_>, jbar: u32, fo: &Index, boxes: &[IndexBox], h: usize) -> f64 {
    let mut acc = 0.0;
    for b in boxes {
        for x in b.iter() {
            let hd = rec.resolve(jbar, &add(fo, &x));
            acc += rec.component(hd, h);
        }
    }
    acc
}

/// Parts of `b` outside `dom`, each uniformly below, inside or above along every axis.
fn exterior_parts(b: &IndexBox, dom: &IndexBox, dim: usize) -> Vec<(IndexBox, [i8; MAX_DIM])> {
    let mut out = Vec::new();
    let n = 3usize.pow(dim as u32);
    for code in 0..n {
        let mut part = *b;
        let mut classes = [0i8; MAX_DIM];
        let mut c = code;
        let mut outside = false;
        for i in 0..dim {
            let cls = (c % 3) as i8 - 1;
            c /= 3;
            classes[i] = cls;
            match cls {
                -1 => {
                    part.hi[i] = part.hi[i].min(dom.lo[i]);
                    outside = true;
                }
                1 => {
                    part.lo[i] = part.lo[i].max(dom.hi[i]);
                    outside = true;
                }
                _ => {
                    part.lo[i] = part.lo[i].max(dom.lo[i]);
                    part.hi[i] = part.hi[i].min(dom.hi[i]);
                }
            }
        }
        if outside && !part.is_empty() {
            out.push((part, classes));
        }
    }
    out
}
