use std::fmt;
use std::ops::Range;

use super::{CellId, CellSet, Index, Lattice, MeshError};

/// Which property of a tree a candidate set violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeRule {
    /// Property 1: the whole coarsest level must be present.
    CoarsestLevel,
    /// Property 2: a cell above the coarsest level needs its sibling group (at most the one
    /// non-detail sibling may be missing).
    SiblingGroup,
    /// Property 3: a cell above the coarsest level needs its parent.
    Parent,
    /// The cell lies outside the lattice.
    OutOfDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeViolation {
    pub rule: TreeRule,
    pub cell: CellId,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} violated at level {} index {:?}",
            self.rule, self.cell.level, self.cell.k
        )
    }
}

/// Check the tree properties on an arbitrary candidate set.
pub fn check_tree<'a, I>(lattice: &Lattice, candidate: I) -> Result<(), TreeViolation>
where
    I: IntoIterator<Item = &'a CellId>,
{
    let mut set = CellSet::new(*lattice);
    for c in candidate {
        if !lattice.contains(c) {
            return Err(TreeViolation {
                rule: TreeRule::OutOfDomain,
                cell: *c,
            });
        }
        set.insert(c);
    }
    check_set(&set, false)
}

/// Boolean form of [`check_tree`].
pub fn is_tree<'a, I>(lattice: &Lattice, candidate: I) -> bool
where
    I: IntoIterator<Item = &'a CellId>,
{
    check_tree(lattice, candidate).is_ok()
}

/// `strict` demands complete sibling groups, the form stored by [`CellTree`].
pub(crate) fn check_set(set: &CellSet, strict: bool) -> Result<(), TreeViolation> {
    let lat = *set.lattice();
    let jmin = lat.min_level();
    for lin in 0..lat.cells_on_level(jmin) {
        let k = lat.delinear(jmin, lin);
        let c = CellId::new(jmin, k);
        if !set.contains(&c) {
            return Err(TreeViolation {
                rule: TreeRule::CoarsestLevel,
                cell: c,
            });
        }
    }
    let n = lat.num_children();
    let allowed_missing = if strict { 0 } else { 1 };
    for level in jmin + 1..=lat.max_level() {
        for k in set.iter_level(level) {
            let c = CellId::new(level, k);
            let p = lat.parent_unchecked(&c);
            let present = (0..n)
                .filter(|&j| set.contains(&lat.child_unchecked(&p, j)))
                .count();
            if present + allowed_missing < n {
                return Err(TreeViolation {
                    rule: TreeRule::SiblingGroup,
                    cell: c,
                });
            }
            if !set.contains(&p) {
                return Err(TreeViolation {
                    rule: TreeRule::Parent,
                    cell: c,
                });
            }
        }
    }
    Ok(())
}

/// Complete a tree `Λ` into `R(Λ)` by adding the missing sibling of every group.
pub fn complete_tree(set: &CellSet) -> CellSet {
    let mut out = set.clone();
    for c in set.iter() {
        out.insert_closed(&c);
    }
    out
}

/// Smallest graded superset: every complete-tree cell above the coarsest level has the
/// `(2γ+1)^d` block around its parent (clipped to the domain) in the tree.
///
/// `set` must be a complete tree. A single fine-to-coarse sweep suffices because closing an
/// inserted cell only touches its own level and coarser ones.
pub fn make_graded(set: &CellSet, gamma: u32) -> CellSet {
    let lat = *set.lattice();
    let mut out = set.clone();
    let offsets = lat.box_offsets(gamma as i32);
    for level in (lat.min_level() + 1..=lat.max_level()).rev() {
        let parents: Vec<Index> = out
            .iter_level(level - 1)
            .filter(|k| out.contains(&lat.child_unchecked(&CellId::new(level - 1, *k), 0)))
            .collect();
        for p in parents {
            for o in &offsets {
                let n = CellId::new(level - 1, super::add(&p, o));
                if lat.contains(&n) && !out.contains(&n) {
                    out.insert_closed(&n);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: i32,
    end: i32,
    offset: u32,
}

/// Per-level interval storage: runs of contiguous indices along the first axis, grouped by
/// row (the remaining axes), plus the level-local position of each run start.
#[derive(Debug, Clone)]
struct LevelIndex {
    level: u32,
    extent: Index,
    row_ptr: Vec<u32>,
    runs: Vec<Run>,
}

impl LevelIndex {
    fn build(lattice: &Lattice, level: u32, set: &CellSet, ks: &mut Vec<Index>) -> Self {
        let extent = lattice.extent(level);
        let nrows = (extent[1] * extent[2]) as usize;
        let row_len = extent[0] as usize;
        let mask = set.mask(level);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut runs = Vec::new();
        let mut count: u32 = 0;
        for row in 0..nrows {
            row_ptr.push(runs.len() as u32);
            let y = (row % extent[1] as usize) as i32;
            let z = (row / extent[1] as usize) as i32;
            let slice = &mask[row * row_len..(row + 1) * row_len];
            let mut current: Option<Run> = None;
            for x in slice.iter_ones() {
                let x = x as i32;
                ks.push([x, y, z]);
                match current.as_mut() {
                    Some(r) if r.end == x => r.end += 1,
                    _ => {
                        if let Some(r) = current.take() {
                            runs.push(r);
                        }
                        current = Some(Run {
                            start: x,
                            end: x + 1,
                            offset: count,
                        });
                    }
                }
                count += 1;
            }
            if let Some(r) = current {
                runs.push(r);
            }
        }
        row_ptr.push(runs.len() as u32);
        Self {
            level,
            extent,
            row_ptr,
            runs,
        }
    }

    #[inline]
    fn find(&self, k: &Index) -> Option<usize> {
        let e = &self.extent;
        if k[0] < 0 || k[1] < 0 || k[2] < 0 || k[0] >= e[0] || k[1] >= e[1] || k[2] >= e[2] {
            return None;
        }
        let row = (k[1] + e[1] * k[2]) as usize;
        let runs = &self.runs[self.row_ptr[row] as usize..self.row_ptr[row + 1] as usize];
        let i = runs.partition_point(|r| r.start <= k[0]);
        if i == 0 {
            return None;
        }
        let r = runs[i - 1];
        if k[0] < r.end {
            Some((r.offset + (k[0] - r.start) as u32) as usize)
        } else {
            None
        }
    }
}

/// Immutable complete tree `R(Λ)`: every present cell comes with its whole sibling group and
/// its parent. Cells are numbered level by level (coarse to fine) and, within a level, with the
/// first axis fastest; that number is the row of the cell in any [`crate::multiresolution::Field`].
#[derive(Debug, Clone)]
pub struct CellTree {
    lattice: Lattice,
    levels: Vec<LevelIndex>,
    offsets: Vec<usize>,
    ks: Vec<Index>,
    leaf: Vec<bool>,
    leaves: Vec<u32>,
}

impl CellTree {
    /// Freeze a complete tree.
    pub fn from_set(set: &CellSet) -> Result<Self, MeshError> {
        check_set(set, true).map_err(MeshError::NotATree)?;
        Ok(Self::from_set_unchecked(set))
    }

    pub(crate) fn from_set_unchecked(set: &CellSet) -> Self {
        let lattice = *set.lattice();
        let mut ks = Vec::with_capacity(set.len());
        let mut levels = Vec::new();
        let mut offsets = vec![0];
        for level in lattice.min_level()..=lattice.max_level() {
            levels.push(LevelIndex::build(&lattice, level, set, &mut ks));
            offsets.push(ks.len());
        }
        let mut leaf = vec![false; ks.len()];
        let mut leaves = Vec::new();
        for (li, level) in (lattice.min_level()..=lattice.max_level()).enumerate() {
            for pos in offsets[li]..offsets[li + 1] {
                let c = CellId::new(level, ks[pos]);
                let is_leaf = level == lattice.max_level()
                    || !set.contains(&lattice.child_unchecked(&c, 0));
                leaf[pos] = is_leaf;
                if is_leaf {
                    leaves.push(pos as u32);
                }
            }
        }
        Self {
            lattice,
            levels,
            offsets,
            ks,
            leaf,
            leaves,
        }
    }

    /// Uniform mesh: all cells up to `level`, leaves on `level`.
    pub fn full(lattice: Lattice, level: u32) -> Self {
        Self::from_set_unchecked(&CellSet::full_to(lattice, level))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Number of complete-tree cells `#R(Λ)`.
    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Positions of the complete leaves, coarse to fine.
    pub fn leaves(&self) -> &[u32] {
        &self.leaves
    }

    /// Position of `(level, k)` if the cell is in the complete tree.
    #[inline]
    pub fn position(&self, level: u32, k: &Index) -> Option<usize> {
        if level < self.lattice.min_level() || level > self.lattice.max_level() {
            return None;
        }
        let li = (level - self.lattice.min_level()) as usize;
        self.levels[li].find(k).map(|p| p + self.offsets[li])
    }

    pub fn contains(&self, cell: &CellId) -> bool {
        self.position(cell.level, &cell.k).is_some()
    }

    #[inline]
    pub fn index(&self, pos: usize) -> Index {
        self.ks[pos]
    }

    pub fn cell(&self, pos: usize) -> CellId {
        CellId::new(self.level_of(pos), self.ks[pos])
    }

    pub fn level_of(&self, pos: usize) -> u32 {
        let li = self.offsets.partition_point(|&o| o <= pos) - 1;
        self.levels[li].level
    }

    #[inline]
    pub fn is_leaf(&self, pos: usize) -> bool {
        self.leaf[pos]
    }

    /// Position range of the cells on `level`.
    pub fn level_range(&self, level: u32) -> Range<usize> {
        let li = (level - self.lattice.min_level()) as usize;
        self.offsets[li]..self.offsets[li + 1]
    }

    /// Number of runs used by the interval storage, a proxy for memory footprint.
    pub fn num_intervals(&self) -> usize {
        self.levels.iter().map(|l| l.runs.len()).sum()
    }

    /// Complete leaves `S(Λ)` as cell ids.
    pub fn complete_leaves(&self) -> Vec<CellId> {
        self.leaves.iter().map(|&p| self.cell(p as usize)).collect()
    }

    /// Mutable copy of the membership.
    pub fn to_set(&self) -> CellSet {
        let mut s = CellSet::new(self.lattice);
        for level in self.lattice.min_level()..=self.lattice.max_level() {
            for pos in self.level_range(level) {
                s.insert(&CellId::new(level, self.ks[pos]));
            }
        }
        s
    }

    /// The complete leaf whose extent contains cell `(level, k)`, if one exists at `level` or
    /// coarser. Returns `None` for cells that are refined further.
    pub fn covering_leaf(&self, level: u32, k: &Index) -> Option<usize> {
        let dim = self.lattice.dim();
        let mut l = level;
        let mut kk = *k;
        loop {
            if let Some(p) = self.position(l, &kk) {
                return if self.leaf[p] { Some(p) } else { None };
            }
            if l == self.lattice.min_level() {
                return None;
            }
            for v in kk.iter_mut().take(dim) {
                *v >>= 1;
            }
            l -= 1;
        }
    }

    /// Whether every complete-tree cell above the coarsest level sees its parent's prediction
    /// stencil in the tree.
    pub fn is_graded(&self, gamma: u32) -> bool {
        let lat = self.lattice;
        let offsets = lat.box_offsets(gamma as i32);
        for level in lat.min_level() + 1..=lat.max_level() {
            for pos in self.level_range(level) {
                let p = lat.parent_unchecked(&CellId::new(level, self.ks[pos]));
                for o in &offsets {
                    let n = super::add(&p.k, o);
                    if lat.in_domain(p.level, &n) && self.position(p.level, &n).is_none() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Ghost cells of `level`: indices outside the domain within `width` cells (Cartesian and
    /// diagonal directions) of a present cell. They carry mirrored values and are never leaves.
    pub fn ghost_layer(&self, level: u32, width: u32) -> Vec<Index> {
        let lat = self.lattice;
        let offs = lat.box_offsets(width as i32);
        let mut out = std::collections::BTreeSet::new();
        for pos in self.level_range(level) {
            let k = self.ks[pos];
            for o in &offs {
                let n = super::add(&k, o);
                if !lat.in_domain(level, &n) {
                    out.insert([n[2], n[1], n[0]]);
                }
            }
        }
        out.into_iter().map(|n| [n[2], n[1], n[0]]).collect()
    }
}

impl PartialEq for CellTree {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.offsets == other.offsets && self.ks == other.ks
    }
}
