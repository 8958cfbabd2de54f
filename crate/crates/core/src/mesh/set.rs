use bitvec::prelude::*;

use super::{CellId, Index, Lattice, MeshError};

/// Mutable cell set backed by one dense bit mask per level.
///
/// Used while a new mesh is being assembled; [`super::CellTree`] is the frozen form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    lattice: Lattice,
    masks: Vec<BitVec<u64, Lsb0>>,
}

impl CellSet {
    pub fn new(lattice: Lattice) -> Self {
        let masks = (lattice.min_level()..=lattice.max_level())
            .map(|l| bitvec![u64, Lsb0; 0; lattice.cells_on_level(l)])
            .collect();
        Self { lattice, masks }
    }

    /// The coarsest level alone, the smallest possible tree.
    pub fn coarsest(lattice: Lattice) -> Self {
        let mut s = Self::new(lattice);
        s.masks[0].fill(true);
        s
    }

    /// Every cell of every level up to and including `level`.
    pub fn full_to(lattice: Lattice, level: u32) -> Self {
        let mut s = Self::new(lattice);
        for l in lattice.min_level()..=level.min(lattice.max_level()) {
            s.masks[(l - lattice.min_level()) as usize].fill(true);
        }
        s
    }

    /// Build from arbitrary cells without closing the set.
    pub fn from_cells<I: IntoIterator<Item = CellId>>(
        lattice: Lattice,
        cells: I,
    ) -> Result<Self, MeshError> {
        let mut s = Self::new(lattice);
        for c in cells {
            if !lattice.contains(&c) {
                return Err(MeshError::OutOfDomain(c));
            }
            s.insert(&c);
        }
        Ok(s)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    fn slot(&self, cell: &CellId) -> Option<(usize, usize)> {
        if !self.lattice.contains(cell) {
            return None;
        }
        Some((
            (cell.level - self.lattice.min_level()) as usize,
            self.lattice.linear(cell.level, &cell.k),
        ))
    }

    #[inline]
    pub fn contains(&self, cell: &CellId) -> bool {
        match self.slot(cell) {
            Some((l, i)) => self.masks[l][i],
            None => false,
        }
    }

    /// Insert one cell; returns whether it was new. Out-of-domain cells are ignored.
    pub fn insert(&mut self, cell: &CellId) -> bool {
        match self.slot(cell) {
            Some((l, i)) => !self.masks[l].replace(i, true),
            None => false,
        }
    }

    pub fn remove(&mut self, cell: &CellId) -> bool {
        match self.slot(cell) {
            Some((l, i)) => self.masks[l].replace(i, false),
            None => false,
        }
    }

    /// Insert a cell together with its whole sibling group and all ancestors (with their
    /// sibling groups), keeping a complete tree complete.
    pub fn insert_closed(&mut self, cell: &CellId) {
        if !self.lattice.contains(cell) {
            return;
        }
        let lat = self.lattice;
        let mut c = *cell;
        loop {
            if self.contains(&c) {
                return;
            }
            if c.level == lat.min_level() {
                self.insert(&c);
                return;
            }
            let p = lat.parent_unchecked(&c);
            for j in 0..lat.num_children() {
                let s = lat.child_unchecked(&p, j);
                self.insert(&s);
            }
            c = p;
        }
    }

    pub fn len(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.iter().all(|m| m.not_any())
    }

    pub fn level_len(&self, level: u32) -> usize {
        self.masks[(level - self.lattice.min_level()) as usize].count_ones()
    }

    /// Indices present on `level`, ordered with the first axis fastest.
    pub fn iter_level(&self, level: u32) -> impl Iterator<Item = Index> + '_ {
        let lat = self.lattice;
        self.masks[(level - lat.min_level()) as usize]
            .iter_ones()
            .map(move |lin| lat.delinear(level, lin))
    }

    /// All cells, coarse to fine.
    pub fn iter(&self) -> impl Iterator<Item = CellId> + '_ {
        (self.lattice.min_level()..=self.lattice.max_level())
            .flat_map(move |l| self.iter_level(l).map(move |k| CellId::new(l, k)))
    }

    /// True when the cell is present and none of its children are.
    pub fn is_leaf(&self, cell: &CellId) -> bool {
        if !self.contains(cell) {
            return false;
        }
        if cell.level == self.lattice.max_level() {
            return true;
        }
        let lat = self.lattice;
        (0..lat.num_children()).all(|j| !self.contains(&lat.child_unchecked(cell, j)))
    }

    pub(crate) fn mask(&self, level: u32) -> &BitSlice<u64, Lsb0> {
        &self.masks[(level - self.lattice.min_level()) as usize]
    }

    /// Union with another set on the same lattice.
    pub fn union_with(&mut self, other: &CellSet) {
        assert_eq!(self.lattice, other.lattice, "lattices differ");
        for (a, b) in self.masks.iter_mut().zip(&other.masks) {
            *a |= b;
        }
    }
}
