use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::{MrError, Prediction};
use crate::mesh::{CellId, Index, Lattice, MAX_DIM};

/// Half-open box of indices `[lo, hi)`; unused axes span `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexBox {
    pub lo: Index,
    pub hi: Index,
}

impl IndexBox {
    pub fn new(lo: Index, hi: Index) -> Self {
        Self { lo, hi }
    }

    /// The box `[0, n)^d`.
    pub fn cube(dim: usize, n: i32) -> Self {
        let mut hi = [1; MAX_DIM];
        for v in hi.iter_mut().take(dim) {
            *v = n;
        }
        Self { lo: [0; MAX_DIM], hi }
    }

    pub fn is_empty(&self) -> bool {
        (0..MAX_DIM).any(|i| self.lo[i] >= self.hi[i])
    }

    pub fn count(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        (0..MAX_DIM)
            .map(|i| (self.hi[i] - self.lo[i]) as usize)
            .product()
    }

    pub fn shifted(&self, d: &Index) -> Self {
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.lo[i] += d[i];
            out.hi[i] += d[i];
        }
        out
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.lo[i] = self.lo[i].max(other.lo[i]);
            out.hi[i] = self.hi[i].min(other.hi[i]);
        }
        out
    }

    pub fn contains(&self, k: &Index) -> bool {
        (0..MAX_DIM).all(|i| k[i] >= self.lo[i] && k[i] < self.hi[i])
    }

    pub fn contains_box(&self, other: &Self) -> bool {
        other.is_empty() || (0..MAX_DIM).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Indices of the box, first axis fastest.
    pub fn iter(&self) -> impl Iterator<Item = Index> + '_ {
        let b = *self;
        let empty = b.is_empty();
        (b.lo[2]..if empty { b.lo[2] } else { b.hi[2] }).flat_map(move |z| {
            (b.lo[1]..b.hi[1]).flat_map(move |y| (b.lo[0]..b.hi[0]).map(move |x| [x, y, z]))
        })
    }
}

/// Disjoint boxes covering `a \ b`.
pub fn box_difference(a: &IndexBox, b: &IndexBox, dim: usize) -> Vec<IndexBox> {
    let mut out = Vec::new();
    if a.is_empty() {
        return out;
    }
    let mut cur = *a;
    for i in 0..dim {
        if cur.lo[i] < b.lo[i] {
            let mut part = cur;
            part.hi[i] = part.hi[i].min(b.lo[i]);
            if !part.is_empty() {
                out.push(part);
            }
        }
        if cur.hi[i] > b.hi[i] {
            let mut part = cur;
            part.lo[i] = part.lo[i].max(b.hi[i]);
            if !part.is_empty() {
                out.push(part);
            }
        }
        cur.lo[i] = cur.lo[i].max(b.lo[i]);
        cur.hi[i] = cur.hi[i].min(b.hi[i]);
        if cur.is_empty() {
            break;
        }
    }
    out
}

/// Sets `E = (B - η) \ B` and `A = B \ (B - η)` for the finest block `B = [0, 2^gap)^d` of a
/// cell, in finest-level coordinates relative to the block origin.
pub fn ea_boxes(gap: u32, eta: &Index, dim: usize) -> (Vec<IndexBox>, Vec<IndexBox>) {
    let b = IndexBox::cube(dim, 1 << gap);
    let mut neg = [0; MAX_DIM];
    for i in 0..dim {
        neg[i] = -eta[i];
    }
    let s = b.shifted(&neg);
    (box_difference(&s, &b, dim), box_difference(&b, &s, dim))
}

/// Finest cells `E` (entering) and `A` (leaving) of `cell` for velocity `η`, in absolute
/// finest-level indices.
pub fn compute_ea(lattice: &Lattice, cell: &CellId, eta: &Index) -> (Vec<Index>, Vec<Index>) {
    let dim = lattice.dim();
    let gap = lattice.max_level() - cell.level;
    let (lo, _) = lattice.finest_span(cell);
    let (e, a) = ea_boxes(gap, eta, dim);
    let collect = |boxes: &[IndexBox]| {
        let mut v: Vec<Index> = boxes
            .iter()
            .flat_map(|b| b.shifted(&lo).iter().collect::<Vec<_>>())
            .collect();
        v.sort_by_key(|k| [k[2], k[1], k[0]]);
        v
    };
    (collect(&e), collect(&a))
}

/// Which set a table sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `E`, cells entering the leaf.
    Incoming,
    /// `A`, cells leaving the leaf.
    Outgoing,
}

/// Linear form over same-level cells: `Σ_i w_i f_{ℓ, k + ξ_i}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTable {
    pub shifts: Vec<Index>,
    pub weights: Vec<f64>,
}

impl PredictionTable {
    pub fn len(&self) -> usize {
        self.shifts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

type Functional = Vec<(i32, i128)>;

/// Builds flattened reconstruction tables: the sum over finest cells of a set, expressed
/// through values on the level of the cell, by composing one-dimensional predictions.
#[derive(Debug, Clone)]
pub struct TableBuilder {
    dim: usize,
    gamma: i32,
    /// Coefficients are integers over `2^bits`.
    bits: u32,
    /// Numerators of the one-dimensional weights, indexed by `[δ][o + γ]`.
    w1: [Vec<i128>; 2],
    functionals: FxHashMap<(u32, i32), Functional>,
    ranges: FxHashMap<(u32, i32, i32), Vec<(i32, f64)>>,
}

impl TableBuilder {
    pub fn new(pred: &Prediction) -> Self {
        let gamma = pred.gamma() as i32;
        let mut bits = 0;
        for c in pred.coefficients() {
            let d = *c.denom();
            debug_assert_eq!(d.count_ones(), 1, "dyadic coefficients expected");
            bits = bits.max(d.trailing_zeros());
        }
        let scale = 1i128 << bits;
        let mut w1 = [vec![0i128; (2 * gamma + 1) as usize], vec![0i128; (2 * gamma + 1) as usize]];
        for (delta, row) in w1.iter_mut().enumerate() {
            for o in -gamma..=gamma {
                let w = pred.weight_1d_exact(delta as i32, o);
                row[(o + gamma) as usize] = *w.numer() * (scale / *w.denom());
            }
        }
        Self {
            dim: pred.dim(),
            gamma,
            bits,
            w1,
            functionals: FxHashMap::default(),
            ranges: FxHashMap::default(),
        }
    }

    /// Numerator (over `2^{bits·gap}`) of the value of level-`ℓ+gap` cell `x` in terms of
    /// level-`ℓ` cells.
    fn functional(&mut self, gap: u32, x: i32) -> Result<Functional, MrError> {
        if gap == 0 {
            return Ok(vec![(x, 1)]);
        }
        if let Some(f) = self.functionals.get(&(gap, x)) {
            return Ok(f.clone());
        }
        let delta = (x & 1) as usize;
        let parent = x >> 1;
        let mut acc: BTreeMap<i32, i128> = BTreeMap::new();
        for o in -self.gamma..=self.gamma {
            let w = self.w1[delta][(o + self.gamma) as usize];
            for (k, v) in self.functional(gap - 1, parent + o)? {
                let t = w.checked_mul(v).ok_or(MrError::GapTooLarge(gap))?;
                let e = acc.entry(k).or_insert(0);
                *e = e.checked_add(t).ok_or(MrError::GapTooLarge(gap))?;
            }
        }
        let f: Functional = acc.into_iter().filter(|&(_, v)| v != 0).collect();
        self.functionals.insert((gap, x), f.clone());
        Ok(f)
    }

    /// `Σ_{x ∈ [lo, hi)} F_gap(x)` as weights on level-`ℓ` offsets.
    pub fn range_sum(&mut self, gap: u32, lo: i32, hi: i32) -> Result<Vec<(i32, f64)>, MrError> {
        if let Some(r) = self.ranges.get(&(gap, lo, hi)) {
            return Ok(r.clone());
        }
        let mut acc: BTreeMap<i32, i128> = BTreeMap::new();
        for x in lo..hi {
            for (k, v) in self.functional(gap, x)? {
                let e = acc.entry(k).or_insert(0);
                *e = e.checked_add(v).ok_or(MrError::GapTooLarge(gap))?;
            }
        }
        let denom = ((self.bits * gap) as f64).exp2();
        let r: Vec<(i32, f64)> = acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|(k, v)| (k, v as f64 / denom))
            .collect();
        self.ranges.insert((gap, lo, hi), r.clone());
        Ok(r)
    }

    /// Table for the sum of reconstructed finest values over `boxes` (relative finest
    /// coordinates of a cell `gap` levels above the finest).
    pub fn boxes_table(&mut self, gap: u32, boxes: &[IndexBox]) -> Result<PredictionTable, MrError> {
        let dim = self.dim;
        let mut acc: BTreeMap<[i32; 3], f64> = BTreeMap::new();
        for b in boxes {
            if b.is_empty() {
                continue;
            }
            let mut axes: Vec<Vec<(i32, f64)>> = Vec::with_capacity(dim);
            for i in 0..dim {
                axes.push(self.range_sum(gap, b.lo[i], b.hi[i])?);
            }
            let ones = vec![(0, 1.0)];
            let ax = |i: usize| if i < dim { &axes[i] } else { &ones };
            for &(z, wz) in ax(2) {
                for &(y, wy) in ax(1) {
                    for &(x, wx) in ax(0) {
                        *acc.entry([z, y, x]).or_insert(0.0) += wz * wy * wx;
                    }
                }
            }
        }
        let scale = acc.values().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut table = PredictionTable::default();
        for ([z, y, x], w) in acc {
            if w != 0.0 && w.abs() > 1e-15 * scale {
                table.shifts.push([x, y, z]);
                table.weights.push(w);
            }
        }
        Ok(table)
    }

    /// Table for side `side` of velocity `η` at level gap `gap`.
    pub fn table(&mut self, gap: u32, eta: &Index, side: Side) -> Result<PredictionTable, MrError> {
        let (e, a) = ea_boxes(gap, eta, self.dim);
        match side {
            Side::Incoming => self.boxes_table(gap, &e),
            Side::Outgoing => self.boxes_table(gap, &a),
        }
    }
}

/// Flattened reconstruction table for one `(gap, η, side)`.
pub fn prediction_table(
    pred: &Prediction,
    gap: u32,
    eta: &Index,
    side: Side,
) -> Result<PredictionTable, MrError> {
    TableBuilder::new(pred).table(gap, eta, side)
}
