//! Linear algebra over the two-element field.
//!
//! Vectors are bitsets. Matrices are stored column-major. Reduction uses the
//! lowest-one convention: the pivot of a column is its largest set index.

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

/// Vector over Z/2.
pub type Vec2 = FixedBitSet;

pub fn zero(n: usize) -> Vec2 {
    FixedBitSet::with_capacity(n)
}

pub fn unit(n: usize, i: usize) -> Vec2 {
    let mut v = zero(n);
    v.insert(i);
    v
}

/// `a += b`, growing `a` if needed.
pub fn add_assign(a: &mut Vec2, b: &Vec2) {
    if a.len() < b.len() {
        a.grow(b.len());
    }
    a.symmetric_difference_with(b);
}

pub fn low(v: &Vec2) -> Option<usize> {
    v.maximum()
}

/// Dense column-major matrix over Z/2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat2 {
    pub rows: usize,
    pub cols: Vec<Vec2>,
}

impl Serialize for Mat2 {
    /// Serialized row-major as nested 0/1 arrays.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = (0..self.rows)
            .map(|r| self.cols.iter().map(|c| c.contains(r) as u8).collect())
            .collect();
        rows.serialize(s)
    }
}

impl Mat2 {
    pub fn zeros(rows: usize, ncols: usize) -> Mat2 {
        Mat2 { rows, cols: (0..ncols).map(|_| zero(rows)).collect() }
    }

    pub fn identity(n: usize) -> Mat2 {
        Mat2 { rows: n, cols: (0..n).map(|i| unit(n, i)).collect() }
    }

    pub fn from_rows(rows: &[Vec<u8>], ncols: usize) -> Mat2 {
        let mut m = Mat2::zeros(rows.len(), ncols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if x & 1 == 1 {
                    m.cols[c].insert(r);
                }
            }
        }
        m
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cols[c].contains(r)
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_clear())
    }

    /// `self * v` where `v` indexes columns.
    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let mut out = zero(self.rows);
        for j in v.ones() {
            add_assign(&mut out, &self.cols[j]);
        }
        out
    }

    /// `self * other`.
    pub fn mul(&self, other: &Mat2) -> Mat2 {
        assert_eq!(self.ncols(), other.rows, "dimension mismatch in product");
        Mat2 { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn rank(&self) -> usize {
        let mut r = Reducer::new();
        self.cols.iter().filter(|c| r.insert((*c).clone())).count()
    }

    /// Basis of the null space, as vectors over the columns.
    pub fn kernel(&self) -> Vec<Vec2> {
        let n = self.ncols();
        let mut r = Reducer::new();
        let mut ker = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            let (res, combo) = r.reduce_tracked(c.clone(), unit(n, j));
            if res.is_clear() {
                ker.push(combo);
            } else {
                r.push(res, combo);
            }
        }
        ker
    }

    /// Columns selected by `idx`.
    pub fn select_cols(&self, idx: &[usize]) -> Mat2 {
        Mat2 { rows: self.rows, cols: idx.iter().map(|&j| self.cols[j].clone()).collect() }
    }

    /// Rows selected by `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Mat2 {
        let mut m = Mat2::zeros(idx.len(), self.ncols());
        for (c, col) in self.cols.iter().enumerate() {
            for (r, &i) in idx.iter().enumerate() {
                if col.contains(i) {
                    m.cols[c].insert(r);
                }
            }
        }
        m
    }

    pub fn hcat(&self, other: &Mat2) -> Mat2 {
        assert_eq!(self.rows, other.rows);
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        Mat2 { rows: self.rows, cols }
    }
}

/// Incremental echelon basis with optional combination tracking.
///
/// Invariant: stored vectors have pairwise distinct pivots, and each stored
/// `combo` records which tagged inputs sum to the stored vector.
#[derive(Clone, Debug, Default)]
pub struct Reducer {
    vecs: Vec<Vec2>,
    combos: Vec<Vec2>,
    pivot_of: std::collections::HashMap<usize, usize>,
}

impl Reducer {
    pub fn new() -> Reducer {
        Reducer::default()
    }

    pub fn len(&self) -> usize {
        self.vecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vecs.is_empty()
    }

    /// Reduces `v` until its pivot is free or it vanishes.
    pub fn reduce(&self, mut v: Vec2) -> Vec2 {
        while let Some(p) = low(&v) {
            match self.pivot_of.get(&p) {
                Some(&k) => add_assign(&mut v, &self.vecs[k]),
                None => break,
            }
        }
        v
    }

    /// Like `reduce`, also accumulating the combinations of the used vectors into `combo`.
    pub fn reduce_tracked(&self, mut v: Vec2, mut combo: Vec2) -> (Vec2, Vec2) {
        while let Some(p) = low(&v) {
            match self.pivot_of.get(&p) {
                Some(&k) => {
                    add_assign(&mut v, &self.vecs[k]);
                    add_assign(&mut combo, &self.combos[k]);
                }
                None => break,
            }
        }
        (v, combo)
    }

    /// Stores an already reduced nonzero vector.
    pub fn push(&mut self, v: Vec2, combo: Vec2) {
        let p = low(&v).expect("pushed vector must be nonzero");
        debug_assert!(!self.pivot_of.contains_key(&p));
        self.pivot_of.insert(p, self.vecs.len());
        self.vecs.push(v);
        self.combos.push(combo);
    }

    /// Inserts `v`; returns whether it was independent of the stored span.
    pub fn insert(&mut self, v: Vec2) -> bool {
        let r = self.reduce(v);
        if r.is_clear() {
            false
        } else {
            self.push(r, zero(0));
            true
        }
    }

    pub fn contains(&self, v: &Vec2) -> bool {
        self.reduce(v.clone()).is_clear()
    }
}

/// Rank of a list of vectors.
pub fn rank_of(vs: &[Vec2]) -> usize {
    let mut r = Reducer::new();
    vs.iter().filter(|v| r.insert((*v).clone())).count()
}

/// True iff the two lists span the same subspace.
pub fn same_span(a: &[Vec2], b: &[Vec2]) -> bool {
    let ra = rank_of(a);
    ra == rank_of(b) && {
        let mut all = a.to_vec();
        all.extend_from_slice(b);
        rank_of(&all) == ra
    }
}
