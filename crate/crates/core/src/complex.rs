//! Finite simplicial complexes viewed as finite T0 spaces.
//!
//! Cells are stored in `(dim, id)` order and addressed by their position in that
//! order. The face relation `x <= y` holds iff `x` lies in the closure of `y`;
//! closed sets are down sets and open sets are up sets.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a cell in the `(dim, id)` order of its complex.
pub type CellIdx = usize;

/// One cell with its codimension-1 neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub dim: usize,
    pub facets: Vec<CellIdx>,
    pub cofacets: Vec<CellIdx>,
}

/// External description of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSpec {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub facets: Vec<String>,
}

/// External description of a complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub cells: Vec<CellSpec>,
}

/// Subset of the cells of one complex.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    bits: FixedBitSet,
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl CellSet {
    pub fn empty(n: usize) -> Self {
        CellSet { bits: FixedBitSet::with_capacity(n) }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        CellSet { bits }
    }

    pub fn from_indices(n: usize, it: impl IntoIterator<Item = CellIdx>) -> Self {
        let mut s = Self::empty(n);
        for i in it {
            s.insert(i);
        }
        s
    }

    /// Size of the universe (number of cells of the complex).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: CellIdx) -> bool {
        self.bits.contains(i)
    }

    pub fn insert(&mut self, i: CellIdx) {
        self.bits.insert(i)
    }

    pub fn remove(&mut self, i: CellIdx) {
        self.bits.set(i, false)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing `(dim, id)` order.
    pub fn iter(&self) -> impl Iterator<Item = CellIdx> + '_ {
        self.bits.ones()
    }

    pub fn first(&self) -> Option<CellIdx> {
        self.bits.minimum()
    }

    pub fn union(&self, o: &CellSet) -> CellSet {
        let mut bits = self.bits.clone();
        bits.union_with(&o.bits);
        CellSet { bits }
    }

    pub fn intersection(&self, o: &CellSet) -> CellSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&o.bits);
        CellSet { bits }
    }

    pub fn difference(&self, o: &CellSet) -> CellSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&o.bits);
        CellSet { bits }
    }

    pub fn union_with(&mut self, o: &CellSet) {
        self.bits.union_with(&o.bits)
    }

    pub fn intersect_with(&mut self, o: &CellSet) {
        self.bits.intersect_with(&o.bits)
    }

    pub fn difference_with(&mut self, o: &CellSet) {
        self.bits.difference_with(&o.bits)
    }

    pub fn is_subset(&self, o: &CellSet) -> bool {
        self.bits.is_subset(&o.bits)
    }

    pub fn is_disjoint(&self, o: &CellSet) -> bool {
        self.bits.is_disjoint(&o.bits)
    }
}

/// Which topological operator `Complex::topology_query` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Closure,
    Opening,
    Mouth,
}

/// Which predicate `Complex::set_predicate` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    Closed,
    Open,
    LocallyClosed,
}

/// Validated simplicial complex. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    cells: Vec<Cell>,
    index: HashMap<String, CellIdx>,
    /// `faces[x]` = closure of `{x}`, sorted, including `x`.
    faces: Vec<Vec<CellIdx>>,
    /// `cofaces[x]` = opening of `{x}`, sorted, including `x`.
    cofaces: Vec<Vec<CellIdx>>,
    max_dim: usize,
}

impl Complex {
    /// Validates cell descriptions and derives the face poset.
    pub fn build(specs: &[CellSpec]) -> Result<Complex> {
        let mut order: Vec<&CellSpec> = specs.iter().collect();
        order.sort_by(|a, b| (a.dim, &a.id).cmp(&(b.dim, &b.id)));
        let mut index = HashMap::with_capacity(order.len());
        for (i, s) in order.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::DuplicateCell(s.id.clone()));
            }
        }
        let n = order.len();
        let mut cells: Vec<Cell> = Vec::with_capacity(n);
        for s in &order {
            let mut facets = Vec::with_capacity(s.facets.len());
            for f in &s.facets {
                let &fi = index.get(f).ok_or_else(|| Error::DanglingFacet {
                    cell: s.id.clone(),
                    facet: f.clone(),
                })?;
                if order[fi].dim + 1 != s.dim {
                    return Err(Error::WrongFacetDim { cell: s.id.clone(), facet: f.clone() });
                }
                facets.push(fi);
            }
            facets.sort_unstable();
            facets.dedup();
            let expected = if s.dim == 0 { 0 } else { s.dim + 1 };
            if facets.len() != expected || s.facets.len() != expected {
                return Err(Error::WrongFacetCount {
                    cell: s.id.clone(),
                    dim: s.dim,
                    count: s.facets.len(),
                    expected,
                });
            }
            cells.push(Cell { id: s.id.clone(), dim: s.dim, facets, cofacets: Vec::new() });
        }
        for i in 0..n {
            for k in 0..cells[i].facets.len() {
                let f = cells[i].facets[k];
                cells[f].cofacets.push(i);
            }
        }
        // Facets precede their cofaces in (dim, id) order, so one pass suffices.
        let mut faces: Vec<Vec<CellIdx>> = Vec::with_capacity(n);
        for (i, c) in cells.iter().enumerate() {
            let mut fs = vec![i];
            for &f in &c.facets {
                fs.extend_from_slice(&faces[f]);
            }
            fs.sort_unstable();
            fs.dedup();
            faces.push(fs);
        }
        let mut cofaces: Vec<Vec<CellIdx>> = (0..n).map(|_| Vec::new()).collect();
        for (i, fs) in faces.iter().enumerate() {
            for &f in fs {
                cofaces[f].push(i);
            }
        }
        for (i, fs) in faces.iter().enumerate() {
            for &f in fs {
                if f != i && faces[f].binary_search(&i).is_ok() {
                    return Err(Error::NotAntisymmetric(cells[i].id.clone(), cells[f].id.clone()));
                }
            }
        }
        let max_dim = cells.iter().map(|c| c.dim).max().unwrap_or(0);
        Ok(Complex { cells, index, faces, cofaces, max_dim })
    }

    pub fn from_spec(spec: &ComplexSpec) -> Result<Complex> {
        Self::build(&spec.cells)
    }

    /// Round-trips the complex to its external description.
    pub fn to_spec(&self) -> ComplexSpec {
        ComplexSpec {
            cells: self
                .cells
                .iter()
                .map(|c| CellSpec {
                    id: c.id.clone(),
                    dim: c.dim,
                    facets: c.facets.iter().map(|&f| self.cells[f].id.clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn cell(&self, i: CellIdx) -> &Cell {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn id(&self, i: CellIdx) -> &str {
        &self.cells[i].id
    }

    pub fn dim(&self, i: CellIdx) -> usize {
        self.cells[i].dim
    }

    pub fn lookup(&self, id: &str) -> Result<CellIdx> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownCell(id.to_string()))
    }

    /// Closure of a single cell, including the cell.
    pub fn faces_of(&self, i: CellIdx) -> &[CellIdx] {
        &self.faces[i]
    }

    /// Opening of a single cell, including the cell.
    pub fn cofaces_of(&self, i: CellIdx) -> &[CellIdx] {
        &self.cofaces[i]
    }

    /// `x <= y` in the face poset.
    pub fn le(&self, x: CellIdx, y: CellIdx) -> bool {
        self.faces[y].binary_search(&x).is_ok()
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet::empty(self.len())
    }

    pub fn full_set(&self) -> CellSet {
        CellSet::full(self.len())
    }

    pub fn set_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<CellSet> {
        let mut s = self.empty_set();
        for id in ids {
            s.insert(self.lookup(id.as_ref())?);
        }
        Ok(s)
    }

    /// Labels of the members in `(dim, id)` order.
    pub fn ids(&self, s: &CellSet) -> Vec<String> {
        s.iter().map(|i| self.cells[i].id.clone()).collect()
    }

    pub fn check_member(&self, s: &CellSet) -> Result<()> {
        if s.universe() != self.len() {
            return Err(Error::UnknownCell(format!(
                "set over {} cells used with a complex of {} cells",
                s.universe(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn closure(&self, a: &CellSet) -> CellSet {
        let mut out = self.empty_set();
        for x in a.iter() {
            if !out.contains(x) {
                for &f in &self.faces[x] {
                    out.insert(f);
                }
            }
        }
        out
    }

    pub fn opening(&self, a: &CellSet) -> CellSet {
        let mut out = self.empty_set();
        for x in a.iter() {
            if !out.contains(x) {
                for &f in &self.cofaces[x] {
                    out.insert(f);
                }
            }
        }
        out
    }

    pub fn mouth(&self, a: &CellSet) -> CellSet {
        self.closure(a).difference(a)
    }

    pub fn is_closed(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.cells[x].facets.iter().all(|&f| a.contains(f)))
    }

    pub fn is_open(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.cells[x].cofacets.iter().all(|&f| a.contains(f)))
    }

    /// True iff the mouth is closed.
    pub fn is_locally_closed(&self, a: &CellSet) -> bool {
        self.is_closed(&self.mouth(a))
    }

    pub fn topology_query(&self, a: &CellSet, kind: TopologyKind) -> Result<CellSet> {
        self.check_member(a)?;
        Ok(match kind {
            TopologyKind::Closure => self.closure(a),
            TopologyKind::Opening => self.opening(a),
            TopologyKind::Mouth => self.mouth(a),
        })
    }

    pub fn set_predicate(&self, a: &CellSet, kind: PredicateKind) -> Result<bool> {
        self.check_member(a)?;
        Ok(match kind {
            PredicateKind::Closed => self.is_closed(a),
            PredicateKind::Open => self.is_open(a),
            PredicateKind::LocallyClosed => self.is_locally_closed(a),
        })
    }

    /// Cells of dimension `d` inside `s`, in order.
    pub fn cells_of_dim<'a>(&'a self, s: &'a CellSet, d: usize) -> impl Iterator<Item = CellIdx> + 'a {
        s.iter().filter(move |&x| self.cells[x].dim == d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str, dim: usize, facets: &[&str]) -> CellSpec {
        CellSpec { id: id.into(), dim, facets: facets.iter().map(|s| s.to_string()).collect() }
    }

    pub(crate) fn triangle() -> Complex {
        Complex::build(&[
            spec("a", 0, &[]),
            spec("b", 0, &[]),
            spec("c", 0, &[]),
            spec("ab", 1, &["a", "b"]),
            spec("ac", 1, &["a", "c"]),
            spec("bc", 1, &["b", "c"]),
            spec("abc", 2, &["ab", "ac", "bc"]),
        ])
        .unwrap()
    }

    fn set(c: &Complex, ids: &[&str]) -> CellSet {
        c.set_from_ids(ids).unwrap()
    }

    #[test]
    fn triangle_poset() {
        let c = triangle();
        assert_eq!(c.len(), 7);
        let top = c.lookup("abc").unwrap();
        for x in 0..7 {
            assert!(c.le(x, top));
        }
        assert!(!c.le(top, c.lookup("a").unwrap()));
    }

    #[test]
    fn queries_on_triangle() {
        let c = triangle();
        assert_eq!(c.closure(&set(&c, &["ab"])), set(&c, &["a", "b", "ab"]));
        assert_eq!(c.mouth(&set(&c, &["abc"])), set(&c, &["a", "b", "c", "ab", "ac", "bc"]));
        assert_eq!(c.opening(&set(&c, &["a"])), set(&c, &["a", "ab", "ac", "abc"]));
        assert!(c.is_locally_closed(&set(&c, &["a", "ab"])));
        assert!(!c.is_locally_closed(&set(&c, &["a", "abc"])));
        assert!(c.is_closed(&set(&c, &["a", "b", "c", "ab", "ac", "bc"])));
        assert!(c.is_open(&set(&c, &["abc"])));
    }

    #[test]
    fn malformed_inputs() {
        let dangling = Complex::build(&[spec("a", 0, &[]), spec("ab", 1, &["a", "c"])]);
        assert!(matches!(dangling, Err(Error::DanglingFacet { .. })));
        let dup = Complex::build(&[spec("a", 0, &[]), spec("a", 0, &[])]);
        assert!(matches!(dup, Err(Error::DuplicateCell(_))));
        let wrong = Complex::build(&[
            spec("a", 0, &[]),
            spec("b", 0, &[]),
            spec("ab", 1, &["a", "b"]),
            spec("x", 1, &["ab", "a"]),
        ]);
        assert!(matches!(wrong, Err(Error::WrongFacetDim { .. })));
        let count = Complex::build(&[spec("a", 0, &[]), spec("ab", 1, &["a"])]);
        assert!(matches!(count, Err(Error::WrongFacetCount { .. })));
    }

    #[test]
    fn spec_round_trip() {
        let c = triangle();
        assert_eq!(Complex::from_spec(&c.to_spec()).unwrap(), c);
    }
}
