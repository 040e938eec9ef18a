//! Z/2 homology of pairs of closed sets.
//!
//! Chains are bit vectors over a universe of cell indices. A `ChainSpace` names
//! the basis cells per degree and their boundaries; the relative space of a
//! pair `(P, E)` uses the cells of `P \ E` with boundaries reduced mod `E`,
//! and the coned space adjoins an apex over `E`.

use serde::Serialize;

use crate::complex::{CellIdx, CellSet, CellSpec, Complex};
use crate::error::{Error, Result};
use crate::linalg::{unit, zero, Mat2, Reducer, Vec2};

/// Basis cells per degree with a boundary operator, over a fixed universe.
pub trait ChainSpace {
    fn universe(&self) -> usize;
    fn basis(&self, d: usize) -> Vec<usize>;
    fn boundary(&self, cell: usize) -> Vec2;
    /// Cycles treated as boundaries in degree `d` (used to quotient out the cone apex).
    fn extra_boundaries(&self, _d: usize) -> Vec<Vec2> {
        Vec::new()
    }
}

/// The quotient chain complex `C(P) / C(E)`.
pub struct RelativeSpace<'a> {
    pub complex: &'a Complex,
    pub diff: CellSet,
}

impl<'a> RelativeSpace<'a> {
    pub fn new(complex: &'a Complex, p: &CellSet, e: &CellSet) -> Self {
        RelativeSpace { complex, diff: p.difference(e) }
    }
}

impl ChainSpace for RelativeSpace<'_> {
    fn universe(&self) -> usize {
        self.complex.len()
    }
    fn basis(&self, d: usize) -> Vec<usize> {
        self.complex.cells_of_dim(&self.diff, d).collect()
    }
    fn boundary(&self, cell: usize) -> Vec2 {
        let mut v = zero(self.universe());
        for &f in &self.complex.cell(cell).facets {
            if self.diff.contains(f) {
                v.insert(f);
            }
        }
        v
    }
}

/// The cone `P ∪ ω·E` with apex `ω`, indexed as: cells of the complex in
/// `[0, n)`, the apex at `n`, and `ω·σ` at `n + 1 + σ`.
pub struct ConedSpace<'a> {
    pub complex: &'a Complex,
    pub p: CellSet,
    pub e: CellSet,
    /// Quotient out the apex class in degree 0.
    pub reduced: bool,
}

impl ConedSpace<'_> {
    pub fn apex(&self) -> usize {
        self.complex.len()
    }
    pub fn coned(&self, sigma: CellIdx) -> usize {
        self.complex.len() + 1 + sigma
    }
}

impl ChainSpace for ConedSpace<'_> {
    fn universe(&self) -> usize {
        2 * self.complex.len() + 1
    }
    fn basis(&self, d: usize) -> Vec<usize> {
        let mut b: Vec<usize> = self.complex.cells_of_dim(&self.p, d).collect();
        if d == 0 {
            b.push(self.apex());
        } else {
            b.extend(self.complex.cells_of_dim(&self.e, d - 1).map(|s| self.coned(s)));
        }
        b
    }
    fn boundary(&self, cell: usize) -> Vec2 {
        let n = self.complex.len();
        let mut v = zero(self.universe());
        if cell < n {
            for &f in &self.complex.cell(cell).facets {
                v.insert(f);
            }
        } else if cell > n {
            let s = cell - n - 1;
            v.insert(s);
            let facets = &self.complex.cell(s).facets;
            if facets.is_empty() {
                v.insert(self.apex());
            }
            for &f in facets {
                v.insert(self.coned(f));
            }
        }
        v
    }
    fn extra_boundaries(&self, d: usize) -> Vec<Vec2> {
        if self.reduced && d == 0 {
            vec![unit(self.universe(), self.apex())]
        } else {
            Vec::new()
        }
    }
}

/// Homology of a chain space in one degree, with a coordinate function.
///
/// Invariants: `∂ chains[i] = boundaries[i]`; `reps` are cycles independent
/// modulo boundaries; every cycle is a boundary plus a unique combination of reps.
#[derive(Clone, Debug)]
pub struct Frame {
    pub degree: usize,
    pub boundaries: Vec<Vec2>,
    pub chains: Vec<Vec2>,
    pub reps: Vec<Vec2>,
    reducer: Reducer,
}

impl Frame {
    pub fn compute(space: &dyn ChainSpace, d: usize) -> Frame {
        let u = space.universe();
        let mut bred = Reducer::new();
        let mut boundaries = Vec::new();
        let mut chains = Vec::new();
        for tau in space.basis(d + 1) {
            let (res, combo) = bred.reduce_tracked(space.boundary(tau), unit(u, tau));
            if !res.is_clear() {
                boundaries.push(res.clone());
                chains.push(combo.clone());
                bred.push(res, combo);
            }
        }
        let mut zred = Reducer::new();
        let mut cycles = Vec::new();
        for sigma in space.basis(d) {
            let (res, combo) = zred.reduce_tracked(space.boundary(sigma), unit(u, sigma));
            if res.is_clear() {
                cycles.push(combo);
            } else {
                zred.push(res, combo);
            }
        }
        let mut reducer = Reducer::new();
        for b in &boundaries {
            reducer.push(reducer.reduce(b.clone()), zero(0));
        }
        for extra in space.extra_boundaries(d) {
            let res = reducer.reduce(extra);
            if !res.is_clear() {
                reducer.push(res, zero(0));
            }
        }
        let mut reps = Vec::new();
        for z in cycles {
            let (res, combo) = reducer.reduce_tracked(z.clone(), unit(reps.len() + 1, reps.len()));
            if !res.is_clear() {
                reducer.push(res, combo);
                reps.push(z);
            }
        }
        Frame { degree: d, boundaries, chains, reps, reducer }
    }

    pub fn rank(&self) -> usize {
        self.reps.len()
    }

    /// Coordinates of the class of cycle `z` in the basis `reps`.
    pub fn coords(&self, z: &Vec2) -> Result<Vec2> {
        let (res, mut combo) = self.reducer.reduce_tracked(z.clone(), zero(self.rank()));
        if !res.is_clear() {
            return Err(Error::Internal("vector is not a cycle of this chain space".into()));
        }
        combo.grow(self.rank());
        Ok(combo)
    }

    /// True iff `z` is a boundary (or apex multiple) in this space.
    pub fn is_trivial(&self, z: &Vec2) -> Result<bool> {
        Ok(self.coords(z)?.is_clear())
    }
}

/// Homology frames of a chain space in degrees `0..=max_deg`.
pub fn frames(space: &dyn ChainSpace, max_deg: usize) -> Vec<Frame> {
    (0..=max_deg).map(|d| Frame::compute(space, d)).collect()
}

/// Ranks and representative cycles of `H(P, E)`.
#[derive(Clone, Debug, Serialize)]
pub struct RelHomology {
    pub ranks: Vec<usize>,
    #[serde(skip)]
    pub frames: Vec<Frame>,
}

impl RelHomology {
    pub fn representatives(&self, d: usize) -> &[Vec2] {
        self.frames.get(d).map(|f| f.reps.as_slice()).unwrap_or(&[])
    }
    pub fn rank(&self, d: usize) -> usize {
        self.ranks.get(d).copied().unwrap_or(0)
    }
}

fn check_pair(c: &Complex, p: &CellSet, e: &CellSet) -> Result<()> {
    c.check_member(p)?;
    c.check_member(e)?;
    if !c.is_closed(p) {
        return Err(Error::NotClosed("P".into()));
    }
    if !c.is_closed(e) {
        return Err(Error::NotClosed("E".into()));
    }
    if !e.is_subset(p) {
        return Err(Error::NotSubset("E is not contained in P".into()));
    }
    Ok(())
}

/// Relative homology over Z/2 in degrees `0..=dim X`.
pub fn relative_homology(c: &Complex, p: &CellSet, e: &CellSet) -> Result<RelHomology> {
    check_pair(c, p, e)?;
    Ok(relative_homology_unchecked(c, p, e))
}

/// `relative_homology` without the closedness checks; the caller guarantees a valid pair.
pub(crate) fn relative_homology_unchecked(c: &Complex, p: &CellSet, e: &CellSet) -> RelHomology {
    let space = RelativeSpace::new(c, p, e);
    let frames = frames(&space, c.max_dim());
    RelHomology { ranks: frames.iter().map(Frame::rank).collect(), frames }
}

/// Ranks of `H(P, E)` without validating the pair.
pub fn relative_ranks(c: &Complex, p: &CellSet, e: &CellSet) -> Vec<usize> {
    relative_homology_unchecked(c, p, e).ranks
}

/// Maps a relative chain of `(P, E)` to `(P', E')` with `P ⊆ P'`, `E ⊆ E'`.
pub fn restrict_chain(z: &Vec2, outer_diff: &CellSet) -> Vec2 {
    let mut out = z.clone();
    let mut mask = zero(z.len());
    for i in outer_diff.iter().filter(|&i| i < z.len()) {
        mask.insert(i);
    }
    out.intersect_with(&mask);
    out
}

/// Per-degree matrices of `H(P, E) -> H(P', E')` in the representative bases.
pub fn pair_map(c: &Complex, inner: (&CellSet, &CellSet), outer: (&CellSet, &CellSet)) -> Result<Vec<Mat2>> {
    check_pair(c, inner.0, inner.1)?;
    check_pair(c, outer.0, outer.1)?;
    if !inner.0.is_subset(outer.0) || !inner.1.is_subset(outer.1) {
        return Err(Error::NotSubset("inner pair is not contained in outer pair".into()));
    }
    let hi = relative_homology_unchecked(c, inner.0, inner.1);
    let ho = relative_homology_unchecked(c, outer.0, outer.1);
    pair_map_between(&hi, &ho, &outer.0.difference(outer.1))
}

pub(crate) fn pair_map_between(hi: &RelHomology, ho: &RelHomology, outer_diff: &CellSet) -> Result<Vec<Mat2>> {
    hi.frames
        .iter()
        .zip(&ho.frames)
        .map(|(fi, fo)| {
            let cols = fi
                .reps
                .iter()
                .map(|z| fo.coords(&restrict_chain(z, outer_diff)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Mat2 { rows: fo.rank(), cols })
        })
        .collect()
}

/// Connecting map `H_d(N2, N1) -> H_{d-1}(N1, N0)` of the triple.
pub fn les_connecting(c: &Complex, n0: &CellSet, n1: &CellSet, n2: &CellSet, d: usize) -> Result<Mat2> {
    check_pair(c, n1, n0)?;
    check_pair(c, n2, n1)?;
    let top = relative_homology_unchecked(c, n2, n1);
    let bottom = relative_homology_unchecked(c, n1, n0);
    connecting_between(c, &top, &bottom, &n1.difference(n0), d)
}

pub(crate) fn connecting_between(
    c: &Complex,
    top: &RelHomology,
    bottom: &RelHomology,
    bottom_diff: &CellSet,
    d: usize,
) -> Result<Mat2> {
    if d == 0 || d >= top.frames.len() {
        return Ok(Mat2::zeros(bottom.rank(d.wrapping_sub(1)), top.rank(d)));
    }
    let fb = &bottom.frames[d - 1];
    let cols = top.frames[d]
        .reps
        .iter()
        .map(|z| {
            let mut bd = zero(c.len());
            for s in z.ones() {
                for &f in &c.cell(s).facets {
                    bd.toggle(f);
                }
            }
            fb.coords(&restrict_chain(&bd, bottom_diff))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat2 { rows: fb.rank(), cols })
}

/// Ranks of `H(P, E)` computed through the cone, with the apex class removed.
pub fn coned_ranks(c: &Complex, p: &CellSet, e: &CellSet) -> Vec<usize> {
    let space = ConedSpace { complex: c, p: p.clone(), e: e.clone(), reduced: true };
    frames(&space, c.max_dim()).iter().map(Frame::rank).collect()
}

/// Label of the cone apex: `ω#`, extended with `#` until it collides with nothing.
fn apex_label(c: &Complex) -> String {
    let mut label = "ω#".to_string();
    while c.cells().iter().any(|x| x.id == label || x.id.starts_with(&format!("{label}."))) {
        label.push('#');
    }
    label
}

/// The cone over `E` inside `P` as a standalone simplicial complex.
///
/// Its absolute homology equals `H(P, E)` plus one extra class in degree 0.
pub fn cone_pair(c: &Complex, p: &CellSet, e: &CellSet) -> Result<(Complex, String)> {
    check_pair(c, p, e)?;
    let apex = apex_label(c);
    let coned = |s: CellIdx| format!("{apex}.{}", c.id(s));
    let mut specs: Vec<CellSpec> = p
        .iter()
        .map(|s| CellSpec {
            id: c.id(s).to_string(),
            dim: c.dim(s),
            facets: c.cell(s).facets.iter().map(|&f| c.id(f).to_string()).collect(),
        })
        .collect();
    specs.push(CellSpec { id: apex.clone(), dim: 0, facets: Vec::new() });
    for s in e.iter() {
        let mut facets = vec![c.id(s).to_string()];
        if c.dim(s) == 0 {
            facets.push(apex.clone());
        } else {
            facets.extend(c.cell(s).facets.iter().map(|&f| coned(f)));
        }
        specs.push(CellSpec { id: coned(s), dim: c.dim(s) + 1, facets });
    }
    Ok((Complex::build(&specs)?, apex))
}

/// Boundary matrices of a complex, one per degree (columns: `d`-cells, rows: `(d-1)`-cells).
#[derive(Clone, Debug)]
pub struct ChainComplexZ2 {
    pub basis: Vec<Vec<CellIdx>>,
    pub boundary: Vec<Mat2>,
}

impl ChainComplexZ2 {
    pub fn of(c: &Complex) -> ChainComplexZ2 {
        let top = if c.is_empty() { 0 } else { c.max_dim() + 1 };
        let basis: Vec<Vec<CellIdx>> =
            (0..top).map(|d| (0..c.len()).filter(|&i| c.dim(i) == d).collect()).collect();
        let boundary = (0..top)
            .map(|d| {
                let rows = if d == 0 { &[][..] } else { &basis[d - 1][..] };
                let mut m = Mat2::zeros(rows.len(), basis[d].len());
                for (j, &s) in basis[d].iter().enumerate() {
                    for &f in &c.cell(s).facets {
                        let r = rows.binary_search(&f).expect("facet has dimension d-1");
                        m.cols[j].insert(r);
                    }
                }
                m
            })
            .collect();
        ChainComplexZ2 { basis, boundary }
    }

    /// Checks `∂∂ = 0` in every degree.
    pub fn is_chain_complex(&self) -> bool {
        (1..self.boundary.len()).all(|d| self.boundary[d - 1].mul(&self.boundary[d]).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn triangle_and_sphere() {
        let c = fixtures::triangle();
        assert_eq!(relative_homology(&c, &c.full_set(), &c.empty_set()).unwrap().ranks, vec![1, 0, 0]);
        let o = fixtures::octahedron_complex();
        assert_eq!(relative_homology(&o, &o.full_set(), &o.empty_set()).unwrap().ranks, vec![1, 0, 1]);
    }

    #[test]
    fn edge_relative_to_endpoints() {
        let c = fixtures::triangle();
        let p = c.set_from_ids(&["a", "b", "ab"]).unwrap();
        let e = c.set_from_ids(&["a", "b"]).unwrap();
        assert_eq!(relative_homology(&c, &p, &e).unwrap().ranks, vec![0, 1, 0]);
        let (cone, _) = cone_pair(&c, &p, &e).unwrap();
        let abs = relative_homology(&cone, &cone.full_set(), &cone.empty_set()).unwrap();
        assert_eq!(abs.ranks, vec![1, 1]);
        assert_eq!(coned_ranks(&c, &p, &e), vec![0, 1, 0]);
    }

    #[test]
    fn cone_of_empty_pair_adds_isolated_apex() {
        let c = fixtures::triangle();
        let (cone, apex) = cone_pair(&c, &c.full_set(), &c.empty_set()).unwrap();
        assert_eq!(cone.len(), 8);
        assert_eq!(apex, "ω#");
        assert_eq!(relative_homology(&cone, &cone.full_set(), &cone.empty_set()).unwrap().ranks, vec![2, 0, 0]);
    }

    #[test]
    fn boundary_squares_to_zero() {
        assert!(ChainComplexZ2::of(&fixtures::octahedron_complex()).is_chain_complex());
    }

    #[test]
    fn identity_pair_map() {
        let o = fixtures::octahedron_complex();
        let full = o.full_set();
        let m = pair_map(&o, (&full, &o.empty_set()), (&full, &o.empty_set())).unwrap();
        assert_eq!(m[0], Mat2::identity(1));
        assert_eq!(m[2], Mat2::identity(1));
    }

    #[test]
    fn rejects_open_pair() {
        let c = fixtures::triangle();
        let p = c.set_from_ids(&["abc"]).unwrap();
        assert!(matches!(relative_homology(&c, &p, &c.empty_set()), Err(Error::NotClosed(_))));
    }
}
