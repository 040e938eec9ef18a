//! Invariance and isolation: strongly connected components, block and Morse
//! decompositions, index pairs, Conley indices, and connecting sequences.
//!
//! Orientation convention: for block indices `p < q` means `q` flows into `p`.
//! Attractors are minimal.

use fixedbitset::FixedBitSet;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::complex::{CellIdx, CellSet, Complex};
use crate::error::{Error, Result};
use crate::homology::relative_ranks;
use crate::mvf::{MultivectorField, Refinement};

/// Forward-reachable set of `a` inside `region` (includes `a ∩ region`).
pub fn push_forward(v: &MultivectorField, a: &CellSet, region: &CellSet) -> CellSet {
    reach(a, region, |x, out| out.extend(v.successors(x)))
}

/// Backward-reachable set of `a` inside `region`.
pub fn pull_back(v: &MultivectorField, a: &CellSet, region: &CellSet) -> CellSet {
    reach(a, region, |x, out| out.extend(v.predecessors(x)))
}

fn reach(a: &CellSet, region: &CellSet, step: impl Fn(CellIdx, &mut Vec<CellIdx>)) -> CellSet {
    let mut seen = a.intersection(region);
    let mut stack: Vec<CellIdx> = seen.iter().collect();
    let mut buf = Vec::new();
    while let Some(x) = stack.pop() {
        buf.clear();
        step(x, &mut buf);
        for &y in &buf {
            if region.contains(y) && !seen.contains(y) {
                seen.insert(y);
                stack.push(y);
            }
        }
    }
    seen
}

/// Cells on paths inside `region` that start and end in members of `family`.
pub fn connection_set(v: &MultivectorField, family: &[CellSet], region: &CellSet) -> CellSet {
    let mut all = CellSet::empty(v.complex().len());
    for f in family {
        all.union_with(f);
    }
    push_forward(v, &all, region).intersection(&pull_back(v, &all, region))
}

/// Strongly connected components of the flow digraph restricted to a set.
#[derive(Debug, Clone)]
pub struct Sccs {
    /// Components ordered by minimal cell.
    pub comps: Vec<CellSet>,
    /// Component of each cell, `usize::MAX` outside the region.
    pub comp_of: Vec<usize>,
    /// Whether each component carries essential solutions.
    pub invariant: Vec<bool>,
    /// `reach[i]` = components reachable from `i` by a nonempty path through other components, excluding `i`.
    pub reach: Vec<FixedBitSet>,
}

impl Sccs {
    pub fn compute(v: &MultivectorField, region: &CellSet) -> Result<Sccs> {
        let c = v.complex();
        let cells: Vec<CellIdx> = region.iter().collect();
        let mut node_of = vec![usize::MAX; c.len()];
        for (i, &x) in cells.iter().enumerate() {
            node_of[x] = i;
        }
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(cells.len(), cells.len() * 4);
        for _ in &cells {
            g.add_node(());
        }
        for (i, &x) in cells.iter().enumerate() {
            for &y in c.faces_of(x) {
                if y != x && node_of[y] != usize::MAX {
                    g.add_edge(NodeIndex::new(i), NodeIndex::new(node_of[y]), ());
                }
            }
        }
        // A directed cycle through the members inside the region has the same
        // reachability as the complete digraph on them.
        for m in 0..v.len() {
            let inside: Vec<usize> =
                v.members(m).iter().filter(|&&y| node_of[y] != usize::MAX).map(|&y| node_of[y]).collect();
            if inside.len() > 1 {
                for k in 0..inside.len() {
                    let next = inside[(k + 1) % inside.len()];
                    g.add_edge(NodeIndex::new(inside[k]), NodeIndex::new(next), ());
                }
            }
        }
        // Tarjan emits components in reverse topological order.
        let raw = petgraph::algo::tarjan_scc(&g);
        let mut comp_sets: Vec<CellSet> = raw
            .iter()
            .map(|comp| CellSet::from_indices(c.len(), comp.iter().map(|n| cells[n.index()])))
            .collect();
        let mut order: Vec<usize> = (0..comp_sets.len()).collect();
        order.sort_by_key(|&i| comp_sets[i].first());
        let mut rank = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        let mut comp_of = vec![usize::MAX; c.len()];
        for (old, s) in comp_sets.iter().enumerate() {
            for x in s.iter() {
                comp_of[x] = rank[old];
            }
        }
        let k = comp_sets.len();
        let mut reach: Vec<FixedBitSet> = (0..k).map(|_| FixedBitSet::with_capacity(k)).collect();
        for old in 0..k {
            let me = rank[old];
            let mut acc = FixedBitSet::with_capacity(k);
            for x in comp_sets[old].iter() {
                for y in v.successors(x) {
                    let t = comp_of[y];
                    if t != usize::MAX && t != me && !acc.contains(t) {
                        acc.insert(t);
                        acc.union_with(&reach[t]);
                    }
                }
            }
            reach[me] = acc;
        }
        let mut sorted = Vec::with_capacity(k);
        for &old in &order {
            sorted.push(std::mem::replace(&mut comp_sets[old], CellSet::empty(0)));
        }
        let mut invariant = Vec::with_capacity(k);
        for s in &sorted {
            let first = s.first().expect("components are nonempty");
            let m = v.multivector_of(first);
            let single = s.iter().all(|x| v.multivector_of(x) == m);
            invariant.push(!single || v.is_critical(m)?);
        }
        Ok(Sccs { comps: sorted, comp_of, invariant, reach })
    }
}

/// Invariant part of an arbitrary set, by the component rule.
pub fn invariant_part_of_set(v: &MultivectorField, a: &CellSet) -> Result<CellSet> {
    let sccs = Sccs::compute(v, a)?;
    let family: Vec<CellSet> =
        sccs.comps.iter().zip(&sccs.invariant).filter(|(_, &inv)| inv).map(|(s, _)| s.clone()).collect();
    Ok(connection_set(v, &family, a))
}

fn require_isolating(v: &MultivectorField, b: &CellSet, what: &str) -> Result<()> {
    v.complex().check_member(b)?;
    if !v.complex().is_locally_closed(b) {
        return Err(Error::NotIsolatingBlock(format!("{what} is not locally closed")));
    }
    if !v.is_v_compatible(b) {
        return Err(Error::NotIsolatingBlock(format!("{what} is not a union of multivectors")));
    }
    Ok(())
}

/// Invariant part of an isolating block.
pub fn invariant_part(v: &MultivectorField, block: &CellSet) -> Result<CellSet> {
    require_isolating(v, block, "block")?;
    invariant_part_of_set(v, block)
}

/// Brute-force membership test in the invariant part of `region`, by graph search only.
pub fn essential_exists(v: &MultivectorField, x: CellIdx, region: &CellSet) -> Result<bool> {
    if !region.contains(x) {
        return Err(Error::Precondition(format!("cell `{}` outside region", v.complex().id(x))));
    }
    Ok(essential_set(v, region)?.contains(x))
}

/// All cells of `region` lying on a path between anchors, where an anchor is a
/// cell on a closed walk through two multivectors or a cell of a critical multivector.
pub fn essential_set(v: &MultivectorField, region: &CellSet) -> Result<CellSet> {
    let n = v.complex().len();
    let cells: Vec<CellIdx> = region.iter().collect();
    let fwd: Vec<CellSet> =
        cells.iter().map(|&x| push_forward(v, &CellSet::from_indices(n, [x]), region)).collect();
    let pos = |x: CellIdx| cells.binary_search(&x).expect("cell in region");
    let mut anchors = CellSet::empty(n);
    for (i, &y) in cells.iter().enumerate() {
        let m = v.multivector_of(y);
        let crit = v.members(m).iter().all(|&z| region.contains(z)) && v.is_critical(m)?;
        let cyc = fwd[i].iter().any(|z| v.multivector_of(z) != m && fwd[pos(z)].contains(y));
        if crit || cyc {
            anchors.insert(y);
        }
    }
    let mut out = CellSet::empty(n);
    let mut from_anchor = CellSet::empty(n);
    for y in anchors.iter() {
        from_anchor.union_with(&fwd[pos(y)]);
    }
    for (i, &x) in cells.iter().enumerate() {
        if from_anchor.contains(x) && !fwd[i].is_disjoint(&anchors) {
            out.insert(x);
        }
    }
    Ok(out)
}

/// Strict partial order on block indices stored as its transitive closure and Hasse diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowOrder {
    /// `below[q]` holds every `p` with `p < q`.
    #[serde(skip)]
    pub below: Vec<FixedBitSet>,
    /// Covering pairs `(p, q)` with `p < q` and nothing strictly between.
    pub covers: Vec<(usize, usize)>,
}

impl FlowOrder {
    /// From a transitive relation given by `below`.
    pub fn from_closure(below: Vec<FixedBitSet>) -> FlowOrder {
        let k = below.len();
        let mut covers = Vec::new();
        for q in 0..k {
            for p in below[q].ones() {
                let between = below[q].ones().any(|r| r != p && below[r].contains(p));
                if !between {
                    covers.push((p, q));
                }
            }
        }
        covers.sort_unstable();
        FlowOrder { below, covers }
    }

    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    pub fn less(&self, p: usize, q: usize) -> bool {
        self.below[q].contains(p)
    }

    pub fn comparable(&self, p: usize, q: usize) -> bool {
        self.less(p, q) || self.less(q, p)
    }

    /// Restriction to the indices in `keep`, renumbered in the given order.
    pub fn restrict(&self, keep: &[usize]) -> FlowOrder {
        let below = keep
            .iter()
            .map(|&q| {
                let mut b = FixedBitSet::with_capacity(keep.len());
                for (i, &p) in keep.iter().enumerate() {
                    if self.less(p, q) {
                        b.insert(i);
                    }
                }
                b
            })
            .collect();
        FlowOrder::from_closure(below)
    }

    /// Lexicographically minimal linear extension listing lower elements first;
    /// ties go to the smaller `key`.
    pub fn lexmin_extension<K: Ord>(&self, key: impl Fn(usize) -> K) -> Vec<usize> {
        let k = self.len();
        let mut placed = FixedBitSet::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let next = (0..k)
                .filter(|&q| !placed.contains(q) && self.below[q].ones().all(|p| placed.contains(p)))
                .min_by_key(|&q| key(q))
                .expect("order is acyclic");
            placed.insert(next);
            out.push(next);
        }
        out
    }
}

/// Disjoint isolating blocks with their flow-induced order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub blocks: Vec<CellSet>,
    pub order: FlowOrder,
    pub ambient: CellSet,
    pub is_partition: bool,
}

impl BlockDecomposition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Label of block `p`: its minimal cell.
    pub fn label<'a>(&self, c: &'a Complex, p: usize) -> &'a str {
        c.id(self.blocks[p].first().expect("blocks are nonempty"))
    }

    /// Index of the block containing `x`, if any.
    pub fn block_of(&self, x: CellIdx) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(x))
    }
}

/// Blocks are the components of the flow digraph inside `region`.
pub fn finest_block_partition(v: &MultivectorField, region: &CellSet) -> Result<BlockDecomposition> {
    require_isolating(v, region, "region")?;
    let sccs = Sccs::compute(v, region)?;
    Ok(BlockDecomposition {
        blocks: sccs.comps,
        order: FlowOrder::from_closure(sccs.reach),
        ambient: region.clone(),
        is_partition: true,
    })
}

/// Checks disjointness, isolation, (B1) and (B2); computes the minimal order.
pub fn validate_block_decomposition(
    v: &MultivectorField,
    blocks: &[CellSet],
    ambient: &CellSet,
) -> Result<BlockDecomposition> {
    let c = v.complex();
    require_isolating(v, ambient, "ambient set")?;
    let mut union = CellSet::empty(c.len());
    for (i, b) in blocks.iter().enumerate() {
        c.check_member(b)?;
        if b.is_empty() {
            return Err(Error::BlockDecomposition(format!("block {i} is empty")));
        }
        require_isolating(v, b, &format!("block {i} (`{}`)", c.id(b.first().unwrap_or(0))))?;
        if !b.is_subset(ambient) {
            return Err(Error::BlockDecomposition(format!("block `{}` leaves the ambient set", c.id(b.first().unwrap_or(0)))));
        }
        if !b.is_disjoint(&union) {
            return Err(Error::BlockDecomposition(format!("block `{}` overlaps an earlier block", c.id(b.first().unwrap_or(0)))));
        }
        union.union_with(b);
    }
    let mut sorted: Vec<CellSet> = blocks.to_vec();
    sorted.sort_by_key(|b| b.first());
    let sccs = Sccs::compute(v, ambient)?;
    for (s, &inv) in sccs.comps.iter().zip(&sccs.invariant) {
        if inv && !sorted.iter().any(|b| s.is_subset(b)) {
            return Err(Error::BlockDecomposition(format!(
                "(B1) invariant component at `{}` is not inside a single block",
                c.id(s.first().unwrap_or(0))
            )));
        }
    }
    let k = sorted.len();
    let mut below: Vec<FixedBitSet> = (0..k).map(|_| FixedBitSet::with_capacity(k)).collect();
    for q in 0..k {
        let r = push_forward(v, &sorted[q], ambient);
        for p in 0..k {
            if p != q && !r.is_disjoint(&sorted[p]) {
                below[q].insert(p);
            }
        }
    }
    for q in 0..k {
        for p in below[q].ones() {
            if below[p].contains(q) {
                return Err(Error::BlockDecomposition(format!(
                    "(B2) paths run both ways between blocks `{}` and `{}`",
                    c.id(sorted[p].first().unwrap_or(0)),
                    c.id(sorted[q].first().unwrap_or(0))
                )));
            }
        }
    }
    Ok(BlockDecomposition {
        is_partition: union == *ambient,
        blocks: sorted,
        order: FlowOrder::from_closure(below),
        ambient: ambient.clone(),
    })
}

/// Nonempty invariant parts of blocks with the restricted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseDecomposition {
    pub sets: Vec<CellSet>,
    /// Block index covering each Morse set.
    pub block_index: Vec<usize>,
    pub order: FlowOrder,
}

pub fn induced_morse(v: &MultivectorField, d: &BlockDecomposition) -> Result<MorseDecomposition> {
    let mut sets = Vec::new();
    let mut block_index = Vec::new();
    for (p, b) in d.blocks.iter().enumerate() {
        let s = invariant_part(v, b)?;
        if !s.is_empty() {
            sets.push(s);
            block_index.push(p);
        }
    }
    let order = d.order.restrict(&block_index);
    Ok(MorseDecomposition { sets, block_index, order })
}

/// Role of an invariant subset inside an invariant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArKind {
    Attractor,
    Repeller,
    /// Both closed and open in `s`, e.g. the empty set or a whole component.
    Both,
    Neither,
}

fn require_isolated_invariant(v: &MultivectorField, s: &CellSet, what: &str) -> Result<()> {
    require_isolating(v, s, what).map_err(|e| Error::Precondition(e.to_string()))?;
    if invariant_part_of_set(v, s)? != *s {
        return Err(Error::Precondition(format!("{what} is not invariant")));
    }
    Ok(())
}

/// Attractor iff `F(A) ∩ S = A`; repeller iff `F⁻¹(R) ∩ S = R`.
pub fn classify_ar(v: &MultivectorField, s: &CellSet, candidate: &CellSet) -> Result<ArKind> {
    require_isolated_invariant(v, s, "ambient set")?;
    require_isolated_invariant(v, candidate, "candidate")?;
    if !candidate.is_subset(s) {
        return Err(Error::Precondition("candidate is not inside the ambient set".into()));
    }
    let closed_forward = candidate.iter().all(|x| v.successors(x).all(|y| !s.contains(y) || candidate.contains(y)));
    let closed_backward =
        candidate.iter().all(|x| v.predecessors(x).all(|y| !s.contains(y) || candidate.contains(y)));
    Ok(match (closed_forward, closed_backward) {
        (true, true) => ArKind::Both,
        (true, false) => ArKind::Attractor,
        (false, true) => ArKind::Repeller,
        (false, false) => ArKind::Neither,
    })
}

/// Pair of closed sets `E ⊆ P`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPair {
    pub p: CellSet,
    pub e: CellSet,
}

impl IndexPair {
    pub fn new(p: CellSet, e: CellSet) -> IndexPair {
        IndexPair { p, e }
    }

    /// `self ⊆ other` componentwise.
    pub fn within(&self, other: &IndexPair) -> bool {
        self.p.is_subset(&other.p) && self.e.is_subset(&other.e)
    }

    pub fn diff(&self) -> CellSet {
        self.p.difference(&self.e)
    }
}

/// `(cl B, mo B)` for an isolating block, validated.
pub fn index_pair_of_block(v: &MultivectorField, b: &CellSet) -> Result<IndexPair> {
    require_isolating(v, b, "block")?;
    let p = v.complex().closure(b);
    let e = p.difference(b);
    validate_index_pair(v, &p, &e)?;
    Ok(IndexPair { p, e })
}

/// Checks IP1 and IP2 and returns `inv(P \ E)`.
pub fn validate_index_pair(v: &MultivectorField, p: &CellSet, e: &CellSet) -> Result<CellSet> {
    let c = v.complex();
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
    let d = p.difference(e);
    for x in d.iter() {
        if let Some(y) = v.successors(x).find(|&y| !p.contains(y)) {
            return Err(Error::IndexPair(format!("IP1 fails on edge {} -> {}", c.id(x), c.id(y))));
        }
    }
    for x in e.iter() {
        if let Some(y) = v.successors(x).find(|&y| p.contains(y) && !e.contains(y)) {
            return Err(Error::IndexPair(format!("IP2 fails on edge {} -> {}", c.id(x), c.id(y))));
        }
    }
    invariant_part_of_set(v, &d)
}

/// Ranks of the relative homology of an index pair, one entry per degree up to `dim X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConleyIndex {
    pub ranks: Vec<usize>,
}

pub fn conley_index(v: &MultivectorField, pair: &IndexPair) -> Result<ConleyIndex> {
    validate_index_pair(v, &pair.p, &pair.e)?;
    Ok(ConleyIndex { ranks: relative_ranks(v.complex(), &pair.p, &pair.e) })
}

/// Conley index of an isolating block through `(cl B, mo B)`.
pub fn conley_index_of_block(v: &MultivectorField, b: &CellSet) -> Result<ConleyIndex> {
    conley_index(v, &index_pair_of_block(v, b)?)
}

/// Invariant parts of a common isolating block under two comparable fields.
pub fn continues_to(v0: &MultivectorField, v1: &MultivectorField, b: &CellSet) -> Result<(CellSet, CellSet)> {
    if v0.refinement_relation(v1)? == Refinement::Incomparable {
        return Err(Error::Precondition("fields are not comparable".into()));
    }
    if !v0.is_isolating_block(b) || !v1.is_isolating_block(b) {
        return Err(Error::NotIsolatingBlock("set is not an isolating block for both fields".into()));
    }
    Ok((invariant_part(v0, b)?, invariant_part(v1, b)?))
}

/// Index pairs from `(P, E)` down to `(cl B, mo B)`, before deduplication.
fn half_sequence(v: &MultivectorField, pair: &IndexPair, core: &CellSet) -> Vec<IndexPair> {
    let c = v.complex();
    let cl = c.closure(core);
    let mo = cl.difference(core);
    let pcl = push_forward(v, &cl, &pair.p);
    let pmo = push_forward(v, &mo, &pair.p);
    vec![
        pair.clone(),
        IndexPair::new(pcl.clone(), pair.e.intersection(&pmo)),
        IndexPair::new(pcl, pmo),
        IndexPair::new(cl, mo),
    ]
}

/// Zigzag of index pairs joining two index pairs of one invariant set through a common core.
///
/// Adjacent terms are related by inclusion; equal neighbours are merged.
pub fn connecting_sequence(
    v: &MultivectorField,
    pair1: &IndexPair,
    pair2: &IndexPair,
    core: Option<&CellSet>,
) -> Result<Vec<IndexPair>> {
    let s1 = validate_index_pair(v, &pair1.p, &pair1.e)?;
    let s2 = validate_index_pair(v, &pair2.p, &pair2.e)?;
    if s1 != s2 {
        return Err(Error::Precondition("index pairs isolate different invariant sets".into()));
    }
    if pair1 == pair2 {
        return Ok(vec![pair1.clone()]);
    }
    let core = core.cloned().unwrap_or(s1);
    if !core.is_empty() {
        require_isolating(v, &core, "core").map_err(|e| Error::Precondition(e.to_string()))?;
    }
    if !core.is_subset(&pair1.diff()) || !core.is_subset(&pair2.diff()) {
        return Err(Error::Precondition("core is not inside both differences".into()));
    }
    let mut seq = half_sequence(v, pair1, &core);
    let mut back = half_sequence(v, pair2, &core);
    back.reverse();
    seq.extend(back);
    seq.dedup();
    Ok(seq)
}

/// Left and right limit sets of essential solutions through a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialWitness {
    /// Invariant component containing the cell, empty if none.
    pub cycle_support: CellSet,
    /// An invariant component from which the cell is reachable.
    pub left_limit: CellSet,
    /// An invariant component reachable from the cell.
    pub right_limit: CellSet,
}

/// Witness for `x ∈ inv(region)`, or `None` if `x` is not invariant.
pub fn essential_witness(v: &MultivectorField, x: CellIdx, region: &CellSet) -> Result<Option<EssentialWitness>> {
    let n = v.complex().len();
    let sccs = Sccs::compute(v, region)?;
    let me = sccs.comp_of[x];
    if me == usize::MAX {
        return Ok(None);
    }
    let inv: Vec<usize> = (0..sccs.comps.len()).filter(|&i| sccs.invariant[i]).collect();
    let left = inv.iter().copied().find(|&i| i == me || sccs.reach[i].contains(me));
    let right = inv.iter().copied().find(|&i| i == me || sccs.reach[me].contains(i));
    Ok(match (left, right) {
        (Some(l), Some(r)) => Some(EssentialWitness {
            cycle_support: if sccs.invariant[me] { sccs.comps[me].clone() } else { CellSet::empty(n) },
            left_limit: sccs.comps[l].clone(),
            right_limit: sccs.comps[r].clone(),
        }),
        _ => None,
    })
}

/// True iff no path `x -> y -> z` has `x, z` in `a` and `y` outside, by exhaustive edge-pair scan.
pub fn is_isolating_by_paths(v: &MultivectorField, a: &CellSet) -> bool {
    a.iter().all(|x| v.successors(x).filter(|&y| !a.contains(y)).all(|y| v.successors(y).all(|z| !a.contains(z))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn first_example_partition_and_morse() {
        let (c, fs) = fixtures::first_example();
        let v = &fs[0];
        let bd = finest_block_partition(v, &c.full_set()).unwrap();
        assert_eq!(bd.len(), 7);
        let md = induced_morse(v, &bd).unwrap();
        assert_eq!(md.sets.len(), 4);
        let mut ranks: Vec<Vec<usize>> =
            md.sets.iter().map(|s| conley_index_of_block(v, s).unwrap().ranks).collect();
        ranks.sort();
        assert_eq!(ranks, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 0]]);
        assert_eq!(essential_set(v, &c.full_set()).unwrap(), invariant_part(v, &c.full_set()).unwrap());
    }

    #[test]
    fn trivial_queries() {
        let (c, fs) = fixtures::first_example();
        let v = &fs[0];
        let f = c.set_from_ids(&["f"]).unwrap();
        assert_eq!(push_forward(v, &f, &c.full_set()), f);
        assert_eq!(push_forward(v, &c.empty_set(), &c.full_set()), c.empty_set());
        assert_eq!(connection_set(v, std::slice::from_ref(&f), &c.full_set()), f);
        assert_eq!(invariant_part(v, &f).unwrap(), f);
        let reg = c.set_from_ids(&["a", "ab"]).unwrap();
        assert!(invariant_part(v, &reg).unwrap().is_empty());
        assert!(!essential_exists(v, c.lookup("a").unwrap(), &reg).unwrap());
    }

    #[test]
    fn classify_first_example() {
        let (c, fs) = fixtures::first_example();
        let v = &fs[0];
        let s = invariant_part(v, &c.full_set()).unwrap();
        let one = |id: &str| c.set_from_ids(&[id]).unwrap();
        assert_eq!(classify_ar(v, &s, &one("f")).unwrap(), ArKind::Attractor);
        assert_eq!(classify_ar(v, &s, &one("abc")).unwrap(), ArKind::Repeller);
        assert_eq!(classify_ar(v, &s, &one("ef")).unwrap(), ArKind::Repeller);
    }

    #[test]
    fn index_pairs() {
        let (c, fs) = fixtures::octahedron();
        let v = &fs[1];
        let e = c.set_from_ids(&["e"]).unwrap();
        let ip = index_pair_of_block(v, &e).unwrap();
        assert_eq!(ip.p, e);
        assert!(ip.e.is_empty());
        let whole = index_pair_of_block(v, &c.full_set()).unwrap();
        assert!(whole.e.is_empty());
        let p = c.closure(&c.set_from_ids(&["abe"]).unwrap());
        assert!(validate_index_pair(v, &p, &p).unwrap().is_empty());
        assert!(matches!(validate_index_pair(v, &p, &c.set_from_ids(&["ab"]).unwrap()), Err(Error::NotClosed(_))));
    }

    #[test]
    fn splitting_a_component_is_rejected() {
        let (c, fs) = fixtures::first_example();
        let v = &fs[0];
        let bd = finest_block_partition(v, &c.full_set()).unwrap();
        assert!(validate_block_decomposition(v, &bd.blocks, &c.full_set()).is_ok());
        let orbit = c.set_from_ids(&["a", "ab", "b", "bd", "c", "ac", "d", "cd"]).unwrap();
        let left = c.set_from_ids(&["a", "ab", "b", "bd"]).unwrap();
        let mut blocks: Vec<CellSet> = bd.blocks.iter().filter(|b| **b != orbit).cloned().collect();
        blocks.push(left.clone());
        blocks.push(orbit.difference(&left));
        assert!(validate_block_decomposition(v, &blocks, &c.full_set()).is_err());
    }
}
