//! From a parameterized field to the transition diagram of index pairs.
//!
//! A filtration is a list of stages (block decompositions) joined by steps.
//! In a coarsening step the left stage is the finer one; in a refinement step
//! the right stage is. Index pairs for a step come from the nested sets `N_p`
//! of a filtration-consistent linear order and are computed in the finer field.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::complex::{CellSet, Complex};
use crate::dynamics::{
    connecting_sequence, connection_set, finest_block_partition, invariant_part, push_forward,
    validate_block_decomposition, validate_index_pair, BlockDecomposition, IndexPair,
};
use crate::error::{ensure, Error, Result};
use crate::homology::{pair_map_between, relative_homology_unchecked, RelHomology};
use crate::linalg::Mat2;
use crate::mvf::{MultivectorField, Refinement};

/// Sequence of fields on one complex with comparable neighbours.
#[derive(Debug, Clone)]
pub struct ParameterizedMVF {
    pub complex: Arc<Complex>,
    pub fields: Vec<Arc<MultivectorField>>,
    /// Relation of `fields[l]` to `fields[l + 1]`.
    pub directions: Vec<Refinement>,
}

impl ParameterizedMVF {
    /// Checks the fence condition: adjacent fields must be comparable.
    pub fn new(fields: Vec<MultivectorField>) -> Result<ParameterizedMVF> {
        let first = fields.first().ok_or_else(|| Error::Schema("at least one field is required".into()))?;
        let complex = first.complex_arc().clone();
        let mut directions = Vec::new();
        for (l, w) in fields.windows(2).enumerate() {
            let r = w[0].refinement_relation(&w[1])?;
            if r == Refinement::Incomparable {
                return Err(Error::Fence { lambda: l });
            }
            directions.push(r);
        }
        Ok(ParameterizedMVF { complex, fields: fields.into_iter().map(Arc::new).collect(), directions })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// Which side of a step holds the finer decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Left stage finer: blocks merge going right.
    Coarsening,
    /// Right stage finer: blocks split going right.
    Refinement,
}

/// Total map from fine block indices to the coarse blocks containing them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexingMap {
    pub map: Vec<usize>,
}

impl IndexingMap {
    pub fn preimage(&self, q: usize) -> Vec<usize> {
        (0..self.map.len()).filter(|&p| self.map[p] == q).collect()
    }

    pub fn preimage_sizes(&self, ncoarse: usize) -> Vec<usize> {
        let mut s = vec![0; ncoarse];
        for &q in &self.map {
            s[q] += 1;
        }
        s
    }
}

/// `ι(p) = r` iff `B_p ⊆ B_r`; checks totality and order preservation.
pub fn indexing_map(coarse: &BlockDecomposition, fine: &BlockDecomposition) -> Result<IndexingMap> {
    let mut map = Vec::with_capacity(fine.len());
    for (p, b) in fine.blocks.iter().enumerate() {
        let x = b.first().expect("blocks are nonempty");
        let q = coarse
            .block_of(x)
            .filter(|&q| b.is_subset(&coarse.blocks[q]))
            .ok_or_else(|| Error::BlockDecomposition(format!("fine block {p} lies in no coarse block")))?;
        map.push(q);
    }
    for q in 0..fine.len() {
        for p in fine.order.below[q].ones() {
            let (a, b) = (map[p], map[q]);
            if a != b && !coarse.order.less(a, b) {
                return Err(Error::Internal(format!("indexing map is not order preserving at fine blocks {p} < {q}")));
            }
        }
    }
    Ok(IndexingMap { map })
}

/// One block decomposition with the index of the field it belongs to.
#[derive(Debug, Clone)]
pub struct Stage {
    pub blocks: BlockDecomposition,
    pub lambda: usize,
    pub auxiliary: bool,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub kind: StepKind,
    pub map: IndexingMap,
    /// Index of the input step `lambda -> lambda + 1` this step belongs to.
    pub source_step: usize,
}

impl Step {
    /// (fine stage, coarse stage) offsets relative to the left stage index.
    pub fn fine_coarse(&self, left: usize) -> (usize, usize) {
        match self.kind {
            StepKind::Coarsening => (left, left + 1),
            StepKind::Refinement => (left + 1, left),
        }
    }
}

/// Merge performed while expanding a many-way split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CascadeChoice {
    pub source_step: usize,
    pub round: usize,
    pub lower: String,
    pub upper: String,
    pub merged: String,
    pub comparable: bool,
}

#[derive(Debug, Clone)]
pub struct ZigzagBlockFiltration {
    pub stages: Vec<Stage>,
    pub steps: Vec<Step>,
    pub cascade_log: Vec<CascadeChoice>,
}

/// Which end of the linear extension cascade merges start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadePolicy {
    #[default]
    MinFirst,
    MaxFirst,
}

fn step_kind(r: Refinement) -> StepKind {
    match r {
        Refinement::Refines | Refinement::Equal => StepKind::Coarsening,
        Refinement::Coarsens => StepKind::Refinement,
        Refinement::Incomparable => unreachable!("fence checked at construction"),
    }
}

/// Finest block partitions of every field, joined by indexing maps.
pub fn finest_filtration(pm: &ParameterizedMVF) -> Result<ZigzagBlockFiltration> {
    let x = pm.complex.full_set();
    let stages = pm
        .fields
        .iter()
        .enumerate()
        .map(|(l, v)| Ok(Stage { blocks: finest_block_partition(v, &x)?, lambda: l, auxiliary: false }))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    for (l, &dir) in pm.directions.iter().enumerate() {
        let kind = step_kind(dir);
        let (f, c) = match kind {
            StepKind::Coarsening => (l, l + 1),
            StepKind::Refinement => (l + 1, l),
        };
        let map = indexing_map(&stages[c].blocks, &stages[f].blocks)?;
        steps.push(Step { kind, map, source_step: l });
    }
    Ok(ZigzagBlockFiltration { stages, steps, cascade_log: Vec::new() })
}

fn label(c: &Complex, b: &CellSet) -> String {
    c.id(b.first().expect("blocks are nonempty")).to_string()
}

/// One round of pairwise merges toward `coarse`. Merged pairs are disjoint and
/// convex in the current order, so the quotient order stays acyclic.
fn cascade_round(
    v: &MultivectorField,
    current: &BlockDecomposition,
    coarse: &BlockDecomposition,
    map: &IndexingMap,
    policy: CascadePolicy,
    source_step: usize,
    round: usize,
    log: &mut Vec<CascadeChoice>,
) -> Result<BlockDecomposition> {
    let c = v.complex();
    let k = current.len();
    let ext = current.order.lexmin_extension(|p| current.blocks[p].first());
    let mut pos = vec![0; k];
    for (i, &p) in ext.iter().enumerate() {
        pos[p] = i;
    }
    let cap = 2 * k + 1;
    let mut below: Vec<FixedBitSet> = current
        .order
        .below
        .iter()
        .map(|b| {
            let mut x = b.clone();
            x.grow(cap);
            x
        })
        .collect();
    let mut members: Vec<Vec<usize>> = (0..k).map(|p| vec![p]).collect();
    let mut owner: Vec<usize> = map.map.clone();
    let mut alive = vec![true; k];
    let mut touched = vec![false; k];
    let coarse_ext = coarse.order.lexmin_extension(|q| coarse.blocks[q].first());
    for &q in &coarse_ext {
        loop {
            let mut group: Vec<usize> = (0..members.len()).filter(|&g| alive[g] && owner[g] == q).collect();
            if group.len() <= 2 {
                break;
            }
            group.sort_by_key(|&g| pos[members[g][0]]);
            let less = |a: usize, b: usize, below: &Vec<FixedBitSet>| below[b].contains(a);
            let antichain = group.iter().all(|&a| group.iter().all(|&b| !less(a, b, &below)));
            let mut cands: Vec<(usize, usize)> = Vec::new();
            if antichain {
                let free: Vec<usize> = group.iter().copied().filter(|&g| !touched[g]).collect();
                cands.extend(free.windows(2).map(|w| (w[0], w[1])));
            } else {
                for &a in &group {
                    for &b in &group {
                        if touched[a] || touched[b] || !less(a, b, &below) {
                            continue;
                        }
                        let between = group.iter().any(|&z| less(a, z, &below) && less(z, b, &below));
                        if !between {
                            cands.push((a, b));
                        }
                    }
                }
            }
            let key = |&(a, b): &(usize, usize)| (pos[members[a][0]], pos[members[b][0]]);
            let pick = match policy {
                CascadePolicy::MinFirst => cands.iter().min_by_key(|p| key(p)),
                CascadePolicy::MaxFirst => cands.iter().max_by_key(|p| key(p)),
            };
            let Some(&(a, b)) = pick else { break };
            let g = members.len();
            let mut mem = members[a].clone();
            mem.extend(members[b].iter().copied());
            members.push(mem);
            owner.push(q);
            alive[a] = false;
            alive[b] = false;
            alive.push(true);
            touched.push(true);
            let mut nb = below[a].clone();
            nb.union_with(&below[b]);
            nb.set(a, false);
            nb.set(b, false);
            for (h, bh) in below.iter_mut().enumerate() {
                if alive[h] && (bh.contains(a) || bh.contains(b)) {
                    bh.union_with(&nb);
                    bh.insert(g);
                    bh.set(a, false);
                    bh.set(b, false);
                }
            }
            below.push(nb);
            let la = label(c, &current.blocks[members[a][0]]);
            let lb = label(c, &current.blocks[members[b][0]]);
            let mut cells = c.empty_set();
            for &p in &members[g] {
                cells.union_with(&current.blocks[p]);
            }
            log.push(CascadeChoice {
                source_step,
                round,
                lower: la,
                upper: lb,
                merged: label(c, &cells),
                comparable: !antichain,
            });
        }
    }
    let mut blocks = Vec::new();
    for g in 0..members.len() {
        if !alive[g] {
            continue;
        }
        let parts: Vec<CellSet> = members[g].iter().map(|&p| current.blocks[p].clone()).collect();
        let merged = if parts.len() == 1 {
            parts[0].clone()
        } else {
            connection_set(v, &parts, &coarse.blocks[owner[g]])
        };
        blocks.push(merged);
    }
    for (i, b) in blocks.iter().enumerate() {
        for (j, o) in blocks.iter().enumerate() {
            ensure(i == j || b.is_disjoint(o), || "cascade merge overlaps another block".into())?;
        }
    }
    let bd = validate_block_decomposition(v, &blocks, &current.ambient)?;
    ensure(bd.is_partition == current.is_partition, || "cascade changed the partition flag".into())?;
    Ok(bd)
}

/// Expands every step with a preimage larger than two into a cascade of
/// pairwise merges, inserted as auxiliary stages that share the finer field.
pub fn make_basic(
    zf: &ZigzagBlockFiltration,
    pm: &ParameterizedMVF,
    policy: CascadePolicy,
) -> Result<ZigzagBlockFiltration> {
    let mut stages = vec![zf.stages[0].clone()];
    let mut steps = Vec::new();
    let mut log = zf.cascade_log.clone();
    for (i, step) in zf.steps.iter().enumerate() {
        let (f, c) = step.fine_coarse(i);
        let (fine, coarse) = (&zf.stages[f], &zf.stages[c]);
        check_convex(&fine.blocks, &step.map)?;
        let v = &pm.fields[fine.lambda];
        let mut chain: Vec<BlockDecomposition> = Vec::new();
        let mut current = fine.blocks.clone();
        let mut map = step.map.clone();
        let mut round = 0;
        while map.preimage_sizes(coarse.blocks.len()).iter().any(|&s| s > 2) {
            let next = cascade_round(v, &current, &coarse.blocks, &map, policy, step.source_step, round, &mut log)?;
            ensure(next.len() < current.len(), || "cascade round merged nothing".into())?;
            map = indexing_map(&coarse.blocks, &next)?;
            chain.push(next.clone());
            current = next;
            round += 1;
        }
        let aux = |b: BlockDecomposition| Stage { blocks: b, lambda: fine.lambda, auxiliary: true };
        let mut seq: Vec<Stage> = Vec::new();
        match step.kind {
            StepKind::Coarsening => {
                seq.extend(chain.into_iter().map(aux));
                seq.push(coarse.clone());
            }
            StepKind::Refinement => {
                seq.extend(chain.into_iter().rev().map(aux));
                seq.push(fine.clone());
            }
        }
        for s in seq {
            let left = stages.last().expect("nonempty");
            let map = match step.kind {
                StepKind::Coarsening => indexing_map(&s.blocks, &left.blocks)?,
                StepKind::Refinement => indexing_map(&left.blocks, &s.blocks)?,
            };
            steps.push(Step { kind: step.kind, map, source_step: step.source_step });
            stages.push(s);
        }
    }
    Ok(ZigzagBlockFiltration { stages, steps, cascade_log: log })
}

/// Every preimage is convex in the fine order.
fn check_convex(fine: &BlockDecomposition, map: &IndexingMap) -> Result<()> {
    for a in 0..fine.len() {
        for b in fine.order.below[a].ones() {
            // b < a; any z with b < z < a must share their coarse block.
            if map.map[a] != map.map[b] {
                continue;
            }
            for z in fine.order.below[a].ones() {
                if fine.order.less(b, z) && map.map[z] != map.map[a] {
                    return Err(Error::Internal(format!("preimage of coarse block {} is not convex", map.map[a])));
                }
            }
        }
    }
    Ok(())
}

/// Linear extensions of the fine and coarse orders with the indexing map monotone.
///
/// The coarse extension is the lexicographically minimal topological order by
/// block label; each preimage follows in the fine lexicographic extension.
pub fn consistent_orders(
    fine: &BlockDecomposition,
    coarse: &BlockDecomposition,
    map: &IndexingMap,
) -> (Vec<usize>, Vec<usize>) {
    let coarse_ext = coarse.order.lexmin_extension(|q| coarse.blocks[q].first());
    let fine_ext = fine.order.lexmin_extension(|p| fine.blocks[p].first());
    let mut out = Vec::with_capacity(fine.len());
    for &q in &coarse_ext {
        out.extend(fine_ext.iter().copied().filter(|&p| map.map[p] == q));
    }
    (out, coarse_ext)
}

/// Nested closed sets `N_0 = ∅ ⊆ N_1 ⊆ ...`, one per fine block in `fine_order`.
pub fn n_sequence(
    v_fine: &MultivectorField,
    v_coarse: &MultivectorField,
    fine: &BlockDecomposition,
    coarse: &BlockDecomposition,
    map: &IndexingMap,
    fine_order: &[usize],
) -> Vec<CellSet> {
    let c = v_fine.complex();
    let region = fine.ambient.clone();
    let mut last_of = vec![usize::MAX; coarse.len()];
    for (i, &p) in fine_order.iter().enumerate() {
        last_of[map.map[p]] = i;
    }
    let mut out = vec![c.empty_set()];
    for (i, &p) in fine_order.iter().enumerate() {
        let q = map.map[p];
        let mut n = out[i].clone();
        if fine.is_partition && coarse.is_partition {
            n.union_with(&fine.blocks[p]);
        } else if last_of[q] == i {
            n.union_with(&push_forward(v_coarse, &coarse.blocks[q], &region));
        } else {
            n.union_with(&push_forward(v_fine, &fine.blocks[p], &region));
        }
        out.push(n);
    }
    out
}

/// `N_p` by the push-forward formula regardless of the partition flag.
pub fn n_sequence_general(
    v_fine: &MultivectorField,
    v_coarse: &MultivectorField,
    fine: &BlockDecomposition,
    coarse: &BlockDecomposition,
    map: &IndexingMap,
    fine_order: &[usize],
) -> Vec<CellSet> {
    let mut f = fine.clone();
    f.is_partition = false;
    n_sequence(v_fine, v_coarse, &f, coarse, map, fine_order)
}

/// Basic triple of one two-way split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSets {
    pub n0: CellSet,
    pub n1: CellSet,
    pub n2: CellSet,
}

/// Index pairs attached to both sides of a step.
#[derive(Debug, Clone)]
pub struct StepPairs {
    pub fine_pairs: Vec<IndexPair>,
    pub coarse_pairs: Vec<IndexPair>,
    /// `(coarse q, attractor p0, repeller p1, triple)`.
    pub splits: Vec<(usize, usize, usize, TripleSets)>,
}

fn check_isolates(v: &MultivectorField, pair: &IndexPair, block: &CellSet, what: &str) -> Result<()> {
    let s = validate_index_pair(v, &pair.p, &pair.e)
        .map_err(|e| Error::Internal(format!("{what}: not an index pair ({e})")))?;
    let want = invariant_part(v, block)?;
    ensure(s == want, || format!("{what}: index pair isolates the wrong invariant set"))
}

/// Index pairs of a basic step, validated against both fields.
pub fn step_pairs(
    v_fine: &MultivectorField,
    v_coarse: &MultivectorField,
    fine: &BlockDecomposition,
    coarse: &BlockDecomposition,
    map: &IndexingMap,
) -> Result<StepPairs> {
    let c = v_fine.complex();
    let (order, _) = consistent_orders(fine, coarse, map);
    let ns = n_sequence(v_fine, v_coarse, fine, coarse, map, &order);
    let mut pos = vec![0; fine.len()];
    for (i, &p) in order.iter().enumerate() {
        pos[p] = i + 1;
    }
    let empty = IndexPair::new(c.empty_set(), c.empty_set());
    let mut fine_pairs = vec![empty.clone(); fine.len()];
    let mut coarse_pairs = vec![empty; coarse.len()];
    let mut splits = Vec::new();
    for q in 0..coarse.len() {
        let mut pre = map.preimage(q);
        pre.sort_by_key(|&p| pos[p]);
        let bq = &coarse.blocks[q];
        match pre.len() {
            0 => {
                let p = c.closure(bq);
                let e = p.difference(bq);
                coarse_pairs[q] = IndexPair::new(p, e);
                check_isolates(v_coarse, &coarse_pairs[q], bq, "standalone coarse pair")?;
            }
            1 => {
                let i = pos[pre[0]];
                let pair = IndexPair::new(ns[i].clone(), ns[i - 1].clone());
                check_isolates(v_fine, &pair, &fine.blocks[pre[0]], "shared pair (fine side)")?;
                check_isolates(v_coarse, &pair, bq, "shared pair (coarse side)")?;
                fine_pairs[pre[0]] = pair.clone();
                coarse_pairs[q] = pair;
            }
            2 => {
                let (p0, p1) = (pre[0], pre[1]);
                ensure(pos[p1] == pos[p0] + 1, || "merging blocks are not consecutive".into())?;
                let t = TripleSets {
                    n0: ns[pos[p0] - 1].clone(),
                    n1: ns[pos[p0]].clone(),
                    n2: ns[pos[p1]].clone(),
                };
                let att = IndexPair::new(t.n1.clone(), t.n0.clone());
                let rep = IndexPair::new(t.n2.clone(), t.n1.clone());
                let whole = IndexPair::new(t.n2.clone(), t.n0.clone());
                check_isolates(v_fine, &att, &fine.blocks[p0], "attractor pair")?;
                check_isolates(v_fine, &rep, &fine.blocks[p1], "repeller pair")?;
                check_isolates(v_fine, &whole, bq, "whole pair (fine field)")?;
                check_isolates(v_coarse, &whole, bq, "whole pair (coarse field)")?;
                fine_pairs[p0] = att;
                fine_pairs[p1] = rep;
                coarse_pairs[q] = whole;
                splits.push((q, p0, p1, t));
            }
            n => return Err(Error::Internal(format!("step is not basic: preimage of size {n}"))),
        }
    }
    Ok(StepPairs { fine_pairs, coarse_pairs, splits })
}

/// Node of the transition diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub pair: IndexPair,
    pub column: usize,
    pub stage: usize,
    pub block: usize,
    /// Label of the block: its minimal cell.
    pub label: String,
}

/// Inclusion `pair(from) ⊆ pair(to)` between adjacent columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
}

/// What happens between column `t` and `t + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnStep {
    /// Inside one stage: connecting sequences and padding.
    Internal,
    Coarsening,
    Refinement,
}

/// One AR-split of the diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ARSplitRecord {
    pub triple: TripleSets,
    pub attractor: usize,
    pub repeller: usize,
    pub whole: usize,
    /// Arrows `attractor -> whole` and `whole -> repeller`.
    pub arrows: (usize, usize),
    pub kind: StepKind,
    /// Left column of the step.
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct TransitionDiagram {
    pub complex: Arc<Complex>,
    pub nodes: Vec<Node>,
    pub arrows: Vec<Arrow>,
    /// Length-two paths `(a, b)` with `arrows[a].to == arrows[b].from`.
    pub ideal: Vec<(usize, usize)>,
    pub column_to_lambda: Vec<usize>,
    pub columns: Vec<Vec<usize>>,
    pub column_steps: Vec<ColumnStep>,
    pub splits: Vec<ARSplitRecord>,
    pub cascade_log: Vec<CascadeChoice>,
}

impl TransitionDiagram {
    pub fn ncolumns(&self) -> usize {
        self.columns.len()
    }

    pub fn out_arrows(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].from == n)
    }

    pub fn in_arrows(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].to == n)
    }

    /// Arrows touching `n`, with the other endpoint.
    pub fn incident(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (a, ar) in self.arrows.iter().enumerate() {
            inc[ar.from].push((a, ar.to));
            inc[ar.to].push((a, ar.from));
        }
        inc
    }

    /// "(t, block-id)".
    pub fn node_name(&self, n: usize) -> String {
        format!("({}, {})", self.nodes[n].column, self.nodes[n].label)
    }
}

/// Builds the diagram of a basic filtration.
pub fn assemble(zf: &ZigzagBlockFiltration, pm: &ParameterizedMVF) -> Result<TransitionDiagram> {
    let c = pm.complex.clone();
    let ns = zf.stages.len();
    let mut left: Vec<Option<Vec<IndexPair>>> = vec![None; ns];
    let mut right: Vec<Option<Vec<IndexPair>>> = vec![None; ns];
    let mut step_data = Vec::new();
    for (i, step) in zf.steps.iter().enumerate() {
        let (f, co) = step.fine_coarse(i);
        let sp = step_pairs(
            &pm.fields[zf.stages[f].lambda],
            &pm.fields[zf.stages[co].lambda],
            &zf.stages[f].blocks,
            &zf.stages[co].blocks,
            &step.map,
        )?;
        let (lp, rp) = match step.kind {
            StepKind::Coarsening => (sp.fine_pairs.clone(), sp.coarse_pairs.clone()),
            StepKind::Refinement => (sp.coarse_pairs.clone(), sp.fine_pairs.clone()),
        };
        right[i] = Some(lp);
        left[i + 1] = Some(rp);
        step_data.push(sp);
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut arrows: Vec<Arrow> = Vec::new();
    let mut columns: Vec<Vec<usize>> = Vec::new();
    let mut column_to_lambda = Vec::new();
    let mut column_steps = Vec::new();
    // Node ids of each stage's first and last column, per block.
    let mut first_nodes: Vec<Vec<usize>> = Vec::new();
    let mut last_nodes: Vec<Vec<usize>> = Vec::new();
    for (s, stage) in zf.stages.iter().enumerate() {
        let v = &pm.fields[stage.lambda];
        let bd = &stage.blocks;
        let seqs: Vec<Vec<IndexPair>> = (0..bd.len())
            .map(|p| match (&left[s], &right[s]) {
                (Some(l), Some(r)) => connecting_sequence(v, &l[p], &r[p], None)
                    .map_err(|e| Error::Internal(format!("connecting sequence at stage {s}: {e}"))),
                (Some(l), None) => Ok(vec![l[p].clone()]),
                (None, Some(r)) => Ok(vec![r[p].clone()]),
                (None, None) => {
                    let cl = c.closure(&bd.blocks[p]);
                    let mo = cl.difference(&bd.blocks[p]);
                    Ok(vec![IndexPair::new(cl, mo)])
                }
            })
            .collect::<Result<_>>()?;
        let width = seqs.iter().map(Vec::len).max().unwrap_or(1).max(1);
        if s > 0 {
            column_steps.push(match zf.steps[s - 1].kind {
                StepKind::Coarsening => ColumnStep::Coarsening,
                StepKind::Refinement => ColumnStep::Refinement,
            });
        }
        let mut prev: Vec<usize> = Vec::new();
        for j in 0..width {
            let t = columns.len();
            let mut col = Vec::new();
            for p in 0..bd.len() {
                let pair = seqs[p][j.min(seqs[p].len() - 1)].clone();
                let id = nodes.len();
                nodes.push(Node { pair, column: t, stage: s, block: p, label: label(&c, &bd.blocks[p]) });
                col.push(id);
            }
            if j > 0 {
                column_steps.push(ColumnStep::Internal);
                for p in 0..bd.len() {
                    arrows.push(orient(&nodes, prev[p], col[p])?);
                }
            } else {
                first_nodes.push(col.clone());
            }
            column_to_lambda.push(stage.lambda);
            prev = col.clone();
            columns.push(col);
        }
        last_nodes.push(prev);
    }
    let mut ideal = Vec::new();
    let mut splits = Vec::new();
    for (i, step) in zf.steps.iter().enumerate() {
        let sp = &step_data[i];
        let lcol = &last_nodes[i];
        let rcol = &first_nodes[i + 1];
        let (fine_nodes, coarse_nodes) = match step.kind {
            StepKind::Coarsening => (lcol, rcol),
            StepKind::Refinement => (rcol, lcol),
        };
        let in_split: Vec<bool> = (0..sp.coarse_pairs.len()).map(|q| sp.splits.iter().any(|s| s.0 == q)).collect();
        for (p, &q) in step.map.map.iter().enumerate() {
            if !in_split[q] {
                let (from, to) = left_to_right(step.kind, fine_nodes[p], coarse_nodes[q]);
                arrows.push(Arrow { from, to });
            }
        }
        for (q, p0, p1, t) in &sp.splits {
            let (att, rep, whole) = (fine_nodes[*p0], fine_nodes[*p1], coarse_nodes[*q]);
            let a1 = arrows.len();
            arrows.push(Arrow { from: att, to: whole });
            arrows.push(Arrow { from: whole, to: rep });
            ideal.push((a1, a1 + 1));
            splits.push(ARSplitRecord {
                triple: t.clone(),
                attractor: att,
                repeller: rep,
                whole,
                arrows: (a1, a1 + 1),
                kind: step.kind,
                column: nodes[lcol[0]].column,
            });
        }
    }
    for a in &arrows {
        ensure(nodes[a.from].pair.within(&nodes[a.to].pair), || {
            format!("arrow {} -> {} is not an inclusion", nodes[a.from].column, nodes[a.to].column)
        })?;
    }
    Ok(TransitionDiagram {
        complex: c,
        nodes,
        arrows,
        ideal,
        column_to_lambda,
        columns,
        column_steps,
        splits,
        cascade_log: zf.cascade_log.clone(),
    })
}

/// Equality arrow across a step, always left to right.
fn left_to_right(kind: StepKind, fine: usize, coarse: usize) -> (usize, usize) {
    match kind {
        StepKind::Coarsening => (fine, coarse),
        StepKind::Refinement => (coarse, fine),
    }
}

/// Arrow between consecutive columns of a stage, from the smaller pair.
fn orient(nodes: &[Node], a: usize, b: usize) -> Result<Arrow> {
    if nodes[a].pair.within(&nodes[b].pair) {
        Ok(Arrow { from: a, to: b })
    } else if nodes[b].pair.within(&nodes[a].pair) {
        Ok(Arrow { from: b, to: a })
    } else {
        Err(Error::Internal("consecutive pairs of a connecting sequence are not nested".into()))
    }
}

/// Runs the whole construction: finest filtration, cascades, assembly.
pub fn build_diagram(pm: &ParameterizedMVF, policy: CascadePolicy) -> Result<(ZigzagBlockFiltration, TransitionDiagram)> {
    let zf = finest_filtration(pm)?;
    let basic = make_basic(&zf, pm, policy)?;
    let td = assemble(&basic, pm)?;
    Ok((basic, td))
}

/// Outcome of `check_diagram`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramReport {
    pub nodes: usize,
    pub arrows: usize,
    pub ideal_paths: usize,
    pub acyclic: bool,
    pub gentle: bool,
    pub zero_composites: bool,
}

/// Acyclicity, column-degree bounds, the four gentle conditions, and vanishing of ideal composites in homology.
pub fn check_diagram(td: &TransitionDiagram) -> Result<DiagramReport> {
    let n = td.nodes.len();
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, td.arrows.len());
    for _ in 0..n {
        g.add_node(());
    }
    for a in &td.arrows {
        g.add_edge(NodeIndex::new(a.from), NodeIndex::new(a.to), ());
        let (ca, cb) = (td.nodes[a.from].column, td.nodes[a.to].column);
        if ca.abs_diff(cb) != 1 {
            return Err(Error::Internal(format!("arrow {} -> {} skips columns", td.node_name(a.from), td.node_name(a.to))));
        }
    }
    if petgraph::algo::is_cyclic_directed(&g) {
        return Err(Error::Internal("transition diagram has a directed cycle".into()));
    }
    let mut outs = vec![Vec::new(); n];
    let mut ins = vec![Vec::new(); n];
    for (i, a) in td.arrows.iter().enumerate() {
        outs[a.from].push(i);
        ins[a.to].push(i);
    }
    for v in 0..n {
        if outs[v].len() > 2 || ins[v].len() > 2 {
            return Err(Error::Internal(format!("node {} has more than two arrows in or out", td.node_name(v))));
        }
        for list in [&outs[v], &ins[v]] {
            for (x, &a) in list.iter().enumerate() {
                for &b in &list[x + 1..] {
                    let other = |k: usize| {
                        let ar = td.arrows[k];
                        td.nodes[if ar.from == v { ar.to } else { ar.from }].column
                    };
                    if other(a) == other(b) {
                        return Err(Error::Internal(format!(
                            "node {} has two same-direction arrows to one neighbouring column",
                            td.node_name(v)
                        )));
                    }
                }
            }
        }
    }
    let in_ideal = |a: usize, b: usize| td.ideal.contains(&(a, b));
    for &(a, b) in &td.ideal {
        if td.arrows[a].to != td.arrows[b].from {
            return Err(Error::Internal("ideal element is not a path".into()));
        }
    }
    for a in 0..td.arrows.len() {
        let after = &outs[td.arrows[a].to];
        let before = &ins[td.arrows[a].from];
        let cnt = |list: &Vec<usize>, inside: bool, forward: bool| {
            list.iter().filter(|&&b| (if forward { in_ideal(a, b) } else { in_ideal(b, a) }) == inside).count()
        };
        if cnt(after, false, true) > 1 || cnt(before, false, false) > 1 {
            return Err(Error::Internal(format!("gentle condition 2 fails at arrow {}", arrow_name(td, a))));
        }
        if cnt(after, true, true) > 1 || cnt(before, true, false) > 1 {
            return Err(Error::Internal(format!("gentle condition 3 fails at arrow {}", arrow_name(td, a))));
        }
        // Back-and-forth through one column must be an ideal path.
        for &b in after {
            let back = td.nodes[td.arrows[a].from].column == td.nodes[td.arrows[b].to].column;
            if back && !in_ideal(a, b) {
                return Err(Error::Internal(format!(
                    "path {} then {} returns to its column outside the ideal",
                    arrow_name(td, a),
                    arrow_name(td, b)
                )));
            }
        }
    }
    let hom = node_homology(td);
    for &(a, b) in &td.ideal {
        let f = arrow_matrices(td, &hom, a)?;
        let h = arrow_matrices(td, &hom, b)?;
        for (fd, hd) in f.iter().zip(&h) {
            if !hd.mul(fd).is_zero() {
                return Err(Error::Internal(format!(
                    "ideal composite {} then {} is nonzero in homology",
                    arrow_name(td, a),
                    arrow_name(td, b)
                )));
            }
        }
    }
    Ok(DiagramReport {
        nodes: n,
        arrows: td.arrows.len(),
        ideal_paths: td.ideal.len(),
        acyclic: true,
        gentle: true,
        zero_composites: true,
    })
}

fn arrow_name(td: &TransitionDiagram, a: usize) -> String {
    format!("{} -> {}", td.node_name(td.arrows[a].from), td.node_name(td.arrows[a].to))
}

/// Relative homology of every node.
pub fn node_homology(td: &TransitionDiagram) -> Vec<RelHomology> {
    use rayon::prelude::*;
    td.nodes.par_iter().map(|n| relative_homology_unchecked(&td.complex, &n.pair.p, &n.pair.e)).collect()
}

/// Matrices of the map induced by an arrow, per degree.
pub fn arrow_matrices(td: &TransitionDiagram, hom: &[RelHomology], a: usize) -> Result<Vec<Mat2>> {
    let ar = td.arrows[a];
    pair_map_between(&hom[ar.from], &hom[ar.to], &td.nodes[ar.to].pair.diff())
}
