//! Barcodes of the homology of a transition diagram.
//!
//! The engine sweeps columns left to right, one degree at a time. Each node
//! holds the bars alive there with one representative cycle per bar; the
//! classes of those cycles form a basis of the node's homology. Crossing an
//! arrow is one zigzag step on the filtration obtained by walking back from
//! the node. When walking back reaches a node with two predecessors, the walk
//! takes the one that the node maps into. Which bar ends at a step follows the
//! zigzag age order relative to that walk.

use std::cmp::Reverse;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::Complex;
use crate::error::{ensure, Error, Result};
use crate::homology::{frames, les_connecting, restrict_chain, ChainSpace, ConedSpace, Frame, RelativeSpace};
use crate::linalg::{add_assign, unit, zero, Mat2, Reducer, Vec2};
use crate::transition::{
    arrow_matrices, build_diagram, check_diagram, node_homology, CascadePolicy, ColumnStep, ParameterizedMVF,
    StepKind, TransitionDiagram, ZigzagBlockFiltration,
};

/// How a pair `(P, E)` is turned into a chain complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainModel {
    /// `C(P) / C(E)`; arrows restrict chains to the target's `P \ E`.
    #[default]
    Quotient,
    /// `P ∪ ω·E` with the apex class divided out; arrows are literal inclusions.
    Coned,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOptions {
    pub model: ChainModel,
    /// Re-verify frame identities and per-arrow ranks after the sweep.
    pub debug_invariants: bool,
}

/// One string of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bar {
    #[serde(skip)]
    pub id: usize,
    pub degree: usize,
    pub birth: usize,
    /// `None` when the bar reaches the last column.
    pub death: Option<usize>,
    /// `(column, block label)` per visited node.
    pub path: Vec<(usize, String)>,
    #[serde(skip)]
    pub nodes: Vec<usize>,
    #[serde(skip)]
    pub birth_column: usize,
    #[serde(skip)]
    pub death_column: usize,
}

impl Bar {
    pub fn contains_node(&self, n: usize) -> bool {
        self.nodes.contains(&n)
    }
}

/// Matched event counts at one AR-split in degrees `d` and `d - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitCoupling {
    pub split: usize,
    pub kind: StepKind,
    pub column: usize,
    pub lambda: usize,
    /// Degree on the repeller side; the attractor side is one lower.
    pub degree: usize,
    pub repeller_events: usize,
    pub attractor_events: usize,
    /// Bar ids when both counts are one and the connecting map has rank one.
    pub coupled: Option<(usize, usize)>,
    pub connecting: Mat2,
}

#[derive(Debug, Clone, Serialize)]
pub struct Barcode {
    pub bars: Vec<Bar>,
    pub couplings: Vec<SplitCoupling>,
}

impl Barcode {
    pub fn of_degree(&self, d: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.degree == d)
    }

    /// `(degree, birth, death)` triples, sorted.
    pub fn spans(&self) -> Vec<(usize, usize, Option<usize>)> {
        let mut v: Vec<_> = self.bars.iter().map(|b| (b.degree, b.birth, b.death)).collect();
        v.sort();
        v
    }
}

/// Homology of the diagram: ranks per node and degree, matrices per arrow and degree.
#[derive(Debug, Clone, Serialize)]
pub struct CmModule {
    pub ranks: Vec<Vec<usize>>,
    pub maps: Vec<Vec<Mat2>>,
}

/// Applies homology to every node and arrow and checks that ideal composites vanish.
pub fn cm_module(td: &TransitionDiagram) -> Result<CmModule> {
    let hom = node_homology(td);
    let maps = (0..td.arrows.len()).map(|a| arrow_matrices(td, &hom, a)).collect::<Result<Vec<_>>>()?;
    for &(a, b) in &td.ideal {
        for (f, g) in maps[a].iter().zip(&maps[b]) {
            ensure(g.mul(f).is_zero(), || "ideal composite is nonzero in homology".into())?;
        }
    }
    Ok(CmModule { ranks: hom.into_iter().map(|h| h.ranks).collect(), maps })
}

/// Chain space of a node in the chosen model.
fn node_space<'a>(c: &'a Complex, td: &TransitionDiagram, n: usize, model: ChainModel) -> Box<dyn ChainSpace + 'a> {
    let pair = &td.nodes[n].pair;
    match model {
        ChainModel::Quotient => Box::new(RelativeSpace::new(c, &pair.p, &pair.e)),
        ChainModel::Coned => Box::new(ConedSpace { complex: c, p: pair.p.clone(), e: pair.e.clone(), reduced: true }),
    }
}

struct Ctx<'a> {
    td: &'a TransitionDiagram,
    frames: &'a [Vec<Frame>],
    model: ChainModel,
    degree: usize,
    /// Nodes of column `t - 1` adjacent to each node, with `true` when the arrow points into the node.
    preds: Vec<Vec<(usize, bool)>>,
    /// Predecessor chosen by the backward walk.
    walk: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
struct LiveBar {
    nodes: Vec<usize>,
    birth_column: usize,
    forward_born: bool,
    rep: Vec2,
    death_column: Option<usize>,
}

impl Ctx<'_> {
    fn frame(&self, n: usize) -> &Frame {
        &self.frames[n][self.degree]
    }

    /// Image of a cycle of `from` in the chain space of `to`, for an arrow `from -> to`.
    fn transfer(&self, z: &Vec2, to: usize) -> Vec2 {
        match self.model {
            ChainModel::Quotient => restrict_chain(z, &self.td.nodes[to].pair.diff()),
            ChainModel::Coned => z.clone(),
        }
    }

    fn coords(&self, n: usize, z: &Vec2) -> Result<Vec2> {
        let mut c = self.frame(n).coords(z)?;
        c.grow(self.frame(n).rank());
        Ok(c)
    }

    fn combine(&self, n: usize, combo: &Vec2) -> Vec2 {
        let f = self.frame(n);
        let mut z = zero(0);
        for k in combo.ones() {
            add_assign(&mut z, &f.reps[k]);
        }
        z
    }

    /// Birth of `bar` seen from the walk ending at `node`: `(forward, column)`.
    fn relative_birth(&self, bar: &LiveBar, node: usize) -> (bool, usize) {
        let mut x = node;
        let mut k = bar.birth_column + bar.nodes.len() - 1;
        loop {
            if k == bar.birth_column {
                return (bar.forward_born, k);
            }
            let prev = bar.nodes[k - 1 - bar.birth_column];
            match self.walk[x] {
                Some(w) if w == prev => {
                    x = w;
                    k -= 1;
                }
                _ => return (false, k),
            }
        }
    }

    /// Bars of `node` from oldest to youngest.
    fn age_order(&self, bars: &[LiveBar], ids: &[usize], node: usize) -> Vec<usize> {
        let mut keyed: Vec<_> = ids
            .iter()
            .map(|&b| {
                let (fwd, s) = self.relative_birth(&bars[b], node);
                let key = if fwd { (1, s as isize, b) } else { (0, -(s as isize), b) };
                (key, b)
            })
            .collect();
        keyed.sort();
        keyed.into_iter().map(|(_, b)| b).collect()
    }
}

/// Result of one zigzag step from node `p` to node `a`.
struct StepOutcome {
    survivors: Vec<(usize, Vec2)>,
    births: Vec<Vec2>,
}

/// Step along `p -> a`: the youngest bar of each vanishing combination ends.
fn forward_step(ctx: &Ctx, bars: &[LiveBar], order: &[usize], a: usize) -> Result<StepOutcome> {
    let mut red = Reducer::new();
    let mut survivors = Vec::new();
    for &b in order {
        let img = ctx.transfer(&bars[b].rep, a);
        let co = ctx.coords(a, &img)?;
        if red.insert(co) {
            survivors.push((b, img));
        }
    }
    let rank = ctx.frame(a).rank();
    let births = (0..rank)
        .filter(|&k| red.insert(unit(rank, k)))
        .map(|k| ctx.frame(a).reps[k].clone())
        .collect();
    Ok(StepOutcome { survivors, births })
}

/// Step along `a -> p`: survivors are the youngest bars of the image, the
/// kernel is born at `a`.
fn backward_step(ctx: &Ctx, bars: &[LiveBar], order: &[usize], p: usize, a: usize) -> Result<StepOutcome> {
    let m = order.len();
    let mut basis = Reducer::new();
    for (pos, &b) in order.iter().enumerate() {
        let co = ctx.coords(p, &bars[b].rep)?;
        let (res, combo) = basis.reduce_tracked(co, unit(m, pos));
        ensure(!res.is_clear(), || "bar representatives are dependent".into())?;
        basis.push(res, combo);
    }
    let ra = ctx.frame(a).rank();
    let mut image = Reducer::new();
    let mut cols: Vec<(Vec2, Vec2)> = Vec::new();
    let mut births = Vec::new();
    for k in 0..ra {
        let img = ctx.coords(p, &ctx.transfer(&ctx.frame(a).reps[k], p))?;
        let (res, mut bar_coords) = basis.reduce_tracked(img, zero(m));
        ensure(res.is_clear(), || "image lies outside the span of the bars".into())?;
        bar_coords.grow(m);
        let (res, combo) = image.reduce_tracked(bar_coords, unit(ra, k));
        if res.is_clear() {
            births.push(ctx.combine(a, &combo));
        } else {
            image.push(res.clone(), combo.clone());
            cols.push((res, combo));
        }
    }
    // Clear every column at the pivots of the others so each survivor maps to
    // itself plus ending bars only.
    cols.sort_by_key(|(v, _)| v.maximum());
    let pivots: Vec<usize> = cols.iter().map(|(v, _)| v.maximum().expect("nonzero")).collect();
    for i in 0..cols.len() {
        for j in (0..i).rev() {
            if cols[i].0.contains(pivots[j]) {
                let (vj, cj) = cols[j].clone();
                add_assign(&mut cols[i].0, &vj);
                add_assign(&mut cols[i].1, &cj);
            }
        }
    }
    let survivors = cols.iter().zip(&pivots).map(|((_, combo), &piv)| (order[piv], ctx.combine(a, combo))).collect();
    Ok(StepOutcome { survivors, births })
}

/// Bars of one degree, in creation order.
fn run_degree(td: &TransitionDiagram, node_frames: &[Vec<Frame>], model: ChainModel, degree: usize) -> Result<Vec<LiveBar>> {
    let n = td.nodes.len();
    let mut preds = vec![Vec::new(); n];
    for ar in &td.arrows {
        let (cf, ct) = (td.nodes[ar.from].column, td.nodes[ar.to].column);
        if ct == cf + 1 {
            preds[ar.to].push((ar.from, true));
        } else {
            preds[ar.from].push((ar.to, false));
        }
    }
    let walk = preds
        .iter()
        .map(|ps: &Vec<(usize, bool)>| match ps.len() {
            0 => Ok(None),
            1 => Ok(Some(ps[0].0)),
            2 => ps
                .iter()
                .find(|(_, into)| !into)
                .map(|&(x, _)| Some(x))
                .ok_or_else(|| Error::Internal("node has two predecessors pointing into it".into())),
            _ => Err(Error::Internal("node has more than two predecessors".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx { td, frames: node_frames, model, degree, preds, walk };
    let mut bars: Vec<LiveBar> = Vec::new();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let born = |bars: &mut Vec<LiveBar>, at: &mut Vec<Vec<usize>>, node: usize, col: usize, fwd: bool, rep: Vec2| {
        at[node].push(bars.len());
        bars.push(LiveBar { nodes: vec![node], birth_column: col, forward_born: fwd, rep, death_column: None });
    };
    for &x in td.columns.first().map(Vec::as_slice).unwrap_or(&[]) {
        for z in ctx.frame(x).reps.clone() {
            born(&mut bars, &mut at, x, 0, true, z);
        }
    }
    for t in 0..td.columns.len().saturating_sub(1) {
        let mut continued: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut moves: Vec<(usize, usize, Vec2)> = Vec::new();
        let mut new_bars: Vec<(usize, bool, Vec2)> = Vec::new();
        for &a in &td.columns[t + 1] {
            let ps = &ctx.preds[a];
            let mut arrivals = 0;
            for &(p, into) in ps {
                let order = ctx.age_order(&bars, &at[p], p);
                let out = if into { forward_step(&ctx, &bars, &order, a)? } else { backward_step(&ctx, &bars, &order, p, a)? };
                arrivals += out.survivors.len();
                for (b, rep) in out.survivors {
                    continued[b].push(a);
                    moves.push((b, a, rep));
                }
                if ps.len() == 1 {
                    new_bars.extend(out.births.into_iter().map(|z| (a, into, z)));
                }
            }
            match ps.len() {
                0 => new_bars.extend(ctx.frame(a).reps.iter().map(|z| (a, true, z.clone()))),
                1 => {}
                _ => {
                    ensure(arrivals == ctx.frame(a).rank(), || {
                        format!("merge at {} carries {arrivals} bars for rank {}", td.node_name(a), ctx.frame(a).rank())
                    })?;
                    let mut red = Reducer::new();
                    for (_, x, rep) in moves.iter().filter(|m| m.1 == a) {
                        ensure(red.insert(ctx.coords(*x, rep)?), || {
                            format!("merged bars at {} are dependent", td.node_name(a))
                        })?;
                    }
                }
            }
        }
        for (b, cont) in continued.iter().enumerate() {
            ensure(cont.len() <= 1, || format!("bar {b} continues into two branches at column {t}"))?;
        }
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (b, a, rep) in moves {
            bars[b].nodes.push(a);
            bars[b].rep = rep;
            next[a].push(b);
        }
        for &p in &td.columns[t] {
            for &b in &at[p] {
                if continued[b].is_empty() {
                    bars[b].death_column = Some(t);
                }
            }
        }
        for (a, fwd, z) in new_bars {
            born(&mut bars, &mut next, a, t + 1, fwd, z);
        }
        at = next;
    }
    Ok(bars)
}

fn frames_for(td: &TransitionDiagram, model: ChainModel) -> Vec<Vec<Frame>> {
    let c = &td.complex;
    td.nodes
        .par_iter()
        .enumerate()
        .map(|(n, _)| frames(node_space(c, td, n, model).as_ref(), c.max_dim()))
        .collect()
}

/// Decomposes the homology of a checked diagram into bars with full node paths.
pub fn compute_barcode(td: &TransitionDiagram, opts: EngineOptions) -> Result<Barcode> {
    let node_frames = frames_for(td, opts.model);
    let degrees = if td.nodes.is_empty() { 0 } else { td.complex.max_dim() + 1 };
    let per_degree: Vec<Vec<LiveBar>> = (0..degrees)
        .into_par_iter()
        .map(|d| run_degree(td, &node_frames, opts.model, d))
        .collect::<Result<_>>()?;
    let last = td.columns.len().saturating_sub(1);
    let mut out = Vec::new();
    for (d, bars) in per_degree.into_iter().enumerate() {
        for lb in bars {
            let death_column = lb.death_column.unwrap_or(last);
            out.push(Bar {
                id: 0,
                degree: d,
                birth: td.column_to_lambda[lb.birth_column],
                death: lb.death_column.map(|t| td.column_to_lambda[t]),
                path: lb.nodes.iter().map(|&x| (td.nodes[x].column, td.nodes[x].label.clone())).collect(),
                nodes: lb.nodes,
                birth_column: lb.birth_column,
                death_column,
            });
        }
    }
    out.sort_by(|a, b| {
        (a.degree, a.birth_column, Reverse(a.death_column), &a.path).cmp(&(b.degree, b.birth_column, Reverse(b.death_column), &b.path))
    });
    for (i, b) in out.iter_mut().enumerate() {
        b.id = i;
    }
    let mut bc = Barcode { bars: out, couplings: Vec::new() };
    if opts.debug_invariants {
        check_frames(td, &node_frames, opts.model)?;
        check_conservation(&bc, td)?;
    }
    bc.couplings = coupling_report(&bc, td)?;
    Ok(bc)
}

/// `∂ chains = boundaries` for every node and degree.
fn check_frames(td: &TransitionDiagram, node_frames: &[Vec<Frame>], model: ChainModel) -> Result<()> {
    for (n, fs) in node_frames.iter().enumerate() {
        let space = node_space(&td.complex, td, n, model);
        for f in fs {
            for (c, b) in f.chains.iter().zip(&f.boundaries) {
                let mut bd = zero(space.universe());
                for s in c.ones() {
                    add_assign(&mut bd, &space.boundary(s));
                }
                let mut want = b.clone();
                want.grow(space.universe());
                // Stored boundaries are reduced; their chains reproduce them exactly.
                ensure(bd == want, || format!("chain/boundary mismatch at {}", td.node_name(n)))?;
            }
        }
    }
    Ok(())
}

/// Bars through each node match its ranks, and bars across each arrow match the arrow's rank.
pub fn check_conservation(bc: &Barcode, td: &TransitionDiagram) -> Result<()> {
    let module = cm_module(td)?;
    let degrees = module.ranks.first().map_or(0, Vec::len);
    for d in 0..degrees {
        let mut through = vec![0usize; td.nodes.len()];
        let mut across = vec![0usize; td.arrows.len()];
        let arrow_of = |x: usize, y: usize| td.arrows.iter().position(|a| (a.from == x && a.to == y) || (a.from == y && a.to == x));
        for b in bc.of_degree(d) {
            for &x in &b.nodes {
                through[x] += 1;
            }
            for w in b.nodes.windows(2) {
                let a = arrow_of(w[0], w[1]).ok_or_else(|| Error::Internal("bar steps between non-adjacent nodes".into()))?;
                across[a] += 1;
            }
        }
        for (x, &k) in through.iter().enumerate() {
            ensure(k == module.ranks[x][d], || {
                format!("{} bars of degree {d} pass {} of rank {}", k, td.node_name(x), module.ranks[x][d])
            })?;
        }
        for (a, &k) in across.iter().enumerate() {
            ensure(k == module.maps[a][d].rank(), || format!("degree {d} arrow {a}: {k} bars for rank {}", module.maps[a][d].rank()))?;
        }
    }
    Ok(())
}

/// Births and deaths at each AR-split, paired across adjacent degrees.
pub fn coupling_report(bc: &Barcode, td: &TransitionDiagram) -> Result<Vec<SplitCoupling>> {
    let c = &td.complex;
    let mut out = Vec::new();
    for (si, s) in td.splits.iter().enumerate() {
        let events = |node: usize, d: usize| -> Vec<usize> {
            bc.of_degree(d)
                .filter(|b| match s.kind {
                    StepKind::Refinement => b.birth_column == s.column + 1 && b.nodes[0] == node,
                    StepKind::Coarsening => {
                        b.death_column == s.column && b.nodes.last() == Some(&node) && b.death.is_some()
                    }
                })
                .map(|b| b.id)
                .collect()
        };
        for d in 1..=c.max_dim() {
            let rep = events(s.repeller, d);
            let att = events(s.attractor, d - 1);
            if rep.is_empty() && att.is_empty() {
                continue;
            }
            let connecting = les_connecting(c, &s.triple.n0, &s.triple.n1, &s.triple.n2, d)?;
            let coupled = (rep.len() == 1 && att.len() == 1 && connecting.rank() >= 1).then(|| (rep[0], att[0]));
            out.push(SplitCoupling {
                split: si,
                kind: s.kind,
                column: s.column,
                lambda: td.column_to_lambda[s.column],
                degree: d,
                repeller_events: rep.len(),
                attractor_events: att.len(),
                coupled,
                connecting,
            });
        }
    }
    Ok(out)
}

/// Outcome of the structural checks on a barcode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub bars: usize,
    pub splits_checked: usize,
}

/// No column is revisited and λ never decreases along a bar; births happen only
/// at refinements and deaths only at coarsenings; split events pair up across
/// adjacent degrees.
pub fn theorem_checks(bc: &Barcode, td: &TransitionDiagram) -> Result<TheoremReport> {
    let last = td.columns.len().saturating_sub(1);
    for b in &bc.bars {
        for (i, &x) in b.nodes.iter().enumerate() {
            ensure(td.nodes[x].column == b.birth_column + i, || format!("bar {} skips or revisits a column", b.id))?;
        }
        for w in b.nodes.windows(2) {
            let (l0, l1) = (td.column_to_lambda[td.nodes[w[0]].column], td.column_to_lambda[td.nodes[w[1]].column]);
            ensure(l0 <= l1, || format!("bar {} goes back in λ", b.id))?;
        }
        if b.birth_column > 0 {
            let st = td.column_steps[b.birth_column - 1];
            ensure(st == ColumnStep::Refinement, || format!("bar {} is born at a {st:?} boundary", b.id))?;
        }
        if b.death.is_some() && b.death_column < last {
            let st = td.column_steps[b.death_column];
            ensure(st == ColumnStep::Coarsening, || format!("bar {} dies at a {st:?} boundary", b.id))?;
        }
    }
    for cp in &bc.couplings {
        ensure(cp.repeller_events == cp.attractor_events, || {
            format!(
                "split {} in degree {}: {} repeller events against {} attractor events",
                cp.split, cp.degree, cp.repeller_events, cp.attractor_events
            )
        })?;
    }
    Ok(TheoremReport { bars: bc.bars.len(), splits_checked: td.splits.len() })
}

/// Orientation of one arrow of a fence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenceArrow {
    /// `V_i -> V_{i+1}` when true, `V_{i+1} -> V_i` otherwise.
    pub forward: bool,
    pub matrix: Mat2,
}

/// Zigzag module on a fence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenceModule {
    pub dims: Vec<usize>,
    pub arrows: Vec<FenceArrow>,
}

impl FenceModule {
    /// Reads off one degree of a diagram whose columns hold one node each.
    pub fn from_diagram(td: &TransitionDiagram, module: &CmModule, degree: usize) -> Result<FenceModule> {
        ensure(td.columns.iter().all(|c| c.len() == 1), || "diagram is not a fence".into())?;
        ensure(td.arrows.len() + 1 == td.columns.len(), || "diagram is not a fence".into())?;
        let dims = td.columns.iter().map(|c| module.ranks[c[0]][degree]).collect();
        let mut arrows = Vec::new();
        for t in 0..td.columns.len().saturating_sub(1) {
            let (x, y) = (td.columns[t][0], td.columns[t + 1][0]);
            let a = td
                .arrows
                .iter()
                .position(|a| (a.from == x && a.to == y) || (a.from == y && a.to == x))
                .ok_or_else(|| Error::Precondition("fence has a missing arrow".into()))?;
            arrows.push(FenceArrow { forward: td.arrows[a].from == x, matrix: module.maps[a][degree].clone() });
        }
        Ok(FenceModule { dims, arrows })
    }
}

/// Interval multiset of a fence module, by inclusion-exclusion over the
/// number of bars covering each sub-fence.
///
/// A bar covers `[i, j]` iff it contributes to the rank of the map from the
/// limit to the colimit of the restriction to `[i, j]`.
pub fn oracle_barcode(m: &FenceModule) -> Result<Vec<(usize, usize)>> {
    let len = m.dims.len();
    ensure(m.arrows.len() + 1 == len || len == 0, || "fence needs one arrow between neighbours".into())?;
    for (i, a) in m.arrows.iter().enumerate() {
        let (src, dst) = if a.forward { (i, i + 1) } else { (i + 1, i) };
        if a.matrix.ncols() != m.dims[src] || a.matrix.rows != m.dims[dst] {
            return Err(Error::Precondition(format!("arrow {i} has the wrong shape")));
        }
    }
    let mut r = vec![vec![0usize; len]; len];
    for i in 0..len {
        for j in i..len {
            r[i][j] = cover_rank(m, i, j);
        }
    }
    let at = |i: isize, j: usize| if i < 0 || j >= len { 0 } else { r[i as usize][j] as isize };
    let mut out = Vec::new();
    for i in 0..len {
        for j in i..len {
            let mult = at(i as isize, j) - at(i as isize - 1, j) - at(i as isize, j + 1) + at(i as isize - 1, j + 1);
            ensure(mult >= 0, || "negative interval multiplicity".into())?;
            out.extend(std::iter::repeat_n((i, j), mult as usize));
        }
    }
    Ok(out)
}

/// Rank of `lim -> colim` for the restriction to `[i, j]`.
fn cover_rank(m: &FenceModule, i: usize, j: usize) -> usize {
    let offs: Vec<usize> = (i..=j)
        .scan(0, |acc, k| {
            let o = *acc;
            *acc += m.dims[k];
            Some(o)
        })
        .collect();
    let total: usize = (i..=j).map(|k| m.dims[k]).sum();
    if total == 0 {
        return 0;
    }
    // Constraints: for each arrow src -> dst, f(v_src) + v_dst = 0.
    let mut constraint_rows: Vec<Vec2> = Vec::new();
    let mut relations: Vec<Vec2> = Vec::new();
    for k in i..j {
        let a = &m.arrows[k];
        let (src, dst) = if a.forward { (k, k + 1) } else { (k + 1, k) };
        for row in 0..m.dims[dst] {
            let mut v = zero(total);
            for col in 0..m.dims[src] {
                if a.matrix.get(row, col) {
                    v.insert(offs[src - i] + col);
                }
            }
            v.insert(offs[dst - i] + row);
            constraint_rows.push(v);
        }
        for col in 0..m.dims[src] {
            let mut v = zero(total);
            v.insert(offs[src - i] + col);
            add_assign(&mut v, &embed(&a.matrix.cols[col], offs[dst - i], total));
            relations.push(v);
        }
    }
    // Limit: kernel of the constraint system.
    let cons = Mat2 { rows: constraint_rows.len(), cols: (0..total).map(|c| {
        let mut col = zero(constraint_rows.len());
        for (r, row) in constraint_rows.iter().enumerate() {
            if row.contains(c) {
                col.insert(r);
            }
        }
        col
    }).collect() };
    let limit = cons.kernel();
    let mut rel = Reducer::new();
    for v in relations {
        rel.insert(v);
    }
    // Send a limit element to the colimit through its first component.
    let d0 = m.dims[i];
    limit
        .iter()
        .filter(|v| {
            let mut e = zero(total);
            for b in v.ones().filter(|&b| b < d0) {
                e.insert(b);
            }
            rel.insert(e)
        })
        .count()
}

fn embed(v: &Vec2, off: usize, total: usize) -> Vec2 {
    let mut out = zero(total);
    for b in v.ones() {
        out.insert(off + b);
    }
    out
}

/// Everything the pipeline produces for one parameterized field.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub filtration: ZigzagBlockFiltration,
    pub diagram: TransitionDiagram,
    pub barcode: Barcode,
}

/// Filtration, checked diagram, barcode, and the structural checks on the barcode.
pub fn pipeline(pm: &ParameterizedMVF, policy: CascadePolicy, opts: EngineOptions) -> Result<PipelineOutput> {
    let (filtration, diagram) = build_diagram(pm, policy)?;
    check_diagram(&diagram)?;
    let barcode = compute_barcode(&diagram, opts)?;
    theorem_checks(&barcode, &diagram)?;
    Ok(PipelineOutput { filtration, diagram, barcode })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fence(dims: Vec<usize>, arrows: Vec<(bool, Vec<Vec<u8>>)>) -> FenceModule {
        let arrows = arrows
            .into_iter()
            .enumerate()
            .map(|(i, (forward, rows))| {
                let (src, dst) = if forward { (i, i + 1) } else { (i + 1, i) };
                let mut m = Mat2::from_rows(&rows, dims[src]);
                m.rows = dims[dst];
                FenceArrow { forward, matrix: m }
            })
            .collect();
        FenceModule { dims, arrows }
    }

    #[test]
    fn oracle_recovers_single_interval() {
        // 0 <- k <- k -> k <- 0
        let m = fence(
            vec![0, 1, 1, 1, 0],
            vec![(false, vec![]), (false, vec![vec![1]]), (true, vec![vec![1]]), (false, vec![vec![]])],
        );
        assert_eq!(oracle_barcode(&m).unwrap(), vec![(1, 3)]);
    }

    #[test]
    fn oracle_zero_module() {
        let m = fence(vec![0, 0, 0], vec![(true, vec![]), (false, vec![])]);
        assert!(oracle_barcode(&m).unwrap().is_empty());
    }

    #[test]
    fn oracle_direct_sum() {
        // k -> k^2 <- k with images on different axes: two intervals [0,1], [1,2].
        let m = fence(vec![1, 2, 1], vec![(true, vec![vec![1], vec![0]]), (false, vec![vec![0], vec![1]])]);
        let mut got = oracle_barcode(&m).unwrap();
        got.sort();
        assert_eq!(got, vec![(0, 1), (1, 2)]);
        // Same images: one long bar and one short bar in the middle.
        let m = fence(vec![1, 2, 1], vec![(true, vec![vec![1], vec![0]]), (false, vec![vec![1], vec![0]])]);
        let mut got = oracle_barcode(&m).unwrap();
        got.sort();
        assert_eq!(got, vec![(0, 2), (1, 1)]);
    }
}
