//! Seeded random complexes, fields, parameter sequences and fence diagrams.
#![allow(dead_code)]

use std::sync::Arc;

use cmb_core::complex::{CellSet, CellSpec, Complex};
use cmb_core::dynamics::IndexPair;
use cmb_core::homology::relative_ranks;
use cmb_core::mvf::MultivectorField;
use cmb_core::transition::{Arrow, ColumnStep, Node, TransitionDiagram};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spec(id: String, dim: usize, facets: Vec<String>) -> CellSpec {
    CellSpec { id, dim, facets }
}

/// Random simplicial 2-complex from `tris` triangles and `edges` extra edges on `verts` vertices.
pub fn random_complex(r: &mut impl Rng, verts: usize, tris: usize, edges: usize) -> Complex {
    let name = |v: &[usize]| v.iter().map(|&i| format!("v{i}")).collect::<Vec<_>>().join("");
    let mut simplices: std::collections::BTreeSet<Vec<usize>> = (0..verts).map(|v| vec![v]).collect();
    if verts >= 3 {
        for _ in 0..tris {
            let mut t: Vec<usize> = (0..verts).collect::<Vec<_>>().choose_multiple(r, 3).copied().collect();
            t.sort();
            for drop in 0..3 {
                let mut e = t.clone();
                e.remove(drop);
                simplices.insert(e);
            }
            simplices.insert(t);
        }
    }
    if verts >= 2 {
        for _ in 0..edges {
            let mut e: Vec<usize> = (0..verts).collect::<Vec<_>>().choose_multiple(r, 2).copied().collect();
            e.sort();
            simplices.insert(e);
        }
    }
    let specs: Vec<CellSpec> = simplices
        .iter()
        .map(|s| {
            let facets = if s.len() == 1 {
                Vec::new()
            } else {
                (0..s.len()).map(|k| {
                    let mut f = s.clone();
                    f.remove(k);
                    name(&f)
                }).collect()
            };
            spec(name(s), s.len() - 1, facets)
        })
        .collect();
    Complex::build(&specs).expect("generated complex is valid")
}

/// Triangulated `k x k` grid of squares: `(k+1)^2 + 3k^2 + 2k(k+1)` cells.
pub fn grid_complex(k: usize) -> Complex {
    let v = |i: usize, j: usize| format!("p{i}_{j}");
    let mut specs = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            specs.push(spec(v(i, j), 0, vec![]));
        }
    }
    let edge = |a: String, b: String| format!("e[{a}|{b}]");
    let push_edge = |specs: &mut Vec<CellSpec>, a: String, b: String| {
        specs.push(spec(edge(a.clone(), b.clone()), 1, vec![a, b]));
    };
    for i in 0..=k {
        for j in 0..=k {
            if i < k {
                push_edge(&mut specs, v(i, j), v(i + 1, j));
            }
            if j < k {
                push_edge(&mut specs, v(i, j), v(i, j + 1));
            }
            if i < k && j < k {
                push_edge(&mut specs, v(i, j), v(i + 1, j + 1));
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            let diag = edge(v(i, j), v(i + 1, j + 1));
            specs.push(spec(
                format!("t[{i},{j}]a"),
                2,
                vec![edge(v(i, j), v(i + 1, j)), edge(v(i + 1, j), v(i + 1, j + 1)), diag.clone()],
            ));
            specs.push(spec(
                format!("t[{i},{j}]b"),
                2,
                vec![edge(v(i, j), v(i, j + 1)), edge(v(i, j + 1), v(i + 1, j + 1)), diag],
            ));
        }
    }
    Complex::build(&specs).expect("grid is valid")
}

fn neighbours(c: &Complex, x: usize) -> Vec<usize> {
    c.faces_of(x).iter().chain(c.cofaces_of(x)).copied().collect()
}

/// Random partition into locally closed multivectors of at most `max_size` cells.
pub fn random_field(r: &mut impl Rng, c: &Arc<Complex>, max_size: usize) -> MultivectorField {
    let n = c.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut taken = vec![false; n];
    let mut parts = Vec::new();
    for &x in &order {
        if taken[x] {
            continue;
        }
        let mut part = CellSet::from_indices(n, [x]);
        taken[x] = true;
        let target = r.gen_range(1..=max_size);
        let mut tries = 0;
        while part.len() < target && tries < 8 {
            tries += 1;
            let cands: Vec<usize> =
                part.iter().flat_map(|y| neighbours(c, y)).filter(|&y| !taken[y]).collect();
            let Some(&y) = cands.choose(r) else { break };
            let mut grown = part.clone();
            grown.insert(y);
            if c.is_locally_closed(&grown) {
                part = grown;
                taken[y] = true;
            }
        }
        parts.push(part);
    }
    MultivectorField::build(c.clone(), &parts).expect("generated field is valid")
}

/// Merge two touching multivectors whose union is locally closed, if any pair qualifies.
pub fn coarsen(r: &mut impl Rng, v: &MultivectorField) -> Option<MultivectorField> {
    let c = v.complex_arc().clone();
    let mut pairs = Vec::new();
    for m in 0..v.len() {
        for &x in v.members(m) {
            for y in neighbours(&c, x) {
                let k = v.multivector_of(y);
                if k > m {
                    pairs.push((m, k));
                }
            }
        }
    }
    pairs.sort();
    pairs.dedup();
    pairs.shuffle(r);
    for (a, b) in pairs {
        let u = v.multivector(a).union(v.multivector(b));
        if c.is_locally_closed(&u) {
            let mut parts: Vec<CellSet> =
                (0..v.len()).filter(|&m| m != a && m != b).map(|m| v.multivector(m).clone()).collect();
            parts.push(u);
            return MultivectorField::build(c, &parts).ok();
        }
    }
    None
}

/// Fence-compatible sequence of `len` fields: a random walk of merges and undoing merges.
pub fn random_sequence(r: &mut impl Rng, c: &Arc<Complex>, len: usize, max_size: usize) -> Vec<MultivectorField> {
    let mut stack = vec![random_field(r, c, max_size)];
    let mut out = vec![stack[0].clone()];
    while out.len() < len {
        let top = stack.last().expect("nonempty").clone();
        let roll: f64 = r.gen();
        if roll < 0.15 {
            out.push(top);
        } else if roll < 0.45 && stack.len() > 1 {
            stack.pop();
            out.push(stack.last().expect("nonempty").clone());
        } else if let Some(w) = coarsen(r, &top).and_then(|w| coarsen(r, &w).or(Some(w))) {
            stack.push(w.clone());
            out.push(w);
        } else if stack.len() > 1 {
            stack.pop();
            out.push(stack.last().expect("nonempty").clone());
        } else {
            out.push(top);
        }
    }
    out
}

/// Random union of multivectors that is locally closed; `None` after repeated rejection.
pub fn random_block(r: &mut impl Rng, v: &MultivectorField) -> Option<CellSet> {
    let c = v.complex();
    for _ in 0..50 {
        let m0 = r.gen_range(0..v.len());
        let mut b = v.multivector(m0).clone();
        let steps = r.gen_range(0..5);
        for _ in 0..steps {
            let cands: Vec<usize> = b.iter().flat_map(|x| neighbours(c, x)).filter(|&y| !b.contains(y)).collect();
            let Some(&y) = cands.choose(r) else { break };
            b.union_with(v.multivector(v.multivector_of(y)));
        }
        if v.is_isolating_block(&b) {
            return Some(b);
        }
    }
    None
}

fn random_closed_subset(r: &mut impl Rng, c: &Complex, within: &CellSet, p: f64) -> CellSet {
    let picks = CellSet::from_indices(c.len(), within.iter().filter(|_| r.gen_bool(p)));
    c.closure(&picks)
}

fn small_enough(c: &Complex, pair: &IndexPair, max_rank: usize) -> bool {
    relative_ranks(c, &pair.p, &pair.e).iter().all(|&k| k <= max_rank)
}

/// Fence of `len` index pairs on one complex, each adjacent pair related by inclusion in a random direction.
pub fn random_fence(r: &mut impl Rng, c: Arc<Complex>, len: usize, max_rank: usize) -> TransitionDiagram {
    let full = c.full_set();
    let mut pairs: Vec<IndexPair> = Vec::new();
    let mut arrows = Vec::new();
    let start = loop {
        let p = random_closed_subset(r, &c, &full, 0.3);
        let e = random_closed_subset(r, &c, &p, 0.3);
        let pair = IndexPair::new(p, e);
        if small_enough(&c, &pair, max_rank) {
            break pair;
        }
    };
    pairs.push(start);
    for t in 1..len {
        let prev = pairs[t - 1].clone();
        let forward = r.gen_bool(0.5);
        let next = (0..30)
            .map(|_| {
                if forward {
                    let p = prev.p.union(&random_closed_subset(r, &c, &full, 0.15));
                    let e = prev.e.union(&random_closed_subset(r, &c, &p, 0.15));
                    IndexPair::new(p, e)
                } else {
                    let p = random_closed_subset(r, &c, &prev.p, 0.6);
                    let e = random_closed_subset(r, &c, &prev.e.intersection(&p), 0.6);
                    IndexPair::new(p, e)
                }
            })
            .find(|pair| small_enough(&c, pair, max_rank))
            .unwrap_or_else(|| prev.clone());
        arrows.push(if forward { Arrow { from: t - 1, to: t } } else { Arrow { from: t, to: t - 1 } });
        pairs.push(next);
    }
    let nodes = pairs
        .into_iter()
        .enumerate()
        .map(|(t, pair)| Node { pair, column: t, stage: t, block: 0, label: format!("n{t}") })
        .collect();
    TransitionDiagram {
        complex: c,
        nodes,
        arrows,
        ideal: Vec::new(),
        column_to_lambda: (0..len).collect(),
        columns: (0..len).map(|t| vec![t]).collect(),
        column_steps: vec![ColumnStep::Internal; len.saturating_sub(1)],
        splits: Vec::new(),
        cascade_log: Vec::new(),
    }
}
