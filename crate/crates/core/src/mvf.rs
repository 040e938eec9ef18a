//! Combinatorial multivector fields and the refinement relation between them.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::complex::{CellIdx, CellSet, Complex};
use crate::error::{Error, Result};
use crate::homology::relative_ranks;

/// Index of a multivector in the order of minimal cells.
pub type MvIdx = usize;

/// External description of a field: a list of multivectors given by cell labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub multivectors: Vec<Vec<String>>,
}

/// Partition of a complex into locally closed multivectors.
///
/// Multivectors are numbered by increasing minimal cell; `assignment[x]` is the
/// multivector holding cell `x`.
#[derive(Debug)]
pub struct MultivectorField {
    complex: Arc<Complex>,
    assignment: Vec<MvIdx>,
    members: Vec<Vec<CellIdx>>,
    sets: Vec<CellSet>,
    critical: Vec<OnceLock<bool>>,
}

impl Clone for MultivectorField {
    fn clone(&self) -> Self {
        MultivectorField {
            complex: self.complex.clone(),
            assignment: self.assignment.clone(),
            members: self.members.clone(),
            sets: self.sets.clone(),
            critical: self
                .critical
                .iter()
                .map(|c| {
                    let l = OnceLock::new();
                    if let Some(&v) = c.get() {
                        let _ = l.set(v);
                    }
                    l
                })
                .collect(),
        }
    }
}

impl PartialEq for MultivectorField {
    fn eq(&self, o: &Self) -> bool {
        same_complex(&self.complex, &o.complex) && self.assignment == o.assignment
    }
}

fn same_complex(a: &Arc<Complex>, b: &Arc<Complex>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Outcome of comparing two fields under inscription.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Every multivector of the first field lies in one of the second.
    Refines,
    Coarsens,
    Equal,
    Incomparable,
}

/// Edge list of the digraph of `F_V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDigraph {
    pub nodes: Vec<CellIdx>,
    pub edges: Vec<(CellIdx, CellIdx)>,
}

impl MultivectorField {
    /// Validates a partition given as cell sets.
    pub fn build(complex: Arc<Complex>, parts: &[CellSet]) -> Result<MultivectorField> {
        let n = complex.len();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (k, part) in parts.iter().enumerate() {
            complex.check_member(part)?;
            if part.is_empty() {
                return Err(Error::NotPartition(format!("part {k} is empty")));
            }
            for x in part.iter() {
                if owner[x].is_some() {
                    return Err(Error::NotPartition(format!("cell `{}` lies in two multivectors", complex.id(x))));
                }
                owner[x] = Some(k);
            }
        }
        if let Some(x) = owner.iter().position(Option::is_none) {
            return Err(Error::NotPartition(format!("cell `{}` is in no multivector", complex.id(x))));
        }
        let mut sets: Vec<CellSet> = parts.to_vec();
        sets.sort_by_key(|s| s.first());
        for s in &sets {
            if !complex.is_locally_closed(s) {
                return Err(Error::NotLocallyClosed(complex.id(s.first().unwrap_or(0)).to_string()));
            }
        }
        let mut assignment = vec![0; n];
        let members: Vec<Vec<CellIdx>> = sets.iter().map(|s| s.iter().collect()).collect();
        for (m, mem) in members.iter().enumerate() {
            for &x in mem {
                assignment[x] = m;
            }
        }
        let critical = (0..sets.len()).map(|_| OnceLock::new()).collect();
        Ok(MultivectorField { complex, assignment, members, sets, critical })
    }

    pub fn from_spec(complex: Arc<Complex>, spec: &FieldSpec) -> Result<MultivectorField> {
        let parts = spec
            .multivectors
            .iter()
            .map(|m| complex.set_from_ids(m))
            .collect::<Result<Vec<_>>>()?;
        Self::build(complex, &parts)
    }

    pub fn to_spec(&self) -> FieldSpec {
        FieldSpec { multivectors: self.sets.iter().map(|s| self.complex.ids(s)).collect() }
    }

    /// Every cell its own multivector.
    pub fn singletons(complex: Arc<Complex>) -> MultivectorField {
        let parts: Vec<CellSet> = (0..complex.len()).map(|i| CellSet::from_indices(complex.len(), [i])).collect();
        Self::build(complex, &parts).expect("singletons are locally closed")
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn complex_arc(&self) -> &Arc<Complex> {
        &self.complex
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn multivector_of(&self, x: CellIdx) -> MvIdx {
        self.assignment[x]
    }

    pub fn multivector(&self, m: MvIdx) -> &CellSet {
        &self.sets[m]
    }

    pub fn members(&self, m: MvIdx) -> &[CellIdx] {
        &self.members[m]
    }

    pub fn multivectors(&self) -> &[CellSet] {
        &self.sets
    }

    /// Label of a multivector: its minimal cell.
    pub fn label(&self, m: MvIdx) -> &str {
        self.complex.id(self.members[m][0])
    }

    /// `F_V(x) = cl x ∪ [x]_V`.
    pub fn fv(&self, x: CellIdx) -> CellSet {
        let mut s = CellSet::from_indices(self.complex.len(), self.complex.faces_of(x).iter().copied());
        for &y in &self.members[self.assignment[x]] {
            s.insert(y);
        }
        s
    }

    pub fn fv_by_id(&self, id: &str) -> Result<CellSet> {
        Ok(self.fv(self.complex.lookup(id)?))
    }

    /// Out-neighbours of `x` in the flow digraph (may repeat `x`).
    pub fn successors(&self, x: CellIdx) -> impl Iterator<Item = CellIdx> + '_ {
        self.complex.faces_of(x).iter().chain(self.members[self.assignment[x]].iter()).copied()
    }

    /// In-neighbours of `x` in the flow digraph (may repeat `x`).
    pub fn predecessors(&self, x: CellIdx) -> impl Iterator<Item = CellIdx> + '_ {
        self.complex.cofaces_of(x).iter().chain(self.members[self.assignment[x]].iter()).copied()
    }

    /// `H(cl V, mo V) != 0`, memoized.
    pub fn is_critical(&self, m: MvIdx) -> Result<bool> {
        let cell = self.critical.get(m).ok_or(Error::UnknownMultivector(m))?;
        Ok(*cell.get_or_init(|| {
            let v = &self.sets[m];
            let cl = self.complex.closure(v);
            let mo = cl.difference(v);
            relative_ranks(&self.complex, &cl, &mo).iter().any(|&r| r > 0)
        }))
    }

    /// Ranks of `H(cl V, mo V)`.
    pub fn multivector_index(&self, m: MvIdx) -> Vec<usize> {
        let v = &self.sets[m];
        let cl = self.complex.closure(v);
        relative_ranks(&self.complex, &cl, &cl.difference(v))
    }

    /// Union of multivectors.
    pub fn is_v_compatible(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.members[self.assignment[x]].iter().all(|&y| a.contains(y)))
    }

    /// Locally closed and V-compatible.
    pub fn is_isolating_block(&self, a: &CellSet) -> bool {
        self.complex.is_locally_closed(a) && self.is_v_compatible(a)
    }

    /// True when the multivector is disconnected as a subspace.
    pub fn is_disconnected(&self, m: MvIdx) -> bool {
        let mem = &self.members[m];
        let mut parent: Vec<usize> = (0..mem.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..mem.len() {
            for j in 0..i {
                if self.complex.le(mem[i], mem[j]) || self.complex.le(mem[j], mem[i]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..mem.len()).any(|i| find(&mut parent, i) != root)
    }

    /// Materialized flow digraph with deduplicated edges (self-loops included).
    pub fn flow_digraph(&self) -> FlowDigraph {
        let mut edges = Vec::new();
        for x in 0..self.complex.len() {
            let mut out: Vec<CellIdx> = self.successors(x).collect();
            out.sort_unstable();
            out.dedup();
            edges.extend(out.into_iter().map(|y| (x, y)));
        }
        FlowDigraph { nodes: (0..self.complex.len()).collect(), edges }
    }

    /// Inscription relation `self ⊑ other` and its converse.
    pub fn refinement_relation(&self, other: &MultivectorField) -> Result<Refinement> {
        if !same_complex(&self.complex, &other.complex) {
            return Err(Error::DifferentComplexes);
        }
        let fine = inscribed(self, other);
        let coarse = inscribed(other, self);
        Ok(match (fine, coarse) {
            (true, true) => Refinement::Equal,
            (true, false) => Refinement::Refines,
            (false, true) => Refinement::Coarsens,
            (false, false) => Refinement::Incomparable,
        })
    }
}

/// Every multivector of `a` lies inside one multivector of `b`.
fn inscribed(a: &MultivectorField, b: &MultivectorField) -> bool {
    a.members.iter().all(|mem| mem.iter().all(|&x| b.assignment[x] == b.assignment[mem[0]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn first_example_field() {
        let (c, fs) = fixtures::first_example();
        let v = &fs[0];
        assert_eq!(v.len(), 10);
        assert_eq!(v.fv_by_id("f").unwrap(), c.set_from_ids(&["f"]).unwrap());
        let crit: Vec<&str> =
            (0..v.len()).filter(|&m| v.is_critical(m).unwrap()).map(|m| v.label(m)).collect();
        assert_eq!(crit, vec!["f", "ef", "abc"]);
    }

    #[test]
    fn triangle_fields() {
        let c = Arc::new(fixtures::triangle());
        let s = |ids: &[&str]| c.set_from_ids(ids).unwrap();
        let bad = [s(&["a", "abc"]), s(&["b"]), s(&["c"]), s(&["ab"]), s(&["ac"]), s(&["bc"])];
        assert!(matches!(MultivectorField::build(c.clone(), &bad), Err(Error::NotLocallyClosed(_))));
        let overlap = [s(&["a", "ab"]), s(&["a"])];
        assert!(matches!(MultivectorField::build(c.clone(), &overlap), Err(Error::NotPartition(_))));
        let parts = [s(&["a", "ab"]), s(&["b"]), s(&["c"]), s(&["ac"]), s(&["bc"]), s(&["abc"])];
        let v = MultivectorField::build(c.clone(), &parts).unwrap();
        assert_eq!(v.fv(c.lookup("a").unwrap()), s(&["a", "ab"]));
        assert_eq!(v.fv(c.lookup("abc").unwrap()), c.full_set());
        let single = MultivectorField::singletons(c.clone());
        assert_eq!(single.refinement_relation(&v).unwrap(), Refinement::Refines);
        assert_eq!(v.refinement_relation(&v).unwrap(), Refinement::Equal);
        assert!(single.is_critical(single.multivector_of(c.lookup("a").unwrap())).unwrap());
    }

    #[test]
    fn main_example_directions() {
        let (_, fs) = fixtures::main_example();
        assert_eq!(fs[0].refinement_relation(&fs[1]).unwrap(), Refinement::Coarsens);
        assert_eq!(fs[1].refinement_relation(&fs[2]).unwrap(), Refinement::Refines);
    }

    #[test]
    fn disconnected_multivector_detected() {
        let c = Arc::new(fixtures::triangle());
        let parts: Vec<CellSet> =
            [&["a", "b"][..], &["c"], &["ab"], &["ac"], &["bc"], &["abc"]].iter().map(|m| c.set_from_ids(m).unwrap()).collect();
        let v = MultivectorField::build(c, &parts).unwrap();
        assert!(v.is_disconnected(0));
        assert!(!v.is_disconnected(1));
    }
}
