mod common;

use std::sync::Arc;

use cmb_core::complex::CellSet;
use cmb_core::dynamics::{
    conley_index, connecting_sequence, essential_witness, connection_set, continues_to, essential_set, finest_block_partition,
    index_pair_of_block, induced_morse, invariant_part, is_isolating_by_paths, push_forward,
    validate_block_decomposition, validate_index_pair,
};
use cmb_core::homology::{coned_ranks, relative_ranks};
use cmb_core::mvf::MultivectorField;
use cmb_core::transition::{
    consistent_orders, finest_filtration, n_sequence, n_sequence_general, ParameterizedMVF,
};
use cmb_core::zigzag::{compute_barcode, check_conservation, theorem_checks, ChainModel, EngineOptions};
use cmb_core::transition::{build_diagram, check_diagram, CascadePolicy};
use proptest::prelude::*;
use rand::Rng;

fn setup(seed: u64, max_cells: usize) -> (common::Rng8, MultivectorField) {
    let mut r = common::rng(seed);
    loop {
        let verts = r.gen_range(3..7);
        let (tris, edges) = (r.gen_range(0..4), r.gen_range(0..4));
        let c = common::random_complex(&mut r, verts, tris, edges);
        if c.len() <= max_cells {
            let c = Arc::new(c);
            let v = common::random_field(&mut r, &c, 3);
            return (r, v);
        }
    }
}

fn random_subset(r: &mut impl Rng, n: usize) -> CellSet {
    CellSet::from_indices(n, (0..n).filter(|_| r.gen_bool(0.4)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn closure_opening_mouth(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let c = v.complex();
        let a = random_subset(&mut r, c.len());
        let cl = c.closure(&a);
        prop_assert!(a.is_subset(&cl));
        prop_assert!(c.is_closed(&cl));
        prop_assert_eq!(c.closure(&cl), cl.clone());
        let op = c.opening(&a);
        prop_assert!(a.is_subset(&op));
        prop_assert!(c.is_open(&op));
        prop_assert!(c.is_closed(&c.full_set().difference(&op)));
        prop_assert_eq!(c.mouth(&a), cl.difference(&a));
        prop_assert_eq!(c.is_locally_closed(&a), c.is_closed(&c.mouth(&a)));
        for x in 0..c.len() {
            let closed_by_faces = c.faces_of(x).iter().all(|&f| cl.contains(f));
            prop_assert!(!cl.contains(x) || closed_by_faces);
        }
    }

    #[test]
    fn fv_contains_cell_and_multivector(seed in any::<u64>()) {
        let (_, v) = setup(seed, 25);
        for x in 0..v.complex().len() {
            let f = v.fv(x);
            prop_assert!(f.contains(x));
            prop_assert!(v.multivector(v.multivector_of(x)).is_subset(&f));
        }
    }

    #[test]
    fn isolating_block_iff_locally_closed_and_compatible(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 20);
        let n = v.complex().len();
        let raw = random_subset(&mut r, n);
        let mut compatible = CellSet::empty(n);
        for x in raw.iter() {
            compatible.union_with(v.multivector(v.multivector_of(x)));
        }
        for a in [raw, compatible] {
            prop_assert_eq!(is_isolating_by_paths(&v, &a), v.is_isolating_block(&a));
        }
    }

    #[test]
    fn invariant_part_matches_essential_set(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let mut blocks = vec![v.complex().full_set()];
        blocks.extend(common::random_block(&mut r, &v));
        for b in blocks {
            prop_assert_eq!(invariant_part(&v, &b).unwrap(), essential_set(&v, &b).unwrap());
        }
    }

    #[test]
    fn push_forward_of_closed_set_in_closure_is_closed(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let c = v.complex();
        if let Some(b) = common::random_block(&mut r, &v) {
            let cl = c.closure(&b);
            let a = c.closure(&CellSet::from_indices(c.len(), cl.iter().filter(|_| r.gen_bool(0.3))));
            prop_assert!(c.is_closed(&push_forward(&v, &a, &cl)));
            prop_assert!(c.is_closed(&push_forward(&v, &c.mouth(&b), &cl)));
        }
    }

    #[test]
    fn conley_index_independent_of_index_pair(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let c = v.complex();
        let Some(b) = common::random_block(&mut r, &v) else { return Ok(()) };
        let s = invariant_part(&v, &b).unwrap();
        let base = index_pair_of_block(&v, &b).unwrap();
        let tight = index_pair_of_block(&v, &s).unwrap();
        prop_assert_eq!(validate_index_pair(&v, &tight.p, &tight.e).unwrap(), s.clone());
        let want = relative_ranks(c, &base.p, &base.e);
        prop_assert_eq!(&conley_index(&v, &tight).unwrap().ranks, &want);
        for pair in connecting_sequence(&v, &base, &tight, None).unwrap() {
            prop_assert_eq!(validate_index_pair(&v, &pair.p, &pair.e).unwrap(), s.clone());
            prop_assert_eq!(&conley_index(&v, &pair).unwrap().ranks, &want);
        }
    }

    #[test]
    fn morse_sets_form_block_decomposition(seed in any::<u64>()) {
        let (_, v) = setup(seed, 25);
        let x = v.complex().full_set();
        let bd = finest_block_partition(&v, &x).unwrap();
        let md = induced_morse(&v, &bd).unwrap();
        prop_assert!(validate_block_decomposition(&v, &md.sets, &x).is_ok());
    }

    #[test]
    fn continuation_preserves_index(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let Some(w) = common::coarsen(&mut r, &v) else { return Ok(()) };
        let Some(b) = common::random_block(&mut r, &w) else { return Ok(()) };
        if !v.is_isolating_block(&b) {
            return Ok(());
        }
        continues_to(&v, &w, &b).unwrap();
        let pair = index_pair_of_block(&v, &b).unwrap();
        prop_assert_eq!(conley_index(&v, &pair).unwrap(), conley_index(&w, &pair).unwrap());
    }

    #[test]
    fn refinement_steps_respect_block_structure(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let c = Arc::new(common::random_complex(&mut r, 5, 3, 2));
        let fields = common::random_sequence(&mut r, &c, 5, 3);
        let pm = ParameterizedMVF::new(fields).unwrap();
        let zf = finest_filtration(&pm).unwrap();
        for (i, step) in zf.steps.iter().enumerate() {
            let (f, k) = step.fine_coarse(i);
            let (fine, coarse) = (&zf.stages[f].blocks, &zf.stages[k].blocks);
            let (vf, vc) = (&pm.fields[zf.stages[f].lambda], &pm.fields[zf.stages[k].lambda]);
            let (order, _) = consistent_orders(fine, coarse, &step.map);
            prop_assert_eq!(
                n_sequence(vf, vc, fine, coarse, &step.map, &order),
                n_sequence_general(vf, vc, fine, coarse, &step.map, &order)
            );
            let fine_morse = induced_morse(vf, fine).unwrap();
            for (q, bq) in coarse.blocks.iter().enumerate() {
                let parts: Vec<CellSet> = step.map.preimage(q).iter().map(|&p| fine.blocks[p].clone()).collect();
                prop_assert!(validate_block_decomposition(vf, &parts, bq).is_ok());
                let sets: Vec<CellSet> = fine_morse
                    .sets
                    .iter()
                    .zip(&fine_morse.block_index)
                    .filter(|(_, &p)| step.map.map[p] == q)
                    .map(|(s, _)| s.clone())
                    .collect();
                prop_assert_eq!(invariant_part(vf, bq).unwrap(), connection_set(vf, &sets, bq));
            }
        }
    }

    #[test]
    fn chain_models_agree_and_bars_conserve_ranks(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let c = Arc::new(common::random_complex(&mut r, 5, 3, 2));
        let fields = common::random_sequence(&mut r, &c, 5, 3);
        let pm = ParameterizedMVF::new(fields).unwrap();
        let (_, td) = build_diagram(&pm, CascadePolicy::MinFirst).unwrap();
        check_diagram(&td).unwrap();
        let q = compute_barcode(&td, EngineOptions { model: ChainModel::Quotient, debug_invariants: true }).unwrap();
        let k = compute_barcode(&td, EngineOptions { model: ChainModel::Coned, debug_invariants: true }).unwrap();
        prop_assert_eq!(q.spans(), k.spans());
        check_conservation(&q, &td).unwrap();
        theorem_checks(&q, &td).unwrap();
    }

    #[test]
    fn coned_and_relative_ranks_agree(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let c = v.complex();
        let p = c.closure(&random_subset(&mut r, c.len()));
        let e = c.closure(&CellSet::from_indices(c.len(), p.iter().filter(|_| r.gen_bool(0.3))));
        prop_assert_eq!(coned_ranks(c, &p, &e), relative_ranks(c, &p, &e));
    }

    #[test]
    fn witnesses_exist_exactly_on_invariant_part(seed in any::<u64>()) {
        let (mut r, v) = setup(seed, 25);
        let region = common::random_block(&mut r, &v).unwrap_or_else(|| v.complex().full_set());
        let inv = invariant_part(&v, &region).unwrap();
        for x in region.iter() {
            let w = essential_witness(&v, x, &region).unwrap();
            prop_assert_eq!(w.is_some(), inv.contains(x));
            if let Some(w) = w {
                prop_assert!(w.left_limit.is_subset(&inv) && w.right_limit.is_subset(&inv));
                prop_assert!(!w.left_limit.is_empty() && !w.right_limit.is_empty());
            }
        }
    }

    /// Bars may pair births and deaths differently under another cascade, but the
    /// birth and death multisets per degree do not move.
    #[test]
    fn event_multisets_are_independent_of_cascade_policy(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let c = Arc::new(common::random_complex(&mut r, 5, 3, 2));
        let fields = common::random_sequence(&mut r, &c, 5, 3);
        let pm = ParameterizedMVF::new(fields).unwrap();
        let events = |policy| {
            let (_, td) = build_diagram(&pm, policy).unwrap();
            let spans = compute_barcode(&td, EngineOptions::default()).unwrap().spans();
            let mut births: Vec<_> = spans.iter().map(|&(d, b, _)| (d, b)).collect();
            let mut deaths: Vec<_> = spans.iter().map(|&(d, _, e)| (d, e)).collect();
            births.sort();
            deaths.sort();
            (births, deaths)
        };
        prop_assert_eq!(events(CascadePolicy::MinFirst), events(CascadePolicy::MaxFirst));
    }
}

#[test]
fn bar_multisets_match_across_cascade_policies_on_fixtures() {
    for (_, fields) in [
        cmb_core::fixtures::pitchfork(),
        cmb_core::fixtures::main_example(),
        cmb_core::fixtures::octahedron(),
    ] {
        let pm = ParameterizedMVF::new(fields).unwrap();
        let spans = |policy| {
            let (_, td) = build_diagram(&pm, policy).unwrap();
            compute_barcode(&td, EngineOptions::default()).unwrap().spans()
        };
        assert_eq!(spans(CascadePolicy::MinFirst), spans(CascadePolicy::MaxFirst));
    }
}
