//! Command results as JSON values. Object keys serialize sorted.

use cmb_core::dynamics::{
    conley_index_of_block, finest_block_partition, induced_morse, validate_block_decomposition, BlockDecomposition,
};
use cmb_core::io::Bundle;
use cmb_core::mvf::MultivectorField;
use cmb_core::transition::{build_diagram, check_diagram, CascadePolicy, ParameterizedMVF, TransitionDiagram};
use cmb_core::zigzag::{compute_barcode, theorem_checks, EngineOptions};
use cmb_core::{Complex, Result};
use serde_json::{json, Value};

fn fence(b: &Bundle) -> Result<ParameterizedMVF> {
    ParameterizedMVF::new(b.fields.clone())
}

pub fn validate(b: &Bundle) -> Result<Value> {
    let pm = fence(b)?;
    let fields: Vec<Value> = b
        .fields
        .iter()
        .enumerate()
        .map(|(l, v)| {
            let critical: Vec<&str> =
                (0..v.len()).filter(|&m| v.is_critical(m).unwrap_or(false)).map(|m| v.label(m)).collect();
            let disconnected: Vec<&str> = (0..v.len()).filter(|&m| v.is_disconnected(m)).map(|m| v.label(m)).collect();
            json!({ "lambda": l, "multivectors": v.len(), "critical": critical, "disconnected": disconnected })
        })
        .collect();
    let directions: Vec<String> = pm.directions.iter().map(|d| format!("{d:?}").to_lowercase()).collect();
    Ok(json!({
        "valid": true,
        "cells": b.complex.len(),
        "max_dim": b.complex.max_dim(),
        "fields": fields,
        "directions": directions,
    }))
}

/// Finest partitions, then any decompositions supplied in the input.
fn decompositions(b: &Bundle) -> Result<Vec<(usize, &'static str, BlockDecomposition)>> {
    let x = b.complex.full_set();
    let mut out = Vec::new();
    for (l, v) in b.fields.iter().enumerate() {
        out.push((l, "finest", finest_block_partition(v, &x)?));
        if let Some(blocks) = b.decompositions.get(&l) {
            out.push((l, "input", validate_block_decomposition(v, blocks, &x)?));
        }
    }
    Ok(out)
}

fn covers(labels: &[String], bd_covers: &[(usize, usize)]) -> Vec<Value> {
    bd_covers.iter().map(|&(p, q)| json!([labels[p], labels[q]])).collect()
}

fn block_labels(c: &Complex, bd: &BlockDecomposition) -> Vec<String> {
    (0..bd.len()).map(|p| bd.label(c, p).to_string()).collect()
}

pub fn partitions(b: &Bundle) -> Result<Value> {
    let c = &b.complex;
    let rows: Vec<Value> = decompositions(b)?
        .into_iter()
        .map(|(l, src, bd)| {
            let labels = block_labels(c, &bd);
            let blocks: Vec<Value> =
                bd.blocks.iter().zip(&labels).map(|(s, lab)| json!({ "label": lab, "cells": c.ids(s) })).collect();
            json!({ "lambda": l, "source": src, "blocks": blocks, "order": covers(&labels, &bd.order.covers) })
        })
        .collect();
    Ok(json!({ "partitions": rows }))
}

fn morse_rows(b: &Bundle, with_conley: bool) -> Result<Vec<Value>> {
    let c = &b.complex;
    let mut rows = Vec::new();
    for (l, src, bd) in decompositions(b)? {
        let v: &MultivectorField = &b.fields[l];
        let md = induced_morse(v, &bd)?;
        let labels: Vec<String> = md.sets.iter().map(|s| c.id(s.first().expect("nonempty")).to_string()).collect();
        let mut sets = Vec::new();
        for (i, s) in md.sets.iter().enumerate() {
            let block = md.block_index[i];
            let mut entry = json!({ "label": labels[i], "block": bd.label(c, block), "cells": c.ids(s) });
            if with_conley {
                entry["ranks"] = json!(conley_index_of_block(v, &bd.blocks[block])?.ranks);
            }
            sets.push(entry);
        }
        rows.push(json!({ "lambda": l, "source": src, "sets": sets, "order": covers(&labels, &md.order.covers) }));
    }
    Ok(rows)
}

pub fn morse(b: &Bundle) -> Result<Value> {
    Ok(json!({ "morse": morse_rows(b, false)? }))
}

pub fn conley(b: &Bundle) -> Result<Value> {
    Ok(json!({ "conley": morse_rows(b, true)? }))
}

pub struct DiagramOut {
    pub diagram: TransitionDiagram,
    pub json: Value,
    pub cascades: Vec<String>,
}

fn cascade_lines(td: &TransitionDiagram) -> Vec<String> {
    td.cascade_log
        .iter()
        .map(|c| {
            format!(
                "step {} round {}: merge {} and {} into {}{}",
                c.source_step,
                c.round,
                c.lower,
                c.upper,
                c.merged,
                if c.comparable { "" } else { " (incomparable)" }
            )
        })
        .collect()
}

pub fn diagram(b: &Bundle, debug: bool) -> Result<DiagramOut> {
    let pm = fence(b)?;
    let (_, td) = build_diagram(&pm, CascadePolicy::MinFirst)?;
    let report = check_diagram(&td)?;
    if debug {
        eprintln!("diagram: {} nodes, {} arrows, {} ideal paths", report.nodes, report.arrows, report.ideal_paths);
    }
    let c = &td.complex;
    let nodes: Vec<Value> = td
        .nodes
        .iter()
        .map(|n| {
            json!({
                "column": n.column,
                "label": n.label,
                "lambda": td.column_to_lambda[n.column],
                "p": c.ids(&n.pair.p),
                "e": c.ids(&n.pair.e),
            })
        })
        .collect();
    let arrows: Vec<Value> = td.arrows.iter().map(|a| json!([a.from, a.to])).collect();
    let json = json!({
        "nodes": nodes,
        "arrows": arrows,
        "ideal": td.ideal,
        "column_steps": td.column_steps,
        "column_to_lambda": td.column_to_lambda,
        "cascade_choices": td.cascade_log,
        "report": report,
    });
    let cascades = cascade_lines(&td);
    Ok(DiagramOut { diagram: td, json, cascades })
}

pub struct BarcodeOut {
    pub json: Value,
    pub cascades: Vec<String>,
}

pub fn barcode(b: &Bundle, debug: bool) -> Result<BarcodeOut> {
    let pm = fence(b)?;
    let (_, td) = build_diagram(&pm, CascadePolicy::MinFirst)?;
    check_diagram(&td)?;
    let bc = compute_barcode(&td, EngineOptions { debug_invariants: debug, ..Default::default() })?;
    let checks = theorem_checks(&bc, &td)?;
    if debug {
        eprintln!("barcode: {} bars, {} splits checked", checks.bars, checks.splits_checked);
    }
    let json = json!({
        "bars": bc.bars,
        "couplings": bc.couplings,
        "cascade_choices": td.cascade_log,
        "lambdas": pm.len(),
    });
    Ok(BarcodeOut { json, cascades: cascade_lines(&td) })
}
