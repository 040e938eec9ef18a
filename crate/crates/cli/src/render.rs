//! Text encodings of command results. Every encoder is a pure function of its
//! input, so repeated runs produce identical bytes.

use std::fmt::Write as _;

use cmb_core::transition::TransitionDiagram;
use serde_json::Value;

use crate::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validate,
    Partition,
    Morse,
    Conley,
    Diagram,
    Barcode,
}

pub fn value(v: &Value, format: Format, kind: Kind) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv(v, kind),
        _ => text(v, kind),
    }
}

fn s(v: &Value) -> String {
    match v {
        Value::String(x) => x.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn list(v: &Value) -> Vec<String> {
    v.as_array().map(|a| a.iter().map(s).collect()).unwrap_or_default()
}

fn arr(v: &Value) -> &[Value] {
    v.as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn csv(v: &Value, kind: Kind) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |r: Vec<String>| w.write_record(&r).expect("in-memory write");
    match kind {
        Kind::Partition => {
            row(vec!["lambda".into(), "source".into(), "block".into(), "cells".into()]);
            for p in arr(&v["partitions"]) {
                for b in arr(&p["blocks"]) {
                    row(vec![s(&p["lambda"]), s(&p["source"]), s(&b["label"]), list(&b["cells"]).join(" ")]);
                }
            }
        }
        Kind::Morse | Kind::Conley => {
            let key = if kind == Kind::Morse { "morse" } else { "conley" };
            let mut head = vec!["lambda".into(), "source".into(), "set".into(), "block".into(), "cells".into()];
            if kind == Kind::Conley {
                head.push("ranks".into());
            }
            row(head);
            for p in arr(&v[key]) {
                for m in arr(&p["sets"]) {
                    let mut r =
                        vec![s(&p["lambda"]), s(&p["source"]), s(&m["label"]), s(&m["block"]), list(&m["cells"]).join(" ")];
                    if kind == Kind::Conley {
                        r.push(list(&m["ranks"]).join(" "));
                    }
                    row(r);
                }
            }
        }
        Kind::Barcode => {
            row(vec!["degree".into(), "birth".into(), "death".into(), "path".into()]);
            for b in arr(&v["bars"]) {
                let path: Vec<String> = arr(&b["path"]).iter().map(|p| format!("{}:{}", s(&p[0]), s(&p[1]))).collect();
                row(vec![s(&b["degree"]), s(&b["birth"]), s(&b["death"]), path.join(" ")]);
            }
        }
        Kind::Validate | Kind::Diagram => unreachable!("csv is rejected for this command"),
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn text(v: &Value, kind: Kind) -> String {
    let mut o = String::new();
    match kind {
        Kind::Validate => {
            let _ = writeln!(o, "valid: {} cells, max dimension {}", s(&v["cells"]), s(&v["max_dim"]));
            for f in arr(&v["fields"]) {
                let _ = writeln!(
                    o,
                    "field {}: {} multivectors, critical [{}]",
                    s(&f["lambda"]),
                    s(&f["multivectors"]),
                    list(&f["critical"]).join(", ")
                );
            }
            let _ = writeln!(o, "directions: [{}]", list(&v["directions"]).join(", "));
        }
        Kind::Partition => {
            for p in arr(&v["partitions"]) {
                let _ = writeln!(o, "lambda {} ({}):", s(&p["lambda"]), s(&p["source"]));
                for b in arr(&p["blocks"]) {
                    let _ = writeln!(o, "  {}: {{{}}}", s(&b["label"]), list(&b["cells"]).join(", "));
                }
            }
        }
        Kind::Morse | Kind::Conley => {
            let key = if kind == Kind::Morse { "morse" } else { "conley" };
            for p in arr(&v[key]) {
                let _ = writeln!(o, "lambda {} ({}):", s(&p["lambda"]), s(&p["source"]));
                for m in arr(&p["sets"]) {
                    let ranks = if kind == Kind::Conley { format!(" [{}]", list(&m["ranks"]).join(",")) } else { String::new() };
                    let _ = writeln!(o, "  {}{}: {{{}}}", s(&m["label"]), ranks, list(&m["cells"]).join(", "));
                }
            }
        }
        Kind::Diagram => {
            for (i, n) in arr(&v["nodes"]).iter().enumerate() {
                let _ = writeln!(o, "node {i}: ({}, {}) lambda {}", s(&n["column"]), s(&n["label"]), s(&n["lambda"]));
            }
            for a in arr(&v["arrows"]) {
                let _ = writeln!(o, "arrow {} -> {}", s(&a[0]), s(&a[1]));
            }
        }
        Kind::Barcode => {
            for b in arr(&v["bars"]) {
                let path: Vec<String> = arr(&b["path"]).iter().map(|p| format!("({}, {})", s(&p[0]), s(&p[1]))).collect();
                let death = if b["death"].is_null() { "inf".to_string() } else { s(&b["death"]) };
                let _ = writeln!(o, "H{} [{}, {}]: {}", s(&b["degree"]), s(&b["birth"]), death, path.join(" "));
            }
        }
    }
    o
}

fn esc(x: &str) -> String {
    x.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Graphviz rendering with one rank per column; AR-split arrows are bold.
pub fn dot(td: &TransitionDiagram) -> String {
    let mut o = String::from("digraph transition {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (t, col) in td.columns.iter().enumerate() {
        let _ = writeln!(o, "  subgraph col{t} {{\n    rank=same;");
        for &n in col {
            let node = &td.nodes[n];
            let _ = writeln!(
                o,
                "    n{n} [label=\"({}, {})\\nλ={}\"];",
                node.column,
                node.label.replace('"', "\\\""),
                td.column_to_lambda[t]
            );
        }
        o.push_str("  }\n");
    }
    let split_arrows: Vec<usize> = td.splits.iter().flat_map(|s| [s.arrows.0, s.arrows.1]).collect();
    for (i, a) in td.arrows.iter().enumerate() {
        let style = if split_arrows.contains(&i) { " [style=bold, color=red]" } else { "" };
        let _ = writeln!(o, "  n{} -> n{}{style};", a.from, a.to);
    }
    o.push_str("}\n");
    o
}

const PALETTE: [&str; 4] = ["#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd"];

/// One horizontal track per bar against λ; dashed links join coupled bars.
pub fn svg(v: &Value) -> String {
    let lambdas = v["lambdas"].as_u64().unwrap_or(1).max(1) as usize;
    let bars = arr(&v["bars"]);
    let (left, step, row, top) = (40.0, 80.0, 18.0, 30.0);
    let width = left * 2.0 + step * lambdas as f64;
    let height = top + row * bars.len() as f64 + 30.0;
    let x = |l: f64| left + step * l;
    let mut o = String::new();
    let _ = writeln!(
        o,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(o, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    for l in 0..lambdas {
        let xl = x(l as f64 + 0.5);
        let _ = writeln!(o, "<line x1=\"{xl}\" y1=\"{}\" x2=\"{xl}\" y2=\"{}\" stroke=\"#dddddd\"/>", top - 10.0, height - 20.0);
        let _ = writeln!(o, "<text x=\"{xl}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">λ={l}</text>", height - 6.0);
    }
    let y = |i: usize| top + row * i as f64 + row / 2.0;
    for (i, b) in bars.iter().enumerate() {
        let d = b["degree"].as_u64().unwrap_or(0) as usize;
        let birth = b["birth"].as_f64().unwrap_or(0.0);
        let end = b["death"].as_f64().map_or(lambdas as f64, |dl| dl + 1.0);
        let color = PALETTE[d.min(PALETTE.len() - 1)];
        let _ = writeln!(
            o,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"6\" stroke-linecap=\"butt\"><title>{}</title></line>",
            x(birth) + 4.0,
            y(i),
            x(end) - 4.0,
            y(i),
            esc(&format!("H{d} [{}, {}]", s(&b["birth"]), s(&b["death"])))
        );
    }
    for c in arr(&v["couplings"]) {
        let Some(pair) = c["coupled"].as_array() else { continue };
        let (a, b) = (pair[0].as_u64().unwrap_or(0) as usize, pair[1].as_u64().unwrap_or(0) as usize);
        let lam = c["lambda"].as_f64().unwrap_or(0.0);
        let xc = if s(&c["kind"]) == "refinement" { x(lam + 1.0) + 4.0 } else { x(lam + 1.0) - 4.0 };
        let _ = writeln!(
            o,
            "<line x1=\"{xc}\" y1=\"{}\" x2=\"{xc}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"3,3\"/>",
            y(a),
            y(b)
        );
    }
    o.push_str("</svg>\n");
    o
}
