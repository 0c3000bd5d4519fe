//! Graphviz export. Output depends only on the input value, so it can be
//! compared byte for byte.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::contraction::{CPort, ContractedGraph, Side};
use crate::model::Module;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Positive poles are triangles, negative poles black bars, pending ports
/// point nodes.
pub fn module_to_dot(m: &Module) -> String {
    let mut out = String::from("digraph module {\n  node [fontname=\"Helvetica\"];\n");
    for cell in m.cells() {
        let c = cell.id;
        writeln!(out, "  c{c} [shape=triangle, label=\"{c}\"];").unwrap();
        for (k, pole) in cell.poles.iter().enumerate() {
            writeln!(
                out,
                "  c{c}p{k} [shape=box, style=filled, fillcolor=black, height=0.08, width=0.5, label=\"\"];"
            )
            .unwrap();
            writeln!(out, "  c{c} -> c{c}p{k} [dir=none];").unwrap();
            for label in &pole.conclusions {
                match m.hypothesis_owner(label) {
                    Some(to) => {
                        writeln!(
                            out,
                            "  c{c}p{k} -> c{to} [label={}];",
                            quote(label.as_str())
                        )
                        .unwrap();
                    }
                    None => {
                        let q = quote(label.as_str());
                        writeln!(out, "  {} [shape=point];", quote(&format!("out_{label}")))
                            .unwrap();
                        writeln!(
                            out,
                            "  c{c}p{k} -> {} [label={q}];",
                            quote(&format!("out_{label}"))
                        )
                        .unwrap();
                    }
                }
            }
        }
        for h in &cell.hypotheses {
            if m.conclusion_owner(h).is_none() {
                let node = quote(&format!("in_{h}"));
                writeln!(out, "  {node} [shape=point];").unwrap();
                writeln!(out, "  {node} -> c{c} [label={}];", quote(h.as_str())).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Blobs are filled circles; blobs of a notcc witness are red and carry
/// `class="notcc"`.
pub fn graph_to_dot(g: &ContractedGraph) -> String {
    let notcc: BTreeSet<_> = g.notcc_witness().into_iter().collect();
    let mut out = String::from("digraph contracted {\n  node [fontname=\"Helvetica\"];\n");
    for blob in g.blobs() {
        let b = blob.id;
        if notcc.contains(&b) {
            writeln!(
                out,
                "  {b} [shape=circle, style=filled, fillcolor=red, class=\"notcc\", label=\"\"];"
            )
            .unwrap();
        } else {
            writeln!(
                out,
                "  {b} [shape=circle, style=filled, fillcolor=black, label=\"\"];"
            )
            .unwrap();
        }
        for (label, side) in &blob.pending {
            let q = quote(label.as_str());
            match side {
                Side::Hypothesis => {
                    let node = quote(&format!("in_{label}"));
                    writeln!(out, "  {node} [shape=point];").unwrap();
                    writeln!(out, "  {node} -> {b} [label={q}];").unwrap();
                }
                Side::Conclusion => {
                    let node = quote(&format!("out_{label}"));
                    writeln!(out, "  {node} [shape=point];").unwrap();
                    writeln!(out, "  {b} -> {node} [label={q}];").unwrap();
                }
            }
        }
    }
    for pole in g.poles() {
        let p = pole.id;
        writeln!(
            out,
            "  {p} [shape=box, style=filled, fillcolor=black, height=0.08, width=0.5, label=\"\"];"
        )
        .unwrap();
        writeln!(out, "  {} -> {p} [dir=none];", pole.anchor).unwrap();
        for port in &pole.ports {
            let q = quote(port.label().as_str());
            match port {
                CPort::Linked { blob, .. } => {
                    writeln!(out, "  {p} -> {blob} [label={q}];").unwrap()
                }
                CPort::Pending(label) => {
                    let node = quote(&format!("out_{label}"));
                    writeln!(out, "  {node} [shape=point];").unwrap();
                    writeln!(out, "  {p} -> {node} [label={q}];").unwrap();
                }
            }
        }
    }
    for e in g.edges() {
        writeln!(
            out,
            "  {} -> {} [dir=none, label={}];",
            e.a,
            e.b,
            quote(e.label.as_str())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
