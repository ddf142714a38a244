//! Graphviz export of the directive tree.

use std::fmt::Write;

use crate::frontend::Directive;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\l"),
            c => out.push(c),
        }
    }
    out
}

/// Node label: kind, schedule, clauses and variable classes, one per line.
pub fn node_label(d: &Directive) -> String {
    let mut lines = vec![d.kind.dump_name()];
    if let Some(n) = &d.name {
        lines[0].push_str(&format!(" ({n})"));
    }
    if let Some(s) = &d.sched {
        lines.push(format!("schedule: {s}"));
    }
    if d.collapse > 1 {
        lines.push(format!("collapse: {}", d.collapse));
    }
    if d.nowait {
        lines.push("nowait".into());
    }
    if d.implicit {
        lines.push("implicit".into());
    }
    let mut classes: Vec<(String, Vec<&str>)> = Vec::new();
    for (c, v) in &d.vars {
        let label = c.label();
        match classes.iter_mut().find(|(l, _)| *l == label) {
            Some((_, vs)) => vs.push(v),
            None => classes.push((label, vec![v])),
        }
    }
    for (l, vs) in classes {
        lines.push(format!("{l}: {}", vs.join(", ")));
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// A `digraph` with one root node for the file, solid edges from each
/// construct to its children and dashed edges between consecutive siblings.
pub fn to_dot(file: &str, forest: &[Directive]) -> String {
    let mut out = String::from("digraph directives {\n  node [shape=box, fontname=\"monospace\"];\n");
    writeln!(out, "  n0 [label=\"{}\", shape=folder];", escape(file)).unwrap();
    let mut next = 1;
    emit_children(&mut out, 0, forest, &mut next);
    out.push_str("}\n");
    out
}

fn emit_children(out: &mut String, parent: usize, kids: &[Directive], next: &mut usize) {
    let mut prev = None;
    for d in kids {
        let id = *next;
        *next += 1;
        writeln!(out, "  n{id} [label=\"{}\"];", escape(&node_label(d))).unwrap();
        writeln!(out, "  n{parent} -> n{id};").unwrap();
        if let Some(p) = prev {
            writeln!(out, "  n{p} -> n{id} [style=dashed];").unwrap();
        }
        prev = Some(id);
        emit_children(out, id, &d.children, next);
    }
}
