//! Browser bindings. Each export takes plain strings or numbers and returns
//! a JSON document, so the same functions run natively under `cargo test`.

use polyrace::depgraph::compute_dependences;
use polyrace::frontend::{extract_directives, parse, DirectiveKind};
use polyrace::harness::{compute_metrics, render_opt, ConfusionCounts, METRIC_NAMES};
use polyrace::intset::{AffineExpr, Constraint, IntSet, IntSetError};
use polyrace::racecheck::{check_program, is_parallel, parallel_dims, projected_delta, CheckOptions};
use polyrace::scop::{construct_scop, Access};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest projection the view lists point by point.
const MAX_LISTED: usize = 64;

#[derive(Debug, Serialize, PartialEq)]
pub struct Projection {
    pub dim: String,
    /// Delta onto this dim with every outer dim pinned to zero.
    pub set: String,
    pub values: Option<Vec<i64>>,
    pub carried: bool,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct EdgeView {
    pub kind: &'static str,
    pub array: String,
    pub src_line: u32,
    pub dst_line: u32,
    pub relation: String,
    pub delta: Option<String>,
    pub projections: Vec<Projection>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct RegionView {
    pub line: u32,
    pub directive: String,
    pub loops: Vec<String>,
    pub checked: Vec<String>,
    pub parallel: Vec<(String, bool)>,
    pub edges: Vec<EdgeView>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Reply<T: Serialize> {
    Ok(T),
    Err { error: String },
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    let reply = match r {
        Ok(v) => Reply::Ok(v),
        Err(error) => Reply::Err { error },
    };
    serde_json::to_string(&reply).expect("serializable")
}

fn listed(s: &IntSet) -> Option<Vec<i64>> {
    if !s.params().is_empty() {
        return None;
    }
    let pts = s.enumerate(&[], MAX_LISTED).ok()?;
    Some(pts.into_iter().map(|p| p[0]).collect())
}

fn nonzero(s: &IntSet) -> Result<bool, IntSetError> {
    let d = AffineExpr::var(s.dims()[0].as_str());
    for c in [Constraint::ge(d.clone(), AffineExpr::constant(1)), Constraint::le(d, AffineExpr::constant(-1))] {
        if !s.constrain(&[c])?.is_empty()? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Dependences of every loop construct in `src`, with each delta projected
/// onto each loop dimension.
pub fn delta_view_native(src: &str) -> Result<Vec<RegionView>, String> {
    let p = parse(src).map_err(|e| e.to_string())?;
    let dirs = extract_directives(&p);
    let mut out = Vec::new();
    for d in dirs.iter().filter(|d| d.kind.is_loop() || d.kind == DirectiveKind::Parallel) {
        let mut view = RegionView {
            line: d.span.line,
            directive: d.kind.spelling().to_string(),
            loops: Vec::new(),
            checked: Vec::new(),
            parallel: Vec::new(),
            edges: Vec::new(),
            error: None,
        };
        let scop = match construct_scop(d, &p, &dirs) {
            Ok(s) => s,
            Err(e) => {
                view.error = Some(e.to_string());
                out.push(view);
                continue;
            }
        };
        view.loops = scop.loops.iter().map(|l| l.var.clone()).collect();
        view.checked = parallel_dims(d, &scop).iter().map(|&k| view.loops[k].clone()).collect();
        let g = match compute_dependences(&scop, Access::is_eligible) {
            Ok(g) => g,
            Err(e) => {
                view.error = Some(e.to_string());
                out.push(view);
                continue;
            }
        };
        for (k, var) in view.loops.iter().enumerate() {
            match is_parallel(&g, k) {
                Ok(par) => view.parallel.push((var.clone(), par)),
                Err(e) => view.error = Some(e.to_string()),
            }
        }
        for e in &g.edges {
            let src_acc = g.access(e.src);
            let mut ev = EdgeView {
                kind: e.kind.label(),
                array: src_acc.array.clone(),
                src_line: g.stmt(e.src).span.line,
                dst_line: g.stmt(e.dst).span.line,
                relation: e.rel.to_string(),
                delta: e.delta.as_ref().map(|d| d.to_string()),
                projections: Vec::new(),
            };
            for k in 0..e.depth {
                let proj = projected_delta(e, k).map_err(|x| x.to_string())?;
                let Some(proj) = proj else { continue };
                let carried = nonzero(&proj).map_err(|x| x.to_string())?;
                ev.projections.push(Projection {
                    dim: proj.dims()[0].clone(),
                    set: proj.to_string(),
                    values: listed(&proj),
                    carried,
                });
            }
            view.edges.push(ev);
        }
        out.push(view);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CheckReply {
    pub diagnostics: Vec<String>,
    pub verdicts: Vec<polyrace::racecheck::Verdict>,
}

pub fn check_kernel_native(src: &str, disable_mayref: bool) -> Result<CheckReply, String> {
    let p = parse(src).map_err(|e| e.to_string())?;
    let verdicts = check_program(&p, CheckOptions { disable_mayref });
    Ok(CheckReply {
        diagnostics: verdicts.iter().map(|v| v.diagnostic("kernel.c")).collect(),
        verdicts,
    })
}

/// Metric name to rendered value, "undefined" when a denominator vanishes.
pub fn metrics_native(tp: u32, fn_: u32, tn: u32, fp: u32, decimals: u32) -> Vec<(&'static str, String)> {
    let m = compute_metrics(&ConfusionCounts::new(tp.into(), fn_.into(), tn.into(), fp.into()));
    METRIC_NAMES
        .iter()
        .map(|&n| (n, render_opt(m.get(n).flatten(), decimals)))
        .collect()
}

#[wasm_bindgen]
pub fn delta_view(src: &str) -> String {
    to_json(delta_view_native(src))
}

#[wasm_bindgen]
pub fn check_kernel(src: &str, disable_mayref: bool) -> String {
    to_json(check_kernel_native(src, disable_mayref))
}

#[wasm_bindgen]
pub fn metrics(tp: u32, fn_: u32, tn: u32, fp: u32, decimals: u32) -> String {
    to_json(Ok(metrics_native(tp, fn_, tn, fp, decimals.min(6))))
}
