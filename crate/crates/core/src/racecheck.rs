//! Per-region race verdicts.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::depgraph::{compute_dependences, Dependence, Rdg};
use crate::frontend::{extract_directives, Directive, DirectiveKind, NodeId, Program, Span};
use crate::intset::{AffineExpr, Constraint, IntSet, IntSetError};
use crate::scop::{construct_scop, replicated_accesses, Access, AccessKind, Scop, ScopError};

/// Maximum witnesses kept per region.
pub const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    RaceFree,
    NotAnalyzable,
    RaceDetected,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::RaceDetected => "RaceDetected",
            Outcome::RaceFree => "RaceFree",
            Outcome::NotAnalyzable => "NotAnalyzable",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A pair of conflicting accesses from different threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RaceWitness {
    pub array: String,
    /// Line of the writing access.
    pub write_line: u32,
    /// Kind and line of the other access.
    pub other_kind: &'static str,
    pub other_line: u32,
    /// Loop variable of the parallelized dimension, or `team` for code
    /// every thread executes.
    pub dim: String,
    pub dim_index: Option<usize>,
    /// Distance vector over the loops shared by both accesses.
    pub delta_sample: Option<Vec<i64>>,
    /// Concrete source and target iterations and parameter values.
    pub src_point: Option<Vec<i64>>,
    pub dst_point: Option<Vec<i64>>,
    pub params: Option<Vec<(String, i64)>>,
    /// Found by the conservative fallback rather than exact analysis.
    pub may: bool,
}

impl RaceWitness {
    fn sort_key(&self) -> (u32, u32, String, String) {
        (self.write_line, self.other_line, self.array.clone(), self.dim.clone())
    }
}

impl fmt::Display for RaceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} write@{} ~ {}@{}, dim {}",
            self.array, self.write_line, self.other_kind, self.other_line, self.dim
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub region: NodeId,
    pub kind: DirectiveKind,
    pub span: Span,
    pub outcome: Outcome,
    pub witnesses: Vec<RaceWitness>,
    pub reason: Option<String>,
    /// Known limitations that apply to this region.
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(d: &Directive) -> Self {
        Verdict {
            region: d.stmt,
            kind: d.kind.clone(),
            span: d.span,
            outcome: Outcome::RaceFree,
            witnesses: Vec::new(),
            reason: None,
            notes: Vec::new(),
        }
    }

    fn not_analyzable(d: &Directive, reason: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::NotAnalyzable,
            reason: Some(reason.into()),
            ..Verdict::new(d)
        }
    }

    /// Folds a sub-verdict into this one.
    fn absorb(&mut self, other: Verdict) {
        self.outcome = self.outcome.max(other.outcome);
        if self.reason.is_none() {
            self.reason = other.reason;
        }
        self.witnesses.extend(other.witnesses);
        self.notes.extend(other.notes);
    }

    fn finish(mut self) -> Self {
        if !self.witnesses.is_empty() {
            self.outcome = Outcome::RaceDetected;
        }
        self.witnesses.sort_by_key(RaceWitness::sort_key);
        let mut seen = BTreeSet::new();
        self.witnesses.retain(|w| seen.insert(w.to_string()));
        self.witnesses.truncate(MAX_WITNESSES);
        if self.outcome == Outcome::RaceDetected {
            self.reason = None;
        }
        self
    }

    /// One-line diagnostic.
    pub fn diagnostic(&self, file: &str) -> String {
        let mut s = format!("{file}:{}: {}: {}", self.span.line, self.outcome, self.kind.spelling());
        match (self.witnesses.first(), &self.reason) {
            (Some(w), _) => s.push_str(&format!(" [witness: {w}]")),
            (None, Some(r)) => s.push_str(&format!(" [reason: {r}]")),
            _ => {}
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Report non-affine regions as not analyzable instead of falling back
    /// to the conservative may-reference check.
    pub disable_mayref: bool,
}

/// Whether no dependence of `g` is carried at loop depth `dim` between
/// instances that agree on all outer loops, i.e. the projection of each
/// delta set (restricted to zero outer distance) onto `dim`, minus zero,
/// has no integer point.
pub fn is_parallel(g: &Rdg, dim: usize) -> Result<bool, IntSetError> {
    for e in &g.edges {
        if e.ordered {
            continue;
        }
        if carried(e, dim)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Distances of `e` at loop depth `dim` between instances that agree on
/// all outer loops, or `None` when the edge does not span that depth.
pub fn projected_delta(e: &Dependence, dim: usize) -> Result<Option<IntSet>, IntSetError> {
    let Some(delta) = &e.delta else { return Ok(None) };
    if e.depth <= dim {
        return Ok(None);
    }
    let names: Vec<String> = delta.dims().to_vec();
    let outer: Vec<Constraint> = names[..dim]
        .iter()
        .map(|n| Constraint::eq(AffineExpr::var(n.as_str()), AffineExpr::zero()))
        .collect();
    Ok(Some(delta.constrain(&outer)?.project_onto(&[names[dim].as_str()])?.simplify()?))
}

/// Whether `e` has a nonzero distance at `dim` with zero outer distance.
fn carried(e: &Dependence, dim: usize) -> Result<bool, IntSetError> {
    let Some(proj) = projected_delta(e, dim)? else { return Ok(false) };
    let d = AffineExpr::var(proj.dims()[0].as_str());
    let pos = proj.constrain(&[Constraint::ge(d.clone(), AffineExpr::constant(1))])?;
    let neg = proj.constrain(&[Constraint::le(d, AffineExpr::constant(-1))])?;
    Ok(!pos.is_empty()? || !neg.is_empty()?)
}

/// Concrete instance pair of `e` differing at `dim` and agreeing outside.
fn witness_for(g: &Rdg, e: &Dependence, dim: usize) -> Result<RaceWitness, IntSetError> {
    let (ps, qs) = (g.stmt(e.src), g.stmt(e.dst));
    let (a, b) = (g.access(e.src), g.access(e.dst));
    let src: Vec<&str> = ps.dims.iter().map(String::as_str).collect();
    let dst: Vec<String> = qs.dims.iter().map(|d| format!("{d}'")).collect();
    let cs: Vec<Constraint> = (0..dim)
        .map(|k| Constraint::eq(AffineExpr::var(src[k]), AffineExpr::var(dst[k].as_str())))
        .collect();
    let diff = AffineExpr::var(dst[dim].as_str()) - AffineExpr::var(src[dim]);
    let base = e.rel.constrain(&cs)?;
    let mut sample = None;
    for c in [
        Constraint::ge(diff.clone(), AffineExpr::constant(1)),
        Constraint::le(diff.clone(), AffineExpr::constant(-1)),
    ] {
        if let Some(s) = base.constrain(&[c])?.as_set().sample()? {
            sample = Some(s);
            break;
        }
    }
    let (write, other) = if a.kind == AccessKind::Write { (a, b) } else { (b, a) };
    let mut w = RaceWitness {
        array: a.array.clone(),
        write_line: write.span.line,
        other_kind: other.kind.label(),
        other_line: other.span.line,
        dim: g.scop.loops[ps.loops[dim]].var.clone(),
        dim_index: Some(dim),
        delta_sample: None,
        src_point: None,
        dst_point: None,
        params: None,
        may: false,
    };
    if let Some((pt, prm)) = sample {
        let (sp, dp) = pt.split_at(ps.dims.len());
        let depth = e.depth;
        w.delta_sample = Some((0..depth).map(|k| dp[k] - sp[k]).collect());
        w.src_point = Some(sp.to_vec());
        w.dst_point = Some(dp.to_vec());
        w.params = Some(g.scop.params.iter().cloned().zip(prm).collect());
    }
    Ok(w)
}

/// Verdict for one loop construct.
pub fn is_race_free(dir: &Directive, p: &Program, dirs: &[Directive], opts: CheckOptions) -> Verdict {
    let scop = match construct_scop(dir, p, dirs) {
        Ok(s) => s,
        Err(e) => return Verdict::not_analyzable(dir, reason_of(&e)),
    };
    let dims = parallel_dims(dir, &scop);
    if !scop.fully_affine && opts.disable_mayref {
        let why = scop.non_affine.first().map(|(_, m)| m.clone()).unwrap_or_default();
        return Verdict::not_analyzable(dir, format!("non-affine region: {why}"));
    }
    let mut v = Verdict::new(dir);
    let mut exact_excluded = BTreeSet::new();
    if !scop.fully_affine {
        let mr = may_ref_check(dir, &scop, &dims);
        exact_excluded = mr.1;
        v.absorb(mr.0);
    }
    let result = (|| -> Result<Vec<RaceWitness>, IntSetError> {
        let eligible = |a: &Access| {
            a.is_eligible() && a.affine && a.map.is_some() && !exact_excluded.contains(&a.array)
        };
        let g = compute_dependences(&scop, eligible).map_err(|e| match e {
            crate::depgraph::DepError::Limit(l) => l,
            crate::depgraph::DepError::NotAffine => unreachable!("filtered to affine accesses"),
        })?;
        let mut out = Vec::new();
        for &dim in &dims {
            if is_parallel(&g, dim)? {
                continue;
            }
            for e in &g.edges {
                if e.ordered {
                    continue;
                }
                if carried(e, dim)? {
                    out.push(witness_for(&g, e, dim)?);
                }
            }
        }
        Ok(out)
    })();
    match result {
        Ok(ws) => v.witnesses.extend(ws),
        Err(e) => return Verdict::not_analyzable(dir, reason_of(&ScopError::Limit(e))),
    }
    v.finish()
}

fn reason_of(e: &ScopError) -> String {
    match e {
        ScopError::Unsupported { construct, .. } => format!("unsupported: {construct}"),
        ScopError::Limit(l) => format!("dimension limit: {l}"),
    }
}

/// Loop depths distributed across threads or lanes: the construct's own
/// (collapsed) loops and those of loop constructs nested inside it.
pub fn parallel_dims(dir: &Directive, scop: &Scop) -> Vec<usize> {
    let mut out = BTreeSet::new();
    dir.walk(&mut |d| {
        if !d.kind.is_loop() {
            return;
        }
        let Some(l) = d.body.and_then(|b| scop.loop_index(b)) else { return };
        for k in 0..d.collapse as usize {
            out.insert(l + k);
        }
    });
    // dims are indexed by statement depth; loops in the model are numbered in
    // order of appearance, so map loop indices to their depth
    out.into_iter()
        .filter_map(|li| scop.stmts.iter().find_map(|s| s.loops.iter().position(|&x| x == li)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Conservative check for regions with non-affine accesses or bounds:
/// any eligible write to a variable that has a non-affine access is a
/// potential race. Returns the verdict and the variables it covered.
pub fn may_ref_check(dir: &Directive, s: &Scop, dims: &[usize]) -> (Verdict, BTreeSet<String>) {
    let mut v = Verdict::new(dir);
    let all: Vec<&Access> = s.stmts.iter().flat_map(|st| st.accesses.iter()).collect();
    let irregular: BTreeSet<String> = all
        .iter()
        .filter(|a| !a.affine && a.is_eligible())
        .map(|a| a.array.clone())
        .collect();
    let dim = dims.first().copied().unwrap_or(0);
    let dim_name = s
        .stmts
        .iter()
        .find_map(|st| st.loops.get(dim))
        .map(|&l| s.loops[l].var.clone())
        .unwrap_or_else(|| "team".into());
    for name in &irregular {
        let accs: Vec<&&Access> = all.iter().filter(|a| &a.array == name && a.is_eligible()).collect();
        let Some(w) = accs.iter().find(|a| a.kind == AccessKind::Write) else { continue };
        let other = accs
            .iter()
            .find(|a| a.kind == AccessKind::Read)
            .unwrap_or(w);
        v.witnesses.push(RaceWitness {
            array: name.clone(),
            write_line: w.span.line,
            other_kind: other.kind.label(),
            other_line: other.span.line,
            dim: dim_name.clone(),
            dim_index: Some(dim),
            delta_sample: None,
            src_point: None,
            dst_point: None,
            params: None,
            may: true,
        });
    }
    (v.finish(), irregular)
}

/// Verdict for a `parallel` region: its loop constructs are checked, and
/// code every thread executes races on any eligible write.
fn check_parallel(dir: &Directive, p: &Program, dirs: &[Directive], opts: CheckOptions) -> Verdict {
    let mut v = Verdict::new(dir);
    let Some(body) = dir.body.and_then(|b| p.stmt(b)) else { return v };
    for w in replicated_accesses(body, p, dir) {
        if w.kind == AccessKind::Write && w.is_eligible() {
            v.witnesses.push(RaceWitness {
                array: w.array.clone(),
                write_line: w.span.line,
                other_kind: "write",
                other_line: w.span.line,
                dim: "team".into(),
                dim_index: None,
                delta_sample: None,
                src_point: None,
                dst_point: None,
                params: None,
                may: !w.affine,
            });
        }
    }
    let mut after_nowait = false;
    for c in &dir.children {
        match &c.kind {
            k if k.is_loop() => v.absorb(is_race_free(c, p, dirs, opts)),
            DirectiveKind::Parallel => v.absorb(check_parallel(c, p, dirs, opts)),
            DirectiveKind::Unsupported(name) => {
                v.absorb(Verdict::not_analyzable(c, format!("unsupported: {name}")));
            }
            DirectiveKind::Single | DirectiveKind::Master if after_nowait => v.notes.push(format!(
                "line {}: accesses in `{}` after a `nowait` construct are not checked against it",
                c.span.line,
                c.kind.spelling()
            )),
            _ => {}
        }
        if c.kind == DirectiveKind::Barrier {
            after_nowait = false;
        }
        if c.nowait {
            after_nowait = true;
        }
    }
    v.finish()
}

/// One verdict per outermost parallel construct, in source order.
pub fn check_program(p: &Program, opts: CheckOptions) -> Vec<Verdict> {
    let dirs = extract_directives(p);
    let mut out = Vec::new();
    for d in &dirs {
        match &d.kind {
            DirectiveKind::Parallel => out.push(check_parallel(d, p, &dirs, opts)),
            k if k.is_loop() => out.push(is_race_free(d, p, &dirs, opts)),
            DirectiveKind::Unsupported(name) => out.push(Verdict::not_analyzable(d, format!("unsupported: {name}"))),
            _ => {}
        }
    }
    out
}
