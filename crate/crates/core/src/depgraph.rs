//! Memory-based dependences between statement instances of a scop.

use std::fmt::{self, Write};

use thiserror::Error;

use crate::frontend::NodeId;
use crate::intset::{AffineExpr, Constraint, IntRel, IntSet, IntSetError};
use crate::scop::{Access, AccessKind, Scop, ScopStmt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DepError {
    #[error("region is not fully affine")]
    NotAffine,
    #[error(transparent)]
    Limit(#[from] IntSetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepKind {
    /// Read after write (flow).
    Raw,
    /// Write after read (anti).
    War,
    /// Write after write (output).
    Waw,
}

impl DepKind {
    pub fn label(self) -> &'static str {
        match self {
            DepKind::Raw => "RAW",
            DepKind::War => "WAR",
            DepKind::Waw => "WAW",
        }
    }

    fn of(src: AccessKind, dst: AccessKind) -> Option<Self> {
        match (src, dst) {
            (AccessKind::Write, AccessKind::Read) => Some(DepKind::Raw),
            (AccessKind::Read, AccessKind::Write) => Some(DepKind::War),
            (AccessKind::Write, AccessKind::Write) => Some(DepKind::Waw),
            (AccessKind::Read, AccessKind::Read) => None,
        }
    }
}

/// Reference to an access: statement index and access index in the scop.
pub type AccessRef = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Dependence {
    pub kind: DepKind,
    pub src: AccessRef,
    pub dst: AccessRef,
    /// Source instance to target instance; sources run first.
    pub rel: IntRel,
    /// Number of loops shared by both statements.
    pub depth: usize,
    /// Distance vectors over the shared loops (`None` when none are shared).
    pub delta: Option<IntSet>,
    /// Both accesses sit inside `ordered` blocks.
    pub ordered: bool,
}

impl Dependence {
    /// The relation oriented from the later instance back to the earlier
    /// one, as dependence relations are commonly printed.
    pub fn backward(&self) -> IntRel {
        self.rel.inverse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rdg<'a> {
    pub scop: &'a Scop,
    pub edges: Vec<Dependence>,
}

impl<'a> Rdg<'a> {
    pub fn access(&self, r: AccessRef) -> &'a Access {
        &self.scop.stmts[r.0].accesses[r.1]
    }

    pub fn stmt(&self, r: AccessRef) -> &'a ScopStmt {
        &self.scop.stmts[r.0]
    }

    /// Edges whose endpoints both lie inside the loop `node`.
    pub fn restrict_to_loop(&self, node: NodeId) -> Rdg<'a> {
        let Some(l) = self.scop.loop_index(node) else {
            return Rdg { scop: self.scop, edges: Vec::new() };
        };
        let inside = |r: AccessRef| self.scop.stmts[r.0].loops.contains(&l);
        Rdg {
            scop: self.scop,
            edges: self.edges.iter().filter(|e| inside(e.src) && inside(e.dst)).cloned().collect(),
        }
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let (a, b) = (self.access(e.src), self.access(e.dst));
            writeln!(
                out,
                "{} {} -> {} ({} ~ {}): {}",
                e.kind.label(),
                self.stmt(e.src).id,
                self.stmt(e.dst).id,
                a.text,
                b.text,
                e.rel
            )
            .unwrap();
            if let Some(d) = &e.delta {
                writeln!(out, "  delta: {d}").unwrap();
            }
        }
        out
    }
}

impl fmt::Display for Rdg<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

fn primed(dims: &[String]) -> Vec<String> {
    dims.iter().map(|d| format!("{d}'")).collect()
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Instances `p` of `ps` that precede instances `q` of `qs` in sequential
/// execution order.
pub fn precedence(scop: &Scop, ps: &ScopStmt, qs: &ScopStmt) -> Result<IntRel, IntSetError> {
    let src = ps.dims.clone();
    let dst = primed(&qs.dims);
    let (sn, dn, pn) = (strs(&src), strs(&dst), strs(&scop.params));
    let c = ps.common_depth(qs);
    let mut rel = IntRel::empty(&sn, &dn, &pn)?;
    let eq = |k: usize| Constraint::eq(AffineExpr::var(sn[k]), AffineExpr::var(dn[k]));
    for l in 0..c {
        let mut cs: Vec<Constraint> = (0..l).map(eq).collect();
        let dir = scop.loops[ps.loops[l]].dir;
        let diff = (AffineExpr::var(dn[l]) - AffineExpr::var(sn[l])) * dir;
        cs.push(Constraint::ge(diff, AffineExpr::constant(1)));
        rel = rel.union(&IntRel::from_constraints(&sn, &dn, &pn, &cs)?)?;
    }
    if ps.order < qs.order {
        let cs: Vec<Constraint> = (0..c).map(eq).collect();
        rel = rel.union(&IntRel::from_constraints(&sn, &dn, &pn, &cs)?)?;
    }
    Ok(rel)
}

/// Pairs of instances touching the same cell through accesses `a` and
/// `b` (which must be affine and name the same array).
fn same_cell(scop: &Scop, ps: &ScopStmt, a: &Access, qs: &ScopStmt, b: &Access) -> Result<IntRel, IntSetError> {
    let src = ps.dims.clone();
    let dst = primed(&qs.dims);
    let (sn, dn, pn) = (strs(&src), strs(&dst), strs(&scop.params));
    let mut cs = Vec::new();
    for (x, y) in a.subs.iter().zip(&b.subs) {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        let y = y.rename(|v| if qs.dims.iter().any(|d| d == v) { format!("{v}'") } else { v.to_string() });
        cs.push(Constraint::eq(x.clone(), y));
    }
    IntRel::from_constraints(&sn, &dn, &pn, &cs)
}

/// All conflicting instance pairs between eligible accesses, one edge per
/// ordered access pair with a nonempty relation.
pub fn compute_dependences<'a>(scop: &'a Scop, eligible: impl Fn(&Access) -> bool) -> Result<Rdg<'a>, DepError> {
    let mut refs: Vec<(usize, usize)> = Vec::new();
    for (si, s) in scop.stmts.iter().enumerate() {
        for (ai, a) in s.accesses.iter().enumerate() {
            if eligible(a) {
                if !a.affine || a.map.is_none() {
                    return Err(DepError::NotAffine);
                }
                refs.push((si, ai));
            }
        }
    }
    let mut edges = Vec::new();
    for &(si, ai) in &refs {
        for &(sj, aj) in &refs {
            let (ps, qs) = (&scop.stmts[si], &scop.stmts[sj]);
            let (a, b) = (&ps.accesses[ai], &qs.accesses[aj]);
            if a.array != b.array || a.subs.len() != b.subs.len() {
                continue;
            }
            let Some(kind) = DepKind::of(a.kind, b.kind) else { continue };
            let prec = precedence(scop, ps, qs)?;
            if prec.n_pieces() == 0 {
                continue;
            }
            let src_dom = ps.domain.clone();
            let dst_dom = qs.domain.clone().with_dim_names(&strs(&primed(&qs.dims)))?;
            let rel = same_cell(scop, ps, a, qs, b)?
                .intersect_domain(&src_dom)?
                .intersect_range(&dst_dom)?
                .intersect(&prec)?
                .simplify()?
                .named(ps.id.as_str(), qs.id.as_str());
            if rel.is_empty()? {
                continue;
            }
            let depth = ps.common_depth(qs);
            let delta = if depth == 0 { None } else { Some(common_deltas(&rel, ps, qs, depth)?) };
            edges.push(Dependence {
                kind,
                src: (si, ai),
                dst: (sj, aj),
                rel,
                depth,
                delta,
                ordered: a.in_ordered && b.in_ordered,
            });
        }
    }
    Ok(Rdg { scop, edges })
}

fn common_deltas(rel: &IntRel, ps: &ScopStmt, qs: &ScopStmt, depth: usize) -> Result<IntSet, IntSetError> {
    let src = &ps.dims[..depth];
    let dst = primed(&qs.dims[..depth]);
    let keep: Vec<&str> = src.iter().map(String::as_str).chain(dst.iter().map(String::as_str)).collect();
    let projected = rel.as_set().project_onto(&keep)?;
    let names: Vec<String> = src.iter().map(|d| format!("d{d}")).collect();
    IntRel::from_set(projected, depth)?.deltas_named(&strs(&names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{extract_directives, parse};
    use crate::scop::construct_scop;

    fn rdg_edges(src: &str) -> Vec<(DepKind, String, String)> {
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        let s = construct_scop(&ds[0], &p, &ds).unwrap();
        let g = compute_dependences(&s, Access::is_eligible).unwrap();
        g.edges
            .iter()
            .map(|e| (e.kind, g.access(e.src).text.clone(), g.access(e.dst).text.clone()))
            .collect()
    }

    const NEST: &str = "param m, n;\nint i, j;\ndouble b[m][n];\n#pragma omp parallel for private(j)\n\
        for (i = 0; i < m; i++)\n  for (j = 1; j < n; j++)\n    b[i][j] = b[i][j-1];\n";

    #[test]
    fn nest_has_single_flow_edge() {
        let p = parse(NEST).unwrap();
        let ds = extract_directives(&p);
        let s = construct_scop(&ds[0], &p, &ds).unwrap();
        let g = compute_dependences(&s, Access::is_eligible).unwrap();
        assert_eq!(g.edges.len(), 1);
        let e = &g.edges[0];
        assert_eq!(e.kind, DepKind::Raw);
        assert_eq!(
            e.backward().to_string(),
            "{ S0[i', j'] -> S0[i' , j' - 1] : 0 <= i' <= m - 1 and 2 <= j' <= n - 1 }"
                .replace("i' ,", "i',")
        );
        let d = e.delta.as_ref().unwrap();
        assert_eq!(d.to_string(), "{ [di, dj] : di = 0 and dj = 1 and m >= 1 and n >= 3 }");
    }

    #[test]
    fn disjoint_arrays_have_no_edges() {
        let src = "param n;\nint i;\ndouble a[n], b[n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++)\n  a[i] = b[i] + 1;\n";
        assert!(rdg_edges(src).is_empty());
    }

    #[test]
    fn shared_scalar_has_all_three_kinds() {
        let src = "param len = 8;\nint i, j;\ndouble temp, sum;\ndouble u[len][len];\n\
            #pragma omp parallel for private(temp, i, j)\n\
            for (i = 0; i < len; i++)\n  for (j = 0; j < len; j++) {\n    temp = u[i][j];\n    sum = sum + temp * temp;\n  }\n";
        let kinds: Vec<DepKind> = rdg_edges(src).into_iter().map(|e| e.0).collect();
        for k in [DepKind::Raw, DepKind::War, DepKind::Waw] {
            assert!(kinds.contains(&k), "{kinds:?}");
        }
    }

    #[test]
    fn restriction_to_loops() {
        let src = "param n;\nint i;\ndouble b[n][n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++)\n  for (int j = 1; j < n; j++)\n    b[i][j] = b[i][j-1];\n";
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        let s = construct_scop(&ds[0], &p, &ds).unwrap();
        let g = compute_dependences(&s, Access::is_eligible).unwrap();
        let inner = g.restrict_to_loop(s.loops[1].node);
        assert_eq!(inner.edges.len(), 1);
        assert_eq!(g.restrict_to_loop(s.loops[0].node), g);
        assert!(g.restrict_to_loop(usize::MAX).edges.is_empty());
    }

    #[test]
    fn non_affine_precondition() {
        let src = "param n;\nint i;\nint a[n], b[n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++)\n  a[b[i]] = 0;\n";
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        let s = construct_scop(&ds[0], &p, &ds).unwrap();
        assert_eq!(compute_dependences(&s, Access::is_eligible).unwrap_err(), DepError::NotAffine);
    }
}
