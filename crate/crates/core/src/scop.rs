//! Polyhedral model of a directive region: iteration domains, sequential
//! schedule and access maps.

use std::collections::HashMap;
use std::fmt::{self, Write};

use num_traits::Zero;
use thiserror::Error;

use crate::frontend::{
    self, AssignOp, BinOp, CmpOp, Directive, DirectiveKind, Expr, ForLoop, NodeId, Program,
    ReductionOp, Span, Stmt, StmtKind, UnOp, VarClass,
};
use crate::intset::{AffineExpr, Constraint, IntRel, IntSet, IntSetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScopError {
    #[error("unsupported: {construct}")]
    Unsupported { construct: String, span: Span },
    #[error(transparent)]
    Limit(#[from] IntSetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
}

impl AccessKind {
    pub fn label(self) -> &'static str {
        match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub array: String,
    pub kind: AccessKind,
    /// Subscripts as affine expressions; `None` entries are non-affine.
    pub subs: Vec<Option<AffineExpr>>,
    /// Iteration vector to array cell; `None` when not affine.
    pub map: Option<IntRel>,
    pub affine: bool,
    pub var_class: VarClass,
    /// Part of an update matching the variable's declared reduction.
    pub reduction_update: bool,
    /// Lexically inside an `ordered` block.
    pub in_ordered: bool,
    pub span: Span,
    /// Source text of the reference.
    pub text: String,
}

impl Access {
    /// Whether this access can take part in a cross-thread conflict.
    pub fn is_eligible(&self) -> bool {
        !self.var_class.is_per_thread() && !self.reduction_update
    }
}

/// A loop of the region, outermost first in `Scop::loops` order of
/// appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopDim {
    pub var: String,
    /// +1 for ascending loops, -1 for descending ones.
    pub dir: i64,
    pub node: NodeId,
    pub span: Span,
    pub affine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedEntry {
    /// Position among the statements of the enclosing body.
    Seq(usize),
    /// Loop dimension, by index into `Scop::loops`.
    Dim(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopStmt {
    pub id: String,
    pub node: NodeId,
    pub span: Span,
    /// Enclosing loop variables within the region, outermost first.
    pub dims: Vec<String>,
    /// Indices into `Scop::loops`, parallel to `dims`.
    pub loops: Vec<usize>,
    pub domain: IntSet,
    pub schedule: Vec<SchedEntry>,
    /// Global textual order of the statement.
    pub order: usize,
    pub accesses: Vec<Access>,
    pub text: String,
}

impl ScopStmt {
    pub fn reads(&self) -> impl Iterator<Item = &Access> {
        self.accesses.iter().filter(|a| a.kind == AccessKind::Read)
    }

    pub fn writes(&self) -> impl Iterator<Item = &Access> {
        self.accesses.iter().filter(|a| a.kind == AccessKind::Write)
    }

    /// Number of leading loops shared with `other`.
    pub fn common_depth(&self, other: &ScopStmt) -> usize {
        self.loops.iter().zip(&other.loops).take_while(|(a, b)| a == b).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scop {
    /// Pragma statement of the region.
    pub region: NodeId,
    pub kind: DirectiveKind,
    pub span: Span,
    /// Symbolic parameters: parameters without a default, then loop
    /// variables of loops enclosing the region.
    pub params: Vec<String>,
    pub loops: Vec<LoopDim>,
    pub stmts: Vec<ScopStmt>,
    pub fully_affine: bool,
    /// Why the region is not fully affine.
    pub non_affine: Vec<(Span, String)>,
}

impl Scop {
    /// Accesses that route the region to the conservative fallback.
    pub fn mark_non_affine(&self) -> Vec<&Access> {
        self.stmts
            .iter()
            .flat_map(|s| s.accesses.iter())
            .filter(|a| !a.affine)
            .collect()
    }

    pub fn loop_index(&self, node: NodeId) -> Option<usize> {
        self.loops.iter().position(|l| l.node == node)
    }

    /// Iteration domain, schedule and access maps, one block each.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "Iteration Domain :").unwrap();
        for s in &self.stmts {
            writeln!(out, "  {}", s.domain).unwrap();
        }
        writeln!(out, "Schedule :").unwrap();
        for s in &self.stmts {
            let items: Vec<String> = s
                .schedule
                .iter()
                .map(|e| match e {
                    SchedEntry::Seq(k) => k.to_string(),
                    SchedEntry::Dim(l) => {
                        let lp = &self.loops[*l];
                        if lp.dir < 0 {
                            format!("-{}", lp.var)
                        } else {
                            lp.var.clone()
                        }
                    }
                })
                .collect();
            writeln!(out, "  {{ {}[{}] -> [{}] }}", s.id, s.dims.join(", "), items.join(", ")).unwrap();
        }
        writeln!(out, "Access Map :").unwrap();
        for s in &self.stmts {
            for a in &s.accesses {
                let body = match &a.map {
                    Some(m) => m.to_string(),
                    None => format!("{{ {}[{}] -> {} (non-affine) }}", s.id, s.dims.join(", "), a.text),
                };
                writeln!(out, "  {} {}", a.kind.label(), body).unwrap();
            }
        }
        out
    }
}

/// Directive of every pragma statement, by statement id.
pub fn directive_index(dirs: &[Directive]) -> HashMap<NodeId, &Directive> {
    let mut m = HashMap::new();
    for d in dirs {
        d.walk(&mut |x| {
            if !x.implicit {
                m.insert(x.stmt, x);
            }
        });
    }
    m
}

/// Statements from the program root down to (and including) `id`.
pub fn path_to(p: &Program, id: NodeId) -> Vec<&Stmt> {
    fn go<'a>(s: &'a Stmt, id: NodeId, path: &mut Vec<&'a Stmt>) -> bool {
        path.push(s);
        if s.id == id {
            return true;
        }
        let found = match &s.kind {
            StmtKind::For(l) => go(&l.body, id, path),
            StmtKind::Block(items) => items.iter().any(|c| go(c, id, path)),
            StmtKind::Omp { body, .. } => go(body, id, path),
            _ => false,
        };
        if !found {
            path.pop();
        }
        found
    }
    let mut path = Vec::new();
    for s in &p.body {
        if go(s, id, &mut path) {
            break;
        }
    }
    path
}

/// Builds the polyhedral model of the region governed by `region`.
pub fn construct_scop(region: &Directive, p: &Program, dirs: &[Directive]) -> Result<Scop, ScopError> {
    let index = directive_index(dirs);
    let path = path_to(p, region.stmt);
    let Some(stmt) = path.last() else {
        return Err(ScopError::Unsupported {
            construct: "directive not found in program".into(),
            span: region.span,
        });
    };
    let mut b = Builder::new(p, &index);
    for anc in &path[..path.len() - 1] {
        if let StmtKind::For(l) = &anc.kind {
            b.add_outer_loop(l);
        }
    }
    let mut dstack = Vec::new();
    for anc in &path {
        if let Some(d) = index.get(&anc.id) {
            dstack.push(*d);
        }
    }
    let body = match &stmt.kind {
        StmtKind::Omp { body, .. } => body,
        _ => {
            return Err(ScopError::Unsupported {
                construct: "not a directive".into(),
                span: region.span,
            })
        }
    };
    let mut cx = Cx {
        loops: Vec::new(),
        dnf: vec![b.outer_ctx.clone()],
        locals: b.outer_locals.clone(),
        sched: vec![0],
        dirs: dstack,
        in_ordered: false,
    };
    b.walk(body, &mut cx)?;
    let fully_affine = b.non_affine.is_empty();
    Ok(Scop {
        region: region.stmt,
        kind: region.kind.clone(),
        span: region.span,
        params: b.params,
        loops: b.loops,
        stmts: b.stmts,
        fully_affine,
        non_affine: b.non_affine,
    })
}

/// Accesses of a statement subtree executed by every thread of a team,
/// with classes resolved against `dir`. Nested directives are skipped.
pub fn replicated_accesses(s: &Stmt, p: &Program, dir: &Directive) -> Vec<Access> {
    let index = HashMap::new();
    let mut b = Builder::new(p, &index);
    let mut out = Vec::new();
    b.replicated(s, dir, &mut out);
    out
}

struct Builder<'a> {
    p: &'a Program,
    index: &'a HashMap<NodeId, &'a Directive>,
    defaults: HashMap<&'a str, i64>,
    params: Vec<String>,
    /// Loop variables of every loop seen so far (outer and in-region).
    loop_vars: Vec<String>,
    outer_ctx: Vec<Constraint>,
    outer_locals: Vec<String>,
    loops: Vec<LoopDim>,
    stmts: Vec<ScopStmt>,
    non_affine: Vec<(Span, String)>,
}

struct Cx<'a> {
    loops: Vec<usize>,
    /// Domain constraints as a disjunction of conjunctions.
    dnf: Vec<Vec<Constraint>>,
    locals: Vec<String>,
    sched: Vec<usize>,
    dirs: Vec<&'a Directive>,
    in_ordered: bool,
}

const MAX_PIECES: usize = 16;

impl<'a> Builder<'a> {
    fn new(p: &'a Program, index: &'a HashMap<NodeId, &'a Directive>) -> Self {
        let mut defaults = HashMap::new();
        let mut params = Vec::new();
        for prm in &p.params {
            match prm.default {
                Some(v) => {
                    defaults.insert(prm.name.as_str(), v);
                }
                None => params.push(prm.name.clone()),
            }
        }
        Builder {
            p,
            index,
            defaults,
            params,
            loop_vars: Vec::new(),
            outer_ctx: Vec::new(),
            outer_locals: Vec::new(),
            loops: Vec::new(),
            stmts: Vec::new(),
            non_affine: Vec::new(),
        }
    }

    fn replicated(&mut self, s: &Stmt, dir: &Directive, out: &mut Vec<Access>) {
        let dirs = [dir];
        match &s.kind {
            StmtKind::Assign { lhs, op, rhs } => {
                let red = reduction_update(lhs, *op, rhs, &dirs);
                out.extend(self.expr_reads(rhs, &dirs, false));
                if *op != AssignOp::Set {
                    out.push(self.access(lhs, AccessKind::Read, &dirs, red, false));
                }
                out.extend(self.subscript_reads(lhs, &dirs, false));
                out.push(self.access(lhs, AccessKind::Write, &dirs, red, false));
            }
            StmtKind::Decl(d) => {
                if let Some(init) = &d.init {
                    out.extend(self.expr_reads(init, &dirs, false));
                    let v = Expr::Var(d.name.clone(), d.span);
                    out.push(self.access(&v, AccessKind::Write, &dirs, false, false));
                }
            }
            StmtKind::For(l) => {
                let v = Expr::Var(l.var.clone(), s.span);
                out.push(self.access(&v, AccessKind::Write, &dirs, false, false));
                out.extend(self.expr_reads(&l.init, &dirs, false));
                out.extend(self.expr_reads(&l.bound, &dirs, false));
                self.loop_vars.push(l.var.clone());
                self.replicated(&l.body, dir, out);
                self.loop_vars.pop();
            }
            StmtKind::Block(items) => items.iter().for_each(|c| self.replicated(c, dir, out)),
            StmtKind::Omp { .. } | StmtKind::OmpStandalone(_) | StmtKind::Empty => {}
        }
    }

    /// A loop enclosing the region: its variable becomes a parameter, its
    /// bounds (when affine and free of `min`/`max` disjunctions) context.
    fn add_outer_loop(&mut self, l: &ForLoop) {
        self.params.push(l.var.clone());
        self.loop_vars.push(l.var.clone());
        let local = format!("{}.k", l.var);
        let strided = l.step.abs() != 1;
        if let Some(dnf) = self.loop_bounds(l, strided.then_some(local.as_str())) {
            if dnf.len() == 1 {
                self.outer_ctx.extend(dnf.into_iter().next().unwrap());
                if strided {
                    self.outer_locals.push(local);
                }
            }
        }
    }

    fn is_symbol(&self, n: &str) -> bool {
        self.params.iter().any(|p| p == n) || self.loop_vars.iter().any(|v| v == n)
    }

    fn affine(&self, e: &Expr) -> Option<AffineExpr> {
        match e {
            Expr::Int(v, _) => Some(AffineExpr::constant(*v)),
            Expr::Var(n, _) => {
                if let Some(v) = self.defaults.get(n.as_str()) {
                    Some(AffineExpr::constant(*v))
                } else if self.is_symbol(n) {
                    Some(AffineExpr::var(n.as_str()))
                } else {
                    None
                }
            }
            Expr::Unary { op: UnOp::Neg, expr, .. } => self.affine(expr).map(|a| -a),
            Expr::Binary { op, lhs, rhs, .. } => {
                let (a, b) = (self.affine(lhs)?, self.affine(rhs)?);
                match op {
                    BinOp::Add => Some(a + b),
                    BinOp::Sub => Some(a - b),
                    BinOp::Mul if a.is_constant() => Some(b.scale(a.constant_term())),
                    BinOp::Mul if b.is_constant() => Some(a.scale(b.constant_term())),
                    BinOp::Div | BinOp::Mod if a.is_constant() && b.is_constant() => {
                        let (x, y) = (a.constant_term(), b.constant_term());
                        if y.is_zero() {
                            return None;
                        }
                        // C semantics: truncating division
                        let q = x / y;
                        Some(AffineExpr::constant(if *op == BinOp::Div { q.clone() } else { x - q * y }))
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Constraints `var OP e` in disjunctive normal form, with `min`/`max`
    /// expanded.
    fn bound_dnf(&self, var: &str, cmp: CmpOp, e: &Expr) -> Option<Vec<Vec<Constraint>>> {
        if let Expr::Call { name, args, .. } = e {
            let a = self.bound_dnf(var, cmp, &args[0])?;
            let b = self.bound_dnf(var, cmp, &args[1])?;
            let upper = matches!(cmp, CmpOp::Lt | CmpOp::Le);
            // below a minimum / above a maximum: both must hold
            return Some(if (name == "min") == upper { conj(&a, &b) } else { [a, b].concat() });
        }
        let b = self.affine(e)?;
        let v = AffineExpr::var(var);
        Some(vec![vec![match cmp {
            CmpOp::Lt => Constraint::lt(v, b),
            CmpOp::Le => Constraint::le(v, b),
            CmpOp::Gt => Constraint::gt(v, b),
            CmpOp::Ge => Constraint::ge(v, b),
        }]])
    }

    /// Domain constraints of one loop; `local` names the stride counter
    /// when the step is not ±1.
    fn loop_bounds(&self, l: &ForLoop, local: Option<&str>) -> Option<Vec<Vec<Constraint>>> {
        let up = l.step > 0;
        let bound = self.bound_dnf(&l.var, l.cmp, &l.bound)?;
        let start = match local {
            Some(k) if l.step.abs() != 1 => {
                let init = self.affine(&l.init)?;
                let v = AffineExpr::var(l.var.as_str());
                vec![vec![
                    Constraint::eq(v, init + AffineExpr::term(k, l.step)),
                    Constraint::ge(AffineExpr::var(k), AffineExpr::zero()),
                ]]
            }
            _ => self.bound_dnf(&l.var, if up { CmpOp::Ge } else { CmpOp::Le }, &l.init)?,
        };
        Some(conj(&start, &bound))
    }

    fn walk(&mut self, s: &'a Stmt, cx: &mut Cx<'a>) -> Result<(), ScopError> {
        match &s.kind {
            StmtKind::Block(items) => {
                for c in items {
                    self.walk(c, cx)?;
                }
            }
            StmtKind::Empty => {}
            StmtKind::Decl(d) => {
                if let Some(init) = &d.init {
                    let mut acc = self.expr_reads(init, &cx.dirs, cx.in_ordered);
                    let v = Expr::Var(d.name.clone(), d.span);
                    acc.push(self.access(&v, AccessKind::Write, &cx.dirs, false, cx.in_ordered));
                    let text = format!("{} = {}", d.name, frontend::pretty_expr(init));
                    self.push_stmt(s, acc, text, cx)?;
                }
            }
            StmtKind::Assign { lhs, op, rhs } => {
                let red = reduction_update(lhs, *op, rhs, &cx.dirs);
                let mut acc = self.expr_reads(rhs, &cx.dirs, cx.in_ordered);
                if *op != AssignOp::Set {
                    acc.push(self.access(lhs, AccessKind::Read, &cx.dirs, red, cx.in_ordered));
                }
                acc.extend(self.subscript_reads(lhs, &cx.dirs, cx.in_ordered));
                acc.push(self.access(lhs, AccessKind::Write, &cx.dirs, red, cx.in_ordered));
                let text = format!("{} {} {}", frontend::pretty_expr(lhs), op.symbol(), frontend::pretty_expr(rhs));
                self.push_stmt(s, acc, text, cx)?;
            }
            StmtKind::For(l) => self.walk_loop(s, l, cx)?,
            StmtKind::Omp { pragma, body } => {
                let d = self.index.get(&s.id).copied();
                match &pragma.kind {
                    k if k.is_loop() || *k == DirectiveKind::Parallel => {
                        if let Some(d) = d {
                            cx.dirs.push(d);
                        }
                        self.walk(body, cx)?;
                        if d.is_some() {
                            cx.dirs.pop();
                        }
                    }
                    DirectiveKind::Ordered => {
                        let saved = cx.in_ordered;
                        cx.in_ordered = true;
                        self.walk(body, cx)?;
                        cx.in_ordered = saved;
                    }
                    k => {
                        return Err(ScopError::Unsupported {
                            construct: k.spelling().to_string(),
                            span: pragma.span,
                        })
                    }
                }
            }
            StmtKind::OmpStandalone(pragma) => {
                return Err(ScopError::Unsupported {
                    construct: pragma.kind.spelling().to_string(),
                    span: pragma.span,
                })
            }
        }
        Ok(())
    }

    fn walk_loop(&mut self, s: &'a Stmt, l: &'a ForLoop, cx: &mut Cx<'a>) -> Result<(), ScopError> {
        // The header writes the induction variable once per iteration of
        // the enclosing loops; this matters when that variable is shared.
        let header_var = Expr::Var(l.var.clone(), s.span);
        let class = resolve_class(&l.var, &cx.dirs);
        if !class.is_per_thread() {
            let acc = vec![
                self.access(&header_var, AccessKind::Read, &cx.dirs, false, cx.in_ordered),
                self.access(&header_var, AccessKind::Write, &cx.dirs, false, cx.in_ordered),
            ];
            let text = format!("for ({} ...)", l.var);
            self.push_stmt(s, acc, text, cx)?;
        }
        let local = format!("{}.k", l.var);
        let strided = l.step.abs() != 1;
        let bounds = self.loop_bounds(l, strided.then_some(local.as_str()));
        let affine = bounds.is_some();
        if !affine {
            self.non_affine.push((s.span, format!("non-affine bounds of loop `{}`", l.var)));
        }
        let idx = self.loops.len();
        self.loops.push(LoopDim {
            var: l.var.clone(),
            dir: l.step.signum(),
            node: s.id,
            span: s.span,
            affine,
        });
        self.loop_vars.push(l.var.clone());
        let saved_dnf = cx.dnf.clone();
        let saved_locals = cx.locals.len();
        if let Some(b) = bounds {
            cx.dnf = conj(&cx.dnf, &b);
            if strided {
                cx.locals.push(local);
            }
        }
        if cx.dnf.len() > MAX_PIECES {
            return Err(IntSetError::DimensionLimit {
                what: "domain pieces",
                limit: MAX_PIECES,
            }
            .into());
        }
        cx.loops.push(idx);
        cx.sched.push(0);
        let r = self.walk(&l.body, cx);
        cx.sched.pop();
        cx.loops.pop();
        cx.dnf = saved_dnf;
        cx.locals.truncate(saved_locals);
        self.loop_vars.pop();
        *cx.sched.last_mut().unwrap() += 1;
        r
    }

    fn push_stmt(&mut self, s: &Stmt, accesses: Vec<Access>, text: String, cx: &mut Cx<'a>) -> Result<(), ScopError> {
        let dims: Vec<String> = cx.loops.iter().map(|&i| self.loops[i].var.clone()).collect();
        let id = format!("S{}", self.stmts.len());
        let dn: Vec<&str> = dims.iter().map(String::as_str).collect();
        let pn: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let ln: Vec<&str> = cx.locals.iter().map(String::as_str).collect();
        let mut domain = IntSet::empty(&dn, &pn);
        for conj in &cx.dnf {
            let piece = IntSet::with_locals(&dn, &pn, &ln, conj)?;
            domain = domain.union(&piece)?;
        }
        let domain = domain.named(id.clone());
        let mut schedule = Vec::new();
        for (k, &pos) in cx.sched.iter().enumerate() {
            schedule.push(SchedEntry::Seq(pos));
            if k < cx.loops.len() {
                schedule.push(SchedEntry::Dim(cx.loops[k]));
            }
        }
        let accesses = accesses
            .into_iter()
            .map(|mut a| {
                a.map = self.access_map(&id, &dn, &pn, &a)?;
                a.affine = a.map.is_some();
                Ok(a)
            })
            .collect::<Result<Vec<_>, IntSetError>>()?;
        for a in &accesses {
            if !a.affine {
                self.non_affine.push((a.span, format!("non-affine subscript in `{}`", a.text)));
            }
        }
        self.stmts.push(ScopStmt {
            id,
            node: s.id,
            span: s.span,
            dims,
            loops: cx.loops.clone(),
            domain,
            schedule,
            order: self.stmts.len(),
            accesses,
            text,
        });
        *cx.sched.last_mut().unwrap() += 1;
        Ok(())
    }

    fn access_map(&self, id: &str, dims: &[&str], params: &[&str], a: &Access) -> Result<Option<IntRel>, IntSetError> {
        let subs: Option<Vec<&AffineExpr>> = a.subs.iter().map(Option::as_ref).collect();
        let Some(subs) = subs else { return Ok(None) };
        if subs.iter().any(|e| e.vars().any(|v| !dims.contains(&v) && !params.contains(&v))) {
            return Ok(None);
        }
        let out: Vec<String> = (0..subs.len()).map(|k| format!("{}.{k}", a.array)).collect();
        let on: Vec<&str> = out.iter().map(String::as_str).collect();
        let cs: Vec<Constraint> = subs
            .iter()
            .zip(&on)
            .map(|(e, o)| Constraint::eq(AffineExpr::var(*o), (*e).clone()))
            .collect();
        Ok(Some(IntRel::from_constraints(dims, &on, params, &cs)?.named(id, a.array.as_str())))
    }

    fn access(&self, e: &Expr, kind: AccessKind, dirs: &[&Directive], red: bool, in_ordered: bool) -> Access {
        let (name, subs) = match e {
            Expr::Var(n, _) => (n.clone(), Vec::new()),
            Expr::Index { name, subs, .. } => (name.clone(), subs.iter().map(|s| self.affine(s)).collect()),
            _ => unreachable!("not an lvalue"),
        };
        let affine = subs.iter().all(Option::is_some);
        Access {
            var_class: resolve_class(&name, dirs),
            array: name,
            kind,
            subs,
            map: None,
            affine,
            reduction_update: red,
            in_ordered,
            span: e.span(),
            text: frontend::pretty_expr(e),
        }
    }

    /// Memory reads in an expression, including those inside subscripts.
    fn expr_reads(&self, e: &Expr, dirs: &[&Directive], in_ordered: bool) -> Vec<Access> {
        let mut out = Vec::new();
        e.visit(&mut |x| match x {
            Expr::Var(n, _) if !self.is_symbol(n) && !self.defaults.contains_key(n.as_str()) && self.p.param(n).is_none() => {
                out.push(self.access(x, AccessKind::Read, dirs, false, in_ordered));
            }
            Expr::Index { .. } => out.push(self.access(x, AccessKind::Read, dirs, false, in_ordered)),
            _ => {}
        });
        out
    }

    fn subscript_reads(&self, lhs: &Expr, dirs: &[&Directive], in_ordered: bool) -> Vec<Access> {
        match lhs {
            Expr::Index { subs, .. } => subs.iter().flat_map(|s| self.expr_reads(s, dirs, in_ordered)).collect(),
            _ => Vec::new(),
        }
    }
}

fn conj(a: &[Vec<Constraint>], b: &[Vec<Constraint>]) -> Vec<Vec<Constraint>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.iter().chain(y).cloned().collect());
        }
    }
    out
}

fn resolve_class(name: &str, dirs: &[&Directive]) -> VarClass {
    dirs.iter().rev().find_map(|d| d.class_of(name)).unwrap_or(VarClass::Shared)
}

/// Whether `lhs op rhs` is the update of a declared reduction: `x ⊕= e`,
/// `x = x ⊕ e`, `x = e ⊕ x` (commutative ⊕) or `x = max(x, e)`, with `x`
/// absent from `e`.
fn reduction_update(lhs: &Expr, op: AssignOp, rhs: &Expr, dirs: &[&Directive]) -> bool {
    let Expr::Var(x, _) = lhs else { return false };
    let VarClass::Reduction(red) = resolve_class(x, dirs) else {
        return false;
    };
    let free_of_x = |e: &Expr| {
        let mut found = false;
        e.visit(&mut |y| {
            if matches!(y, Expr::Var(n, _) if n == x) {
                found = true;
            }
        });
        !found
    };
    let is_x = |e: &Expr| matches!(e, Expr::Var(n, _) if n == x);
    let bin = |b: BinOp| match red {
        ReductionOp::Add => b == BinOp::Add,
        ReductionOp::Sub => b == BinOp::Sub || b == BinOp::Add,
        ReductionOp::Mul => b == BinOp::Mul,
        ReductionOp::And => b == BinOp::And,
        ReductionOp::Or => b == BinOp::Or,
        ReductionOp::Max | ReductionOp::Min => false,
    };
    match op {
        AssignOp::Set => match rhs {
            Expr::Binary { op: b, .. } if bin(*b) => {
                let mut operands = Vec::new();
                flatten_chain(rhs, &bin, false, &mut operands);
                let xs = operands.iter().filter(|(_, e)| is_x(e)).count();
                xs == 1
                    && operands.iter().all(|(neg, e)| if is_x(e) { !neg } else { free_of_x(e) })
            }
            Expr::Call { name, args, .. } => {
                let want = match red {
                    ReductionOp::Max => "max",
                    ReductionOp::Min => "min",
                    _ => return false,
                };
                name == want
                    && ((is_x(&args[0]) && free_of_x(&args[1])) || (is_x(&args[1]) && free_of_x(&args[0])))
            }
            _ => false,
        },
        _ => op.binop().is_some_and(bin) && free_of_x(rhs),
    }
}

/// Operands of a chain of `ok` operators, flagged when subtracted.
fn flatten_chain<'e>(e: &'e Expr, ok: &dyn Fn(BinOp) -> bool, neg: bool, out: &mut Vec<(bool, &'e Expr)>) {
    match e {
        Expr::Binary { op, lhs, rhs, .. } if ok(*op) => {
            flatten_chain(lhs, ok, neg, out);
            flatten_chain(rhs, ok, neg ^ (*op == BinOp::Sub), out);
        }
        _ => out.push((neg, e)),
    }
}

impl fmt::Display for Scop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{extract_directives, parse};

    fn scop_of(src: &str, k: usize) -> Scop {
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        construct_scop(&ds[k], &p, &ds).unwrap()
    }

    const NEST: &str = "param m, n;\nint i, j;\ndouble b[m][n];\n#pragma omp parallel for private(j)\n\
        for (i = 0; i < m; i++)\n  for (j = 1; j < n; j++)\n    b[i][j] = b[i][j-1];\n";

    #[test]
    fn two_dim_nest_domain_and_accesses() {
        let s = scop_of(NEST, 0);
        assert!(s.fully_affine);
        assert_eq!(s.stmts.len(), 1);
        let st = &s.stmts[0];
        assert_eq!(st.domain.to_string(), "{ S0[i, j] : 0 <= i <= m - 1 and 1 <= j <= n - 1 }");
        let maps: Vec<String> = st.accesses.iter().map(|a| a.map.as_ref().unwrap().to_string()).collect();
        assert_eq!(maps, ["{ S0[i, j] -> b[i, j - 1] }", "{ S0[i, j] -> b[i, j] }"]);
        assert_eq!(st.accesses[1].kind, AccessKind::Write);
        assert!(s.mark_non_affine().is_empty());
    }

    #[test]
    fn zero_loop_statement_has_point_domain() {
        let s = scop_of("double x;\n#pragma omp parallel\n{\n  x = 1;\n}\n", 0);
        let d = &s.stmts[0].domain;
        assert!(d.dims().is_empty());
        assert!(!d.is_empty().unwrap());
        assert_eq!(d.enumerate(&[], 10).unwrap(), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn scalar_sum_is_rank_zero_shared() {
        let src = "param len = 100;\nint i, j;\ndouble temp, sum;\ndouble u[len][len];\n\
            #pragma omp parallel for private(temp, i, j)\n\
            for (i = 0; i < len; i++)\n  for (j = 0; j < len; j++) {\n    temp = u[i][j];\n    sum = sum + temp * temp;\n  }\n";
        let s = scop_of(src, 0);
        let st = &s.stmts[1];
        let sums: Vec<_> = st.accesses.iter().filter(|a| a.array == "sum").collect();
        assert_eq!(sums.len(), 2);
        assert!(sums.iter().all(|a| a.subs.is_empty() && a.var_class == VarClass::Shared && a.is_eligible()));
        assert_eq!(sums.iter().filter(|a| a.kind == AccessKind::Write).count(), 1);
    }

    #[test]
    fn irregular_subscripts_are_flagged() {
        let src = "param n;\nint i;\nint a[n], b[n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++) {\n  a[b[i]] = 0;\n  a[i*i] = 1;\n  a[i] = 2;\n}\n";
        let s = scop_of(src, 0);
        assert!(!s.fully_affine);
        let flagged: Vec<&str> = s.mark_non_affine().iter().map(|a| a.text.as_str()).collect();
        assert_eq!(flagged, ["a[b[i]]", "a[i * i]"]);
    }

    #[test]
    fn strided_and_reversed_loops() {
        let src = "param n = 9;\nint i;\ndouble a[n];\n#pragma omp parallel for\nfor (i = n - 1; i >= 1; i -= 3)\n  a[i] = 0;\n";
        let s = scop_of(src, 0);
        assert_eq!(s.loops[0].dir, -1);
        assert_eq!(s.stmts[0].domain.enumerate(&[], 100).unwrap(), vec![vec![2], vec![5], vec![8]]);
    }

    #[test]
    fn min_max_bounds_become_pieces() {
        let src = "param n = 10;\nint i;\ndouble a[n];\n#pragma omp parallel for\nfor (i = max(0, 3); i < min(n, 6); i++)\n  a[i] = 0;\n";
        let s = scop_of(src, 0);
        let pts = s.stmts[0].domain.enumerate(&[], 100).unwrap();
        assert_eq!(pts, vec![vec![3], vec![4], vec![5]]);
        let src = "param n = 10;\nint i;\ndouble a[n];\n#pragma omp parallel for\nfor (i = min(2, 7); i < max(4, 3); i++)\n  a[i] = 0;\n";
        let s = scop_of(src, 0);
        let pts = s.stmts[0].domain.enumerate(&[], 100).unwrap();
        assert_eq!(pts, vec![vec![2], vec![3]]);
    }

    #[test]
    fn enclosing_loops_become_parameters() {
        let src = "param n;\nint i, j;\ndouble b[n][n];\nfor (i = 0; i < n; i++) {\n\
            #pragma omp parallel for\n  for (j = 1; j < n; j++)\n    b[i][j] = b[i][j-1];\n}\n";
        let s = scop_of(src, 0);
        assert_eq!(s.params, ["n", "i"]);
        assert_eq!(s.stmts[0].dims, ["j"]);
    }

    #[test]
    fn shared_inner_loop_variable_gets_a_header_statement() {
        let src = "param n;\nint i, j;\ndouble b[n][n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++)\n  for (j = 0; j < n; j++)\n    b[i][j] = 0;\n";
        let s = scop_of(src, 0);
        assert_eq!(s.stmts.len(), 2);
        assert_eq!(s.stmts[0].text, "for (j ...)");
        assert!(s.stmts[0].accesses.iter().all(|a| a.array == "j" && a.var_class == VarClass::Shared));
        let private = src.replace("parallel for", "parallel for private(j)");
        assert_eq!(scop_of(&private, 0).stmts.len(), 1);
    }

    #[test]
    fn parse_only_constructs_are_unsupported() {
        let src = "param n;\nint i;\ndouble s;\n#pragma omp parallel for\nfor (i = 0; i < n; i++) {\n#pragma omp critical\n  s += 1;\n}\n";
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        let e = construct_scop(&ds[0], &p, &ds).unwrap_err();
        assert!(matches!(e, ScopError::Unsupported { ref construct, .. } if construct == "critical"));
    }

    #[test]
    fn reduction_updates_are_recognized() {
        let src = "param n;\nint i;\ndouble s, t, a[n];\n#pragma omp parallel for reduction(+:s) reduction(max:t)\n\
            for (i = 0; i < n; i++) {\n  s += a[i];\n  s = a[i] + s;\n  t = max(t, a[i]);\n  s = s * 2;\n  s = a[i] + s + s;\n  s = s + a[i] + 1;\n  s = a[i] - s;\n}\n";
        let s = scop_of(src, 0);
        let red: Vec<bool> = s
            .stmts
            .iter()
            .map(|st| st.writes().next().unwrap().reduction_update)
            .collect();
        assert_eq!(red, [true, true, true, false, false, true, false]);
    }

    #[test]
    fn schedule_interleaves_positions_and_dims() {
        let src = "param n;\nint i;\ndouble a[n], b[n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++) {\n  a[i] = 1;\n  b[i] = a[i];\n}\n";
        let s = scop_of(src, 0);
        assert_eq!(s.stmts[1].schedule, [SchedEntry::Seq(0), SchedEntry::Dim(0), SchedEntry::Seq(1)]);
        assert!(s.dump().contains("{ S1[i] -> [0, i, 1] }"));
    }
}
