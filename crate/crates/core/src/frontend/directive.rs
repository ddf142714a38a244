use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::ast::*;
use super::pragma::{Clause, DirectiveKind, Pragma, ReductionOp, Schedule};

/// Data-sharing class of a variable within a directive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarClass {
    Private,
    Firstprivate,
    Lastprivate,
    Shared,
    Reduction(ReductionOp),
    Threadprivate,
}

impl VarClass {
    /// Whether each thread works on its own copy, so accesses cannot
    /// conflict across threads.
    pub fn is_per_thread(self) -> bool {
        matches!(
            self,
            VarClass::Private | VarClass::Firstprivate | VarClass::Lastprivate | VarClass::Threadprivate
        )
    }

    pub fn label(self) -> String {
        match self {
            VarClass::Private => "Private".into(),
            VarClass::Firstprivate => "Firstprivate".into(),
            VarClass::Lastprivate => "Lastprivate".into(),
            VarClass::Shared => "Shared".into(),
            VarClass::Reduction(op) => format!("Reduction({})", op.symbol()),
            VarClass::Threadprivate => "Threadprivate".into(),
        }
    }
}

impl fmt::Display for VarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Reconstructed OpenMP construct.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Directive {
    pub kind: DirectiveKind,
    pub sched: Option<Schedule>,
    pub vars: Vec<(VarClass, String)>,
    pub collapse: u32,
    pub nowait: bool,
    pub children: Vec<Directive>,
    /// Id of the pragma statement.
    pub stmt: NodeId,
    /// Id of the governed statement; `None` for standalone directives.
    pub body: Option<NodeId>,
    pub span: Span,
    /// `critical(name)`
    pub name: Option<String>,
    /// Barrier synthesized at the end of a construct without `nowait`.
    pub implicit: bool,
}

impl Directive {
    pub fn class_of(&self, var: &str) -> Option<VarClass> {
        self.vars.iter().find(|(_, n)| n == var).map(|(c, _)| *c)
    }

    pub fn vars_of(&self, class: VarClass) -> impl Iterator<Item = &str> {
        self.vars.iter().filter(move |(c, _)| *c == class).map(|(_, n)| n.as_str())
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Directive)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Multi-line dump in the directive notation.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(&mut out, 0);
        out
    }

    fn dump_into(&self, out: &mut String, depth: usize) {
        use std::fmt::Write;
        let pad = "  ".repeat(depth);
        writeln!(out, "{pad}Directive: {}", self.kind.dump_name()).unwrap();
        if let Some(s) = &self.sched {
            writeln!(out, "{pad}  Schedule type : {s}").unwrap();
        }
        if self.collapse > 1 {
            writeln!(out, "{pad}  Collapse: {}", self.collapse).unwrap();
        }
        if self.nowait {
            writeln!(out, "{pad}  Nowait").unwrap();
        }
        if !self.vars.is_empty() {
            writeln!(out, "{pad}  Variables:").unwrap();
            for (c, n) in &self.vars {
                writeln!(out, "{pad}    {c}: {n}").unwrap();
            }
        }
        if !self.children.is_empty() {
            writeln!(out, "{pad}  Child Directives:").unwrap();
            for (k, c) in self.children.iter().enumerate() {
                writeln!(out, "{pad}  {}:", k + 1).unwrap();
                c.dump_into(out, depth + 2);
            }
        }
    }
}

struct Frame<'a> {
    pragma: &'a Pragma,
    declared: BTreeSet<&'a str>,
    induction: BTreeSet<&'a str>,
}

/// Builds the directive forest of a program in source order, with every
/// variable of each construct classified.
pub fn extract_directives(p: &Program) -> Vec<Directive> {
    let threadprivate: BTreeSet<&str> = {
        let mut s = BTreeSet::new();
        p.walk(&mut |st| {
            if let StmtKind::OmpStandalone(pr) = &st.kind {
                if pr.kind == DirectiveKind::Threadprivate {
                    s.extend(pr.list.iter().map(String::as_str));
                }
            }
        });
        s
    };
    let params: BTreeSet<&str> = p.params.iter().map(|x| x.name.as_str()).collect();
    let cx = Cx { threadprivate, params };
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in &p.body {
        cx.collect(s, &mut stack, &mut out);
    }
    out
}

struct Cx<'a> {
    threadprivate: BTreeSet<&'a str>,
    params: BTreeSet<&'a str>,
}

impl<'a> Cx<'a> {
    fn collect(&self, s: &'a Stmt, stack: &mut Vec<Frame<'a>>, out: &mut Vec<Directive>) {
        match &s.kind {
            StmtKind::For(l) => self.collect(&l.body, stack, out),
            StmtKind::Block(items) => items.iter().for_each(|c| self.collect(c, stack, out)),
            StmtKind::Omp { pragma, body } => {
                let mut declared = BTreeSet::new();
                let mut induction = BTreeSet::new();
                body.walk(&mut |st| match &st.kind {
                    StmtKind::Decl(d) => {
                        declared.insert(d.name.as_str());
                    }
                    StmtKind::For(l) if l.decl_ty.is_some() => {
                        declared.insert(l.var.as_str());
                    }
                    _ => {}
                });
                induction_vars(pragma, body, &mut induction);
                stack.push(Frame { pragma, declared, induction });
                let mut children = Vec::new();
                self.collect(body, stack, &mut children);
                let vars = self.classify(s, stack);
                stack.pop();
                if pragma.kind == DirectiveKind::Parallel {
                    children = with_implicit_barriers(children);
                }
                let mut d = directive(pragma, s.id, Some(body.id), vars, children);
                if d.sched.is_none() && pragma.kind.is_loop() && pragma.kind != DirectiveKind::Simd {
                    d.sched = Some(Schedule::default_static());
                }
                if let Some(sc) = &mut d.sched {
                    sc.ordered |= pragma.has_ordered_clause();
                }
                out.push(d);
            }
            StmtKind::OmpStandalone(pragma) => {
                let vars = pragma.list.iter().map(|v| (VarClass::Threadprivate, v.clone())).collect();
                out.push(directive(pragma, s.id, None, vars, Vec::new()));
            }
            StmtKind::Decl(_) | StmtKind::Assign { .. } | StmtKind::Empty => {}
        }
    }

    /// Classification of every variable named by the innermost frame's
    /// clauses or occurring in its body.
    fn classify(&self, s: &'a Stmt, stack: &[Frame<'a>]) -> Vec<(VarClass, String)> {
        let inner = stack.last().unwrap();
        let mut names: Vec<&str> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut add = |n: &'a str, names: &mut Vec<&'a str>| {
            if !self.params.contains(n) && seen.insert(n) {
                names.push(n);
            }
        };
        for v in inner.pragma.named_vars() {
            add(v, &mut names);
        }
        let mut occ = Vec::new();
        occurrences(s, &mut occ);
        for n in occ {
            add(n, &mut names);
        }
        names.into_iter().map(|n| (self.resolve(n, stack), n.to_string())).collect()
    }

    fn resolve(&self, v: &str, stack: &[Frame<'a>]) -> VarClass {
        for f in stack.iter().rev() {
            if let Some(c) = clause_class(f.pragma, v) {
                return c;
            }
            if f.declared.contains(v) || f.induction.contains(v) {
                return VarClass::Private;
            }
        }
        if self.threadprivate.contains(v) {
            VarClass::Threadprivate
        } else {
            VarClass::Shared
        }
    }
}

fn directive(
    pragma: &Pragma,
    stmt: NodeId,
    body: Option<NodeId>,
    vars: Vec<(VarClass, String)>,
    children: Vec<Directive>,
) -> Directive {
    Directive {
        kind: pragma.kind.clone(),
        sched: pragma.schedule(),
        vars,
        collapse: pragma.collapse(),
        nowait: pragma.nowait(),
        children,
        stmt,
        body,
        span: pragma.span,
        name: pragma.name.clone(),
        implicit: false,
    }
}

fn clause_class(p: &Pragma, v: &str) -> Option<VarClass> {
    p.clauses.iter().find_map(|c| {
        if !c.vars().iter().any(|x| x == v) {
            return None;
        }
        Some(match c {
            Clause::Private(_) | Clause::Linear(_) => VarClass::Private,
            Clause::Firstprivate(_) => VarClass::Firstprivate,
            Clause::Lastprivate(_) => VarClass::Lastprivate,
            Clause::Shared(_) => VarClass::Shared,
            Clause::Copyin(_) => VarClass::Threadprivate,
            Clause::Reduction(op, _) => VarClass::Reduction(*op),
            _ => return None,
        })
    })
}

/// Induction variables of every loop construct at or below `body`,
/// including the loops folded in by `collapse`.
fn induction_vars<'a>(pragma: &'a Pragma, body: &'a Stmt, out: &mut BTreeSet<&'a str>) {
    if pragma.kind.is_loop() {
        out.extend(loop_nest(body, pragma.collapse() as usize).into_iter().map(|l| l.var.as_str()));
    }
    body.walk(&mut |st| {
        if let StmtKind::Omp { pragma, body } = &st.kind {
            if pragma.kind.is_loop() {
                out.extend(loop_nest(body, pragma.collapse() as usize).into_iter().map(|l| l.var.as_str()));
            }
        }
    });
}

/// The first `depth` perfectly nested loops starting at `s` (single-item
/// blocks are looked through).
pub fn loop_nest(s: &Stmt, depth: usize) -> Vec<&ForLoop> {
    let mut out = Vec::new();
    let mut cur = s;
    while out.len() < depth {
        match &cur.kind {
            StmtKind::For(l) => {
                out.push(l);
                cur = &l.body;
            }
            StmtKind::Block(items) if items.len() == 1 && !out.is_empty() => cur = &items[0],
            _ => break,
        }
    }
    out
}

/// Variable names occurring in a statement subtree, in source order.
fn occurrences<'a>(s: &'a Stmt, out: &mut Vec<&'a str>) {
    fn ex<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
        e.visit(&mut |x| match x {
            Expr::Var(n, _) | Expr::Index { name: n, .. } => out.push(n),
            _ => {}
        });
    }
    s.walk(&mut |st| match &st.kind {
        StmtKind::Decl(d) => {
            out.push(&d.name);
            d.dims.iter().for_each(|e| ex(e, out));
            if let Some(e) = &d.init {
                ex(e, out);
            }
        }
        StmtKind::Assign { lhs, rhs, .. } => {
            ex(lhs, out);
            ex(rhs, out);
        }
        StmtKind::For(l) => {
            out.push(&l.var);
            ex(&l.init, out);
            ex(&l.bound, out);
        }
        StmtKind::Omp { pragma, .. } | StmtKind::OmpStandalone(pragma) => {
            out.extend(pragma.named_vars().map(String::as_str));
        }
        StmtKind::Block(_) | StmtKind::Empty => {}
    });
}

/// Appends the barrier implied at the end of a worksharing construct
/// without `nowait`.
fn with_implicit_barriers(children: Vec<Directive>) -> Vec<Directive> {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        let needs = matches!(c.kind, DirectiveKind::For | DirectiveKind::ForSimd | DirectiveKind::Single) && !c.nowait;
        let (stmt, span) = (c.stmt, c.span);
        out.push(c);
        if needs {
            out.push(Directive {
                kind: DirectiveKind::Barrier,
                sched: None,
                vars: Vec::new(),
                collapse: 1,
                nowait: false,
                children: Vec::new(),
                stmt,
                body: None,
                span,
                name: None,
                implicit: true,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    const SHARED_SUM: &str = "param len = 100;\nint i, j;\ndouble temp, sum;\ndouble u[len][len];\n\
        #pragma omp parallel for private(temp, i, j)\n\
        for (i = 0; i < len; i++)\n  for (j = 0; j < len; j++) {\n    temp = u[i][j];\n    sum = sum + temp * temp;\n  }\n";

    const NOWAIT_SINGLE: &str = "param len = 100;\nint i, b, error;\nint a[len];\n\
        #pragma omp parallel shared(b, error)\n{\n\
        #pragma omp for nowait\n  for (i = 0; i < len; i++)\n    a[i] = b + a[i] * 5;\n\
        #pragma omp single\n  error = a[9] + 1;\n}\n";

    #[test]
    fn default_sharing_makes_sum_shared() {
        let ds = extract_directives(&parse(SHARED_SUM).unwrap());
        assert_eq!(ds.len(), 1);
        let d = &ds[0];
        assert_eq!(d.kind, DirectiveKind::ParallelFor);
        assert_eq!(d.class_of("sum"), Some(VarClass::Shared));
        assert_eq!(d.class_of("u"), Some(VarClass::Shared));
        let private: Vec<_> = d.vars_of(VarClass::Private).collect();
        assert_eq!(private, ["temp", "i", "j"]);
        assert_eq!(d.class_of("len"), None);
    }

    #[test]
    fn exhaustive_private_list_leaves_nothing_shared() {
        let src = "param n;\nint i;\ndouble x, y;\n#pragma omp parallel private(i, x, y)\n{\n  x = 1;\n  y = x;\n}\n";
        let ds = extract_directives(&parse(src).unwrap());
        assert_eq!(ds[0].vars_of(VarClass::Shared).count(), 0);
        assert_eq!(ds[0].vars.len(), 3);
    }

    #[test]
    fn nowait_tree() {
        let ds = extract_directives(&parse(NOWAIT_SINGLE).unwrap());
        assert_eq!(ds.len(), 1);
        let kinds: Vec<_> = ds[0].children.iter().map(|c| c.kind.dump_name()).collect();
        assert_eq!(kinds, ["OMP_Workshare_Loop", "OMP_Workshare_single", "OMP_Barrier"]);
        assert!(ds[0].children[0].nowait);
        assert!(ds[0].children[2].implicit);
        assert_eq!(
            ds[0].children[0].sched.unwrap().to_string(),
            "Static Schedule (auto-chunked)"
        );
        assert_eq!(ds[0].class_of("i"), Some(VarClass::Private));
        assert_eq!(ds[0].class_of("a"), Some(VarClass::Shared));
        let dump = ds[0].dump();
        assert!(dump.starts_with("Directive: OMP_Parallel\n"), "{dump}");
    }

    #[test]
    fn simd_attaches_to_loop() {
        let src = "param len;\nint i;\ndouble a[len], b[len];\n#pragma omp simd\nfor (i = 0; i < len - 1; i++)\n  a[i+1] = a[i] + b[i];\n";
        let p = parse(src).unwrap();
        let ds = extract_directives(&p);
        assert_eq!(ds.len(), 1);
        assert_eq!((ds[0].kind.clone(), ds[0].collapse), (DirectiveKind::Simd, 1));
        assert!(matches!(p.stmt(ds[0].body.unwrap()).unwrap().kind, StmtKind::For(_)));
        assert_eq!(ds[0].class_of("i"), Some(VarClass::Private));
    }

    #[test]
    fn inner_sequential_loop_variable_follows_c_scoping() {
        let outer = "param n;\nint i, j;\ndouble a[n][n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++)\n  for (j = 0; j < n; j++)\n    a[i][j] = 0;\n";
        let ds = extract_directives(&parse(outer).unwrap());
        assert_eq!(ds[0].class_of("j"), Some(VarClass::Shared));
        let local = outer.replace("for (j = 0", "for (int j = 0").replace("int i, j;", "int i;");
        let ds = extract_directives(&parse(&local).unwrap());
        assert_eq!(ds[0].class_of("j"), Some(VarClass::Private));
        let collapsed = outer.replace("parallel for", "parallel for collapse(2)");
        let ds = extract_directives(&parse(&collapsed).unwrap());
        assert_eq!(ds[0].class_of("j"), Some(VarClass::Private));
    }

    #[test]
    fn threadprivate_and_reduction() {
        let src = "param n;\nint i;\ndouble t, s;\n#pragma omp threadprivate(t)\n#pragma omp parallel for reduction(+:s)\nfor (i = 0; i < n; i++) {\n  t = i;\n  s += t;\n}\n";
        let ds = extract_directives(&parse(src).unwrap());
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].kind, DirectiveKind::Threadprivate);
        assert_eq!(ds[1].class_of("t"), Some(VarClass::Threadprivate));
        assert_eq!(ds[1].class_of("s"), Some(VarClass::Reduction(ReductionOp::Add)));
    }
}
