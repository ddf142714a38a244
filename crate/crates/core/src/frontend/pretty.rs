use std::fmt::Write;

use super::ast::*;

/// Renders a program back to kernel-language source.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for prm in &p.params {
        match prm.default {
            Some(v) => writeln!(out, "param {} = {};", prm.name, v).unwrap(),
            None => writeln!(out, "param {};", prm.name).unwrap(),
        }
    }
    for s in &p.body {
        stmt(&mut out, s, 0);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn decl(d: &Decl) -> String {
    let mut s = format!("{} {}", d.ty.keyword(), d.name);
    for e in &d.dims {
        write!(s, "[{}]", expr(e)).unwrap();
    }
    if let Some(init) = &d.init {
        write!(s, " = {}", expr(init)).unwrap();
    }
    s.push(';');
    s
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Decl(d) => {
            indent(out, depth);
            out.push_str(&decl(d));
            out.push('\n');
        }
        StmtKind::Assign { lhs, op, rhs } => {
            indent(out, depth);
            writeln!(out, "{} {} {};", expr(lhs), op.symbol(), expr(rhs)).unwrap();
        }
        StmtKind::For(l) => {
            indent(out, depth);
            let ty = l.decl_ty.map(|t| format!("{} ", t.keyword())).unwrap_or_default();
            let step = match l.step {
                1 => format!("{}++", l.var),
                -1 => format!("{}--", l.var),
                k if k > 0 => format!("{} += {k}", l.var),
                k => format!("{} -= {}", l.var, -k),
            };
            writeln!(
                out,
                "for ({ty}{} = {}; {} {} {}; {step})",
                l.var,
                expr(&l.init),
                l.var,
                l.cmp.symbol(),
                expr(&l.bound)
            )
            .unwrap();
            body(out, &l.body, depth);
        }
        StmtKind::Block(items) => {
            indent(out, depth);
            out.push_str("{\n");
            for c in items {
                stmt(out, c, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Omp { pragma, body: b } => {
            indent(out, depth);
            writeln!(out, "{pragma}").unwrap();
            stmt(out, b, depth);
        }
        StmtKind::OmpStandalone(pragma) => {
            indent(out, depth);
            writeln!(out, "{pragma}").unwrap();
        }
        StmtKind::Empty => {
            indent(out, depth);
            out.push_str(";\n");
        }
    }
}

fn body(out: &mut String, s: &Stmt, depth: usize) {
    match s.kind {
        StmtKind::Block(_) => stmt(out, s, depth),
        _ => stmt(out, s, depth + 1),
    }
}

/// Expression text with the minimum parentheses needed to re-parse to the
/// same tree.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v, _) => v.to_string(),
        Expr::Float(s, _) => s.clone(),
        Expr::Var(n, _) => n.clone(),
        Expr::Index { name, subs, .. } => {
            let mut s = name.clone();
            for e in subs {
                write!(s, "[{}]", expr(e)).unwrap();
            }
            s
        }
        Expr::Unary { op, expr: inner, .. } => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            match **inner {
                Expr::Binary { .. } | Expr::Unary { .. } => format!("{sym}({})", expr(inner)),
                _ => format!("{sym}{}", expr(inner)),
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let p = op.precedence();
            let l = match **lhs {
                Expr::Binary { op: lo, .. } if lo.precedence() < p => format!("({})", expr(lhs)),
                _ => expr(lhs),
            };
            let r = match **rhs {
                Expr::Binary { op: ro, .. } if ro.precedence() <= p => format!("({})", expr(rhs)),
                _ => expr(rhs),
            };
            format!("{l} {} {r}", op.symbol())
        }
        Expr::Call { name, args, .. } => {
            let a: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", a.join(", "))
        }
    }
}

/// Copy of the program with every span zeroed, for structural comparison.
pub fn erase_spans(p: &Program) -> Program {
    let mut p = p.clone();
    for prm in &mut p.params {
        prm.span = Span::default();
    }
    for d in &mut p.globals {
        erase_decl(d);
    }
    for s in &mut p.body {
        erase_stmt(s);
    }
    p.warnings.clear();
    p
}

fn erase_decl(d: &mut Decl) {
    d.span = Span::default();
    d.dims.iter_mut().for_each(erase_expr);
    if let Some(e) = &mut d.init {
        erase_expr(e);
    }
}

fn erase_stmt(s: &mut Stmt) {
    s.span = Span::default();
    match &mut s.kind {
        StmtKind::Decl(d) => erase_decl(d),
        StmtKind::Assign { lhs, rhs, .. } => {
            erase_expr(lhs);
            erase_expr(rhs);
        }
        StmtKind::For(l) => {
            erase_expr(&mut l.init);
            erase_expr(&mut l.bound);
            erase_stmt(&mut l.body);
        }
        StmtKind::Block(items) => items.iter_mut().for_each(erase_stmt),
        StmtKind::Omp { pragma, body } => {
            pragma.span = Span::default();
            erase_stmt(body);
        }
        StmtKind::OmpStandalone(pragma) => pragma.span = Span::default(),
        StmtKind::Empty => {}
    }
}

fn erase_expr(e: &mut Expr) {
    match e {
        Expr::Int(_, s) | Expr::Float(_, s) | Expr::Var(_, s) => *s = Span::default(),
        Expr::Index { subs, span, .. } => {
            *span = Span::default();
            subs.iter_mut().for_each(erase_expr);
        }
        Expr::Unary { expr, span, .. } => {
            *span = Span::default();
            erase_expr(expr);
        }
        Expr::Binary { lhs, rhs, span, .. } => {
            *span = Span::default();
            erase_expr(lhs);
            erase_expr(rhs);
        }
        Expr::Call { args, span, .. } => {
            *span = Span::default();
            args.iter_mut().for_each(erase_expr);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn round_trip() {
        let src = "param n = 8, m;\n#include <omp.h>\ndouble b[n][m];\nint i, j;\ndouble s = 0.0;\n\
                   #pragma omp parallel for private(j) reduction(+:s)\n\
                   for (i = 0; i < n; i++)\n  for (j = 1; j < m; j += 2) {\n    b[i][j] = b[i][j-1] - (2 - i) * -b[i][0];\n    s += min(b[i][j], 1.5e2) / (i - (j - 1));\n  }\n\
                   #pragma omp barrier\n";
        let p = parse(src).unwrap();
        let text = pretty(&p);
        let q = parse(&text).unwrap();
        assert_eq!(erase_spans(&p), erase_spans(&q), "{text}");
        assert_eq!(pretty(&q), text);
    }

    #[test]
    fn minimal_parentheses() {
        let p = parse("int x, y;\nx = (x - y) - (x - (y + 1)) * -(-y);").unwrap();
        let StmtKind::Assign { rhs, .. } = &p.body[2].kind else { panic!() };
        assert_eq!(expr(rhs), "x - y - (x - (y + 1)) * -(-y)");
    }
}
