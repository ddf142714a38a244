use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::pragma::{parse_pragma, DirectiveKind, Pragma, PragmaLine};
use super::{Diagnostic, ErrorKind, FrontendError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Param,
    Scalar(ElemType),
    Array(usize),
}

/// Parses a kernel file into a [`Program`].
pub fn parse(src: &str) -> Result<Program, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_id: 0,
        scopes: vec![Vec::new()],
        loop_vars: Vec::new(),
        params: Vec::new(),
        globals: Vec::new(),
        warnings: Vec::new(),
        depth: 0,
    };
    p.program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_id: NodeId,
    scopes: Vec<Vec<(String, Sym)>>,
    loop_vars: Vec<String>,
    params: Vec<Param>,
    globals: Vec<Decl>,
    warnings: Vec<Diagnostic>,
    depth: usize,
}

/// Statement and expression nesting accepted before parsing gives up.
pub const MAX_NESTING: usize = 200;

fn syntax(span: Span, msg: impl Into<String>) -> FrontendError {
    FrontendError::new(ErrorKind::Syntax, span, msg)
}

fn semantic(span: Span, msg: impl Into<String>) -> FrontendError {
    FrontendError::new(ErrorKind::Semantic, span, msg)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(syntax(self.span(), format!("expected `{p}`, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), FrontendError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.next();
                Ok((s, span))
            }
            t => Err(syntax(span, format!("expected identifier, found {}", describe(&t)))),
        }
    }

    fn word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn fresh_id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn lookup(&self, name: &str) -> Option<Sym> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.iter().rev().find(|(n, _)| n == name).map(|(_, k)| *k))
    }

    fn declare(&mut self, name: &str, sym: Sym, span: Span) -> Result<(), FrontendError> {
        if self.lookup(name).is_some() {
            return Err(semantic(span, format!("`{name}` is already declared")));
        }
        if name == "min" || name == "max" {
            return Err(semantic(span, format!("`{name}` is reserved")));
        }
        self.scopes.last_mut().unwrap().push((name.to_string(), sym));
        Ok(())
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        let mut body = Vec::new();
        let mut seen_other = false;
        while !matches!(self.peek(), Tok::Eof) {
            if self.word() == Some("param") {
                if seen_other {
                    return Err(syntax(self.span(), "`param` declarations must precede all other items"));
                }
                self.params_decl()?;
                continue;
            }
            seen_other = true;
            let stmts = self.item()?;
            for s in &stmts {
                if let StmtKind::Decl(d) = &s.kind {
                    self.globals.push(d.clone());
                }
            }
            body.extend(stmts);
        }
        Ok(Program {
            params: std::mem::take(&mut self.params),
            globals: std::mem::take(&mut self.globals),
            body,
            warnings: std::mem::take(&mut self.warnings),
        })
    }

    fn params_decl(&mut self) -> Result<(), FrontendError> {
        self.next();
        loop {
            let (name, span) = self.ident()?;
            let default = if self.eat("=") {
                let neg = self.eat("-");
                match self.next().tok {
                    Tok::Int(v) => Some(if neg { -v } else { v }),
                    t => return Err(syntax(span, format!("parameter default must be an integer, found {}", describe(&t)))),
                }
            } else {
                None
            };
            self.declare(&name, Sym::Param, span)?;
            self.params.push(Param { name, default, span });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")
    }

    /// A block item: one statement or a declaration (possibly declaring
    /// several names).
    fn item(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        if let Some(ty) = self.word().and_then(ElemType::from_keyword) {
            return self.declaration(ty);
        }
        if self.word() == Some("const") {
            return Err(syntax(self.span(), "`const` is not supported"));
        }
        Ok(vec![self.stmt()?])
    }

    fn declaration(&mut self, ty: ElemType) -> Result<Vec<Stmt>, FrontendError> {
        self.next();
        let mut out = Vec::new();
        loop {
            let id = self.fresh_id();
            let (name, span) = self.ident()?;
            let mut dims = Vec::new();
            while self.eat("[") {
                let e = self.expr()?;
                check_extent(&e, self)?;
                dims.push(e);
                self.expect("]")?;
            }
            if dims.len() > 3 {
                return Err(semantic(span, format!("array `{name}` has rank {} (at most 3 supported)", dims.len())));
            }
            let init = if self.eat("=") {
                if !dims.is_empty() {
                    return Err(syntax(self.span(), "array initializers are not supported"));
                }
                Some(self.expr()?)
            } else {
                None
            };
            let sym = if dims.is_empty() { Sym::Scalar(ty) } else { Sym::Array(dims.len()) };
            self.declare(&name, sym, span)?;
            out.push(Stmt {
                id,
                kind: StmtKind::Decl(Decl { name, ty, dims, init, span }),
                span,
            });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(out)
    }

    fn enter(&mut self) -> Result<(), FrontendError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(self.span(), format!("nesting deeper than {MAX_NESTING} levels")));
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        self.enter()?;
        let r = self.stmt_inner();
        self.depth -= 1;
        r
    }

    fn stmt_inner(&mut self) -> Result<Stmt, FrontendError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Pragma(text) => self.pragma_stmt(&text, span),
            Tok::Punct("{") => {
                let id = self.fresh_id();
                self.next();
                self.scopes.push(Vec::new());
                let mut items = Vec::new();
                while !self.is_punct("}") {
                    if matches!(self.peek(), Tok::Eof) {
                        return Err(syntax(span, "unclosed `{`"));
                    }
                    items.extend(self.item()?);
                }
                self.next();
                self.scopes.pop();
                Ok(Stmt { id, kind: StmtKind::Block(items), span })
            }
            Tok::Punct(";") => {
                let id = self.fresh_id();
                self.next();
                Ok(Stmt { id, kind: StmtKind::Empty, span })
            }
            Tok::Ident(w) if w == "for" => self.for_stmt(),
            Tok::Ident(w) if ElemType::from_keyword(&w).is_some() => {
                Err(syntax(span, "declaration is not allowed here; wrap it in a block"))
            }
            Tok::Ident(w) if is_keyword(&w) || UNSUPPORTED_STMTS.contains(&w.as_str()) => {
                Err(syntax(span, format!("unsupported statement `{w}`")))
            }
            Tok::Ident(_) | Tok::Punct("++") | Tok::Punct("--") => self.assign_stmt(),
            t => Err(syntax(span, format!("expected a statement, found {}", describe(&t)))),
        }
    }

    fn pragma_stmt(&mut self, text: &str, span: Span) -> Result<Stmt, FrontendError> {
        self.next();
        let pragma = match parse_pragma(text, span)? {
            PragmaLine::Foreign => {
                self.warnings.push(Diagnostic {
                    kind: ErrorKind::UnknownPragma,
                    span,
                    message: format!("ignoring non-OpenMP pragma `{text}`"),
                });
                if self.is_punct("}") || matches!(self.peek(), Tok::Eof) {
                    let id = self.fresh_id();
                    return Ok(Stmt { id, kind: StmtKind::Empty, span });
                }
                return self.stmt();
            }
            PragmaLine::Omp(p) => p,
        };
        let id = self.fresh_id();
        if let DirectiveKind::Unsupported(name) = &pragma.kind {
            self.warnings.push(Diagnostic {
                kind: ErrorKind::UnknownPragma,
                span,
                message: format!("unsupported OpenMP construct `{name}`"),
            });
        }
        for v in pragma.named_vars() {
            if self.lookup(v).is_none() {
                return Err(semantic(span, format!("undeclared variable `{v}` in pragma")));
            }
        }
        let at_end = self.is_punct("}") || matches!(self.peek(), Tok::Eof);
        if pragma.kind.is_standalone() || (matches!(pragma.kind, DirectiveKind::Unsupported(_)) && at_end) {
            if pragma.kind == DirectiveKind::Threadprivate {
                for v in &pragma.list {
                    if self.scopes.len() > 1 || !matches!(self.lookup(v), Some(Sym::Scalar(_) | Sym::Array(_))) {
                        return Err(semantic(span, format!("threadprivate variable `{v}` must be a file-scope variable")));
                    }
                }
            }
            return Ok(Stmt { id, kind: StmtKind::OmpStandalone(pragma), span });
        }
        if at_end {
            return Err(syntax(span, format!("`#pragma omp {}` must be followed by a statement", pragma.kind)));
        }
        if self.word().is_some_and(|w| ElemType::from_keyword(w).is_some()) {
            return Err(syntax(self.span(), "a pragma cannot apply to a declaration"));
        }
        let body = self.stmt()?;
        if pragma.kind.is_loop() {
            check_loop_nest(&pragma, &body)?;
        }
        Ok(Stmt {
            id,
            kind: StmtKind::Omp { pragma, body: Box::new(body) },
            span,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let id = self.fresh_id();
        let span = self.span();
        self.next();
        self.expect("(")?;
        self.scopes.push(Vec::new());
        let decl_ty = match self.word().and_then(ElemType::from_keyword) {
            Some(t) => {
                self.next();
                Some(t)
            }
            None => None,
        };
        let (var, vspan) = self.ident()?;
        match decl_ty {
            Some(t) => {
                if !matches!(t, ElemType::Int | ElemType::Long) {
                    return Err(semantic(vspan, "induction variable must have integer type"));
                }
                if self.loop_vars.contains(&var) {
                    return Err(semantic(vspan, format!("duplicate induction variable `{var}`")));
                }
                self.declare(&var, Sym::Scalar(t), vspan)?;
            }
            None => match self.lookup(&var) {
                Some(Sym::Scalar(ElemType::Int | ElemType::Long)) => {}
                Some(Sym::Param) => return Err(semantic(vspan, format!("cannot use parameter `{var}` as induction variable"))),
                Some(_) => return Err(semantic(vspan, format!("induction variable `{var}` must be an integer scalar"))),
                None => return Err(semantic(vspan, format!("undeclared identifier `{var}`"))),
            },
        }
        if self.loop_vars.contains(&var) {
            return Err(semantic(vspan, format!("duplicate induction variable `{var}`")));
        }
        self.expect("=")?;
        let init = self.expr()?;
        self.expect(";")?;
        let cspan = self.span();
        let cond = self.expr()?;
        let (cmp, bound) = match cond {
            Expr::Binary { op, lhs, rhs, .. } => {
                let op = match op {
                    BinOp::Lt => CmpOp::Lt,
                    BinOp::Le => CmpOp::Le,
                    BinOp::Gt => CmpOp::Gt,
                    BinOp::Ge => CmpOp::Ge,
                    _ => return Err(syntax(cspan, "loop condition must be a `<`, `<=`, `>` or `>=` comparison")),
                };
                match (*lhs, *rhs) {
                    (Expr::Var(v, _), b) if v == var => (op, b),
                    (b, Expr::Var(v, _)) if v == var => (op.flip(), b),
                    _ => return Err(syntax(cspan, format!("loop condition must compare `{var}` directly"))),
                }
            }
            _ => return Err(syntax(cspan, "loop condition must be a comparison")),
        };
        if mentions(&bound, &var) {
            return Err(syntax(cspan, format!("loop bound must not depend on `{var}`")));
        }
        self.expect(";")?;
        let step = self.increment(&var)?;
        let up = matches!(cmp, CmpOp::Lt | CmpOp::Le);
        if (step > 0) != up {
            return Err(semantic(cspan, "loop condition and step point in opposite directions"));
        }
        self.expect(")")?;
        self.loop_vars.push(var.clone());
        let body = self.stmt();
        self.loop_vars.pop();
        self.scopes.pop();
        let body = body?;
        Ok(Stmt {
            id,
            kind: StmtKind::For(ForLoop {
                var,
                decl_ty,
                init,
                cmp,
                bound,
                step,
                body: Box::new(body),
            }),
            span,
        })
    }

    fn step_const(&mut self) -> Result<i64, FrontendError> {
        let span = self.span();
        match self.next().tok {
            Tok::Int(v) if v != 0 => Ok(v),
            _ => Err(syntax(span, "loop step must be a nonzero integer constant")),
        }
    }

    fn increment(&mut self, var: &str) -> Result<i64, FrontendError> {
        let span = self.span();
        let bad = || syntax(span, format!("unsupported increment of `{var}`"));
        if self.eat("++") || self.eat("--") {
            let up = matches!(self.toks[self.pos - 1].tok, Tok::Punct("++"));
            let (v, _) = self.ident()?;
            if v != var {
                return Err(bad());
            }
            return Ok(if up { 1 } else { -1 });
        }
        let (v, _) = self.ident()?;
        if v != var {
            return Err(bad());
        }
        match self.next().tok {
            Tok::Punct("++") => Ok(1),
            Tok::Punct("--") => Ok(-1),
            Tok::Punct("+=") => self.step_const(),
            Tok::Punct("-=") => Ok(-self.step_const()?),
            Tok::Punct("=") => {
                let e = self.expr()?;
                match e {
                    Expr::Binary { op: BinOp::Add, lhs, rhs, .. } => match (*lhs, *rhs) {
                        (Expr::Var(x, _), Expr::Int(k, _)) | (Expr::Int(k, _), Expr::Var(x, _)) if x == var && k != 0 => Ok(k),
                        _ => Err(bad()),
                    },
                    Expr::Binary { op: BinOp::Sub, lhs, rhs, .. } => match (*lhs, *rhs) {
                        (Expr::Var(x, _), Expr::Int(k, _)) if x == var && k != 0 => Ok(-k),
                        _ => Err(bad()),
                    },
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }

    fn assign_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let id = self.fresh_id();
        let span = self.span();
        let kind = if self.is_punct("++") || self.is_punct("--") {
            let up = self.is_punct("++");
            self.next();
            let lhs = self.lvalue()?;
            StmtKind::Assign {
                lhs,
                op: if up { AssignOp::Add } else { AssignOp::Sub },
                rhs: Expr::Int(1, span),
            }
        } else {
            let lhs = self.lvalue()?;
            let ospan = self.span();
            let op = match self.next().tok {
                Tok::Punct("=") => AssignOp::Set,
                Tok::Punct("+=") => AssignOp::Add,
                Tok::Punct("-=") => AssignOp::Sub,
                Tok::Punct("*=") => AssignOp::Mul,
                Tok::Punct("/=") => AssignOp::Div,
                Tok::Punct("++") | Tok::Punct("--") => {
                    let up = matches!(self.toks[self.pos - 1].tok, Tok::Punct("++"));
                    self.expect(";")?;
                    return Ok(Stmt {
                        id,
                        kind: StmtKind::Assign {
                            lhs,
                            op: if up { AssignOp::Add } else { AssignOp::Sub },
                            rhs: Expr::Int(1, ospan),
                        },
                        span,
                    });
                }
                Tok::Punct("(") => {
                    return Err(semantic(span, "function calls are not supported"));
                }
                t => return Err(syntax(ospan, format!("expected assignment operator, found {}", describe(&t)))),
            };
            let rhs = self.expr()?;
            StmtKind::Assign { lhs, op, rhs }
        };
        self.expect(";")?;
        Ok(Stmt { id, kind, span })
    }

    fn lvalue(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        if let Tok::Ident(name) = self.peek().clone() {
            if self.peek_at(1) == &Tok::Punct("(") {
                return Err(semantic(span, format!("function calls are not supported (`{name}`)")));
            }
        }
        let e = self.primary()?;
        let name = match &e {
            Expr::Var(n, _) | Expr::Index { name: n, .. } => n.clone(),
            _ => return Err(syntax(span, "expected an assignable variable or array element")),
        };
        if self.lookup(&name) == Some(Sym::Param) {
            return Err(semantic(span, format!("cannot assign to parameter `{name}`")));
        }
        if self.loop_vars.contains(&name) {
            return Err(semantic(span, format!("assignment to induction variable `{name}` inside its loop")));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) => match *p {
                    "+" => BinOp::Add,
                    "-" => BinOp::Sub,
                    "*" => BinOp::Mul,
                    "/" => BinOp::Div,
                    "%" => BinOp::Mod,
                    "<" => BinOp::Lt,
                    "<=" => BinOp::Le,
                    ">" => BinOp::Gt,
                    ">=" => BinOp::Ge,
                    "==" => BinOp::Eq,
                    "!=" => BinOp::Ne,
                    "&&" => BinOp::And,
                    "||" => BinOp::Or,
                    "?" => return Err(syntax(self.span(), "conditional expressions are not supported")),
                    _ => break,
                },
                _ => break,
            };
            if op.precedence() < min_prec {
                break;
            }
            let span = self.span();
            self.next();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        self.enter()?;
        let r = self.unary_inner();
        self.depth -= 1;
        r
    }

    fn unary_inner(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        if self.eat("-") {
            let e = self.unary()?;
            return Ok(Expr::Unary { op: UnOp::Neg, expr: Box::new(e), span });
        }
        if self.eat("!") {
            let e = self.unary()?;
            return Ok(Expr::Unary { op: UnOp::Not, expr: Box::new(e), span });
        }
        if self.eat("+") {
            return self.unary();
        }
        if self.is_punct("++") || self.is_punct("--") {
            return Err(syntax(span, "increment inside expressions is not supported"));
        }
        // cast `(double) e` is accepted and dropped
        if self.is_punct("(") {
            if let Tok::Ident(w) = self.peek_at(1) {
                if ElemType::from_keyword(w).is_some() && self.peek_at(2) == &Tok::Punct(")") {
                    self.next();
                    self.next();
                    self.next();
                    return self.unary();
                }
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        match self.next().tok {
            Tok::Int(v) => Ok(Expr::Int(v, span)),
            Tok::Float(s) => Ok(Expr::Float(s, span)),
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                if self.is_punct("(") {
                    return self.call(name, span);
                }
                let sym = self
                    .lookup(&name)
                    .ok_or_else(|| semantic(span, format!("undeclared identifier `{name}`")))?;
                let mut subs = Vec::new();
                while self.eat("[") {
                    subs.push(self.expr()?);
                    self.expect("]")?;
                }
                match sym {
                    Sym::Array(rank) if subs.len() != rank => Err(semantic(
                        span,
                        format!("array `{name}` has rank {rank} but is indexed with {} subscripts", subs.len()),
                    )),
                    Sym::Array(_) => Ok(Expr::Index { name, subs, span }),
                    _ if !subs.is_empty() => Err(semantic(span, format!("`{name}` is not an array"))),
                    _ => Ok(Expr::Var(name, span)),
                }
            }
            t => Err(syntax(span, format!("expected an expression, found {}", describe(&t)))),
        }
    }

    fn call(&mut self, name: String, span: Span) -> Result<Expr, FrontendError> {
        if name != "min" && name != "max" {
            return Err(semantic(span, format!("function calls are not supported (`{name}`)")));
        }
        self.expect("(")?;
        let mut args = vec![self.expr()?];
        while self.eat(",") {
            args.push(self.expr()?);
        }
        self.expect(")")?;
        if args.len() != 2 {
            return Err(semantic(span, format!("`{name}` takes exactly 2 arguments")));
        }
        Ok(Expr::Call { name, args, span })
    }
}

const UNSUPPORTED_STMTS: [&str; 12] = [
    "if", "else", "while", "do", "return", "switch", "break", "continue", "goto", "void", "struct", "unsigned",
];

fn is_keyword(s: &str) -> bool {
    matches!(s, "for" | "param" | "const") || ElemType::from_keyword(s).is_some() || UNSUPPORTED_STMTS.contains(&s)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Float(s) => format!("`{s}`"),
        Tok::Pragma(_) => "a pragma".into(),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of file".into(),
    }
}

fn mentions(e: &Expr, var: &str) -> bool {
    let mut found = false;
    e.visit(&mut |x| {
        if matches!(x, Expr::Var(n, _) if n == var) {
            found = true;
        }
    });
    found
}

fn check_extent(e: &Expr, p: &Parser) -> Result<(), FrontendError> {
    let mut err = None;
    e.visit(&mut |x| match x {
        Expr::Var(n, s) if p.lookup(n) != Some(Sym::Param) && err.is_none() => {
            err = Some(semantic(*s, format!("array extent may only use parameters, found `{n}`")));
        }
        Expr::Index { span, .. } | Expr::Float(_, span) | Expr::Call { span, .. } if err.is_none() => {
            err = Some(semantic(*span, "array extent must be an integer expression over parameters"));
        }
        _ => {}
    });
    err.map_or(Ok(()), Err)
}

/// Loop constructs must govern a `for` loop; `collapse(k)` needs `k`
/// perfectly nested loops.
fn check_loop_nest(p: &Pragma, body: &Stmt) -> Result<(), FrontendError> {
    let mut s = body;
    for level in 0..p.collapse() {
        loop {
            match &s.kind {
                StmtKind::Block(items) if level > 0 && items.len() == 1 => s = &items[0],
                _ => break,
            }
        }
        match &s.kind {
            StmtKind::For(l) => s = &l.body,
            _ if level == 0 => {
                return Err(syntax(p.span, format!("`#pragma omp {}` must be followed by a `for` loop", p.kind)));
            }
            _ => {
                return Err(semantic(
                    p.span,
                    format!("collapse({}) requires {} perfectly nested loops", p.collapse(), p.collapse()),
                ))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_kind(src: &str) -> ErrorKind {
        parse(src).unwrap_err().kind
    }

    #[test]
    fn pragma_free_loop() {
        let p = parse("param n;\nint i;\nfor (i=0;i<n;i++) ;").unwrap();
        assert_eq!(p.params.len(), 1);
        assert_eq!(p.body.len(), 2);
        assert!(matches!(p.body[1].kind, StmtKind::For(_)));
        let mut pragmas = 0;
        p.walk(&mut |s| {
            if matches!(s.kind, StmtKind::Omp { .. }) {
                pragmas += 1;
            }
        });
        assert_eq!(pragmas, 0);
    }

    #[test]
    fn loop_forms() {
        let p = parse(
            "param n;\nint i;\ndouble a[n];\nfor (i = n - 1; 0 <= i; i -= 2) a[i] = 0;\nfor (int j = 0; j < n; j = j + 3) a[j] += 1;",
        )
        .unwrap();
        let StmtKind::For(l) = &p.body[2].kind else { panic!() };
        assert_eq!((l.cmp, l.step), (CmpOp::Ge, -2));
        let StmtKind::For(l) = &p.body[3].kind else { panic!() };
        assert_eq!((l.cmp, l.step, l.decl_ty), (CmpOp::Lt, 3, Some(ElemType::Int)));
    }

    #[test]
    fn pragma_attaches_to_next_statement() {
        let p = parse("param len;\nint i;\ndouble a[len];\ndouble b[len];\n#pragma omp simd\nfor (i=0; i<len-1; i++) {\n  a[i+1] = a[i] + b[i];\n}\n").unwrap();
        let StmtKind::Omp { pragma, body } = &p.body[3].kind else { panic!() };
        assert_eq!(pragma.kind, DirectiveKind::Simd);
        assert_eq!(pragma.collapse(), 1);
        assert!(matches!(body.kind, StmtKind::For(_)));
        assert_eq!(p.body[3].span, Span::new(5, 1));
    }

    #[test]
    fn semantic_errors() {
        assert_eq!(err_kind("x = 1;"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\nint i;\nfor (i=0;i<n;i++) for (i=0;i<n;i++) ;"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\nfor (int i=0;i<n;i++) for (int i=0;i<n;i++) ;"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\nn = 3;"), ErrorKind::Semantic);
        assert_eq!(err_kind("double x;\nx = sqrt(2.0);"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\ndouble a[n];\na[1][2] = 0;"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\nint i;\nfor (i=0;i<n;i++) i = 2;"), ErrorKind::Semantic);
        assert_eq!(err_kind("int x;\nint x;"), ErrorKind::Semantic);
        assert_eq!(err_kind("param n;\nint i;\nfor (i=0;i<n;i--) ;"), ErrorKind::Semantic);
    }

    #[test]
    fn sibling_scopes_may_reuse_names() {
        parse("param n;\nfor (int i=0;i<n;i++) ;\nfor (int i=0;i<n;i++) ;\n{ double t; }\n{ double t; }").unwrap();
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse("param n;\nint i;\nfor (i=0; i*i<n; i++) ;").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Syntax);
        assert_eq!(e.span.line, 3);
        assert_eq!(err_kind("int i;\nwhile (i) ;"), ErrorKind::Syntax);
        assert_eq!(err_kind("#pragma omp parallel for\nint x;"), ErrorKind::Syntax);
        assert_eq!(err_kind("int x;\n#pragma omp parallel for\nx = 1;"), ErrorKind::Syntax);
    }

    #[test]
    fn collapse_needs_perfect_nest() {
        let ok = "param n;\ndouble a[n][n];\n#pragma omp parallel for collapse(2)\nfor (int i=0;i<n;i++) { for (int j=0;j<n;j++) a[i][j]=0; }";
        parse(ok).unwrap();
        let bad = "param n;\ndouble a[n];\n#pragma omp parallel for collapse(2)\nfor (int i=0;i<n;i++) a[i]=0;";
        assert_eq!(err_kind(bad), ErrorKind::Semantic);
    }

    #[test]
    fn unsupported_pragmas_warn() {
        let p = parse("int x;\n#pragma omp sections\n{\n#pragma omp section\nx = 1;\n}\n#pragma once\n").unwrap();
        assert_eq!(p.warnings.len(), 3);
        assert!(p.warnings.iter().all(|w| w.kind == ErrorKind::UnknownPragma));
    }

    #[test]
    fn nesting_limit() {
        let deep = |n: usize| format!("int x;\nx = {}1{};", "(".repeat(n), ")".repeat(n));
        assert!(parse(&deep(MAX_NESTING - 10)).is_ok());
        assert_eq!(err_kind(&deep(100_000)), ErrorKind::Syntax);
        let blocks = |n: usize| format!("int x;\n{}x = 1;{}", "{".repeat(n), "}".repeat(n));
        assert!(parse(&blocks(MAX_NESTING - 10)).is_ok());
        assert_eq!(err_kind(&blocks(100_000)), ErrorKind::Syntax);
        let negs = format!("int x;\nx = {}1;", "-".repeat(100_000));
        assert_eq!(err_kind(&negs), ErrorKind::Syntax);
    }
}
