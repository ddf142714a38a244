use std::fmt;

use serde::Serialize;

use super::ast::Span;
use super::lexer::{tokenize_at, Tok, Token};
use super::{ErrorKind, FrontendError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveKind {
    Parallel,
    ParallelFor,
    ParallelForSimd,
    /// Worksharing loop (`for` inside a parallel region).
    For,
    ForSimd,
    Simd,
    Distribute,
    Single,
    Master,
    Critical,
    Atomic,
    Ordered,
    Barrier,
    Threadprivate,
    /// Recognized OpenMP construct outside the supported set, e.g. `sections`.
    Unsupported(String),
}

impl DirectiveKind {
    /// Constructs that distribute loop iterations (or SIMD lanes).
    pub fn is_loop(&self) -> bool {
        matches!(
            self,
            DirectiveKind::ParallelFor
                | DirectiveKind::ParallelForSimd
                | DirectiveKind::For
                | DirectiveKind::ForSimd
                | DirectiveKind::Simd
                | DirectiveKind::Distribute
        )
    }

    /// Constructs that create a team of threads.
    pub fn is_parallel(&self) -> bool {
        matches!(
            self,
            DirectiveKind::Parallel | DirectiveKind::ParallelFor | DirectiveKind::ParallelForSimd
        )
    }

    pub fn is_standalone(&self) -> bool {
        matches!(self, DirectiveKind::Barrier | DirectiveKind::Threadprivate)
            || matches!(self, DirectiveKind::Unsupported(n) if STANDALONE_UNSUPPORTED.contains(&n.as_str()))
    }

    /// Name in the directive-dump notation.
    pub fn dump_name(&self) -> String {
        match self {
            DirectiveKind::Parallel => "OMP_Parallel".into(),
            DirectiveKind::ParallelFor => "OMP_Parallel_For".into(),
            DirectiveKind::ParallelForSimd => "OMP_Parallel_For_Simd".into(),
            DirectiveKind::For => "OMP_Workshare_Loop".into(),
            DirectiveKind::ForSimd => "OMP_Workshare_Loop_Simd".into(),
            DirectiveKind::Simd => "OMP_Simd".into(),
            DirectiveKind::Distribute => "OMP_Distribute".into(),
            DirectiveKind::Single => "OMP_Workshare_single".into(),
            DirectiveKind::Master => "OMP_Master".into(),
            DirectiveKind::Critical => "OMP_Critical".into(),
            DirectiveKind::Atomic => "OMP_Atomic".into(),
            DirectiveKind::Ordered => "OMP_Ordered".into(),
            DirectiveKind::Barrier => "OMP_Barrier".into(),
            DirectiveKind::Threadprivate => "OMP_Threadprivate".into(),
            DirectiveKind::Unsupported(n) => format!("OMP_Unsupported({n})"),
        }
    }

    /// Source spelling after `#pragma omp`.
    pub fn spelling(&self) -> &str {
        match self {
            DirectiveKind::Parallel => "parallel",
            DirectiveKind::ParallelFor => "parallel for",
            DirectiveKind::ParallelForSimd => "parallel for simd",
            DirectiveKind::For => "for",
            DirectiveKind::ForSimd => "for simd",
            DirectiveKind::Simd => "simd",
            DirectiveKind::Distribute => "distribute",
            DirectiveKind::Single => "single",
            DirectiveKind::Master => "master",
            DirectiveKind::Critical => "critical",
            DirectiveKind::Atomic => "atomic",
            DirectiveKind::Ordered => "ordered",
            DirectiveKind::Barrier => "barrier",
            DirectiveKind::Threadprivate => "threadprivate",
            DirectiveKind::Unsupported(n) => n,
        }
    }
}

impl fmt::Display for DirectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.spelling())
    }
}

const STANDALONE_UNSUPPORTED: [&str; 6] = [
    "taskwait",
    "taskyield",
    "flush",
    "cancel",
    "cancellation point",
    "target update",
];

const UNSUPPORTED_HEADS: [&str; 12] = [
    "sections",
    "section",
    "task",
    "taskloop",
    "taskwait",
    "taskgroup",
    "taskyield",
    "target",
    "teams",
    "flush",
    "workshare",
    "cancel",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ReductionOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "max")]
    Max,
    #[serde(rename = "min")]
    Min,
    #[serde(rename = "&&")]
    And,
    #[serde(rename = "||")]
    Or,
}

impl ReductionOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ReductionOp::Add => "+",
            ReductionOp::Mul => "*",
            ReductionOp::Sub => "-",
            ReductionOp::Max => "max",
            ReductionOp::Min => "min",
            ReductionOp::And => "&&",
            ReductionOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Static,
    Dynamic,
    Guided,
    Auto,
    Runtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleModifier {
    Monotonic,
    Nonmonotonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Schedule {
    pub modifier: Option<ScheduleModifier>,
    pub ordered: bool,
    pub kind: ScheduleKind,
    pub chunk: Option<u64>,
}

impl Schedule {
    /// Default for worksharing loops without a `schedule` clause.
    pub fn default_static() -> Self {
        Schedule {
            modifier: None,
            ordered: false,
            kind: ScheduleKind::Static,
            chunk: None,
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = self.modifier {
            write!(f, "{} ", if m == ScheduleModifier::Monotonic { "Monotonic" } else { "Nonmonotonic" })?;
        }
        if self.ordered {
            f.write_str("Ordered ")?;
        }
        let k = match self.kind {
            ScheduleKind::Static => "Static",
            ScheduleKind::Dynamic => "Dynamic",
            ScheduleKind::Guided => "Guided",
            ScheduleKind::Auto => "Auto",
            ScheduleKind::Runtime => "Runtime",
        };
        match self.chunk {
            Some(c) => write!(f, "{k} Schedule (chunk {c})"),
            None => write!(f, "{k} Schedule (auto-chunked)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clause {
    Private(Vec<String>),
    Firstprivate(Vec<String>),
    Lastprivate(Vec<String>),
    Shared(Vec<String>),
    Linear(Vec<String>),
    Copyin(Vec<String>),
    Reduction(ReductionOp, Vec<String>),
    Schedule(Schedule),
    Collapse(u32),
    Nowait,
    Ordered,
    /// Anything that only carries runtime metadata (`num_threads`, `if`,
    /// `default`, `safelen`, ...), kept verbatim.
    Other { name: String, arg: Option<String> },
}

impl Clause {
    pub fn name(&self) -> &str {
        match self {
            Clause::Private(_) => "private",
            Clause::Firstprivate(_) => "firstprivate",
            Clause::Lastprivate(_) => "lastprivate",
            Clause::Shared(_) => "shared",
            Clause::Linear(_) => "linear",
            Clause::Copyin(_) => "copyin",
            Clause::Reduction(..) => "reduction",
            Clause::Schedule(_) => "schedule",
            Clause::Collapse(_) => "collapse",
            Clause::Nowait => "nowait",
            Clause::Ordered => "ordered",
            Clause::Other { name, .. } => name,
        }
    }

    pub fn vars(&self) -> &[String] {
        match self {
            Clause::Private(v)
            | Clause::Firstprivate(v)
            | Clause::Lastprivate(v)
            | Clause::Shared(v)
            | Clause::Linear(v)
            | Clause::Copyin(v)
            | Clause::Reduction(_, v) => v,
            _ => &[],
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Reduction(op, v) => write!(f, "reduction({}:{})", op.symbol(), v.join(", ")),
            Clause::Schedule(s) => {
                f.write_str("schedule(")?;
                if let Some(m) = s.modifier {
                    write!(f, "{}: ", if m == ScheduleModifier::Monotonic { "monotonic" } else { "nonmonotonic" })?;
                }
                let k = match s.kind {
                    ScheduleKind::Static => "static",
                    ScheduleKind::Dynamic => "dynamic",
                    ScheduleKind::Guided => "guided",
                    ScheduleKind::Auto => "auto",
                    ScheduleKind::Runtime => "runtime",
                };
                f.write_str(k)?;
                if let Some(c) = s.chunk {
                    write!(f, ", {c}")?;
                }
                f.write_str(")")
            }
            Clause::Collapse(k) => write!(f, "collapse({k})"),
            Clause::Nowait => f.write_str("nowait"),
            Clause::Ordered => f.write_str("ordered"),
            Clause::Other { name, arg: None } => f.write_str(name),
            Clause::Other { name, arg: Some(a) } => write!(f, "{name}({a})"),
            c => write!(f, "{}({})", c.name(), c.vars().join(", ")),
        }
    }
}

/// A parsed `#pragma omp` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pragma {
    pub kind: DirectiveKind,
    pub clauses: Vec<Clause>,
    /// `critical(name)`
    pub name: Option<String>,
    /// `threadprivate(list)`
    pub list: Vec<String>,
    pub span: Span,
}

impl Pragma {
    pub fn nowait(&self) -> bool {
        self.clauses.iter().any(|c| matches!(c, Clause::Nowait))
    }

    pub fn collapse(&self) -> u32 {
        self.clauses
            .iter()
            .find_map(|c| match c {
                Clause::Collapse(k) => Some(*k),
                _ => None,
            })
            .unwrap_or(1)
    }

    pub fn schedule(&self) -> Option<Schedule> {
        self.clauses.iter().find_map(|c| match c {
            Clause::Schedule(s) => Some(*s),
            _ => None,
        })
    }

    pub fn has_ordered_clause(&self) -> bool {
        self.clauses.iter().any(|c| matches!(c, Clause::Ordered))
    }

    /// Every variable named in a clause or list.
    pub fn named_vars(&self) -> impl Iterator<Item = &String> {
        self.clauses.iter().flat_map(|c| c.vars().iter()).chain(self.list.iter())
    }
}

impl fmt::Display for Pragma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#pragma omp {}", self.kind.spelling())?;
        if let Some(n) = &self.name {
            write!(f, " ({n})")?;
        }
        if !self.list.is_empty() {
            write!(f, "({})", self.list.join(", "))?;
        }
        for c in &self.clauses {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// Outcome of reading a `#pragma` line.
#[derive(Debug, Clone, PartialEq)]
pub enum PragmaLine {
    Omp(Pragma),
    /// Not an OpenMP pragma (`#pragma once`, `#pragma GCC ...`).
    Foreign,
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.word() == Some(w) {
            self.next();
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> FrontendError {
        FrontendError::new(ErrorKind::Syntax, self.span(), msg)
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}` in pragma")))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.next() {
            Tok::Ident(s) => Ok(s),
            _ => Err(self.err("expected identifier in pragma")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, FrontendError> {
        let mut out = vec![self.ident()?];
        while self.eat_punct(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn positive_int(&mut self) -> Result<u64, FrontendError> {
        match self.next() {
            Tok::Int(v) if v >= 1 => Ok(v as u64),
            _ => Err(self.err("expected positive integer constant in pragma")),
        }
    }

    /// Raw text of a balanced parenthesized argument (after the `(`).
    fn raw_until_close(&mut self) -> Result<String, FrontendError> {
        let mut depth = 0;
        let mut parts = Vec::new();
        loop {
            match self.next() {
                Tok::Eof => return Err(self.err("unbalanced parentheses in pragma")),
                Tok::Punct(")") if depth == 0 => break,
                Tok::Punct(p) => {
                    if p == "(" {
                        depth += 1;
                    } else if p == ")" {
                        depth -= 1;
                    }
                    parts.push(p.to_string());
                }
                Tok::Ident(s) | Tok::Float(s) => parts.push(s),
                Tok::Int(v) => parts.push(v.to_string()),
                Tok::Pragma(_) => return Err(self.err("unexpected pragma")),
            }
        }
        Ok(parts.join(" "))
    }
}

/// Parses the text following `#pragma`. Unknown OpenMP constructs yield an
/// `Unsupported` kind; malformed text is a syntax error.
pub fn parse_pragma(text: &str, span: Span) -> Result<PragmaLine, FrontendError> {
    let toks = tokenize_at(text, span)?;
    let mut c = Cursor { toks, pos: 0 };
    if !c.eat_word("omp") {
        return Ok(PragmaLine::Foreign);
    }
    let kind = directive_kind(&mut c)?;
    let mut p = Pragma {
        kind,
        clauses: Vec::new(),
        name: None,
        list: Vec::new(),
        span,
    };
    match &p.kind {
        DirectiveKind::Critical if c.eat_punct("(") => {
            p.name = Some(c.ident()?);
            c.expect_punct(")")?;
        }
        DirectiveKind::Threadprivate => {
            c.expect_punct("(")?;
            p.list = c.ident_list()?;
            c.expect_punct(")")?;
        }
        DirectiveKind::Atomic => {
            for w in ["read", "write", "update", "capture"] {
                if c.eat_word(w) {
                    p.clauses.push(Clause::Other { name: w.into(), arg: None });
                }
            }
        }
        DirectiveKind::Unsupported(_) => {
            // Clauses of unsupported constructs are not interpreted.
            return Ok(PragmaLine::Omp(p));
        }
        _ => {}
    }
    loop {
        c.eat_punct(",");
        if matches!(c.peek(), Tok::Eof) {
            break;
        }
        let clause = clause(&mut c)?;
        p.clauses.push(clause);
    }
    validate(&p)?;
    Ok(PragmaLine::Omp(p))
}

fn directive_kind(c: &mut Cursor) -> Result<DirectiveKind, FrontendError> {
    let Some(head) = c.word().map(str::to_string) else {
        return Err(c.err("expected an OpenMP directive name"));
    };
    c.next();
    let kind = match head.as_str() {
        "parallel" => {
            if c.eat_word("for") {
                if c.eat_word("simd") {
                    DirectiveKind::ParallelForSimd
                } else {
                    DirectiveKind::ParallelFor
                }
            } else if let Some(w) = c.word().filter(|w| ["sections", "workshare", "loop", "master"].contains(w)) {
                let name = format!("parallel {w}");
                c.next();
                DirectiveKind::Unsupported(name)
            } else {
                DirectiveKind::Parallel
            }
        }
        "for" => {
            if c.eat_word("simd") {
                DirectiveKind::ForSimd
            } else {
                DirectiveKind::For
            }
        }
        "simd" => DirectiveKind::Simd,
        "distribute" => {
            // `distribute parallel for [simd]` and `distribute simd` keep the
            // loop semantics of `distribute`.
            if c.eat_word("parallel") {
                if !c.eat_word("for") {
                    return Err(c.err("expected `for` after `distribute parallel`"));
                }
                c.eat_word("simd");
            } else {
                c.eat_word("simd");
            }
            DirectiveKind::Distribute
        }
        "single" => DirectiveKind::Single,
        "master" => DirectiveKind::Master,
        "critical" => DirectiveKind::Critical,
        "atomic" => DirectiveKind::Atomic,
        "ordered" => DirectiveKind::Ordered,
        "barrier" => DirectiveKind::Barrier,
        "threadprivate" => DirectiveKind::Threadprivate,
        "cancellation" if c.eat_word("point") => DirectiveKind::Unsupported("cancellation point".into()),
        "target" if c.eat_word("update") => DirectiveKind::Unsupported("target update".into()),
        "declare" => {
            let w = c.word().unwrap_or("").to_string();
            c.next();
            DirectiveKind::Unsupported(format!("declare {w}").trim().to_string())
        }
        h if UNSUPPORTED_HEADS.contains(&h) => DirectiveKind::Unsupported(h.to_string()),
        other => DirectiveKind::Unsupported(other.to_string()),
    };
    Ok(kind)
}

fn reduction_op(c: &mut Cursor) -> Result<ReductionOp, FrontendError> {
    let op = match c.next() {
        Tok::Punct("+") => ReductionOp::Add,
        Tok::Punct("*") => ReductionOp::Mul,
        Tok::Punct("-") => ReductionOp::Sub,
        Tok::Punct("&&") => ReductionOp::And,
        Tok::Punct("||") => ReductionOp::Or,
        Tok::Ident(s) if s == "max" => ReductionOp::Max,
        Tok::Ident(s) if s == "min" => ReductionOp::Min,
        _ => return Err(c.err("unsupported reduction operator")),
    };
    Ok(op)
}

fn clause(c: &mut Cursor) -> Result<Clause, FrontendError> {
    let name = match c.peek() {
        Tok::Ident(s) => s.clone(),
        _ => return Err(c.err("expected a clause")),
    };
    c.next();
    let list = |c: &mut Cursor| -> Result<Vec<String>, FrontendError> {
        c.expect_punct("(")?;
        let v = c.ident_list()?;
        // `linear(i:1)`, `aligned(a:64)` carry a step/alignment we ignore
        if c.eat_punct(":") {
            c.next();
        }
        c.expect_punct(")")?;
        Ok(v)
    };
    Ok(match name.as_str() {
        "private" => Clause::Private(list(c)?),
        "firstprivate" => Clause::Firstprivate(list(c)?),
        "lastprivate" => Clause::Lastprivate(list(c)?),
        "shared" => Clause::Shared(list(c)?),
        "linear" => Clause::Linear(list(c)?),
        "copyin" => Clause::Copyin(list(c)?),
        "reduction" => {
            c.expect_punct("(")?;
            let op = reduction_op(c)?;
            c.expect_punct(":")?;
            let v = c.ident_list()?;
            c.expect_punct(")")?;
            Clause::Reduction(op, v)
        }
        "schedule" => {
            c.expect_punct("(")?;
            let mut s = Schedule::default_static();
            if let Some(m) = c.word().and_then(|w| match w {
                "monotonic" => Some(ScheduleModifier::Monotonic),
                "nonmonotonic" => Some(ScheduleModifier::Nonmonotonic),
                _ => None,
            }) {
                c.next();
                c.expect_punct(":")?;
                s.modifier = Some(m);
            }
            s.kind = match c.ident()?.as_str() {
                "static" => ScheduleKind::Static,
                "dynamic" => ScheduleKind::Dynamic,
                "guided" => ScheduleKind::Guided,
                "auto" => ScheduleKind::Auto,
                "runtime" => ScheduleKind::Runtime,
                k => return Err(c.err(format!("unknown schedule kind `{k}`"))),
            };
            if c.eat_punct(",") {
                s.chunk = Some(c.positive_int()?);
            }
            c.expect_punct(")")?;
            Clause::Schedule(s)
        }
        "collapse" => {
            c.expect_punct("(")?;
            let k = c.positive_int()?;
            c.expect_punct(")")?;
            Clause::Collapse(u32::try_from(k).map_err(|_| c.err("collapse depth too large"))?)
        }
        "nowait" => Clause::Nowait,
        "ordered" => {
            if c.eat_punct("(") {
                c.positive_int()?;
                c.expect_punct(")")?;
            }
            Clause::Ordered
        }
        "num_threads" | "if" | "default" | "proc_bind" | "safelen" | "simdlen" | "aligned"
        | "dist_schedule" | "nontemporal" | "order" | "threads" | "simd" | "copyprivate" => {
            let arg = if c.eat_punct("(") {
                Some(c.raw_until_close()?)
            } else {
                None
            };
            Clause::Other { name, arg }
        }
        _ => return Err(c.err(format!("unknown clause `{name}`"))),
    })
}

fn validate(p: &Pragma) -> Result<(), FrontendError> {
    use DirectiveKind as K;
    let allowed: &[&str] = match &p.kind {
        K::Parallel => &["private", "firstprivate", "shared", "reduction", "copyin", "num_threads", "if", "default", "proc_bind"],
        K::ParallelFor | K::ParallelForSimd => &[
            "private", "firstprivate", "lastprivate", "shared", "reduction", "copyin", "num_threads", "if",
            "default", "proc_bind", "schedule", "collapse", "ordered", "linear", "safelen", "simdlen",
            "aligned",
        ],
        K::For | K::ForSimd => &[
            "private", "firstprivate", "lastprivate", "reduction", "schedule", "collapse", "ordered", "nowait",
            "linear", "safelen", "simdlen", "aligned",
        ],
        K::Simd => &["private", "lastprivate", "reduction", "collapse", "linear", "safelen", "simdlen", "aligned", "nontemporal", "order", "if"],
        K::Distribute => &[
            "private", "firstprivate", "lastprivate", "shared", "reduction", "collapse", "dist_schedule",
            "schedule", "num_threads", "if", "default", "proc_bind", "linear", "safelen", "simdlen", "aligned",
        ],
        K::Single => &["private", "firstprivate", "nowait", "copyprivate"],
        K::Atomic => &["read", "write", "update", "capture"],
        K::Ordered => &["threads", "simd"],
        K::Master | K::Critical | K::Barrier | K::Threadprivate | K::Unsupported(_) => &[],
    };
    let mut seen: Vec<&String> = Vec::new();
    for cl in &p.clauses {
        if !allowed.contains(&cl.name()) {
            return Err(FrontendError::new(
                ErrorKind::Syntax,
                p.span,
                format!("clause `{}` not allowed on `{}`", cl.name(), p.kind),
            ));
        }
        if let Clause::Shared(_) = cl {
            // shared is the default; listing it is still a classification
        }
        for v in cl.vars() {
            if seen.contains(&v) {
                return Err(FrontendError::new(
                    ErrorKind::Semantic,
                    p.span,
                    format!("variable `{v}` appears in more than one data-sharing clause"),
                ));
            }
            seen.push(v);
        }
    }
    if p.clauses.iter().filter(|c| matches!(c, Clause::Schedule(_))).count() > 1
        || p.clauses.iter().filter(|c| matches!(c, Clause::Collapse(_))).count() > 1
    {
        return Err(FrontendError::new(ErrorKind::Syntax, p.span, "repeated clause"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omp(s: &str) -> Pragma {
        match parse_pragma(s, Span::new(1, 1)).unwrap() {
            PragmaLine::Omp(p) => p,
            PragmaLine::Foreign => panic!("not omp"),
        }
    }

    #[test]
    fn combined_constructs() {
        assert_eq!(omp("omp parallel for private (temp,i,j)").kind, DirectiveKind::ParallelFor);
        assert_eq!(omp("omp parallel for simd").kind, DirectiveKind::ParallelForSimd);
        assert_eq!(omp("omp for simd").kind, DirectiveKind::ForSimd);
        assert_eq!(omp("omp distribute parallel for").kind, DirectiveKind::Distribute);
    }

    #[test]
    fn clauses() {
        let p = omp("omp parallel for reduction(+:sum) schedule(monotonic: dynamic, 4) collapse(2)");
        assert_eq!(p.clauses[0], Clause::Reduction(ReductionOp::Add, vec!["sum".into()]));
        let s = p.schedule().unwrap();
        assert_eq!(s.kind, ScheduleKind::Dynamic);
        assert_eq!(s.chunk, Some(4));
        assert_eq!(s.modifier, Some(ScheduleModifier::Monotonic));
        assert_eq!(p.collapse(), 2);
        let p = omp("omp for nowait");
        assert!(p.nowait());
        assert_eq!(omp("omp parallel for reduction(max:m)").clauses[0], Clause::Reduction(ReductionOp::Max, vec!["m".into()]));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "omp parallel for private(temp, i, j)",
            "omp for nowait",
            "omp critical (lock)",
            "omp threadprivate(x, y)",
            "omp parallel num_threads(4) shared(b, error)",
            "omp simd safelen(8)",
        ] {
            let p = omp(s);
            let text = p.to_string();
            let again = omp(text.strip_prefix("#pragma ").unwrap());
            assert_eq!(p, again, "{text}");
        }
    }

    #[test]
    fn unsupported_and_foreign() {
        assert_eq!(omp("omp sections").kind, DirectiveKind::Unsupported("sections".into()));
        assert_eq!(omp("omp parallel sections").kind, DirectiveKind::Unsupported("parallel sections".into()));
        assert_eq!(omp("omp task depend(in: x)").kind, DirectiveKind::Unsupported("task".into()));
        assert!(omp("omp taskwait").kind.is_standalone());
        assert_eq!(omp("omp frobnicate").kind, DirectiveKind::Unsupported("frobnicate".into()));
        assert_eq!(parse_pragma("once", Span::default()).unwrap(), PragmaLine::Foreign);
    }

    #[test]
    fn malformed() {
        for s in [
            "omp",
            "omp parallel for private(",
            "omp parallel for reduction(^:x)",
            "omp for schedule(sometimes)",
            "omp parallel nowait",
            "omp parallel for collapse(0)",
            "omp parallel for private(x) shared(x)",
            "omp 42",
        ] {
            assert!(parse_pragma(s, Span::default()).is_err(), "{s}");
        }
    }
}
