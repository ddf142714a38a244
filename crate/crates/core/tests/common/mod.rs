//! Random affine kernels and a brute-force race oracle that interprets them
//! directly, independent of the parser and the polyhedral model.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;

pub const VARS: [&str; 3] = ["i", "j", "k"];

#[derive(Debug, Clone)]
pub struct Affine {
    pub coeffs: Vec<i64>,
    pub off: i64,
}

impl Affine {
    fn eval(&self, env: &[i64]) -> i64 {
        self.off + self.coeffs.iter().zip(env).map(|(c, v)| c * v).sum::<i64>()
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let v = VARS[k];
            let term = match c {
                1 => v.to_string(),
                -1 => format!("-{v}"),
                c => format!("{c} * {v}"),
            };
            if s.is_empty() {
                s = term;
            } else if let Some(t) = term.strip_prefix('-') {
                write!(s, " - {t}").unwrap();
            } else {
                write!(s, " + {term}").unwrap();
            }
        }
        match (s.is_empty(), self.off) {
            (true, o) => o.to_string(),
            (false, 0) => s,
            (false, o) if o > 0 => format!("{s} + {o}"),
            (false, o) => format!("{s} - {}", -o),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loop {
    pub lo: i64,
    /// Exclusive upper bound: a constant, or the loop one level out plus `hi`.
    pub hi: i64,
    pub hi_outer: bool,
    pub step: i64,
    pub descending: bool,
    /// Declared in the `for` header rather than at file scope.
    pub local: bool,
}

#[derive(Debug, Clone)]
pub struct Ref {
    pub array: usize,
    pub subs: Vec<Affine>,
}

#[derive(Debug, Clone)]
pub enum Lhs {
    Array(Ref),
    Scalar,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub lhs: Lhs,
    pub reads: Vec<Ref>,
    pub reads_scalar: bool,
    /// `s = s + ...` under a reduction clause.
    pub reduction_update: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseKind {
    None,
    Private,
    Reduction,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub loops: Vec<Loop>,
    pub par: usize,
    pub clause: ClauseKind,
    /// Global loop variables listed in the private clause.
    pub private_loops: Vec<usize>,
    pub ranks: Vec<usize>,
    pub stmts: Vec<Stmt>,
    pub simd: bool,
}

const ARRAYS: [&str; 2] = ["A", "B"];

fn gen_affine(rng: &mut impl Rng, depth: usize) -> Affine {
    let coeffs = (0..depth)
        .map(|_| if rng.gen_bool(0.5) { *[-1, 1, 1, 2, 0].choose(rng).unwrap() } else { 0 })
        .collect();
    Affine { coeffs, off: rng.gen_range(-2..=2) }
}

fn gen_ref(rng: &mut impl Rng, ranks: &[usize], depth: usize) -> Ref {
    let array = rng.gen_range(0..ranks.len());
    Ref { array, subs: (0..ranks[array]).map(|_| gen_affine(rng, depth)).collect() }
}

pub fn gen_kernel(rng: &mut impl Rng) -> Kernel {
    let depth = rng.gen_range(1..=3);
    let loops: Vec<Loop> = (0..depth)
        .map(|l| {
            let hi_outer = l > 0 && rng.gen_bool(0.2);
            let lo = rng.gen_range(0..=2);
            let hi = if hi_outer { rng.gen_range(1..=3) } else { lo + rng.gen_range(0..=6) };
            Loop {
                lo,
                hi,
                hi_outer,
                step: if rng.gen_bool(0.2) { 2 } else { 1 },
                descending: !hi_outer && rng.gen_bool(0.2),
                local: rng.gen_bool(0.7),
            }
        })
        .collect();
    let par = rng.gen_range(0..depth);
    let clause = *[ClauseKind::None, ClauseKind::Private, ClauseKind::Reduction].choose(rng).unwrap();
    let n_arrays = rng.gen_range(1..=2);
    let ranks: Vec<usize> = (0..n_arrays).map(|_| rng.gen_range(1..=2)).collect();
    let use_scalar = rng.gen_bool(0.4);
    let n_stmts = rng.gen_range(1..=2);
    let mut stmts = Vec::new();
    for _ in 0..n_stmts {
        let reads: Vec<Ref> = (0..rng.gen_range(0..=2)).map(|_| gen_ref(rng, &ranks, depth)).collect();
        let st = if use_scalar && rng.gen_bool(0.5) {
            let update = clause == ClauseKind::Reduction || rng.gen_bool(0.5);
            Stmt { lhs: Lhs::Scalar, reads, reads_scalar: update, reduction_update: clause == ClauseKind::Reduction }
        } else {
            let reads_scalar = use_scalar && clause != ClauseKind::Reduction && rng.gen_bool(0.3);
            Stmt { lhs: Lhs::Array(gen_ref(rng, &ranks, depth)), reads, reads_scalar, reduction_update: false }
        };
        stmts.push(st);
    }
    let private_loops =
        (par + 1..depth).filter(|&l| !loops[l].local && clause == ClauseKind::Private && rng.gen_bool(0.5)).collect();
    Kernel { loops, par, clause, private_loops, ranks, stmts, simd: false }
}

fn render_ref(r: &Ref) -> String {
    let mut s = ARRAYS[r.array].to_string();
    for e in &r.subs {
        write!(s, "[{}]", e.render()).unwrap();
    }
    s
}

impl Kernel {
    fn uses_scalar(&self) -> bool {
        self.stmts.iter().any(|s| matches!(s.lhs, Lhs::Scalar) || s.reads_scalar)
    }

    fn pragma(&self) -> String {
        let mut p = if self.simd { "#pragma omp simd".to_string() } else { "#pragma omp parallel for".to_string() };
        match self.clause {
            ClauseKind::None => {}
            ClauseKind::Private => {
                let mut vs: Vec<&str> = self.private_loops.iter().map(|&l| VARS[l]).collect();
                if self.uses_scalar() {
                    vs.insert(0, "s");
                }
                if !vs.is_empty() {
                    write!(p, " private({})", vs.join(", ")).unwrap();
                }
            }
            ClauseKind::Reduction => {
                if self.uses_scalar() {
                    p.push_str(" reduction(+:s)");
                }
            }
        }
        p
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        let globals: Vec<&str> = (0..self.loops.len()).filter(|&l| !self.loops[l].local).map(|l| VARS[l]).collect();
        if !globals.is_empty() {
            writeln!(out, "int {};", globals.join(", ")).unwrap();
        }
        writeln!(out, "double s;").unwrap();
        for (a, &r) in self.ranks.iter().enumerate() {
            writeln!(out, "double {}{};", ARRAYS[a], "[32]".repeat(r)).unwrap();
        }
        for (l, lp) in self.loops.iter().enumerate() {
            let v = VARS[l];
            let pad = "  ".repeat(l);
            if l == self.par {
                writeln!(out, "{}", self.pragma()).unwrap();
            }
            let decl = if lp.local { "int " } else { "" };
            let hi = if lp.hi_outer { format!("{} + {}", VARS[l - 1], lp.hi) } else { lp.hi.to_string() };
            let header = if lp.descending {
                let step = if lp.step == 1 { format!("{v}--") } else { format!("{v} -= {}", lp.step) };
                format!("for ({decl}{v} = {hi} - 1; {v} >= {}; {step})", lp.lo)
            } else {
                let step = if lp.step == 1 { format!("{v}++") } else { format!("{v} += {}", lp.step) };
                format!("for ({decl}{v} = {}; {v} < {hi}; {step})", lp.lo)
            };
            writeln!(out, "{pad}{header}").unwrap();
        }
        let pad = "  ".repeat(self.loops.len());
        writeln!(out, "{pad}{{").unwrap();
        for st in &self.stmts {
            let mut terms: Vec<String> = Vec::new();
            if st.reads_scalar {
                terms.push("s".into());
            }
            terms.extend(st.reads.iter().map(render_ref));
            if terms.len() < 1 + st.reads_scalar as usize {
                terms.push("1.0".into());
            }
            let lhs = match &st.lhs {
                Lhs::Scalar => "s".to_string(),
                Lhs::Array(r) => render_ref(r),
            };
            writeln!(out, "{pad}  {lhs} = {};", terms.join(" + ")).unwrap();
        }
        writeln!(out, "{pad}}}").unwrap();
        out
    }

    fn values(&self, l: usize, env: &[i64]) -> Vec<i64> {
        let lp = &self.loops[l];
        let hi = if lp.hi_outer { env[l - 1] + lp.hi } else { lp.hi };
        let mut v: Vec<i64> = if lp.descending {
            let mut out = Vec::new();
            let mut x = hi - 1;
            while x >= lp.lo {
                out.push(x);
                x -= lp.step;
            }
            out
        } else {
            (lp.lo..hi).step_by(lp.step as usize).collect()
        };
        if lp.descending {
            v.dedup();
        }
        v
    }

    fn var_is_per_thread(&self, l: usize) -> bool {
        l == self.par || self.loops[l].local || self.private_loops.contains(&l)
    }

    /// Whether two distinct iterations of the parallel loop within one
    /// execution of the construct touch a common cell, one of them writing.
    pub fn oracle(&self) -> bool {
        type Cells = HashMap<(String, Vec<i64>), (BTreeSet<i64>, BTreeSet<i64>)>;
        fn record(cells: &mut Cells, name: String, cell: Vec<i64>, write: bool, thread: i64) {
            let e = cells.entry((name, cell)).or_default();
            if write {
                e.0.insert(thread);
            } else {
                e.1.insert(thread);
            }
        }
        fn racy(cells: &Cells) -> bool {
            cells.values().any(|(w, r)| w.len() >= 2 || (w.len() == 1 && r.iter().any(|t| !w.contains(t))))
        }
        let scalar_private = self.clause == ClauseKind::Private;

        // one cell map per execution of the construct
        let mut regions: BTreeMap<Vec<i64>, Cells> = BTreeMap::new();
        let mut env = vec![0i64; self.loops.len()];
        self.walk(0, &mut env, &mut |kind, env| {
            let key = env[..self.par].to_vec();
            let cells = regions.entry(key).or_default();
            let thread = env[self.par];
            match kind {
                Event::Header(l) => {
                    if !self.var_is_per_thread(l) {
                        record(cells, VARS[l].to_string(), vec![], true, thread);
                    }
                }
                Event::Body => {
                    for st in &self.stmts {
                        for r in &st.reads {
                            let cell = r.subs.iter().map(|e| e.eval(env)).collect();
                            record(cells, ARRAYS[r.array].to_string(), cell, false, thread);
                        }
                        let scalar_eligible = !scalar_private && !st.reduction_update;
                        if st.reads_scalar && scalar_eligible {
                            record(cells, "s".into(), vec![], false, thread);
                        }
                        match &st.lhs {
                            Lhs::Array(r) => {
                                let cell = r.subs.iter().map(|e| e.eval(env)).collect();
                                record(cells, ARRAYS[r.array].to_string(), cell, true, thread);
                            }
                            Lhs::Scalar => {
                                if scalar_eligible {
                                    record(cells, "s".into(), vec![], true, thread);
                                }
                            }
                        }
                    }
                }
            }
        });
        regions.values().any(racy)
    }

    fn walk(&self, l: usize, env: &mut Vec<i64>, f: &mut impl FnMut(Event, &[i64])) {
        if l == self.loops.len() {
            f(Event::Body, env);
            return;
        }
        if l > self.par {
            f(Event::Header(l), env);
        }
        for v in self.values(l, env) {
            env[l] = v;
            self.walk(l + 1, env, f);
        }
        env[l] = 0;
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Header(usize),
    Body,
}
