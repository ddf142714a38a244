use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::affine::{Constraint, ConstraintKind};
use super::omega::{self, normalize, Row, System};
use super::{IntSetError, MAX_CONSTRAINTS, MAX_VARS};

/// One conjunction of a disjunctive integer set.
///
/// Columns are laid out as `dims ++ params ++ locals ++ [constant]`. Locals are
/// existentially quantified; they appear when a projection cannot be carried
/// out exactly over the integers (strides, parity) and when a domain is
/// strided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub(crate) n_local: usize,
    pub(crate) eqs: Vec<Row>,
    pub(crate) geqs: Vec<Row>,
}

impl Piece {
    fn universe() -> Self {
        Piece {
            n_local: 0,
            eqs: Vec::new(),
            geqs: Vec::new(),
        }
    }

    pub(crate) fn n_constraints(&self) -> usize {
        self.eqs.len() + self.geqs.len()
    }


    fn to_system(&self, nfree: usize) -> System {
        System {
            nvars: nfree + self.n_local,
            eqs: self.eqs.clone(),
            geqs: self.geqs.clone(),
        }
    }
}

/// Rank of the coefficient part of `rows` (constant column excluded).
fn eq_rank(rows: &[Row]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for r in rank + 1..m.len() {
            if m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for k in 0..ncols {
                m[r][k] = &m[r][k] * &pivot[c] - &f * &pivot[k];
            }
            let g = gcd_row(&m[r]);
            if !g.is_zero() && !g.is_one() {
                for x in m[r].iter_mut() {
                    *x /= &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd_row(r: &[BigInt]) -> BigInt {
    use num_integer::Integer;
    r.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Closed box for parameter values, used to pin a symbolic set to concrete
/// sizes when deciding emptiness.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamBox {
    bounds: BTreeMap<String, (i64, i64)>,
}

impl ParamBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, lo: i64, hi: i64) -> Self {
        self.bounds.insert(name.into(), (lo, hi));
        self
    }

    pub fn fixed(values: &[(&str, i64)]) -> Self {
        values
            .iter()
            .fold(Self::new(), |b, &(n, v)| b.with(n, v, v))
    }

    pub fn get(&self, name: &str) -> Option<(i64, i64)> {
        self.bounds.get(name).copied()
    }
}

/// A finite union of integer polyhedra over named dimensions and symbolic
/// parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSet {
    pub(crate) name: Option<String>,
    pub(crate) dims: Vec<String>,
    pub(crate) params: Vec<String>,
    pub(crate) pieces: Vec<Piece>,
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

impl IntSet {
    pub fn universe(dims: &[&str], params: &[&str]) -> Self {
        IntSet {
            name: None,
            dims: dims.iter().map(|s| s.to_string()).collect(),
            params: params.iter().map(|s| s.to_string()).collect(),
            pieces: vec![Piece::universe()],
        }
    }

    pub fn empty(dims: &[&str], params: &[&str]) -> Self {
        IntSet {
            pieces: Vec::new(),
            ..Self::universe(dims, params)
        }
    }

    /// Builds a single-piece set from name-based constraints.
    pub fn from_constraints(
        dims: &[&str],
        params: &[&str],
        constraints: &[Constraint],
    ) -> Result<Self, IntSetError> {
        Self::with_locals(dims, params, &[], constraints)
    }

    /// Like [`IntSet::from_constraints`], with extra existentially quantified
    /// variables `locals` that may appear in the constraints.
    pub fn with_locals(
        dims: &[&str],
        params: &[&str],
        locals: &[&str],
        constraints: &[Constraint],
    ) -> Result<Self, IntSetError> {
        let mut set = Self::universe(dims, params);
        let mut names: Vec<&str> = dims.iter().chain(params.iter()).copied().collect();
        check_distinct(&names)?;
        names.extend(locals.iter().copied());
        check_distinct(&names)?;
        let width = names.len();
        let mut piece = Piece {
            n_local: locals.len(),
            eqs: Vec::new(),
            geqs: Vec::new(),
        };
        for c in constraints {
            let mut row = vec![BigInt::zero(); width + 1];
            for (v, k) in c.expr.terms() {
                let idx = names
                    .iter()
                    .position(|n| *n == v)
                    .ok_or_else(|| IntSetError::UnknownVariable(v.to_string()))?;
                row[idx] += k;
            }
            row[width] = c.expr.constant_term().clone();
            match c.kind {
                ConstraintKind::NonNegative => piece.geqs.push(row),
                ConstraintKind::Zero => piece.eqs.push(row),
            }
        }
        set.pieces = vec![piece];
        Ok(set)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub(crate) fn n_free(&self) -> usize {
        self.dims.len() + self.params.len()
    }

    pub fn is_obviously_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Renames dimensions (same arity).
    pub fn with_dim_names(mut self, dims: &[&str]) -> Result<Self, IntSetError> {
        if dims.len() != self.dims.len() {
            return Err(IntSetError::ArityMismatch {
                expected: self.dims.len(),
                found: dims.len(),
            });
        }
        self.dims = dims.iter().map(|s| s.to_string()).collect();
        let names: Vec<&str> = self.dims.iter().chain(self.params.iter()).map(String::as_str).collect();
        check_distinct(&names)?;
        Ok(self)
    }

    /// Intersects every piece with additional constraints over dims and params.
    pub fn constrain(&self, constraints: &[Constraint]) -> Result<Self, IntSetError> {
        let dims: Vec<&str> = self.dims.iter().map(String::as_str).collect();
        let params: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let extra = IntSet::from_constraints(&dims, &params, constraints)?;
        self.intersect(&extra)
    }

    /// Re-expresses the set over a parameter list that contains all of its own
    /// parameters.
    pub(crate) fn align_params(&self, params: &[String]) -> Self {
        if params == self.params.as_slice() {
            return self.clone();
        }
        let nd = self.dims.len();
        let np_new = params.len();
        let map: Vec<usize> = self
            .params
            .iter()
            .map(|p| params.iter().position(|q| q == p).expect("param superset"))
            .collect();
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let remap = |r: &Row| -> Row {
                    let np_old = self.params.len();
                    let mut out = vec![BigInt::zero(); nd + np_new + pc.n_local + 1];
                    out[..nd].clone_from_slice(&r[..nd]);
                    for (i, &j) in map.iter().enumerate() {
                        out[nd + j] = r[nd + i].clone();
                    }
                    for l in 0..pc.n_local {
                        out[nd + np_new + l] = r[nd + np_old + l].clone();
                    }
                    let last = out.len() - 1;
                    out[last] = r[r.len() - 1].clone();
                    out
                };
                Piece {
                    n_local: pc.n_local,
                    eqs: pc.eqs.iter().map(remap).collect(),
                    geqs: pc.geqs.iter().map(remap).collect(),
                }
            })
            .collect();
        IntSet {
            name: self.name.clone(),
            dims: self.dims.clone(),
            params: params.to_vec(),
            pieces,
        }
    }

    /// Re-expresses the set over a wider dimension list; dimension `k` of
    /// `self` becomes dimension `map[k]` of the result, other dims are free.
    pub(crate) fn embed(&self, dims: Vec<String>, map: &[usize]) -> Self {
        let nd = dims.len();
        let np = self.params.len();
        let old_nd = self.dims.len();
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let remap = |r: &Row| -> Row {
                    let mut out = vec![BigInt::zero(); nd + np + pc.n_local + 1];
                    for (k, &m) in map.iter().enumerate() {
                        out[m] = r[k].clone();
                    }
                    for j in 0..np + pc.n_local {
                        out[nd + j] = r[old_nd + j].clone();
                    }
                    let last = out.len() - 1;
                    out[last] = r[r.len() - 1].clone();
                    out
                };
                Piece {
                    n_local: pc.n_local,
                    eqs: pc.eqs.iter().map(remap).collect(),
                    geqs: pc.geqs.iter().map(remap).collect(),
                }
            })
            .collect();
        IntSet {
            name: None,
            dims,
            params: self.params.clone(),
            pieces,
        }
    }

    fn merged_params(&self, other: &IntSet) -> Vec<String> {
        let mut params = self.params.clone();
        for p in &other.params {
            if !params.contains(p) {
                params.push(p.clone());
            }
        }
        params
    }

    fn check_arity(&self, other: &IntSet) -> Result<(), IntSetError> {
        if self.dims.len() != other.dims.len() {
            return Err(IntSetError::ArityMismatch {
                expected: self.dims.len(),
                found: other.dims.len(),
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &IntSet) -> Result<Self, IntSetError> {
        self.check_arity(other)?;
        let params = self.merged_params(other);
        let a = self.align_params(&params);
        let b = other.align_params(&params);
        let nfree = a.n_free();
        let mut pieces = Vec::new();
        for pa in &a.pieces {
            for pb in &b.pieces {
                let la = pa.n_local;
                let lb = pb.n_local;
                let widen = |r: &Row, offset: usize, own: usize| -> Row {
                    let mut out = vec![BigInt::zero(); nfree + la + lb + 1];
                    out[..nfree].clone_from_slice(&r[..nfree]);
                    for l in 0..own {
                        out[nfree + offset + l] = r[nfree + l].clone();
                    }
                    let last = out.len() - 1;
                    out[last] = r[r.len() - 1].clone();
                    out
                };
                let mut eqs: Vec<Row> = pa.eqs.iter().map(|r| widen(r, 0, la)).collect();
                eqs.extend(pb.eqs.iter().map(|r| widen(r, la, lb)));
                let mut geqs: Vec<Row> = pa.geqs.iter().map(|r| widen(r, 0, la)).collect();
                geqs.extend(pb.geqs.iter().map(|r| widen(r, la, lb)));
                let mut piece = Piece {
                    n_local: la + lb,
                    eqs,
                    geqs,
                };
                let mut sys = piece.to_system(nfree);
                if normalize(&mut sys) {
                    piece.eqs = sys.eqs;
                    piece.geqs = sys.geqs;
                    pieces.push(piece);
                }
            }
        }
        Ok(IntSet {
            name: self.name.clone(),
            dims: self.dims.clone(),
            params,
            pieces,
        })
    }

    pub fn union(&self, other: &IntSet) -> Result<Self, IntSetError> {
        self.check_arity(other)?;
        let params = self.merged_params(other);
        let mut out = self.align_params(&params);
        let b = other.align_params(&params);
        for p in b.pieces {
            if !out.pieces.contains(&p) {
                out.pieces.push(p);
            }
        }
        Ok(out)
    }

    fn check_limits(&self) -> Result<(), IntSetError> {
        for p in &self.pieces {
            // equalities are substituted away before any projection, so only
            // the remaining degrees of freedom count against the cap
            let nvars = self.n_free() + p.n_local - eq_rank(&p.eqs);
            if nvars > MAX_VARS {
                return Err(IntSetError::DimensionLimit {
                    what: "variables per piece",
                    limit: MAX_VARS,
                });
            }
            if p.n_constraints() > MAX_CONSTRAINTS {
                return Err(IntSetError::DimensionLimit {
                    what: "constraints per piece",
                    limit: MAX_CONSTRAINTS,
                });
            }
        }
        Ok(())
    }

    fn box_rows(&self, params: &ParamBox, width: usize) -> Vec<Row> {
        let nd = self.dims.len();
        let mut rows = Vec::new();
        for (i, p) in self.params.iter().enumerate() {
            if let Some((lo, hi)) = params.get(p) {
                let mut r = vec![BigInt::zero(); width + 1];
                r[nd + i] = BigInt::one();
                r[width] = big(-lo);
                rows.push(r);
                let mut r = vec![BigInt::zero(); width + 1];
                r[nd + i] = -BigInt::one();
                r[width] = big(hi);
                rows.push(r);
            }
        }
        rows
    }

    /// True iff the set has no integer point. Parameters are treated as
    /// existentially quantified unknowns, optionally restricted to `params`.
    pub fn is_empty_int(&self, params: Option<&ParamBox>) -> Result<bool, IntSetError> {
        self.check_limits()?;
        for p in &self.pieces {
            let mut sys = p.to_system(self.n_free());
            if let Some(b) = params {
                sys.geqs.extend(self.box_rows(b, sys.nvars));
            }
            if omega::satisfiable(sys)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_empty(&self) -> Result<bool, IntSetError> {
        self.is_empty_int(None)
    }

    /// Substitutes concrete parameter values; parameters not listed stay
    /// symbolic.
    pub fn fix_params(&self, values: &[(&str, i64)]) -> Self {
        let nd = self.dims.len();
        let mut keep = Vec::new();
        let mut fixed: Vec<(usize, i64)> = Vec::new();
        for (i, p) in self.params.iter().enumerate() {
            match values.iter().find(|(n, _)| n == p) {
                Some(&(_, v)) => fixed.push((nd + i, v)),
                None => keep.push(p.clone()),
            }
        }
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let mut sys = pc.to_system(self.n_free());
                for &(col, v) in fixed.iter().rev() {
                    sys.fix(col, &big(v));
                }
                Piece {
                    n_local: pc.n_local,
                    eqs: sys.eqs,
                    geqs: sys.geqs,
                }
            })
            .collect();
        IntSet {
            name: self.name.clone(),
            dims: self.dims.clone(),
            params: keep,
            pieces,
        }
    }

    /// Membership test for a concrete point (dims, then params in order).
    pub fn contains(&self, point: &[i64], params: &[i64]) -> Result<bool, IntSetError> {
        if point.len() != self.dims.len() || params.len() != self.params.len() {
            return Err(IntSetError::ArityMismatch {
                expected: self.n_free(),
                found: point.len() + params.len(),
            });
        }
        for p in &self.pieces {
            let mut sys = p.to_system(self.n_free());
            let all: Vec<i64> = point.iter().chain(params.iter()).copied().collect();
            for (i, v) in all.iter().enumerate().rev() {
                sys.fix(i, &big(*v));
            }
            if omega::satisfiable(sys)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Projection onto the named dimensions (in the given order). Eliminated
    /// dimensions become existential where exact elimination is impossible,
    /// so the result contains exactly the integer shadows of `self`.
    pub fn project_onto(&self, keep: &[&str]) -> Result<Self, IntSetError> {
        self.check_limits()?;
        let nd = self.dims.len();
        let np = self.params.len();
        let mut keep_idx = Vec::with_capacity(keep.len());
        for k in keep {
            let i = self
                .dims
                .iter()
                .position(|d| d == k)
                .ok_or_else(|| IntSetError::UnknownVariable(k.to_string()))?;
            keep_idx.push(i);
        }
        let dropped: Vec<usize> = (0..nd).filter(|i| !keep_idx.contains(i)).collect();
        let nk = keep_idx.len();
        let nfree = nk + np;
        let mut pieces = Vec::new();
        for pc in &self.pieces {
            let n_local = dropped.len() + pc.n_local;
            let width = nfree + n_local;
            let remap = |r: &Row| -> Row {
                let mut out = vec![BigInt::zero(); width + 1];
                for (new, &old) in keep_idx.iter().enumerate() {
                    out[new] = r[old].clone();
                }
                for j in 0..np {
                    out[nk + j] = r[nd + j].clone();
                }
                for (l, &old) in dropped.iter().enumerate() {
                    out[nfree + l] = r[old].clone();
                }
                for l in 0..pc.n_local {
                    out[nfree + dropped.len() + l] = r[nd + np + l].clone();
                }
                out[width] = r[r.len() - 1].clone();
                out
            };
            let piece = Piece {
                n_local,
                eqs: pc.eqs.iter().map(remap).collect(),
                geqs: pc.geqs.iter().map(remap).collect(),
            };
            if let Some(p) = simplify_piece(piece, nfree)? {
                pieces.push(p);
            }
        }
        let mut out = IntSet {
            name: None,
            dims: keep.iter().map(|s| s.to_string()).collect(),
            params: self.params.clone(),
            pieces: Vec::new(),
        };
        for p in pieces {
            if !out.pieces.contains(&p) {
                out.pieces.push(p);
            }
        }
        Ok(out)
    }

    /// Removes integer-empty pieces and redundant constraints.
    pub fn simplify(&self) -> Result<Self, IntSetError> {
        let nfree = self.n_free();
        let mut out = self.clone();
        out.pieces.clear();
        for p in &self.pieces {
            if let Some(p) = simplify_piece(p.clone(), nfree)? {
                if !out.pieces.contains(&p) {
                    out.pieces.push(p);
                }
            }
        }
        Ok(out)
    }

    /// All integer points for concrete parameter values, dims in order.
    /// Fails with `Unbounded` if some dimension has no finite range.
    pub fn enumerate(&self, params: &[i64], cap: usize) -> Result<Vec<Vec<i64>>, IntSetError> {
        if params.len() != self.params.len() {
            return Err(IntSetError::ArityMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        let nd = self.dims.len();
        let mut out: Vec<Vec<i64>> = Vec::new();
        for p in &self.pieces {
            let mut sys = p.to_system(self.n_free());
            for (i, v) in params.iter().enumerate().rev() {
                sys.fix(nd + i, &big(*v));
            }
            let mut prefix = Vec::new();
            enumerate_rec(&sys, nd, &mut prefix, &mut out, cap)?;
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Some integer point `(dims, params)` of the set, preferring coordinates
    /// close to zero. `None` if the set is empty.
    pub fn sample(&self) -> Result<Option<(Vec<i64>, Vec<i64>)>, IntSetError> {
        self.sample_within(None)
    }

    pub fn sample_within(
        &self,
        params: Option<&ParamBox>,
    ) -> Result<Option<(Vec<i64>, Vec<i64>)>, IntSetError> {
        self.check_limits()?;
        let nd = self.dims.len();
        let nfree = self.n_free();
        for p in &self.pieces {
            let mut sys = p.to_system(nfree);
            if let Some(b) = params {
                sys.geqs.extend(self.box_rows(b, sys.nvars));
            }
            if !omega::satisfiable(sys.clone())? {
                continue;
            }
            let mut values = Vec::with_capacity(nfree);
            for _ in 0..nfree {
                let v = pick_value(&sys)?;
                match v {
                    Some(v) => {
                        sys.fix(0, &big(v));
                        values.push(v);
                    }
                    None => return Ok(None),
                }
            }
            let params = values.split_off(nd);
            return Ok(Some((values, params)));
        }
        Ok(None)
    }
}

fn check_distinct(names: &[&str]) -> Result<(), IntSetError> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(IntSetError::DuplicateName(n.to_string()));
        }
    }
    Ok(())
}

const SAMPLE_TRIES: usize = 20_000;

/// A value for variable 0 that keeps the (satisfiable) system satisfiable.
fn pick_value(sys: &System) -> Result<Option<i64>, IntSetError> {
    let (lo, hi) = omega::integer_range(sys, 0)?;
    let lo = lo.map(|b| b.to_i64().unwrap_or(i64::MIN / 4));
    let hi = hi.map(|b| b.to_i64().unwrap_or(i64::MAX / 4));
    let start = match (lo, hi) {
        (Some(l), _) if l > 0 => l,
        (_, Some(h)) if h < 0 => h,
        _ => 0,
    };
    let within = |v: i64| lo.is_none_or(|l| v >= l) && hi.is_none_or(|h| v <= h);
    let mut tries = 0usize;
    for step in 0i64.. {
        let cands = [start + step, start - step];
        let n = if step == 0 { 1 } else { 2 };
        let mut any = false;
        for &v in &cands[..n] {
            if !within(v) {
                continue;
            }
            any = true;
            let mut s = sys.clone();
            s.fix(0, &big(v));
            if omega::satisfiable(s)? {
                return Ok(Some(v));
            }
            tries += 1;
        }
        if !any || tries > SAMPLE_TRIES {
            break;
        }
    }
    Ok(None)
}

fn enumerate_rec(
    sys: &System,
    remaining: usize,
    prefix: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    cap: usize,
) -> Result<(), IntSetError> {
    if remaining == 0 {
        if omega::satisfiable(sys.clone())? {
            if out.len() >= cap {
                return Err(IntSetError::DimensionLimit {
                    what: "enumerated points",
                    limit: cap,
                });
            }
            out.push(prefix.clone());
        }
        return Ok(());
    }
    let (lo, hi) = omega::integer_range(sys, 0)?;
    let (lo, hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ if !omega::satisfiable(sys.clone())? => return Ok(()),
        _ => return Err(IntSetError::Unbounded),
    };
    let mut v = lo;
    while v <= hi {
        let mut s = sys.clone();
        s.fix(0, &v);
        prefix.push(v.to_i64().ok_or(IntSetError::Unbounded)?);
        enumerate_rec(&s, remaining - 1, prefix, out, cap)?;
        prefix.pop();
        v += 1;
    }
    Ok(())
}

/// Exact simplification of one piece whose first `nfree` columns are free
/// (dims and params) and whose remaining variables are existential.
/// Returns `None` when the piece has no integer point.
pub(crate) fn simplify_piece(piece: Piece, nfree: usize) -> Result<Option<Piece>, IntSetError> {
    let mut sys = piece.to_system(nfree);
    loop {
        if !normalize(&mut sys) {
            return Ok(None);
        }
        let n = sys.nvars;
        // Unit-coefficient equality on a local: substitute it away.
        let unit_eq = sys.eqs.iter().enumerate().find_map(|(ei, r)| {
            (nfree..n).find(|&v| r[v].abs().is_one()).map(|v| (ei, v))
        });
        if let Some((ei, v)) = unit_eq {
            let eq = sys.eqs.swap_remove(ei);
            let a = eq[v].clone();
            let mut expr: Row = eq.iter().map(|c| -(&a * c)).collect();
            expr[v] = BigInt::zero();
            for r in sys.eqs.iter_mut().chain(sys.geqs.iter_mut()) {
                let c = r[v].clone();
                if !c.is_zero() {
                    for (x, e) in r.iter_mut().zip(expr.iter()) {
                        *x += &c * e;
                    }
                }
                r.remove(v);
            }
            sys.nvars -= 1;
            continue;
        }
        let mut progressed = false;
        for v in nfree..n {
            if sys.eqs.iter().any(|r| !r[v].is_zero()) {
                continue;
            }
            let (mut lo, mut hi, mut unit_lo, mut unit_hi) = (0usize, 0usize, true, true);
            for r in &sys.geqs {
                if r[v].is_positive() {
                    lo += 1;
                    unit_lo &= r[v].is_one();
                } else if r[v].is_negative() {
                    hi += 1;
                    unit_hi &= (-&r[v]).is_one();
                }
            }
            if lo == 0 || hi == 0 {
                sys.geqs.retain(|r| r[v].is_zero());
                for r in sys.eqs.iter_mut().chain(sys.geqs.iter_mut()) {
                    r.remove(v);
                }
                sys.nvars -= 1;
                progressed = true;
                break;
            }
            if (unit_lo || unit_hi) && lo * hi <= 16 {
                sys.geqs = omega::eliminate_rational(&sys.geqs, v)?;
                for r in sys.eqs.iter_mut() {
                    r.remove(v);
                }
                sys.nvars -= 1;
                progressed = true;
                break;
            }
        }
        if !progressed {
            break;
        }
    }
    // Use unit equalities on free columns to clear those columns elsewhere.
    for ei in 0..sys.eqs.len() {
        let Some(k) = (0..nfree).find(|&k| sys.eqs[ei][k].abs().is_one()) else { continue };
        let def = sys.eqs[ei].clone();
        let others = sys.eqs.iter_mut().enumerate().filter(|(j, _)| *j != ei).map(|(_, r)| r);
        for r in others.chain(sys.geqs.iter_mut()) {
            if !r[k].is_zero() {
                let m = &r[k] * &def[k];
                for (x, y) in r.iter_mut().zip(&def) {
                    *x -= &m * y;
                }
            }
        }
    }
    sys.geqs.retain(|r| !r.iter().all(|c| c.is_zero()));
    if !normalize(&mut sys) || !omega::satisfiable(sys.clone())? {
        return Ok(None);
    }
    // Drop inequalities implied by the rest.
    let mut i = 0;
    while i < sys.geqs.len() {
        let mut probe = sys.clone();
        let r = probe.geqs.remove(i);
        let mut neg: Row = r.iter().map(|c| -c).collect();
        let last = neg.len() - 1;
        neg[last] -= 1;
        probe.geqs.push(neg);
        if omega::satisfiable(probe)? {
            i += 1;
        } else {
            sys.geqs.remove(i);
        }
    }
    Ok(Some(Piece {
        n_local: sys.nvars - nfree,
        eqs: sys.eqs,
        geqs: sys.geqs,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::affine::AffineExpr as E;

    fn v(n: &str) -> E {
        E::var(n)
    }
    fn c(k: i64) -> E {
        E::constant(k)
    }

    #[test]
    fn contradictory_bounds_are_empty() {
        let s = IntSet::from_constraints(
            &["i"],
            &[],
            &[Constraint::ge(v("i"), c(0)), Constraint::le(v("i"), c(-1))],
        )
        .unwrap();
        assert!(s.is_empty().unwrap());
    }

    #[test]
    fn parity_is_integer_empty() {
        let s = IntSet::from_constraints(
            &["i"],
            &[],
            &[
                Constraint::eq(v("i") * 2, c(1)),
                Constraint::ge(v("i"), c(0)),
                Constraint::le(v("i"), c(10)),
            ],
        )
        .unwrap();
        assert!(s.is_empty().unwrap());
    }

    #[test]
    fn projection_keeps_stride() {
        // { [x, y] : x = 2y, 0 <= x <= 4 } onto x is {0, 2, 4}, not [0, 4].
        let s = IntSet::from_constraints(
            &["x", "y"],
            &[],
            &[
                Constraint::eq(v("x"), v("y") * 2),
                Constraint::ge(v("x"), c(0)),
                Constraint::le(v("x"), c(4)),
            ],
        )
        .unwrap();
        let p = s.project_onto(&["x"]).unwrap();
        assert_eq!(p.enumerate(&[], 100).unwrap(), vec![vec![0], vec![2], vec![4]]);
        assert!(!p.contains(&[1], &[]).unwrap());
    }

    #[test]
    fn identity_projection_preserves_points() {
        let s = IntSet::from_constraints(
            &["i", "j"],
            &[],
            &[
                Constraint::ge(v("i"), c(0)),
                Constraint::le(v("i"), c(3)),
                Constraint::ge(v("j"), v("i")),
                Constraint::le(v("j"), c(3)),
            ],
        )
        .unwrap();
        let p = s.project_onto(&["i", "j"]).unwrap();
        assert_eq!(p.enumerate(&[], 100).unwrap(), s.enumerate(&[], 100).unwrap());
    }

    #[test]
    fn param_box_decides_emptiness() {
        // { [i] : 0 <= i < n and i >= 5 } is empty iff n <= 5
        let s = IntSet::from_constraints(
            &["i"],
            &["n"],
            &[
                Constraint::ge(v("i"), c(0)),
                Constraint::lt(v("i"), v("n")),
                Constraint::ge(v("i"), c(5)),
            ],
        )
        .unwrap();
        assert!(!s.is_empty().unwrap());
        assert!(s.is_empty_int(Some(&ParamBox::new().with("n", 0, 5))).unwrap());
        assert!(!s.is_empty_int(Some(&ParamBox::fixed(&[("n", 6)]))).unwrap());
    }

    #[test]
    fn sample_is_member() {
        let s = IntSet::from_constraints(
            &["i", "j"],
            &["n"],
            &[
                Constraint::ge(v("i"), c(3)),
                Constraint::lt(v("i"), v("n")),
                Constraint::eq(v("j"), v("i") * 2 + c(1)),
            ],
        )
        .unwrap();
        let (pt, ps) = s.sample().unwrap().unwrap();
        assert!(s.contains(&pt, &ps).unwrap());
        assert_eq!(pt, vec![3, 7]);
    }

    #[test]
    fn dimension_limit_is_reported() {
        let names: Vec<String> = (0..13).map(|i| format!("x{i}")).collect();
        let dims: Vec<&str> = names.iter().map(String::as_str).collect();
        let s = IntSet::universe(&dims, &[]);
        assert!(matches!(s.is_empty(), Err(IntSetError::DimensionLimit { .. })));
        let tied = IntSet::from_constraints(&dims, &[], &[Constraint::eq(v("x0"), v("x1") + c(1))]).unwrap();
        assert!(!tied.is_empty().unwrap());
        let twice = [Constraint::eq(v("x0"), v("x1")), Constraint::eq(v("x1"), v("x0"))];
        assert!(IntSet::from_constraints(&dims, &[], &twice).unwrap().is_empty().is_ok());
        let wide: Vec<String> = (0..14).map(|i| format!("x{i}")).collect();
        let wide: Vec<&str> = wide.iter().map(String::as_str).collect();
        let s = IntSet::from_constraints(&wide, &[], &twice).unwrap();
        assert!(matches!(s.is_empty(), Err(IntSetError::DimensionLimit { .. })));
    }

    #[test]
    fn unknown_variable_rejected() {
        let r = IntSet::from_constraints(&["i"], &[], &[Constraint::ge(v("k"), c(0))]);
        assert!(matches!(r, Err(IntSetError::UnknownVariable(_))));
    }
}
