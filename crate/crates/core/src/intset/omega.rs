//! Integer feasibility of conjunctions of affine constraints.
//!
//! Rows are coefficient vectors with the constant in the last slot; a row `r`
//! stands for `r[0]*x0 + ... + r[n-1]*x(n-1) + r[n] >= 0` (or `= 0`).
//!
//! The decision procedure is Fourier–Motzkin elimination made integer-exact
//! the way the Omega test does it: equalities are removed by exact
//! substitution (introducing a fresh variable when no unit coefficient is
//! available), variables whose lower or upper bounds all have unit
//! coefficients are eliminated exactly, and the remaining cases are settled by
//! the real shadow (infeasible), the dark shadow (feasible) or by splintering
//! into finitely many equality-constrained subproblems.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntSetError;

pub(crate) type Row = Vec<BigInt>;

/// Working-set limit for a single elimination step.
const MAX_WORKING_ROWS: usize = 4096;
const MAX_SPLINTER_DEPTH: usize = 24;

#[derive(Debug, Clone, Default)]
pub(crate) struct System {
    pub nvars: usize,
    pub eqs: Vec<Row>,
    pub geqs: Vec<Row>,
}

impl System {
    /// Fixes variable `var` to `value`, removing its column.
    pub fn fix(&mut self, var: usize, value: &BigInt) {
        for r in self.eqs.iter_mut().chain(self.geqs.iter_mut()) {
            let c = r.remove(var);
            let last = r.len() - 1;
            r[last] += c * value;
        }
        self.nvars -= 1;
    }
}

pub(crate) fn gcd_of(coeffs: &[BigInt]) -> BigInt {
    coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divides out the coefficient gcd; inequality constants are floored, which is
/// exact over the integers. Returns `false` if the row alone is infeasible,
/// `Ok(None)` if it is trivially true.
fn normalize_row(mut r: Row, is_eq: bool) -> Result<Option<Row>, ()> {
    let n = r.len() - 1;
    let g = gcd_of(&r[..n]);
    if g.is_zero() {
        let c = &r[n];
        let ok = if is_eq { c.is_zero() } else { !c.is_negative() };
        return if ok { Ok(None) } else { Err(()) };
    }
    if is_eq {
        if !(&r[n] % &g).is_zero() {
            return Err(());
        }
        for x in r.iter_mut() {
            *x = &*x / &g;
        }
        if let Some(first) = r[..n].iter().find(|c| !c.is_zero()) {
            if first.is_negative() {
                for x in r.iter_mut() {
                    *x = -&*x;
                }
            }
        }
    } else if !g.is_one() {
        for x in r[..n].iter_mut() {
            *x = &*x / &g;
        }
        r[n] = r[n].div_floor(&g);
    }
    Ok(Some(r))
}

/// Normalizes every row, drops duplicates, keeps the tightest of parallel
/// inequalities and turns opposite inequality pairs into equalities.
/// Returns `false` when a contradiction is found.
pub(crate) fn normalize(sys: &mut System) -> bool {
    let n = sys.nvars;
    let mut eqs = Vec::with_capacity(sys.eqs.len());
    for r in sys.eqs.drain(..) {
        match normalize_row(r, true) {
            Err(()) => return false,
            Ok(Some(r)) => {
                if !eqs.contains(&r) {
                    eqs.push(r)
                }
            }
            Ok(None) => {}
        }
    }
    let mut tightest: HashMap<Vec<BigInt>, BigInt> = HashMap::new();
    let mut order: Vec<Vec<BigInt>> = Vec::new();
    for r in sys.geqs.drain(..) {
        match normalize_row(r, false) {
            Err(()) => return false,
            Ok(None) => {}
            Ok(Some(mut r)) => {
                let c = r.pop().expect("row has constant");
                match tightest.get_mut(&r) {
                    Some(old) => {
                        if c < *old {
                            *old = c;
                        }
                    }
                    None => {
                        order.push(r.clone());
                        tightest.insert(r, c);
                    }
                }
            }
        }
    }
    let mut geqs = Vec::with_capacity(order.len());
    let mut consumed: Vec<bool> = vec![false; order.len()];
    let index: HashMap<&Vec<BigInt>, usize> = order.iter().enumerate().map(|(i, r)| (r, i)).collect();
    for (i, coeffs) in order.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let c = &tightest[coeffs];
        let neg: Vec<BigInt> = coeffs.iter().map(|x| -x).collect();
        if let Some(&j) = index.get(&neg) {
            if !consumed[j] {
                let c2 = &tightest[&neg];
                let sum = c + c2;
                if sum.is_negative() {
                    return false;
                }
                if sum.is_zero() {
                    consumed[i] = true;
                    consumed[j] = true;
                    let mut e = coeffs.clone();
                    e.push(c.clone());
                    match normalize_row(e, true) {
                        Err(()) => return false,
                        Ok(Some(e)) => {
                            if !eqs.contains(&e) {
                                eqs.push(e)
                            }
                        }
                        Ok(None) => {}
                    }
                    continue;
                }
            }
        }
        let mut r = coeffs.clone();
        r.push(c.clone());
        geqs.push(r);
    }
    debug_assert!(geqs.iter().all(|r| r.len() == n + 1));
    sys.eqs = eqs;
    sys.geqs = geqs;
    true
}

fn mod_hat(a: &BigInt, m: &BigInt) -> BigInt {
    // a - m * floor(a/m + 1/2)
    let two = BigInt::from(2);
    a - m * (&two * a + m).div_floor(&(&two * m))
}

/// Substitutes `x_var = expr` (expr is a row over the same columns, with a zero
/// coefficient at `var`) into `row` and removes column `var`.
fn substitute_row(row: &mut Row, var: usize, expr: &Row) {
    let c = row[var].clone();
    if !c.is_zero() {
        for (x, e) in row.iter_mut().zip(expr.iter()) {
            *x += &c * e;
        }
    }
    row.remove(var);
}

/// Eliminates one equality from the system. Returns the index of the variable
/// that was removed, or `None` if a fresh variable had to be introduced first
/// (in which case the variable count is unchanged and the loop continues).
fn eliminate_equality(sys: &mut System) {
    let n = sys.nvars;
    // Pick the equality/variable pair with the smallest coefficient magnitude.
    let (ei, k) = {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for (ei, r) in sys.eqs.iter().enumerate() {
            for (k, c) in r[..n].iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = c.abs();
                if best.as_ref().is_none_or(|b| m < b.2) {
                    best = Some((ei, k, m));
                }
            }
        }
        let (ei, k, _) = best.expect("equality has a nonzero coefficient");
        (ei, k)
    };
    let a = sys.eqs[ei][k].clone();
    if a.abs().is_one() {
        let eq = sys.eqs.swap_remove(ei);
        // a*x_k + rest = 0  =>  x_k = -rest / a = -a * rest (a = ±1)
        let mut expr: Row = eq.iter().map(|c| -(&a * c)).collect();
        expr[k] = BigInt::zero();
        for r in sys.eqs.iter_mut().chain(sys.geqs.iter_mut()) {
            substitute_row(r, k, &expr);
        }
        sys.nvars -= 1;
        return;
    }
    // No unit coefficient: introduce sigma with m*sigma = sum mod_hat(a_i) x_i + mod_hat(c).
    let m = a.abs() + BigInt::one();
    let s = if a.is_negative() { -BigInt::one() } else { BigInt::one() };
    let eq = sys.eqs[ei].clone();
    for r in sys.eqs.iter_mut().chain(sys.geqs.iter_mut()) {
        r.insert(n, BigInt::zero());
    }
    // x_k = -s*m*sigma + s*sum_{i != k} mh(a_i) x_i + s*mh(c)
    let mut expr: Row = vec![BigInt::zero(); n + 2];
    for i in 0..n {
        if i != k {
            expr[i] = &s * mod_hat(&eq[i], &m);
        }
    }
    expr[n] = -(&s * &m);
    expr[n + 1] = &s * mod_hat(&eq[n], &m);
    for r in sys.eqs.iter_mut().chain(sys.geqs.iter_mut()) {
        substitute_row(r, k, &expr);
    }
    // column k removed, sigma added: the count is unchanged.
}

/// Fourier–Motzkin combination of the bounds on `var`. With `dark`, each
/// combined row is tightened by `(a-1)(b-1)`.
fn combine(geqs: &[Row], var: usize, dark: bool) -> Result<Vec<Row>, IntSetError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut rest = Vec::new();
    for r in geqs {
        let c = &r[var];
        if c.is_positive() {
            lower.push(r);
        } else if c.is_negative() {
            upper.push(r);
        } else {
            let mut r = r.clone();
            r.remove(var);
            rest.push(r);
        }
    }
    if rest.len() + lower.len() * upper.len() > MAX_WORKING_ROWS {
        return Err(IntSetError::DimensionLimit {
            what: "constraints generated during elimination",
            limit: MAX_WORKING_ROWS,
        });
    }
    for l in &lower {
        let b = &l[var];
        for u in &upper {
            let a = -&u[var];
            let mut row: Row = l.iter().zip(u.iter()).map(|(lx, ux)| &a * lx + b * ux).collect();
            debug_assert!(row[var].is_zero());
            row.remove(var);
            if dark {
                let last = row.len() - 1;
                row[last] -= (&a - 1) * (b - 1);
            }
            rest.push(row);
        }
    }
    Ok(rest)
}

/// Decides whether the system has an integer solution.
pub(crate) fn satisfiable(sys: System) -> Result<bool, IntSetError> {
    solve(sys, 0)
}

fn solve(mut sys: System, depth: usize) -> Result<bool, IntSetError> {
    if depth > MAX_SPLINTER_DEPTH {
        return Err(IntSetError::DimensionLimit {
            what: "splinter depth",
            limit: MAX_SPLINTER_DEPTH,
        });
    }
    loop {
        if !normalize(&mut sys) {
            return Ok(false);
        }
        if !sys.eqs.is_empty() {
            eliminate_equality(&mut sys);
            continue;
        }
        if sys.geqs.is_empty() {
            return Ok(true);
        }
        let n = sys.nvars;
        let mut lower = vec![0usize; n];
        let mut upper = vec![0usize; n];
        let mut unit_lower = vec![true; n];
        let mut unit_upper = vec![true; n];
        for r in &sys.geqs {
            for v in 0..n {
                let c = &r[v];
                if c.is_positive() {
                    lower[v] += 1;
                    unit_lower[v] &= c.is_one();
                } else if c.is_negative() {
                    upper[v] += 1;
                    unit_upper[v] &= (-c).is_one();
                }
            }
        }
        // A variable bounded on one side only can always be pushed far enough.
        if let Some(v) = (0..n).find(|&v| (lower[v] > 0) != (upper[v] > 0)) {
            sys.geqs.retain(|r| r[v].is_zero());
            continue;
        }
        let candidates: Vec<usize> = (0..n).filter(|&v| lower[v] > 0 && upper[v] > 0).collect();
        debug_assert!(!candidates.is_empty());
        let cost = |v: usize| lower[v] * upper[v];
        let exact = candidates
            .iter()
            .copied()
            .filter(|&v| unit_lower[v] || unit_upper[v])
            .min_by_key(|&v| cost(v));
        if let Some(v) = exact {
            sys.geqs = combine(&sys.geqs, v, false)?;
            sys.nvars -= 1;
            continue;
        }
        let v = candidates.into_iter().min_by_key(|&v| cost(v)).expect("candidate");
        let real = System {
            nvars: n - 1,
            eqs: Vec::new(),
            geqs: combine(&sys.geqs, v, false)?,
        };
        if !solve(real, depth + 1)? {
            return Ok(false);
        }
        let dark = System {
            nvars: n - 1,
            eqs: Vec::new(),
            geqs: combine(&sys.geqs, v, true)?,
        };
        if solve(dark, depth + 1)? {
            return Ok(true);
        }
        let a_max = sys
            .geqs
            .iter()
            .filter(|r| r[v].is_negative())
            .map(|r| -&r[v])
            .max()
            .expect("upper bound exists");
        for l in sys.geqs.iter().filter(|r| r[v].is_positive()) {
            let b = &l[v];
            let top = (&a_max * b - &a_max - b).div_floor(&a_max);
            let mut i = BigInt::zero();
            while i <= top {
                let mut sub = sys.clone();
                let mut eq = l.clone();
                let last = eq.len() - 1;
                eq[last] -= &i;
                sub.eqs.push(eq);
                if solve(sub, depth + 1)? {
                    return Ok(true);
                }
                i += 1;
            }
        }
        return Ok(false);
    }
}

/// Rational Fourier–Motzkin projection: eliminates `var` from the inequalities
/// (equalities must already be split or substituted by the caller).
pub(crate) fn eliminate_rational(geqs: &[Row], var: usize) -> Result<Vec<Row>, IntSetError> {
    combine(geqs, var, false)
}

/// Splits equalities into opposite inequality pairs.
pub(crate) fn as_inequalities(sys: &System) -> Vec<Row> {
    let mut out = sys.geqs.clone();
    for e in &sys.eqs {
        out.push(e.clone());
        out.push(e.iter().map(|c| -c).collect());
    }
    out
}

/// Rational bounds `[lo, hi]` (rounded inward to integers) of variable `var`
/// over the real relaxation of the system. `None` on a side means unbounded;
/// an `Err(())`-like empty range is reported as `lo > hi`.
pub(crate) fn integer_range(
    sys: &System,
    var: usize,
) -> Result<(Option<BigInt>, Option<BigInt>), IntSetError> {
    let mut rows = as_inequalities(sys);
    let mut nvars = sys.nvars;
    let mut target = var;
    while nvars > 1 {
        // Eliminate the cheapest variable other than the target.
        let mut best: Option<(usize, usize)> = None;
        for v in (0..nvars).filter(|&v| v != target) {
            let (mut lo, mut hi) = (0usize, 0usize);
            for r in &rows {
                if r[v].is_positive() {
                    lo += 1;
                } else if r[v].is_negative() {
                    hi += 1;
                }
            }
            let c = lo * hi;
            if best.is_none_or(|b| c < b.1) {
                best = Some((v, c));
            }
        }
        let (v, _) = best.expect("another variable exists");
        rows = eliminate_rational(&rows, v)?;
        let mut tmp = System { nvars: nvars - 1, eqs: Vec::new(), geqs: rows };
        if !normalize_rational(&mut tmp) {
            return Ok((Some(BigInt::one()), Some(BigInt::zero())));
        }
        rows = tmp.geqs;
        nvars -= 1;
        if v < target {
            target -= 1;
        }
    }
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for r in &rows {
        let (a, c) = (&r[0], &r[1]);
        if a.is_positive() {
            // a x + c >= 0 -> x >= ceil(-c / a)
            let b = (-c).div_ceil(a);
            if lo.as_ref().is_none_or(|l| &b > l) {
                lo = Some(b);
            }
        } else if a.is_negative() {
            // x <= floor(c / -a)
            let b = c.div_floor(&(-a));
            if hi.as_ref().is_none_or(|h| &b < h) {
                hi = Some(b);
            }
        } else if c.is_negative() {
            return Ok((Some(BigInt::one()), Some(BigInt::zero())));
        }
    }
    Ok((lo, hi))
}

/// Row cleanup that is valid over the rationals (no integer tightening).
fn normalize_rational(sys: &mut System) -> bool {
    let n = sys.nvars;
    let mut out = Vec::with_capacity(sys.geqs.len());
    for mut r in sys.geqs.drain(..) {
        let g = gcd_of(&r);
        if gcd_of(&r[..n]).is_zero() {
            if r[n].is_negative() {
                return false;
            }
            continue;
        }
        if !g.is_one() {
            for x in r.iter_mut() {
                *x = &*x / &g;
            }
        }
        if !out.contains(&r) {
            out.push(r);
        }
    }
    sys.geqs = out;
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[i64]) -> Row {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn sys(nvars: usize, eqs: &[&[i64]], geqs: &[&[i64]]) -> System {
        System {
            nvars,
            eqs: eqs.iter().map(|r| row(r)).collect(),
            geqs: geqs.iter().map(|r| row(r)).collect(),
        }
    }

    #[test]
    fn contradictory_bounds() {
        // i >= 0, -i - 1 >= 0
        assert!(!satisfiable(sys(1, &[], &[&[1, 0], &[-1, -1]])).unwrap());
    }

    #[test]
    fn parity_infeasible() {
        // 2i - 1 = 0, 0 <= i <= 10
        assert!(!satisfiable(sys(1, &[&[2, -1]], &[&[1, 0], &[-1, 10]])).unwrap());
    }

    #[test]
    fn thin_unbounded_slab_is_empty() {
        // 1 <= 3x - 3y <= 2 has no integer point although it is unbounded.
        assert!(!satisfiable(sys(2, &[], &[&[3, -3, -1], &[-3, 3, 2]])).unwrap());
    }

    #[test]
    fn needs_splintering() {
        // Classic Omega example: 27 <= 11x + 13y <= 45, -10 <= 7x - 9y <= 4
        let s = sys(
            2,
            &[],
            &[&[11, 13, -27], &[-11, -13, 45], &[7, -9, 10], &[-7, 9, 4]],
        );
        assert!(!satisfiable(s).unwrap());
        // Widening the first band admits (x, y) = (2, 2): 11*2 + 13*2 = 48.
        let s = sys(
            2,
            &[],
            &[&[11, 13, -27], &[-11, -13, 50], &[7, -9, 10], &[-7, 9, 4]],
        );
        assert!(satisfiable(s).unwrap());
    }

    #[test]
    fn non_unit_equalities() {
        // 3x + 5y = 1 with 0 <= x, y <= 10: (2, -1) is outside, (7, -4) too.
        // Solutions x = 2 + 5t, y = -1 - 3t; none with y >= 0 and x >= 0.
        let s = sys(2, &[&[3, 5, -1]], &[&[1, 0, 0], &[0, 1, 0], &[-1, 0, 10], &[0, -1, 10]]);
        assert!(!satisfiable(s).unwrap());
        // 3x + 5y = 16: (2, 2)
        let s = sys(2, &[&[3, 5, -16]], &[&[1, 0, 0], &[0, 1, 0], &[-1, 0, 10], &[0, -1, 10]]);
        assert!(satisfiable(s).unwrap());
    }

    #[test]
    fn range_of_variable() {
        // 0 <= i <= 5, j = i + 1 -> j in [1, 6]
        let s = sys(2, &[&[1, -1, 1]], &[&[1, 0, 0], &[-1, 0, 5]]);
        let (lo, hi) = integer_range(&s, 1).unwrap();
        assert_eq!(lo, Some(BigInt::from(1)));
        assert_eq!(hi, Some(BigInt::from(6)));
        let (lo, hi) = integer_range(&sys(1, &[], &[&[1, -2]]), 0).unwrap();
        assert_eq!(lo, Some(BigInt::from(2)));
        assert_eq!(hi, None);
    }

    #[test]
    fn mod_hat_values() {
        let m = BigInt::from(4);
        assert_eq!(mod_hat(&BigInt::from(3), &m), BigInt::from(-1));
        assert_eq!(mod_hat(&BigInt::from(-3), &m), BigInt::from(1));
        assert_eq!(mod_hat(&BigInt::from(2), &m), BigInt::from(-2));
        assert_eq!(mod_hat(&BigInt::from(5), &m), BigInt::from(1));
    }
}
