use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::affine::write_linear;
use super::omega::Row;
use super::rel::IntRel;
use super::set::{simplify_piece, IntSet, Piece};

struct Linear<'a> {
    terms: Vec<(&'a str, BigInt)>,
    constant: BigInt,
}

impl fmt::Display for Linear<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(f, self.terms.iter().map(|(n, c)| (*n, c.clone())), &self.constant)
    }
}

/// `row` without column `skip`, scaled by `k`.
fn linear<'a>(row: &Row, names: &[&'a str], skip: Option<usize>, k: &BigInt) -> Linear<'a> {
    let terms = names
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, n)| (*n, &row[i] * k))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Linear {
        terms,
        constant: &row[row.len() - 1] * k,
    }
}

/// Splits `row (op) 0` into `positive side (op) negative side`.
fn balanced<'a>(row: &Row, names: &[&'a str]) -> (Linear<'a>, Linear<'a>) {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (i, n) in names.iter().enumerate() {
        let c = &row[i];
        if c.is_positive() {
            lhs.push((*n, c.clone()));
        } else if c.is_negative() {
            rhs.push((*n, -c));
        }
    }
    let k = &row[row.len() - 1];
    let (lc, rc) = if k.is_negative() {
        (BigInt::zero(), -k)
    } else {
        (k.clone(), BigInt::zero())
    };
    (
        Linear { terms: lhs, constant: lc },
        Linear { terms: rhs, constant: rc },
    )
}

/// Column preference when choosing which variable a constraint bounds:
/// dims first, then locals, then params.
fn pivot(row: &Row, order: &[usize]) -> Option<usize> {
    order.iter().copied().find(|&i| row[i].abs().is_one())
}

fn local_names(taken: &[&str], n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while out.len() < n {
        let mut name = format!("e{k}");
        while taken.contains(&name.as_str()) {
            name.insert(0, '_');
        }
        out.push(name);
        k += 1;
    }
    out
}

/// Writes the constraint list of one piece. Equalities in `skip_eqs` are
/// omitted (already shown in the tuple).
fn write_piece(
    f: &mut fmt::Formatter<'_>,
    piece: &Piece,
    names: &[&str],
    n_dims: usize,
    skip_eqs: &[usize],
) -> fmt::Result {
    let n_free = names.len() - piece.n_local;
    let order: Vec<usize> = (0..n_dims)
        .chain(n_free..names.len())
        .chain(n_dims..n_free)
        .collect();
    let mut parts: Vec<String> = Vec::new();
    for (ei, row) in piece.eqs.iter().enumerate() {
        if skip_eqs.contains(&ei) {
            continue;
        }
        match pivot(row, &order) {
            Some(p) => {
                let k = -&row[p];
                parts.push(format!("{} = {}", names[p], linear(row, names, Some(p), &k)));
            }
            None => {
                let (l, r) = balanced(row, names);
                parts.push(format!("{l} = {r}"));
            }
        }
    }
    // Pair each lower bound with the next unused upper bound on the same var.
    let mut geqs: Vec<&Row> = piece.geqs.iter().collect();
    geqs.sort_by_key(|r| pivot(r, &order).and_then(|p| order.iter().position(|&o| o == p)).unwrap_or(usize::MAX));
    let mut used = vec![false; geqs.len()];
    let pivots: Vec<Option<usize>> = geqs.iter().map(|r| pivot(r, &order)).collect();
    for i in 0..geqs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let row = geqs[i];
        let Some(p) = pivots[i] else {
            let (l, r) = balanced(row, names);
            parts.push(format!("{l} >= {r}"));
            continue;
        };
        let lower = row[p].is_positive();
        let partner = (i + 1..geqs.len())
            .find(|&j| !used[j] && pivots[j] == Some(p) && geqs[j][p].is_positive() != lower);
        let bound = |r: &Row| {
            let k = if r[p].is_positive() { -BigInt::one() } else { BigInt::one() };
            linear(r, names, Some(p), &k).to_string()
        };
        match partner {
            Some(j) => {
                used[j] = true;
                let (lo, hi) = if lower { (row, geqs[j]) } else { (geqs[j], row) };
                parts.push(format!("{} <= {} <= {}", bound(lo), names[p], bound(hi)));
            }
            None if lower => parts.push(format!("{} >= {}", names[p], bound(row))),
            None => parts.push(format!("{} <= {}", names[p], bound(row))),
        }
    }
    if parts.is_empty() {
        parts.push("true".into());
    }
    let body = parts.join(" and ");
    if piece.n_local > 0 {
        write!(f, "exists {} : {body}", names[n_free..].join(", "))
    } else {
        f.write_str(&body)
    }
}

/// Removes the defining equalities `defs` and substitutes them into the
/// remaining constraints, so these mention only source dims and params.
fn substitute_defs(piece: &Piece, defs: &[usize], dst: std::ops::Range<usize>, n_free: usize) -> Piece {
    let mut eqs: Vec<Row> = Vec::new();
    let mut geqs = piece.geqs.clone();
    for (ei, r) in piece.eqs.iter().enumerate() {
        if !defs.contains(&ei) {
            eqs.push(r.clone());
        }
    }
    for &d in defs {
        let def = &piece.eqs[d];
        let Some(k) = dst.clone().find(|&k| def[k].abs().is_one()) else { continue };
        for r in eqs.iter_mut().chain(geqs.iter_mut()) {
            if !r[k].is_zero() {
                let m = &r[k] * &def[k];
                for (x, y) in r.iter_mut().zip(def) {
                    *x -= &m * y;
                }
            }
        }
    }
    let out = Piece {
        n_local: piece.n_local,
        eqs,
        geqs,
    };
    match simplify_piece(out.clone(), n_free) {
        Ok(Some(p)) => p,
        _ => out,
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, name: Option<&str>, items: &[String]) -> fmt::Result {
    write!(f, "{}[{}]", name.unwrap_or(""), items.join(", "))
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{ ")?;
        if self.pieces.is_empty() {
            write_tuple(f, self.name.as_deref(), &self.dims)?;
            return f.write_str(" : false }");
        }
        for (pi, piece) in self.pieces.iter().enumerate() {
            if pi > 0 {
                f.write_str("; ")?;
            }
            write_tuple(f, self.name.as_deref(), &self.dims)?;
            if piece.n_constraints() > 0 {
                let base: Vec<&str> = self.dims.iter().chain(&self.params).map(String::as_str).collect();
                let locals = local_names(&base, piece.n_local);
                let names: Vec<&str> = base.iter().copied().chain(locals.iter().map(String::as_str)).collect();
                f.write_str(" : ")?;
                write_piece(f, piece, &names, self.dims.len(), &[])?;
            }
        }
        f.write_str(" }")
    }
}

impl fmt::Display for IntRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = &self.set;
        let n_in = self.n_in;
        let n_dims = set.dims.len();
        let src = set.dims[..n_in].to_vec();
        f.write_str("{ ")?;
        if set.pieces.is_empty() {
            write_tuple(f, self.src_name.as_deref(), &src)?;
            f.write_str(" -> ")?;
            write_tuple(f, self.dst_name.as_deref(), &set.dims[n_in..])?;
            return f.write_str(" : false }");
        }
        for (pi, piece) in set.pieces.iter().enumerate() {
            if pi > 0 {
                f.write_str("; ")?;
            }
            let base: Vec<&str> = set.dims.iter().chain(&set.params).map(String::as_str).collect();
            let locals = local_names(&base, piece.n_local);
            let names: Vec<&str> = base.iter().copied().chain(locals.iter().map(String::as_str)).collect();
            // Show target dims as functions of source dims and params when an
            // equality defines them.
            let mut skip = Vec::new();
            let mut dst_items = Vec::new();
            for k in n_in..n_dims {
                let def = piece.eqs.iter().enumerate().find(|(ei, r)| {
                    !skip.contains(ei)
                        && r[k].abs().is_one()
                        && (n_in..n_dims).all(|o| o == k || r[o].is_zero())
                        && (set.n_free()..names.len()).all(|l| r[l].is_zero())
                });
                match def {
                    Some((ei, r)) => {
                        skip.push(ei);
                        let kk = -&r[k];
                        dst_items.push(linear(r, &names, Some(k), &kk).to_string());
                    }
                    None => dst_items.push(set.dims[k].clone()),
                }
            }
            write_tuple(f, self.src_name.as_deref(), &src)?;
            f.write_str(" -> ")?;
            write_tuple(f, self.dst_name.as_deref(), &dst_items)?;
            let rest = substitute_defs(piece, &skip, n_in..n_dims, set.n_free());
            if rest.n_constraints() > 0 {
                f.write_str(" : ")?;
                write_piece(f, &rest, &names, n_dims, &[])?;
            }
        }
        f.write_str(" }")
    }
}
