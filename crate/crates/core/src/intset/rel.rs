use super::affine::{AffineExpr, Constraint};
use super::set::{IntSet, ParamBox};
use super::IntSetError;

/// A relation between integer tuples, stored as a set over
/// `source dims ++ target dims`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRel {
    pub(crate) set: IntSet,
    pub(crate) n_in: usize,
    pub(crate) src_name: Option<String>,
    pub(crate) dst_name: Option<String>,
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

impl IntRel {
    pub fn from_constraints(
        src: &[&str],
        dst: &[&str],
        params: &[&str],
        constraints: &[Constraint],
    ) -> Result<Self, IntSetError> {
        Self::with_locals(src, dst, params, &[], constraints)
    }

    pub fn with_locals(
        src: &[&str],
        dst: &[&str],
        params: &[&str],
        locals: &[&str],
        constraints: &[Constraint],
    ) -> Result<Self, IntSetError> {
        let dims: Vec<&str> = src.iter().chain(dst.iter()).copied().collect();
        let set = IntSet::with_locals(&dims, params, locals, constraints)?;
        Ok(IntRel {
            set,
            n_in: src.len(),
            src_name: None,
            dst_name: None,
        })
    }

    /// Wraps a set over `source ++ target` dims.
    pub fn from_set(set: IntSet, n_in: usize) -> Result<Self, IntSetError> {
        if n_in > set.dims.len() {
            return Err(IntSetError::ArityMismatch {
                expected: set.dims.len(),
                found: n_in,
            });
        }
        Ok(IntRel {
            set,
            n_in,
            src_name: None,
            dst_name: None,
        })
    }

    pub fn empty(src: &[&str], dst: &[&str], params: &[&str]) -> Result<Self, IntSetError> {
        let mut r = Self::from_constraints(src, dst, params, &[])?;
        r.set.pieces.clear();
        Ok(r)
    }

    /// `{ s -> t : s_1 = t_1, ..., s_{k-1} = t_{k-1}, s_k < t_k }` with
    /// generated names `s1.. / t1..`; `level` is 1-based.
    pub fn lex_less(arity: usize, level: usize) -> Self {
        let src: Vec<String> = (1..=arity).map(|i| format!("s{i}")).collect();
        let dst: Vec<String> = (1..=arity).map(|i| format!("t{i}")).collect();
        Self::lex_less_named(&strs(&src), &strs(&dst), level).expect("generated names are distinct")
    }

    pub fn lex_less_named(src: &[&str], dst: &[&str], level: usize) -> Result<Self, IntSetError> {
        if src.len() != dst.len() || level == 0 || level > src.len() {
            return Err(IntSetError::ArityMismatch {
                expected: src.len(),
                found: level.max(dst.len()),
            });
        }
        let mut cs = Vec::new();
        for k in 0..level - 1 {
            cs.push(Constraint::eq(AffineExpr::var(src[k]), AffineExpr::var(dst[k])));
        }
        cs.push(Constraint::lt(
            AffineExpr::var(src[level - 1]),
            AffineExpr::var(dst[level - 1]),
        ));
        Self::from_constraints(src, dst, &[], &cs)
    }

    pub fn named(mut self, src: impl Into<String>, dst: impl Into<String>) -> Self {
        self.src_name = Some(src.into());
        self.dst_name = Some(dst.into());
        self
    }

    pub fn src_dims(&self) -> &[String] {
        &self.set.dims[..self.n_in]
    }

    pub fn dst_dims(&self) -> &[String] {
        &self.set.dims[self.n_in..]
    }

    pub fn params(&self) -> &[String] {
        &self.set.params
    }

    pub fn as_set(&self) -> &IntSet {
        &self.set
    }

    pub fn n_pieces(&self) -> usize {
        self.set.n_pieces()
    }

    fn same_shape(&self, other: &IntRel) -> Result<(), IntSetError> {
        if self.n_in != other.n_in || self.set.dims.len() != other.set.dims.len() {
            return Err(IntSetError::ArityMismatch {
                expected: self.set.dims.len(),
                found: other.set.dims.len(),
            });
        }
        Ok(())
    }

    fn with_set(&self, set: IntSet) -> IntRel {
        IntRel {
            set,
            n_in: self.n_in,
            src_name: self.src_name.clone(),
            dst_name: self.dst_name.clone(),
        }
    }

    pub fn intersect(&self, other: &IntRel) -> Result<IntRel, IntSetError> {
        self.same_shape(other)?;
        Ok(self.with_set(self.set.intersect(&other.set)?))
    }

    pub fn union(&self, other: &IntRel) -> Result<IntRel, IntSetError> {
        self.same_shape(other)?;
        Ok(self.with_set(self.set.union(&other.set)?))
    }

    /// Adds constraints over source dims, target dims and params.
    pub fn constrain(&self, constraints: &[Constraint]) -> Result<IntRel, IntSetError> {
        Ok(self.with_set(self.set.constrain(constraints)?))
    }

    /// Drops redundant constraints and empty pieces.
    pub fn simplify(&self) -> Result<IntRel, IntSetError> {
        Ok(IntRel {
            set: self.set.simplify()?,
            ..self.clone()
        })
    }

    pub fn is_empty(&self) -> Result<bool, IntSetError> {
        self.set.is_empty()
    }

    pub fn is_empty_int(&self, params: Option<&ParamBox>) -> Result<bool, IntSetError> {
        self.set.is_empty_int(params)
    }

    pub fn contains(&self, src: &[i64], dst: &[i64], params: &[i64]) -> Result<bool, IntSetError> {
        let pt: Vec<i64> = src.iter().chain(dst.iter()).copied().collect();
        self.set.contains(&pt, params)
    }

    /// All pairs for concrete parameter values.
    pub fn enumerate(
        &self,
        params: &[i64],
        cap: usize,
    ) -> Result<Vec<(Vec<i64>, Vec<i64>)>, IntSetError> {
        Ok(self
            .set
            .enumerate(params, cap)?
            .into_iter()
            .map(|mut p| {
                let t = p.split_off(self.n_in);
                (p, t)
            })
            .collect())
    }

    pub fn fix_params(&self, values: &[(&str, i64)]) -> IntRel {
        self.with_set(self.set.fix_params(values))
    }

    pub fn inverse(&self) -> IntRel {
        let n_out = self.set.dims.len() - self.n_in;
        let dims: Vec<String> = self.dst_dims().iter().chain(self.src_dims()).cloned().collect();
        let map: Vec<usize> = (0..self.set.dims.len())
            .map(|k| if k < self.n_in { n_out + k } else { k - self.n_in })
            .collect();
        IntRel {
            set: self.set.embed(dims, &map),
            n_in: n_out,
            src_name: self.dst_name.clone(),
            dst_name: self.src_name.clone(),
        }
    }

    fn lift(&self, set: &IntSet, offset: usize, len: usize) -> Result<IntSet, IntSetError> {
        if set.dims.len() != len {
            return Err(IntSetError::ArityMismatch {
                expected: len,
                found: set.dims.len(),
            });
        }
        let map: Vec<usize> = (offset..offset + len).collect();
        Ok(set.embed(self.set.dims.clone(), &map))
    }

    pub fn intersect_domain(&self, dom: &IntSet) -> Result<IntRel, IntSetError> {
        let lifted = self.lift(dom, 0, self.n_in)?;
        Ok(self.with_set(self.set.intersect(&lifted)?))
    }

    pub fn intersect_range(&self, ran: &IntSet) -> Result<IntRel, IntSetError> {
        let n_out = self.set.dims.len() - self.n_in;
        let lifted = self.lift(ran, self.n_in, n_out)?;
        Ok(self.with_set(self.set.intersect(&lifted)?))
    }

    pub fn domain(&self) -> Result<IntSet, IntSetError> {
        let keep = strs(&self.set.dims[..self.n_in]);
        let mut s = self.set.project_onto(&keep)?;
        s.name = self.src_name.clone();
        Ok(s)
    }

    pub fn range(&self) -> Result<IntSet, IntSetError> {
        let keep = strs(&self.set.dims[self.n_in..]);
        let mut s = self.set.project_onto(&keep)?;
        s.name = self.dst_name.clone();
        Ok(s)
    }

    /// Image of `dom` under the relation.
    pub fn apply(&self, dom: &IntSet) -> Result<IntSet, IntSetError> {
        self.intersect_domain(dom)?.range()
    }

    /// `{ a -> c : exists b. a -> b in self and b -> c in next }`.
    pub fn compose(&self, next: &IntRel) -> Result<IntRel, IntSetError> {
        let nb = self.set.dims.len() - self.n_in;
        if nb != next.n_in {
            return Err(IntSetError::ArityMismatch {
                expected: nb,
                found: next.n_in,
            });
        }
        let na = self.n_in;
        let nc = next.set.dims.len() - next.n_in;
        let mut dims: Vec<String> = self.src_dims().to_vec();
        let taken = |n: &str| self.set.dims.iter().chain(next.set.dims.iter()).any(|d| d == n);
        for k in 0..nb {
            let mut name = format!("m{k}");
            while taken(&name) {
                name.insert(0, '_');
            }
            dims.push(name);
        }
        dims.extend(next.dst_dims().iter().cloned());
        let left = self.set.embed(dims.clone(), &(0..na + nb).collect::<Vec<_>>());
        let right = next.set.embed(dims.clone(), &(na..na + nb + nc).collect::<Vec<_>>());
        let both = left.intersect(&right)?;
        let keep: Vec<&str> = dims[..na]
            .iter()
            .chain(dims[na + nb..].iter())
            .map(String::as_str)
            .collect();
        for (i, n) in keep.iter().enumerate() {
            if keep[..i].contains(n) {
                return Err(IntSetError::DuplicateName(n.to_string()));
            }
        }
        Ok(IntRel {
            set: both.project_onto(&keep)?,
            n_in: na,
            src_name: self.src_name.clone(),
            dst_name: next.dst_name.clone(),
        })
    }

    /// `{ t - s : (s, t) in self }` over dims named `d<src dim>`.
    pub fn deltas(&self) -> Result<IntSet, IntSetError> {
        let names: Vec<String> = self.src_dims().iter().map(|d| format!("d{d}")).collect();
        self.deltas_named(&strs(&names))
    }

    pub fn deltas_named(&self, names: &[&str]) -> Result<IntSet, IntSetError> {
        let n = self.n_in;
        if self.set.dims.len() != 2 * n {
            return Err(IntSetError::ArityMismatch {
                expected: n,
                found: self.set.dims.len() - n,
            });
        }
        if names.len() != n {
            return Err(IntSetError::ArityMismatch {
                expected: n,
                found: names.len(),
            });
        }
        let mut dims = self.set.dims.clone();
        for d in names {
            if dims.iter().any(|x| x == d) || self.set.params.iter().any(|x| x == d) {
                return Err(IntSetError::DuplicateName(d.to_string()));
            }
            dims.push(d.to_string());
        }
        let wide = self.set.embed(dims.clone(), &(0..2 * n).collect::<Vec<_>>());
        let eqs: Vec<Constraint> = (0..n)
            .map(|k| {
                Constraint::eq(
                    AffineExpr::var(names[k]),
                    AffineExpr::var(dims[n + k].as_str()) - AffineExpr::var(dims[k].as_str()),
                )
            })
            .collect();
        wide.constrain(&eqs)?.project_onto(names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AffineExpr as E;

    fn v(n: &str) -> E {
        E::var(n)
    }
    fn c(k: i64) -> E {
        E::constant(k)
    }

    #[test]
    fn lex_less_union_is_lexicographic_order() {
        let r = IntRel::lex_less(2, 1).union(&IntRel::lex_less(2, 2)).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for x in 0..4 {
                    for y in 0..4 {
                        let want = (a, b) < (x, y);
                        assert_eq!(r.contains(&[a, b], &[x, y], &[]).unwrap(), want);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_deltas_are_zero() {
        let r = IntRel::from_constraints(
            &["i"],
            &["i2"],
            &["n"],
            &[
                Constraint::eq(v("i2"), v("i")),
                Constraint::ge(v("i"), c(0)),
                Constraint::lt(v("i"), v("n")),
            ],
        )
        .unwrap();
        let d = r.deltas().unwrap();
        assert_eq!(d.dims(), ["di"]);
        assert!(d.contains(&[0], &[5]).unwrap());
        assert!(!d.contains(&[1], &[5]).unwrap());
    }

    #[test]
    fn empty_relation_has_empty_deltas() {
        let r = IntRel::empty(&["i"], &["j"], &[]).unwrap();
        assert!(r.deltas().unwrap().is_empty().unwrap());
    }

    #[test]
    fn inverse_swaps_pairs() {
        let r = IntRel::from_constraints(
            &["i"],
            &["j"],
            &[],
            &[
                Constraint::eq(v("j"), v("i") + c(1)),
                Constraint::ge(v("i"), c(0)),
                Constraint::le(v("i"), c(2)),
            ],
        )
        .unwrap();
        let inv = r.inverse();
        assert!(inv.contains(&[1], &[0], &[]).unwrap());
        assert!(!inv.contains(&[0], &[1], &[]).unwrap());
        assert_eq!(inv.deltas().unwrap().enumerate(&[], 10).unwrap(), vec![vec![-1]]);
    }

    #[test]
    fn compose_access_with_inverse_finds_shared_cells() {
        // S0[i, j] -> M[i, j - 1] composed with the inverse of S0[i, j] -> M[i, j]
        let dom = [
            Constraint::ge(v("i"), c(0)),
            Constraint::le(v("i"), c(6)),
            Constraint::ge(v("j"), c(1)),
            Constraint::le(v("j"), c(6)),
        ];
        let read = IntRel::from_constraints(
            &["i", "j"],
            &["a", "b"],
            &[],
            &[&dom[..], &[Constraint::eq(v("a"), v("i")), Constraint::eq(v("b"), v("j") - c(1))]].concat(),
        )
        .unwrap();
        let write = IntRel::from_constraints(
            &["i", "j"],
            &["a", "b"],
            &[],
            &[&dom[..], &[Constraint::eq(v("a"), v("i")), Constraint::eq(v("b"), v("j"))]].concat(),
        )
        .unwrap();
        // Target names must differ from the read's source names.
        assert!(matches!(
            read.compose(&write.inverse()),
            Err(IntSetError::DuplicateName(_))
        ));
        let write = IntRel::from_set(write.as_set().clone().with_dim_names(&["p", "q", "a", "b"]).unwrap(), 2).unwrap();
        let same = read.compose(&write.inverse()).unwrap();
        assert!(!same.is_empty().unwrap());
        assert!(same.contains(&[3, 4], &[3, 3], &[]).unwrap());
        assert!(!same.contains(&[3, 1], &[3, 0], &[]).unwrap());
    }

    #[test]
    fn domain_and_range() {
        let r = IntRel::from_constraints(
            &["i"],
            &["j"],
            &[],
            &[
                Constraint::eq(v("j"), v("i") * 2),
                Constraint::ge(v("i"), c(0)),
                Constraint::le(v("i"), c(2)),
            ],
        )
        .unwrap();
        assert_eq!(r.domain().unwrap().enumerate(&[], 10).unwrap(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(r.range().unwrap().enumerate(&[], 10).unwrap(), vec![vec![0], vec![2], vec![4]]);
    }
}
