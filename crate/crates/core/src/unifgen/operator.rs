use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::FuncTable;
use crate::linalg::{vec_from_code, Mat, Subspace};
use crate::scalars::zn::{add_mod, mul_mod};
use crate::scalars::Field;

/// Upper bound on term pairs visited by one composition.
pub const COMPOSE_BUDGET: u64 = 1 << 30;

/// `I(f)(X) = Σ_M α_M f(M·X)` over square matrices `M ∈ F^{m×m}`.
///
/// Terms are kept sparse: `(code(M), α_M)` sorted by code, zero coefficients dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorOperator {
    pub field: Field,
    pub arity: usize,
    pub modulus: u64,
    pub rank_bound: usize,
    terms: Vec<(u64, u64)>,
}

impl MinorOperator {
    /// Consolidates `(code, coeff)` pairs and checks every surviving matrix
    /// against `rank_bound`.
    pub fn new(
        field: &Field,
        arity: usize,
        modulus: u64,
        rank_bound: usize,
        terms: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self> {
        let op = Self::from_parts_unchecked(field, arity, modulus, rank_bound, terms);
        if let Some(r) = op.max_rank().filter(|&r| r > rank_bound) {
            return Err(Error::RankMismatch(format!(
                "term of rank {r} above bound {rank_bound}"
            )));
        }
        Ok(op)
    }

    pub(crate) fn from_parts_unchecked(
        field: &Field,
        arity: usize,
        modulus: u64,
        rank_bound: usize,
        terms: impl IntoIterator<Item = (u64, u64)>,
    ) -> Self {
        let mut v: Vec<(u64, u64)> = terms.into_iter().map(|(c, a)| (c, a % modulus)).collect();
        v.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(u64, u64)> = Vec::with_capacity(v.len());
        for (c, a) in v {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 = add_mod(last.1, a, modulus),
                _ => out.push((c, a)),
            }
        }
        out.retain(|t| t.1 != 0);
        MinorOperator {
            field: field.clone(),
            arity,
            modulus,
            rank_bound,
            terms: out,
        }
    }

    pub fn zero(field: &Field, arity: usize, modulus: u64) -> Self {
        Self::from_parts_unchecked(field, arity, modulus, 0, [])
    }

    pub fn identity(field: &Field, arity: usize, modulus: u64) -> Self {
        let id = Mat::identity(field, arity).code();
        Self::from_parts_unchecked(field, arity, modulus, arity, [(id, 1)])
    }

    /// The one-term operator `{M: coeff}` with `rank_bound = rank(M)`.
    pub fn single(m: &Mat, coeff: u64, modulus: u64) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::ShapeMismatch(format!("{}x{} is not square", m.rows, m.cols)));
        }
        Ok(Self::from_parts_unchecked(&m.field, m.rows, modulus, m.rank(), [(m.code(), coeff)]))
    }

    pub fn from_matrices(
        field: &Field,
        arity: usize,
        modulus: u64,
        rank_bound: usize,
        terms: &[(Mat, u64)],
    ) -> Result<Self> {
        for (m, _) in terms {
            if m.shape() != (arity, arity) {
                return Err(Error::ShapeMismatch(format!(
                    "term {}x{} in an arity-{arity} operator",
                    m.rows, m.cols
                )));
            }
        }
        Self::new(field, arity, modulus, rank_bound, terms.iter().map(|(m, a)| (m.code(), *a)))
    }

    pub fn terms(&self) -> &[(u64, u64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, code: u64) -> u64 {
        self.terms
            .binary_search_by_key(&code, |t| t.0)
            .map_or(0, |i| self.terms[i].1)
    }

    pub fn matrix(&self, code: u64) -> Mat {
        Mat::from_code(&self.field, self.arity, self.arity, code)
    }

    pub fn matrices(&self) -> Vec<(Mat, u64)> {
        self.terms.iter().map(|&(c, a)| (self.matrix(c), a)).collect()
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.terms.par_iter().map(|&(c, _)| self.matrix(c).rank()).max()
    }

    fn same_signature(&self, other: &MinorOperator) -> Result<()> {
        if self.field != other.field || self.arity != other.arity || self.modulus != other.modulus {
            return Err(Error::SignatureMismatch(format!(
                "operators over GF({}) arity {} mod {} and GF({}) arity {} mod {}",
                self.field.q, self.arity, self.modulus, other.field.q, other.arity, other.modulus
            )));
        }
        Ok(())
    }

    /// Terms filtered by a predicate on the term matrix; rank bound kept.
    pub fn filter(&self, mut keep: impl FnMut(&Mat) -> bool) -> MinorOperator {
        let terms = self
            .terms
            .iter()
            .filter(|&&(c, _)| keep(&self.matrix(c)))
            .copied()
            .collect();
        MinorOperator {
            terms,
            ..self.clone()
        }
    }

    /// `{T·M·T⁻¹ : α_M}` for invertible `T`.
    pub fn conjugate(&self, t: &Mat) -> Result<MinorOperator> {
        let tinv = t.inverse().ok_or(Error::NotFullRank)?;
        if t.rows != self.arity {
            return Err(Error::ShapeMismatch(format!("conjugator {}x{}", t.rows, t.cols)));
        }
        let terms: Vec<(u64, u64)> = self
            .terms
            .iter()
            .map(|&(c, a)| (t.mul(&self.matrix(c)).mul(&tinv).code(), a))
            .collect();
        Ok(Self::from_parts_unchecked(
            &self.field,
            self.arity,
            self.modulus,
            self.rank_bound,
            terms,
        ))
    }
}

/// Row-wise products of square matrix codes by a fixed right factor.
///
/// A square `m×m` code splits into `m` row codes (base `q^m` digits). For a
/// fixed right factor `R` of shape `m×c`, `table[row] = code(row·R)` in base
/// `q^c`, so `code(M·R) = Σ_i table[row_i(M)]·(q^c)^{m-1-i}`.
pub(crate) struct RowTable {
    table: Vec<u64>,
    out_base: u64,
    m: usize,
}

impl RowTable {
    pub(crate) fn new(r: &Mat) -> Self {
        let f = &*r.field;
        let q = f.q;
        let m = r.rows;
        let c = r.cols;
        let table = (0..q.pow(m as u32) as u64)
            .map(|rc| {
                let row = vec_from_code(q, m, rc);
                let mut code = 0u64;
                for j in 0..c {
                    let mut s = 0u8;
                    for (i, &x) in row.iter().enumerate() {
                        if x != 0 {
                            s = f.add(s, f.mul(x, r.get(i, j)));
                        }
                    }
                    code = code * q as u64 + s as u64;
                }
                code
            })
            .collect();
        RowTable {
            table,
            out_base: (q as u64).pow(c as u32),
            m,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, rows: &[u32]) -> u64 {
        debug_assert_eq!(rows.len(), self.m);
        rows.iter()
            .fold(0u64, |acc, &r| acc * self.out_base + self.table[r as usize])
    }
}

/// Base-`q^m` row digits of a square code.
pub(crate) fn row_digits(code: u64, q: usize, m: usize) -> Vec<u32> {
    let base = (q as u64).pow(m as u32);
    let mut out = vec![0u32; m];
    let mut c = code;
    for d in out.iter_mut().rev() {
        *d = (c % base) as u32;
        c /= base;
    }
    out
}

impl MinorOperator {
    fn digit_rows(&self) -> Vec<Vec<u32>> {
        self.terms
            .iter()
            .map(|&(c, _)| row_digits(c, self.field.q, self.arity))
            .collect()
    }

    /// `Σ_M α_M e_{M·X}` as sorted `(code(M·X), coefficient)` pairs, zero
    /// coefficients dropped. `x` has `arity` rows.
    pub fn image_of(&self, x: &Mat) -> Vec<(u64, u64)> {
        let rows = self.digit_rows();
        self.image_with(&rows, x)
    }

    fn image_with(&self, rows: &[Vec<u32>], x: &Mat) -> Vec<(u64, u64)> {
        let table = RowTable::new(x);
        let mut v: Vec<(u64, u64)> = rows
            .iter()
            .zip(&self.terms)
            .map(|(r, &(_, a))| (table.apply(r), a))
            .collect();
        consolidate(&mut v, self.modulus);
        v
    }

    /// `(code(X), image)` for every `X ∈ F^{arity×k}` accepted by `select`,
    /// or only for the listed codes.
    pub fn images(
        &self,
        k: usize,
        codes: Option<&[u64]>,
        select: impl Fn(&Mat) -> bool + Sync,
    ) -> Vec<(u64, Vec<(u64, u64)>)> {
        let rows = self.digit_rows();
        let total = (self.field.q as u64).pow((self.arity * k) as u32);
        let all: Vec<u64>;
        let codes = match codes {
            Some(c) => c,
            None => {
                all = (0..total).collect();
                &all
            }
        };
        codes
            .par_iter()
            .filter(|&&c| c < total)
            .filter_map(|&c| {
                let x = Mat::from_code(&self.field, self.arity, k, c);
                select(&x).then(|| (c, self.image_with(&rows, &x)))
            })
            .collect()
    }
}

fn consolidate(v: &mut Vec<(u64, u64)>, n: u64) {
    v.sort_unstable_by_key(|t| t.0);
    let mut w = 0;
    for i in 0..v.len() {
        if w > 0 && v[w - 1].0 == v[i].0 {
            v[w - 1].1 = add_mod(v[w - 1].1, v[i].1, n);
        } else {
            v[w] = v[i];
            w += 1;
        }
    }
    v.truncate(w);
    v.retain(|t| t.1 != 0);
}

/// `I(f)(X) = Σ α_M f(M·X)`; coefficients act on each cyclic factor mod `d_j`.
pub fn op_apply(op: &MinorOperator, f: &FuncTable) -> Result<FuncTable> {
    if f.m != op.arity || f.field != op.field {
        return Err(Error::SignatureMismatch(format!(
            "arity-{} function for an arity-{} operator",
            f.m, op.arity
        )));
    }
    if !op.modulus.is_multiple_of(f.module.n) {
        return Err(Error::SignatureMismatch(format!(
            "module exponent {} does not divide operator modulus {}",
            f.module.n, op.modulus
        )));
    }
    let rows = op.digit_rows();
    let factors = &f.module.factors;
    let r = factors.len();
    let values: Vec<Vec<u64>> = (0..f.len())
        .into_par_iter()
        .map(|c| {
            let x = f.point(c);
            let table = RowTable::new(&x);
            let mut acc = vec![0u64; r];
            for (rw, &(_, a)) in rows.iter().zip(&op.terms) {
                let y = f.get(table.apply(rw) as usize);
                for j in 0..r {
                    acc[j] = add_mod(acc[j], mul_mod(a % factors[j], y[j], factors[j]), factors[j]);
                }
            }
            acc
        })
        .collect();
    let mut out = f.clone();
    out.values = values.concat();
    Ok(out)
}

/// `compose(I₂, I₁)`: applying the result equals applying `I₁` first, then `I₂`.
/// Terms `M·S` for `M` in `I₁` and `S` in `I₂` with coefficient `α_M·β_S`.
pub fn op_compose(i2: &MinorOperator, i1: &MinorOperator) -> Result<MinorOperator> {
    i2.same_signature(i1)?;
    let pairs = (i1.len() as u64).saturating_mul(i2.len() as u64);
    if pairs > COMPOSE_BUDGET {
        return Err(Error::BudgetExceeded(format!("{pairs} term products")));
    }
    let n = i1.modulus;
    let rows = i1.digit_rows();
    let acc = i2
        .terms
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<u64, u64>, &(s, b)| {
            let table = RowTable::new(&i2.matrix(s));
            for (rw, &(_, a)) in rows.iter().zip(&i1.terms) {
                let e = acc.entry(table.apply(rw)).or_insert(0);
                *e = add_mod(*e, mul_mod(a, b, n), n);
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (c, x) in b {
                let e = a.entry(c).or_insert(0);
                *e = add_mod(*e, x, n);
            }
            a
        });
    Ok(MinorOperator::from_parts_unchecked(
        &i1.field,
        i1.arity,
        n,
        i1.rank_bound.min(i2.rank_bound),
        acc,
    ))
}

pub fn op_add(a: &MinorOperator, b: &MinorOperator) -> Result<MinorOperator> {
    a.same_signature(b)?;
    Ok(MinorOperator::from_parts_unchecked(
        &a.field,
        a.arity,
        a.modulus,
        a.rank_bound.max(b.rank_bound),
        a.terms.iter().chain(&b.terms).copied(),
    ))
}

pub fn op_scale(a: &MinorOperator, c: u64) -> MinorOperator {
    let n = a.modulus;
    MinorOperator::from_parts_unchecked(
        &a.field,
        a.arity,
        n,
        a.rank_bound,
        a.terms.iter().map(|&(m, x)| (m, mul_mod(x, c % n, n))),
    )
}

pub fn op_sub(a: &MinorOperator, b: &MinorOperator) -> Result<MinorOperator> {
    op_add(a, &op_scale(b, b.modulus - 1))
}

/// What a certificate promises about `I(f)(X)`, as an identity on δ-functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    /// `I(f) = f` for every `f: (F^k)^m → Z/N`.
    FullLevel,
    /// `I(f)(X) = f(X)` whenever `rank(X) ≤ i`.
    RankAtMost(usize),
    /// `δ_{X0}(X) = Σ α_M δ_{X0}(M·X)` with `X0 = [Id_k; 0]`, arity `k+1`.
    Delta,
    /// For `f` supported on rank `≥ dim H`: `I(f)(X) = f(X)` if `C(X) = H`
    /// and `0` if `C(X) ≠ H`, at every `X` with `rank(X) ≤ dim H`.
    Fiber(Subspace),
    /// As `Fiber`, summed over all `H` of dimension `i`: picks out the rank-`i` locus.
    RankLocus(usize),
}

impl Scope {
    pub fn tag(&self) -> &'static str {
        match self {
            Scope::FullLevel => "full-level",
            Scope::RankAtMost(_) => "rank<=i",
            Scope::Delta => "delta",
            Scope::Fiber(_) => "J_H",
            Scope::RankLocus(_) => "J_n",
        }
    }
}

/// Codes of the points `X ∈ F^{arity×k}` where the scope contract fails.
pub fn verify_scope(op: &MinorOperator, k: usize, scope: &Scope) -> Vec<u64> {
    verify_scope_at(op, k, scope, None)
}

/// As `verify_scope`, restricted to the listed point codes when given.
pub fn verify_scope_at(op: &MinorOperator, k: usize, scope: &Scope, codes: Option<&[u64]>) -> Vec<u64> {
    let n = op.modulus;
    match scope {
        Scope::Delta => {
            let x0 = Mat::anchor(&op.field, op.arity, k).code();
            op.images(k, codes, |_| true)
                .into_iter()
                .filter(|(c, img)| {
                    let got = img.iter().find(|t| t.0 == x0).map_or(0, |t| t.1);
                    got != u64::from(*c == x0) % n
                })
                .map(|t| t.0)
                .collect()
        }
        Scope::FullLevel | Scope::RankAtMost(_) => {
            let bound = match scope {
                Scope::RankAtMost(i) => *i,
                _ => usize::MAX,
            };
            op.images(k, codes, |x| bound == usize::MAX || x.rank() <= bound)
                .into_iter()
                .filter(|(c, img)| !is_unit_at(img, *c, n))
                .map(|t| t.0)
                .collect()
        }
        Scope::Fiber(h) => {
            let i = h.dim();
            let field = op.field.clone();
            op.images(k, codes, |x| x.rank() <= i)
                .into_iter()
                .filter(|(c, img)| {
                    let x = Mat::from_code(&field, op.arity, k, *c);
                    let on_h = x.rank() == i && crate::linalg::colspace(&x) == *h;
                    let proj: Vec<(u64, u64)> = img
                        .iter()
                        .copied()
                        .filter(|&(y, _)| Mat::from_code(&field, op.arity, k, y).rank() >= i)
                        .collect();
                    if on_h {
                        !is_unit_at(&proj, *c, n)
                    } else {
                        !proj.is_empty()
                    }
                })
                .map(|t| t.0)
                .collect()
        }
        Scope::RankLocus(i) => {
            let field = op.field.clone();
            op.images(k, codes, |x| x.rank() <= *i)
                .into_iter()
                .filter(|(c, img)| {
                    let x = Mat::from_code(&field, op.arity, k, *c);
                    let proj: Vec<(u64, u64)> = img
                        .iter()
                        .copied()
                        .filter(|&(y, _)| Mat::from_code(&field, op.arity, k, y).rank() >= *i)
                        .collect();
                    if x.rank() == *i {
                        !is_unit_at(&proj, *c, n)
                    } else {
                        !proj.is_empty()
                    }
                })
                .map(|t| t.0)
                .collect()
        }
    }
}

fn is_unit_at(img: &[(u64, u64)], c: u64, n: u64) -> bool {
    if n == 1 {
        return img.is_empty();
    }
    img.len() == 1 && img[0] == (c, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{delta, ModuleSpec};
    use crate::linalg::{enumerate, RankFilter};
    use crate::scalars::field_make;

    fn gf2() -> Field {
        field_make(2, 1).unwrap()
    }

    #[test]
    fn identity_and_zero_apply() {
        let f = gf2();
        let b = ModuleSpec::cyclic(3).unwrap();
        let g = FuncTable::from_fn(&f, 1, 2, &b, |c| vec![c as u64 % 3]).unwrap();
        assert_eq!(op_apply(&MinorOperator::identity(&f, 2, 3), &g).unwrap(), g);
        assert!(op_apply(&MinorOperator::zero(&f, 2, 3), &g).unwrap().is_zero());
    }

    #[test]
    fn single_term_on_delta() {
        let f = gf2();
        let b = ModuleSpec::cyclic(3).unwrap();
        let m = Mat::from_rows(&f, &[vec![1, 1], vec![0, 0]]).unwrap();
        let y = Mat::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        let out = op_apply(&MinorOperator::single(&m, 1, 3).unwrap(), &delta(&y, &[1], 1, &b).unwrap())
            .unwrap();
        for c in 0..out.len() {
            let x = out.point(c);
            assert_eq!(out.get(c)[0], u64::from(m.mul(&x) == y));
        }
    }

    #[test]
    fn compose_examples() {
        let f = gf2();
        let m = Mat::from_rows(&f, &[vec![1, 1], vec![0, 1]]).unwrap();
        let s = Mat::from_rows(&f, &[vec![0, 1], vec![0, 0]]).unwrap();
        let om = MinorOperator::single(&m, 1, 3).unwrap();
        let os = MinorOperator::single(&s, 2, 3).unwrap();
        let c = op_compose(&os, &om).unwrap();
        assert_eq!(c.terms(), &[(m.mul(&s).code(), 2)]);
        assert_eq!(c.rank_bound, 1);
        let id = MinorOperator::identity(&f, 2, 3);
        assert_eq!(op_compose(&id, &om).unwrap().terms(), om.terms());
    }

    #[test]
    fn compose_matches_sequential_apply() {
        let f = gf2();
        let b = ModuleSpec::cyclic(3).unwrap();
        let i1 = MinorOperator::new(&f, 2, 3, 2, [(1, 1), (6, 2), (9, 1)]).unwrap();
        let i2 = MinorOperator::new(&f, 2, 3, 2, [(3, 2), (10, 1), (15, 1)]).unwrap();
        let c = op_compose(&i2, &i1).unwrap();
        for x in enumerate(&f, (2, 2), RankFilter::Any, 16).unwrap() {
            let d = delta(&x, &[1], 2, &b).unwrap();
            let seq = op_apply(&i2, &op_apply(&i1, &d).unwrap()).unwrap();
            assert_eq!(op_apply(&c, &d).unwrap(), seq);
        }
    }

    #[test]
    fn add_and_scale() {
        let f = gf2();
        let a = MinorOperator::new(&f, 2, 3, 2, [(1, 1), (6, 2)]).unwrap();
        assert_eq!(op_add(&a, &MinorOperator::zero(&f, 2, 3)).unwrap().terms(), a.terms());
        assert!(op_sub(&a, &a).unwrap().is_empty());
        assert!(op_scale(&a, 3).is_empty());
    }

    #[test]
    fn rank_bound_enforced() {
        let f = gf2();
        let id = Mat::identity(&f, 2).code();
        assert!(matches!(
            MinorOperator::new(&f, 2, 3, 1, [(id, 1)]),
            Err(Error::RankMismatch(_))
        ));
    }

    #[test]
    fn signature_checked() {
        let f = gf2();
        let a = MinorOperator::identity(&f, 2, 3);
        let b = MinorOperator::identity(&f, 2, 5);
        assert!(matches!(op_add(&a, &b), Err(Error::SignatureMismatch(_))));
        let g = FuncTable::zero(&f, 1, 3, &ModuleSpec::cyclic(3).unwrap()).unwrap();
        assert!(matches!(op_apply(&a, &g), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn row_table_matches_product() {
        let f = field_make(3, 1).unwrap();
        let x = Mat::from_rows(&f, &[vec![1, 2], vec![0, 1], vec![2, 2]]).unwrap();
        let t = RowTable::new(&x);
        for c in [0u64, 5, 777, 19682] {
            let m = Mat::from_code(&f, 3, 3, c);
            assert_eq!(t.apply(&row_digits(c, 3, 3)), m.mul(&x).code());
        }
    }
}
