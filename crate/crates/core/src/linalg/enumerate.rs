use super::mat::{count_codes, Mat};
use super::subspace::Subspace;
use crate::error::{Error, Result};
use crate::scalars::{Field, FieldElem};

pub const DEFAULT_BUDGET: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankFilter {
    Any,
    Exactly(usize),
    AtMost(usize),
}

impl RankFilter {
    pub fn accepts(&self, r: usize) -> bool {
        match *self {
            RankFilter::Any => true,
            RankFilter::Exactly(x) => r == x,
            RankFilter::AtMost(x) => r <= x,
        }
    }
}

/// Matrices of a fixed shape in ascending code order, optionally filtered by rank.
pub struct MatIter {
    field: Field,
    rows: usize,
    cols: usize,
    filter: RankFilter,
    next: u64,
    total: u64,
}

impl Iterator for MatIter {
    type Item = Mat;

    fn next(&mut self) -> Option<Mat> {
        while self.next < self.total {
            let m = Mat::from_code(&self.field, self.rows, self.cols, self.next);
            self.next += 1;
            if self.filter == RankFilter::Any || self.filter.accepts(m.rank()) {
                return Some(m);
            }
        }
        None
    }
}

pub fn check_budget(q: usize, rows: usize, cols: usize, budget: u64) -> Result<u64> {
    match count_codes(q, rows, cols) {
        Some(t) if t <= budget => Ok(t),
        _ => Err(Error::BudgetExceeded(format!(
            "{q}^({rows}*{cols}) matrices exceed budget {budget}"
        ))),
    }
}

pub fn enumerate(
    field: &Field,
    shape: (usize, usize),
    filter: RankFilter,
    budget: u64,
) -> Result<MatIter> {
    let total = check_budget(field.q, shape.0, shape.1, budget)?;
    Ok(MatIter {
        field: field.clone(),
        rows: shape.0,
        cols: shape.1,
        filter,
        next: 0,
        total,
    })
}

/// Vector of F^m with the given big-endian code.
pub fn vec_from_code(q: usize, m: usize, mut code: u64) -> Vec<FieldElem> {
    let mut v = vec![0u8; m];
    for x in v.iter_mut().rev() {
        *x = (code % q as u64) as u8;
        code /= q as u64;
    }
    v
}

pub fn vec_code(q: usize, v: &[FieldElem]) -> u64 {
    v.iter().fold(0u64, |acc, &x| acc * q as u64 + x as u64)
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    rec(0, n, d, &mut cur, &mut out);
    out
}

/// All d-dimensional subspaces of F^m, sorted by RREF basis code.
pub fn enumerate_subspaces(field: &Field, m: usize, d: usize) -> Result<Vec<Subspace>> {
    if d > m {
        return Ok(Vec::new());
    }
    let q = field.q;
    let mut out = Vec::new();
    for pivots in combinations(m, d) {
        let free: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| {
                let pv = pivots.clone();
                (pivots[i] + 1..m)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        let count = (q as u64)
            .checked_pow(free.len() as u32)
            .filter(|&c| c <= DEFAULT_BUDGET)
            .ok_or_else(|| Error::BudgetExceeded(format!("subspaces of F^{m}")))?;
        for code in 0..count {
            let vals = vec_from_code(q, free.len(), code);
            let mut b = Mat::zeros(field, d, m);
            for (i, &p) in pivots.iter().enumerate() {
                b.set(i, p, 1);
            }
            for (&(i, c), &v) in free.iter().zip(&vals) {
                b.set(i, c, v);
            }
            out.push(Subspace { ambient: m, basis: b });
        }
        if out.len() as u64 > DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded(format!("subspaces of F^{m}")));
        }
    }
    out.sort_by_key(|s| s.basis.code());
    Ok(out)
}

/// All subspaces of F^m of every dimension, by dimension then basis code.
pub fn enumerate_all_subspaces(field: &Field, m: usize) -> Result<Vec<Subspace>> {
    let mut out = Vec::new();
    for d in 0..=m {
        out.extend(enumerate_subspaces(field, m, d)?);
    }
    Ok(out)
}

/// GL_m(F) in ascending code order.
pub fn enumerate_gl(field: &Field, m: usize, budget: u64) -> Result<Vec<Mat>> {
    Ok(enumerate(field, (m, m), RankFilter::Exactly(m), budget)?.collect())
}

/// Number of full-rank `i × k` matrices: Π_{j<i} (q^k − q^j).
pub fn full_rank_count(q: usize, i: usize, k: usize) -> u64 {
    (0..i).map(|j| (q as u64).pow(k as u32) - (q as u64).pow(j as u32)).product()
}

/// Gaussian binomial coefficient [m choose d]_q.
pub fn gaussian_binomial(q: usize, m: usize, d: usize) -> u64 {
    if d > m {
        return 0;
    }
    let q = q as u64;
    let mut num = 1u64;
    let mut den = 1u64;
    for j in 0..d {
        num *= q.pow((m - j) as u32) - 1;
        den *= q.pow((j + 1) as u32) - 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::field_make;

    #[test]
    fn counts() {
        let f = field_make(2, 1).unwrap();
        let low: Vec<Mat> = enumerate(&f, (2, 2), RankFilter::AtMost(1), DEFAULT_BUDGET)
            .unwrap()
            .collect();
        assert_eq!(low.len(), 10);
        assert_eq!(enumerate_gl(&f, 2, DEFAULT_BUDGET).unwrap().len(), 6);
        assert_eq!(enumerate_subspaces(&f, 3, 2).unwrap().len(), 7);
    }

    #[test]
    fn ascending_and_unique() {
        let f = field_make(3, 1).unwrap();
        let all: Vec<u64> = enumerate(&f, (2, 2), RankFilter::Any, DEFAULT_BUDGET)
            .unwrap()
            .map(|m| m.code())
            .collect();
        assert_eq!(all, (0..81).collect::<Vec<_>>());
    }

    #[test]
    fn subspace_counts_match_gaussian_binomial() {
        for (p, m) in [(2u64, 4usize), (3, 3), (5, 2)] {
            let f = field_make(p, 1).unwrap();
            for d in 0..=m {
                let subs = enumerate_subspaces(&f, m, d).unwrap();
                assert_eq!(subs.len() as u64, gaussian_binomial(f.q, m, d));
                let mut seen = std::collections::HashSet::new();
                for s in &subs {
                    assert_eq!(s.dim(), d);
                    assert!(seen.insert(s.clone()));
                }
            }
        }
    }

    #[test]
    fn budget_enforced() {
        let f = field_make(3, 1).unwrap();
        assert!(enumerate(&f, (4, 4), RankFilter::Any, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn full_rank_counts() {
        assert_eq!(full_rank_count(2, 2, 3), 42);
        assert_eq!(full_rank_count(3, 0, 2), 1);
    }
}
