use serde::{Deserialize, Serialize};

use super::zn::{gcd, mul_mod, reduce, unit_normalizer, xgcd};
use crate::error::{Error, Result};

/// Dense matrix of residues modulo `n`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZnMat {
    pub rows: usize,
    pub cols: usize,
    pub n: u64,
    pub entries: Vec<u64>,
}

impl ZnMat {
    pub fn zeros(rows: usize, cols: usize, n: u64) -> Self {
        ZnMat {
            rows,
            cols,
            n,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(size: usize, n: u64) -> Self {
        let mut m = Self::zeros(size, size, n);
        for i in 0..size {
            m.entries[i * size + i] = 1 % n;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u64>], cols: usize, n: u64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            entries.extend(r.iter().map(|&x| x % n));
        }
        Ok(ZnMat {
            rows: rows.len(),
            cols,
            n,
            entries,
        })
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }
}

/// Howell canonical form of the row span.
pub fn howell_form(gens: &ZnMat) -> ZnMat {
    let rows = howell_rows(gens.to_rows(), gens.cols, gens.n);
    ZnMat::from_rows(&rows, gens.cols, gens.n).expect("rows have matching width")
}

/// Row-based Howell form: echelon rows with pivots dividing `n`, entries
/// above each pivot reduced below it, and the annihilator multiples of every
/// row spanned by the rows beneath it. Zero rows are dropped.
pub fn howell_rows(mut a: Vec<Vec<u64>>, cols: usize, n: u64) -> Vec<Vec<u64>> {
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x %= n;
        }
    }
    a.retain(|row| row.iter().any(|&x| x != 0));
    let mut r = 0;
    for c in 0..cols {
        if r >= a.len() {
            break;
        }
        let Some(first) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, first);
        for i in r + 1..a.len() {
            let y = a[i][c];
            if y == 0 {
                continue;
            }
            let x = a[r][c];
            let (g, s, t) = xgcd(x as i128, y as i128);
            let (u, v) = (y as i128 / g, x as i128 / g);
            let (top, bottom) = a.split_at_mut(i);
            let (rr, ri) = (&mut top[r], &mut bottom[0]);
            for j in c..cols {
                let (p, q) = (rr[j] as i128, ri[j] as i128);
                rr[j] = reduce(s * p + t * q, n);
                ri[j] = reduce(v * q - u * p, n);
            }
        }
        let unit = unit_normalizer(a[r][c], n);
        if unit != 1 {
            for x in a[r][c..].iter_mut() {
                *x = mul_mod(*x, unit, n);
            }
        }
        let d = a[r][c];
        debug_assert_eq!(d, gcd(d, n));
        let (top, bottom) = a.split_at_mut(r);
        let pivot_row = &bottom[0];
        for row in top.iter_mut() {
            let f = row[c] / d;
            if f != 0 {
                for j in c..cols {
                    row[j] = reduce(row[j] as i128 - (f as i128) * (pivot_row[j] as i128), n);
                }
            }
        }
        if d != 1 {
            let ann = n / d;
            let w: Vec<u64> = a[r].iter().map(|&x| mul_mod(x, ann, n)).collect();
            if w.iter().any(|&x| x != 0) {
                a.push(w);
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Submodule of `(Z/n)^dim`, stored by its Howell basis so equality of
/// values is equality of submodules.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Submodule {
    pub n: u64,
    pub dim: usize,
    pub rows: Vec<Vec<u64>>,
}

impl Submodule {
    pub fn zero(n: u64, dim: usize) -> Self {
        Submodule {
            n,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn full(n: u64, dim: usize) -> Self {
        Self::from_generators(n, dim, ZnMat::identity(dim, n).to_rows())
    }

    pub fn from_generators(n: u64, dim: usize, gens: Vec<Vec<u64>>) -> Self {
        Submodule {
            n,
            dim,
            rows: howell_rows(gens, dim, n),
        }
    }

    pub fn pivot(row: &[u64]) -> usize {
        row.iter().position(|&x| x != 0).expect("Howell rows are nonzero")
    }

    /// Reduces `v` against the basis; the result is zero iff `v` lies in the span.
    pub fn reduce_vec(&self, v: &mut [u64]) {
        let n = self.n;
        for row in &self.rows {
            let c = Self::pivot(row);
            let d = row[c];
            let f = v[c] / d;
            if f != 0 {
                for j in c..self.dim {
                    v[j] = reduce(v[j] as i128 - (f as i128) * (row[j] as i128), n);
                }
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        if v.len() != self.dim {
            return false;
        }
        let mut w: Vec<u64> = v.iter().map(|&x| x % self.n).collect();
        self.reduce_vec(&mut w);
        w.iter().all(|&x| x == 0)
    }

    pub fn contains_all(&self, other: &Submodule) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        let mut gens = self.rows.clone();
        gens.extend(other.rows.iter().cloned());
        Self::from_generators(self.n, self.dim, gens)
    }

    /// Number of elements: product of `n / pivot` over the basis.
    pub fn cardinality(&self) -> u128 {
        self.rows
            .iter()
            .map(|r| (self.n / r[Self::pivot(r)]) as u128)
            .product()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Elements of the span with zero in every column where `mask` is true.
    /// Columns are permuted so masked ones lead, then restored.
    pub fn vanishing_on(&self, mask: &[bool]) -> Submodule {
        let order: Vec<usize> = (0..self.dim)
            .filter(|&j| mask[j])
            .chain((0..self.dim).filter(|&j| !mask[j]))
            .collect();
        let lead = mask.iter().filter(|&&b| b).count();
        let permuted: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| order.iter().map(|&j| r[j]).collect())
            .collect();
        let h = howell_rows(permuted, self.dim, self.n);
        let kept: Vec<Vec<u64>> = h
            .into_iter()
            .filter(|r| Self::pivot(r) >= lead)
            .map(|r| {
                let mut back = vec![0u64; self.dim];
                for (pos, &j) in order.iter().enumerate() {
                    back[j] = r[pos];
                }
                back
            })
            .collect();
        Self::from_generators(self.n, self.dim, kept)
    }

    /// Restriction to the listed coordinates, in that order.
    pub fn project(&self, coords: &[usize]) -> Submodule {
        let gens = self
            .rows
            .iter()
            .map(|r| coords.iter().map(|&j| r[j]).collect())
            .collect();
        Self::from_generators(self.n, coords.len(), gens)
    }

    pub fn as_znmat(&self) -> ZnMat {
        ZnMat::from_rows(&self.rows, self.dim, self.n).expect("rows have matching width")
    }
}

/// Incremental span accumulator: vectors are reduced against the current
/// basis and the basis is rebuilt only when a batch of new directions
/// arrives.
pub struct SpanBuilder {
    current: Submodule,
    pending: Vec<Vec<u64>>,
}

impl SpanBuilder {
    pub fn new(n: u64, dim: usize) -> Self {
        SpanBuilder {
            current: Submodule::zero(n, dim),
            pending: Vec::new(),
        }
    }

    pub fn push(&mut self, v: &[u64]) {
        let mut w: Vec<u64> = v.iter().map(|&x| x % self.current.n).collect();
        self.current.reduce_vec(&mut w);
        if w.iter().all(|&x| x == 0) {
            return;
        }
        self.pending.push(w);
        if self.pending.len() >= 16 {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let mut gens = std::mem::take(&mut self.current.rows);
        gens.append(&mut self.pending);
        self.current.rows = howell_rows(gens, self.current.dim, self.current.n);
    }

    pub fn finish(mut self) -> Submodule {
        self.flush();
        self.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn span_brute(gens: &[Vec<u64>], dim: usize, n: u64) -> HashSet<Vec<u64>> {
        let mut set: HashSet<Vec<u64>> = HashSet::new();
        set.insert(vec![0; dim]);
        loop {
            let mut added = Vec::new();
            for v in &set {
                for g in gens {
                    let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % n).collect();
                    if !set.contains(&w) {
                        added.push(w);
                    }
                }
            }
            if added.is_empty() {
                return set;
            }
            set.extend(added);
        }
    }

    #[test]
    fn examples() {
        let s = Submodule::from_generators(4, 1, vec![vec![2]]);
        assert_eq!(s.rows, vec![vec![2]]);
        assert_eq!(s.cardinality(), 2);
        let s = Submodule::from_generators(6, 2, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(s.rows, vec![vec![1, 0], vec![0, 1]]);
        // both coordinates stay even, so the span is {0,2}^2
        let s = Submodule::from_generators(4, 2, vec![vec![2, 2], vec![0, 2]]);
        assert_eq!(s.cardinality(), 4);
        assert_eq!(span_brute(&[vec![2, 2], vec![0, 2]], 2, 4).len(), 4);
        let s = Submodule::from_generators(4, 2, vec![vec![1, 2], vec![0, 2]]);
        assert_eq!(s.cardinality(), 8);
    }

    #[test]
    fn annihilator_rows_needed() {
        // span of (2,1) over Z/4 contains (0,2)
        let s = Submodule::from_generators(4, 2, vec![vec![2, 1]]);
        assert!(s.contains(&[0, 2]));
        assert_eq!(s.cardinality(), 4);
    }

    #[test]
    fn vanishing_and_projection() {
        let s = Submodule::from_generators(6, 3, vec![vec![1, 2, 3], vec![0, 3, 1]]);
        let v = s.vanishing_on(&[true, false, false]);
        for r in &v.rows {
            assert_eq!(r[0], 0);
            assert!(s.contains(r));
        }
        let brute = span_brute(&s.rows, 3, 6);
        let expect = brute.iter().filter(|w| w[0] == 0).count() as u128;
        assert_eq!(v.cardinality(), expect);
        let p = s.project(&[2, 1]);
        let bp: HashSet<Vec<u64>> = brute.iter().map(|w| vec![w[2], w[1]]).collect();
        assert_eq!(p.cardinality(), bp.len() as u128);
    }

    #[test]
    fn span_builder_matches_batch() {
        let gens = vec![vec![3, 6, 0], vec![2, 0, 4], vec![0, 9, 6], vec![6, 6, 6]];
        let batch = Submodule::from_generators(12, 3, gens.clone());
        let mut b = SpanBuilder::new(12, 3);
        for g in &gens {
            b.push(g);
        }
        assert_eq!(b.finish(), batch);
    }
}
