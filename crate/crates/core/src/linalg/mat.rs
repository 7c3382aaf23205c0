use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::scalars::{Field, FieldElem};

/// Matrix over GF(q), row-major element codes.
///
/// A tuple `(x_1, ..., x_m)` of vectors in F^k is the `m × k` matrix whose
/// i-th row is `x_i`. The index code of a matrix reads its entries in
/// row-major order as base-q digits, most significant first, so ascending
/// codes are lexicographic order.
#[derive(Clone)]
pub struct Mat {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElem>,
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && *self.field == *other.field
    }
}
impl Eq for Mat {}

impl Hash for Mat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Number of matrices of the given shape, if it fits in a `u64`.
pub fn count_codes(q: usize, rows: usize, cols: usize) -> Option<u64> {
    (q as u64).checked_pow((rows * cols) as u32)
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// `[Id_k; 0]` of shape `rows × k`.
    pub fn anchor(field: &Field, rows: usize, k: usize) -> Self {
        let mut m = Self::zeros(field, rows, k);
        for i in 0..k.min(rows) {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<FieldElem>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_rows_shaped(field, rows, r, c)
    }

    pub fn from_rows_shaped(
        field: &Field,
        rows: &[Vec<FieldElem>],
        r: usize,
        c: usize,
    ) -> Result<Self> {
        if rows.len() != r || rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch(format!("expected {r}x{c} matrix")));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            for &x in row {
                if x as usize >= field.q {
                    return Err(Error::Schema(format!("entry {x} outside GF({})", field.q)));
                }
                data.push(x);
            }
        }
        Ok(Mat {
            field: field.clone(),
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_columns(field: &Field, rows: usize, cols: &[Vec<FieldElem>]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_code(field: &Field, rows: usize, cols: usize, mut code: u64) -> Self {
        let q = field.q as u64;
        let mut data = vec![0u8; rows * cols];
        for x in data.iter_mut().rev() {
            *x = (code % q) as u8;
            code /= q;
        }
        Mat {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn code(&self) -> u64 {
        let q = self.field.q as u64;
        self.data.iter().fold(0u64, |acc, &x| acc * q + x as u64)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let f = &*self.field;
        let mut out = Mat::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b != 0 {
                        let idx = i * other.cols + j;
                        out.data[idx] = f.add(out.data[idx], f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let f = &*self.field;
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(0u8, |acc, j| f.add(acc, f.mul(self.get(i, j), v[j])))
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape");
        let f = &*self.field;
        let mut out = self.clone();
        for (x, &y) in out.data.iter_mut().zip(&other.data) {
            *x = f.add(*x, y);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.shape(), other.shape(), "matrix difference shape");
        let f = &*self.field;
        let mut out = self.clone();
        for (x, &y) in out.data.iter_mut().zip(&other.data) {
            *x = f.sub(*x, y);
        }
        out
    }

    /// Outer product `a·uᵀ`.
    pub fn outer(field: &Field, a: &[FieldElem], u: &[FieldElem]) -> Mat {
        let mut m = Mat::zeros(field, a.len(), u.len());
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in u.iter().enumerate() {
                m.set(i, j, field.mul(x, y));
            }
        }
        m
    }

    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut m = Mat::zeros(&self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut m = self.clone();
        m.rows += other.rows;
        m.data.extend_from_slice(&other.data);
        m
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, cols: &[usize]) -> Mat {
        let mut m = Mat::zeros(&self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        let mut m = Mat::zeros(&self.field, rows.len(), self.cols);
        for (ii, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                m.set(ii, j, self.get(i, j));
            }
        }
        m
    }

    /// Reduced row-echelon form and its pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = &*self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c));
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor != 0 {
                    for j in c..m.cols {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// `X = A·U` with `A` the pivot columns of `X` and `U` the nonzero RREF rows.
    pub fn rank_factorize(&self) -> (Mat, Mat) {
        let (r, pivots) = self.rref();
        let a = self.columns(&pivots);
        let u = r.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        (a, u)
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(&self.field, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.columns(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Some `Y` with `self·Y = b`, if one exists (free variables set to 0).
    pub fn solve_right(&self, b: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut y = Mat::zeros(&self.field, self.cols, b.cols);
        for (i, &c) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                y.set(c, j, r.get(i, self.cols + j));
            }
        }
        Some(y)
    }

    /// Completes the (linearly independent) columns of `self` to an
    /// invertible square matrix by appending standard basis vectors.
    pub fn complete_to_basis(&self) -> Mat {
        let mut m = self.clone();
        for j in 0..self.rows {
            if m.cols == self.rows {
                break;
            }
            let mut e = Mat::zeros(&self.field, self.rows, 1);
            e.set(j, 0, 1);
            let cand = m.hstack(&e);
            if cand.rank() == cand.cols {
                m = cand;
            }
        }
        m
    }
}

/// Given rank factorizations `A·U = A'·U'` of the same matrix, the invertible
/// `T` with `A' = A·T` and `U' = T⁻¹·U`.
pub fn factorization_transition(a: &Mat, u: &Mat, a2: &Mat, u2: &Mat) -> Result<Mat> {
    let n = a.cols;
    let shapes_ok = a2.cols == n && u.rows == n && u2.rows == n && a.rows == a2.rows;
    if !shapes_ok || u.cols != u2.cols {
        return Err(Error::NotFactorizationPair);
    }
    let x = a.mul(u);
    if x != a2.mul(u2) || x.rank() != n || a.rank() != n || u.rank() != n {
        return Err(Error::NotFactorizationPair);
    }
    let t = a.solve_right(a2).ok_or(Error::NotFactorizationPair)?;
    let tinv = t.inverse().ok_or(Error::NotFactorizationPair)?;
    if a.mul(&t) != *a2 || tinv.mul(u) != *u2 {
        return Err(Error::NotFactorizationPair);
    }
    Ok(t)
}
