use std::hash::{Hash, Hasher};

use super::mat::Mat;
use crate::error::{Error, Result};
use crate::scalars::{Field, FieldElem};

/// Subspace of F^m stored by its unique RREF basis (rows).
#[derive(Clone, Debug)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Mat,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis == other.basis
    }
}
impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.basis.hash(state);
    }
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Mat::zeros(field, 0, ambient),
        }
    }

    pub fn full(field: &Field, ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Mat::identity(field, ambient),
        }
    }

    /// Span of the rows of `rows` (a `t × ambient` matrix).
    pub fn row_span(rows: &Mat) -> Self {
        let (r, pivots) = rows.rref();
        Subspace {
            ambient: rows.cols,
            basis: r.select_rows(&(0..pivots.len()).collect::<Vec<_>>()),
        }
    }

    pub fn span(field: &Field, ambient: usize, vectors: &[Vec<FieldElem>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(field, ambient);
        }
        let m = Mat::from_rows_shaped(field, vectors, vectors.len(), ambient)
            .expect("vectors of ambient length");
        Self::row_span(&m)
    }

    pub fn field(&self) -> &Field {
        &self.basis.field
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    /// Basis vectors as the columns of an `ambient × dim` matrix.
    pub fn basis_columns(&self) -> Mat {
        self.basis.transpose()
    }

    pub fn vectors(&self) -> Vec<Vec<FieldElem>> {
        self.basis.to_rows()
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let f = &*self.basis.field;
        let mut w = v.to_vec();
        for i in 0..self.dim() {
            let row = self.basis.row(i);
            let c = row.iter().position(|&x| x != 0).expect("RREF row nonzero");
            let factor = w[c];
            if factor != 0 {
                for j in 0..self.ambient {
                    w[j] = f.sub(w[j], f.mul(factor, row[j]));
                }
            }
        }
        w.iter().all(|&x| x == 0)
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        other.basis.to_rows().iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        check_ambient(self, other)?;
        Ok(Self::row_span(&self.basis.vstack(&other.basis)))
    }

    /// `{y : yᵀx = 0 for all x ∈ V}`.
    pub fn orth(&self) -> Subspace {
        let field = self.basis.field.clone();
        let f = &*field;
        let m = self.ambient;
        let pivots: Vec<usize> = (0..self.dim())
            .map(|i| self.basis.row(i).iter().position(|&x| x != 0).unwrap())
            .collect();
        let free: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
        let vectors: Vec<Vec<FieldElem>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![0u8; m];
                v[fc] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(self.basis.get(i, fc));
                }
                v
            })
            .collect();
        Self::span(&field, m, &vectors)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        check_ambient(self, other)?;
        Ok(self.orth().sum(&other.orth())?.orth())
    }

    /// All vectors of the subspace, in ascending coefficient order.
    pub fn elements(&self) -> Vec<Vec<FieldElem>> {
        let f = &*self.basis.field;
        let d = self.dim();
        let total = f.q.pow(d as u32);
        (0..total)
            .map(|mut c| {
                let mut coeffs = vec![0u8; d];
                for x in coeffs.iter_mut().rev() {
                    *x = (c % f.q) as u8;
                    c /= f.q;
                }
                let mut v = vec![0u8; self.ambient];
                for (i, &a) in coeffs.iter().enumerate() {
                    if a != 0 {
                        for j in 0..self.ambient {
                            v[j] = f.add(v[j], f.mul(a, self.basis.get(i, j)));
                        }
                    }
                }
                v
            })
            .collect()
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient != b.ambient {
        return Err(Error::AmbientMismatch(a.ambient, b.ambient));
    }
    Ok(())
}

/// Column space `C(X)` as a subspace of F^rows.
pub fn colspace(x: &Mat) -> Subspace {
    Subspace::row_span(&x.transpose())
}

pub fn orth(v: &Subspace) -> Subspace {
    v.orth()
}

pub fn intersect(v: &Subspace, w: &Subspace) -> Result<Subspace> {
    v.intersect(w)
}

pub fn contains(v: &Subspace, x: &[FieldElem]) -> bool {
    v.contains(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::field_make;

    #[test]
    fn colspace_of_anchor() {
        let f = field_make(2, 1).unwrap();
        let c = colspace(&Mat::anchor(&f, 3, 2));
        assert_eq!(c, Subspace::span(&f, 3, &[vec![1, 0, 0], vec![0, 1, 0]]));
        assert!(!c.contains(&[0, 0, 1]));
    }

    #[test]
    fn canonical_spanning_sets() {
        let f = field_make(3, 1).unwrap();
        let a = Subspace::span(&f, 3, &[vec![1, 1, 0], vec![0, 1, 2]]);
        let b = Subspace::span(&f, 3, &[vec![1, 2, 2], vec![2, 0, 2], vec![1, 1, 0]]);
        assert_eq!(a, b);
    }

    #[test]
    fn ambient_checked() {
        let f = field_make(2, 1).unwrap();
        let a = Subspace::full(&f, 2);
        let b = Subspace::full(&f, 3);
        assert_eq!(a.intersect(&b).unwrap_err(), Error::AmbientMismatch(2, 3));
    }
}
