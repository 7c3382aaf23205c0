//! Finitary operations `(F^k)^m → B` as dense tables.

use crate::error::{Error, Result};
use crate::linalg::{count_codes, Mat, DEFAULT_BUDGET};
use crate::scalars::zn::{lcm, MAX_MODULUS};
use crate::scalars::{Field, FieldElem};

/// `B = Z/d_1 × … × Z/d_r`, acted on by Z/N with `N = lcm(d_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleSpec {
    pub factors: Vec<u64>,
    pub n: u64,
    /// `N / d_i`: the embedding `x ↦ (N/d_i)·x` of each factor into Z/N.
    pub scales: Vec<u64>,
}

impl ModuleSpec {
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidModule("no cyclic factors".into()));
        }
        let mut n = 1u64;
        for &d in factors {
            if d < 2 {
                return Err(Error::InvalidModule(format!("cyclic factor {d} < 2")));
            }
            n = lcm(n, d);
            if n > MAX_MODULUS {
                return Err(Error::InvalidModule(format!("exponent exceeds {MAX_MODULUS}")));
            }
        }
        Ok(ModuleSpec {
            factors: factors.to_vec(),
            n,
            scales: factors.iter().map(|&d| n / d).collect(),
        })
    }

    pub fn cyclic(d: u64) -> Result<Self> {
        Self::new(&[d])
    }

    pub fn r(&self) -> usize {
        self.factors.len()
    }

    pub fn check_coprime(&self, p: u64) -> Result<()> {
        if self.n.is_multiple_of(p) {
            return Err(Error::NotCoprime { n: self.n, p });
        }
        Ok(())
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.r()]
    }

    pub fn is_zero(&self, b: &[u64]) -> bool {
        b.iter().all(|&x| x == 0)
    }

    pub fn normalize(&self, b: &[u64]) -> Result<Vec<u64>> {
        if b.len() != self.r() {
            return Err(Error::Schema(format!(
                "module element of length {} for {} factors",
                b.len(),
                self.r()
            )));
        }
        Ok(b.iter().zip(&self.factors).map(|(&x, &d)| x % d).collect())
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect()
    }

    /// Action of the integer scalar `c`.
    pub fn scale(&self, c: u64, b: &[u64]) -> Vec<u64> {
        b.iter()
            .zip(&self.factors)
            .map(|(&x, &d)| ((c % d) * x) % d)
            .collect()
    }

    pub fn embed(&self, b: &[u64]) -> Vec<u64> {
        b.iter().zip(&self.scales).map(|(&x, &s)| x * s).collect()
    }

    /// Inverse of `embed` on its image.
    pub fn unembed(&self, v: &[u64]) -> Result<Vec<u64>> {
        v.iter()
            .zip(&self.scales)
            .zip(&self.factors)
            .map(|((&x, &s), &d)| {
                if x % s != 0 {
                    Err(Error::Schema(format!("{x} is not a multiple of {s}")))
                } else {
                    Ok((x / s) % d)
                }
            })
            .collect()
    }

    /// All elements of B in lexicographic order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &d in &self.factors {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..d).map(move |x| {
                        let mut e = p.clone();
                        e.push(x);
                        e
                    })
                })
                .collect();
        }
        out
    }
}

/// Signature-carrying dense table of `f: (F^k)^m → B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncTable {
    pub field: Field,
    pub k: usize,
    pub m: usize,
    pub module: ModuleSpec,
    /// `r` residues per point, points in ascending matrix code order.
    pub values: Vec<u64>,
}

pub fn domain_size(field: &Field, k: usize, m: usize) -> Result<usize> {
    match count_codes(field.q, m, k) {
        Some(t) if t <= DEFAULT_BUDGET => Ok(t as usize),
        _ => Err(Error::BudgetExceeded(format!(
            "{}^({m}*{k}) points exceed the table budget",
            field.q
        ))),
    }
}

/// For `M` of shape `(m, m')`, the map `code(X) ↦ code(M·X)` over
/// `X ∈ F^{m'×k}`.
pub fn minor_code_map(mt: &Mat, k: usize) -> Vec<u32> {
    let f = &*mt.field;
    let q = f.q;
    let (m, mp) = (mt.rows, mt.cols);
    // image of every column vector v ∈ F^{m'}
    let nv = q.pow(mp as u32);
    let images: Vec<Vec<FieldElem>> = (0..nv)
        .map(|c| mt.mul_vec(&crate::linalg::vec_from_code(q, mp, c as u64)))
        .collect();
    // contribution of column j holding vector w ∈ F^m to the code of an m×k matrix
    let weight = |i: usize, j: usize| (q as u64).pow((m * k - 1 - (i * k + j)) as u32);
    let contrib: Vec<Vec<u64>> = (0..k)
        .map(|j| {
            images
                .iter()
                .map(|w| w.iter().enumerate().map(|(i, &x)| x as u64 * weight(i, j)).sum())
                .collect()
        })
        .collect();
    let total = q.pow((mp * k) as u32);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; mp * k];
    for _ in 0..total {
        let mut code = 0u64;
        for (j, cj) in contrib.iter().enumerate() {
            let mut vc = 0usize;
            for i in 0..mp {
                vc = vc * q + digits[i * k + j];
            }
            code += cj[vc];
        }
        out.push(code as u32);
        // increment big-endian digit counter
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d == q {
                *d = 0;
            } else {
                break;
            }
        }
    }
    out
}

impl FuncTable {
    pub fn zero(field: &Field, k: usize, m: usize, module: &ModuleSpec) -> Result<Self> {
        let size = domain_size(field, k, m)?;
        Ok(FuncTable {
            field: field.clone(),
            k,
            m,
            module: module.clone(),
            values: vec![0; size * module.r()],
        })
    }

    /// Builds a table from `value(code)` for every point.
    pub fn from_fn(
        field: &Field,
        k: usize,
        m: usize,
        module: &ModuleSpec,
        mut value: impl FnMut(usize) -> Vec<u64>,
    ) -> Result<Self> {
        let mut t = Self::zero(field, k, m, module)?;
        for c in 0..t.len() {
            let b = module.normalize(&value(c))?;
            t.set(c, &b);
        }
        Ok(t)
    }

    /// Number of domain points.
    pub fn len(&self) -> usize {
        self.values.len() / self.module.r()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, code: usize) -> &[u64] {
        let r = self.module.r();
        &self.values[code * r..(code + 1) * r]
    }

    #[inline]
    pub fn set(&mut self, code: usize, b: &[u64]) {
        let r = self.module.r();
        self.values[code * r..(code + 1) * r].copy_from_slice(b);
    }

    pub fn eval(&self, x: &Mat) -> &[u64] {
        self.get(x.code() as usize)
    }

    pub fn point(&self, code: usize) -> Mat {
        Mat::from_code(&self.field, self.m, self.k, code as u64)
    }

    pub fn same_signature(&self, other: &FuncTable) -> bool {
        self.field == other.field
            && self.k == other.k
            && self.m == other.m
            && self.module == other.module
    }

    fn check_signature(&self, other: &FuncTable) -> Result<()> {
        if !self.same_signature(other) {
            return Err(Error::SignatureMismatch(format!(
                "({:?}, k={}, m={}, {:?}) vs ({:?}, k={}, m={}, {:?})",
                self.field,
                self.k,
                self.m,
                self.module.factors,
                other.field,
                other.k,
                other.m,
                other.module.factors
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &FuncTable) -> Result<FuncTable> {
        self.check_signature(other)?;
        let mut out = self.clone();
        let r = self.module.r();
        for (i, (x, &y)) in out.values.iter_mut().zip(&other.values).enumerate() {
            *x = (*x + y) % self.module.factors[i % r];
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FuncTable) -> Result<FuncTable> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FuncTable {
        let mut out = self.clone();
        let r = self.module.r();
        for (i, x) in out.values.iter_mut().enumerate() {
            let d = self.module.factors[i % r];
            *x = (d - *x % d) % d;
        }
        out
    }

    pub fn scale(&self, c: u64) -> FuncTable {
        let mut out = self.clone();
        let r = self.module.r();
        for (i, x) in out.values.iter_mut().enumerate() {
            let d = self.module.factors[i % r];
            *x = (c % d) * *x % d;
        }
        out
    }

    /// Codes of the points where the value is nonzero.
    pub fn support_codes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| !self.module.is_zero(self.get(c)))
            .collect()
    }

    pub fn support(&self) -> Vec<Mat> {
        self.support_codes().into_iter().map(|c| self.point(c)).collect()
    }

    /// Embedded vector over Z/N of length `r · q^{mk}`.
    pub fn to_zn_vector(&self) -> Vec<u64> {
        let r = self.module.r();
        self.values
            .iter()
            .enumerate()
            .map(|(i, &x)| x * self.module.scales[i % r])
            .collect()
    }

    pub fn from_zn_vector(
        field: &Field,
        k: usize,
        m: usize,
        module: &ModuleSpec,
        v: &[u64],
    ) -> Result<FuncTable> {
        let mut t = Self::zero(field, k, m, module)?;
        if v.len() != t.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} table entries",
                v.len(),
                t.values.len()
            )));
        }
        let r = module.r();
        for c in 0..t.len() {
            let b = module.unembed(&v[c * r..(c + 1) * r])?;
            t.set(c, &b);
        }
        Ok(t)
    }
}

/// `δ_{X0}^b`.
pub fn delta(x0: &Mat, b: &[u64], k: usize, module: &ModuleSpec) -> Result<FuncTable> {
    if x0.cols != k {
        return Err(Error::ShapeMismatch(format!(
            "anchor has {} columns, expected {k}",
            x0.cols
        )));
    }
    let mut t = FuncTable::zero(&x0.field, k, x0.rows, module)?;
    let b = module.normalize(b)?;
    t.set(x0.code() as usize, &b);
    Ok(t)
}

/// `X ↦ f(M·X)` for `M` of shape `(arity(f), m')`.
pub fn minor(f: &FuncTable, mt: &Mat) -> Result<FuncTable> {
    if mt.rows != f.m || *mt.field != *f.field {
        return Err(Error::ShapeMismatch(format!(
            "minor matrix {}x{} for arity {}",
            mt.rows, mt.cols, f.m
        )));
    }
    let map = minor_code_map(mt, f.k);
    let mut out = FuncTable::zero(&f.field, f.k, mt.cols, &f.module)?;
    for (c, &img) in map.iter().enumerate() {
        out.set(c, f.get(img as usize));
    }
    Ok(out)
}
