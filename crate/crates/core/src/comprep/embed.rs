use std::sync::OnceLock;

use super::mik::MikModule;
use crate::error::{Error, Result};
use crate::funcspace::FuncTable;
use crate::linalg::{colspace, enumerate_all_subspaces, Mat, Subspace};
use crate::scalars::zn::{add_mod, mul_mod};
use crate::scalars::RingSpec;
use crate::unifgen::{anchor, build_ii, conjugator, op_apply, subspace_basis, MinorOperator};

/// `L_A = J_{C(A)} ∘ L'_A` for a full-rank `A ∈ F^{m×i}`, where
/// `L'_A(f)(A·U) = f(U)` for rank-`i` `U` and `L'_A(f) = 0` elsewhere.
///
/// `J_{C(A)}` is the arity-`m` anchor conjugated by the completed RREF basis
/// of `C(A)`, so it depends on `C(A)` only. It is built on first use: points
/// of rank `≤ i` never need it.
#[derive(Debug)]
pub struct LAOperator {
    pub a: Mat,
    pub k: usize,
    pub modulus: u64,
    pub h: Subspace,
    left_inverse: Mat,
    jh: OnceLock<Result<MinorOperator>>,
}

pub fn build_la(a: &Mat, k: usize, modulus: u64) -> Result<LAOperator> {
    let i = a.cols;
    if a.rank() != i {
        return Err(Error::RankMismatch(format!("{}x{i} matrix of rank {}", a.rows, a.rank())));
    }
    if i > k {
        return Err(Error::RankMismatch(format!("rank {i} exceeds k = {k}")));
    }
    RingSpec::new(modulus)?.check_coprime(a.field.p)?;
    let s = a.complete_to_basis().inverse().ok_or(Error::NotFullRank)?;
    let left_inverse = s.select_rows(&(0..i).collect::<Vec<_>>());
    Ok(LAOperator {
        a: a.clone(),
        k,
        modulus,
        h: colspace(a),
        left_inverse,
        jh: OnceLock::new(),
    })
}

impl LAOperator {
    pub fn m(&self) -> usize {
        self.a.rows
    }

    pub fn i(&self) -> usize {
        self.a.cols
    }

    pub fn jh(&self) -> Result<&MinorOperator> {
        self.jh
            .get_or_init(|| {
                let (m, i) = (self.m(), self.i());
                if i == m {
                    return Ok(MinorOperator::identity(&self.a.field, m, self.modulus));
                }
                anchor(&self.a.field, i, self.modulus, m)?.conjugate(&conjugator(&self.h))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `U` with `Z = A·U` and `rank(U) = i`, if any.
    fn factor(&self, z: &Mat) -> Option<Mat> {
        let u = self.left_inverse.mul(z);
        (self.a.mul(&u) == *z && u.rank() == self.i()).then_some(u)
    }

    fn check(&self, mik: &MikModule, f: &[u64]) -> Result<()> {
        if mik.i != self.i() || mik.k != self.k || mik.field != self.a.field {
            return Err(Error::ShapeMismatch(format!(
                "M_{{{},{}}} element for L_A with A of rank {} and k = {}",
                mik.i,
                mik.k,
                self.i(),
                self.k
            )));
        }
        if f.len() != mik.dim() || mik.module.n != self.modulus {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} mod {} for M_{{{},{}}}",
                f.len(),
                mik.module.n,
                mik.i,
                mik.k
            )));
        }
        Ok(())
    }

    fn lprime(&self, mik: &MikModule, f: &[u64], z: &Mat) -> Option<Vec<u64>> {
        let u = self.factor(z)?;
        let j = mik.index_of(&u)?;
        Some(mik.value(f, j).to_vec())
    }
}

/// `L_A(f)(X)` as an embedded element of `B`.
pub fn eval_la(op: &LAOperator, mik: &MikModule, f: &[u64], x: &Mat) -> Result<Vec<u64>> {
    op.check(mik, f)?;
    if x.shape() != (op.m(), op.k) {
        return Err(Error::ShapeMismatch(format!(
            "point {}x{} for L_A on F^({}x{})",
            x.rows,
            x.cols,
            op.m(),
            op.k
        )));
    }
    let r = mik.module.r();
    let zero = vec![0u64; r];
    if x.rank() <= op.i() {
        return Ok(op.lprime(mik, f, x).unwrap_or(zero));
    }
    let n = op.modulus;
    let jh = op.jh()?;
    let mut acc = zero;
    for &(code, alpha) in jh.terms() {
        let z = jh.matrix(code).mul(x);
        if let Some(v) = op.lprime(mik, f, &z) {
            for (a, y) in acc.iter_mut().zip(v) {
                *a = add_mod(*a, mul_mod(alpha, y, n), n);
            }
        }
    }
    Ok(acc)
}

/// `L_A(f)` as a full table, computed by applying `J_{C(A)}` to the table of `L'_A(f)`.
pub fn la_table(op: &LAOperator, mik: &MikModule, f: &[u64]) -> Result<FuncTable> {
    op.check(mik, f)?;
    let mut lp = FuncTable::zero(&op.a.field, op.k, op.m(), &mik.module)?;
    for (j, u) in mik.domain.iter().enumerate() {
        let b = mik.module.unembed(mik.value(f, j))?;
        lp.set(op.a.mul(u).code() as usize, &b);
    }
    op_apply(op.jh()?, &lp)
}

/// `f_H ∈ M_{dim H, k}` attached to the subspace `H ≤ F^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub h: Subspace,
    /// Embedded vector over the domain of `M_{dim H, k}`.
    pub value: Vec<u64>,
}

/// `f = Σ_H L_{A_H}(f_H)` with `A_H` the RREF basis of `H` as columns.
///
/// `K_i = I_i(f − Σ_{j<i} K_j)` and `f_H(U) = K_i(A_H·U)` for `dim H = i`.
/// The recomposition is checked before returning.
pub fn decompose(f: &FuncTable) -> Result<Vec<Component>> {
    let (field, k, m, module) = (&f.field, f.k, f.m, &f.module);
    let n = module.n;
    let mut rest = f.clone();
    let mut out = Vec::new();
    let subspaces = enumerate_all_subspaces(field, m)?;
    for i in 0..=k.min(m) {
        let ki = op_apply(&build_ii(field, k, n, i, m)?, &rest)?;
        rest = rest.sub(&ki)?;
        let mik = MikModule::new(field, i, k, module)?;
        for h in subspaces.iter().filter(|h| h.dim() == i) {
            let a = subspace_basis(h);
            let value: Vec<u64> = mik
                .domain
                .iter()
                .flat_map(|u| module.embed(ki.eval(&a.mul(u))))
                .collect();
            out.push(Component { h: h.clone(), value });
        }
    }
    if !rest.is_zero() {
        return Err(Error::VerificationFailed("rank layers do not exhaust f".into()));
    }
    if recompose(f, &out)? != *f {
        return Err(Error::VerificationFailed("recomposition differs from f".into()));
    }
    Ok(out)
}

/// `Σ_H L_{A_H}(f_H)` with the signature of `like`.
pub fn recompose(like: &FuncTable, comps: &[Component]) -> Result<FuncTable> {
    let mut acc = FuncTable::zero(&like.field, like.k, like.m, &like.module)?;
    for c in comps {
        if c.value.iter().all(|&x| x == 0) {
            continue;
        }
        let mik = MikModule::new(&like.field, c.h.dim(), like.k, &like.module)?;
        let op = build_la(&subspace_basis(&c.h), like.k, like.module.n)?;
        acc = acc.add(&la_table(&op, &mik, &c.value)?)?;
    }
    Ok(acc)
}
