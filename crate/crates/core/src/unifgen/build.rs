use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::operator::{op_add, op_compose, op_sub, verify_scope, verify_scope_at, MinorOperator, Scope};
use crate::error::{Error, Result};
use crate::linalg::{colspace, enumerate_subspaces, Mat, Subspace};
use crate::scalars::{Field, RingSpec};
use crate::theta::{certificate_delta, ThetaCertificate};

/// Cap on the consolidated term count of a constructed operator.
pub const TERM_BUDGET: usize = 1 << 20;
/// Cap on `points × terms` for one exhaustive verification pass.
pub const VERIFY_BUDGET: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Constructive,
    Solver,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Constructive => "constructive",
            Provenance::Solver => "solver",
        }
    }
}

/// A minor operator together with the contract it was verified against,
/// stated for functions `(F^k)^arity → Z/N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub op: MinorOperator,
    pub k: usize,
    pub scope: Scope,
    pub provenance: Provenance,
}

impl Certificate {
    /// Points where the scope contract fails.
    pub fn failures(&self) -> Result<Vec<u64>> {
        check_verify_budget(&self.op, self.k)?;
        Ok(verify_scope(&self.op, self.k, &self.scope))
    }

    /// Contract failures among the listed point codes only.
    pub fn failures_at(&self, codes: &[u64]) -> Vec<u64> {
        verify_scope_at(&self.op, self.k, &self.scope, Some(codes))
    }

    /// Number of points `X ∈ F^{arity×k}` an exhaustive check visits.
    pub fn points(&self) -> u64 {
        (self.op.field.q as u64).saturating_pow((self.op.arity * self.k) as u32)
    }

    pub fn verify(&self) -> Result<()> {
        match self.failures()?.first() {
            None => Ok(()),
            Some(c) => Err(Error::VerificationFailed(format!(
                "{} contract fails at point code {c}",
                self.scope.tag()
            ))),
        }
    }

    /// Verifies, then wraps.
    pub fn checked(op: MinorOperator, k: usize, scope: Scope, provenance: Provenance) -> Result<Self> {
        let cert = Certificate {
            op,
            k,
            scope,
            provenance,
        };
        cert.verify()?;
        Ok(cert)
    }
}

fn check_verify_budget(op: &MinorOperator, k: usize) -> Result<()> {
    let points = (op.field.q as u64).checked_pow((op.arity * k) as u32);
    match points.and_then(|p| p.checked_mul(op.len().max(1) as u64)) {
        Some(w) if w <= VERIFY_BUDGET => Ok(()),
        _ => Err(Error::BudgetExceeded(format!(
            "verifying {} terms over GF({})^({}x{k})",
            op.len(),
            op.field.q,
            op.arity
        ))),
    }
}

fn check_terms(op: &MinorOperator) -> Result<()> {
    if op.len() > TERM_BUDGET {
        return Err(Error::BudgetExceeded(format!("{} terms", op.len())));
    }
    Ok(())
}

type Key = (u64, u32, usize, u64, usize);

fn key(field: &Field, j: usize, n: u64, m: usize) -> Key {
    (field.p, field.e, j, n, m)
}

fn arity_cache() -> &'static Mutex<HashMap<Key, Arc<Certificate>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Certificate>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn theta_cache() -> &'static Mutex<HashMap<Key, Arc<ThetaCertificate>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ThetaCertificate>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The verified δ-certificate for dimension `k`, memoized.
pub fn theta_certificate(field: &Field, k: usize, n: u64) -> Result<Arc<ThetaCertificate>> {
    let key = key(field, k, n, k + 1);
    if let Some(c) = theta_cache().lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let cert = Arc::new(certificate_delta(field, k, n)?);
    Ok(theta_cache().lock().unwrap().entry(key).or_insert(cert).clone())
}

/// The δ-certificate as an arity-`(k+1)` operator.
pub fn delta_operator(cert: &ThetaCertificate) -> MinorOperator {
    MinorOperator::from_parts_unchecked(
        &cert.field,
        cert.k + 1,
        cert.n,
        cert.k,
        cert.terms.iter().map(|(m, a)| (m.code(), *a)),
    )
}

/// `A_H`: the RREF basis rows of `H` as columns.
pub fn subspace_basis(h: &Subspace) -> Mat {
    h.basis_columns()
}

/// `A_H` completed to an invertible matrix by standard basis vectors.
pub fn conjugator(h: &Subspace) -> Mat {
    subspace_basis(h).complete_to_basis()
}

fn coordinate_subspace(field: &Field, m: usize, i: usize) -> Subspace {
    colspace(&Mat::anchor(field, m, i))
}

fn check_setting(field: &Field, n: u64) -> Result<()> {
    RingSpec::new(n)?.check_coprime(field.p)
}

/// The `J_{H0}` interpolator for `H0 = span(e_1..e_i)` at arity `m > i`: the
/// terms of the arity-`m`, dimension-`i` certificate whose column space is `H0`.
pub fn anchor(field: &Field, i: usize, n: u64, m: usize) -> Result<MinorOperator> {
    if m <= i {
        return Err(Error::DimMismatch(format!("anchor needs arity > {i}, got {m}")));
    }
    let h0 = coordinate_subspace(field, m, i);
    let cert = build_arity_certificate(field, i, n, m)?;
    let mut op = cert.op.filter(|x| colspace(x) == h0);
    op.rank_bound = i;
    Ok(op)
}

fn jh_unchecked(base: &MinorOperator, h: &Subspace) -> Result<MinorOperator> {
    base.conjugate(&conjugator(h))
}

fn check_jh_inputs(cert: &ThetaCertificate, h: &Subspace, m: usize) -> Result<()> {
    let k = cert.k;
    if h.dim() != k || h.ambient != m || m < k + 1 {
        return Err(Error::DimMismatch(format!(
            "need dim(H) = {k} inside F^m with m ≥ {}; got dim {} in F^{}",
            k + 1,
            h.dim(),
            h.ambient
        )));
    }
    Ok(())
}

fn jh_base(cert: &ThetaCertificate, m: usize) -> Result<MinorOperator> {
    if m == cert.k + 1 {
        Ok(delta_operator(cert))
    } else {
        anchor(&cert.field, cert.k, cert.n, m)
    }
}

/// `J_H(f)(X) = Σ α_M f(S·M·S⁻¹·X)` where `S` maps `span(e_1..e_k)` onto `H`.
pub fn build_jh(cert: &ThetaCertificate, h: &Subspace, m: usize) -> Result<MinorOperator> {
    check_jh_inputs(cert, h, m)?;
    let op = jh_unchecked(&jh_base(cert, m)?, h)?;
    Certificate::checked(op, cert.k, Scope::Fiber(h.clone()), Provenance::Constructive)
        .map(|c| c.op)
}

/// `J_k = Σ_{dim H = k} J_H`: on functions supported on rank `≥ k` it keeps
/// exactly the rank-`k` locus.
pub fn build_jn(cert: &ThetaCertificate, m: usize) -> Result<MinorOperator> {
    let k = cert.k;
    if m < k + 1 {
        return Err(Error::DimMismatch(format!("need m ≥ {}, got {m}", k + 1)));
    }
    let base = jh_base(cert, m)?;
    let mut acc = MinorOperator::zero(&cert.field, m, cert.n);
    for h in enumerate_subspaces(&cert.field, m, k)? {
        acc = op_add(&acc, &jh_unchecked(&base, &h)?)?;
        check_terms(&acc)?;
    }
    acc.rank_bound = k;
    Certificate::checked(acc, k, Scope::RankLocus(k), Provenance::Constructive).map(|c| c.op)
}

/// Identity on all of `O^{(k+1)}_{F^k → Z/N}` with rank bound `k`:
/// `I = J + J_k − J_k∘J` where `J` is the dimension-`(k−1)` certificate at
/// arity `k+1`, used unchanged on `F^k`-valued arguments.
pub fn build_level_certificate(field: &Field, k: usize, n: u64) -> Result<Arc<Certificate>> {
    build_arity_certificate(field, k, n, k + 1)
}

fn level_uncached(field: &Field, k: usize, n: u64) -> Result<Certificate> {
    check_setting(field, n)?;
    if k == 0 {
        let op = MinorOperator::from_parts_unchecked(field, 1, n, 0, [(0, 1)]);
        return Certificate::checked(op, 0, Scope::FullLevel, Provenance::Constructive);
    }
    let j = build_arity_certificate(field, k - 1, n, k + 1)?;
    let theta = theta_certificate(field, k, n)?;
    let jk = build_jn(&theta, k + 1)?;
    let mut op = op_sub(&op_add(&j.op, &jk)?, &op_compose(&jk, &j.op)?)?;
    op.rank_bound = k;
    check_terms(&op)?;
    Certificate::checked(op, k, Scope::FullLevel, Provenance::Constructive)
}

/// Identity on all of `O^{(m)}_{F^j → Z/N}` with every term of rank `≤ j`, memoized per `(j, m)`.
///
/// From arity `m−1` to `m`: each term `M` becomes `diag(M, 1)`; a lifted term
/// `R = P·Q` of rank `j+1` is then expanded as `{P·N·Q : λ_N}` over the level
/// certificate of dimension `j`.
pub fn build_arity_certificate(field: &Field, j: usize, n: u64, m: usize) -> Result<Arc<Certificate>> {
    if m < j + 1 {
        return Err(Error::DimMismatch(format!("arity {m} below {}", j + 1)));
    }
    let key = key(field, j, n, m);
    if let Some(c) = arity_cache().lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let cert = if m == j + 1 {
        level_uncached(field, j, n)?
    } else {
        lift_uncached(field, j, n, m)?
    };
    Ok(arity_cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert(Arc::new(cert))
        .clone())
}

fn lift_uncached(field: &Field, j: usize, n: u64, m: usize) -> Result<Certificate> {
    let prev = build_arity_certificate(field, j, n, m - 1)?;
    let level = build_level_certificate(field, j, n)?;
    let level_terms = level.op.matrices();
    let mut terms: Vec<(u64, u64)> = Vec::new();
    for (mt, a) in prev.op.matrices() {
        let mut r = Mat::zeros(field, m, m);
        for x in 0..m - 1 {
            for y in 0..m - 1 {
                r.set(x, y, mt.get(x, y));
            }
        }
        r.set(m - 1, m - 1, 1);
        let (p, qm) = r.rank_factorize();
        if p.cols <= j {
            terms.push((r.code(), a));
            continue;
        }
        if terms.len() + level_terms.len() > super::operator::COMPOSE_BUDGET as usize {
            return Err(Error::BudgetExceeded(format!("lifting to arity {m}")));
        }
        for (nt, l) in &level_terms {
            terms.push((p.mul(nt).mul(&qm).code(), crate::scalars::zn::mul_mod(a, *l, n)));
        }
    }
    let op = MinorOperator::from_parts_unchecked(field, m, n, j, terms);
    check_terms(&op)?;
    Certificate::checked(op, j, Scope::FullLevel, Provenance::Constructive)
}

/// `I_i` at arity `m` for functions on `F^k`: fixes `f` on every point of rank `≤ i`.
pub fn build_ii(field: &Field, k: usize, n: u64, i: usize, m: usize) -> Result<MinorOperator> {
    if i > k {
        return Err(Error::DimMismatch(format!("i = {i} exceeds k = {k}")));
    }
    check_setting(field, n)?;
    let op = if m > i {
        build_arity_certificate(field, i, n, m)?.op.clone()
    } else {
        MinorOperator::identity(field, m, n)
    };
    Certificate::checked(op, k, Scope::RankAtMost(i), Provenance::Constructive).map(|c| c.op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{delta, ModuleSpec};
    use crate::linalg::{enumerate, RankFilter};
    use crate::scalars::field_make;
    use crate::unifgen::op_apply;

    #[test]
    fn level_zero_is_constant() {
        let f = field_make(2, 1).unwrap();
        let c = build_level_certificate(&f, 0, 3).unwrap();
        assert_eq!(c.op.terms(), &[(0, 1)]);
    }

    #[test]
    fn level_certificates_verify() {
        for (p, k, n) in [(2, 1, 3), (3, 1, 2), (2, 2, 3), (3, 2, 2)] {
            let f = field_make(p, 1).unwrap();
            let c = build_level_certificate(&f, k, n).unwrap();
            assert_eq!(c.op.arity, k + 1);
            assert!(c.op.max_rank().unwrap() <= k);
            c.verify().unwrap();
        }
    }

    #[test]
    fn level_one_on_every_table() {
        // all 3^4 functions F_2^2 → Z/3 are fixed
        let f = field_make(2, 1).unwrap();
        let b = ModuleSpec::cyclic(3).unwrap();
        let c = build_level_certificate(&f, 1, 3).unwrap();
        for code in 0..81u64 {
            let g = crate::funcspace::FuncTable::from_fn(&f, 1, 2, &b, |x| {
                vec![(code / 3u64.pow(x as u32)) % 3]
            })
            .unwrap();
            assert_eq!(op_apply(&c.op, &g).unwrap(), g);
        }
    }

    #[test]
    fn arity_certificates_verify() {
        let f = field_make(2, 1).unwrap();
        let c = build_arity_certificate(&f, 1, 3, 3).unwrap();
        assert!(c.op.max_rank().unwrap() <= 1);
        c.verify().unwrap();
        let c = build_arity_certificate(&f, 2, 3, 4).unwrap();
        assert!(c.op.len() <= 1 << 16);
        assert!(c.op.max_rank().unwrap() <= 2);
        c.verify().unwrap();
    }

    #[test]
    fn jh_contract_q2_k1_m2() {
        let f = field_make(2, 1).unwrap();
        let b = ModuleSpec::cyclic(3).unwrap();
        let theta = theta_certificate(&f, 1, 3).unwrap();
        let x0 = Mat::anchor(&f, 2, 1);
        let h0 = colspace(&x0);
        let j = build_jh(&theta, &h0, 2).unwrap();
        let d = delta(&x0, &[1], 1, &b).unwrap();
        assert_eq!(op_apply(&j, &d).unwrap(), d);
        for h in enumerate_subspaces(&f, 2, 1).unwrap() {
            let jh = build_jh(&theta, &h, 2).unwrap();
            for z in enumerate(&f, (2, 1), RankFilter::Exactly(1), 16).unwrap() {
                let out = op_apply(&jh, &delta(&z, &[1], 1, &b).unwrap()).unwrap();
                if colspace(&z) == h {
                    assert_eq!(out, delta(&z, &[1], 1, &b).unwrap());
                } else {
                    assert!(out.is_zero());
                }
            }
        }
    }

    #[test]
    fn jn_sums_three_subspaces() {
        let f = field_make(2, 1).unwrap();
        let theta = theta_certificate(&f, 1, 3).unwrap();
        assert_eq!(enumerate_subspaces(&f, 2, 1).unwrap().len(), 3);
        let jn = build_jn(&theta, 2).unwrap();
        assert!(jn.max_rank().unwrap() <= 1);
        // arity 3: rank-1 locus picked out of F^{3×1}
        let jn3 = build_jn(&theta, 3).unwrap();
        assert_eq!(verify_scope(&jn3, 1, &Scope::RankLocus(1)), Vec::<u64>::new());
    }

    #[test]
    fn jh_dimension_checked() {
        let f = field_make(2, 1).unwrap();
        let theta = theta_certificate(&f, 1, 3).unwrap();
        let full = Subspace::full(&f, 2);
        assert!(matches!(build_jh(&theta, &full, 2), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn ii_examples() {
        let f = field_make(2, 1).unwrap();
        let i0 = build_ii(&f, 2, 3, 0, 3).unwrap();
        assert_eq!(i0.terms(), &[(0, 1)]);
        let i1 = build_ii(&f, 2, 3, 1, 3).unwrap();
        let low: Vec<Mat> = enumerate(&f, (3, 2), RankFilter::AtMost(1), 64).unwrap().collect();
        assert_eq!(low.len(), 22);
        assert!(i1.max_rank().unwrap() <= 1);
        let i2 = build_ii(&f, 2, 3, 2, 3).unwrap();
        assert_eq!(i2, build_level_certificate(&f, 2, 3).unwrap().op);
    }

    #[test]
    fn anchor_at_level_arity_is_delta_certificate() {
        for (p, k, n) in [(2, 1, 3), (2, 2, 3), (3, 1, 2)] {
            let f = field_make(p, 1).unwrap();
            let a = anchor(&f, k, n, k + 1).unwrap();
            let theta = theta_certificate(&f, k, n).unwrap();
            assert_eq!(a.terms(), delta_operator(&theta).terms());
        }
    }
}
