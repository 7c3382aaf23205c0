//! θ-spaces, type labeling, the alternating coefficient identity for
//! `δ_{X0}` and its minor-form certificate.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_budget, colspace, Mat, Subspace, DEFAULT_BUDGET};
use crate::scalars::zn::{mul_mod, neg_mod, pow_mod};
use crate::scalars::{zn_inv, Field, FieldElem, RingSpec};

/// `θ(X, a) = {X + a·uᵀ : u ∈ F^k}`, keyed by its smallest member and
/// the direction scaled to leading coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaSpace {
    pub base: Mat,
    pub direction: Vec<FieldElem>,
    pub members: Vec<u64>,
}

impl ThetaSpace {
    pub fn key(&self) -> (u64, Vec<FieldElem>) {
        (self.members[0], self.direction.clone())
    }

    pub fn contains_code(&self, code: u64) -> bool {
        self.members.binary_search(&code).is_ok()
    }
}

/// Scales a nonzero vector so its first nonzero entry is 1.
pub fn normalize_direction(field: &Field, a: &[FieldElem]) -> Vec<FieldElem> {
    let lead = a.iter().copied().find(|&x| x != 0).unwrap_or(1);
    let inv = field.inv(lead);
    a.iter().map(|&x| field.mul(x, inv)).collect()
}

fn all_vectors(field: &Field, len: usize) -> Vec<Vec<FieldElem>> {
    let total = field.q.pow(len as u32) as u64;
    (0..total)
        .map(|c| crate::linalg::vec_from_code(field.q, len, c))
        .collect()
}

pub fn theta_members(x: &Mat, a: &[FieldElem]) -> Result<ThetaSpace> {
    let k = x.cols;
    if x.rows != k + 1 || a.len() != k + 1 {
        return Err(Error::ShapeMismatch("θ-space base must be (k+1)×k".into()));
    }
    if x.rank() != k {
        return Err(Error::NotFullRank);
    }
    if a.iter().all(|&v| v == 0) || colspace(x).contains(a) {
        return Err(Error::DirectionInColumnSpace);
    }
    let field = x.field.clone();
    let mut members: Vec<u64> = all_vectors(&field, k)
        .iter()
        .map(|u| x.add(&Mat::outer(&field, a, u)).code())
        .collect();
    members.sort_unstable();
    Ok(ThetaSpace {
        base: Mat::from_code(&field, k + 1, k, members[0]),
        direction: normalize_direction(&field, a),
        members,
    })
}

/// The `k × (k+1)` matrix with `M·X = Id_k` exactly for `X ∈ V`.
pub fn mv_matrix(v: &ThetaSpace) -> Mat {
    let field = v.base.field.clone();
    let k = v.base.cols;
    let col = Mat::from_columns(&field, k + 1, std::slice::from_ref(&v.direction));
    let y = v.base.hstack(&col);
    let yinv = y.inverse().expect("base and direction span F^(k+1)");
    let proj = Mat::anchor(&field, k + 1, k).transpose();
    let m = proj.mul(&yinv);
    debug_assert!(v
        .members
        .iter()
        .all(|&c| m.mul(&Mat::from_code(&field, k + 1, k, c)) == Mat::identity(&field, k)));
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeRecord {
    pub n: usize,
    /// `C(X_0) ∩ … ∩ C(X_{n−1})`, with `J = F^{k+1}` for type 0.
    pub j: Subspace,
    /// `⟨u_1, …, u_n⟩`.
    pub s: Subspace,
}

#[derive(Clone, Debug)]
pub struct TypeLabeling {
    pub field: Field,
    pub k: usize,
    pub labels: HashMap<u64, TypeRecord>,
    /// Edges that reached an already-labeled matrix and re-derived the same record.
    pub rederivations: usize,
}

impl TypeLabeling {
    pub fn get(&self, code: u64) -> Option<&TypeRecord> {
        self.labels.get(&code)
    }

    /// `|T_n|` for `n = 0..=k`.
    pub fn type_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k + 1];
        for r in self.labels.values() {
            c[r.n] += 1;
        }
        c
    }

    pub fn of_type(&self, n: usize) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .labels
            .iter()
            .filter(|(_, r)| r.n == n)
            .map(|(&c, _)| c)
            .collect();
        v.sort_unstable();
        v
    }
}

/// Breadth-first type labeling starting from `X0 = [Id_k; 0]`.
pub fn label_types(field: &Field, k: usize) -> Result<TypeLabeling> {
    check_budget(field.q, k + 1, k, DEFAULT_BUDGET)?;
    let x0 = Mat::anchor(field, k + 1, k);
    let mut labels: HashMap<u64, TypeRecord> = HashMap::new();
    labels.insert(
        x0.code(),
        TypeRecord {
            n: 0,
            j: Subspace::full(field, k + 1),
            s: Subspace::zero(field, k),
        },
    );
    let mut queue = VecDeque::from([x0.clone()]);
    let mut rederivations = 0;
    let us = all_vectors(field, k);
    while let Some(x) = queue.pop_front() {
        let rec = labels[&x.code()].clone();
        if rec.n == k {
            continue;
        }
        let cx = colspace(&x);
        let j_next = rec.j.intersect(&cx)?;
        let mut dirs: Vec<Vec<FieldElem>> = rec
            .j
            .elements()
            .into_iter()
            .filter(|a| !cx.contains(a))
            .collect();
        dirs.sort();
        for a in &dirs {
            for u in us.iter().filter(|u| !rec.s.contains(u)) {
                let child = x.add(&Mat::outer(field, a, u));
                if child.sub(&x0).rank() != rec.n + 1 {
                    continue;
                }
                let s_next = rec.s.sum(&Subspace::span(field, k, std::slice::from_ref(u)))?;
                let new = TypeRecord {
                    n: rec.n + 1,
                    j: j_next.clone(),
                    s: s_next,
                };
                let code = child.code();
                match labels.get(&code) {
                    Some(old) if *old == new => rederivations += 1,
                    Some(_) => return Err(Error::CanonicityViolation(code)),
                    None => {
                        labels.insert(code, new);
                        queue.push_back(child);
                    }
                }
            }
        }
    }
    Ok(TypeLabeling {
        field: field.clone(),
        k,
        labels,
        rederivations,
    })
}

/// `Θ_n`: all θ-spaces `θ(X, a)` with `X` of type n and
/// `a ∈ J(X) \ C(X)`, deduplicated as sets.
pub fn enumerate_theta(labeling: &TypeLabeling, n: usize) -> Result<Vec<ThetaSpace>> {
    let field = &labeling.field;
    let k = labeling.k;
    let mut out: BTreeMap<(u64, Vec<FieldElem>), ThetaSpace> = BTreeMap::new();
    for code in labeling.of_type(n) {
        let rec = &labeling.labels[&code];
        let x = Mat::from_code(field, k + 1, k, code);
        let cx = colspace(&x);
        for a in rec.j.elements() {
            if cx.contains(&a) || normalize_direction(field, &a) != a {
                continue;
            }
            let v = theta_members(&x, &a)?;
            out.entry(v.key()).or_insert(v);
        }
    }
    Ok(out.into_values().collect())
}

/// `α_0 = q^{−k}`, `α_i = −α_{i−1}·q^{i−k}` modulo N.
pub fn coefficients(q: u64, k: usize, n: u64) -> Result<Vec<u64>> {
    let qinv = zn_inv(q % n, n).map_err(|_| Error::NotCoprime { n, p: q })?;
    let mut alpha = vec![pow_mod(qinv, k as u64, n)];
    for i in 1..=k {
        let step = pow_mod(qinv, (k - i) as u64, n);
        alpha.push(neg_mod(mul_mod(alpha[i - 1], step, n), n));
    }
    Ok(alpha)
}

/// `(−1)^i q^e mod N` for a possibly negative exponent `e`.
fn signed_power(q: u64, i: usize, e: i64, n: u64) -> u64 {
    let base = if e >= 0 {
        pow_mod(q, e as u64, n)
    } else {
        pow_mod(zn_inv(q % n, n).expect("coprime"), (-e) as u64, n)
    };
    if i % 2 == 1 {
        neg_mod(base, n)
    } else {
        base
    }
}

/// `(−1)^i q^{i(i+1)/2 − (1+i)k}`.
pub fn closed_form_triangular(q: u64, k: usize, n: u64) -> Vec<u64> {
    (0..=k)
        .map(|i| {
            let e = (i * (i + 1) / 2) as i64 - ((1 + i) * k) as i64;
            signed_power(q, i, e, n)
        })
        .collect()
}

/// `(−1)^i q^{C(i,2) − (1+i)k}`.
pub fn closed_form_binomial(q: u64, k: usize, n: u64) -> Vec<u64> {
    (0..=k)
        .map(|i| {
            let e = (i * i.saturating_sub(1) / 2) as i64 - ((1 + i) * k) as i64;
            signed_power(q, i, e, n)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ThetaReport {
    pub q: u64,
    pub k: usize,
    pub n: u64,
    pub alpha: Vec<u64>,
    pub type_counts: Vec<usize>,
    pub untyped: usize,
    pub untyped_full_rank: usize,
    pub theta_counts: Vec<usize>,
    pub points_checked: usize,
    /// Codes where the identity fails.
    pub counterexamples: Vec<u64>,
    /// Codes where the θ-space incidence counts differ from 1 / q^{k−n} / 0.
    pub incidence_failures: Vec<u64>,
    pub triangular_form_matches: bool,
    pub binomial_form_matches: bool,
    pub rederivations: usize,
}

impl ThetaReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.incidence_failures.is_empty()
    }
}

pub struct ThetaData {
    pub labeling: TypeLabeling,
    pub thetas: Vec<Vec<ThetaSpace>>,
    pub alpha: Vec<u64>,
}

pub fn theta_data(field: &Field, k: usize, n: u64) -> Result<ThetaData> {
    RingSpec::new(n)?.check_coprime(field.p)?;
    let labeling = label_types(field, k)?;
    let thetas = (0..=k)
        .map(|t| enumerate_theta(&labeling, t))
        .collect::<Result<Vec<_>>>()?;
    let alpha = coefficients(field.q as u64, k, n)?;
    Ok(ThetaData {
        labeling,
        thetas,
        alpha,
    })
}

/// Checks `δ_{X0}(X) = Σ_n α_n Σ_{V ∈ Θ_n} δ_V(X)` at every `X ∈ F^{(k+1)×k}`.
pub fn verify_identity(field: &Field, k: usize, n: u64) -> Result<ThetaReport> {
    let data = theta_data(field, k, n)?;
    Ok(report_from(field, k, n, &data))
}

pub fn report_from(field: &Field, k: usize, n: u64, data: &ThetaData) -> ThetaReport {
    let q = field.q as u64;
    let total = (q as usize).pow(((k + 1) * k) as u32);
    // incidence[X][t] = number of V ∈ Θ_t containing X
    let mut incidence = vec![vec![0u64; k + 1]; total];
    for (t, list) in data.thetas.iter().enumerate() {
        for v in list {
            for &c in &v.members {
                incidence[c as usize][t] += 1;
            }
        }
    }
    let x0 = Mat::anchor(field, k + 1, k).code();
    let alpha = &data.alpha;
    let counterexamples: Vec<u64> = (0..total)
        .into_par_iter()
        .filter(|&c| {
            let rhs = incidence[c]
                .iter()
                .zip(alpha)
                .fold(0u64, |acc, (&cnt, &a)| (acc + mul_mod(cnt % n, a, n)) % n);
            let lhs = u64::from(c as u64 == x0) % n;
            lhs != rhs
        })
        .map(|c| c as u64)
        .collect();
    let incidence_failures: Vec<u64> = (0..total)
        .filter(|&c| {
            let expected: Vec<u64> = match data.labeling.get(c as u64) {
                None => vec![0; k + 1],
                Some(r) if r.n == 0 => {
                    let mut e = vec![0; k + 1];
                    e[0] = q.pow(k as u32);
                    e
                }
                Some(r) => {
                    let mut e = vec![0; k + 1];
                    e[r.n - 1] = 1;
                    e[r.n] = q.pow((k - r.n) as u32);
                    e
                }
            };
            incidence[c] != expected
        })
        .map(|c| c as u64)
        .collect();
    let untyped_codes: Vec<u64> = (0..total as u64)
        .filter(|c| data.labeling.get(*c).is_none())
        .collect();
    let untyped_full_rank = untyped_codes
        .iter()
        .filter(|&&c| Mat::from_code(field, k + 1, k, c).rank() == k)
        .count();
    ThetaReport {
        q,
        k,
        n,
        alpha: alpha.clone(),
        type_counts: data.labeling.type_counts(),
        untyped: untyped_codes.len(),
        untyped_full_rank,
        theta_counts: data.thetas.iter().map(|t| t.len()).collect(),
        points_checked: total,
        counterexamples,
        incidence_failures,
        triangular_form_matches: closed_form_triangular(q, k, n) == *alpha,
        binomial_form_matches: closed_form_binomial(q, k, n) == *alpha,
        rederivations: data.labeling.rederivations,
    }
}

/// Minor form `δ_{X0}(X) = Σ α_M δ_{X0}(M·X)` with `M = X0·M_V`.
#[derive(Clone, Debug)]
pub struct ThetaCertificate {
    pub field: Field,
    pub k: usize,
    pub n: u64,
    pub alpha: Vec<u64>,
    pub thetas: Vec<Vec<ThetaSpace>>,
    /// `(X0·M_V, α_{type(V)})`, sorted by matrix code.
    pub terms: Vec<(Mat, u64)>,
}

impl ThetaCertificate {
    pub fn theta_counts(&self) -> Vec<usize> {
        self.thetas.iter().map(|t| t.len()).collect()
    }

    /// Exhaustive check of the minor form at every `X ∈ F^{(k+1)×k}`.
    pub fn check(&self) -> Vec<u64> {
        check_delta_terms(&self.field, self.k, self.n, &self.terms)
    }
}

/// Points where `δ_{X0}(X) ≠ Σ α_M δ_{X0}(M·X)`.
pub fn check_delta_terms(field: &Field, k: usize, n: u64, terms: &[(Mat, u64)]) -> Vec<u64> {
    let total = (field.q as u64).pow(((k + 1) * k) as u32);
    let x0 = Mat::anchor(field, k + 1, k);
    let x0c = x0.code();
    (0..total)
        .into_par_iter()
        .filter(|&c| {
            let x = Mat::from_code(field, k + 1, k, c);
            let rhs = terms.iter().fold(0u64, |acc, (m, a)| {
                if m.mul(&x) == x0 {
                    (acc + a) % n
                } else {
                    acc
                }
            });
            rhs != u64::from(c == x0c) % n
        })
        .collect()
}

pub fn certificate_delta(field: &Field, k: usize, n: u64) -> Result<ThetaCertificate> {
    let data = theta_data(field, k, n)?;
    let report = report_from(field, k, n, &data);
    if !report.passed() {
        return Err(Error::IdentityFailed(format!(
            "{} counterexamples, {} incidence failures",
            report.counterexamples.len(),
            report.incidence_failures.len()
        )));
    }
    let x0 = Mat::anchor(field, k + 1, k);
    let mut acc: BTreeMap<u64, u64> = BTreeMap::new();
    for (t, list) in data.thetas.iter().enumerate() {
        for v in list {
            let m = x0.mul(&mv_matrix(v));
            let e = acc.entry(m.code()).or_insert(0);
            *e = (*e + data.alpha[t]) % n;
        }
    }
    let terms: Vec<(Mat, u64)> = acc
        .into_iter()
        .filter(|&(_, a)| a != 0)
        .map(|(c, a)| (Mat::from_code(field, k + 1, k + 1, c), a))
        .collect();
    let cert = ThetaCertificate {
        field: field.clone(),
        k,
        n,
        alpha: data.alpha,
        thetas: data.thetas,
        terms,
    };
    let bad = cert.check();
    if !bad.is_empty() {
        return Err(Error::IdentityFailed(format!("minor form fails at code {}", bad[0])));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::field_make;

    #[test]
    fn members_example() {
        let f = field_make(2, 1).unwrap();
        let x0 = Mat::anchor(&f, 2, 1);
        let v = theta_members(&x0, &[0, 1]).unwrap();
        let expect: Vec<u64> = vec![
            Mat::from_rows(&f, &[vec![1], vec![0]]).unwrap().code(),
            Mat::from_rows(&f, &[vec![1], vec![1]]).unwrap().code(),
        ];
        assert_eq!(v.members, expect);
        assert_eq!(theta_members(&x0, &[1, 0]).unwrap_err(), Error::DirectionInColumnSpace);
        assert_eq!(
            theta_members(&Mat::zeros(&f, 2, 1), &[0, 1]).unwrap_err(),
            Error::NotFullRank
        );
        let m = mv_matrix(&v);
        assert_eq!(m, Mat::from_rows(&f, &[vec![1, 0]]).unwrap());
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficients(2, 1, 3).unwrap(), vec![2, 1]);
        assert_eq!(coefficients(3, 1, 2).unwrap(), vec![1, 1]);
        assert!(coefficients(2, 2, 4).is_err());
        for (q, k, n) in [(2u64, 2usize, 3u64), (3, 2, 2), (2, 3, 5), (4, 1, 3)] {
            let a = coefficients(q, k, n).unwrap();
            assert_eq!(mul_mod(pow_mod(q, k as u64, n), a[0], n), 1);
            for i in 1..=k {
                let s = (a[i - 1] + mul_mod(pow_mod(q, (k - i) as u64, n), a[i], n)) % n;
                assert_eq!(s, 0);
            }
            assert_eq!(closed_form_triangular(q, k, n), a);
        }
    }

    #[test]
    fn binomial_closed_form_disagrees_at_one() {
        // (−1)·2^{0−2} vs (−1)·2^{1−2} modulo 3
        assert_ne!(closed_form_binomial(2, 1, 3), coefficients(2, 1, 3).unwrap());
    }

    #[test]
    fn small_labelings() {
        let f = field_make(2, 1).unwrap();
        let l = label_types(&f, 1).unwrap();
        assert_eq!(l.type_counts(), vec![1, 2]);
        assert!(l.get(0).is_none());
        assert_eq!(enumerate_theta(&l, 0).unwrap().len(), 2);
        assert_eq!(enumerate_theta(&l, 1).unwrap().len(), 1);

        let l = label_types(&f, 2).unwrap();
        assert_eq!(l.type_counts(), vec![1, 12, 24]);
        let report = verify_identity(&f, 2, 3).unwrap();
        assert_eq!(report.untyped_full_rank, 5);
        assert!(report.passed());
        for (code, rec) in &l.labels {
            assert_eq!(rec.j.dim(), if rec.n == 0 { 3 } else { 2 - rec.n + 1 });
            assert_eq!(rec.s.dim(), rec.n);
            let _ = code;
        }
    }

    #[test]
    fn delta_certificate_small() {
        let f = field_make(2, 1).unwrap();
        let c = certificate_delta(&f, 1, 3).unwrap();
        assert_eq!(c.terms.len(), 3);
        let cx0 = colspace(&Mat::anchor(&f, 2, 1));
        for (m, _) in &c.terms {
            assert_eq!(m.rank(), 1);
            assert_eq!(colspace(m), cx0);
        }
    }

    #[test]
    fn coprimality_gate() {
        let f = field_make(2, 1).unwrap();
        assert_eq!(
            verify_identity(&f, 2, 2).unwrap_err(),
            Error::NotCoprime { n: 2, p: 2 }
        );
    }
}
