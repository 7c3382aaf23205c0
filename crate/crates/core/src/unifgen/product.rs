use rayon::prelude::*;

use super::build::Certificate;
use super::operator::{row_digits, RowTable, Scope};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalars::zn::{add_mod, mul_mod};
use crate::scalars::{Field, RingSpec};

/// `f(X₁, X₂) = Σ α_M β_S f(M·X₁, S·X₂)` on `(F₁^{k₁} × F₂^{k₂})^m → Z/N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCertificate {
    pub field1: Field,
    pub field2: Field,
    pub k1: usize,
    pub k2: usize,
    pub arity: usize,
    pub modulus: u64,
    /// `(code(M), code(S), α_M·β_S)`.
    pub terms: Vec<(u64, u64, u64)>,
}

pub fn combine_product(c1: &Certificate, c2: &Certificate, modulus: u64) -> Result<ProductCertificate> {
    if c1.op.arity != c2.op.arity {
        return Err(Error::ArityMismatch(c1.op.arity, c2.op.arity));
    }
    let ring = RingSpec::new(modulus)?;
    ring.check_coprime(c1.op.field.p)?;
    ring.check_coprime(c2.op.field.p)?;
    for c in [c1, c2] {
        if c.op.modulus != modulus || c.scope != Scope::FullLevel {
            return Err(Error::SignatureMismatch(format!(
                "factor certificate must be full-level mod {modulus}, got {} mod {}",
                c.scope.tag(),
                c.op.modulus
            )));
        }
    }
    let terms = c1
        .op
        .terms()
        .iter()
        .flat_map(|&(m, a)| {
            c2.op
                .terms()
                .iter()
                .map(move |&(s, b)| (m, s, mul_mod(a, b, modulus)))
        })
        .filter(|t| t.2 != 0)
        .collect();
    let cert = ProductCertificate {
        field1: c1.op.field.clone(),
        field2: c2.op.field.clone(),
        k1: c1.k,
        k2: c2.k,
        arity: c1.op.arity,
        modulus,
        terms,
    };
    if let Some((x1, x2)) = cert.failures().first() {
        return Err(Error::VerificationFailed(format!(
            "product identity fails at point ({x1}, {x2})"
        )));
    }
    Ok(cert)
}

impl ProductCertificate {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of points of `(A₁ × A₂)^m`.
    pub fn points(&self) -> u64 {
        (self.field1.q as u64).pow((self.arity * self.k1) as u32)
            * (self.field2.q as u64).pow((self.arity * self.k2) as u32)
    }

    /// Exhaustive check of the identity on the δ-basis; returns failing points.
    pub fn failures(&self) -> Vec<(u64, u64)> {
        let m = self.arity;
        let n1 = (self.field1.q as u64).pow((m * self.k1) as u32);
        let n2 = (self.field2.q as u64).pow((m * self.k2) as u32);
        let d1: Vec<Vec<u32>> = self.terms.iter().map(|t| row_digits(t.0, self.field1.q, m)).collect();
        let d2: Vec<Vec<u32>> = self.terms.iter().map(|t| row_digits(t.1, self.field2.q, m)).collect();
        let n = self.modulus;
        (0..n1 * n2)
            .into_par_iter()
            .filter_map(|c| {
                let (c1, c2) = (c / n2, c % n2);
                let t1 = RowTable::new(&Mat::from_code(&self.field1, m, self.k1, c1));
                let t2 = RowTable::new(&Mat::from_code(&self.field2, m, self.k2, c2));
                let mut img: Vec<((u64, u64), u64)> = d1
                    .iter()
                    .zip(&d2)
                    .zip(&self.terms)
                    .map(|((a, b), t)| ((t1.apply(a), t2.apply(b)), t.2))
                    .collect();
                img.sort_unstable_by_key(|e| e.0);
                let mut acc: Vec<((u64, u64), u64)> = Vec::new();
                for (y, a) in img {
                    match acc.last_mut() {
                        Some(l) if l.0 == y => l.1 = add_mod(l.1, a, n),
                        _ => acc.push((y, a)),
                    }
                }
                acc.retain(|e| e.1 != 0);
                let ok = if n == 1 {
                    acc.is_empty()
                } else {
                    acc.len() == 1 && acc[0] == ((c1, c2), 1)
                };
                (!ok).then_some((c1, c2))
            })
            .collect()
    }
}

/// Smallest `m` with `size_r^m ≥ size_a`: the least arity a uniform minor
/// formula through `R` can have. Sizes below 2 give 0.
pub fn lower_bound(size_a: u64, size_r: u64) -> u32 {
    if size_a < 2 || size_r < 2 {
        return 0;
    }
    let mut m = 0u32;
    let mut pow = 1u128;
    while pow < size_a as u128 {
        pow *= size_r as u128;
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::field_make;
    use crate::unifgen::{build_arity_certificate, build_level_certificate};

    #[test]
    fn gf2_times_gf3() {
        let c1 = build_level_certificate(&field_make(2, 1).unwrap(), 1, 5).unwrap();
        let c2 = build_level_certificate(&field_make(3, 1).unwrap(), 1, 5).unwrap();
        let p = combine_product(&c1, &c2, 5).unwrap();
        assert_eq!(p.points(), 36);
        assert_eq!(p.len(), c1.op.len() * c2.op.len());
    }

    #[test]
    fn trivial_second_factor() {
        let c1 = build_level_certificate(&field_make(2, 1).unwrap(), 1, 5).unwrap();
        let c2 = build_arity_certificate(&field_make(3, 1).unwrap(), 0, 5, 2).unwrap();
        let p = combine_product(&c1, &c2, 5).unwrap();
        let got: Vec<(u64, u64)> = p.terms.iter().map(|t| (t.0, t.2)).collect();
        assert_eq!(got, c1.op.terms());
    }

    #[test]
    fn arity_mismatch() {
        let c1 = build_level_certificate(&field_make(2, 1).unwrap(), 1, 5).unwrap();
        let c2 = build_level_certificate(&field_make(3, 1).unwrap(), 2, 5).unwrap();
        assert_eq!(combine_product(&c1, &c2, 5).unwrap_err(), Error::ArityMismatch(2, 3));
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound(4, 2), 2);
        assert_eq!(lower_bound(8, 8), 1);
        assert_eq!(lower_bound(27, 3), 3);
        assert_eq!(lower_bound(28, 3), 4);
    }
}
