use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Element code in `0..q`. For prime fields this is the residue; for
/// extensions it is the base-`p` digit vector of the polynomial
/// representative (coefficient of `x^i` is digit `i`).
pub type FieldElem = u8;

pub const SUPPORTED_ORDERS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

/// Finite field GF(p^e) with full lookup tables.
pub struct FieldSpec {
    pub p: u64,
    pub e: u32,
    pub q: usize,
    /// Monic modulus, lowest degree first, length `e + 1`. `[0, 1]` for prime fields.
    pub modulus: Vec<u8>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

pub type Field = Arc<FieldSpec>;

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}
impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn default_modulus(p: u64, e: u32) -> Vec<u8> {
    match (p, e) {
        (_, 1) => vec![0, 1],
        (2, 2) => vec![1, 1, 1],
        (2, 3) => vec![1, 1, 0, 1],
        (3, 2) => vec![1, 0, 1],
        (2, 4) => vec![1, 1, 0, 0, 1],
        _ => unreachable!("order checked by caller"),
    }
}

fn digits(code: usize, p: usize, e: usize) -> Vec<usize> {
    let mut c = code;
    (0..e)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

fn from_digits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p).
fn poly_rem(a: &[usize], m: &[usize], p: usize) -> Vec<usize> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r[r.len() - 1] % p;
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Exhaustive factor search: no monic polynomial of degree 1..=deg/2 divides `m`.
fn is_irreducible(m: &[usize], p: usize) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g = digits(code, p, d);
            g.push(1);
            if poly_rem(m, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

pub fn field_make(p: u64, e: u32) -> Result<Field> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let q = p.checked_pow(e).ok_or(Error::UnsupportedOrder(u64::MAX))?;
    if e == 0 || !SUPPORTED_ORDERS.contains(&q) {
        return Err(Error::UnsupportedOrder(q));
    }
    let (pu, eu, qu) = (p as usize, e as usize, q as usize);
    let modulus = default_modulus(p, e);
    let m: Vec<usize> = modulus.iter().map(|&c| c as usize).collect();
    if e > 1 && !is_irreducible(&m, pu) {
        return Err(Error::UnsupportedOrder(q));
    }
    let mut add = vec![0u8; qu * qu];
    let mut mul = vec![0u8; qu * qu];
    for a in 0..qu {
        let da = digits(a, pu, eu);
        for b in 0..qu {
            let db = digits(b, pu, eu);
            let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % pu).collect();
            add[a * qu + b] = from_digits(&s, pu) as u8;
            let prod = if e == 1 {
                vec![a * b % pu]
            } else {
                let mut pr = vec![0usize; 2 * eu - 1];
                for i in 0..eu {
                    for j in 0..eu {
                        pr[i + j] = (pr[i + j] + da[i] * db[j]) % pu;
                    }
                }
                poly_rem(&pr, &m, pu)
            };
            mul[a * qu + b] = from_digits(&prod, pu) as u8;
        }
    }
    let mut neg = vec![0u8; qu];
    let mut inv = vec![0u8; qu];
    for a in 0..qu {
        for b in 0..qu {
            if add[a * qu + b] == 0 {
                neg[a] = b as u8;
            }
            if mul[a * qu + b] == 1 {
                inv[a] = b as u8;
            }
        }
    }
    Ok(Arc::new(FieldSpec {
        p,
        e,
        q: qu,
        modulus,
        add,
        mul,
        neg,
        inv,
    }))
}

impl FieldSpec {
    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
    pub fn try_inv(&self, a: u8) -> Option<u8> {
        (a != 0).then(|| self.inv[a as usize])
    }
    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.q as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_fields_basic() {
        let f = field_make(2, 1).unwrap();
        assert_eq!(f.add(1, 1), 0);
        let f = field_make(3, 1).unwrap();
        assert_eq!(f.inv(2), 2);
    }

    #[test]
    fn gf4_generator_square() {
        let f = field_make(2, 2).unwrap();
        assert_eq!(f.mul(2, 2), f.add(2, 1));
    }

    #[test]
    fn rejects_bad_orders() {
        assert_eq!(field_make(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(field_make(2, 5).unwrap_err(), Error::UnsupportedOrder(32));
        assert_eq!(field_make(17, 1).unwrap_err(), Error::UnsupportedOrder(17));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for &q in &SUPPORTED_ORDERS {
            let (p, e) = match q {
                4 => (2, 2),
                8 => (2, 3),
                9 => (3, 2),
                16 => (2, 4),
                _ => (q, 1),
            };
            let f = field_make(p, e).unwrap();
            assert_eq!(f.q as u64, q);
            let els: Vec<u8> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if a != 0 && b != 0 {
                        assert_ne!(f.mul(a, b), 0);
                    }
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            // characteristic p
            let mut s = 0u8;
            for _ in 0..p {
                s = f.add(s, 1);
            }
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn reducible_modulus_detected() {
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 has no roots but is reducible
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
    }
}
