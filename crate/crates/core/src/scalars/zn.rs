use crate::error::{Error, Result};

/// Largest supported modulus; keeps products of residues inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingSpec {
    pub n: u64,
    pub factorization: Vec<(u64, u32)>,
}

impl RingSpec {
    pub fn new(n: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&n) {
            return Err(Error::InvalidModule(format!("modulus {n} out of range")));
        }
        Ok(RingSpec {
            n,
            factorization: factorize(n),
        })
    }

    /// Checks the coprimality gate against a field characteristic.
    pub fn check_coprime(&self, p: u64) -> Result<()> {
        if self.n.is_multiple_of(p) {
            return Err(Error::NotCoprime { n: self.n, p });
        }
        Ok(())
    }

    pub fn prime_powers(&self) -> Vec<u64> {
        self.factorization.iter().map(|&(p, a)| p.pow(a)).collect()
    }
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut a = 0;
            while n.is_multiple_of(d) {
                n /= d;
                a += 1;
            }
            out.push((d, a));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Returns `(g, s, t)` with `s·a + t·b = g = gcd(a, b)`.
pub fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (s0, s1) = (s1, s0 - qt * s1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

#[inline]
pub fn reduce(x: i128, n: u64) -> u64 {
    x.rem_euclid(n as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    let s = a + b;
    if s >= n {
        s - n
    } else {
        s
    }
}

#[inline]
pub fn neg_mod(a: u64, n: u64) -> u64 {
    if a == 0 {
        0
    } else {
        n - a
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut r = 1 % n;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, n);
        }
        b = mul_mod(b, b, n);
        e >>= 1;
    }
    r
}

pub fn zn_inv(x: u64, n: u64) -> Result<u64> {
    let (g, s, _) = xgcd((x % n) as i128, n as i128);
    if g != 1 {
        return Err(Error::NotInvertible { x, n });
    }
    Ok(reduce(s, n))
}

/// A unit `u` with `u·a ≡ gcd(a, n) (mod n)`.
pub fn unit_normalizer(a: u64, n: u64) -> u64 {
    let a = a % n;
    if a == 0 {
        return 1 % n;
    }
    let g = gcd(a, n);
    let n1 = n / g;
    let base = if n1 == 1 { 0 } else { zn_inv(a / g, n1).expect("coprime cofactor") };
    let mut u = base;
    loop {
        if gcd(u, n) == 1 {
            return u;
        }
        u += n1;
    }
}

/// Combines residues `x ≡ r_i (mod m_i)` for pairwise coprime moduli.
pub fn crt(residues: &[u64], moduli: &[u64]) -> u64 {
    let mut x = 0u64;
    let mut m = 1u64;
    for (&r, &mi) in residues.iter().zip(moduli) {
        // x + m·t ≡ r (mod mi)
        let inv = zn_inv(m % mi, mi).expect("pairwise coprime moduli");
        let t = mul_mod((r + mi - x % mi) % mi, inv, mi);
        x += m * t;
        m *= mi;
    }
    x
}

/// p-adic valuation of a nonzero residue modulo p^a (capped at a).
pub fn valuation(mut x: u64, p: u64, a: u32) -> u32 {
    if x == 0 {
        return a;
    }
    let mut v = 0;
    while x.is_multiple_of(p) && v < a {
        x /= p;
        v += 1;
    }
    v
}
