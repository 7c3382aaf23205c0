use super::howell::ZnMat;
use super::zn::{crt, factorize, mul_mod, pow_mod, valuation, zn_inv};
use crate::error::{Error, Result};

/// Dense-storage cap (entries) for the per-prime-power elimination.
pub const DENSE_BUDGET: usize = 1 << 27;

/// Linear system over Z/n given by sparse rows `(column, value)`.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub n: u64,
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, u64)>>,
    pub rhs: Vec<u64>,
}

impl SparseSystem {
    pub fn new(n: u64, ncols: usize) -> Self {
        SparseSystem {
            n,
            ncols,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<(usize, u64)>, rhs: u64) {
        self.rows.push(row);
        self.rhs.push(rhs % self.n);
    }

    /// Evaluates whether `x` satisfies every equation.
    pub fn check(&self, x: &[u64]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, &b)| {
            let s = row
                .iter()
                .fold(0u64, |acc, &(j, v)| (acc + mul_mod(v, x[j], self.n)) % self.n);
            s == b
        })
    }
}

/// Solves `A·x = b` over Z/N. Returns `None` exactly when no solution exists.
pub fn solve_zn(a: &ZnMat, b: &[u64]) -> Result<Option<Vec<u64>>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "{} right-hand sides for {} rows",
            b.len(),
            a.rows
        )));
    }
    let mut sys = SparseSystem::new(a.n, a.cols);
    for i in 0..a.rows {
        let row = a
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(j, &v)| (j, v))
            .collect();
        sys.push(row, b[i]);
    }
    solve_sparse(&sys)
}

/// Splits the modulus into prime powers, solves each block, recombines by CRT.
pub fn solve_sparse(sys: &SparseSystem) -> Result<Option<Vec<u64>>> {
    if sys.n == 1 {
        return Ok(Some(vec![0; sys.ncols]));
    }
    let mut parts = Vec::new();
    let mut moduli = Vec::new();
    for (p, a) in factorize(sys.n) {
        let pk = p.pow(a);
        let sol = if pk == 2 {
            solve_gf2(sys)
        } else if a == 1 {
            solve_prime(sys, p)?
        } else {
            solve_prime_power(sys, p, a)?
        };
        match sol {
            Some(x) => parts.push(x),
            None => return Ok(None),
        }
        moduli.push(pk);
    }
    let x = (0..sys.ncols)
        .map(|j| {
            let rs: Vec<u64> = parts.iter().map(|x| x[j]).collect();
            crt(&rs, &moduli)
        })
        .collect();
    Ok(Some(x))
}

fn check_dense_budget(sys: &SparseSystem) -> Result<()> {
    let cells = sys.rows.len().saturating_mul(sys.ncols + 1);
    if cells > DENSE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "dense system of {} x {}",
            sys.rows.len(),
            sys.ncols
        )));
    }
    Ok(())
}

/// Gauss-Jordan over GF(2) on packed bit rows; the right-hand side is bit `ncols`.
fn solve_gf2(sys: &SparseSystem) -> Option<Vec<u64>> {
    let nc = sys.ncols;
    let words = (nc + 1).div_ceil(64);
    let mut rows: Vec<Vec<u64>> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .map(|(row, &b)| {
            let mut w = vec![0u64; words];
            for &(j, v) in row {
                if v % 2 == 1 {
                    w[j / 64] ^= 1 << (j % 64);
                }
            }
            if b % 2 == 1 {
                w[nc / 64] ^= 1 << (nc % 64);
            }
            w
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        let (wi, bit) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (r..rows.len()).find(|&i| rows[i][wi] & bit != 0) else {
            continue;
        };
        rows.swap(r, p);
        let (top, rest) = rows.split_at_mut(r);
        let (prow, bottom) = rest.split_first_mut().expect("pivot row");
        for row in top.iter_mut().chain(bottom.iter_mut()) {
            if row[wi] & bit != 0 {
                for (x, y) in row[wi..].iter_mut().zip(&prow[wi..]) {
                    *x ^= *y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let (rw, rbit) = (nc / 64, 1u64 << (nc % 64));
    if rows[r..].iter().any(|row| row[rw] & rbit != 0) {
        return None;
    }
    let mut x = vec![0u64; nc];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = u64::from(rows[i][rw] & rbit != 0);
    }
    Some(x)
}

/// Gauss-Jordan over GF(p).
fn solve_prime(sys: &SparseSystem, p: u64) -> Result<Option<Vec<u64>>> {
    check_dense_budget(sys)?;
    let nc = sys.ncols;
    let mut rows: Vec<Vec<u64>> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .map(|(row, &b)| {
            let mut w = vec![0u64; nc + 1];
            for &(j, v) in row {
                w[j] = (w[j] + v) % p;
            }
            w[nc] = b % p;
            w
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = zn_inv(rows[r][c], p).expect("nonzero in a prime field");
        for x in rows[r][c..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let (top, rest) = rows.split_at_mut(r);
        let (prow, bottom) = rest.split_first_mut().expect("pivot row");
        for row in top.iter_mut().chain(bottom.iter_mut()) {
            let f = row[c];
            if f != 0 {
                let nf = p - f;
                for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                    *x = (*x + nf * y) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[nc] != 0) {
        return Ok(None);
    }
    let mut x = vec![0u64; nc];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][nc];
    }
    Ok(Some(x))
}

/// Diagonalization over Z/p^a with row and column operations. Each step
/// pivots on an entry of minimal p-adic valuation in the remaining block
/// (a unit whenever one exists), which divides its whole row and column.
fn solve_prime_power(sys: &SparseSystem, p: u64, a: u32) -> Result<Option<Vec<u64>>> {
    check_dense_budget(sys)?;
    let pk = p.pow(a);
    let nr = sys.rows.len();
    let nc = sys.ncols;
    let mut w = vec![vec![0u64; nc]; nr];
    let mut c: Vec<u64> = sys.rhs.iter().map(|&b| b % pk).collect();
    for (i, row) in sys.rows.iter().enumerate() {
        for &(j, v) in row {
            w[i][j] = (w[i][j] + v) % pk;
        }
    }
    // column transform Q, stored as columns
    let mut q: Vec<Vec<u64>> = (0..nc)
        .map(|j| {
            let mut col = vec![0u64; nc];
            col[j] = 1;
            col
        })
        .collect();
    let mut diag = Vec::new();
    let limit = nr.min(nc);
    for t in 0..limit {
        let mut best: Option<(u32, usize, usize)> = None;
        'scan: for (i, row) in w.iter().enumerate().skip(t) {
            for (j, &v) in row.iter().enumerate().skip(t) {
                if v != 0 {
                    let val = valuation(v, p, a);
                    if best.is_none_or(|(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                        if val == 0 {
                            break 'scan;
                        }
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        w.swap(t, i);
        c.swap(t, i);
        if j != t {
            for row in w.iter_mut() {
                row.swap(t, j);
            }
            q.swap(t, j);
        }
        let pv = pow_mod(p, v as u64, pk);
        let unit = w[t][t] / pv;
        let uinv = zn_inv(unit % pk, pk).expect("unit part");
        for x in w[t][t..].iter_mut() {
            *x = mul_mod(*x, uinv, pk);
        }
        c[t] = mul_mod(c[t], uinv, pk);
        debug_assert_eq!(w[t][t], pv);
        let (top, rest) = w.split_at_mut(t + 1);
        let prow = &top[t];
        for (off, row) in rest.iter_mut().enumerate() {
            let f = row[t] / pv;
            if f != 0 {
                let nf = pk - f % pk;
                for (x, &y) in row[t..].iter_mut().zip(&prow[t..]) {
                    *x = (*x + mul_mod(nf, y, pk)) % pk;
                }
                c[t + 1 + off] = (c[t + 1 + off] + mul_mod(nf, c[t], pk)) % pk;
            }
        }
        for jj in t + 1..nc {
            let g = w[t][jj] / pv;
            if g != 0 {
                w[t][jj] = 0;
                let ng = pk - g % pk;
                let (qa, qb) = q.split_at_mut(jj);
                for (x, &y) in qb[0].iter_mut().zip(&qa[t]) {
                    *x = (*x + mul_mod(ng, y, pk)) % pk;
                }
            }
        }
        diag.push(pv);
    }
    let rank = diag.len();
    if c[rank..].iter().any(|&x| x != 0) {
        return Ok(None);
    }
    let mut y = vec![0u64; nc];
    for t in 0..rank {
        if !c[t].is_multiple_of(diag[t]) {
            return Ok(None);
        }
        y[t] = c[t] / diag[t];
    }
    let mut x = vec![0u64; nc];
    for (t, &yt) in y.iter().enumerate() {
        if yt != 0 {
            for (xi, &qv) in x.iter_mut().zip(&q[t]) {
                *xi = (*xi + mul_mod(yt, qv, pk)) % pk;
            }
        }
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[u64]], n: u64) -> ZnMat {
        let r: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        ZnMat::from_rows(&r, rows[0].len(), n).unwrap()
    }

    #[test]
    fn examples() {
        let id = ZnMat::identity(3, 12);
        assert_eq!(solve_zn(&id, &[5, 7, 11]).unwrap(), Some(vec![5, 7, 11]));
        assert_eq!(solve_zn(&mat(&[&[2]], 4), &[1]).unwrap(), None);
        assert_eq!(solve_zn(&mat(&[&[2]], 9), &[1]).unwrap(), Some(vec![5]));
        assert!(solve_zn(&mat(&[&[2]], 9), &[1, 2]).is_err());
    }

    #[test]
    fn valuation_pivot_needs_column_ops() {
        // [2 1] x = 1 over Z/4 has x = (0, 1)
        let a = mat(&[&[2, 1], &[2, 3]], 4);
        let x = solve_zn(&a, &[1, 3]).unwrap().unwrap();
        assert_eq!((2 * x[0] + x[1]) % 4, 1);
        assert_eq!((2 * x[0] + 3 * x[1]) % 4, 3);
    }

    #[test]
    fn gf2_and_crt_paths() {
        // modulus 6 exercises the GF(2) and GF(3) paths together
        let a = mat(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]], 6);
        let b = [2, 3, 5];
        let x = solve_zn(&a, &b).unwrap().unwrap();
        for i in 0..3 {
            let s: u64 = (0..3).map(|j| a.get(i, j) * x[j]).sum();
            assert_eq!(s % 6, b[i]);
        }
    }
}
