use rayon::prelude::*;

use super::build::{Certificate, Provenance};
use super::operator::{MinorOperator, RowTable, Scope};
use crate::error::{Error, Result};
use crate::linalg::{check_budget, enumerate, enumerate_subspaces, Mat, RankFilter, DEFAULT_BUDGET};
use crate::scalars::{solve_sparse, Field, RingSpec, SparseSystem};

/// Size of the linear system behind `solve_certificate_direct`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverStats {
    pub unknowns: usize,
    /// One equation per pair `(X, Y)` of points.
    pub equations_full: usize,
    /// Equations actually assembled: `X` restricted to one point per hyperplane.
    pub equations_reduced: usize,
}

/// Searches for `α` with `f(X) = Σ α_M f(M·X)` on `O^{(k+1)}_{F^k → Z/N}`,
/// `M` ranging over rank `≤ n` matrices. `None` means no such formula exists.
///
/// The identity at `X` implies it at every `X·T`, `T ∈ F^{k×k}`, and every
/// point is `X₁·T` for a rank-`k` `X₁` with the same column space, so one
/// rank-`k` point per hyperplane of `F^{k+1}` suffices.
pub fn solve_certificate_direct(field: &Field, k: usize, modulus: u64, n: usize) -> Result<Option<Certificate>> {
    Ok(solve_direct_with_stats(field, k, modulus, n)?.0)
}

pub fn solve_direct_with_stats(
    field: &Field,
    k: usize,
    modulus: u64,
    n: usize,
) -> Result<(Option<Certificate>, SolverStats)> {
    RingSpec::new(modulus)?.check_coprime(field.p)?;
    let m = k + 1;
    check_budget(field.q, m, m, DEFAULT_BUDGET)?;
    let points = check_budget(field.q, m, k, DEFAULT_BUDGET)? as usize;
    let unknowns: Vec<Mat> = enumerate(field, (m, m), RankFilter::AtMost(n), DEFAULT_BUDGET)?.collect();
    let reps: Vec<Mat> = enumerate_subspaces(field, m, k)?
        .iter()
        .map(|h| h.basis_columns())
        .collect();
    let stats = SolverStats {
        unknowns: unknowns.len(),
        equations_full: points * points,
        equations_reduced: reps.len() * points,
    };
    let digits: Vec<Vec<u32>> = unknowns
        .iter()
        .map(|u| super::operator::row_digits(u.code(), field.q, m))
        .collect();
    let blocks: Vec<Vec<(Vec<(usize, u64)>, u64)>> = reps
        .par_iter()
        .map(|x| {
            let table = RowTable::new(x);
            let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); points];
            for (j, d) in digits.iter().enumerate() {
                rows[table.apply(d) as usize].push((j, 1));
            }
            let xc = x.code() as usize;
            rows.into_iter()
                .enumerate()
                .map(|(y, r)| (r, u64::from(y == xc)))
                .filter(|(r, b)| !r.is_empty() || *b != 0)
                .collect()
        })
        .collect();
    let mut sys = SparseSystem::new(modulus, unknowns.len());
    for block in blocks {
        for (row, b) in block {
            sys.push(row, b);
        }
    }
    let Some(sol) = solve_sparse(&sys)? else {
        return Ok((None, stats));
    };
    let op = MinorOperator::new(
        field,
        m,
        modulus,
        n,
        unknowns.iter().zip(&sol).map(|(u, &a)| (u.code(), a)),
    )?;
    let cert = Certificate::checked(op, k, Scope::FullLevel, Provenance::Solver).map_err(|e| {
        Error::VerificationFailed(format!("solver output rejected: {e}"))
    })?;
    Ok((Some(cert), stats))
}
