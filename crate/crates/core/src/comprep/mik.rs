use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::clonoid::{all_embedded_vectors, close_under_sums};
use crate::error::{Error, Result};
use crate::funcspace::ModuleSpec;
use crate::linalg::{check_budget, enumerate, enumerate_gl, Mat, RankFilter, DEFAULT_BUDGET};
use crate::scalars::{Field, Submodule};

/// `M_{i,k}(F, B)`: functions from full-rank `i×k` matrices to `B`, embedded
/// in `(Z/N)^{|domain|·r}`, with `GL_i(F)` acting by `(g·f)(U) = f(g·U)`.
#[derive(Clone, Debug)]
pub struct MikModule {
    pub field: Field,
    pub i: usize,
    pub k: usize,
    pub module: ModuleSpec,
    /// Full-rank `i×k` matrices in ascending code order.
    pub domain: Vec<Mat>,
    index: HashMap<u64, usize>,
}

impl MikModule {
    pub fn new(field: &Field, i: usize, k: usize, module: &ModuleSpec) -> Result<Self> {
        if i > k {
            return Err(Error::DimMismatch(format!("i = {i} exceeds k = {k}")));
        }
        check_budget(field.q, i, k, DEFAULT_BUDGET)?;
        let domain: Vec<Mat> = enumerate(field, (i, k), RankFilter::Exactly(i), DEFAULT_BUDGET)?.collect();
        let index = domain.iter().enumerate().map(|(j, u)| (u.code(), j)).collect();
        Ok(MikModule {
            field: field.clone(),
            i,
            k,
            module: module.clone(),
            domain,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    /// Length of embedded vectors.
    pub fn dim(&self) -> usize {
        self.domain.len() * self.module.r()
    }

    pub fn index_of(&self, u: &Mat) -> Option<usize> {
        self.index.get(&u.code()).copied()
    }

    /// Embedded value at domain position `j`.
    pub fn value<'a>(&self, v: &'a [u64], j: usize) -> &'a [u64] {
        let r = self.module.r();
        &v[j * r..(j + 1) * r]
    }

    /// `U ↦ f(g·U)` for `g ∈ GL_i`.
    pub fn act(&self, g: &Mat, v: &[u64]) -> Vec<u64> {
        let mut out = Vec::with_capacity(v.len());
        for u in &self.domain {
            let j = self.index[&g.mul(u).code()];
            out.extend_from_slice(self.value(v, j));
        }
        out
    }

    pub fn group(&self) -> Result<Vec<Mat>> {
        enumerate_gl(&self.field, self.i, DEFAULT_BUDGET)
    }

    /// Whether the submodule is closed under the `GL_i` action.
    pub fn is_invariant(&self, s: &Submodule) -> Result<bool> {
        if s.dim != self.dim() || s.n != self.module.n {
            return Ok(false);
        }
        let group = self.group()?;
        Ok(s.rows.iter().all(|row| group.iter().all(|g| s.contains(&self.act(g, row)))))
    }

    /// `Z/N[GL_i]`-submodule generated by one vector.
    pub fn orbit_span(&self, v: &[u64], group: &[Mat]) -> Submodule {
        Submodule::from_generators(
            self.module.n,
            self.dim(),
            group.iter().map(|g| self.act(g, v)).collect(),
        )
    }
}

/// All `GL_i`-invariant submodules of `M_{i,k}(F, B)`.
pub fn invariant_submodules(field: &Field, i: usize, k: usize, module: &ModuleSpec) -> Result<Vec<Submodule>> {
    let mik = MikModule::new(field, i, k, module)?;
    let group = mik.group()?;
    let vectors = all_embedded_vectors(module, mik.len())?;
    let cyclics: HashSet<Submodule> = vectors
        .par_iter()
        .map(|v| mik.orbit_span(v, &group))
        .collect();
    let mut cyclics: Vec<Submodule> = cyclics.into_iter().collect();
    cyclics.sort_by(|a, b| a.rows.cmp(&b.rows));
    close_under_sums(module.n, mik.dim(), &cyclics)
}

/// Number of clonoids from `F^k` to `B`: `Π_{i=0}^k |Sub(M_{i,k})|`.
pub fn lattice_counts(field: &Field, k: usize, module: &ModuleSpec) -> Result<Vec<usize>> {
    module.check_coprime(field.p)?;
    (0..=k)
        .map(|i| invariant_submodules(field, i, k, module).map(|v| v.len()))
        .collect()
}

pub fn lattice_count(field: &Field, k: usize, module: &ModuleSpec) -> Result<u128> {
    Ok(lattice_counts(field, k, module)?.iter().map(|&c| c as u128).product())
}
