use std::collections::BTreeMap;

use super::embed::{build_la, eval_la, la_table};
use super::mik::MikModule;
use crate::clonoid::{ClonoidLevel, GeneratorSet};
use crate::error::{Error, Result};
use crate::funcspace::{domain_size, ModuleSpec};
use crate::linalg::{
    check_budget, colspace, enumerate, enumerate_all_subspaces, Mat, RankFilter, Subspace, DEFAULT_BUDGET,
};
use crate::scalars::{Field, SpanBuilder, Submodule};
use crate::unifgen::subspace_basis;

/// A clonoid from `F^k` to `B` given by one `GL_i`-invariant submodule
/// `C_i ≤ M_{i,k}(F, B)` per `i = 0..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClonoidCoords {
    pub field: Field,
    pub k: usize,
    pub module: ModuleSpec,
    pub levels: Vec<Submodule>,
}

impl ClonoidCoords {
    pub fn zero(field: &Field, k: usize, module: &ModuleSpec) -> Result<Self> {
        Self::filled(field, k, module, |mik| Submodule::zero(module.n, mik.dim()))
    }

    /// The clonoid of all functions.
    pub fn full(field: &Field, k: usize, module: &ModuleSpec) -> Result<Self> {
        Self::filled(field, k, module, |mik| {
            let gens = (0..mik.len())
                .flat_map(|j| {
                    (0..module.r()).map(move |c| {
                        let mut v = vec![0u64; mik.dim()];
                        v[j * module.r() + c] = module.scales[c];
                        v
                    })
                })
                .collect();
            Submodule::from_generators(module.n, mik.dim(), gens)
        })
    }

    fn filled(
        field: &Field,
        k: usize,
        module: &ModuleSpec,
        level: impl Fn(&MikModule) -> Submodule,
    ) -> Result<Self> {
        let levels = (0..=k)
            .map(|i| MikModule::new(field, i, k, module).map(|m| level(&m)))
            .collect::<Result<_>>()?;
        Ok(ClonoidCoords {
            field: field.clone(),
            k,
            module: module.clone(),
            levels,
        })
    }

    pub fn mik(&self, i: usize) -> Result<MikModule> {
        MikModule::new(&self.field, i, self.k, &self.module)
    }

    /// Shapes, moduli and `GL_i`-invariance of every level.
    pub fn validate(&self) -> Result<()> {
        self.module.check_coprime(self.field.p)?;
        if self.levels.len() != self.k + 1 {
            return Err(Error::InvalidCoords(format!(
                "{} levels for k = {}",
                self.levels.len(),
                self.k
            )));
        }
        for (i, s) in self.levels.iter().enumerate() {
            let mik = self.mik(i)?;
            if s.dim != mik.dim() || s.n != self.module.n {
                return Err(Error::InvalidCoords(format!(
                    "level {i} has width {} mod {}, expected {} mod {}",
                    s.dim,
                    s.n,
                    mik.dim(),
                    self.module.n
                )));
            }
            if s.rows.iter().flatten().zip(0..).any(|(&x, j)| x % self.module.scales[j % self.module.r()] != 0) {
                return Err(Error::InvalidCoords(format!("level {i} leaves the embedded module")));
            }
            if !mik.is_invariant(s)? {
                return Err(Error::InvalidCoords(format!("level {i} is not GL_{i}-invariant")));
            }
        }
        Ok(())
    }

    /// Level-wise inclusion.
    pub fn le(&self, other: &ClonoidCoords) -> bool {
        self.levels.len() == other.levels.len()
            && self.levels.iter().zip(&other.levels).all(|(a, b)| b.contains_all(a))
    }

    pub fn counts(&self) -> Vec<u128> {
        self.levels.iter().map(|s| s.cardinality()).collect()
    }
}

/// Coordinates of the clonoid whose `k`-ary part is `level`:
/// `C_i = {U ↦ h([Id_i; 0]·U) : h ∈ level, h = 0 on rank < i}`.
pub fn coords_from_level(level: &ClonoidLevel) -> Result<ClonoidCoords> {
    let (field, k, module) = (&level.field, level.k, &level.module);
    if level.m != k {
        return Err(Error::DimensionMismatch(format!(
            "coordinates are read off the {k}-ary part, got arity {}",
            level.m
        )));
    }
    let r = module.r();
    let points = domain_size(field, k, k)?;
    let ranks: Vec<usize> = (0..points as u64)
        .map(|c| Mat::from_code(field, k, k, c).rank())
        .collect();
    let mut levels = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mask: Vec<bool> = ranks.iter().flat_map(|&rk| std::iter::repeat_n(rk < i, r)).collect();
        let vanishing = level.span.vanishing_on(&mask);
        let a0 = Mat::anchor(field, k, i);
        let mik = MikModule::new(field, i, k, module)?;
        let cols: Vec<usize> = mik
            .domain
            .iter()
            .flat_map(|u| {
                let c = a0.mul(u).code() as usize;
                (0..r).map(move |j| c * r + j)
            })
            .collect();
        levels.push(vanishing.project(&cols));
    }
    Ok(ClonoidCoords {
        field: field.clone(),
        k,
        module: module.clone(),
        levels,
    })
}

/// The `m`-ary part spanned by `L_{A_H}(g)` over all `H` of dimension `≤ k`
/// and Howell generators `g` of `C_{dim H}`.
pub fn level_from_coords(coords: &ClonoidCoords, m: usize) -> Result<ClonoidLevel> {
    let (field, k, module) = (&coords.field, coords.k, &coords.module);
    let size = domain_size(field, k, m)?;
    let mut span = SpanBuilder::new(module.n, size * module.r());
    for h in enumerate_all_subspaces(field, m)?.into_iter().filter(|h| h.dim() <= k) {
        let i = h.dim();
        if coords.levels[i].is_zero() {
            continue;
        }
        let mik = coords.mik(i)?;
        let op = build_la(&subspace_basis(&h), k, module.n)?;
        for g in &coords.levels[i].rows {
            span.push(&la_table(&op, &mik, g)?.to_zn_vector());
        }
    }
    Ok(ClonoidLevel {
        field: field.clone(),
        k,
        m,
        module: module.clone(),
        span: span.finish(),
    })
}

fn check_inputs(field: &Field, k: usize, inputs: &[Mat]) -> Result<usize> {
    let m = inputs.first().map_or(0, |x| x.rows);
    for x in inputs {
        if x.shape() != (m, k) || x.field != *field {
            return Err(Error::ShapeMismatch(format!(
                "input {}x{} where {m}x{k} over GF({}) was expected",
                x.rows, x.cols, field.q
            )));
        }
    }
    Ok(m)
}

/// Every subspace of some `C(X_j)`, by dimension then basis code.
pub fn relevant_subspaces(field: &Field, inputs: &[Mat]) -> Result<Vec<Subspace>> {
    let mut seen: BTreeMap<(usize, u64), Subspace> = BTreeMap::new();
    for x in inputs {
        let c = colspace(x);
        let b = c.basis_columns();
        for s in enumerate_all_subspaces(field, c.dim())? {
            let h = colspace(&b.mul(&s.basis_columns()));
            seen.entry((h.dim(), h.basis.code())).or_insert(h);
        }
    }
    Ok(seen.into_values().collect())
}

/// Howell basis of `{(f(X_1), …, f(X_n)) : f ∈ C^{(m)}}` inside `(Z/N)^{n·r}`.
pub fn comprep_solve(coords: &ClonoidCoords, inputs: &[Mat]) -> Result<Submodule> {
    coords.validate()?;
    let (field, k, module) = (&coords.field, coords.k, &coords.module);
    check_inputs(field, k, inputs)?;
    let r = module.r();
    let mut span = SpanBuilder::new(module.n, inputs.len() * r);
    for h in relevant_subspaces(field, inputs)? {
        let i = h.dim();
        if coords.levels[i].is_zero() {
            continue;
        }
        let mik = coords.mik(i)?;
        let op = build_la(&subspace_basis(&h), k, module.n)?;
        for g in &coords.levels[i].rows {
            let mut v = Vec::with_capacity(inputs.len() * r);
            for x in inputs {
                v.extend(eval_la(&op, &mik, g, x)?);
            }
            span.push(&v);
        }
    }
    Ok(span.finish())
}

/// The same image from the generators directly: the span of
/// `(f(M·X_1), …, f(M·X_n))` over generators `f` and all `M ∈ F^{arity(f)×m}`.
pub fn comprep_brute_force(gens: &GeneratorSet, inputs: &[Mat]) -> Result<Submodule> {
    let m = check_inputs(&gens.field, gens.k, inputs)?;
    let module = &gens.module;
    let mut span = SpanBuilder::new(module.n, inputs.len() * module.r());
    for f in &gens.funcs {
        check_budget(gens.field.q, f.m, m, DEFAULT_BUDGET)?;
        for mt in enumerate(&gens.field, (f.m, m), RankFilter::Any, DEFAULT_BUDGET)? {
            let v: Vec<u64> = inputs
                .iter()
                .flat_map(|x| module.embed(f.eval(&mt.mul(x))))
                .collect();
            span.push(&v);
        }
    }
    Ok(span.finish())
}

/// The image read off a materialized `m`-ary part.
pub fn image_of_level(level: &ClonoidLevel, inputs: &[Mat]) -> Result<Submodule> {
    check_inputs(&level.field, level.k, inputs)?;
    let r = level.module.r();
    let gens = level
        .span
        .rows
        .iter()
        .map(|row| {
            inputs
                .iter()
                .flat_map(|x| {
                    let c = x.code() as usize;
                    row[c * r..(c + 1) * r].to_vec()
                })
                .collect()
        })
        .collect();
    Ok(Submodule::from_generators(level.module.n, inputs.len() * r, gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clonoid::closure_level;
    use crate::funcspace::{delta, FuncTable};
    use crate::scalars::field_make;

    fn setup() -> (Field, ModuleSpec) {
        (field_make(2, 1).unwrap(), ModuleSpec::cyclic(3).unwrap())
    }

    #[test]
    fn identical_inputs_give_diagonal() {
        let (f, b) = setup();
        let full = ClonoidCoords::full(&f, 1, &b).unwrap();
        let x = Mat::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        let img = comprep_solve(&full, &[x.clone(), x]).unwrap();
        assert_eq!(img, Submodule::from_generators(3, 2, vec![vec![1, 1]]));
    }

    #[test]
    fn distinct_lines_give_everything() {
        let (f, b) = setup();
        let full = ClonoidCoords::full(&f, 1, &b).unwrap();
        let x1 = Mat::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        let x2 = Mat::from_rows(&f, &[vec![0], vec![1]]).unwrap();
        assert_eq!(comprep_solve(&full, &[x1, x2]).unwrap(), Submodule::full(3, 2));
    }

    #[test]
    fn zero_coords_zero_image() {
        let (f, b) = setup();
        let z = ClonoidCoords::zero(&f, 1, &b).unwrap();
        let x = Mat::from_rows(&f, &[vec![1], vec![1]]).unwrap();
        assert!(comprep_solve(&z, &[x]).unwrap().is_zero());
    }

    #[test]
    fn coords_round_trip_through_level() {
        let (f, b) = setup();
        let d = delta(&Mat::from_rows(&f, &[vec![1, 0], vec![1, 1]]).unwrap(), &[1], 2, &b).unwrap();
        let c = FuncTable::from_fn(&f, 2, 1, &b, |x| vec![(x % 2) as u64]).unwrap();
        let gens = GeneratorSet::new(&f, 2, &b, vec![d, c]).unwrap();
        let coords = coords_from_level(&closure_level(&gens, 2).unwrap()).unwrap();
        coords.validate().unwrap();
        assert_eq!(level_from_coords(&coords, 3).unwrap().span, closure_level(&gens, 3).unwrap().span);
    }

    #[test]
    fn invalid_coords_rejected() {
        let f = field_make(3, 1).unwrap();
        let b = ModuleSpec::cyclic(2).unwrap();
        let mut c = ClonoidCoords::zero(&f, 1, &b).unwrap();
        c.levels[1] = Submodule::from_generators(2, 2, vec![vec![1, 0]]);
        assert!(matches!(c.validate(), Err(Error::InvalidCoords(_))));
    }
}
