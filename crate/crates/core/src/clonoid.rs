//! Clonoid closure at a fixed arity: the m-ary part of the clonoid generated
//! by a set of functions, as a Z/N-submodule of the embedded table space.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::funcspace::{domain_size, minor, minor_code_map, FuncTable, ModuleSpec};
use crate::linalg::{check_budget, enumerate, RankFilter, DEFAULT_BUDGET};
use crate::scalars::{Field, SpanBuilder, Submodule};

/// Cap on explicitly enumerated vectors and submodules.
pub const LATTICE_BUDGET: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub field: Field,
    pub k: usize,
    pub module: ModuleSpec,
    pub funcs: Vec<FuncTable>,
}

impl GeneratorSet {
    pub fn new(field: &Field, k: usize, module: &ModuleSpec, funcs: Vec<FuncTable>) -> Result<Self> {
        for f in &funcs {
            if f.field != *field || f.k != k || f.module != *module {
                return Err(Error::SignatureMismatch(
                    "generator with a different field, dimension or module".into(),
                ));
            }
        }
        Ok(GeneratorSet {
            field: field.clone(),
            k,
            module: module.clone(),
            funcs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClonoidLevel {
    pub field: Field,
    pub k: usize,
    pub m: usize,
    pub module: ModuleSpec,
    pub span: Submodule,
}

impl ClonoidLevel {
    /// Howell basis rows decoded back into functions.
    pub fn basis_functions(&self) -> Result<Vec<FuncTable>> {
        self.span
            .rows
            .iter()
            .map(|r| FuncTable::from_zn_vector(&self.field, self.k, self.m, &self.module, r))
            .collect()
    }

    pub fn cardinality(&self) -> u128 {
        self.span.cardinality()
    }

    /// Whether every minor `X ↦ g(M·X)`, `M ∈ F^{m×m}`, of every basis element stays inside.
    pub fn is_minor_closed(&self) -> Result<bool> {
        let maps = square_minor_maps(&self.field, self.m, self.k)?;
        let r = self.module.r();
        for row in &self.span.rows {
            for map in &maps {
                if !self.span.contains(&apply_map(row, map, r)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Pulls an embedded table back along a point map: `out[x] = v[map[x]]`.
pub fn apply_map(v: &[u64], map: &[u32], r: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(map.len() * r);
    for &img in map {
        let i = img as usize * r;
        out.extend_from_slice(&v[i..i + r]);
    }
    out
}

pub fn square_minor_maps(field: &Field, m: usize, k: usize) -> Result<Vec<Vec<u32>>> {
    domain_size(field, k, m)?;
    Ok(enumerate(field, (m, m), RankFilter::Any, DEFAULT_BUDGET)?
        .map(|mt| minor_code_map(&mt, k))
        .collect())
}

pub fn closure_level(gens: &GeneratorSet, m: usize) -> Result<ClonoidLevel> {
    let size = domain_size(&gens.field, gens.k, m)?;
    let mut span = SpanBuilder::new(gens.module.n, size * gens.module.r());
    for f in &gens.funcs {
        check_budget(gens.field.q, f.m, m, DEFAULT_BUDGET)?;
        for mt in enumerate(&gens.field, (f.m, m), RankFilter::Any, DEFAULT_BUDGET)? {
            span.push(&minor(f, &mt)?.to_zn_vector());
        }
    }
    Ok(ClonoidLevel {
        field: gens.field.clone(),
        k: gens.k,
        m,
        module: gens.module.clone(),
        span: span.finish(),
    })
}

pub fn member(f: &FuncTable, level: &ClonoidLevel) -> Result<bool> {
    if f.field != level.field || f.k != level.k || f.m != level.m || f.module != level.module {
        return Err(Error::SignatureMismatch("function and clonoid level differ".into()));
    }
    Ok(level.span.contains(&f.to_zn_vector()))
}

/// Whether the m-ary part of ⟨F⟩ is generated by its n-ary part.
pub fn generated_by_n_ary(gens: &GeneratorSet, n: usize, m: usize) -> Result<bool> {
    if m <= n {
        return Err(Error::DimensionMismatch(format!("need m > n, got m={m}, n={n}")));
    }
    let low = closure_level(gens, n)?;
    let low_gens = GeneratorSet::new(&gens.field, gens.k, &gens.module, low.basis_functions()?)?;
    Ok(closure_level(&low_gens, m)?.span == closure_level(gens, m)?.span)
}

/// All submodules obtained as sums of the given cyclic submodules,
/// including the zero module, in a deterministic order.
pub fn close_under_sums(n: u64, dim: usize, cyclics: &[Submodule]) -> Result<Vec<Submodule>> {
    let zero = Submodule::zero(n, dim);
    let mut seen: HashSet<Submodule> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(zero.clone());
    queue.push_back(zero);
    while let Some(s) = queue.pop_front() {
        for c in cyclics {
            if s.contains_all(c) {
                continue;
            }
            let t = s.sum(c);
            if seen.insert(t.clone()) {
                if seen.len() as u64 > LATTICE_BUDGET {
                    return Err(Error::BudgetExceeded("too many submodules".into()));
                }
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<Submodule> = seen.into_iter().collect();
    out.sort_by(|a, b| a.cardinality().cmp(&b.cardinality()).then(a.rows.cmp(&b.rows)));
    Ok(out)
}

/// Every element of `B^points`, embedded, provided the count is within budget.
pub fn all_embedded_vectors(module: &ModuleSpec, points: usize) -> Result<Vec<Vec<u64>>> {
    let order = module.order();
    let total = order
        .checked_pow(points as u32)
        .filter(|&t| t <= LATTICE_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded(format!("|B|^{points} vectors")))?;
    let elems = module.elements();
    Ok((0..total)
        .map(|mut c| {
            let mut v = Vec::with_capacity(points * module.r());
            for _ in 0..points {
                v.extend(module.embed(&elems[(c % order) as usize]));
                c /= order;
            }
            v
        })
        .collect())
}

/// Brute-force list of all minor- and module-closed submodules of
/// `B^{A^level}`. For `level = k` these are exactly the k-ary parts of the
/// clonoids, and distinct clonoids have distinct k-ary parts.
pub fn enumerate_clonoids(
    field: &Field,
    k: usize,
    module: &ModuleSpec,
    level: usize,
) -> Result<Vec<ClonoidLevel>> {
    let points = domain_size(field, k, level)?;
    let dim = points * module.r();
    let maps = square_minor_maps(field, level, k)?;
    let mut cyclics: HashSet<Submodule> = HashSet::new();
    for v in all_embedded_vectors(module, points)? {
        let gens: Vec<Vec<u64>> = maps.iter().map(|map| apply_map(&v, map, module.r())).collect();
        cyclics.insert(Submodule::from_generators(module.n, dim, gens));
    }
    let mut cyclics: Vec<Submodule> = cyclics.into_iter().collect();
    cyclics.sort_by(|a, b| a.rows.cmp(&b.rows));
    Ok(close_under_sums(module.n, dim, &cyclics)?
        .into_iter()
        .map(|span| ClonoidLevel {
            field: field.clone(),
            k,
            m: level,
            module: module.clone(),
            span,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::delta;
    use crate::linalg::Mat;
    use crate::scalars::field_make;

    fn setup() -> (Field, ModuleSpec) {
        (field_make(2, 1).unwrap(), ModuleSpec::cyclic(3).unwrap())
    }

    #[test]
    fn closure_of_delta_one() {
        let (f, b) = setup();
        let one = Mat::from_rows(&f, &[vec![1]]).unwrap();
        let d1 = delta(&one, &[1], 1, &b).unwrap();
        let gens = GeneratorSet::new(&f, 1, &b, vec![d1.clone()]).unwrap();
        let l = closure_level(&gens, 1).unwrap();
        assert_eq!(l.cardinality(), 3);
        assert!(member(&d1, &l).unwrap());
        let d0 = delta(&Mat::zeros(&f, 1, 1), &[1], 1, &b).unwrap();
        assert!(!member(&d0, &l).unwrap());
        assert!(member(&FuncTable::zero(&f, 1, 1, &b).unwrap(), &l).unwrap());
        assert!(l.is_minor_closed().unwrap());
    }

    #[test]
    fn empty_and_full() {
        let (f, b) = setup();
        let empty = GeneratorSet::new(&f, 1, &b, vec![]).unwrap();
        assert!(closure_level(&empty, 2).unwrap().span.is_zero());
        let all: Vec<FuncTable> = (0..2)
            .map(|c| delta(&Mat::from_code(&f, 1, 1, c), &[1], 1, &b).unwrap())
            .collect();
        let full = GeneratorSet::new(&f, 1, &b, all).unwrap();
        assert_eq!(closure_level(&full, 1).unwrap().cardinality(), 9);
    }

    #[test]
    fn small_lattices() {
        let (f, b) = setup();
        assert_eq!(enumerate_clonoids(&f, 1, &b, 1).unwrap().len(), 4);
        let f3 = field_make(3, 1).unwrap();
        let b2 = ModuleSpec::cyclic(2).unwrap();
        assert_eq!(enumerate_clonoids(&f3, 1, &b2, 1).unwrap().len(), 6);
    }

    #[test]
    fn level_two_parts_are_generated_by_level_one() {
        let (f, b) = setup();
        let level2 = enumerate_clonoids(&f, 1, &b, 2).unwrap();
        assert_eq!(level2.len(), 4);
        for c in level2 {
            assert!(c.is_minor_closed().unwrap());
            let gens = GeneratorSet::new(&f, 1, &b, c.basis_functions().unwrap()).unwrap();
            let unary = closure_level(&gens, 1).unwrap();
            let back = GeneratorSet::new(&f, 1, &b, unary.basis_functions().unwrap()).unwrap();
            assert_eq!(closure_level(&back, 2).unwrap().span, c.span);
        }
    }
}
