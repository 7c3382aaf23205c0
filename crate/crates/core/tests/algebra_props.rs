use proptest::prelude::*;

use clonoid_core::funcspace::{minor, FuncTable, ModuleSpec};
use clonoid_core::linalg::{enumerate, enumerate_all_subspaces, Mat, RankFilter, Subspace};
use clonoid_core::scalars::{field_make, howell_form, solve_zn, zn_inv, Field, Submodule, ZnMat};

fn gf(p: u64) -> Field {
    field_make(p, 1).unwrap()
}

/// Every `Σ c_i g_i` with `c_i ∈ Z/N`.
fn brute_span(gens: &[Vec<u64>], n: u64, dim: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0u64; dim]];
    for g in gens {
        let mut next = Vec::new();
        for v in &out {
            for c in 0..n {
                next.push(v.iter().zip(g).map(|(a, b)| (a + c * b) % n).collect::<Vec<_>>());
            }
        }
        next.sort();
        next.dedup();
        out = next;
    }
    out
}

fn all_vectors(n: u64, dim: usize) -> Vec<Vec<u64>> {
    brute_span(&(0..dim).map(|i| (0..dim).map(|j| u64::from(i == j)).collect()).collect::<Vec<_>>(), n, dim)
}

fn gens_strategy() -> impl Strategy<Value = (u64, usize, Vec<Vec<u64>>)> {
    (2u64..=12, 1usize..=3).prop_flat_map(|(n, dim)| {
        let row = proptest::collection::vec(0..n, dim);
        (Just(n), Just(dim), proptest::collection::vec(row, 0..=3))
    })
}

proptest! {
    #[test]
    fn howell_span_matches_brute_force((n, dim, gens) in gens_strategy()) {
        let span = brute_span(&gens, n, dim);
        let s = Submodule::from_generators(n, dim, gens.clone());
        prop_assert_eq!(s.cardinality(), span.len() as u128);
        for v in all_vectors(n, dim) {
            prop_assert_eq!(s.contains(&v), span.binary_search(&v).is_ok());
        }
        let again = Submodule::from_generators(n, dim, s.rows.clone());
        prop_assert_eq!(again, s);
    }

    #[test]
    fn howell_form_is_idempotent((n, dim, gens) in gens_strategy()) {
        let m = ZnMat::from_rows(&gens, dim, n).unwrap();
        let h = howell_form(&m);
        prop_assert_eq!(howell_form(&h), h);
    }

    #[test]
    fn solve_zn_matches_brute_force((n, cols, rows) in gens_strategy(), seed in 0u64..1000) {
        prop_assume!(!rows.is_empty());
        let a = ZnMat::from_rows(&rows, cols, n).unwrap();
        let b: Vec<u64> = (0..rows.len() as u64).map(|i| (seed / (i + 1)) % n).collect();
        let solvable = all_vectors(n, cols).into_iter().any(|x| {
            rows.iter().zip(&b).all(|(r, &bi)| r.iter().zip(&x).map(|(p, q)| p * q).sum::<u64>() % n == bi)
        });
        match solve_zn(&a, &b).unwrap() {
            Some(x) => {
                prop_assert!(solvable);
                for (r, &bi) in rows.iter().zip(&b) {
                    prop_assert_eq!(r.iter().zip(&x).map(|(p, q)| p * q).sum::<u64>() % n, bi);
                }
            }
            None => prop_assert!(!solvable),
        }
    }

    #[test]
    fn inverse_is_an_involution(n in 2u64..5000, x in 1u64..5000) {
        let x = x % n;
        prop_assume!(clonoid_core::scalars::gcd(x, n) == 1);
        let y = zn_inv(x, n).unwrap();
        prop_assert_eq!(x * y % n, 1 % n);
        prop_assert_eq!(zn_inv(y, n).unwrap(), x);
    }

    #[test]
    fn rank_factorization_round_trips(p in prop::sample::select(vec![2u64, 3]), r in 1usize..=3, c in 1usize..=3, code in any::<u64>()) {
        let f = gf(p);
        let x = Mat::from_code(&f, r, c, code % p.pow((r * c) as u32));
        let (a, u) = x.rank_factorize();
        prop_assert_eq!(a.cols, x.rank());
        prop_assert_eq!(a.mul(&u), x);
    }

    #[test]
    fn spanning_sets_give_one_subspace(p in prop::sample::select(vec![2u64, 3]), m in 1usize..=3, codes in proptest::collection::vec(any::<u64>(), 1..5)) {
        let f = gf(p);
        let vecs: Vec<Vec<u8>> = codes.iter().map(|&c| clonoid_core::linalg::vec_from_code(f.q, m, c % p.pow(m as u32))).collect();
        let v = Subspace::span(&f, m, &vecs);
        let mut shuffled = v.elements();
        shuffled.reverse();
        prop_assert_eq!(Subspace::span(&f, m, &shuffled), v.clone());
        for w in &vecs {
            prop_assert!(v.contains(w));
        }
    }

    #[test]
    fn minor_composition_law(p in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        let f = gf(p);
        let b = ModuleSpec::new(&[2, 3]).unwrap();
        let (k, a, bb, c) = (1usize, 2usize, 2usize, 1usize);
        let table = FuncTable::from_fn(&f, k, a, &b, |i| vec![(seed >> (i % 60)) & 1, (seed >> ((i + 7) % 60)) % 3]).unwrap();
        let m = Mat::from_code(&f, a, bb, seed % p.pow((a * bb) as u32));
        let s = Mat::from_code(&f, bb, c, (seed / 97) % p.pow((bb * c) as u32));
        prop_assert_eq!(minor(&minor(&table, &m).unwrap(), &s).unwrap(), minor(&table, &m.mul(&s)).unwrap());
        let other = table.scale(2);
        prop_assert_eq!(
            minor(&table.add(&other).unwrap(), &m).unwrap(),
            minor(&table, &m).unwrap().add(&minor(&other, &m).unwrap()).unwrap()
        );
    }
}

#[test]
fn field_axioms_exhaustive() {
    for (p, e) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4)] {
        let f = field_make(p, e).unwrap();
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
                for &c in &els {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                }
            }
        }
    }
}

#[test]
fn rank_of_products_exhaustive() {
    for p in [2, 3] {
        let f = gf(p);
        let all: Vec<Mat> = enumerate(&f, (2, 2), RankFilter::Any, 1 << 20).unwrap().collect();
        for m in &all {
            for s in &all {
                assert!(m.mul(s).rank() <= m.rank().min(s.rank()));
            }
        }
    }
}

#[test]
fn orthogonal_complement_duality() {
    for p in [2, 3] {
        let f = gf(p);
        for m in 1..=3 {
            for v in enumerate_all_subspaces(&f, m).unwrap() {
                assert_eq!(v.orth().orth(), v);
                assert_eq!(v.dim() + v.orth().dim(), m);
            }
        }
    }
}

#[test]
fn rank_factorization_exhaustive_up_to_three() {
    for p in [2, 3] {
        let f = gf(p);
        for (r, c) in [(1, 3), (2, 2), (3, 2), (2, 3), (3, 3)] {
            for x in enumerate(&f, (r, c), RankFilter::Any, 1 << 20).unwrap() {
                let (a, u) = x.rank_factorize();
                assert_eq!(a.mul(&u), x);
            }
        }
    }
}
