//! Matrices over GF(q): rank, RREF, rank factorization, column spaces,
//! orthogonal complements and enumeration of matrices, subspaces and GL_m.

pub mod enumerate;
pub mod mat;
pub mod subspace;

pub use enumerate::{
    check_budget, enumerate, enumerate_all_subspaces, enumerate_gl, enumerate_subspaces, full_rank_count,
    gaussian_binomial, vec_code, vec_from_code, MatIter, RankFilter, DEFAULT_BUDGET,
};
pub use mat::{count_codes, factorization_transition, Mat};
pub use subspace::{colspace, contains, intersect, orth, Subspace};
