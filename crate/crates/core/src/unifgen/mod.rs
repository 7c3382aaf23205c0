//! Minor operators `f ↦ Σ α_M f(M·X)` and the certificates built from them:
//! subspace interpolators, level and arity certificates, the direct solver,
//! product certificates and the arity lower bound.

pub mod build;
pub mod operator;
pub mod product;
pub mod solver;

pub use build::{
    anchor, build_arity_certificate, build_ii, build_jh, build_jn, build_level_certificate,
    conjugator, delta_operator, subspace_basis, theta_certificate, Certificate, Provenance,
    TERM_BUDGET, VERIFY_BUDGET,
};
pub use operator::{
    op_add, op_apply, op_compose, op_scale, op_sub, verify_scope, verify_scope_at, MinorOperator, Scope,
    COMPOSE_BUDGET,
};
pub use product::{combine_product, lower_bound, ProductCertificate};
pub use solver::{solve_certificate_direct, solve_direct_with_stats, SolverStats};
