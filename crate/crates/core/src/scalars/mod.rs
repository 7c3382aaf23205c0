//! Exact arithmetic in GF(q) and Z/N, Howell forms and linear solving over Z/N.

pub mod field;
pub mod howell;
pub mod solve;
pub mod zn;

pub use field::{field_make, is_prime, Field, FieldElem, FieldSpec};
pub use howell::{howell_form, howell_rows, SpanBuilder, Submodule, ZnMat};
pub use solve::{solve_sparse, solve_zn, SparseSystem};
pub use zn::{gcd, lcm, zn_inv, RingSpec};
