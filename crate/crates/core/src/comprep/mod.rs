//! Clonoids from `F^k` to a coprime module as tuples of `GL_i`-invariant
//! submodules, the `L_A` embeddings that realize them, and the image
//! computation behind subpower membership.

pub mod embed;
pub mod mik;
pub mod solve;

pub use embed::{build_la, decompose, eval_la, la_table, recompose, Component, LAOperator};
pub use mik::{invariant_submodules, lattice_count, lattice_counts, MikModule};
pub use solve::{
    comprep_brute_force, comprep_solve, coords_from_level, image_of_level, level_from_coords,
    relevant_subspaces, ClonoidCoords,
};
