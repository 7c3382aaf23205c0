pub mod clonoid;
pub mod comprep;
pub mod error;
pub mod funcspace;
pub mod io;
pub mod linalg;
pub mod scalars;
pub mod theta;
pub mod unifgen;

pub use error::{Error, Result};
