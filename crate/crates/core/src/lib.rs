pub mod algebra;
pub mod cli;
pub mod decomposition;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod oracle;
pub mod tensor;

pub use error::{Error, Result};
