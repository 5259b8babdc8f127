use thiserror::Error;

use crate::lattice::{Region, VarId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),

    #[error("invalid variable declaration: {0}")]
    InvalidVariable(String),

    #[error("region {0} is not in the lattice")]
    RegionNotInLattice(Region),

    #[error("operands belong to different lattices")]
    LatticeMismatch,

    #[error("region {sub} is not contained in {sup}")]
    NotASubregion { sub: Region, sup: Region },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not a probability: {0}")]
    NotAProbability(String),

    #[error("belief on region {0} has a non-positive entry")]
    NonPositiveBelief(Region),

    #[error("non-finite value at step {step}")]
    NumericalOverflow { step: usize },

    #[error("flow did not converge after {steps} steps (residual {residual:e})")]
    DidNotConverge { steps: usize, residual: f64 },

    #[error("global configuration space has {0} states, above the enumeration limit")]
    TooLarge(u128),

    #[error("parse error: {0}")]
    Parse(String),
}
