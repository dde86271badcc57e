//! Term-modal dynamic epistemic logic: models, product update, planning,
//! reduction to the static fragment and frame characterization.

pub mod dsl;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod iso;
pub mod par;
pub mod planning;
pub mod reduction;
pub mod semantics;
pub mod syntax;
pub mod corpus;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
