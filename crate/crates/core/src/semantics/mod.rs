//! First-order Kripke models and satisfaction.

mod eval;
mod model;
mod validate;

pub use eval::{compile, extension, satisfies, valid_on_model, Compiled, Evaluator};
pub(crate) use eval::{compile_action, CompiledAction};
pub use model::{Domain, Elem, Model, ModelBuilder, PointedModel, Valuation, World};
pub use validate::validate_model;
