//! Action models, product update, schemas and composition.

mod action;
mod compose;
mod schema;
mod update;

pub use action::{applicable, reflexive_condition, update_pointed, validate_action, ActionModel, PointedAction};
pub use compose::{compose, compose_models, compose_with, effective_post, PostRule};
pub use schema::{ActionSchema, GroundInstance, TypeTable};
pub(crate) use update::update_indexed;
pub use update::{product_update, product_update_with};
