//! Domain files (`.tmd`), problem files (`.tmp`), formulas and plans.

mod domain;
mod formula;
mod json;
mod plan;
mod problem;
mod sexp;

pub use domain::{parse_domain, serialize_domain, DomainFile, FunctionDecl, PredicateDecl};
pub use formula::{formula_text, parse_formula, term_text, Ctx};
pub use json::{model_json, problem_json, ModelJson, ProblemJson, WorldJson};
pub use plan::{parse_plan, parse_step, plan_json, serialize_plan, PlanStep};
pub use problem::{parse_problem, serialize_problem, ProblemFile};
pub use sexp::{parse_all, parse_one, Sexp};
