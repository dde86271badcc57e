//! Typed vocabulary, terms and formulas.

mod check;
mod formula;
mod signature;
mod subst;
mod term;

pub use check::{classify, well_formed, Classification, Report, Violation};
pub use formula::{ActionRef, Atom, Formula};
pub use signature::{FunctionSig, Signature};
pub use subst::{fresh_name, substitute, substitute_many, substitute_unchecked};
pub(crate) use subst::subst_atom;
pub use term::{sort_of, Term, Var};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Sort of a variable, constant or function value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Agt,
    Obj,
}

/// Sort slot of a relation or function argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SortTag {
    Agt,
    Obj,
    AgtOrObj,
}

impl SortTag {
    pub fn accepts(self, s: Sort) -> bool {
        matches!(
            (self, s),
            (SortTag::AgtOrObj, _) | (SortTag::Agt, Sort::Agt) | (SortTag::Obj, Sort::Obj)
        )
    }
}

impl From<Sort> for SortTag {
    fn from(s: Sort) -> Self {
        match s {
            Sort::Agt => SortTag::Agt,
            Sort::Obj => SortTag::Obj,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Agt => "agt",
            Sort::Obj => "obj",
        })
    }
}

impl fmt::Display for SortTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortTag::Agt => "agt",
            SortTag::Obj => "obj",
            SortTag::AgtOrObj => "agt_or_obj",
        })
    }
}

/// The edge-condition variable.
pub const XSTAR: &str = "x*";

pub fn xstar() -> Var {
    Var::new(XSTAR, Sort::Agt)
}

pub const EQ: &str = "=";
