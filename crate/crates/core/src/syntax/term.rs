use std::collections::BTreeSet;
use std::fmt;

use super::{Signature, Sort};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Self {
        Var {
            name: name.to_string(),
            sort,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables, or function applications over free terms.
    pub fn is_free(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_free),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.mentions(v)),
        }
    }
}

/// Sort of a term under `sig`.
pub fn sort_of(t: &Term, sig: &Signature) -> Result<Sort> {
    match t {
        Term::Var(v) => Ok(v.sort),
        Term::Const(c) => sig.constant(c).ok_or_else(|| Error::UnknownSymbol(c.clone())),
        Term::App(f, args) => {
            let fs = sig.function(f).ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
            if fs.args.len() != args.len() {
                return Err(Error::ArityMismatch {
                    name: f.clone(),
                    expected: fs.args.len(),
                    got: args.len(),
                });
            }
            for (i, (a, tag)) in args.iter().zip(&fs.args).enumerate() {
                let s = sort_of(a, sig)?;
                if !tag.accepts(s) {
                    return Err(Error::ArgumentSortMismatch {
                        name: f.clone(),
                        index: i,
                        expected: tag.to_string(),
                        got: s.to_string(),
                    });
                }
            }
            Ok(fs.result)
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => f.write_str(c),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
