use std::collections::{BTreeMap, BTreeSet};

use super::{sort_of, Atom, Formula, Signature, Term, Var};
use crate::error::{Error, Result};

/// First name of the form `base'`, `base'2`, `base'3`, ... not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let first = format!("{base}'");
    if !avoid.contains(&first) {
        return first;
    }
    (2..)
        .map(|k| format!("{base}'{k}"))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

/// Capture-avoiding `φ(x ↦ t)`, rejecting a term of the wrong sort.
pub fn substitute(f: &Formula, x: &Var, t: &Term, sig: &Signature) -> Result<Formula> {
    let s = sort_of(t, sig)?;
    if s != x.sort {
        return Err(Error::SortMismatch {
            var: x.name.clone(),
            expected: x.sort.to_string(),
            got: s.to_string(),
        });
    }
    Ok(substitute_unchecked(f, x, t))
}

pub fn substitute_unchecked(f: &Formula, x: &Var, t: &Term) -> Formula {
    let mut s = BTreeMap::new();
    s.insert(x.clone(), t.clone());
    substitute_many(f, &s)
}

pub(crate) fn subst_term(t: &Term, s: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| subst_term(a, s)).collect()),
    }
}

pub(crate) fn subst_atom(a: &Atom, s: &BTreeMap<Var, Term>) -> Atom {
    Atom {
        rel: a.rel.clone(),
        args: a.args.iter().map(|t| subst_term(t, s)).collect(),
    }
}

/// Simultaneous capture-avoiding substitution. Bound variables that would
/// capture a variable of an inserted term are renamed. Bodies of dynamic
/// modalities are substituted into; action models are closed and left alone.
pub fn substitute_many(f: &Formula, s: &BTreeMap<Var, Term>) -> Formula {
    if s.is_empty() {
        return f.clone();
    }
    use Formula::*;
    match f {
        Top => Top,
        Bottom => Bottom,
        Atom(a) => Atom(subst_atom(a, s)),
        Neq(a, b) => Neq(subst_term(a, s), subst_term(b, s)),
        Not(g) => Formula::not(substitute_many(g, s)),
        And(fs) => And(fs.iter().map(|g| substitute_many(g, s)).collect()),
        Or(fs) => Or(fs.iter().map(|g| substitute_many(g, s)).collect()),
        Implies(a, b) => Formula::implies(substitute_many(a, s), substitute_many(b, s)),
        Iff(a, b) => Formula::iff(substitute_many(a, s), substitute_many(b, s)),
        Knows(t, g) => Formula::knows(subst_term(t, s), substitute_many(g, s)),
        Dyn(a, e, g) => Dyn(a.clone(), e.clone(), Box::new(substitute_many(g, s))),
        Forall(v, g) | Exists(v, g) => {
            let (v, g) = subst_binder(v, g, s);
            if matches!(f, Forall(..)) {
                Formula::forall(v, g)
            } else {
                Formula::exists(v, g)
            }
        }
    }
}

fn subst_binder(v: &Var, body: &Formula, s: &BTreeMap<Var, Term>) -> (Var, Formula) {
    let free = body.free_vars();
    let inner: BTreeMap<Var, Term> = s
        .iter()
        .filter(|(k, _)| *k != v && free.contains(*k))
        .map(|(k, t)| (k.clone(), t.clone()))
        .collect();
    if inner.is_empty() {
        return (v.clone(), body.clone());
    }
    let captures = inner.values().any(|t| t.mentions(v));
    if !captures {
        return (v.clone(), substitute_many(body, &inner));
    }
    let mut avoid: BTreeSet<String> = body.all_vars().into_iter().map(|w| w.name).collect();
    for (k, t) in &inner {
        avoid.insert(k.name.clone());
        avoid.extend(t.vars().into_iter().map(|w| w.name));
    }
    let renamed = Var {
        name: fresh_name(&v.name, &avoid),
        sort: v.sort,
    };
    let mut full = inner;
    full.insert(v.clone(), Term::Var(renamed.clone()));
    (renamed, substitute_many(body, &full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{signature, CorpusConfig, Generator};
    use crate::oracle::{self, Env};
    use crate::syntax::Sort;
    use proptest::prelude::*;

    fn names(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn fresh_names() {
        assert_eq!(fresh_name("x", &names(&[])), "x'");
        assert_eq!(fresh_name("x", &names(&["x'"])), "x'2");
        assert_eq!(fresh_name("x", &names(&["x'", "x'2", "x'3"])), "x'4");
    }

    #[test]
    fn bound_variable_is_renamed() {
        let x = Var::new("x", Sort::Agt);
        let y = Var::new("y", Sort::Agt);
        let f = Formula::forall(y.clone(), Formula::atom("q", vec![Term::Var(x.clone()), Term::Var(y.clone())]));
        let g = substitute_unchecked(&f, &x, &Term::Var(y.clone()));
        let y2 = Var::new("y'", Sort::Agt);
        assert_eq!(g, Formula::forall(y2.clone(), Formula::atom("q", vec![Term::Var(y), Term::Var(y2)])));
    }

    #[test]
    fn bound_occurrences_stay() {
        let x = Var::new("x", Sort::Agt);
        let f = Formula::and2(
            Formula::atom("q", vec![Term::Var(x.clone())]),
            Formula::exists(x.clone(), Formula::atom("q", vec![Term::Var(x.clone())])),
        );
        let g = substitute(&f, &x, &Term::constant("a"), &signature()).unwrap();
        assert_eq!(g.free_vars(), BTreeSet::new());
        assert_eq!(g.size(), f.size());
        assert!(matches!(substitute(&f, &x, &Term::constant("c"), &signature()), Err(Error::SortMismatch { .. })));
        assert!(matches!(substitute(&f, &x, &Term::constant("zz"), &signature()), Err(Error::UnknownSymbol(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        /// `φ[x ↦ y]` at `v` agrees with `φ` at `v[x ↦ v(y)]`.
        #[test]
        fn substituting_a_variable_shifts_the_valuation(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let m = g.model();
            let (x, y) = (Var::new("x0", Sort::Agt), Var::new("x1", Sort::Agt));
            let f = g.static_formula(3, &[x.clone(), y.clone()]);
            let h = substitute_unchecked(&f, &x, &Term::Var(y.clone()));
            prop_assert!(!h.free_vars().contains(&x));
            for d in m.domain.elems(Sort::Agt) {
                let before: Env = [(x.clone(), d), (y.clone(), d)].into_iter().collect();
                let after: Env = [(y.clone(), d)].into_iter().collect();
                for w in 0..m.num_worlds() {
                    prop_assert_eq!(oracle::holds(&m, w, &before, &f), oracle::holds(&m, w, &after, &h), "{} vs {}", f, h);
                }
            }
        }
    }
}
