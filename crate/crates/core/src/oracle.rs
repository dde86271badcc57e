//! Naive evaluator and product update, written straight from the
//! satisfaction clauses, for checking the compiled versions in tests.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamics::ActionModel;
use crate::semantics::{Elem, Model, World};
use crate::syntax::{xstar, Formula, Sort, Term, Var, EQ};

pub type Env = BTreeMap<Var, Elem>;

pub fn term(m: &Model, w: usize, env: &Env, t: &Term) -> Option<Elem> {
    match t {
        Term::Var(v) => Some(*env.get(v).expect("unbound variable")),
        Term::Const(c) => {
            let i = m.sig.constants().position(|(n, _)| n == c).expect("unknown constant");
            Some(m.worlds[w].consts[i])
        }
        Term::App(f, args) => {
            let i = m.sig.functions().position(|(n, _)| n == f).expect("unknown function");
            let vals: Vec<Elem> = args.iter().map(|a| term(m, w, env, a)).collect::<Option<_>>()?;
            m.worlds[w].funcs[i].iter().find(|(a, _)| *a == vals).map(|(_, v)| *v)
        }
    }
}

fn elems(m: &Model, s: Sort) -> Vec<Elem> {
    (0..m.domain.len()).filter(|&e| m.domain.sort(e) == s).collect()
}

pub fn holds(m: &Model, w: usize, env: &Env, f: &Formula) -> bool {
    use Formula::*;
    match f {
        Top => true,
        Bottom => false,
        Atom(a) => {
            let vals: Option<Vec<Elem>> = a.args.iter().map(|t| term(m, w, env, t)).collect();
            let Some(vals) = vals else { return false };
            if a.rel == EQ {
                return vals[0] == vals[1];
            }
            let r = m.sig.relations().position(|(n, _)| n == a.rel).expect("unknown relation");
            m.worlds[w].rels[r].contains(&vals)
        }
        Neq(a, b) => !holds(m, w, env, &Formula::eq(a.clone(), b.clone())),
        Not(g) => !holds(m, w, env, g),
        And(fs) => fs.iter().all(|g| holds(m, w, env, g)),
        Or(fs) => fs.iter().any(|g| holds(m, w, env, g)),
        Implies(a, b) => !holds(m, w, env, a) || holds(m, w, env, b),
        Iff(a, b) => holds(m, w, env, a) == holds(m, w, env, b),
        Knows(t, g) => {
            let i = term(m, w, env, t).expect("undefined modal index");
            (0..m.num_worlds())
                .filter(|&v| m.access[i][w].contains(&v))
                .all(|v| holds(m, v, env, g))
        }
        Forall(v, g) => elems(m, v.sort).into_iter().all(|d| {
            let mut e = env.clone();
            e.insert(v.clone(), d);
            holds(m, w, &e, g)
        }),
        Exists(v, g) => elems(m, v.sort).into_iter().any(|d| {
            let mut e = env.clone();
            e.insert(v.clone(), d);
            holds(m, w, &e, g)
        }),
        Dyn(a, e, g) => {
            let ei = a.events.iter().position(|x| x == e).unwrap();
            let (n, index) = update(m, a);
            match index.get(&(w, ei)) {
                None => true,
                Some(&nw) => holds(&n.unwrap(), nw, env, g),
            }
        }
    }
}

/// `M ⊗ A` with the map from `(w, e)` to new worlds. Postconditions are
/// applied per tuple: a tuple named by a false condition is removed, one
/// named only by true conditions is added.
pub fn update(m: &Model, a: &ActionModel) -> (Option<Model>, BTreeMap<(usize, usize), usize>) {
    let none = Env::new();
    let mut index = BTreeMap::new();
    let mut worlds = Vec::new();
    let mut pairs = Vec::new();
    for w in 0..m.num_worlds() {
        for e in 0..a.events.len() {
            if !holds(m, w, &none, &a.pre[e]) {
                continue;
            }
            let src = &m.worlds[w];
            let mut verdict: BTreeMap<(usize, Vec<Elem>), bool> = BTreeMap::new();
            for (atom, cond) in &a.post[e] {
                let vals: Option<Vec<Elem>> = atom.args.iter().map(|t| term(m, w, &none, t)).collect();
                let Some(vals) = vals else { continue };
                let r = m.sig.relations().position(|(n, _)| n == atom.rel).unwrap();
                let v = holds(m, w, &none, cond);
                let slot = verdict.entry((r, vals)).or_insert(true);
                *slot &= v;
            }
            let mut rels: Vec<BTreeSet<Vec<Elem>>> = src.rels.clone();
            for ((r, vals), v) in verdict {
                if v {
                    rels[r].insert(vals);
                } else {
                    rels[r].remove(&vals);
                }
            }
            index.insert((w, e), worlds.len());
            pairs.push((w, e));
            worlds.push(World {
                name: format!("{}.{}", src.name, a.events[e]),
                consts: src.consts.clone(),
                rels,
                funcs: src.funcs.clone(),
            });
        }
    }
    if worlds.is_empty() {
        return (None, index);
    }
    let mut access = vec![vec![Vec::new(); worlds.len()]; m.domain.num_agents()];
    for (i, rows) in access.iter_mut().enumerate() {
        for (s, &(w, e)) in pairs.iter().enumerate() {
            let env: Env = [(xstar(), i)].into_iter().collect();
            for (t, &(v, f)) in pairs.iter().enumerate() {
                if m.access[i][w].contains(&v) && holds(m, w, &env, &a.edge[e][f]) {
                    rows[s].push(t);
                }
            }
        }
    }
    let model = Model {
        sig: m.sig.clone(),
        domain: m.domain.clone(),
        worlds,
        access,
    };
    (Some(model), index)
}
