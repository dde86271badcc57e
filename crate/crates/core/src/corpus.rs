//! Seeded random models, action models and formulas over a small fixed
//! vocabulary, for the semantic oracles.
//!
//! The vocabulary has agent constants `a`, `b`, object constants `c`, `d`,
//! relations `p/0`, `q/1` (either sort) and `r(agt, obj)`. Constants are
//! non-rigid, so postcondition keys can alias.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::ActionModel;
use crate::semantics::{Domain, Model, ModelBuilder};
use crate::syntax::{xstar, Atom, Formula, Signature, Sort, SortTag, Term, Var};

pub const SEED_VAR: &str = "TERMPLAN_SEED";

/// `TERMPLAN_SEED` if set and numeric, else `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusConfig {
    pub max_worlds: usize,
    pub max_agents: usize,
    pub max_objects: usize,
    pub max_events: usize,
    /// Connective depth of generated formulas.
    pub depth: usize,
    /// Stacked dynamic modalities along any branch.
    pub max_stack: usize,
    pub edge_prob: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            max_worlds: 4,
            max_agents: 3,
            max_objects: 2,
            max_events: 2,
            depth: 3,
            max_stack: 2,
            edge_prob: 0.4,
        }
    }
}

pub fn signature() -> Arc<Signature> {
    let mut s = Signature::new();
    s.add_constant("a", Sort::Agt).unwrap();
    s.add_constant("b", Sort::Agt).unwrap();
    s.add_constant("c", Sort::Obj).unwrap();
    s.add_constant("d", Sort::Obj).unwrap();
    s.add_relation("p", vec![]).unwrap();
    s.add_relation("q", vec![SortTag::AgtOrObj]).unwrap();
    s.add_relation("r", vec![SortTag::Agt, SortTag::Obj]).unwrap();
    Arc::new(s)
}

pub struct Generator {
    rng: ChaCha8Rng,
    pub cfg: CorpusConfig,
    pub sig: Arc<Signature>,
    actions: usize,
}

impl Generator {
    pub fn new(seed: u64, cfg: CorpusConfig) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
            sig: signature(),
            actions: 0,
        }
    }

    pub fn model(&mut self) -> Model {
        let na = self.rng.random_range(1..=self.cfg.max_agents);
        let no = self.rng.random_range(1..=self.cfg.max_objects);
        let nw = self.rng.random_range(1..=self.cfg.max_worlds);
        let domain = Domain::new(
            (0..na).map(|i| format!("i{i}")).collect(),
            (0..no).map(|i| format!("o{i}")).collect(),
        )
        .unwrap();
        let mut b = ModelBuilder::new(self.sig.clone(), domain);
        for w in 0..nw {
            let name = format!("w{w}");
            b.add_world(&name).unwrap();
            for (c, agt) in [("a", true), ("b", true), ("c", false), ("d", false)] {
                let v = if agt {
                    format!("i{}", self.rng.random_range(0..na))
                } else {
                    format!("o{}", self.rng.random_range(0..no))
                };
                b.set_constant(&name, c, &v).unwrap();
            }
            if self.rng.random_bool(0.5) {
                b.add_fact(&name, "p", &[]).unwrap();
            }
            let all: Vec<String> = (0..na)
                .map(|i| format!("i{i}"))
                .chain((0..no).map(|i| format!("o{i}")))
                .collect();
            for x in &all {
                if self.rng.random_bool(0.5) {
                    b.add_fact(&name, "q", &[x]).unwrap();
                }
            }
            for i in 0..na {
                for o in 0..no {
                    if self.rng.random_bool(0.5) {
                        b.add_fact(&name, "r", &[&format!("i{i}"), &format!("o{o}")]).unwrap();
                    }
                }
            }
        }
        for i in 0..na {
            for u in 0..nw {
                for v in 0..nw {
                    if self.rng.random_bool(self.cfg.edge_prob) {
                        b.add_edge_index(i, u, v);
                    }
                }
            }
        }
        b.build().unwrap()
    }

    fn term(&mut self, sort: Sort, bound: &[Var]) -> Term {
        let vars: Vec<&Var> = bound.iter().filter(|v| v.sort == sort).collect();
        if !vars.is_empty() && self.rng.random_bool(0.5) {
            return Term::Var((*vars.choose(&mut self.rng).unwrap()).clone());
        }
        let names: &[&str] = match sort {
            Sort::Agt => &["a", "b"],
            Sort::Obj => &["c", "d"],
        };
        Term::constant(names.choose(&mut self.rng).unwrap())
    }

    fn any_sort(&mut self) -> Sort {
        if self.rng.random_bool(0.5) {
            Sort::Agt
        } else {
            Sort::Obj
        }
    }

    fn atom(&mut self, bound: &[Var]) -> Atom {
        match self.rng.random_range(0..4) {
            0 => Atom::new("p", vec![]),
            1 => {
                let s = self.any_sort();
                Atom::new("q", vec![self.term(s, bound)])
            }
            2 => Atom::new("r", vec![self.term(Sort::Agt, bound), self.term(Sort::Obj, bound)]),
            _ => {
                let s = self.any_sort();
                Atom::new("=", vec![self.term(s, bound), self.term(s, bound)])
            }
        }
    }

    fn var(&mut self, sort: Sort, bound: &[Var]) -> Var {
        // reuse names now and then so shadowing gets exercised
        let base = match sort {
            Sort::Agt => "x",
            Sort::Obj => "y",
        };
        let k = self.rng.random_range(0..=bound.len().min(2));
        Var::new(&format!("{base}{k}"), sort)
    }

    /// Static formula, free variables among `bound`.
    pub fn static_formula(&mut self, depth: usize, bound: &[Var]) -> Formula {
        self.formula_in(depth, 0, bound)
    }

    /// Formula with at most `stack` nested dynamic modalities on any branch.
    pub fn formula(&mut self, depth: usize, stack: usize) -> Formula {
        self.formula_in(depth, stack, &[])
    }

    fn formula_in(&mut self, depth: usize, stack: usize, bound: &[Var]) -> Formula {
        if depth == 0 {
            return match self.rng.random_range(0..8) {
                0 => Formula::Top,
                1 => Formula::Bottom,
                _ => Formula::Atom(self.atom(bound)),
            };
        }
        let top = if stack > 0 { 9 } else { 7 };
        match self.rng.random_range(0..top) {
            0 => Formula::Atom(self.atom(bound)),
            1 => Formula::not(self.formula_in(depth - 1, stack, bound)),
            2 => {
                let n = self.rng.random_range(2..=3);
                Formula::and((0..n).map(|_| self.formula_in(depth - 1, stack, bound)).collect())
            }
            3 => match self.rng.random_range(0..3) {
                0 => Formula::or(vec![
                    self.formula_in(depth - 1, stack, bound),
                    self.formula_in(depth - 1, stack, bound),
                ]),
                1 => Formula::implies(
                    self.formula_in(depth - 1, stack, bound),
                    self.formula_in(depth - 1, stack, bound),
                ),
                _ => Formula::iff(
                    self.formula_in(depth - 1, stack, bound),
                    self.formula_in(depth - 1, stack, bound),
                ),
            },
            4 => {
                let t = self.term(Sort::Agt, bound);
                Formula::knows(t, self.formula_in(depth - 1, stack, bound))
            }
            5 | 6 => {
                let s = self.any_sort();
                let x = self.var(s, bound);
                let mut inner: Vec<Var> = bound.iter().filter(|v| v.name != x.name).cloned().collect();
                inner.push(x.clone());
                let body = self.formula_in(depth - 1, stack, &inner);
                if self.rng.random_bool(0.5) {
                    Formula::forall(x, body)
                } else {
                    Formula::exists(x, body)
                }
            }
            _ => {
                let a = Arc::new(self.action());
                let e = a.events.choose(&mut self.rng).unwrap().clone();
                Formula::dynamic(a, &e, self.formula_in(depth - 1, stack - 1, bound))
            }
        }
    }

    fn edge_condition(&mut self) -> Formula {
        let x = Term::Var(xstar());
        match self.rng.random_range(0..6) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            2 => Formula::eq(x.clone(), x),
            3 => {
                let t = self.term(Sort::Agt, &[]);
                Formula::eq(x, t)
            }
            4 => {
                let t = self.term(Sort::Agt, &[]);
                Formula::neq(x, t)
            }
            _ => {
                let f = self.static_formula(1, &[xstar()]);
                Formula::and2(Formula::atom("q", vec![x]), f)
            }
        }
    }

    fn ground_key(&mut self) -> Atom {
        match self.rng.random_range(0..3) {
            0 => Atom::new("p", vec![]),
            1 => {
                let s = self.any_sort();
                Atom::new("q", vec![self.term(s, &[])])
            }
            _ => Atom::new("r", vec![self.term(Sort::Agt, &[]), self.term(Sort::Obj, &[])]),
        }
    }

    /// Action model with static sentences as preconditions and
    /// postcondition values, and edge conditions in `x*`.
    pub fn action(&mut self) -> ActionModel {
        let n = self.rng.random_range(1..=self.cfg.max_events);
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.actions += 1;
        let mut a = ActionModel::new(&format!("A{}", self.actions), &refs);
        for e in &names {
            let pre = if self.rng.random_bool(0.3) {
                Formula::Top
            } else {
                self.static_formula(1, &[])
            };
            a.set_pre(e, pre).unwrap();
            for _ in 0..self.rng.random_range(0..=2) {
                let key = self.ground_key();
                let v = self.static_formula(1, &[]);
                a.set_post(e, key, v).unwrap();
            }
        }
        for e in &names {
            for f in &names {
                let q = self.edge_condition();
                a.set_edge(e, f, q).unwrap();
            }
        }
        a
    }

    /// A model and a sentence over it.
    pub fn instance(&mut self) -> (Model, Formula) {
        let m = self.model();
        let f = self.formula(self.cfg.depth, self.cfg.max_stack);
        (m, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::well_formed;

    #[test]
    fn generation_is_deterministic() {
        let mut g1 = Generator::new(7, CorpusConfig::default());
        let mut g2 = Generator::new(7, CorpusConfig::default());
        for _ in 0..20 {
            let (m1, f1) = g1.instance();
            let (m2, f2) = g2.instance();
            assert_eq!(f1.to_string(), f2.to_string());
            assert_eq!(m1.num_worlds(), m2.num_worlds());
            assert_eq!(m1.access, m2.access);
        }
    }

    #[test]
    fn generated_formulas_are_well_formed_sentences() {
        let mut g = Generator::new(11, CorpusConfig::default());
        for _ in 0..200 {
            let (m, f) = g.instance();
            assert!(m.num_worlds() <= 4 && m.domain.num_agents() <= 3);
            assert!(f.is_sentence(), "{f}");
            assert!(well_formed(&f, &g.sig).violations.is_empty(), "{f}");
        }
    }
}
