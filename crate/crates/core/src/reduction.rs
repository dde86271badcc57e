//! Translation of dynamic formulas into the static language by reduction
//! axioms, the complexity measure that orders the rewrites, and a semantic
//! equivalence check over a corpus of models.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dynamics::{compose_models, effective_post, ActionModel, PostRule};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::semantics::{satisfies, Model, Valuation};
use crate::syntax::{fresh_name, substitute_many, xstar, Formula, Term, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeRule {
    /// `pre(e) → ⋀ (Q(e,e')[x*↦t] → K_t [A,e']φ)`.
    #[default]
    Guarded,
    /// The same conjunction without the `pre(e)` guard.
    Printed,
}

#[derive(Clone, Copy, Debug)]
pub struct ReduceConfig {
    pub post: PostRule,
    pub knowledge: KnowledgeRule,
    /// Rewrite steps allowed before giving up.
    pub budget: usize,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            post: PostRule::AliasAware,
            knowledge: KnowledgeRule::Guarded,
            budget: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axiom {
    Top,
    Atom,
    Negation,
    Conjunction,
    Knowledge,
    Quantification,
    Composition,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Top => "action and top",
            Axiom::Atom => "action and atom",
            Axiom::Negation => "action and negation",
            Axiom::Conjunction => "action and conjunction",
            Axiom::Knowledge => "action and knowledge",
            Axiom::Quantification => "action and quantification",
            Axiom::Composition => "action composition",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub axiom: Axiom,
    /// Child indices from the root to the redex.
    pub position: Vec<usize>,
    /// Complexity of the redex and of what replaced it.
    pub before: u64,
    pub after: u64,
}

impl TraceStep {
    pub fn decreased(&self) -> bool {
        self.after < self.before
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    /// Steps whose complexity did not go down, per axiom.
    pub fn non_decreasing(&self) -> BTreeMap<Axiom, usize> {
        let mut out = BTreeMap::new();
        for s in self.steps.iter().filter(|s| !s.decreased()) {
            *out.entry(s.axiom).or_insert(0) += 1;
        }
        out
    }
}

/// Memoized complexity. Action models are keyed by address and held so the
/// address stays theirs.
#[derive(Default)]
pub struct Complexity {
    post: PostRule,
    actions: HashMap<usize, (Arc<ActionModel>, u64)>,
}

impl Complexity {
    pub fn new(post: PostRule) -> Self {
        Complexity {
            post,
            actions: HashMap::new(),
        }
    }

    pub fn formula(&mut self, f: &Formula) -> u64 {
        self.core(&f.normalize())
    }

    fn core(&mut self, f: &Formula) -> u64 {
        use Formula::*;
        match f {
            Top | Bottom | Atom(_) | Neq(..) => 1,
            Not(g) | Knows(_, g) | Forall(_, g) | Exists(_, g) => 1 + self.core(g),
            // n-ary conjunction counted as its right-nested binary form
            And(fs) => match fs.split_last() {
                None => 1,
                Some((last, init)) => {
                    let mut acc = self.core(last);
                    for g in init.iter().rev() {
                        acc = 1 + self.core(g).max(acc);
                    }
                    acc
                }
            },
            Dyn(a, _, g) => (4u64.saturating_add(self.action(a))).saturating_mul(self.core(g)),
            Or(_) | Implies(..) | Iff(..) => self.core(&f.normalize()),
        }
    }

    /// `c(A)`: the largest complexity among preconditions, edge conditions
    /// and `post(e)(r(t⃗))` over all ground atoms. Atoms left unchanged
    /// count 1; under [`PostRule::AliasAware`] an atom sharing a relation
    /// with some key is worth its effective postcondition.
    pub fn action(&mut self, a: &Arc<ActionModel>) -> u64 {
        let key = Arc::as_ptr(a) as usize;
        if let Some((_, c)) = self.actions.get(&key) {
            return *c;
        }
        let mut c = 1;
        for f in a.pre.iter().chain(a.edge.iter().flatten()) {
            c = c.max(self.formula(f));
        }
        for e in 0..a.events.len() {
            for target in probe_atoms(a, e) {
                let v = effective_post(a, e, &target, self.post);
                c = c.max(self.formula(&v));
            }
        }
        self.actions.insert(key, (a.clone(), c));
        c
    }
}

/// Ground atoms covering every way a target can coincide with the keys of
/// its relation: per position, each key argument there or a term unlike all
/// of them.
fn probe_atoms(a: &ActionModel, e: usize) -> Vec<crate::syntax::Atom> {
    let other = Term::constant("\u{2606}");
    let mut rels: BTreeMap<&str, Vec<&[Term]>> = BTreeMap::new();
    for (k, _) in &a.post[e] {
        if !k.is_equality() {
            rels.entry(&k.rel).or_default().push(&k.args);
        }
    }
    let mut out = Vec::new();
    for (rel, keys) in rels {
        let arity = keys[0].len();
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for i in 0..arity {
            let mut options: Vec<Term> = keys.iter().map(|k| k[i].clone()).collect();
            options.push(other.clone());
            options.sort();
            options.dedup();
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    options.iter().map(move |o| {
                        let mut t = t.clone();
                        t.push(o.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| crate::syntax::Atom::new(rel, t)));
    }
    out
}

pub fn complexity(f: &Formula) -> u64 {
    Complexity::default().formula(f)
}

pub fn action_complexity(a: &Arc<ActionModel>) -> u64 {
    Complexity::default().action(a)
}

fn dyn_(a: &Arc<ActionModel>, e: usize, f: Formula) -> Formula {
    Formula::dynamic(a.clone(), &a.events[e], f)
}

fn free_in_action(a: &ActionModel, x: &Var) -> bool {
    a.formulas().any(|f| f.free_vars().contains(x))
}

fn all_names(f: &Formula, a: &ActionModel) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = f.all_vars().into_iter().map(|v| v.name).collect();
    for g in a.formulas() {
        out.extend(g.all_vars().into_iter().map(|v| v.name));
    }
    out
}

/// `Q[x*↦t]`. A non-rigid `t` cannot be pushed under a modality inside `Q`,
/// where it would be read at other worlds, so its value is bound first:
/// `∃z (z = t ∧ Q[x*↦z])`.
fn edge_at(q: &Formula, t: &Term, body: &Formula) -> Formula {
    let x = xstar();
    if matches!(t, Term::Var(_)) || !q.free_under_modality(&x) {
        let mut s = BTreeMap::new();
        s.insert(x, t.clone());
        return substitute_many(q, &s);
    }
    let mut avoid: BTreeSet<String> = q.all_vars().into_iter().map(|v| v.name).collect();
    avoid.extend(body.all_vars().into_iter().map(|v| v.name));
    avoid.extend(t.vars().into_iter().map(|v| v.name));
    let z = Var::new(&fresh_name("z", &avoid), crate::syntax::Sort::Agt);
    let mut s = BTreeMap::new();
    s.insert(x, Term::Var(z.clone()));
    Formula::exists(
        z.clone(),
        Formula::and2(Formula::eq(Term::Var(z), t.clone()), substitute_many(q, &s)),
    )
}

/// Rewrites `[A,e]body` by the axiom matching the head of `body`.
fn apply(a: &Arc<ActionModel>, e: usize, body: &Formula, cfg: &ReduceConfig) -> Result<(Axiom, Formula)> {
    use Formula::*;
    let pre = a.pre[e].clone();
    let out = match body {
        Top => (Axiom::Top, Top),
        Atom(at) => (Axiom::Atom, Formula::implies(pre, effective_post(a, e, at, cfg.post))),
        Not(g) => (
            Axiom::Negation,
            Formula::implies(pre, Formula::not(dyn_(a, e, (**g).clone()))),
        ),
        And(fs) => (
            Axiom::Conjunction,
            And(fs.iter().map(|g| dyn_(a, e, g.clone())).collect()),
        ),
        Knows(t, g) => {
            let mut parts = Vec::new();
            for f in 0..a.events.len() {
                let q = &a.edge[e][f];
                if *q == Bottom {
                    continue;
                }
                parts.push(Formula::implies(
                    edge_at(q, t, g),
                    Formula::knows(t.clone(), dyn_(a, f, (**g).clone())),
                ));
            }
            let conj = Formula::and(parts);
            let out = match cfg.knowledge {
                KnowledgeRule::Guarded => Formula::implies(pre, conj),
                KnowledgeRule::Printed => conj,
            };
            (Axiom::Knowledge, out)
        }
        Forall(x, g) => {
            let (x, g) = if free_in_action(a, x) {
                let fresh = Var::new(&fresh_name(&x.name, &all_names(g, a)), x.sort);
                let mut s = BTreeMap::new();
                s.insert(x.clone(), Term::Var(fresh.clone()));
                (fresh, substitute_many(g, &s))
            } else {
                (x.clone(), (**g).clone())
            };
            (
                Axiom::Quantification,
                Formula::implies(pre, Formula::forall(x, dyn_(a, e, g))),
            )
        }
        Dyn(b, f, g) => {
            let fi = b.event(f)?;
            let c = Arc::new(compose_models(a, b, cfg.post));
            let idx = e * b.events.len() + fi;
            (Axiom::Composition, dyn_(&c, idx, (**g).clone()))
        }
        Bottom | Or(_) | Implies(..) | Iff(..) | Exists(..) | Neq(..) => {
            return Err(Error::Internal("redex body is not in core form".into()))
        }
    };
    Ok(out)
}

/// Head-normalizes abbreviations so a rule applies to the top connective.
fn head_normal(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Bottom | Or(_) | Implies(..) | Iff(..) | Exists(..) | Neq(..) => f.normalize(),
        _ => f.clone(),
    }
}

fn child_mut(f: &mut Formula, i: usize) -> &mut Formula {
    use Formula::*;
    match f {
        Not(g) | Knows(_, g) | Forall(_, g) | Exists(_, g) | Dyn(_, _, g) => g,
        And(fs) | Or(fs) => &mut fs[i],
        Implies(a, b) | Iff(a, b) => {
            if i == 0 {
                a
            } else {
                b
            }
        }
        _ => unreachable!("no child {i}"),
    }
}

/// Leftmost redex in pre-order: a modality over a modality, or a modality
/// over a formula free of modalities.
fn find(f: &Formula, path: &mut Vec<usize>) -> bool {
    if let Formula::Dyn(_, _, body) = f {
        if matches!(**body, Formula::Dyn(..)) || body.is_static() {
            return true;
        }
    }
    for (i, c) in f.children().into_iter().enumerate() {
        path.push(i);
        if find(c, path) {
            return true;
        }
        path.pop();
    }
    false
}

/// One rewrite at the leftmost redex.
pub fn reduce_step(f: &Formula, cfg: &ReduceConfig, c: &mut Complexity) -> Result<(Formula, TraceStep)> {
    let mut path = Vec::new();
    if !find(f, &mut path) {
        return Err(Error::NoRedex);
    }
    let mut out = f.clone();
    let mut node = &mut out;
    for &i in &path {
        node = child_mut(node, i);
    }
    let Formula::Dyn(a, e, body) = &*node else {
        unreachable!()
    };
    let e = a.event(e)?;
    let body = head_normal(body);
    let (axiom, replacement) = apply(a, e, &body, cfg)?;
    let step = TraceStep {
        axiom,
        position: path,
        before: c.formula(node),
        after: c.formula(&replacement),
    };
    *node = replacement;
    Ok((out, step))
}

pub fn translate(f: &Formula) -> Result<Formula> {
    translate_with(f, &ReduceConfig::default()).map(|(g, _)| g)
}

/// Rewrites to a fixpoint. The result contains no dynamic modality.
pub fn translate_with(f: &Formula, cfg: &ReduceConfig) -> Result<(Formula, RewriteTrace)> {
    let mut c = Complexity::new(cfg.post);
    let mut cur = f.clone();
    let mut trace = RewriteTrace::default();
    loop {
        match reduce_step(&cur, cfg, &mut c) {
            Ok((next, step)) => {
                trace.steps.push(step);
                if trace.steps.len() > cfg.budget {
                    return Err(Error::RewriteBudgetExhausted(cfg.budget));
                }
                cur = next;
            }
            Err(Error::NoRedex) => return Ok((cur, trace)),
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub model: usize,
    pub world: String,
    pub valuation: Vec<(String, String)>,
    pub left: bool,
    pub right: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EquivalenceReport {
    /// (model, world, valuation) triples evaluated.
    pub checked: usize,
    pub disagreements: usize,
    pub first: Option<Disagreement>,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.disagreements == 0
    }
}

fn valuations(m: &Model, vars: &[Var]) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for v in vars {
        let mut next = Vec::new();
        for val in &out {
            for d in m.domain.elems(v.sort) {
                next.push(val.clone().with(v.clone(), d));
            }
        }
        out = next;
    }
    out
}

/// Compares `phi` and `psi` at every world of every model under every
/// valuation of their free variables.
pub fn check_equivalence(phi: &Formula, psi: &Formula, corpus: &[Model]) -> Result<EquivalenceReport> {
    check_equivalence_with(phi, psi, corpus, Exec::default())
}

pub fn check_equivalence_with(
    phi: &Formula,
    psi: &Formula,
    corpus: &[Model],
    exec: Exec,
) -> Result<EquivalenceReport> {
    let fv = phi.free_vars();
    if fv != psi.free_vars() {
        return Err(Error::Semantic("the two formulas have different free variables".into()));
    }
    let vars: Vec<Var> = fv.into_iter().collect();
    let per_model = exec.map(corpus, |m| -> Result<EquivalenceReport> {
        let mut r = EquivalenceReport::default();
        for val in valuations(m, &vars) {
            for w in 0..m.num_worlds() {
                let (l, rr) = (satisfies(m, w, &val, phi)?, satisfies(m, w, &val, psi)?);
                r.checked += 1;
                if l != rr {
                    r.disagreements += 1;
                    if r.first.is_none() {
                        r.first = Some(Disagreement {
                            model: 0,
                            world: m.worlds[w].name.clone(),
                            valuation: val
                                .0
                                .iter()
                                .map(|(v, &d)| (v.name.clone(), m.domain.name(d).to_string()))
                                .collect(),
                            left: l,
                            right: rr,
                        });
                    }
                }
            }
        }
        Ok(r)
    });
    let mut out = EquivalenceReport::default();
    for (i, r) in per_model.into_iter().enumerate() {
        let r = r?;
        out.checked += r.checked;
        out.disagreements += r.disagreements;
        if out.first.is_none() {
            out.first = r.first.map(|d| Disagreement { model: i, ..d });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{signature, CorpusConfig, Generator};
    use crate::semantics::{Domain, ModelBuilder};
    use crate::syntax::Sort;
    use proptest::prelude::*;

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn p() -> Formula {
        Formula::atom("p", vec![])
    }

    fn q(t: Term) -> Formula {
        Formula::atom("q", vec![t])
    }

    fn agree(phi: &Formula, psi: &Formula, m: &Model) -> bool {
        check_equivalence(phi, psi, std::slice::from_ref(m)).unwrap().agree()
    }

    /// Two worlds, agents `i0 i1`, one object; `a` is `i0` at `w0` and
    /// `i1` at `w1`, everything else rigid.
    fn two_worlds(facts0: &[(&str, &[&str])], facts1: &[(&str, &[&str])], edges: &[(&str, &str, &str)]) -> Model {
        let d = Domain::new(vec!["i0".into(), "i1".into()], vec!["o0".into()]).unwrap();
        let mut b = ModelBuilder::new(signature(), d);
        for (w, a, facts) in [("w0", "i0", facts0), ("w1", "i1", facts1)] {
            b.add_world(w).unwrap();
            b.set_constant(w, "a", a).unwrap();
            b.set_constant(w, "b", "i0").unwrap();
            b.set_constant(w, "c", "o0").unwrap();
            b.set_constant(w, "d", "o0").unwrap();
            for (r, args) in facts.iter() {
                b.add_fact(w, r, args).unwrap();
            }
        }
        for (i, u, v) in edges {
            b.add_edge(i, u, v).unwrap();
        }
        b.build().unwrap()
    }

    fn step(f: &Formula, cfg: &ReduceConfig) -> (Formula, TraceStep) {
        reduce_step(f, cfg, &mut Complexity::new(cfg.post)).unwrap()
    }

    #[test]
    fn complexity_clauses() {
        assert_eq!(complexity(&q(c("c"))), 1);
        assert_eq!(complexity(&Formula::and2(Formula::not(q(c("c"))), q(c("d")))), 3);
        let skip = Arc::new(ActionModel::skip());
        assert_eq!(action_complexity(&skip), 1);
        assert_eq!(complexity(&Formula::dynamic(skip.clone(), "e", q(c("c")))), 5);
        let k = Formula::knows(c("a"), p());
        assert_eq!(complexity(&Formula::dynamic(skip, "e", k)), 10);
    }

    #[test]
    fn alias_aware_posts_raise_action_complexity() {
        let mut a = ActionModel::new("A", &["e"]);
        a.set_post("e", crate::syntax::Atom::new("q", vec![c("c")]), p()).unwrap();
        let a = Arc::new(a);
        // q(☆) reads (c = ☆ → p) ∧ (q(☆) ∨ c = ☆)
        assert!(action_complexity(&a) > 1);
        assert_eq!(Complexity::new(PostRule::Printed).action(&a), 1);
    }

    #[test]
    fn atom_row() {
        let mut a = ActionModel::new("A", &["e"]);
        a.set_pre("e", q(c("a"))).unwrap();
        a.set_post("e", crate::syntax::Atom::new("q", vec![c("c")]), p()).unwrap();
        let f = Formula::dynamic(Arc::new(a), "e", q(c("c")));
        let (g, s) = step(&f, &ReduceConfig::default());
        assert_eq!(s.axiom, Axiom::Atom);
        assert_eq!(g, Formula::implies(q(c("a")), p()));
        assert!(s.decreased());
    }

    #[test]
    fn knowledge_row_both_readings() {
        let mut a = ActionModel::new("A", &["e0", "e1"]);
        a.set_pre("e0", p()).unwrap();
        let neq = Formula::neq(Term::Var(xstar()), c("b"));
        a.set_edge("e0", "e1", neq).unwrap();
        let a = Arc::new(a);
        let f = Formula::dynamic(a.clone(), "e0", Formula::knows(c("a"), q(c("c"))));
        let conj = Formula::and(vec![
            Formula::implies(
                Formula::eq(c("a"), c("a")),
                Formula::knows(c("a"), Formula::dynamic(a.clone(), "e0", q(c("c")))),
            ),
            Formula::implies(
                Formula::neq(c("a"), c("b")),
                Formula::knows(c("a"), Formula::dynamic(a.clone(), "e1", q(c("c")))),
            ),
        ]);
        let (g, s) = step(&f, &ReduceConfig::default());
        assert_eq!(s.axiom, Axiom::Knowledge);
        assert_eq!(g, Formula::implies(p(), conj.clone()));
        let printed = ReduceConfig {
            knowledge: KnowledgeRule::Printed,
            ..Default::default()
        };
        assert_eq!(step(&f, &printed).0, conj);
    }

    #[test]
    fn guarded_knowledge_row_does_not_decrease_on_skip() {
        let f = Formula::dynamic(Arc::new(ActionModel::skip()), "e", Formula::knows(c("a"), p()));
        let (_, s) = step(&f, &ReduceConfig::default());
        assert_eq!((s.before, s.after), (10, 12));
        let printed = ReduceConfig {
            knowledge: KnowledgeRule::Printed,
            ..Default::default()
        };
        let (_, s) = step(&f, &printed);
        assert_eq!((s.before, s.after), (10, 9));
    }

    #[test]
    fn printed_knowledge_row_is_unsound_when_pre_fails() {
        // w0 ⊭ p sees w1 ⊨ p; [A,e]K_a⊥ holds at w0 vacuously.
        let m = two_worlds(&[], &[("p", &[])], &[("i0", "w0", "w1")]);
        let mut a = ActionModel::new("A", &["e"]);
        a.set_pre("e", p()).unwrap();
        a.set_edge("e", "e", Formula::Top).unwrap();
        let f = Formula::dynamic(Arc::new(a), "e", Formula::knows(c("a"), Formula::Bottom));
        assert!(agree(&f, &translate(&f).unwrap(), &m));
        let printed = ReduceConfig {
            knowledge: KnowledgeRule::Printed,
            ..Default::default()
        };
        let (t, _) = translate_with(&f, &printed).unwrap();
        let r = check_equivalence(&f, &t, &[m]).unwrap();
        assert_eq!(r.first.unwrap().world, "w0");
    }

    #[test]
    fn printed_posts_miss_aliased_keys() {
        // c and d both denote o0; setting q(c) also sets q(d)
        let m = two_worlds(&[], &[], &[]);
        let mut a = ActionModel::new("A", &["e"]);
        a.set_post("e", crate::syntax::Atom::new("q", vec![c("c")]), Formula::Top).unwrap();
        let f = Formula::dynamic(Arc::new(a), "e", q(c("d")));
        assert!(agree(&f, &translate(&f).unwrap(), &m));
        let printed = ReduceConfig {
            post: PostRule::Printed,
            ..Default::default()
        };
        let (t, _) = translate_with(&f, &printed).unwrap();
        assert!(!agree(&f, &t, &m));
    }

    #[test]
    fn non_rigid_index_is_bound_before_entering_edge_modality() {
        // Q = K_b q(x*); a names i0 at w0 but i1 at w1, the only world i0 sees.
        let m = two_worlds(&[], &[("q", &["i0"])], &[("i0", "w0", "w1")]);
        let mut a = ActionModel::new("A", &["e"]);
        let qx = Formula::knows(c("b"), q(Term::Var(xstar())));
        a.set_edge("e", "e", qx).unwrap();
        let a = Arc::new(a);
        let f = Formula::dynamic(a.clone(), "e", Formula::knows(c("a"), p()));
        assert!(agree(&f, &translate(&f).unwrap(), &m));
        let naive = Formula::implies(
            Formula::knows(c("b"), q(c("a"))),
            Formula::knows(c("a"), Formula::dynamic(a, "e", p())),
        );
        assert!(!agree(&f, &translate(&naive).unwrap(), &m));
    }

    #[test]
    fn stacked_modalities_compose_first() {
        let mut g = Generator::new(5, CorpusConfig::default());
        let (a, b) = (Arc::new(g.action()), Arc::new(g.action()));
        let f = Formula::dynamic(a, "e0", Formula::dynamic(b, "e0", p()));
        let (t, trace) = translate_with(&f, &ReduceConfig::default()).unwrap();
        assert_eq!(trace.steps[0].axiom, Axiom::Composition);
        assert_eq!(trace.steps[0].position, Vec::<usize>::new());
        assert!(t.is_static());
    }

    #[test]
    fn quantifier_row_freshens_bound_variable() {
        let x = Var::new("x", Sort::Agt);
        let mut a = ActionModel::new("A", &["e"]);
        // an open precondition mentioning x forces a rename
        a.set_pre("e", q(Term::Var(x.clone()))).unwrap();
        let f = Formula::dynamic(Arc::new(a), "e", Formula::forall(x.clone(), q(Term::Var(x.clone()))));
        let (g, s) = step(&f, &ReduceConfig::default());
        assert_eq!(s.axiom, Axiom::Quantification);
        let Formula::Implies(_, rhs) = &g else { panic!("{g}") };
        let Formula::Forall(y, _) = &**rhs else { panic!("{g}") };
        assert_ne!(y.name, "x");
    }

    #[test]
    fn static_formulas_are_fixed_points() {
        let f = Formula::or(vec![p(), Formula::knows(c("a"), q(c("c")))]);
        assert_eq!(translate(&f).unwrap(), f);
        assert!(matches!(
            reduce_step(&f, &ReduceConfig::default(), &mut Complexity::default()),
            Err(Error::NoRedex)
        ));
    }

    #[test]
    fn top_and_bottom_disagree_everywhere() {
        let m = two_worlds(&[], &[], &[]);
        let r = check_equivalence(&Formula::Top, &Formula::Bottom, &[m]).unwrap();
        assert_eq!(r.disagreements, 2);
        assert_eq!(r.checked, 2);
    }

    #[test]
    fn budget_is_enforced() {
        let skip = Arc::new(ActionModel::skip());
        let f = Formula::dynamic(skip, "e", Formula::and2(p(), p()));
        let cfg = ReduceConfig {
            budget: 1,
            ..Default::default()
        };
        assert!(matches!(translate_with(&f, &cfg), Err(Error::RewriteBudgetExhausted(1))));
    }

    fn row_instance(g: &mut Generator, row: u8, pick: usize) -> Formula {
        let a = Arc::new(g.action());
        let e = a.events[pick % a.events.len()].clone();
        let body = match row {
            0 => g.static_formula(0, &[]),
            1 => Formula::not(g.static_formula(1, &[])),
            2 => Formula::and2(g.static_formula(1, &[]), g.static_formula(1, &[])),
            3 => {
                let t = [c("a"), c("b")][pick % 2].clone();
                Formula::knows(t, g.static_formula(1, &[]))
            }
            4 => {
                let x = Var::new("x0", Sort::Agt);
                Formula::forall(x.clone(), g.static_formula(1, &[x]))
            }
            _ => {
                let b = Arc::new(g.action());
                let f = b.events[pick % b.events.len()].clone();
                Formula::dynamic(b, &f, g.static_formula(1, &[]))
            }
        };
        Formula::dynamic(a, &e, body)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn translation_is_static_sound_and_idempotent(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let (m, f) = g.instance();
            let t = translate(&f).unwrap();
            prop_assert!(t.is_static());
            prop_assert_eq!(&translate(&t).unwrap(), &t);
            let r = check_equivalence(&f, &t, &[m]).unwrap();
            prop_assert!(r.agree(), "{} vs {}: {:?}", f, t, r.first);
        }

        #[test]
        fn each_row_is_sound_on_its_own(seed in any::<u64>(), row in 0u8..6, pick in 0usize..4) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let m = g.model();
            let f = row_instance(&mut g, row, pick);
            let (h, _) = step(&f, &ReduceConfig::default());
            prop_assert!(agree(&f, &h, &m), "{} vs {}", f, h);
        }

        #[test]
        fn rows_other_than_knowledge_decrease(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let (_, f) = g.instance();
            let (_, trace) = translate_with(&f, &ReduceConfig::default()).unwrap();
            for s in trace.steps.iter().filter(|s| s.axiom != Axiom::Knowledge) {
                prop_assert!(s.decreased(), "{:?}", s);
            }
        }

        #[test]
        fn subformulas_are_no_more_complex(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let (_, f) = g.instance();
            let f = f.normalize();
            let mut cx = Complexity::default();
            let mut stack = vec![&f];
            while let Some(h) = stack.pop() {
                let ch = cx.formula(h);
                for k in h.children() {
                    prop_assert!(cx.formula(k) <= ch);
                    stack.push(k);
                }
            }
        }
    }
}
