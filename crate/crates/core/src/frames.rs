//! Frame properties, the characterization formulas of the term-modal axiom
//! schemata, and exhaustive checking of the correspondences on small frames.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::iso::canonical_key_model;
use crate::par::Exec;
use crate::semantics::{compile, Compiled, Domain, Elem, Evaluator, Model, World};
use crate::syntax::{Formula, Signature, Sort, SortTag, Term, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgentFlags {
    pub reflexive: bool,
    pub serial: bool,
    pub transitive: bool,
    pub euclidean: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameReport {
    /// Indexed by agent.
    pub agents: Vec<AgentFlags>,
    pub num_agents: usize,
    pub num_objects: usize,
    pub num_worlds: usize,
}

impl FrameReport {
    pub fn all(&self, f: impl Fn(&AgentFlags) -> bool) -> bool {
        self.agents.iter().all(f)
    }
}

fn flags(n: usize, succ: &[Vec<usize>]) -> AgentFlags {
    let has = |u: usize, v: usize| succ[u].binary_search(&v).is_ok();
    let mut f = AgentFlags {
        reflexive: (0..n).all(|w| has(w, w)),
        serial: (0..n).all(|w| !succ[w].is_empty()),
        transitive: true,
        euclidean: true,
    };
    for u in 0..n {
        for &v in &succ[u] {
            for &x in &succ[v] {
                f.transitive &= has(u, x);
            }
            for &x in &succ[u] {
                f.euclidean &= has(v, x);
            }
        }
    }
    f
}

pub fn frame_properties(m: &Model) -> FrameReport {
    let n = m.num_worlds();
    FrameReport {
        agents: m.access.iter().map(|succ| flags(n, succ)).collect(),
        num_agents: m.domain.num_agents(),
        num_objects: m.domain.len() - m.domain.num_agents(),
        num_worlds: n,
    }
}

/// Rows of the characterization table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FrameKind {
    T,
    D,
    Four,
    Five,
    /// Exactly `n` agents.
    N(usize),
    /// Exactly `m` elements.
    M(usize),
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameKind::T => f.write_str("T"),
            FrameKind::D => f.write_str("D"),
            FrameKind::Four => f.write_str("4"),
            FrameKind::Five => f.write_str("5"),
            FrameKind::N(n) => write!(f, "N({n})"),
            FrameKind::M(m) => write!(f, "M({m})"),
        }
    }
}

impl FromStr for FrameKind {
    type Err = Error;

    /// `T`, `D`, `4`, `5`, `N3`, `N(3)`, `M2`, `M(2)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Semantic(format!("unknown frame kind `{s}`"));
        let num = |rest: &str| -> Result<usize> {
            rest.trim_start_matches('(')
                .trim_end_matches(')')
                .parse()
                .map_err(|_| bad())
        };
        match s {
            "T" | "t" => Ok(FrameKind::T),
            "D" | "d" => Ok(FrameKind::D),
            "4" => Ok(FrameKind::Four),
            "5" => Ok(FrameKind::Five),
            _ if s.starts_with(['N', 'n']) => num(&s[1..]).map(FrameKind::N),
            _ if s.starts_with(['M', 'm']) => num(&s[1..]).map(FrameKind::M),
            _ => Err(bad()),
        }
    }
}

impl FrameKind {
    /// Whether a frame of this shape should validate the row's formula.
    pub fn expected(&self, r: &FrameReport) -> bool {
        match self {
            FrameKind::T => r.all(|f| f.reflexive),
            FrameKind::D => r.all(|f| f.serial),
            FrameKind::Four => r.all(|f| f.transitive),
            FrameKind::Five => r.all(|f| f.euclidean),
            FrameKind::N(n) => r.num_agents == *n,
            FrameKind::M(m) => r.num_agents + r.num_objects == *m,
        }
    }

    /// Whether the relations can matter at all.
    fn relational(&self) -> bool {
        matches!(self, FrameKind::T | FrameKind::D | FrameKind::Four | FrameKind::Five)
    }
}

/// The proposition letter used for schema instances.
pub fn letter() -> Formula {
    Formula::atom("p", vec![])
}

fn agt(name: &str) -> Var {
    Var::new(name, Sort::Agt)
}

fn v(x: &Var) -> Term {
    Term::Var(x.clone())
}

/// Exactly `k` elements of sort `s`, the `agt` case guarded by `K_x ⊤` as
/// in the table.
fn exactly(k: usize, s: Sort, base: &str) -> Formula {
    let xs: Vec<Var> = (1..=k).map(|i| Var::new(&format!("{base}{i}"), s)).collect();
    let y = Var::new(&format!("{base}y"), s);
    let guard = |x: &Var| match s {
        Sort::Agt => Formula::knows(v(x), Formula::Top),
        Sort::Obj => Formula::Top,
    };
    let mut parts: Vec<Formula> = Vec::new();
    if s == Sort::Agt {
        parts.extend(xs.iter().map(guard));
    }
    for i in &xs {
        for j in &xs {
            if i != j {
                parts.push(Formula::neq(v(i), v(j)));
            }
        }
    }
    let any = Formula::or(xs.iter().map(|x| Formula::eq(v(&y), v(x))).collect());
    let all = match s {
        Sort::Agt => Formula::forall(y.clone(), Formula::implies(guard(&y), any)),
        Sort::Obj => Formula::forall(y.clone(), any),
    };
    parts.push(all);
    let mut f = Formula::and(parts);
    for x in xs.into_iter().rev() {
        f = Formula::exists(x, f);
    }
    f
}

/// The table's formula for `kind`; `phi` defaults to the letter `p`.
pub fn characterization_formula(kind: FrameKind, phi: Option<Formula>) -> Formula {
    let phi = phi.unwrap_or_else(letter);
    let x = agt("x");
    let k = |f: Formula| Formula::knows(v(&x), f);
    match kind {
        FrameKind::T => Formula::forall(x.clone(), Formula::implies(k(phi.clone()), phi)),
        FrameKind::D => Formula::forall(x.clone(), Formula::not(k(Formula::Bottom))),
        FrameKind::Four => Formula::forall(x.clone(), Formula::implies(k(phi.clone()), k(k(phi)))),
        FrameKind::Five => Formula::forall(
            x.clone(),
            Formula::implies(Formula::not(k(phi.clone())), k(Formula::not(k(phi)))),
        ),
        FrameKind::N(n) => exactly(n, Sort::Agt, "x"),
        // Variables are sorted: |D| = m splits into agent and object counts.
        FrameKind::M(m) => Formula::or(
            (0..=m)
                .map(|a| Formula::and2(exactly(a, Sort::Agt, "x"), exactly(m - a, Sort::Obj, "z")))
                .collect(),
        ),
    }
}

/// `K_c φ → K_c K_c φ` with a constant index.
pub fn constant_four(c: &str, phi: Formula) -> Formula {
    let k = |f: Formula| Formula::knows(Term::constant(c), f);
    Formula::implies(k(phi.clone()), k(k(phi)))
}

/// `∃x K_c(x = c) ∧ K_c φ → K_c K_c φ`.
pub fn knows_who_four(c: &str, phi: Formula) -> Formula {
    let x = agt("x");
    let kc = |f: Formula| Formula::knows(Term::constant(c), f);
    Formula::implies(
        Formula::and2(
            Formula::exists(x.clone(), kc(Formula::eq(v(&x), Term::constant(c)))),
            kc(phi.clone()),
        ),
        kc(kc(phi)),
    )
}

/// `∃x((x = a) ∧ ∀y K_y(x = a))`.
pub fn rigid_constant_formula(a: &str, sort: Sort) -> Formula {
    let x = Var::new("x", sort);
    let y = agt("y");
    let same = || Formula::eq(v(&x), Term::constant(a));
    Formula::exists(
        x.clone(),
        Formula::and2(same(), Formula::forall(y.clone(), Formula::knows(v(&y), same()))),
    )
}

/// `∀x(r(x) ↔ ∀y K_y r(x))` for a unary `r`.
pub fn rigid_relation_formula(r: &str, sort: Sort) -> Formula {
    let x = Var::new("x", sort);
    let y = agt("y");
    let rx = || Formula::atom(r, vec![v(&x)]);
    Formula::forall(
        x.clone(),
        Formula::iff(rx(), Formula::forall(y.clone(), Formula::knows(v(&y), rx()))),
    )
}

/// Interpretations agree along every edge of every agent.
pub fn locally_rigid(m: &Model, same: impl Fn(&World, &World) -> bool) -> bool {
    m.access.iter().all(|succ| {
        succ.iter()
            .enumerate()
            .all(|(u, vs)| vs.iter().all(|&w| same(&m.worlds[u], &m.worlds[w])))
    })
}

/// Vocabulary for enumeration: agent constants `a b c`, object constant
/// `o`, letter `p`, unary `q` over both sorts.
pub fn signature() -> Arc<Signature> {
    let mut s = Signature::new();
    for c in ["a", "b", "c"] {
        s.add_constant(c, Sort::Agt).unwrap();
    }
    s.add_constant("o", Sort::Obj).unwrap();
    s.add_relation("p", vec![]).unwrap();
    s.add_relation("q", vec![SortTag::AgtOrObj]).unwrap();
    Arc::new(s)
}

/// A frame: domain sizes and one relation per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    pub agents: usize,
    pub objects: usize,
    pub worlds: usize,
    pub access: Vec<Vec<Vec<usize>>>,
}

impl Frame {
    /// The frame as a model over `sig` interpreting nothing but the first
    /// element for every constant.
    pub fn bare_model(&self, sig: &Arc<Signature>) -> Model {
        let domain = Domain::new(
            (0..self.agents).map(|i| format!("i{i}")).collect(),
            (0..self.objects).map(|i| format!("o{i}")).collect(),
        )
        .unwrap();
        let consts = sig
            .constants()
            .map(|(_, s)| if s == Sort::Agt { 0 } else { self.agents })
            .collect::<Vec<Elem>>();
        Model {
            sig: sig.clone(),
            domain: Arc::new(domain),
            worlds: (0..self.worlds)
                .map(|w| World {
                    name: format!("w{w}"),
                    consts: consts.clone(),
                    rels: vec![BTreeSet::new(); sig.num_relations()],
                    funcs: vec![BTreeSet::new(); sig.num_functions()],
                })
                .collect(),
            access: self.access.clone(),
        }
    }

    pub fn report(&self) -> FrameReport {
        FrameReport {
            agents: self.access.iter().map(|s| flags(self.worlds, s)).collect(),
            num_agents: self.agents,
            num_objects: self.objects,
            num_worlds: self.worlds,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnumerationSpec {
    pub max_agents: usize,
    pub max_objects: usize,
    pub max_worlds: usize,
    /// Frames, before canonicalization, beyond which enumeration refuses.
    pub frame_budget: u64,
    /// Interpretations tried per frame before the frame is inconclusive.
    pub interpretation_budget: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl EnumerationSpec {
    pub fn new(max_agents: usize, max_worlds: usize) -> Self {
        EnumerationSpec {
            max_agents,
            max_objects: 1,
            max_worlds,
            frame_budget: 1 << 22,
            interpretation_budget: 1 << 16,
            exec: Exec::default(),
        }
    }
}

fn raw_count(agents: usize, worlds: usize, relational: bool) -> u64 {
    if !relational {
        return 1;
    }
    let bits = (agents * worlds * worlds) as u32;
    1u64.checked_shl(bits).unwrap_or(u64::MAX)
}

/// All frames within the bounds, one per isomorphism class under world
/// renaming, in a deterministic order. With `relational` false only the
/// empty relation is produced for each size.
pub fn enumerate_frames(spec: &EnumerationSpec, relational: bool) -> Result<Vec<Frame>> {
    if spec.max_agents == 0 || spec.max_objects == 0 || spec.max_worlds == 0 {
        return Err(Error::Semantic("enumeration bounds must be at least 1".into()));
    }
    let mut total = 0u64;
    for a in 1..=spec.max_agents {
        for w in 1..=spec.max_worlds {
            total = total.saturating_add(raw_count(a, w, relational).saturating_mul(spec.max_objects as u64));
        }
    }
    if total > spec.frame_budget {
        return Err(Error::EnumerationBudgetExceeded(total));
    }
    let sig = signature();
    let mut out = Vec::new();
    for agents in 1..=spec.max_agents {
        for objects in 1..=spec.max_objects {
            for worlds in 1..=spec.max_worlds {
                let n = raw_count(agents, worlds, relational);
                let frames: Vec<Frame> = spec.exec.above(n as usize, 4096).map_range(n as usize, |bits| {
                    let mut access = vec![vec![Vec::new(); worlds]; agents];
                    let mut k = 0;
                    for per in access.iter_mut() {
                        for succ in per.iter_mut() {
                            for t in 0..worlds {
                                if relational && bits >> k & 1 == 1 {
                                    succ.push(t);
                                }
                                k += 1;
                            }
                        }
                    }
                    Frame {
                        agents,
                        objects,
                        worlds,
                        access,
                    }
                });
                let keys = spec
                    .exec
                    .above(frames.len(), 4096)
                    .map(&frames, |f| canonical_key_model(&f.bare_model(&sig)));
                let mut seen = HashSet::new();
                for (f, k) in frames.into_iter().zip(keys) {
                    if seen.insert(k) {
                        out.push(f);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Slots an interpretation fills: a constant at a world, or one tuple of a
/// relation at a world.
enum Slot {
    Const { world: usize, index: usize, sort: Sort },
    Fact { world: usize, rel: usize, tuple: Vec<Elem> },
}

fn symbols(f: &Formula) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut consts = BTreeSet::new();
    let mut rels = BTreeSet::new();
    fn terms(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| terms(a, out)),
        }
    }
    f.visit(&mut |g| match g {
        Formula::Atom(a) => {
            if !a.is_equality() {
                rels.insert(a.rel.clone());
            }
            a.args.iter().for_each(|t| terms(t, &mut consts));
        }
        Formula::Neq(a, b) => {
            terms(a, &mut consts);
            terms(b, &mut consts);
        }
        Formula::Knows(t, _) => terms(t, &mut consts),
        _ => {}
    });
    (consts, rels)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Outcome {
    Valid,
    Falsified { interpretation: u64, world: String },
    Inconclusive { tried: u64 },
}

/// Validity of a sentence on a frame: every interpretation of the symbols
/// the sentence mentions, at every world.
pub fn valid_on_frame(frame: &Frame, f: &Formula, sig: &Arc<Signature>, budget: u64) -> Result<Outcome> {
    let compiled = compile(f, sig)?;
    if !f.is_sentence() {
        return Err(Error::Semantic("frame validity is checked for sentences".into()));
    }
    let (consts, rels) = symbols(f);
    let base = frame.bare_model(sig);
    let mut slots = Vec::new();
    for w in 0..frame.worlds {
        for c in &consts {
            let index = sig.constant_index(c).ok_or_else(|| Error::UnknownSymbol(c.clone()))?;
            slots.push(Slot::Const {
                world: w,
                index,
                sort: sig.constant(c).unwrap(),
            });
        }
        for r in &rels {
            let rel = sig.relation_index(r).ok_or_else(|| Error::UnknownSymbol(r.clone()))?;
            let tags = sig.relation(r).unwrap();
            let mut tuples: Vec<Vec<Elem>> = vec![Vec::new()];
            for tag in tags {
                let elems: Vec<Elem> = (0..base.domain.len())
                    .filter(|&e| tag.accepts(base.domain.sort(e)))
                    .collect();
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        elems.iter().map(move |&e| {
                            let mut t = t.clone();
                            t.push(e);
                            t
                        })
                    })
                    .collect();
            }
            slots.extend(tuples.into_iter().map(|tuple| Slot::Fact { world: w, rel, tuple }));
        }
    }
    let radix = |s: &Slot| -> u64 {
        match s {
            Slot::Const { sort: Sort::Agt, .. } => frame.agents as u64,
            Slot::Const { sort: Sort::Obj, .. } => frame.objects as u64,
            Slot::Fact { .. } => 2,
        }
    };
    let total = slots.iter().try_fold(1u64, |acc, s| acc.checked_mul(radix(s)));
    let Some(total) = total.filter(|&t| t <= budget) else {
        return Ok(Outcome::Inconclusive { tried: 0 });
    };
    for i in 0..total {
        let mut m = base.clone();
        let mut rest = i;
        for s in &slots {
            let r = radix(s);
            let d = rest % r;
            rest /= r;
            match s {
                Slot::Const { world, index, sort } => {
                    let off = if *sort == Sort::Agt { 0 } else { frame.agents };
                    m.worlds[*world].consts[*index] = off + d as usize;
                }
                Slot::Fact { world, rel, tuple } => {
                    if d == 1 {
                        m.worlds[*world].rels[*rel].insert(tuple.clone());
                    }
                }
            }
        }
        if let Some(w) = falsified_at(&m, &compiled)? {
            return Ok(Outcome::Falsified {
                interpretation: i,
                world: m.worlds[w].name.clone(),
            });
        }
    }
    Ok(Outcome::Valid)
}

fn falsified_at(m: &Model, c: &Compiled) -> Result<Option<usize>> {
    let ev = Evaluator::new(m);
    let v = crate::semantics::Valuation::new();
    for w in 0..m.num_worlds() {
        if !ev.holds(c, w, &v)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameOutcome {
    pub agents: usize,
    pub objects: usize,
    pub worlds: usize,
    pub access: Vec<Vec<Vec<usize>>>,
    pub expected_valid: bool,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterizationReport {
    pub kind: String,
    pub formula: String,
    pub frames: usize,
    /// Frames with the property on which the formula is valid.
    pub valid_with_property: usize,
    pub with_property: usize,
    /// Frames without the property on which a counterexample was found.
    pub falsified_without_property: usize,
    pub without_property: usize,
    pub inconclusive: usize,
    /// Frames contradicting the correspondence.
    pub mismatches: Vec<FrameOutcome>,
}

impl CharacterizationReport {
    pub fn confirmed(&self) -> bool {
        self.mismatches.is_empty() && self.inconclusive == 0
    }
}

/// Checks both directions of the correspondence for `kind` on every
/// enumerated frame.
pub fn check_characterization(kind: FrameKind, phi: Option<Formula>, spec: &EnumerationSpec) -> Result<CharacterizationReport> {
    let f = characterization_formula(kind, phi);
    check_formula_against(&f, &kind.to_string(), |r| kind.expected(r), kind.relational(), spec)
}

/// Generic form: `expected` decides, per frame, whether `f` should be
/// valid there.
pub fn check_formula_against(
    f: &Formula,
    label: &str,
    expected: impl Fn(&FrameReport) -> bool + Sync,
    relational: bool,
    spec: &EnumerationSpec,
) -> Result<CharacterizationReport> {
    let sig = signature();
    let frames = enumerate_frames(spec, relational)?;
    let outcomes = spec.exec.above(frames.len(), 64).map(&frames, |fr| {
        valid_on_frame(fr, f, &sig, spec.interpretation_budget).map(|o| (expected(&fr.report()), o))
    });
    let mut r = CharacterizationReport {
        kind: label.to_string(),
        formula: f.to_string(),
        frames: frames.len(),
        valid_with_property: 0,
        with_property: 0,
        falsified_without_property: 0,
        without_property: 0,
        inconclusive: 0,
        mismatches: Vec::new(),
    };
    for (fr, o) in frames.into_iter().zip(outcomes) {
        let (want, o) = o?;
        let ok = match (&o, want) {
            (Outcome::Inconclusive { .. }, _) => {
                r.inconclusive += 1;
                true
            }
            (Outcome::Valid, true) => {
                r.valid_with_property += 1;
                true
            }
            (Outcome::Falsified { .. }, false) => {
                r.falsified_without_property += 1;
                true
            }
            _ => false,
        };
        if want {
            r.with_property += 1;
        } else {
            r.without_property += 1;
        }
        if !ok {
            r.mismatches.push(FrameOutcome {
                agents: fr.agents,
                objects: fr.objects,
                worlds: fr.worlds,
                access: fr.access,
                expected_valid: want,
                outcome: o,
            });
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RigidityReport {
    pub models: usize,
    pub agreements: usize,
    /// World count and access of the first model where validity and local
    /// rigidity differ.
    pub first_mismatch: Option<(usize, Vec<Vec<Vec<usize>>>)>,
}

/// Over every model on every enumerated frame (interpretations of the
/// symbols `f` mentions), compares validity of `f` with `rigid(m)`.
pub fn check_rigidity(
    f: &Formula,
    rigid: impl Fn(&Model) -> bool + Sync,
    spec: &EnumerationSpec,
) -> Result<RigidityReport> {
    let sig = signature();
    let c = compile(f, &sig)?;
    let frames = enumerate_frames(spec, true)?;
    let (consts, rels) = symbols(f);
    let per_frame = spec.exec.above(frames.len(), 64).map(&frames, |fr| -> Result<(usize, usize, bool)> {
        let models = interpretations(fr, &sig, &consts, &rels, spec.interpretation_budget)?;
        let mut agree = 0;
        for m in &models {
            if falsified_at(m, &c)?.is_none() == rigid(m) {
                agree += 1;
            }
        }
        Ok((models.len(), agree, agree != models.len()))
    });
    let mut r = RigidityReport::default();
    for (fr, x) in frames.iter().zip(per_frame) {
        let (n, a, bad) = x?;
        r.models += n;
        r.agreements += a;
        if bad && r.first_mismatch.is_none() {
            r.first_mismatch = Some((fr.worlds, fr.access.clone()));
        }
    }
    Ok(r)
}

fn interpretations(
    fr: &Frame,
    sig: &Arc<Signature>,
    consts: &BTreeSet<String>,
    rels: &BTreeSet<String>,
    budget: u64,
) -> Result<Vec<Model>> {
    // Reuse the frame check's slot machinery by collecting every model it
    // would visit.
    let base = fr.bare_model(sig);
    let mut models = vec![base];
    for w in 0..fr.worlds {
        for c in consts {
            let i = sig.constant_index(c).ok_or_else(|| Error::UnknownSymbol(c.clone()))?;
            let range: Vec<Elem> = models[0].domain.elems(sig.constant(c).unwrap()).collect();
            models = models
                .into_iter()
                .flat_map(|m| {
                    range.iter().map(move |&e| {
                        let mut m = m.clone();
                        m.worlds[w].consts[i] = e;
                        m
                    })
                })
                .collect();
        }
        for r in rels {
            let ri = sig.relation_index(r).ok_or_else(|| Error::UnknownSymbol(r.clone()))?;
            let tags = sig.relation(r).unwrap().to_vec();
            if tags.len() > 1 {
                return Err(Error::Semantic("only relations of arity ≤ 1 are enumerated".into()));
            }
            let tuples: Vec<Vec<Elem>> = if tags.is_empty() {
                vec![vec![]]
            } else {
                (0..models[0].domain.len())
                    .filter(|&e| tags[0].accepts(models[0].domain.sort(e)))
                    .map(|e| vec![e])
                    .collect()
            };
            for t in tuples {
                models = models
                    .into_iter()
                    .flat_map(|m| {
                        let mut with = m.clone();
                        with.worlds[w].rels[ri].insert(t.clone());
                        [m, with]
                    })
                    .collect();
            }
        }
        if models.len() as u64 > budget {
            return Err(Error::EnumerationBudgetExceeded(models.len() as u64));
        }
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{satisfies, Valuation};

    fn frame(worlds: usize, access: Vec<Vec<Vec<usize>>>) -> Frame {
        Frame {
            agents: access.len(),
            objects: 1,
            worlds,
            access,
        }
    }

    #[test]
    fn flags_match_definitions() {
        let f = frame(2, vec![vec![vec![0, 1], vec![0, 1]], vec![vec![1], vec![]]]);
        let r = f.report();
        assert!(r.agents[0].reflexive && r.agents[0].serial && r.agents[0].transitive && r.agents[0].euclidean);
        assert!(!r.agents[1].serial && !r.agents[1].reflexive);
        // 0→1 alone is transitive; euclidean would need 1→1
        assert!(r.agents[1].transitive && !r.agents[1].euclidean);
        // 0→1, 0→2 without 1→2 is not euclidean
        let g = frame(3, vec![vec![vec![1, 2], vec![], vec![]]]);
        assert!(!g.report().agents[0].euclidean);
        assert!(g.report().agents[0].transitive);
    }

    #[test]
    fn frame_kinds_parse() {
        for (s, k) in [
            ("T", FrameKind::T),
            ("4", FrameKind::Four),
            ("5", FrameKind::Five),
            ("N3", FrameKind::N(3)),
            ("N(2)", FrameKind::N(2)),
            ("M(4)", FrameKind::M(4)),
        ] {
            assert_eq!(s.parse::<FrameKind>().unwrap(), k);
        }
        assert!("K".parse::<FrameKind>().is_err());
    }

    #[test]
    fn enumeration_counts_classes() {
        // 1 agent: 2 frames on one world, 10 unlabeled digraphs with loops on two
        let spec = EnumerationSpec::new(1, 2);
        assert_eq!(enumerate_frames(&spec, true).unwrap().len(), 2 + 10);
        let mut tight = spec;
        tight.frame_budget = 3;
        assert!(matches!(enumerate_frames(&tight, true), Err(Error::EnumerationBudgetExceeded(_))));
    }

    #[test]
    fn n_formula_counts_agents() {
        let sig = signature();
        for agents in 1..=3 {
            let m = frame(1, vec![vec![vec![]]; agents]).bare_model(&sig);
            for n in 1..=3 {
                let f = characterization_formula(FrameKind::N(n), None);
                assert_eq!(satisfies(&m, 0, &Valuation::new(), &f).unwrap(), n == agents, "N({n}) on {agents}");
            }
        }
    }

    #[test]
    fn table_rows_on_two_worlds() {
        let spec = EnumerationSpec::new(2, 2);
        for k in [FrameKind::T, FrameKind::D, FrameKind::Four, FrameKind::Five] {
            let r = check_characterization(k, None, &spec).unwrap();
            assert!(r.confirmed(), "{k}: {:?}", r.mismatches.first());
            assert!(r.with_property > 0 && r.without_property > 0);
        }
    }

    #[test]
    fn four_with_agent_dependent_instance() {
        let x = Var::new("x", Sort::Agt);
        let phi = Formula::atom("q", vec![Term::Var(x)]);
        let r = check_characterization(FrameKind::Four, Some(phi), &EnumerationSpec::new(2, 2)).unwrap();
        assert!(r.confirmed(), "{:?}", r.mismatches.first());
    }

    #[test]
    fn m_counts_all_elements() {
        let mut spec = EnumerationSpec::new(2, 1);
        spec.max_objects = 2;
        for m in 2..=4 {
            let r = check_characterization(FrameKind::M(m), None, &spec).unwrap();
            assert!(r.confirmed(), "M({m})");
        }
    }

    #[test]
    fn constant_indexed_four_fails_on_transitive_frames() {
        let f = constant_four("c", Formula::eq(Term::constant("b"), Term::constant("c")));
        let r = check_formula_against(&f, "4c", |r| r.all(|a| a.transitive), true, &EnumerationSpec::new(2, 2)).unwrap();
        assert!(r.mismatches.iter().any(|m| m.expected_valid));
    }

    #[test]
    fn knowing_who_does_not_restore_four() {
        // the witness pins c across c's successors, not to c's value here
        let f = knows_who_four("c", letter());
        let r = check_formula_against(&f, "4kw", |r| r.all(|a| a.transitive), true, &EnumerationSpec::new(2, 2)).unwrap();
        assert!(r.mismatches.iter().any(|m| m.expected_valid));
    }

    #[test]
    fn rigid_constant_formula_matches_local_rigidity() {
        let ci = signature().constant_index("a").unwrap();
        let f = rigid_constant_formula("a", Sort::Agt);
        let r = check_rigidity(&f, |m| locally_rigid(m, |u, v| u.consts[ci] == v.consts[ci]), &EnumerationSpec::new(2, 2)).unwrap();
        assert!(r.models > 100);
        assert_eq!(r.agreements, r.models, "{:?}", r.first_mismatch);
    }

    #[test]
    fn rigid_relation_formula_fails_at_dead_ends() {
        let ri = signature().relation_index("q").unwrap();
        let f = rigid_relation_formula("q", Sort::Agt);
        let r = check_rigidity(&f, |m| locally_rigid(m, |u, v| u.rels[ri] == v.rels[ri]), &EnumerationSpec::new(1, 2)).unwrap();
        assert!(r.agreements < r.models);
        // a single world without successors already separates the two
        let (worlds, access) = r.first_mismatch.unwrap();
        assert_eq!((worlds, access), (1, vec![vec![vec![]]]));
    }
}
