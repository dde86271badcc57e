use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::semantics::{satisfies, PointedModel, Valuation};
use crate::syntax::{well_formed, xstar, Atom, Formula, Report, Signature, Term, Var, XSTAR};

/// Edge-conditioned action model with sparse postconditions.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionModel {
    pub name: String,
    pub events: Vec<String>,
    /// `edge[e][f]`: condition on `x*` for the pair `(e, f)`.
    pub edge: Vec<Vec<Formula>>,
    pub pre: Vec<Formula>,
    /// Atoms whose postcondition differs from the identity, per event.
    pub post: Vec<Vec<(Atom, Formula)>>,
}

/// `x* = x*`, the condition on reflexive pairs.
pub fn reflexive_condition() -> Formula {
    Formula::eq(Term::Var(xstar()), Term::Var(xstar()))
}

impl ActionModel {
    /// Events with precondition ⊤ and identity postconditions. Reflexive
    /// pairs get `x* = x*`, all other pairs ⊥.
    pub fn new(name: &str, events: &[&str]) -> Self {
        let n = events.len();
        let edge = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { reflexive_condition() } else { Formula::Bottom })
                    .collect()
            })
            .collect();
        ActionModel {
            name: name.to_string(),
            events: events.iter().map(|e| e.to_string()).collect(),
            edge,
            pre: vec![Formula::Top; n],
            post: vec![Vec::new(); n],
        }
    }

    /// Single event `⟨⊤; id⟩` with `x* = x*` on its loop.
    pub fn skip() -> Self {
        Self::new("skip", &["e"])
    }

    pub fn event_index(&self, e: &str) -> Option<usize> {
        self.events.iter().position(|x| x == e)
    }

    pub fn event(&self, e: &str) -> Result<usize> {
        self.event_index(e).ok_or_else(|| Error::UnknownEvent {
            action: self.name.clone(),
            event: e.to_string(),
        })
    }

    pub fn set_pre(&mut self, e: &str, f: Formula) -> Result<()> {
        let i = self.event(e)?;
        self.pre[i] = f;
        Ok(())
    }

    pub fn set_edge(&mut self, from: &str, to: &str, f: Formula) -> Result<()> {
        let (i, j) = (self.event(from)?, self.event(to)?);
        self.edge[i][j] = f;
        Ok(())
    }

    /// Sets the condition in both directions.
    pub fn link(&mut self, a: &str, b: &str, f: Formula) -> Result<()> {
        self.set_edge(a, b, f.clone())?;
        self.set_edge(b, a, f)
    }

    pub fn set_post(&mut self, e: &str, atom: Atom, f: Formula) -> Result<()> {
        let i = self.event(e)?;
        match self.post[i].iter_mut().find(|(a, _)| *a == atom) {
            Some(slot) => slot.1 = f,
            None => self.post[i].push((atom, f)),
        }
        Ok(())
    }

    pub fn post_value(&self, e: usize, atom: &Atom) -> Option<&Formula> {
        self.post[e].iter().find(|(a, _)| a == atom).map(|(_, f)| f)
    }

    /// Every formula carried by the model.
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.pre
            .iter()
            .chain(self.edge.iter().flatten())
            .chain(self.post.iter().flatten().map(|(_, f)| f))
    }
}

impl fmt::Display for ActionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        for (i, e) in self.events.iter().enumerate() {
            write!(f, "  {e}: <{}; ", self.pre[i])?;
            if self.post[i].is_empty() {
                f.write_str("id")?;
            }
            for (k, (a, v)) in self.post[i].iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a} := {v}")?;
            }
            writeln!(f, ">")?;
        }
        for (i, e) in self.events.iter().enumerate() {
            for (j, g) in self.events.iter().enumerate() {
                if self.edge[i][j] != Formula::Bottom {
                    writeln!(f, "  {e} -> {g}: {}", self.edge[i][j])?;
                }
            }
        }
        Ok(())
    }
}

/// An action model together with its designated event.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedAction {
    pub action: Arc<ActionModel>,
    pub event: usize,
}

impl PointedAction {
    pub fn new(action: Arc<ActionModel>, event: &str) -> Result<Self> {
        let event = action.event(event)?;
        Ok(PointedAction { action, event })
    }

    pub fn event_name(&self) -> &str {
        &self.action.events[self.event]
    }

    pub fn label(&self) -> String {
        format!("{}@{}", self.action.name, self.event_name())
    }
}

pub(crate) fn check_scope(
    f: &Formula,
    allowed: &BTreeSet<Var>,
    what: &str,
    r: &mut Report,
) {
    for v in f.free_vars() {
        if !allowed.contains(&v) {
            r.push(what, format!("free variable `{}` out of scope", v.name));
        }
    }
}

pub(crate) fn check_events(a: &ActionModel, r: &mut Report) {
    if a.events.is_empty() {
        r.push("events", "an action needs at least one event");
    }
    let names: BTreeSet<&String> = a.events.iter().collect();
    if names.len() != a.events.len() {
        r.push("events", "event names must be distinct");
    }
    let n = a.events.len();
    if a.pre.len() != n || a.post.len() != n || a.edge.len() != n || a.edge.iter().any(|row| row.len() != n) {
        r.push("events", "condition tables do not match the event set");
    }
}

/// Reports every violation of the action-model conditions, with `params`
/// the variables a schema may leave free.
pub(crate) fn validate_body(a: &ActionModel, sig: &Signature, params: &BTreeSet<Var>) -> Report {
    let mut r = Report::default();
    check_events(a, &mut r);
    if !r.ok() {
        return r;
    }
    let mut with_star = params.clone();
    with_star.insert(xstar());
    for (i, e) in a.events.iter().enumerate() {
        let at = format!("pre({e})");
        check_scope(&a.pre[i], params, &at, &mut r);
        r.extend_prefixed(&at, well_formed(&a.pre[i], sig));
        for (j, g) in a.events.iter().enumerate() {
            let at = format!("edge({e},{g})");
            let q = &a.edge[i][j];
            check_scope(q, &with_star, &at, &mut r);
            if q.all_vars().iter().any(|v| v.name == XSTAR && v.sort != crate::syntax::Sort::Agt) {
                r.push(&at, "x* must have sort agt");
            }
            r.extend_prefixed(&at, well_formed(q, sig));
        }
        let mut keys = BTreeSet::new();
        for (atom, cond) in &a.post[i] {
            let at = format!("post({e})({atom})");
            if !keys.insert(atom) {
                r.push(&at, "atom listed twice");
            }
            if atom.is_equality() {
                if *cond != Formula::Top {
                    r.push(&at, "postcondition of an equality atom must be ⊤");
                }
                continue;
            }
            let atom_vars: BTreeSet<Var> = atom.args.iter().flat_map(Term::vars).collect();
            if params.is_empty() && !atom.is_ground() {
                r.push(&at, "postcondition keys must be ground atoms");
            } else if let Some(v) = atom_vars.iter().find(|v| !params.contains(*v)) {
                r.push(&at, format!("argument variable `{}` is not a parameter", v.name));
            }
            check_scope(cond, params, &at, &mut r);
            r.extend_prefixed(&at, well_formed(&Formula::Atom(atom.clone()), sig));
            r.extend_prefixed(&at, well_formed(cond, sig));
        }
    }
    r
}

pub fn validate_action(a: &ActionModel, sig: &Signature) -> Report {
    validate_body(a, sig, &BTreeSet::new())
}

/// Whether the designated event's precondition holds at the point.
pub fn applicable(s: &PointedModel, a: &PointedAction) -> Result<bool> {
    satisfies(&s.model, s.point, &Valuation::new(), &a.action.pre[a.event])
}

/// `(M ⊗ A, (w, e))`.
pub fn update_pointed(s: &PointedModel, a: &PointedAction) -> Result<PointedModel> {
    let (model, index) = super::update_indexed(&s.model, &a.action, crate::par::Exec::default())?;
    match (model, index[s.point][a.event]) {
        (Some(m), Some(p)) => Ok(PointedModel::new(m, p)),
        _ => Err(Error::NotApplicable {
            action: a.action.name.clone(),
            event: a.event_name().to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{signature, CorpusConfig, Generator};
    use crate::syntax::Sort;

    fn messages(r: &Report) -> Vec<String> {
        r.violations.iter().map(|v| format!("{}: {}", v.path, v.message)).collect()
    }

    #[test]
    fn defaults() {
        let a = ActionModel::new("A", &["e", "f"]);
        assert_eq!(a.edge[0][0], reflexive_condition());
        assert_eq!(a.edge[0][1], Formula::Bottom);
        assert_eq!(a.pre, [Formula::Top, Formula::Top]);
        assert!(validate_action(&a, &signature()).ok());
        assert!(matches!(a.event("g"), Err(Error::UnknownEvent { .. })));
    }

    #[test]
    fn post_overwrites_and_link_is_symmetric() {
        let mut a = ActionModel::new("A", &["e", "f"]);
        let p = Atom::new("p", vec![]);
        a.set_post("e", p.clone(), Formula::Top).unwrap();
        a.set_post("e", p.clone(), Formula::Bottom).unwrap();
        assert_eq!(a.post_value(0, &p), Some(&Formula::Bottom));
        assert_eq!(a.post_value(1, &p), None);
        a.link("e", "f", Formula::Top).unwrap();
        assert_eq!(a.edge[1][0], Formula::Top);
    }

    #[test]
    fn violations() {
        let sig = signature();
        let mut a = ActionModel::new("A", &["e"]);
        a.set_pre("e", Formula::atom("q", vec![Term::var("x", Sort::Agt)])).unwrap();
        a.set_edge("e", "e", Formula::atom("q", vec![Term::var(XSTAR, Sort::Obj)])).unwrap();
        a.set_post("e", Atom::new("q", vec![Term::var("y", Sort::Obj)]), Formula::Top).unwrap();
        a.set_post("e", Atom::new("=", vec![Term::constant("a"), Term::constant("b")]), Formula::Bottom).unwrap();
        let m = messages(&validate_action(&a, &sig));
        let want = [
            "pre(e): free variable `x` out of scope",
            "edge(e,e): free variable `x*` out of scope",
            "edge(e,e): x* must have sort agt",
            "post(e)(q(y)): postcondition keys must be ground atoms",
        ];
        for w in want {
            assert!(m.iter().any(|x| x == w), "{w} missing from {m:?}");
        }
        assert!(m.iter().any(|x| x.contains("equality atom")));
        let mut b = ActionModel::new("B", &["e", "e"]);
        b.pre.pop();
        assert!(messages(&validate_action(&b, &sig)).iter().any(|x| x.contains("distinct")));
        assert!(!validate_action(&ActionModel::new("C", &[]), &sig).ok());
    }

    #[test]
    fn pointed_update() {
        let mut g = Generator::new(9, CorpusConfig::default());
        let s = PointedModel::new(g.model(), 0);
        let mut a = ActionModel::new("A", &["e", "f"]);
        a.set_pre("f", Formula::Bottom).unwrap();
        let a = Arc::new(a);
        let e = PointedAction::new(a.clone(), "e").unwrap();
        let f = PointedAction::new(a, "f").unwrap();
        assert!(applicable(&s, &e).unwrap());
        assert!(!applicable(&s, &f).unwrap());
        let t = update_pointed(&s, &e).unwrap();
        assert_eq!(t.point_name(), format!("{}.e", s.point_name()));
        assert!(matches!(update_pointed(&s, &f), Err(Error::NotApplicable { .. })));
        assert_eq!(e.label(), "A@e");
    }
}
