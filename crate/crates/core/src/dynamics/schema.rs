use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::action::validate_body;
use super::ActionModel;
use crate::error::{Error, Result};
use crate::syntax::{substitute_many, Report, Signature, Sort, Term, Var};

/// Action model whose formulas and postcondition keys may mention parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSchema {
    /// The acting agent first, when `agent` is set.
    pub params: Vec<Var>,
    pub agent: bool,
    /// Declared type per parameter; plain sort names when untyped.
    pub param_types: Vec<String>,
    pub designated: usize,
    pub body: ActionModel,
}

/// Declared type hierarchy and constant typing from a domain description.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeTable {
    pub parents: IndexMap<String, Option<String>>,
    pub constant_types: IndexMap<String, String>,
}

const AGENT_ROOTS: [&str; 3] = ["agent", "agt", "agent_id"];
const OBJECT_ROOTS: [&str; 3] = ["object", "obj", "agt_or_obj"];

impl TypeTable {
    pub fn is_subtype(&self, t: &str, of: &str) -> bool {
        let mut cur = Some(t.to_string());
        let mut steps = 0;
        while let Some(c) = cur {
            if c == of {
                return true;
            }
            steps += 1;
            if steps > self.parents.len() + 1 {
                return false;
            }
            cur = self.parents.get(&c).cloned().flatten();
        }
        false
    }

    /// Root type of `t` decides the sort.
    pub fn sort_of_type(&self, t: &str) -> Sort {
        let mut cur = t.to_string();
        for _ in 0..=self.parents.len() {
            if AGENT_ROOTS.contains(&cur.as_str()) {
                return Sort::Agt;
            }
            match self.parents.get(&cur).cloned().flatten() {
                Some(p) => cur = p,
                None => break,
            }
        }
        if AGENT_ROOTS.contains(&cur.as_str()) {
            Sort::Agt
        } else {
            Sort::Obj
        }
    }

    /// Whether constant `c` may instantiate a parameter of type `ty`.
    pub fn admits(&self, c: &str, ty: &str) -> bool {
        if AGENT_ROOTS.contains(&ty) && self.sort_of_type(ty) == Sort::Agt && !self.parents.contains_key(ty) {
            return true;
        }
        if OBJECT_ROOTS.contains(&ty) && !self.parents.contains_key(ty) {
            return true;
        }
        match self.constant_types.get(c) {
            Some(ct) => self.is_subtype(ct, ty),
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundInstance {
    pub args: Vec<String>,
    pub model: ActionModel,
}

impl ActionSchema {
    pub fn name(&self) -> &str {
        &self.body.name
    }

    pub fn validate(&self, sig: &Signature) -> Report {
        let params: BTreeSet<Var> = self.params.iter().cloned().collect();
        let mut r = validate_body(&self.body, sig, &params);
        if params.len() != self.params.len() {
            r.push("params", "parameter names must be distinct");
        }
        if self.designated >= self.body.events.len() {
            r.push("events", "designated event out of range");
        }
        r
    }

    /// `S σ`, named `Name(c1,...,cn)`. On colliding postcondition keys the
    /// first entry wins.
    pub fn instantiate(&self, sigma: &BTreeMap<Var, String>, sig: &Signature) -> Result<ActionModel> {
        let mut map = BTreeMap::new();
        let mut args = Vec::with_capacity(self.params.len());
        for p in &self.params {
            let c = sigma
                .get(p)
                .ok_or_else(|| Error::IncompleteSubstitution(p.name.clone()))?;
            let s = sig.constant(c).ok_or_else(|| Error::UnknownSymbol(c.clone()))?;
            if s != p.sort {
                return Err(Error::SortMismatch {
                    var: p.name.clone(),
                    expected: p.sort.to_string(),
                    got: s.to_string(),
                });
            }
            map.insert(p.clone(), Term::constant(c));
            args.push(c.as_str());
        }
        let b = &self.body;
        let post = b
            .post
            .iter()
            .map(|entries| {
                let mut out: Vec<(crate::syntax::Atom, crate::syntax::Formula)> = Vec::new();
                for (atom, cond) in entries {
                    let key = crate::syntax::subst_atom(atom, &map);
                    if out.iter().all(|(k, _)| *k != key) {
                        out.push((key, substitute_many(cond, &map)));
                    }
                }
                out
            })
            .collect();
        Ok(ActionModel {
            name: format!("{}({})", b.name, args.join(",")),
            events: b.events.clone(),
            edge: b
                .edge
                .iter()
                .map(|row| row.iter().map(|q| substitute_many(q, &map)).collect())
                .collect(),
            pre: b.pre.iter().map(|f| substitute_many(f, &map)).collect(),
            post,
        })
    }

    /// Candidate constants per parameter, in signature order.
    pub fn candidates(&self, sig: &Signature, types: Option<&TypeTable>) -> Vec<Vec<String>> {
        self.params
            .iter()
            .zip(&self.param_types)
            .map(|(p, ty)| {
                sig.constants()
                    .filter(|(c, s)| *s == p.sort && types.is_none_or(|t| t.admits(c, ty)))
                    .map(|(c, _)| c.to_string())
                    .collect()
            })
            .collect()
    }

    /// Every well-sorted instance, lexicographic in the candidate order.
    pub fn ground_all(&self, sig: &Signature, types: Option<&TypeTable>) -> Result<Vec<GroundInstance>> {
        let cands = self.candidates(sig, types);
        let mut out = Vec::new();
        if cands.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        let mut idx = vec![0usize; cands.len()];
        loop {
            let args: Vec<String> = idx.iter().zip(&cands).map(|(&i, c)| c[i].clone()).collect();
            let sigma = self.params.iter().cloned().zip(args.iter().cloned()).collect();
            out.push(GroundInstance {
                model: self.instantiate(&sigma, sig)?,
                args,
            });
            let mut k = cands.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Atom, Formula, SortTag};

    fn sig(agents: usize, objects: usize) -> Signature {
        let mut s = Signature::new();
        for i in 0..agents {
            s.add_constant(&format!("i{i}"), Sort::Agt).unwrap();
        }
        for i in 0..objects {
            s.add_constant(&format!("o{i}"), Sort::Obj).unwrap();
        }
        s.add_relation("at", vec![SortTag::Agt, SortTag::Obj]).unwrap();
        s
    }

    fn go() -> ActionSchema {
        let x = Var::new("x", Sort::Agt);
        let y = Var::new("y", Sort::Obj);
        let at = Atom::new("at", vec![Term::Var(x.clone()), Term::Var(y.clone())]);
        let mut body = ActionModel::skip();
        body.name = "Go".into();
        body.set_pre("e", Formula::not(Formula::Atom(at.clone()))).unwrap();
        body.set_post("e", at, Formula::Top).unwrap();
        ActionSchema {
            params: vec![x, y],
            agent: true,
            param_types: vec!["agent".into(), "object".into()],
            designated: 0,
            body,
        }
    }

    #[test]
    fn grounds_every_pair_in_order() {
        let s = sig(3, 2);
        let all = go().ground_all(&s, None).unwrap();
        assert_eq!(all.len(), 6);
        let names: Vec<&str> = all.iter().map(|g| g.model.name.as_str()).collect();
        assert_eq!(names[..3], ["Go(i0,o0)", "Go(i0,o1)", "Go(i1,o0)"]);
        assert_eq!(all[5].model.post[0][0].0, Atom::new("at", vec![Term::constant("i2"), Term::constant("o1")]));
        let m = &all[5].model;
        assert!(m.pre.iter().chain(m.post[0].iter().map(|(_, f)| f)).all(|f| f.is_sentence()));
        assert!(go().ground_all(&sig(0, 2), None).unwrap().is_empty());
    }

    #[test]
    fn types_filter_candidates() {
        let s = sig(2, 3);
        let mut t = TypeTable::default();
        t.parents.insert("room".into(), Some("object".into()));
        t.parents.insert("hall".into(), Some("room".into()));
        t.constant_types.insert("o0".into(), "room".into());
        t.constant_types.insert("o2".into(), "hall".into());
        let mut g = go();
        g.param_types[1] = "room".into();
        assert_eq!(g.candidates(&s, Some(&t))[1], ["o0", "o2"]);
        g.param_types[1] = "hall".into();
        assert_eq!(g.candidates(&s, Some(&t))[1], ["o2"]);
        assert_eq!(g.candidates(&s, Some(&t))[0], ["i0", "i1"]);
        assert_eq!(t.sort_of_type("hall"), Sort::Obj);
    }

    #[test]
    fn instantiate_errors() {
        let s = sig(1, 1);
        let x = Var::new("x", Sort::Agt);
        let y = Var::new("y", Sort::Obj);
        let partial = BTreeMap::from([(x.clone(), "i0".to_string())]);
        assert_eq!(go().instantiate(&partial, &s), Err(Error::IncompleteSubstitution("y".into())));
        let wrong = BTreeMap::from([(x, "o0".to_string()), (y, "o0".to_string())]);
        assert!(matches!(go().instantiate(&wrong, &s), Err(Error::SortMismatch { .. })));
    }

    #[test]
    fn validation() {
        let s = sig(1, 1);
        assert!(go().validate(&s).ok());
        let mut g = go();
        g.designated = 1;
        g.params.push(Var::new("x", Sort::Agt));
        let r = g.validate(&s);
        let msgs: Vec<&str> = r.violations.iter().map(|v| v.message.as_str()).collect();
        assert!(msgs.contains(&"designated event out of range"));
        assert!(msgs.contains(&"parameter names must be distinct"));
        let mut g = go();
        g.params.pop();
        assert!(!g.validate(&s).ok());
    }
}
