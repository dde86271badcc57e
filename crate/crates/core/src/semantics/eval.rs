//! Satisfaction over compiled formulas.
//!
//! Symbols are resolved to signature indices and variables to slots once, so
//! a formula can be checked against many models sharing a signature.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::model::{Elem, Model, Valuation};
use crate::dynamics::{self, ActionModel};
use crate::error::{Error, Result};
use crate::syntax::{xstar, ActionRef, Formula, Signature, Sort, Term, Var};

#[derive(Clone, Debug)]
pub(crate) enum CTerm {
    Var(usize),
    Const(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Clone, Debug)]
pub(crate) enum CForm {
    Top,
    Bot,
    Eq(CTerm, CTerm),
    Rel(usize, Vec<CTerm>),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
    Imp(Box<CForm>, Box<CForm>),
    Iff(Box<CForm>, Box<CForm>),
    Knows(CTerm, Box<CForm>),
    Forall(usize, Sort, Box<CForm>),
    Exists(usize, Sort, Box<CForm>),
    Dyn(ActionRef, usize, Box<CForm>),
}

/// A formula resolved against a signature.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub(crate) form: CForm,
    pub(crate) slots: Vec<Var>,
    /// Free variables and their slots.
    pub(crate) free: Vec<(Var, usize)>,
}

impl Compiled {
    pub fn free_vars(&self) -> impl Iterator<Item = &Var> {
        self.free.iter().map(|(v, _)| v)
    }

    pub(crate) fn env(&self) -> Vec<Option<Elem>> {
        vec![None; self.slots.len()]
    }

    pub(crate) fn slot_of(&self, v: &Var) -> Option<usize> {
        self.free.iter().find(|(w, _)| w == v).map(|(_, s)| *s)
    }
}

struct Compiler<'s> {
    sig: &'s Signature,
    slots: Vec<Var>,
    scope: Vec<(Var, usize)>,
}

impl<'s> Compiler<'s> {
    fn lookup(&self, v: &Var) -> Option<usize> {
        self.scope.iter().rev().find(|(w, _)| w == v).map(|(_, s)| *s)
    }

    fn term(&self, t: &Term) -> Result<CTerm> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.lookup(v).ok_or_else(|| Error::UnboundVariable(v.name.clone()))?),
            Term::Const(c) => CTerm::Const(
                self.sig.constant_index(c).ok_or_else(|| Error::UnknownSymbol(c.clone()))?,
            ),
            Term::App(f, args) => {
                let fi = self.sig.function_index(f).ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
                let want = self.sig.function(f).unwrap().args.len();
                if want != args.len() {
                    return Err(Error::ArityMismatch {
                        name: f.clone(),
                        expected: want,
                        got: args.len(),
                    });
                }
                CTerm::App(fi, args.iter().map(|a| self.term(a)).collect::<Result<_>>()?)
            }
        })
    }

    fn bind<T>(&mut self, v: &Var, body: impl FnOnce(&mut Self) -> Result<T>) -> Result<(usize, T)> {
        let slot = self.slots.len();
        self.slots.push(v.clone());
        self.scope.push((v.clone(), slot));
        let out = body(self);
        self.scope.pop();
        Ok((slot, out?))
    }

    fn form(&mut self, f: &Formula) -> Result<CForm> {
        use Formula::*;
        Ok(match f {
            Top => CForm::Top,
            Bottom => CForm::Bot,
            Atom(a) => {
                let ri = self
                    .sig
                    .relation_index(&a.rel)
                    .ok_or_else(|| Error::UnknownSymbol(a.rel.clone()))?;
                let want = self.sig.relation(&a.rel).unwrap().len();
                if want != a.args.len() {
                    return Err(Error::ArityMismatch {
                        name: a.rel.clone(),
                        expected: want,
                        got: a.args.len(),
                    });
                }
                let args = a.args.iter().map(|t| self.term(t)).collect::<Result<Vec<_>>>()?;
                if a.is_equality() {
                    let mut it = args.into_iter();
                    CForm::Eq(it.next().unwrap(), it.next().unwrap())
                } else {
                    CForm::Rel(ri, args)
                }
            }
            Neq(a, b) => CForm::Not(Box::new(CForm::Eq(self.term(a)?, self.term(b)?))),
            Not(g) => CForm::Not(Box::new(self.form(g)?)),
            And(fs) => CForm::And(fs.iter().map(|g| self.form(g)).collect::<Result<_>>()?),
            Or(fs) => CForm::Or(fs.iter().map(|g| self.form(g)).collect::<Result<_>>()?),
            Implies(a, b) => CForm::Imp(Box::new(self.form(a)?), Box::new(self.form(b)?)),
            Iff(a, b) => CForm::Iff(Box::new(self.form(a)?), Box::new(self.form(b)?)),
            Knows(t, g) => CForm::Knows(self.term(t)?, Box::new(self.form(g)?)),
            Forall(v, g) => {
                let (s, body) = self.bind(v, |c| c.form(g))?;
                CForm::Forall(s, v.sort, Box::new(body))
            }
            Exists(v, g) => {
                let (s, body) = self.bind(v, |c| c.form(g))?;
                CForm::Exists(s, v.sort, Box::new(body))
            }
            Dyn(a, e, g) => {
                let ei = a.event_index(e).ok_or_else(|| Error::UnknownEvent {
                    action: a.name.clone(),
                    event: e.clone(),
                })?;
                CForm::Dyn(a.clone(), ei, Box::new(self.form(g)?))
            }
        })
    }
}

/// Resolves `f` against `sig`. Free variables get the first slots.
pub fn compile(f: &Formula, sig: &Signature) -> Result<Compiled> {
    let mut c = Compiler {
        sig,
        slots: Vec::new(),
        scope: Vec::new(),
    };
    let mut free = Vec::new();
    for v in f.free_vars() {
        let s = c.slots.len();
        c.slots.push(v.clone());
        c.scope.push((v.clone(), s));
        free.push((v, s));
    }
    let form = c.form(f)?;
    Ok(Compiled {
        form,
        slots: c.slots,
        free,
    })
}

pub(crate) fn compile_ground_term(t: &Term, sig: &Signature) -> Result<CTerm> {
    Compiler {
        sig,
        slots: Vec::new(),
        scope: Vec::new(),
    }
    .term(t)
}

/// An action model resolved against a signature.
pub(crate) struct CompiledAction {
    pub pre: Vec<Compiled>,
    pub edge: Vec<Vec<(Compiled, Option<usize>)>>,
    pub post: Vec<Vec<(usize, Vec<CTerm>, Compiled)>>,
}

pub(crate) fn compile_action(a: &ActionModel, sig: &Signature) -> Result<CompiledAction> {
    let x = xstar();
    let mut edge = Vec::with_capacity(a.events.len());
    for row in &a.edge {
        let mut out = Vec::with_capacity(row.len());
        for q in row {
            let c = compile(q, sig)?;
            if let Some(v) = c.free_vars().find(|v| **v != x) {
                return Err(Error::UnboundVariable(v.name.clone()));
            }
            let slot = c.slot_of(&x);
            out.push((c, slot));
        }
        edge.push(out);
    }
    let pre = a.pre.iter().map(|p| compile(p, sig)).collect::<Result<Vec<_>>>()?;
    let mut post = Vec::with_capacity(a.events.len());
    for entries in &a.post {
        let mut out = Vec::with_capacity(entries.len());
        for (atom, cond) in entries {
            let ri = sig.relation_index(&atom.rel).ok_or_else(|| Error::UnknownSymbol(atom.rel.clone()))?;
            if atom.is_equality() {
                continue;
            }
            let args = atom
                .args
                .iter()
                .map(|t| compile_ground_term(t, sig))
                .collect::<Result<Vec<_>>>()?;
            out.push((ri, args, compile(cond, sig)?));
        }
        post.push(out);
    }
    Ok(CompiledAction { pre, edge, post })
}

type Cache = RefCell<HashMap<usize, Rc<Updated>>>;

struct Updated {
    _action: ActionRef,
    /// `index[w][e]`: world of `(w, e)` in the updated model.
    index: Vec<Vec<Option<usize>>>,
    model: Option<Model>,
    cache: Rc<Cache>,
}

/// Evaluates compiled formulas on one model. Updated models reached through
/// dynamic modalities are memoized per action.
pub struct Evaluator<'m> {
    model: &'m Model,
    cache: Rc<Cache>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Evaluator {
            model,
            cache: Rc::default(),
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub(crate) fn term(&self, t: &CTerm, w: usize, env: &[Option<Elem>], slots: &[Var]) -> Result<Option<Elem>> {
        Ok(match t {
            CTerm::Var(s) => Some(env[*s].ok_or_else(|| Error::UnboundVariable(slots[*s].name.clone()))?),
            CTerm::Const(c) => Some(self.model.worlds[w].consts[*c]),
            CTerm::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    match self.term(a, w, env, slots)? {
                        Some(v) => vals.push(v),
                        None => return Ok(None),
                    }
                }
                self.model.worlds[w].lookup(*f, &vals)
            }
        })
    }

    /// Truth of `c` at world `w` under `v`, which must bind every free variable.
    pub fn holds(&self, c: &Compiled, w: usize, v: &Valuation) -> Result<bool> {
        let mut env = c.env();
        for (var, s) in &c.free {
            env[*s] = Some(v.get(var)?);
        }
        self.eval(&c.form, w, &mut env, &c.slots)
    }

    pub(crate) fn holds_env(&self, c: &Compiled, w: usize, env: &mut [Option<Elem>]) -> Result<bool> {
        self.eval(&c.form, w, env, &c.slots)
    }

    fn eval(&self, f: &CForm, w: usize, env: &mut [Option<Elem>], slots: &[Var]) -> Result<bool> {
        Ok(match f {
            CForm::Top => true,
            CForm::Bot => false,
            CForm::Eq(a, b) => match (self.term(a, w, env, slots)?, self.term(b, w, env, slots)?) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            CForm::Rel(r, args) => {
                let mut tuple = Vec::with_capacity(args.len());
                for a in args {
                    match self.term(a, w, env, slots)? {
                        Some(v) => tuple.push(v),
                        None => return Ok(false),
                    }
                }
                self.model.worlds[w].rels[*r].contains(&tuple)
            }
            CForm::Not(g) => !self.eval(g, w, env, slots)?,
            CForm::And(fs) => {
                for g in fs {
                    if !self.eval(g, w, env, slots)? {
                        return Ok(false);
                    }
                }
                true
            }
            CForm::Or(fs) => {
                for g in fs {
                    if self.eval(g, w, env, slots)? {
                        return Ok(true);
                    }
                }
                false
            }
            CForm::Imp(a, b) => !self.eval(a, w, env, slots)? || self.eval(b, w, env, slots)?,
            CForm::Iff(a, b) => self.eval(a, w, env, slots)? == self.eval(b, w, env, slots)?,
            CForm::Knows(t, g) => {
                let i = match self.term(t, w, env, slots)? {
                    Some(i) if i < self.model.domain.num_agents() => i,
                    _ => return Err(Error::UndefinedModalIndex(describe(t, slots))),
                };
                for &u in &self.model.access[i][w] {
                    if !self.eval(g, u, env, slots)? {
                        return Ok(false);
                    }
                }
                true
            }
            CForm::Forall(s, sort, g) => {
                let saved = env[*s];
                let mut out = true;
                for d in self.model.domain.elems(*sort) {
                    env[*s] = Some(d);
                    if !self.eval(g, w, env, slots)? {
                        out = false;
                        break;
                    }
                }
                env[*s] = saved;
                out
            }
            CForm::Exists(s, sort, g) => {
                let saved = env[*s];
                let mut out = false;
                for d in self.model.domain.elems(*sort) {
                    env[*s] = Some(d);
                    if self.eval(g, w, env, slots)? {
                        out = true;
                        break;
                    }
                }
                env[*s] = saved;
                out
            }
            CForm::Dyn(a, e, g) => {
                let up = self.updated(a)?;
                match up.index[w][*e] {
                    None => true,
                    Some(nw) => {
                        let m = up.model.as_ref().expect("non-empty update");
                        let sub = Evaluator {
                            model: m,
                            cache: up.cache.clone(),
                        };
                        sub.eval(g, nw, env, slots)?
                    }
                }
            }
        })
    }

    fn updated(&self, a: &ActionRef) -> Result<Rc<Updated>> {
        let key = ActionRef::as_ptr(a) as usize;
        if let Some(u) = self.cache.borrow().get(&key) {
            return Ok(u.clone());
        }
        let (model, index) = dynamics::update_indexed(self.model, a, crate::par::Exec::Sequential)?;
        let u = Rc::new(Updated {
            _action: a.clone(),
            index,
            model,
            cache: Rc::default(),
        });
        self.cache.borrow_mut().insert(key, u.clone());
        Ok(u)
    }
}

fn describe(t: &CTerm, slots: &[Var]) -> String {
    match t {
        CTerm::Var(s) => slots[*s].name.clone(),
        CTerm::Const(c) => format!("constant #{c}"),
        CTerm::App(f, _) => format!("function #{f} application"),
    }
}

/// Extension of `t` at `w`; `None` when a partial function is undefined.
pub fn extension(t: &Term, m: &Model, w: usize, v: &Valuation) -> Result<Option<Elem>> {
    let vars: Vec<Var> = t.vars().into_iter().collect();
    let mut c = Compiler {
        sig: &m.sig,
        slots: vars.clone(),
        scope: vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
    };
    let ct = c.term(t)?;
    let mut env = vec![None; vars.len()];
    for (i, var) in vars.iter().enumerate() {
        env[i] = Some(v.get(var)?);
    }
    c.slots.truncate(vars.len());
    Evaluator::new(m).term(&ct, w, &env, &c.slots)
}

/// `M, w ⊨_v φ`.
pub fn satisfies(m: &Model, w: usize, v: &Valuation, f: &Formula) -> Result<bool> {
    let c = compile(f, &m.sig)?;
    Evaluator::new(m).holds(&c, w, v)
}

/// Truth at every world under every valuation of the free variables.
pub fn valid_on_model(m: &Model, f: &Formula) -> Result<bool> {
    let c = compile(f, &m.sig)?;
    valid_compiled(m, &c)
}

pub(crate) fn valid_compiled(m: &Model, c: &Compiled) -> Result<bool> {
    let ev = Evaluator::new(m);
    let ranges: Vec<Vec<Elem>> = c.free.iter().map(|(v, _)| m.domain.elems(v.sort).collect()).collect();
    let mut env = c.env();
    let mut idx = vec![0usize; ranges.len()];
    loop {
        for (k, (_, s)) in c.free.iter().enumerate() {
            env[*s] = Some(ranges[k][idx[k]]);
        }
        for w in 0..m.num_worlds() {
            if !ev.holds_env(c, w, &mut env)? {
                return Ok(false);
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(true);
            }
            idx[k] += 1;
            if idx[k] < ranges[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
