use std::sync::Arc;

use super::sexp::{typed_list, Sexp};
use crate::dynamics::{ActionModel, ActionSchema, TypeTable};
use crate::error::{Error, Result};
use crate::syntax::{xstar, Formula, Signature, Sort, Term, Var, XSTAR};

/// What a formula may refer to while it is read.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub types: &'a TypeTable,
    pub sig: Option<&'a Signature>,
    pub schemas: &'a [ActionSchema],
}

pub(crate) fn var_name(s: &str) -> Option<&str> {
    s.strip_prefix('?')
}

fn lookup(scope: &[Var], name: &str) -> Option<Var> {
    if name == XSTAR {
        return Some(xstar());
    }
    scope.iter().rev().find(|v| v.name == name).cloned()
}

pub fn term(s: &Sexp, scope: &[Var]) -> Result<Term> {
    match s {
        Sexp::Atom { text, .. } => match var_name(text) {
            Some(v) => lookup(scope, v)
                .map(Term::Var)
                .ok_or_else(|| s.err(format!("unbound variable `?{v}`"))),
            None => Ok(Term::Const(text.clone())),
        },
        Sexp::List { items, .. } => {
            let (f, args) = items.split_first().ok_or_else(|| s.err("empty term"))?;
            let f = f.expect_atom("a function symbol")?;
            Ok(Term::App(
                f.to_string(),
                args.iter().map(|a| term(a, scope)).collect::<Result<_>>()?,
            ))
        }
    }
}

/// Binder lists such as `(?x ?y - room)`.
pub(crate) fn binders(s: &Sexp, types: &TypeTable) -> Result<Vec<(Var, String)>> {
    let items = s.expect_list("a variable list")?;
    let mut out = Vec::new();
    for (names, ty) in typed_list(items, "object")? {
        for n in names {
            let v = var_name(&n).ok_or_else(|| s.err(format!("variable `{n}` must start with `?`")))?;
            out.push((Var::new(v, types.sort_of_type(&ty)), ty.clone()));
        }
    }
    Ok(out)
}

fn kw(s: &str) -> String {
    s.to_ascii_lowercase()
}

pub fn formula(s: &Sexp, scope: &mut Vec<Var>, ctx: Ctx) -> Result<Formula> {
    if let Some(a) = s.atom() {
        return match kw(a).as_str() {
            "true" => Ok(Formula::Top),
            "false" => Ok(Formula::Bottom),
            _ => Ok(Formula::atom(a, vec![])),
        };
    }
    let items = s.list().unwrap();
    let Some((head, rest)) = items.split_first() else {
        return Err(s.err("empty formula"));
    };
    let h = head.expect_atom("a connective or predicate")?;
    let arity = |n: usize| -> Result<()> {
        if rest.len() == n {
            Ok(())
        } else {
            Err(s.err(format!("`{h}` takes {n} argument(s), got {}", rest.len())))
        }
    };
    match kw(h).as_str() {
        "true" if rest.is_empty() => Ok(Formula::Top),
        "false" if rest.is_empty() => Ok(Formula::Bottom),
        "not" => {
            arity(1)?;
            match formula(&rest[0], scope, ctx)? {
                Formula::Atom(a) if a.is_equality() => {
                    let mut it = a.args.into_iter();
                    Ok(Formula::Neq(it.next().unwrap(), it.next().unwrap()))
                }
                g => Ok(Formula::not(g)),
            }
        }
        "and" => Ok(Formula::And(
            rest.iter().map(|g| formula(g, scope, ctx)).collect::<Result<_>>()?,
        )),
        "or" => Ok(Formula::Or(
            rest.iter().map(|g| formula(g, scope, ctx)).collect::<Result<_>>()?,
        )),
        "imply" | "implies" => {
            arity(2)?;
            Ok(Formula::implies(formula(&rest[0], scope, ctx)?, formula(&rest[1], scope, ctx)?))
        }
        "iff" => {
            arity(2)?;
            Ok(Formula::iff(formula(&rest[0], scope, ctx)?, formula(&rest[1], scope, ctx)?))
        }
        "=" => {
            arity(2)?;
            Ok(Formula::eq(term(&rest[0], scope)?, term(&rest[1], scope)?))
        }
        "knows" => {
            arity(2)?;
            let idx = match rest[0].list() {
                Some([one]) => term(one, scope)?,
                _ => term(&rest[0], scope)?,
            };
            Ok(Formula::knows(idx, formula(&rest[1], scope, ctx)?))
        }
        q @ ("forall" | "exists") => {
            arity(2)?;
            let vs = binders(&rest[0], ctx.types)?;
            let n = vs.len();
            scope.extend(vs.iter().map(|(v, _)| v.clone()));
            let body = formula(&rest[1], scope, ctx);
            scope.truncate(scope.len() - n);
            let mut f = body?;
            for (v, _) in vs.into_iter().rev() {
                f = if q == "forall" {
                    Formula::forall(v, f)
                } else {
                    Formula::exists(v, f)
                };
            }
            Ok(f)
        }
        "dyn" => {
            arity(3)?;
            let a = action(&rest[0], ctx)?;
            let e = rest[1].expect_atom("an event name")?;
            if a.event_index(e).is_none() {
                return Err(rest[1].err(format!("event `{e}` does not exist in `{}`", a.name)));
            }
            Ok(Formula::dynamic(a, e, formula(&rest[2], scope, ctx)?))
        }
        _ => Ok(Formula::atom(
            h,
            rest.iter().map(|t| term(t, scope)).collect::<Result<_>>()?,
        )),
    }
}

/// `(Name c1 ... cn)`, grounded against the schemas in scope.
pub(crate) fn action(s: &Sexp, ctx: Ctx) -> Result<Arc<ActionModel>> {
    let items = s.expect_list("an action `(Name args...)`")?;
    let (name, args) = items.split_first().ok_or_else(|| s.err("empty action"))?;
    let name = name.expect_atom("an action name")?;
    let args = args
        .iter()
        .map(|a| a.expect_atom("a constant").map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    ground(name, &args, ctx).map_err(|e| match e {
        Error::Syntax { .. } => e,
        other => s.err(other.to_string()),
    })
}

pub(crate) fn ground(name: &str, args: &[String], ctx: Ctx) -> Result<Arc<ActionModel>> {
    let sig = ctx
        .sig
        .ok_or_else(|| Error::Semantic("dynamic modalities need a problem file".into()))?;
    let schema = ctx
        .schemas
        .iter()
        .find(|s| s.name() == name)
        .or_else(|| ctx.schemas.iter().find(|s| s.name().eq_ignore_ascii_case(name)))
        .ok_or_else(|| Error::UnknownAction(name.to_string()))?;
    if schema.params.len() != args.len() {
        return Err(Error::ArityMismatch {
            name: name.to_string(),
            expected: schema.params.len(),
            got: args.len(),
        });
    }
    let sigma = schema.params.iter().cloned().zip(args.iter().cloned()).collect();
    Ok(Arc::new(schema.instantiate(&sigma, sig)?))
}

pub fn parse_formula(text: &str, ctx: Ctx) -> Result<Formula> {
    formula(&super::sexp::parse_one(text)?, &mut Vec::new(), ctx)
}

pub fn term_text(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{}", v.name),
        Term::Const(c) => c.clone(),
        Term::App(f, args) => {
            let mut s = format!("({f}");
            for a in args {
                s.push(' ');
                s.push_str(&term_text(a));
            }
            s.push(')');
            s
        }
    }
}

pub(crate) fn sort_type(s: Sort) -> &'static str {
    match s {
        Sort::Agt => "agent",
        Sort::Obj => "object",
    }
}

/// `Move(a1,r1,r2)` as `(Move a1 r1 r2)`.
pub(crate) fn action_text(name: &str) -> String {
    match name.split_once('(') {
        Some((n, rest)) if rest.ends_with(')') && !n.is_empty() => {
            let args = &rest[..rest.len() - 1];
            if args.is_empty() {
                format!("({n})")
            } else {
                format!("({n} {})", args.split(',').collect::<Vec<_>>().join(" "))
            }
        }
        _ => format!("({name})"),
    }
}

/// Inverse of [`formula`].
pub fn formula_text(f: &Formula) -> String {
    use Formula::*;
    let list = |head: &str, fs: &[Formula]| {
        let mut s = format!("({head}");
        for g in fs {
            s.push(' ');
            s.push_str(&formula_text(g));
        }
        s.push(')');
        s
    };
    match f {
        Top => "TRUE".into(),
        Bottom => "FALSE".into(),
        Atom(a) if a.args.is_empty() => a.rel.clone(),
        Atom(a) => {
            let mut s = format!("({}", a.rel);
            for t in &a.args {
                s.push(' ');
                s.push_str(&term_text(t));
            }
            s.push(')');
            s
        }
        Neq(a, b) => format!("(not (= {} {}))", term_text(a), term_text(b)),
        Not(g) => format!("(not {})", formula_text(g)),
        And(fs) => list("and", fs),
        Or(fs) => list("or", fs),
        Implies(a, b) => format!("(imply {} {})", formula_text(a), formula_text(b)),
        Iff(a, b) => format!("(iff {} {})", formula_text(a), formula_text(b)),
        Knows(t, g) => format!("(knows ({}) {})", term_text(t), formula_text(g)),
        Forall(v, g) => format!("(forall (?{} - {}) {})", v.name, sort_type(v.sort), formula_text(g)),
        Exists(v, g) => format!("(exists (?{} - {}) {})", v.name, sort_type(v.sort), formula_text(g)),
        Dyn(a, e, g) => format!("(dyn {} {e} {})", action_text(&a.name), formula_text(g)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(t: &TypeTable) -> Ctx<'_> {
        Ctx {
            types: t,
            sig: None,
            schemas: &[],
        }
    }

    #[test]
    fn goal_shape() {
        let t = TypeTable::default();
        let f = parse_formula(
            "(exists (?a -agent_id) (knows (?a) (forall (?o - machine_id) (not (malfunction ?o)))))",
            ctx(&t),
        )
        .unwrap();
        assert_eq!(
            f.to_string(),
            "exists a:agt. K[a] (forall o:obj. ~malfunction(o))"
        );
    }

    #[test]
    fn text_round_trip() {
        let t = TypeTable::default();
        for src in [
            "(and (In b1 r2) (not (= ?x* a1)) TRUE)",
            "(forall (?x - agent) (imply (knows (?x) (p ?x)) (or q FALSE)))",
            "(iff (= (f c) d) (not (Adj r1 r2)))",
        ] {
            let mut scope = vec![];
            let f = formula(&super::super::sexp::parse_one(src).unwrap(), &mut scope, ctx(&t)).unwrap();
            let again = parse_formula(&formula_text(&f), ctx(&t)).unwrap();
            assert_eq!(f, again, "{src}");
        }
    }

    #[test]
    fn unbound_variable_has_position() {
        let t = TypeTable::default();
        let e = parse_formula("(p\n  ?y)", ctx(&t)).unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 2, col: 3, .. }), "{e:?}");
    }

    #[test]
    fn dyn_needs_a_problem() {
        let t = TypeTable::default();
        assert!(parse_formula("(dyn (Skip) e TRUE)", ctx(&t)).is_err());
    }
}
