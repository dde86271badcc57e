use std::sync::Arc;

use super::{ActionModel, PointedAction};
use crate::syntax::{Atom, Formula, Term};

/// How composition and reduction read a postcondition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PostRule {
    /// Accounts for keys that denote the same tuple as the target atom.
    #[default]
    AliasAware,
    /// Only the syntactically identical key counts.
    Printed,
}

fn matches(a: &[Term], b: &[Term]) -> Formula {
    Formula::and(
        a.iter()
            .zip(b)
            .filter(|(x, y)| x != y)
            .map(|(x, y)| Formula::eq(x.clone(), y.clone()))
            .collect(),
    )
}

/// Truth of `atom` right after event `e`, read at the source world.
pub fn effective_post(a: &ActionModel, e: usize, atom: &Atom, rule: PostRule) -> Formula {
    let same_rel: Vec<&(Atom, Formula)> = a.post[e]
        .iter()
        .filter(|(k, _)| k.rel == atom.rel && !k.is_equality())
        .collect();
    if rule == PostRule::Printed || atom.is_equality() {
        return match a.post_value(e, atom) {
            Some(v) if !atom.is_equality() => v.clone(),
            _ => Formula::Atom(atom.clone()),
        };
    }
    match same_rel.as_slice() {
        [] => Formula::Atom(atom.clone()),
        [(k, v)] if k == atom => v.clone(),
        keys => {
            let ms: Vec<Formula> = keys.iter().map(|(k, _)| matches(&k.args, &atom.args)).collect();
            let mut parts: Vec<Formula> = keys
                .iter()
                .zip(&ms)
                .map(|((_, v), m)| match m {
                    Formula::Top => v.clone(),
                    m => Formula::implies(m.clone(), v.clone()),
                })
                .collect();
            if !ms.contains(&Formula::Top) {
                let mut any = vec![Formula::Atom(atom.clone())];
                any.extend(ms);
                parts.push(Formula::or(any));
            }
            Formula::and(parts)
        }
    }
}

/// `A ; B`. Events are pairs named `e~f`, ordered with `A`'s event outer.
pub fn compose_models(a: &Arc<ActionModel>, b: &ActionModel, rule: PostRule) -> ActionModel {
    let (n, m) = (a.events.len(), b.events.len());
    let pair = |i: usize, j: usize| i * m + j;
    let mut events = Vec::with_capacity(n * m);
    let mut pre = Vec::with_capacity(n * m);
    let mut post = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            events.push(format!("{}~{}", a.events[i], b.events[j]));
            pre.push(Formula::and2(
                a.pre[i].clone(),
                Formula::dynamic(a.clone(), &a.events[i], b.pre[j].clone()),
            ));
            let mut keys: Vec<&Atom> = a.post[i].iter().map(|(k, _)| k).collect();
            for (k, _) in &b.post[j] {
                if !keys.contains(&k) {
                    keys.push(k);
                }
            }
            let entries = keys
                .into_iter()
                .filter(|k| !k.is_equality())
                .map(|k| {
                    let inner = effective_post(b, j, k, rule);
                    let v = if inner == Formula::Atom(k.clone()) {
                        effective_post(a, i, k, rule)
                    } else {
                        Formula::dynamic(a.clone(), &a.events[i], inner)
                    };
                    (k.clone(), v)
                })
                .collect();
            post.push(entries);
        }
    }
    let mut edge = vec![vec![Formula::Bottom; n * m]; n * m];
    for i in 0..n {
        for j in 0..m {
            for k in 0..n {
                for l in 0..m {
                    let (q1, q2) = (&a.edge[i][k], &b.edge[j][l]);
                    edge[pair(i, j)][pair(k, l)] = if *q1 == Formula::Bottom || *q2 == Formula::Bottom {
                        Formula::Bottom
                    } else {
                        Formula::and2(q1.clone(), Formula::dynamic(a.clone(), &a.events[i], q2.clone()))
                    };
                }
            }
        }
    }
    ActionModel {
        name: format!("({};{})", a.name, b.name),
        events,
        edge,
        pre,
        post,
    }
}

pub fn compose(a: &PointedAction, b: &PointedAction) -> PointedAction {
    compose_with(a, b, PostRule::default())
}

pub fn compose_with(a: &PointedAction, b: &PointedAction, rule: PostRule) -> PointedAction {
    let m = b.action.events.len();
    PointedAction {
        action: Arc::new(compose_models(&a.action, &b.action, rule)),
        event: a.event * m + b.event,
    }
}
