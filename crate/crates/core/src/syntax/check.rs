use std::fmt;

use serde::Serialize;

use super::{sort_of, Formula, Signature, Sort, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Dotted child-index path from the root; `""` is the root.
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.to_string(),
            message: message.into(),
        });
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: Report) {
        for v in other.violations {
            let path = if v.path.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}.{}", v.path)
            };
            self.violations.push(Violation { path, ..v });
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            let at = if v.path.is_empty() { "root" } else { &v.path };
            writeln!(f, "{at}: {}", v.message)?;
        }
        Ok(())
    }
}

fn child(path: &str, i: usize) -> String {
    if path.is_empty() {
        i.to_string()
    } else {
        format!("{path}.{i}")
    }
}

fn check_var(v: &Var, sig: &Signature, path: &str, r: &mut Report) {
    if let Some(s) = sig.variable(&v.name) {
        if s != v.sort {
            r.push(path, format!("variable `{}` used at sort {} but declared {s}", v.name, v.sort));
        }
    }
}

fn check_term(t: &Term, sig: &Signature, path: &str, r: &mut Report) -> Option<Sort> {
    if let Term::Var(v) = t {
        check_var(v, sig, path, r);
    }
    match sort_of(t, sig) {
        Ok(s) => Some(s),
        Err(e) => {
            r.push(path, format!("term `{t}`: {e}"));
            None
        }
    }
}

/// Lists every typing violation of `f` against `sig`.
pub fn well_formed(f: &Formula, sig: &Signature) -> Report {
    let mut r = Report::default();
    walk(f, sig, "", &mut r);
    r
}

fn walk(f: &Formula, sig: &Signature, path: &str, r: &mut Report) {
    use Formula::*;
    match f {
        Top | Bottom => {}
        Atom(a) => match sig.relation(&a.rel) {
            None => r.push(path, format!("unknown relation `{}`", a.rel)),
            Some(tags) if tags.len() != a.args.len() => r.push(
                path,
                format!("`{}` expects {} argument(s), got {}", a.rel, tags.len(), a.args.len()),
            ),
            Some(tags) => {
                for (i, (t, tag)) in a.args.iter().zip(tags).enumerate() {
                    if let Some(s) = check_term(t, sig, path, r) {
                        if !tag.accepts(s) {
                            r.push(
                                path,
                                format!("argument {i} of `{}` is `{t}` of sort {s}, expected {tag}", a.rel),
                            );
                        }
                    }
                }
            }
        },
        Neq(a, b) => {
            check_term(a, sig, path, r);
            check_term(b, sig, path, r);
        }
        Knows(t, g) => {
            if let Some(s) = check_term(t, sig, path, r) {
                if s != Sort::Agt {
                    r.push(path, format!("modal index `{t}` has sort {s}, expected agt"));
                }
            }
            walk(g, sig, &child(path, 0), r);
        }
        Forall(v, g) | Exists(v, g) => {
            check_var(v, sig, path, r);
            walk(g, sig, &child(path, 0), r);
        }
        Dyn(a, e, g) => {
            if a.event_index(e).is_none() {
                r.push(path, format!("event `{e}` does not exist in `{}`", a.name));
            }
            for (k, ev) in a.events.iter().enumerate() {
                let mut sub = Report::default();
                walk(&a.pre[k], sig, "", &mut sub);
                r.extend_prefixed(&format!("{path}[{}].pre({ev})", a.name), sub);
                for (k2, ev2) in a.events.iter().enumerate() {
                    let mut sub = Report::default();
                    walk(&a.edge[k][k2], sig, "", &mut sub);
                    r.extend_prefixed(&format!("{path}[{}].edge({ev},{ev2})", a.name), sub);
                }
                for (atom, cond) in &a.post[k] {
                    let mut sub = Report::default();
                    walk(&Formula::Atom(atom.clone()), sig, "", &mut sub);
                    walk(cond, sig, "", &mut sub);
                    r.extend_prefixed(&format!("{path}[{}].post({ev})", a.name), sub);
                }
            }
            walk(g, sig, &child(path, 0), r);
        }
        _ => {
            for (i, c) in f.children().into_iter().enumerate() {
                walk(c, sig, &child(path, i), r);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub is_sentence: bool,
    pub is_ground_atom: bool,
    pub is_free_atom: bool,
    pub is_static: bool,
}

pub fn classify(f: &Formula) -> Classification {
    let (ground, free) = match f {
        Formula::Atom(a) => (a.is_ground(), a.is_free()),
        _ => (false, false),
    };
    Classification {
        is_sentence: f.is_sentence(),
        is_ground_atom: ground,
        is_free_atom: free,
        is_static: f.is_static(),
    }
}
