use std::collections::BTreeSet;

use super::eval::{compile_ground_term, Evaluator};
use super::model::Model;
use crate::syntax::{Formula, Report, Signature, Term};

/// Checks the structural invariants of `m` against `sig` and flags ground
/// terms of `formulas` that are undefined at some world.
pub fn validate_model(m: &Model, sig: &Signature, formulas: &[Formula]) -> Report {
    let mut r = Report::default();
    let d = &m.domain;
    if d.agents.is_empty() || d.objects.is_empty() {
        r.push("domain", "agent and object domains must be non-empty");
    }
    let names: BTreeSet<&str> = d.agents.iter().chain(&d.objects).map(String::as_str).collect();
    if names.len() != d.len() {
        r.push("domain", "agent and object names must be distinct");
    }
    if m.worlds.is_empty() {
        r.push("worlds", "a model needs at least one world");
    }
    let wnames: BTreeSet<&str> = m.worlds.iter().map(|w| w.name.as_str()).collect();
    if wnames.len() != m.worlds.len() {
        r.push("worlds", "world names must be distinct");
    }
    let consts: Vec<_> = sig.constants().collect();
    let rels: Vec<_> = sig.relations().collect();
    let funcs: Vec<_> = sig.functions().collect();
    for w in &m.worlds {
        let at = format!("world {}", w.name);
        if w.consts.len() != consts.len() {
            r.push(&at, "constant table does not match the signature");
        }
        for ((c, sort), &e) in consts.iter().zip(&w.consts) {
            if e >= d.len() {
                r.push(&at, format!("constant `{c}` has no value"));
            } else if d.sort(e) != *sort {
                r.push(&at, format!("constant `{c}` of sort {sort} denotes `{}`", d.name(e)));
            }
        }
        if w.rels.len() != rels.len() {
            r.push(&at, "relation table does not match the signature");
        }
        for ((name, tags), ext) in rels.iter().zip(&w.rels) {
            for t in ext {
                if *name == crate::syntax::EQ {
                    if t.len() != 2 || t[0] != t[1] {
                        r.push(&at, "equality not diagonal");
                    }
                    continue;
                }
                if t.len() != tags.len() {
                    r.push(&at, format!("tuple of `{name}` has wrong arity"));
                    continue;
                }
                for (i, (&e, tag)) in t.iter().zip(tags.iter()).enumerate() {
                    if e >= d.len() || !tag.accepts(d.sort(e)) {
                        r.push(&at, format!("argument {i} of a `{name}` tuple violates its sort {tag}"));
                    }
                }
            }
        }
        if w.funcs.len() != funcs.len() {
            r.push(&at, "function table does not match the signature");
        }
        for ((name, fs), graph) in funcs.iter().zip(&w.funcs) {
            let mut seen = BTreeSet::new();
            for (args, v) in graph {
                if !seen.insert(args) {
                    r.push(&at, format!("`{name}` is non-functional"));
                }
                let ok_args = args.len() == fs.args.len()
                    && args.iter().zip(&fs.args).all(|(&e, t)| e < d.len() && t.accepts(d.sort(e)));
                if !ok_args || *v >= d.len() || d.sort(*v) != fs.result {
                    r.push(&at, format!("entry of `{name}` violates its type"));
                }
            }
        }
    }
    if m.access.len() != d.num_agents() {
        r.push("relations", "one accessibility relation per agent is required");
    }
    for (i, per) in m.access.iter().enumerate() {
        if per.len() != m.worlds.len() {
            r.push("relations", format!("relation of `{}` has the wrong number of rows", d.name(i)));
            continue;
        }
        for succ in per {
            if succ.windows(2).any(|p| p[0] >= p[1]) || succ.iter().any(|&v| v >= m.worlds.len()) {
                r.push("relations", format!("relation of `{}` is malformed", d.name(i)));
            }
        }
    }
    if !r.ok() {
        return r;
    }
    let mut ground = BTreeSet::new();
    for f in formulas {
        collect_ground_terms(f, &mut ground);
    }
    let ev = Evaluator::new(m);
    for t in ground {
        let Ok(ct) = compile_ground_term(&t, sig) else {
            r.push("terms", format!("term `{t}` does not resolve"));
            continue;
        };
        for (w, world) in m.worlds.iter().enumerate() {
            if matches!(ev.term(&ct, w, &[], &[]), Ok(None)) {
                r.push("terms", format!("term `{t}` is undefined at `{}`", world.name));
            }
        }
    }
    r
}

fn collect_ground_terms(f: &Formula, out: &mut BTreeSet<Term>) {
    fn term(t: &Term, out: &mut BTreeSet<Term>) {
        if t.is_ground() {
            out.insert(t.clone());
        }
        if let Term::App(_, args) = t {
            args.iter().for_each(|a| term(a, out));
        }
    }
    f.visit(&mut |g| match g {
        Formula::Atom(a) => a.args.iter().for_each(|t| term(t, out)),
        Formula::Neq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Knows(t, _) => term(t, out),
        _ => {}
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusConfig, Generator};

    fn messages(r: &Report) -> Vec<String> {
        r.violations.iter().map(|v| format!("{}: {}", v.path, v.message)).collect()
    }

    #[test]
    fn generated_models_are_valid() {
        let mut g = Generator::new(11, CorpusConfig::default());
        for _ in 0..50 {
            let m = g.model();
            assert!(validate_model(&m, &m.sig, &[]).ok());
        }
    }

    #[test]
    fn corrupted_models() {
        let mut g = Generator::new(12, CorpusConfig::default());
        let m = g.model();
        let sig = m.sig.clone();
        let mut bad = m.clone();
        let name = bad.worlds[0].name.clone();
        bad.worlds[0].consts[2] = 0;
        bad.worlds[0].rels[1].insert(vec![7]);
        bad.access[0][0] = vec![1, 0];
        let msgs = messages(&validate_model(&bad, &sig, &[]));
        assert!(msgs.contains(&format!("world {name}: constant `c` of sort obj denotes `{}`", bad.domain.name(0))));
        assert!(msgs.iter().any(|s| s.contains("tuple of `p` has wrong arity")));
        assert!(msgs.iter().any(|s| s.starts_with("relations: ")));
        let mut dup = m.clone();
        dup.worlds.push(dup.worlds[0].clone());
        for per in &mut dup.access {
            per.push(Vec::new());
        }
        assert_eq!(messages(&validate_model(&dup, &sig, &[])), ["worlds: world names must be distinct"]);
    }

    #[test]
    fn unknown_terms_are_flagged() {
        let mut g = Generator::new(13, CorpusConfig::default());
        let m = g.model();
        let f = Formula::atom("q", vec![Term::constant("zz")]);
        assert_eq!(messages(&validate_model(&m, &m.sig, &[f])), ["terms: term `zz` does not resolve"]);
    }
}
