use std::collections::BTreeSet;

use indexmap::IndexMap;

use super::formula::{binders, formula, formula_text, term, term_text, Ctx};
use super::sexp::{parse_all, typed_list, Sexp};
use crate::dynamics::{reflexive_condition, ActionModel, ActionSchema, TypeTable};
use crate::error::{Error, Result};
use crate::syntax::{Atom, Formula, Signature, Sort, SortTag, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDecl {
    pub name: String,
    /// Declared argument types.
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainFile {
    pub name: String,
    pub types: TypeTable,
    pub predicates: Vec<PredicateDecl>,
    pub functions: Vec<FunctionDecl>,
    pub schemas: Vec<ActionSchema>,
}

const EITHER: [&str; 3] = ["agt_or_obj", "agent_or_object", "object_or_agent"];

pub(crate) fn tag_of_type(types: &TypeTable, ty: &str) -> SortTag {
    if EITHER.contains(&ty) {
        SortTag::AgtOrObj
    } else {
        types.sort_of_type(ty).into()
    }
}

impl DomainFile {
    /// Relations and functions of the domain, without constants.
    pub fn signature(&self) -> Result<Signature> {
        let mut sig = Signature::new();
        for p in &self.predicates {
            sig.add_relation(&p.name, p.args.iter().map(|t| tag_of_type(&self.types, t)).collect())?;
        }
        for f in &self.functions {
            let result = self.types.sort_of_type(&f.result);
            sig.add_function(
                &f.name,
                f.args.iter().map(|t| tag_of_type(&self.types, t)).collect(),
                result,
            )?;
        }
        Ok(sig)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas
            .iter()
            .find(|s| s.name() == name)
            .or_else(|| self.schemas.iter().find(|s| s.name().eq_ignore_ascii_case(name)))
    }
}

fn section(s: &Sexp) -> Option<(&str, &[Sexp])> {
    let items = s.list()?;
    let (h, rest) = items.split_first()?;
    Some((h.atom()?, rest))
}

/// Checks `(define (KIND name) ...)` and returns the name and sections.
pub(crate) fn define<'a>(s: &'a Sexp, kind: &str) -> Result<(String, &'a [Sexp])> {
    let items = s.expect_list("`(define ...)`")?;
    if items.len() < 2 || !items[0].is_atom("define") {
        return Err(s.err("expected `(define ...)`"));
    }
    let head = items[1].expect_list(&format!("`({kind} name)`"))?;
    if head.len() != 2 || !head[0].is_atom(kind) {
        return Err(items[1].err(format!("expected `({kind} name)`")));
    }
    Ok((head[1].expect_atom("a name")?.to_string(), &items[2..]))
}

fn parse_types(rest: &[Sexp], types: &mut TypeTable) -> Result<()> {
    for (names, parent) in typed_list(rest, "")? {
        let parent = (!parent.is_empty()).then_some(parent);
        for n in names {
            types.parents.insert(n, parent.clone());
        }
    }
    for t in types.parents.keys() {
        let mut seen = BTreeSet::new();
        let mut cur = Some(t.clone());
        while let Some(c) = cur {
            if !seen.insert(c.clone()) {
                return Err(Error::Semantic(format!("type `{t}` is its own ancestor")));
            }
            cur = types.parents.get(&c).cloned().flatten();
        }
    }
    Ok(())
}

fn parse_predicate(s: &Sexp) -> Result<PredicateDecl> {
    let items = s.expect_list("a predicate declaration")?;
    let (name, args) = items.split_first().ok_or_else(|| s.err("empty predicate"))?;
    let mut types = Vec::new();
    for (names, ty) in typed_list(args, "object")? {
        types.extend(names.iter().map(|_| ty.clone()));
    }
    Ok(PredicateDecl {
        name: name.expect_atom("a predicate name")?.to_string(),
        args: types,
    })
}

fn parse_functions(rest: &[Sexp]) -> Result<Vec<FunctionDecl>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rest.len() {
        let decl = parse_predicate(&rest[i])?;
        let mut result = "object".to_string();
        if rest.get(i + 1).is_some_and(|s| s.is_atom("-")) {
            result = rest
                .get(i + 2)
                .ok_or_else(|| rest[i + 1].err("`-` without a type"))?
                .expect_atom("a type")?
                .to_string();
            i += 3;
        } else if let Some(t) = rest.get(i + 1).and_then(Sexp::atom).and_then(|a| a.strip_prefix('-')) {
            result = t.to_string();
            i += 2;
        } else {
            i += 1;
        }
        out.push(FunctionDecl {
            name: decl.name,
            args: decl.args,
            result,
        });
    }
    Ok(out)
}

struct EventDecl {
    name: String,
    actual: bool,
    pre: Formula,
    post: Vec<(Atom, Formula)>,
}

fn post_entry(s: &Sexp, scope: &mut Vec<Var>, ctx: Ctx) -> Result<(Atom, Formula)> {
    let items = s.expect_list("a postcondition entry")?;
    if s.head().is_some_and(|h| h.eq_ignore_ascii_case("not")) && items.len() == 2 {
        return match formula(&items[1], scope, ctx)? {
            Formula::Atom(a) => Ok((a, Formula::Bottom)),
            _ => Err(s.err("`not` in a postcondition must wrap an atom")),
        };
    }
    let (head, rest) = items.split_first().ok_or_else(|| s.err("empty postcondition entry"))?;
    let rel = head.expect_atom("a predicate")?;
    let (args, cond) = match rest.iter().position(|x| x.is_atom("if")) {
        Some(k) => {
            if k + 2 != rest.len() {
                return Err(s.err("expected `(atom args if condition)`"));
            }
            (&rest[..k], formula(&rest[k + 1], scope, ctx)?)
        }
        None => (rest, Formula::Top),
    };
    let args = args.iter().map(|t| term(t, scope)).collect::<Result<_>>()?;
    Ok((Atom::new(rel, args), cond))
}

fn parse_post(s: &Sexp, scope: &mut Vec<Var>, ctx: Ctx) -> Result<Vec<(Atom, Formula)>> {
    if s.is_atom("id") {
        return Ok(Vec::new());
    }
    let items = s.expect_list("a postcondition")?;
    if items.is_empty() || (items.len() == 1 && items[0].is_atom("id")) {
        return Ok(Vec::new());
    }
    let entries: Vec<&Sexp> = if items[0].atom().is_some() {
        vec![s]
    } else {
        items.iter().collect()
    };
    let mut out: Vec<(Atom, Formula)> = Vec::new();
    for e in entries {
        let (a, f) = post_entry(e, scope, ctx)?;
        if out.iter().any(|(b, _)| *b == a) {
            return Err(e.err(format!("postcondition for `{a}` given twice")));
        }
        out.push((a, f));
    }
    Ok(out)
}

fn parse_event(s: &Sexp, actual: bool, scope: &mut Vec<Var>, ctx: Ctx) -> Result<EventDecl> {
    let items = s.expect_list("an event")?;
    let name = items
        .get(1)
        .ok_or_else(|| s.err("event without a name"))?
        .expect_atom("an event name")?
        .to_string();
    let mut pre = Formula::Top;
    let mut post = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i].expect_atom("`:precondition` or `:postcondition`")?;
        let val = items.get(i + 1).ok_or_else(|| items[i].err("keyword without a value"))?;
        match key.to_ascii_lowercase().as_str() {
            ":precondition" => pre = formula(val, scope, ctx)?,
            ":postcondition" => post = parse_post(val, scope, ctx)?,
            _ => return Err(items[i].err(format!("unknown event keyword `{key}`"))),
        }
        i += 2;
    }
    Ok(EventDecl {
        name,
        actual,
        pre,
        post,
    })
}

fn parse_edges(
    rest: &[Sexp],
    model: &mut ActionModel,
    scope: &mut Vec<Var>,
    ctx: Ctx,
) -> Result<()> {
    for chunk in rest.chunks(4) {
        if chunk.len() != 4 {
            return Err(chunk[0].err("expected `:e1 -- e2 condition`"));
        }
        let from = chunk[0].expect_atom("an event")?;
        let from = from.strip_prefix(':').unwrap_or(from);
        let link = chunk[1].expect_atom("`--` or `->`")?;
        let to = chunk[2].expect_atom("an event")?;
        let q = formula(&chunk[3], scope, ctx)?;
        let r = match link {
            "--" => model.link(from, to, q),
            "->" => model.set_edge(from, to, q),
            _ => return Err(chunk[1].err("expected `--` or `->`")),
        };
        r.map_err(|e| chunk[0].err(e.to_string()))?;
    }
    Ok(())
}

fn parse_action(rest: &[Sexp], types: &TypeTable, head: &Sexp) -> Result<ActionSchema> {
    let name = rest
        .first()
        .ok_or_else(|| head.err("action without a name"))?
        .expect_atom("an action name")?;
    let ctx = Ctx {
        types,
        sig: None,
        schemas: &[],
    };
    let mut params: Vec<(Var, String)> = Vec::new();
    let mut agent = false;
    let mut events = Vec::new();
    let mut edges: Vec<&[Sexp]> = Vec::new();
    let mut i = 1;
    while i < rest.len() {
        let s = &rest[i];
        if s.is_atom(":agent") {
            let mut j = i + 1;
            let mut toks = Vec::new();
            while j < rest.len() && rest[j].atom().is_some_and(|a| !a.starts_with(':')) {
                toks.push(rest[j].clone());
                j += 1;
            }
            let list = Sexp::List {
                items: toks,
                line: s.pos().0,
                col: s.pos().1,
            };
            let mut vs = binders(&list, types)?;
            if vs.len() != 1 {
                return Err(s.err("`:agent` takes one variable"));
            }
            let (v, mut ty) = vs.pop().unwrap();
            if list.list().unwrap().len() == 1 {
                ty = "agent".into();
            }
            let v = Var::new(&v.name, types.sort_of_type(&ty));
            if v.sort != Sort::Agt {
                return Err(s.err(format!("agent parameter has non-agent type `{ty}`")));
            }
            params.insert(0, (v, ty));
            agent = true;
            i = j;
        } else if s.is_atom(":parameters") {
            let p = rest.get(i + 1).ok_or_else(|| s.err("`:parameters` without a list"))?;
            params.extend(binders(p, types)?);
            i += 2;
        } else if let Some((h, body)) = section(s) {
            match h.to_ascii_lowercase().as_str() {
                ":actual_event" | ":event" => events.push(s),
                ":edge-conditions" => edges.push(body),
                _ => return Err(s.err(format!("unknown action section `{h}`"))),
            }
            i += 1;
        } else {
            return Err(s.err("unexpected token in action"));
        }
    }
    let mut scope: Vec<Var> = params.iter().map(|(v, _)| v.clone()).collect();
    let decls = events
        .into_iter()
        .map(|s| {
            let actual = s.head().is_some_and(|h| h.eq_ignore_ascii_case(":actual_event"));
            parse_event(s, actual, &mut scope, ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    if decls.is_empty() {
        return Err(head.err(format!("action `{name}` has no events")));
    }
    let designated = match decls.iter().filter(|d| d.actual).count() {
        0 => 0,
        1 => decls.iter().position(|d| d.actual).unwrap(),
        _ => return Err(head.err(format!("action `{name}` has several actual events"))),
    };
    let names: Vec<&str> = decls.iter().map(|d| d.name.as_str()).collect();
    let mut model = ActionModel::new(name, &names);
    if model.events.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(head.err(format!("action `{name}` repeats an event name")));
    }
    for (k, d) in decls.into_iter().enumerate() {
        model.pre[k] = d.pre;
        model.post[k] = d.post;
    }
    for body in edges {
        parse_edges(body, &mut model, &mut scope, ctx)?;
    }
    let (vars, tys): (Vec<Var>, Vec<String>) = params.into_iter().unzip();
    Ok(ActionSchema {
        params: vars,
        param_types: tys,
        agent,
        designated,
        body: model,
    })
}

pub fn parse_domain(text: &str) -> Result<DomainFile> {
    let all = parse_all(text)?;
    let top = match all.as_slice() {
        [one] => one,
        [] => return Err(Error::Syntax { line: 1, col: 1, msg: "empty domain file".into() }),
        [_, extra, ..] => return Err(extra.err("one `(define (domain ...))` per file")),
    };
    let (name, sections) = define(top, "domain")?;
    let mut d = DomainFile {
        name,
        types: TypeTable::default(),
        predicates: Vec::new(),
        functions: Vec::new(),
        schemas: Vec::new(),
    };
    for s in sections {
        let (h, rest) = section(s).ok_or_else(|| s.err("expected a `(:section ...)`"))?;
        match h.to_ascii_lowercase().as_str() {
            ":types" => parse_types(rest, &mut d.types).map_err(|e| s.err(e.to_string()))?,
            ":predicates" => {
                for p in rest {
                    d.predicates.push(parse_predicate(p)?);
                }
            }
            ":functions" => d.functions.extend(parse_functions(rest)?),
            ":requirements" => {}
            ":action" => {
                let schema = parse_action(rest, &d.types, s)?;
                if d.schemas.iter().any(|o| o.name() == schema.name()) {
                    return Err(s.err(format!("action `{}` declared twice", schema.name())));
                }
                d.schemas.push(schema);
            }
            _ => return Err(s.err(format!("unknown domain section `{h}`"))),
        }
    }
    d.signature().map_err(|e| top.err(e.to_string()))?;
    Ok(d)
}

pub(crate) fn group_typed(items: impl IntoIterator<Item = (String, String)>) -> String {
    let mut groups: IndexMap<String, Vec<String>> = IndexMap::new();
    let mut out = Vec::new();
    let mut last: Option<String> = None;
    for (n, t) in items {
        if last.as_ref() != Some(&t) {
            if let Some(l) = last.take() {
                out.push((l.clone(), groups.shift_remove(&l).unwrap()));
            }
            last = Some(t.clone());
        }
        groups.entry(t).or_default().push(n);
    }
    if let Some(l) = last {
        out.push((l.clone(), groups.shift_remove(&l).unwrap()));
    }
    out.iter()
        .map(|(t, ns)| {
            if t.is_empty() {
                ns.join(" ")
            } else {
                format!("{} - {t}", ns.join(" "))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}


fn post_text(post: &[(Atom, Formula)]) -> String {
    if post.is_empty() {
        return "(id)".into();
    }
    let entries: Vec<String> = post
        .iter()
        .map(|(a, f)| {
            let args: Vec<String> = a.args.iter().map(term_text).collect();
            let mut s = format!("({}", a.rel);
            for x in args {
                s.push(' ');
                s.push_str(&x);
            }
            format!("{s} if {})", formula_text(f))
        })
        .collect();
    format!("({})", entries.join(" "))
}

fn schema_text(s: &ActionSchema) -> String {
    let b = &s.body;
    let mut out = format!("  (:action {}\n", b.name);
    let mut params = s.params.iter().zip(&s.param_types);
    if s.agent {
        let (v, t) = params.next().unwrap();
        out += &format!("    :agent ?{} - {t}\n", v.name);
    }
    let rest: Vec<(String, String)> = params.map(|(v, t)| (format!("?{}", v.name), t.clone())).collect();
    out += &format!("    :parameters ({})\n", group_typed(rest));
    for (k, e) in b.events.iter().enumerate() {
        let kw = if k == s.designated { ":actual_event" } else { ":event" };
        out += &format!(
            "    ({kw} {e}\n      :precondition {}\n      :postcondition {})\n",
            formula_text(&b.pre[k]),
            post_text(&b.post[k])
        );
    }
    let n = b.events.len();
    let mut lines = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (q, r) = (&b.edge[i][j], &b.edge[j][i]);
            if i == j {
                if *q != reflexive_condition() {
                    lines.push(format!(":{} -- {} {}", b.events[i], b.events[j], formula_text(q)));
                }
            } else if q == r {
                if *q != Formula::Bottom {
                    lines.push(format!(":{} -- {} {}", b.events[i], b.events[j], formula_text(q)));
                }
            } else {
                if *q != Formula::Bottom {
                    lines.push(format!(":{} -> {} {}", b.events[i], b.events[j], formula_text(q)));
                }
                if *r != Formula::Bottom {
                    lines.push(format!(":{} -> {} {}", b.events[j], b.events[i], formula_text(r)));
                }
            }
        }
    }
    if !lines.is_empty() {
        out += "    (:edge-conditions\n";
        for l in lines {
            out += &format!("      {l}\n");
        }
        out += "    )";
    }
    out += ")\n";
    out
}

pub fn serialize_domain(d: &DomainFile) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.types.parents.is_empty() {
        let items = d
            .types
            .parents
            .iter()
            .map(|(t, p)| (t.clone(), p.clone().unwrap_or_default()));
        out += &format!("  (:types {})\n", group_typed(items));
    }
    out += "  (:predicates";
    for p in &d.predicates {
        let args: Vec<(String, String)> = p
            .args
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("?x{}", i + 1), t.clone()))
            .collect();
        if args.is_empty() {
            out += &format!(" ({})", p.name);
        } else {
            out += &format!(" ({} {})", p.name, group_typed(args));
        }
    }
    out += ")\n";
    if !d.functions.is_empty() {
        out += "  (:functions";
        for f in &d.functions {
            let args: Vec<(String, String)> = f
                .args
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("?x{}", i + 1), t.clone()))
                .collect();
            out += &format!(" ({} {}) - {}", f.name, group_typed(args), f.result);
        }
        out += ")\n";
    }
    for s in &d.schemas {
        out += &schema_text(s);
    }
    out += ")\n";
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "
(define (domain tiny)
  (:types room - object)
  (:predicates (at ?a - agent ?r - room) (lit))
  (:action Go
    :agent ?a - agent
    :parameters (?from ?to - room)
    (:actual_event go
      :precondition (at ?a ?from)
      :postcondition ((at ?a ?to) (not (at ?a ?from))))
    (:event stay :precondition TRUE :postcondition (id))
    (:edge-conditions
      :go -- stay (not (= ?x* ?a)))))";

    #[test]
    fn parses_schema() {
        let d = parse_domain(TINY).unwrap();
        let s = &d.schemas[0];
        assert!(s.agent);
        assert_eq!(s.params.len(), 3);
        assert_eq!(s.params[0].sort, Sort::Agt);
        assert_eq!(s.param_types, vec!["agent", "room", "room"]);
        assert_eq!(s.body.events, vec!["go", "stay"]);
        assert_eq!(s.body.post[0].len(), 2);
        assert_eq!(s.body.post[0][1].1, Formula::Bottom);
        assert_eq!(s.body.edge[0][1], s.body.edge[1][0]);
        assert_eq!(s.body.edge[0][0], reflexive_condition());
    }

    #[test]
    fn round_trip() {
        let d = parse_domain(TINY).unwrap();
        let again = parse_domain(&serialize_domain(&d)).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn empty_predicates() {
        let d = parse_domain("(define (domain e) (:predicates))").unwrap();
        assert_eq!(d.signature().unwrap().num_relations(), 1);
    }

    #[test]
    fn type_cycle() {
        assert!(parse_domain("(define (domain c) (:types a - b b - a))").is_err());
    }
}
