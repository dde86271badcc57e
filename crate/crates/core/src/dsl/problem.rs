use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::domain::{define, group_typed, DomainFile};
use super::formula::{formula, formula_text, Ctx};
use super::sexp::{parse_all, typed_list, Sexp};
use crate::dynamics::TypeTable;
use crate::error::{Error, Result};
use crate::semantics::{Domain, Elem, Model, ModelBuilder, PointedModel};
use crate::syntax::{Formula, Signature, Sort};

/// A parsed problem: declarations, the initial pointed model and the goal.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub name: String,
    pub domain: String,
    /// Entities with their declared types, in declaration order.
    pub universe: Vec<(String, String)>,
    pub constants: Vec<(String, String)>,
    pub sig: Arc<Signature>,
    /// Domain types extended with constant typing.
    pub types: TypeTable,
    pub state: PointedModel,
    pub goal: Option<Formula>,
}

impl ProblemFile {
    pub fn with_state(&self, state: PointedModel) -> ProblemFile {
        ProblemFile {
            state,
            ..self.clone()
        }
    }

    pub fn ctx<'a>(&'a self, dom: &'a DomainFile) -> Ctx<'a> {
        Ctx {
            types: &self.types,
            sig: Some(&self.sig),
            schemas: &dom.schemas,
        }
    }
}

fn kw_value(items: &[Sexp], start: usize) -> Result<BTreeMap<String, &Sexp>> {
    let mut out = BTreeMap::new();
    let mut i = start;
    while i < items.len() {
        let k = items[i].expect_atom("a keyword")?;
        if !k.starts_with(':') {
            return Err(items[i].err(format!("expected a keyword, got `{k}`")));
        }
        let v = items.get(i + 1).ok_or_else(|| items[i].err("keyword without a value"))?;
        out.insert(k.to_ascii_lowercase(), v);
        i += 2;
    }
    Ok(out)
}

struct Names<'a> {
    sig: &'a Signature,
    domain: &'a Domain,
}

impl Names<'_> {
    /// A constant as interpreted at `w`, or an entity name.
    fn elem(&self, b: &ModelBuilder, consts: &BTreeMap<String, String>, s: &Sexp) -> Result<String> {
        let n = s.expect_atom("a constant or entity")?;
        if let Some(e) = consts.get(n) {
            return Ok(e.clone());
        }
        if self.sig.constant(n).is_some() {
            return Err(s.err(format!("constant `{n}` has no value in this world")));
        }
        if self.domain.index(n).is_some() {
            return Ok(n.to_string());
        }
        let _ = b;
        Err(s.err(format!("unknown constant or entity `{n}`")))
    }
}

fn union_find(n: usize, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut p, a), find(&mut p, b));
        if ra != rb {
            p[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|x| find(&mut p, x)).collect()
}

fn world_of(worlds: &[String], s: &Sexp) -> Result<usize> {
    let n = s.expect_atom("a world")?;
    worlds
        .iter()
        .position(|w| w == n)
        .ok_or_else(|| s.err(format!("unknown world `{n}`")))
}

fn parse_edges(
    rest: &[Sexp],
    b: &mut ModelBuilder,
    domain: &Domain,
    worlds: &[String],
) -> Result<()> {
    let mut listed = BTreeSet::new();
    let mut i = 0;
    while i < rest.len() {
        let key = rest[i].expect_atom("`:Agent`")?;
        let name = key.strip_prefix(':').ok_or_else(|| rest[i].err("expected `:Agent`"))?;
        let agent = match domain.index(name) {
            Some(a) if domain.sort(a) == Sort::Agt => a,
            _ => return Err(rest[i].err(format!("`{name}` is not an agent of the universe"))),
        };
        if !listed.insert(agent) {
            return Err(rest[i].err(format!("edges for `{name}` given twice")));
        }
        let raw = rest.get(i + 1).is_some_and(|s| s.is_atom(":raw"));
        let spec = rest
            .get(i + if raw { 2 } else { 1 })
            .ok_or_else(|| rest[i].err("agent without an edge list"))?;
        i += if raw { 3 } else { 2 };
        let items = spec.expect_list("an edge list")?;
        if !raw && items.len() == 1 && items[0].is_atom("all") {
            for u in 0..worlds.len() {
                for v in 0..worlds.len() {
                    b.add_edge_index(agent, u, v);
                }
            }
            continue;
        }
        let mut pairs = Vec::new();
        for p in items {
            let pi = p.expect_list("`(w -- v)`")?;
            if pi.len() != 3 {
                return Err(p.err("expected `(w -- v)` or `(w -> v)`"));
            }
            let link = pi[1].expect_atom("`--` or `->`")?;
            match (raw, link) {
                (false, "--") | (true, "->") => {}
                (false, _) => return Err(p.err("closed edge lists use `--`; use `:raw` for `->`")),
                (true, _) => return Err(p.err("`:raw` edge lists use `->`")),
            }
            pairs.push((world_of(worlds, &pi[0])?, world_of(worlds, &pi[2])?));
        }
        if raw {
            for (u, v) in pairs {
                b.add_edge_index(agent, u, v);
            }
        } else {
            let class = union_find(worlds.len(), &pairs);
            for u in 0..worlds.len() {
                for v in 0..worlds.len() {
                    if class[u] == class[v] {
                        b.add_edge_index(agent, u, v);
                    }
                }
            }
        }
    }
    for a in domain.elems(Sort::Agt) {
        if !listed.contains(&a) {
            for u in 0..worlds.len() {
                b.add_edge_index(a, u, u);
            }
        }
    }
    Ok(())
}

pub fn parse_problem(text: &str, dom: &DomainFile) -> Result<ProblemFile> {
    let all = parse_all(text)?;
    let top = match all.as_slice() {
        [one] => one,
        [] => return Err(Error::Syntax { line: 1, col: 1, msg: "empty problem file".into() }),
        [_, extra, ..] => return Err(extra.err("one `(define (problem ...))` per file")),
    };
    let (name, sections) = define(top, "problem")?;
    let mut domain_name = dom.name.clone();
    let mut universe = Vec::new();
    let mut constants = Vec::new();
    let mut init = None;
    let mut goal_sexp = None;
    for s in sections {
        let items = s.expect_list("a `(:section ...)`")?;
        let h = s.head().ok_or_else(|| s.err("expected a `(:section ...)`"))?;
        let rest = &items[1..];
        match h.to_ascii_lowercase().as_str() {
            ":domain" => {
                domain_name = rest.first().ok_or_else(|| s.err("missing domain name"))?.expect_atom("a name")?.to_string();
                if !domain_name.eq_ignore_ascii_case(&dom.name) {
                    return Err(s.err(format!("problem is for domain `{domain_name}`, not `{}`", dom.name)));
                }
            }
            ":universe" => {
                for (ns, t) in typed_list(rest, "object")? {
                    universe.extend(ns.into_iter().map(|n| (n, t.clone())));
                }
            }
            ":constants" | ":objects" => {
                for (ns, t) in typed_list(rest, "object")? {
                    constants.extend(ns.into_iter().map(|n| (n, t.clone())));
                }
            }
            ":init" => init = Some((s, rest)),
            ":goal" => {
                if rest.len() != 1 {
                    return Err(s.err("`:goal` takes one formula"));
                }
                goal_sexp = Some(&rest[0]);
            }
            _ => return Err(s.err(format!("unknown problem section `{h}`"))),
        }
    }
    let mut types = dom.types.clone();
    let (mut agents, mut objects) = (Vec::new(), Vec::new());
    for (n, t) in &universe {
        match types.sort_of_type(t) {
            Sort::Agt => agents.push(n.clone()),
            Sort::Obj => objects.push(n.clone()),
        }
    }
    let domain = Domain::new(agents, objects).map_err(|e| top.err(e.to_string()))?;
    let mut sig = dom.signature()?;
    for (c, t) in &constants {
        if domain.index(c).is_some() {
            return Err(top.err(format!("`{c}` names both a constant and an entity")));
        }
        sig.add_constant(c, types.sort_of_type(t)).map_err(|e| top.err(e.to_string()))?;
        types.constant_types.insert(c.clone(), t.clone());
    }
    let sig = Arc::new(sig);
    let (init_s, init) = init.ok_or_else(|| top.err("missing `:init`"))?;
    let mut b = ModelBuilder::new(sig.clone(), domain.clone());
    let mut worlds = Vec::new();
    let mut actual = None;
    let mut edges = None;
    let names = Names { sig: &sig, domain: &domain };
    for w in init {
        let items = w.expect_list("a world")?;
        let h = w.head().ok_or_else(|| w.err("expected `(:world ...)`"))?.to_ascii_lowercase();
        match h.as_str() {
            ":actual_world" | ":world" => {
                let wn = items.get(1).ok_or_else(|| w.err("world without a name"))?.expect_atom("a world name")?;
                if h == ":actual_world" {
                    if actual.is_some() {
                        return Err(w.err("actual world declared twice"));
                    }
                    actual = Some(worlds.len());
                }
                b.add_world(wn).map_err(|e| w.err(e.to_string()))?;
                worlds.push(wn.to_string());
                let kv = kw_value(items, 2)?;
                let mut consts = BTreeMap::new();
                if let Some(m) = kv.get(":constant_map") {
                    for pair in m.expect_list("constant pairs")? {
                        let p = pair.expect_list("`(constant entity)`")?;
                        if p.len() != 2 {
                            return Err(pair.err("expected `(constant entity)`"));
                        }
                        let (c, e) = (p[0].expect_atom("a constant")?, p[1].expect_atom("an entity")?);
                        if consts.contains_key(c) {
                            return Err(pair.err(format!("constant `{c}` mapped twice in world `{wn}`")));
                        }
                        b.set_constant(wn, c, e).map_err(|err| pair.err(err.to_string()))?;
                        consts.insert(c.to_string(), e.to_string());
                    }
                }
                if let Some((c, _)) = sig.constants().find(|(c, _)| !consts.contains_key(*c)) {
                    return Err(w.err(format!("constant `{c}` is unmapped in world `{wn}`")));
                }
                if let Some(atoms) = kv.get(":atoms") {
                    for a in atoms.expect_list("a list of atoms")? {
                        let ai = a.expect_list("an atom")?;
                        let (r, args) = ai.split_first().ok_or_else(|| a.err("empty atom"))?;
                        let r = r.expect_atom("a predicate")?;
                        let args = args
                            .iter()
                            .map(|x| names.elem(&b, &consts, x))
                            .collect::<Result<Vec<_>>>()?;
                        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                        b.add_fact(wn, r, &refs).map_err(|e| a.err(e.to_string()))?;
                    }
                }
                if let Some(fs) = kv.get(":functions") {
                    for entry in fs.expect_list("function entries")? {
                        let p = entry.expect_list("`((f args) value)`")?;
                        if p.len() != 2 {
                            return Err(entry.err("expected `((f args) value)`"));
                        }
                        let app = p[0].expect_list("`(f args)`")?;
                        let (f, args) = app.split_first().ok_or_else(|| p[0].err("empty application"))?;
                        let f = f.expect_atom("a function")?;
                        let args = args
                            .iter()
                            .map(|x| names.elem(&b, &consts, x))
                            .collect::<Result<Vec<_>>>()?;
                        let v = names.elem(&b, &consts, &p[1])?;
                        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                        b.set_function(wn, f, &refs, &v).map_err(|e| entry.err(e.to_string()))?;
                    }
                }
            }
            ":edges" => {
                if edges.is_some() {
                    return Err(w.err("`:edges` given twice"));
                }
                edges = Some((w, &items[1..]));
            }
            _ => return Err(w.err(format!("unknown init entry `{h}`"))),
        }
    }
    let actual = actual.ok_or_else(|| init_s.err("no `:actual_world`"))?;
    let (ew, erest) = edges.unwrap_or((init_s, &[]));
    parse_edges(erest, &mut b, &domain, &worlds).map_err(|e| match e {
        Error::Syntax { .. } => e,
        other => ew.err(other.to_string()),
    })?;
    let model = b.build().map_err(|e| init_s.err(e.to_string()))?;
    let state = PointedModel::new(model, actual);
    let ctx = Ctx {
        types: &types,
        sig: Some(&sig),
        schemas: &dom.schemas,
    };
    let goal = goal_sexp.map(|g| formula(g, &mut Vec::new(), ctx)).transpose()?;
    Ok(ProblemFile {
        name,
        domain: domain_name,
        universe,
        constants,
        sig,
        types,
        state,
        goal,
    })
}

fn elem_text(m: &Model, w: usize, e: Elem, want: Sort) -> String {
    let _ = want;
    m.sig
        .constants()
        .enumerate()
        .find(|(i, _)| m.worlds[w].consts[*i] == e)
        .map(|(_, (c, _))| c.to_string())
        .unwrap_or_else(|| m.domain.name(e).to_string())
}

fn is_equivalence(rel: &[Vec<usize>]) -> bool {
    let n = rel.len();
    let has = |u: usize, v: usize| rel[u].binary_search(&v).is_ok();
    (0..n).all(|u| has(u, u))
        && (0..n).all(|u| rel[u].iter().all(|&v| has(v, u)))
        && (0..n).all(|u| rel[u].iter().all(|&v| rel[v].iter().all(|&x| has(u, x))))
}

fn edges_text(m: &Model, agent: Elem) -> String {
    let rel = &m.access[agent];
    let n = rel.len();
    let name = |w: usize| m.worlds[w].name.as_str();
    if rel.iter().all(|r| r.len() == n) {
        return "(all)".into();
    }
    if is_equivalence(rel) {
        let mut pairs = Vec::new();
        let mut seen = vec![false; n];
        for u in 0..n {
            if seen[u] {
                continue;
            }
            let class = &rel[u];
            for &v in class {
                seen[v] = true;
            }
            for k in 1..class.len() {
                pairs.push(format!("({} -- {})", name(class[k - 1]), name(class[k])));
            }
        }
        return format!("({})", pairs.join(" "));
    }
    let pairs: Vec<String> = (0..n)
        .flat_map(|u| rel[u].iter().map(move |&v| (u, v)))
        .map(|(u, v)| format!("({} -> {})", name(u), name(v)))
        .collect();
    format!(":raw ({})", pairs.join(" "))
}

pub fn serialize_problem(p: &ProblemFile) -> String {
    let m = &p.state.model;
    let mut out = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    out += &format!("  (:universe {})\n", group_typed(p.universe.iter().cloned()));
    if !p.constants.is_empty() {
        out += &format!("  (:constants {})\n", group_typed(p.constants.iter().cloned()));
    }
    out += "  (:init\n";
    for (w, world) in m.worlds.iter().enumerate() {
        let kw = if w == p.state.point { ":actual_world" } else { ":world" };
        let cmap: Vec<String> = m
            .sig
            .constants()
            .enumerate()
            .map(|(i, (c, _))| format!("({c} {})", m.domain.name(world.consts[i])))
            .collect();
        let mut atoms = Vec::new();
        for ((r, _), ext) in m.sig.relations().zip(&world.rels) {
            for t in ext {
                let args: Vec<String> = t.iter().map(|&e| elem_text(m, w, e, m.domain.sort(e))).collect();
                if args.is_empty() {
                    atoms.push(format!("({r})"));
                } else {
                    atoms.push(format!("({r} {})", args.join(" ")));
                }
            }
        }
        out += &format!(
            "    ({kw} {}\n      :constant_map ({})\n      :atoms ({})",
            world.name,
            cmap.join(" "),
            atoms.join(" ")
        );
        let mut fs = Vec::new();
        for ((f, _), graph) in m.sig.functions().zip(&world.funcs) {
            for (args, v) in graph {
                let a: Vec<String> = args.iter().map(|&e| elem_text(m, w, e, m.domain.sort(e))).collect();
                fs.push(format!("(({f} {}) {})", a.join(" "), elem_text(m, w, *v, m.domain.sort(*v))));
            }
        }
        if !fs.is_empty() {
            out += &format!("\n      :functions ({})", fs.join(" "));
        }
        out += ")\n";
    }
    out += "    (:edges";
    for a in m.domain.elems(Sort::Agt) {
        out += &format!("\n      :{} {}", m.domain.name(a), edges_text(m, a));
    }
    out += "))\n";
    if let Some(g) = &p.goal {
        out += &format!("  (:goal {})\n", formula_text(g));
    }
    out += ")\n";
    out
}
