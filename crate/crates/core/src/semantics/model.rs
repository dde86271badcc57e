use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::syntax::{Signature, Sort, Var};

/// Index of a domain element: agents first, then objects.
pub type Elem = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
}

impl Domain {
    pub fn new(agents: Vec<String>, objects: Vec<String>) -> Result<Self> {
        if agents.is_empty() || objects.is_empty() {
            return Err(Error::Semantic("agent and object domains must be non-empty".into()));
        }
        let mut seen = BTreeSet::new();
        for n in agents.iter().chain(&objects) {
            if !seen.insert(n.as_str()) {
                return Err(Error::Semantic(format!("domain element `{n}` declared twice")));
            }
        }
        Ok(Domain { agents, objects })
    }

    pub fn len(&self) -> usize {
        self.agents.len() + self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn sort(&self, e: Elem) -> Sort {
        if e < self.agents.len() {
            Sort::Agt
        } else {
            Sort::Obj
        }
    }

    pub fn elems(&self, sort: Sort) -> Range<Elem> {
        match sort {
            Sort::Agt => 0..self.agents.len(),
            Sort::Obj => self.agents.len()..self.len(),
        }
    }

    pub fn name(&self, e: Elem) -> &str {
        if e < self.agents.len() {
            &self.agents[e]
        } else {
            &self.objects[e - self.agents.len()]
        }
    }

    pub fn index(&self, name: &str) -> Option<Elem> {
        self.agents
            .iter()
            .position(|a| a == name)
            .or_else(|| self.objects.iter().position(|o| o == name).map(|i| i + self.agents.len()))
    }
}

/// Interpretation at one world, indexed like the signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct World {
    pub name: String,
    pub consts: Vec<Elem>,
    /// Extension per relation; the slot of `=` stays empty.
    pub rels: Vec<BTreeSet<Vec<Elem>>>,
    /// Graph per function; at most one value per argument tuple in a valid model.
    pub funcs: Vec<BTreeSet<(Vec<Elem>, Elem)>>,
}

impl World {
    pub fn lookup(&self, f: usize, args: &[Elem]) -> Option<Elem> {
        let lo = (args.to_vec(), 0);
        self.funcs[f]
            .range(lo..)
            .next()
            .filter(|(a, _)| a.as_slice() == args)
            .map(|(_, v)| *v)
    }
}

/// First-order Kripke model over a constant domain.
#[derive(Clone, Debug)]
pub struct Model {
    pub sig: Arc<Signature>,
    pub domain: Arc<Domain>,
    pub worlds: Vec<World>,
    /// `access[i][w]`: sorted successors of `w` for the `i`-th agent.
    pub access: Vec<Vec<Vec<usize>>>,
}

impl Model {
    pub fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w.name == name)
    }

    pub fn world(&self, name: &str) -> Result<usize> {
        self.world_index(name).ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    pub fn successors(&self, agent: Elem, w: usize) -> &[usize] {
        &self.access[agent][w]
    }

    pub fn has_edge(&self, agent: Elem, w: usize, v: usize) -> bool {
        self.access[agent][w].binary_search(&v).is_ok()
    }

    pub fn holds_fact(&self, w: usize, rel: &str, args: &[&str]) -> bool {
        let Some(r) = self.sig.relation_index(rel) else {
            return false;
        };
        let Some(tuple) = args.iter().map(|a| self.domain.index(a)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        self.worlds[w].rels[r].contains(&tuple)
    }

    pub fn constant_value(&self, w: usize, c: &str) -> Option<&str> {
        let i = self.sig.constant_index(c)?;
        Some(self.domain.name(self.worlds[w].consts[i]))
    }

    pub fn num_edges(&self) -> usize {
        self.access.iter().flatten().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct PointedModel {
    pub model: Arc<Model>,
    pub point: usize,
}

impl PointedModel {
    pub fn new(model: Model, point: usize) -> Self {
        PointedModel {
            model: Arc::new(model),
            point,
        }
    }

    pub fn point_name(&self) -> &str {
        &self.model.worlds[self.point].name
    }
}

/// Sparse assignment of domain elements to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation(pub BTreeMap<Var, Elem>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Result<Elem> {
        self.0.get(v).copied().ok_or_else(|| Error::UnboundVariable(v.name.clone()))
    }

    pub fn set(&mut self, v: Var, e: Elem) {
        self.0.insert(v, e);
    }

    pub fn with(mut self, v: Var, e: Elem) -> Self {
        self.set(v, e);
        self
    }
}

const UNSET: Elem = usize::MAX;

/// Incremental, name-based construction of a [`Model`].
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    sig: Arc<Signature>,
    domain: Arc<Domain>,
    worlds: Vec<World>,
    access: Vec<Vec<BTreeSet<usize>>>,
}

impl ModelBuilder {
    pub fn new(sig: Arc<Signature>, domain: Domain) -> Self {
        let n = domain.num_agents();
        ModelBuilder {
            sig,
            domain: Arc::new(domain),
            worlds: Vec::new(),
            access: vec![Vec::new(); n],
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn add_world(&mut self, name: &str) -> Result<usize> {
        if self.worlds.iter().any(|w| w.name == name) {
            return Err(Error::Semantic(format!("world `{name}` declared twice")));
        }
        self.worlds.push(World {
            name: name.to_string(),
            consts: vec![UNSET; self.sig.num_constants()],
            rels: vec![BTreeSet::new(); self.sig.num_relations()],
            funcs: vec![BTreeSet::new(); self.sig.num_functions()],
        });
        for a in &mut self.access {
            a.push(BTreeSet::new());
        }
        Ok(self.worlds.len() - 1)
    }

    fn world(&self, name: &str) -> Result<usize> {
        self.worlds
            .iter()
            .position(|w| w.name == name)
            .ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    fn elem(&self, name: &str) -> Result<Elem> {
        self.domain.index(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn set_constant(&mut self, w: &str, c: &str, value: &str) -> Result<()> {
        let w = self.world(w)?;
        let ci = self.sig.constant_index(c).ok_or_else(|| Error::UnknownSymbol(c.to_string()))?;
        let e = self.elem(value)?;
        let want = self.sig.constant(c).unwrap();
        if self.domain.sort(e) != want {
            return Err(Error::Semantic(format!(
                "constant `{c}` of sort {want} cannot denote `{value}`"
            )));
        }
        self.worlds[w].consts[ci] = e;
        Ok(())
    }

    /// Gives every constant the same value in all worlds.
    pub fn set_rigid(&mut self, c: &str, value: &str) -> Result<()> {
        let names: Vec<String> = self.worlds.iter().map(|w| w.name.clone()).collect();
        for w in names {
            self.set_constant(&w, c, value)?;
        }
        Ok(())
    }

    pub fn add_fact(&mut self, w: &str, rel: &str, args: &[&str]) -> Result<()> {
        let w = self.world(w)?;
        let ri = self.sig.relation_index(rel).ok_or_else(|| Error::UnknownSymbol(rel.to_string()))?;
        let tags = self.sig.relation(rel).unwrap().to_vec();
        if tags.len() != args.len() {
            return Err(Error::ArityMismatch {
                name: rel.to_string(),
                expected: tags.len(),
                got: args.len(),
            });
        }
        let mut tuple = Vec::with_capacity(args.len());
        for (i, (a, tag)) in args.iter().zip(&tags).enumerate() {
            let e = self.elem(a)?;
            let s = self.domain.sort(e);
            if !tag.accepts(s) {
                return Err(Error::ArgumentSortMismatch {
                    name: rel.to_string(),
                    index: i,
                    expected: tag.to_string(),
                    got: s.to_string(),
                });
            }
            tuple.push(e);
        }
        if ri == 0 {
            return Err(Error::Semantic("equality is fixed to the diagonal".into()));
        }
        self.worlds[w].rels[ri].insert(tuple);
        Ok(())
    }

    pub fn set_function(&mut self, w: &str, f: &str, args: &[&str], value: &str) -> Result<()> {
        let w = self.world(w)?;
        let fi = self.sig.function_index(f).ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
        let fs = self.sig.function(f).unwrap().clone();
        if fs.args.len() != args.len() {
            return Err(Error::ArityMismatch {
                name: f.to_string(),
                expected: fs.args.len(),
                got: args.len(),
            });
        }
        let tuple = args.iter().map(|a| self.elem(a)).collect::<Result<Vec<_>>>()?;
        for (i, (e, tag)) in tuple.iter().zip(&fs.args).enumerate() {
            if !tag.accepts(self.domain.sort(*e)) {
                return Err(Error::ArgumentSortMismatch {
                    name: f.to_string(),
                    index: i,
                    expected: tag.to_string(),
                    got: self.domain.sort(*e).to_string(),
                });
            }
        }
        let v = self.elem(value)?;
        if self.domain.sort(v) != fs.result {
            return Err(Error::Semantic(format!("`{f}` returns {} values", fs.result)));
        }
        let graph = &mut self.worlds[w].funcs[fi];
        graph.retain(|(a, _)| a != &tuple);
        graph.insert((tuple, v));
        Ok(())
    }

    pub fn add_edge(&mut self, agent: &str, from: &str, to: &str) -> Result<()> {
        let a = self.elem(agent)?;
        if self.domain.sort(a) != Sort::Agt {
            return Err(Error::Semantic(format!("`{agent}` is not an agent")));
        }
        let (f, t) = (self.world(from)?, self.world(to)?);
        self.access[a][f].insert(t);
        Ok(())
    }

    pub fn add_edge_index(&mut self, agent: Elem, from: usize, to: usize) {
        self.access[agent][from].insert(to);
    }

    pub fn build(self) -> Result<Model> {
        if self.worlds.is_empty() {
            return Err(Error::Semantic("a model needs at least one world".into()));
        }
        for w in &self.worlds {
            if let Some(i) = w.consts.iter().position(|&e| e == UNSET) {
                let (c, _) = self.sig.constants().nth(i).unwrap();
                return Err(Error::Semantic(format!("constant `{c}` has no value at `{}`", w.name)));
            }
        }
        Ok(Model {
            sig: self.sig,
            domain: self.domain,
            worlds: self.worlds,
            access: self
                .access
                .into_iter()
                .map(|per| per.into_iter().map(|s| s.into_iter().collect()).collect())
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::signature;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn builder() -> ModelBuilder {
        let d = Domain::new(names(&["i", "j"]), names(&["o", "u"])).unwrap();
        ModelBuilder::new(signature(), d)
    }

    #[test]
    fn domain_errors() {
        assert!(Domain::new(vec![], names(&["o"])).is_err());
        assert!(Domain::new(names(&["i"]), vec![]).is_err());
        assert!(Domain::new(names(&["i"]), names(&["i"])).is_err());
        let d = Domain::new(names(&["i", "j"]), names(&["o"])).unwrap();
        assert_eq!((d.len(), d.num_agents(), d.sort(2), d.index("o")), (3, 2, Sort::Obj, Some(2)));
        assert_eq!(d.elems(Sort::Obj), 2..3);
    }

    #[test]
    fn builder_errors() {
        let mut b = builder();
        b.add_world("w").unwrap();
        assert!(b.add_world("w").is_err());
        assert!(b.set_constant("w", "c", "i").is_err());
        assert!(b.set_constant("v", "a", "i").is_err());
        assert!(b.add_fact("w", "r", &["o", "i"]).is_err());
        assert!(b.add_fact("w", "q", &[]).is_err());
        assert!(b.add_fact("w", "=", &["i", "i"]).is_err());
        assert!(b.add_edge("o", "w", "w").is_err());
        for (c, v) in [("a", "i"), ("b", "j"), ("c", "o")] {
            b.set_rigid(c, v).unwrap();
        }
        assert!(b.clone().build().is_err());
        b.set_rigid("d", "u").unwrap();
        b.add_fact("w", "r", &["j", "u"]).unwrap();
        b.add_edge("j", "w", "w").unwrap();
        let m = b.build().unwrap();
        assert!(m.holds_fact(0, "r", &["j", "u"]));
        assert_eq!(m.constant_value(0, "d"), Some("u"));
        assert_eq!((m.successors(1, 0), m.successors(0, 0)), (&[0][..], &[][..]));
        assert_eq!(m.num_edges(), 1);
        assert!(ModelBuilder::new(signature(), Domain::new(names(&["i"]), names(&["o"])).unwrap()).build().is_err());
    }
}
