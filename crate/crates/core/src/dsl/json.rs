use std::collections::BTreeMap;

use serde::Serialize;

use super::formula::formula_text;
use super::problem::ProblemFile;
use crate::semantics::{Model, PointedModel};
use crate::syntax::Sort;

#[derive(Serialize)]
pub struct WorldJson {
    pub name: String,
    pub actual: bool,
    pub constant_map: BTreeMap<String, String>,
    pub atoms: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<(Vec<String>, String)>,
}

#[derive(Serialize)]
pub struct ModelJson {
    pub worlds: Vec<WorldJson>,
    /// Agent to sorted `[from, to]` pairs, unclosed.
    pub edges: BTreeMap<String, Vec<(String, String)>>,
}

#[derive(Serialize)]
pub struct ProblemJson {
    pub name: String,
    pub domain: String,
    pub universe: Vec<(String, String)>,
    pub constants: Vec<(String, String)>,
    pub init: ModelJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
}

pub fn model_json(s: &PointedModel) -> ModelJson {
    let m: &Model = &s.model;
    let d = &m.domain;
    let worlds = m
        .worlds
        .iter()
        .enumerate()
        .map(|(w, world)| {
            let constant_map = m
                .sig
                .constants()
                .enumerate()
                .map(|(i, (c, _))| (c.to_string(), d.name(world.consts[i]).to_string()))
                .collect();
            let mut atoms = Vec::new();
            for ((r, _), ext) in m.sig.relations().zip(&world.rels) {
                for t in ext {
                    let mut a = vec![r.to_string()];
                    a.extend(t.iter().map(|&e| d.name(e).to_string()));
                    atoms.push(a);
                }
            }
            let mut functions = Vec::new();
            for ((f, _), graph) in m.sig.functions().zip(&world.funcs) {
                for (args, v) in graph {
                    let mut a = vec![f.to_string()];
                    a.extend(args.iter().map(|&e| d.name(e).to_string()));
                    functions.push((a, d.name(*v).to_string()));
                }
            }
            WorldJson {
                name: world.name.clone(),
                actual: w == s.point,
                constant_map,
                atoms,
                functions,
            }
        })
        .collect();
    let edges = d
        .elems(Sort::Agt)
        .map(|a| {
            let pairs = (0..m.num_worlds())
                .flat_map(|u| m.access[a][u].iter().map(move |&v| (u, v)))
                .map(|(u, v)| (m.worlds[u].name.clone(), m.worlds[v].name.clone()))
                .collect();
            (d.name(a).to_string(), pairs)
        })
        .collect();
    ModelJson { worlds, edges }
}

pub fn problem_json(p: &ProblemFile) -> ProblemJson {
    ProblemJson {
        name: p.name.clone(),
        domain: p.domain.clone(),
        universe: p.universe.clone(),
        constants: p.constants.clone(),
        init: model_json(&p.state),
        goal: p.goal.as_ref().map(formula_text),
    }
}
