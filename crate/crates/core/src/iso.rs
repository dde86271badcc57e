//! Canonical forms of pointed models up to world renaming.
//!
//! Colour refinement splits worlds by their interpretation and by the colours
//! of their successors; ties are broken by individualizing each candidate in
//! turn and keeping the smallest resulting encoding.

use std::collections::BTreeMap;

use crate::semantics::{Elem, Model, PointedModel, World};

type Label = (Vec<Elem>, Vec<Vec<Vec<Elem>>>, Vec<Vec<(Vec<Elem>, Elem)>>);

/// Equal keys mean isomorphic models, for models over the same signature and
/// domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonKey {
    point: Option<usize>,
    labels: Vec<u32>,
    /// Distinct world labels, indexed by `labels`.
    table: Vec<Label>,
    access: Vec<Vec<Vec<u32>>>,
}

fn label(w: &World) -> Label {
    (
        w.consts.clone(),
        w.rels.iter().map(|r| r.iter().cloned().collect()).collect(),
        w.funcs.iter().map(|f| f.iter().cloned().collect()).collect(),
    )
}

fn rank<T: Ord + Clone>(items: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = items.to_vec();
    sorted.sort();
    sorted.dedup();
    items
        .iter()
        .map(|x| sorted.binary_search(x).unwrap())
        .collect()
}

fn distinct(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Stable refinement: a world's new colour is its old colour together with
/// the sorted successor and predecessor colours per agent.
fn refine(m: &Model, mut colour: Vec<usize>) -> Vec<usize> {
    let n = m.num_worlds();
    let mut pred: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; m.access.len()];
    for (i, rows) in m.access.iter().enumerate() {
        for (u, succ) in rows.iter().enumerate() {
            for &v in succ {
                pred[i][v].push(u);
            }
        }
    }
    loop {
        let before = distinct(&colour);
        let sigs: Vec<(usize, Vec<Vec<usize>>)> = (0..n)
            .map(|w| {
                let mut parts = Vec::with_capacity(2 * m.access.len());
                for i in 0..m.access.len() {
                    let mut s: Vec<usize> = m.access[i][w].iter().map(|&v| colour[v]).collect();
                    s.sort_unstable();
                    parts.push(s);
                    let mut p: Vec<usize> = pred[i][w].iter().map(|&v| colour[v]).collect();
                    p.sort_unstable();
                    parts.push(p);
                }
                (colour[w], parts)
            })
            .collect();
        colour = rank(&sigs);
        if distinct(&colour) == before {
            return colour;
        }
    }
}

struct Search<'a> {
    m: &'a Model,
    labels: Vec<usize>,
    point: Option<usize>,
    best: Option<(Vec<u32>, Vec<Vec<Vec<u32>>>, Vec<usize>)>,
}

impl Search<'_> {
    fn encode(&self, order: &[usize]) -> (Vec<u32>, Vec<Vec<Vec<u32>>>) {
        let mut pos = vec![0u32; order.len()];
        for (k, &w) in order.iter().enumerate() {
            pos[w] = k as u32;
        }
        let labels = order.iter().map(|&w| self.labels[w] as u32).collect();
        let access = self
            .m
            .access
            .iter()
            .map(|rows| {
                order
                    .iter()
                    .map(|&w| {
                        let mut s: Vec<u32> = rows[w].iter().map(|&v| pos[v]).collect();
                        s.sort_unstable();
                        s
                    })
                    .collect()
            })
            .collect();
        (labels, access)
    }

    fn go(&mut self, colour: Vec<usize>) {
        let n = colour.len();
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (w, &c) in colour.iter().enumerate() {
            cells.entry(c).or_default().push(w);
        }
        match cells.values().find(|c| c.len() > 1) {
            None => {
                let mut order = vec![0; n];
                for (w, &c) in colour.iter().enumerate() {
                    order[c] = w;
                }
                let (labels, access) = self.encode(&order);
                let better = match &self.best {
                    None => true,
                    Some((l, a, _)) => (&labels, &access) < (l, a),
                };
                if better {
                    self.best = Some((labels, access, order));
                }
            }
            Some(cell) => {
                let cell = cell.clone();
                for &v in &cell {
                    // Individualize v: it sorts just before the rest of its cell.
                    let mut c: Vec<usize> = colour.iter().map(|&x| 2 * x + 1).collect();
                    c[v] -= 1;
                    let c = refine(self.m, rank(&c));
                    self.go(c);
                }
            }
        }
    }
}

/// World order realizing the canonical form, and the key itself.
pub fn canonical(m: &Model, point: Option<usize>) -> (Vec<usize>, CanonKey) {
    let raw: Vec<Label> = m.worlds.iter().map(label).collect();
    let labels = rank(&raw);
    let mut table: Vec<Label> = raw.clone();
    table.sort();
    table.dedup();
    let init: Vec<(bool, usize)> = (0..m.num_worlds())
        .map(|w| (Some(w) != point, labels[w]))
        .collect();
    let colour = refine(m, rank(&init));
    let mut s = Search {
        m,
        labels,
        point,
        best: None,
    };
    s.go(colour);
    let (labels, access, order) = s.best.unwrap();
    let point = s.point.map(|p| order.iter().position(|&w| w == p).unwrap());
    (
        order,
        CanonKey {
            point,
            labels,
            table,
            access,
        },
    )
}

pub fn canonical_key(s: &PointedModel) -> CanonKey {
    canonical(&s.model, Some(s.point)).1
}

pub fn canonical_key_model(m: &Model) -> CanonKey {
    canonical(m, None).1
}

pub fn isomorphic(a: &PointedModel, b: &PointedModel) -> bool {
    a.model.sig == b.model.sig
        && a.model.domain == b.model.domain
        && a.model.num_worlds() == b.model.num_worlds()
        && canonical_key(a) == canonical_key(b)
}

/// The model with worlds renumbered, world `order[k]` becoming world `k`.
pub fn permute(m: &Model, order: &[usize]) -> Model {
    let mut pos = vec![0; order.len()];
    for (k, &w) in order.iter().enumerate() {
        pos[w] = k;
    }
    Model {
        sig: m.sig.clone(),
        domain: m.domain.clone(),
        worlds: order.iter().map(|&w| m.worlds[w].clone()).collect(),
        access: m
            .access
            .iter()
            .map(|rows| {
                order
                    .iter()
                    .map(|&w| {
                        let mut s: Vec<usize> = rows[w].iter().map(|&v| pos[v]).collect();
                        s.sort_unstable();
                        s
                    })
                    .collect()
            })
            .collect(),
    }
}
