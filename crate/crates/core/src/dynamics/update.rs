use std::collections::BTreeSet;

use super::ActionModel;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::semantics::{compile_action, CompiledAction, Evaluator, Model, World};

/// `M ⊗ A`. An update without surviving worlds is an error.
pub fn product_update(m: &Model, a: &ActionModel) -> Result<Model> {
    product_update_with(m, a, Exec::default())
}

pub fn product_update_with(m: &Model, a: &ActionModel, exec: Exec) -> Result<Model> {
    let (model, _) = update_indexed(m, a, exec)?;
    model.ok_or_else(|| Error::EmptyUpdate(a.name.clone()))
}

struct Local {
    /// `q[(i * n + e) * n + f]`: edge condition `(e, f)` for agent `i` here.
    q: Vec<bool>,
    worlds: Vec<(usize, World)>,
}

fn local(ev: &Evaluator, a: &ActionModel, ca: &CompiledAction, w: usize) -> Result<Local> {
    let m = ev.model();
    let n = a.events.len();
    let na = m.domain.num_agents();
    let mut q = vec![false; na * n * n];
    let mut worlds = Vec::new();
    for e in 0..n {
        let pre = &ca.pre[e];
        if !ev.holds_env(pre, w, &mut pre.env())? {
            continue;
        }
        for f in 0..n {
            let (c, slot) = &ca.edge[e][f];
            let mut env = c.env();
            match slot {
                Some(s) => {
                    for i in 0..na {
                        env[*s] = Some(i);
                        q[(i * n + e) * n + f] = ev.holds_env(c, w, &mut env)?;
                    }
                }
                None => {
                    let v = ev.holds_env(c, w, &mut env)?;
                    for i in 0..na {
                        q[(i * n + e) * n + f] = v;
                    }
                }
            }
        }
        let src = &m.worlds[w];
        let mut world = World {
            name: format!("{}.{}", src.name, a.events[e]),
            ..src.clone()
        };
        let mut plus: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); world.rels.len()];
        let mut minus = plus.clone();
        for (r, args, cond) in &ca.post[e] {
            let mut tuple = Vec::with_capacity(args.len());
            for t in args {
                match ev.term(t, w, &[], &[])? {
                    Some(v) => tuple.push(v),
                    None => break,
                }
            }
            if tuple.len() != args.len() {
                continue;
            }
            if ev.holds_env(cond, w, &mut cond.env())? {
                plus[*r].insert(tuple);
            } else {
                minus[*r].insert(tuple);
            }
        }
        for (r, ext) in world.rels.iter_mut().enumerate() {
            ext.extend(plus[r].iter().cloned());
            for t in &minus[r] {
                ext.remove(t);
            }
        }
        worlds.push((e, world));
    }
    Ok(Local { q, worlds })
}

/// Product update together with the map from `(w, e)` to the new world.
pub(crate) fn update_indexed(
    m: &Model,
    a: &ActionModel,
    exec: Exec,
) -> Result<(Option<Model>, Vec<Vec<Option<usize>>>)> {
    let ca = compile_action(a, &m.sig)?;
    let n = a.events.len();
    let nw = m.num_worlds();
    let nested = a.formulas().any(|f| !f.is_static());
    let locals = if nested {
        let ev = Evaluator::new(m);
        (0..nw).map(|w| local(&ev, a, &ca, w)).collect::<Result<Vec<_>>>()?
    } else {
        exec.above(nw * n, 64)
            .map_range(nw, |w| local(&Evaluator::new(m), a, &ca, w))
            .into_iter()
            .collect::<Result<Vec<_>>>()?
    };
    let mut index = vec![vec![None; n]; nw];
    let mut worlds = Vec::new();
    let mut qs = Vec::with_capacity(nw);
    for (w, l) in locals.into_iter().enumerate() {
        for (e, world) in l.worlds {
            index[w][e] = Some(worlds.len());
            worlds.push(world);
        }
        qs.push(l.q);
    }
    if worlds.is_empty() {
        return Ok((None, index));
    }
    let na = m.domain.num_agents();
    let mut access = vec![vec![Vec::new(); worlds.len()]; na];
    for (i, rows) in access.iter_mut().enumerate() {
        for w in 0..nw {
            for e in 0..n {
                let Some(src) = index[w][e] else { continue };
                for &v in &m.access[i][w] {
                    for f in 0..n {
                        if let Some(dst) = index[v][f] {
                            if qs[w][(i * n + e) * n + f] {
                                rows[src].push(dst);
                            }
                        }
                    }
                }
            }
        }
    }
    let model = Model {
        sig: m.sig.clone(),
        domain: m.domain.clone(),
        worlds,
        access,
    };
    Ok((Some(model), index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusConfig, Generator};
    use crate::oracle;
    use crate::syntax::{Atom, Formula, Term};
    use proptest::prelude::*;

    fn arcs(m: &Model) -> Vec<Vec<BTreeSet<usize>>> {
        m.access
            .iter()
            .map(|rows| rows.iter().map(|r| r.iter().copied().collect()).collect())
            .collect()
    }

    fn same(a: &Model, b: &Model) -> bool {
        a.worlds == b.worlds && arcs(a) == arcs(b)
    }

    #[test]
    fn nothing_survives() {
        let mut g = Generator::new(5, CorpusConfig::default());
        let m = g.model();
        let mut a = ActionModel::skip();
        a.set_pre("e", Formula::Bottom).unwrap();
        assert_eq!(product_update(&m, &a).err(), Some(Error::EmptyUpdate("skip".into())));
    }

    #[test]
    fn skip_is_a_copy() {
        let mut g = Generator::new(6, CorpusConfig::default());
        let m = g.model();
        let n = product_update(&m, &ActionModel::skip()).unwrap();
        assert_eq!(n.num_worlds(), m.num_worlds());
        for (x, y) in m.worlds.iter().zip(&n.worlds) {
            assert_eq!(format!("{}.e", x.name), y.name);
            assert_eq!((&x.consts, &x.rels, &x.funcs), (&y.consts, &y.rels, &y.funcs));
        }
        assert_eq!(arcs(&m), arcs(&n));
    }

    #[test]
    fn false_post_wins_over_true() {
        let mut g = Generator::new(7, CorpusConfig::default());
        let m = g.model();
        let at = Atom::new("q", vec![Term::constant("a")]);
        let mut a = ActionModel::skip();
        a.set_post("e", at.clone(), Formula::Top).unwrap();
        a.set_post("e", at.clone(), Formula::Bottom).unwrap();
        assert_eq!(a.post[0].len(), 1);
        let n = product_update(&m, &a).unwrap();
        for w in 0..n.num_worlds() {
            assert!(!oracle::holds(&n, w, &oracle::Env::new(), &Formula::Atom(at.clone())));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_naive_update(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let m = g.model();
            let a = g.action();
            let (naive, index) = oracle::update(&m, &a);
            let (fast, fast_index) = update_indexed(&m, &a, Exec::Sequential).unwrap();
            prop_assert_eq!(naive.is_some(), fast.is_some());
            for (w, row) in fast_index.iter().enumerate() {
                for (e, x) in row.iter().enumerate() {
                    prop_assert_eq!(*x, index.get(&(w, e)).copied());
                }
            }
            if let (Some(n), Some(f)) = (naive, fast) {
                prop_assert!(same(&n, &f));
            }
        }

        #[test]
        fn parallel_matches_sequential(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let m = g.model();
            let a = g.action();
            let s = product_update_with(&m, &a, Exec::Sequential);
            let p = product_update_with(&m, &a, Exec::Parallel);
            match (s, p) {
                (Ok(s), Ok(p)) => prop_assert!(s.worlds == p.worlds && s.access == p.access),
                (s, p) => prop_assert_eq!(s.err(), p.err()),
            }
        }
    }
}
