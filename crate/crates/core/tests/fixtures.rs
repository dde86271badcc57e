use std::path::PathBuf;
use std::sync::Arc;

use termplan::dsl::{
    parse_domain, parse_formula, parse_problem, serialize_domain, serialize_problem, DomainFile,
    ProblemFile,
};
use termplan::dynamics::{update_pointed, PointedAction};
use termplan::iso::isomorphic;
use termplan::semantics::{satisfies, PointedModel, Valuation};
use termplan::syntax::Formula;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn load(stem: &str) -> (DomainFile, ProblemFile) {
    let d = parse_domain(&fixture(&format!("{stem}.tmd"))).unwrap();
    let p = parse_problem(&fixture(&format!("{stem}.tmp")), &d).unwrap();
    (d, p)
}

fn holds(p: &ProblemFile, d: &DomainFile, s: &PointedModel, f: &str) -> bool {
    let f = parse_formula(f, p.ctx(d)).unwrap();
    satisfies(&s.model, s.point, &Valuation::new(), &f).unwrap()
}

fn step(p: &ProblemFile, d: &DomainFile, s: &PointedModel, name: &str, args: &[&str], e: &str) -> PointedModel {
    let schema = d.schema(name).unwrap();
    let sigma = schema
        .params
        .iter()
        .cloned()
        .zip(args.iter().map(|a| a.to_string()))
        .collect();
    let a = Arc::new(schema.instantiate(&sigma, &p.sig).unwrap());
    update_pointed(s, &PointedAction::new(a, e).unwrap()).unwrap()
}

#[test]
fn all_fixtures_round_trip() {
    for stem in ["sc", "mm", "four_invalid"] {
        let (d, p) = load(stem);
        let d2 = parse_domain(&serialize_domain(&d)).unwrap();
        assert_eq!(serialize_domain(&d), serialize_domain(&d2), "{stem} domain");
        assert_eq!(d.schemas, d2.schemas, "{stem} schemas");
        let text = serialize_problem(&p);
        let p2 = parse_problem(&text, &d2).unwrap();
        assert!(isomorphic(&p.state, &p2.state), "{stem} problem:\n{text}");
        assert_eq!(p.goal, p2.goal, "{stem} goal");
        assert_eq!(text, serialize_problem(&p2), "{stem} serialization is a fixpoint");
    }
}

#[test]
fn mm_problem_shape() {
    let (d, p) = load("mm");
    assert_eq!(d.schemas.len(), 2);
    assert_eq!(d.schemas[0].body.events.len(), 1);
    assert_eq!(d.schemas[1].body.events.len(), 2);
    let m = &p.state.model;
    assert_eq!(m.num_worlds(), 4);
    assert_eq!(p.state.point_name(), "w0");
    let alpha2 = m.domain.index("Alpha2").unwrap();
    assert_eq!(m.num_edges(), 8 + 16 + 8);
    assert!((0..4).all(|w| m.access[alpha2][w].len() == 4));
    let w2 = m.world("w2").unwrap();
    assert!(m.worlds[w2].rels.iter().all(|r| r.is_empty()));
    assert_eq!(
        p.goal.as_ref().unwrap().to_string(),
        "exists a:agt. K[a] (forall o:obj. ~malfunction(o))"
    );
}

#[test]
fn sc_trajectory() {
    let (d, p) = load("sc");
    let s0 = p.state.clone();
    assert_eq!(s0.model.num_worlds(), 2);
    let s1 = step(&p, &d, &s0, "Move", &["a1", "r1", "r2"], "em");
    assert_eq!(s1.model.num_worlds(), 4);
    let s2 = step(&p, &d, &s1, "SenseCol", &["a1", "red", "b1", "r2"], "es");
    assert_eq!(s2.model.num_worlds(), 6);
    let s3 = step(&p, &d, &s2, "Announce", &["a1", "red", "b1", "r2"], "ea");
    assert_eq!(s3.model.num_worlds(), 7);
    assert_eq!(s3.point_name(), "w_red.em.es.ea");
    let goal: &Formula = p.goal.as_ref().unwrap();
    assert!(satisfies(&s3.model, s3.point, &Valuation::new(), goal).unwrap());
    assert!(!satisfies(&s0.model, s0.point, &Valuation::new(), goal).unwrap());
    assert!(holds(&p, &d, &s0, "(knows (a3) (exists (?x - object) (Color b1 ?x)))"));
}
