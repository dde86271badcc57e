use std::path::PathBuf;

use termplan::dsl::{parse_domain, parse_plan, parse_problem, PlanStep};
use termplan::planning::{
    all_plans, find_plan, verify_plan, Dedup, PlanningTask, SearchConfig, Strategy,
};
use termplan::par::Exec;

fn task(stem: &str) -> PlanningTask {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let d = parse_domain(&std::fs::read_to_string(dir.join(format!("{stem}.tmd"))).unwrap()).unwrap();
    let p = parse_problem(&std::fs::read_to_string(dir.join(format!("{stem}.tmp"))).unwrap(), &d).unwrap();
    PlanningTask::from_files(&d, &p).unwrap()
}

fn show(t: &PlanningTask, plan: &[usize]) -> Vec<String> {
    plan.iter().map(|&i| t.actions[i].to_string()).collect()
}

#[test]
fn mm_ground_actions() {
    let t = task("mm");
    let names: Vec<String> = t.actions.iter().map(|a| a.to_string()).collect();
    assert_eq!(
        names,
        [
            "Malfunction(m1,sn1)@em",
            "Malfunction(m1,sn2)@em",
            "Malfunction(m1,box)@em",
            "Malfunction(m1,ball)@em",
            "Reboot(a1,sn1)@er1",
            "Reboot(a1,sn2)@er1",
            "Reboot(a2,sn1)@er1",
            "Reboot(a2,sn2)@er1",
        ]
    );
}

#[test]
fn mm_shortest_plan_all_configs() {
    let t = task("mm");
    for strategy in [Strategy::Bfs, Strategy::Iddfs] {
        for dedup in [Dedup::None, Dedup::Isomorphism] {
            for exec in [Exec::Sequential, Exec::Parallel] {
                let cfg = SearchConfig { max_depth: 3, strategy, dedup, exec };
                let r = find_plan(&t, &cfg).unwrap();
                assert_eq!(
                    show(&t, r.plan.as_ref().unwrap()),
                    ["Malfunction(m1,box)@em", "Reboot(a1,sn1)@er1"],
                    "{strategy:?} {dedup:?} {exec:?}"
                );
            }
        }
    }
}

#[test]
fn bfs_is_minimal_against_enumeration() {
    let t = task("mm");
    let every = all_plans(&t, 3).unwrap();
    let shortest = every.iter().map(Vec::len).min().unwrap();
    let found = find_plan(&t, &SearchConfig::new(3)).unwrap().plan.unwrap();
    assert_eq!(found.len(), shortest);
    let first = every.iter().filter(|p| p.len() == shortest).min().unwrap();
    assert_eq!(&found, first);
}

#[test]
fn depth_zero_finds_nothing() {
    let t = task("mm");
    assert!(find_plan(&t, &SearchConfig::new(0)).unwrap().plan.is_none());
}

#[test]
fn sc_plan_verifies() {
    let t = task("sc");
    let plan = parse_plan("Move(a1,r1,r2)@em\nSenseCol(a1,red,b1,r2)@es\nAnnounce(a1,red,b1,r2)@ea\n").unwrap();
    let v = verify_plan(&t, &plan).unwrap();
    assert!(v.valid);
    let sizes: Vec<usize> = v.trace.iter().map(|s| s.model.num_worlds()).collect();
    assert_eq!(sizes, [2, 4, 6, 7]);
    // dropping the sensing step breaks the announcement's precondition
    let v = verify_plan(&t, &[plan[0].clone(), plan[2].clone()]).unwrap();
    assert!(!v.valid);
    assert_eq!(v.failed_step, Some(1));
}

#[test]
fn unknown_action_is_an_error() {
    let t = task("mm");
    assert!(verify_plan(&t, &[PlanStep::new("Shutdown", &[], None)]).is_err());
}
