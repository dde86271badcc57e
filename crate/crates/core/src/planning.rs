//! Epistemic planning tasks as classical transition systems, bounded search
//! and plan verification.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dsl::{DomainFile, PlanStep, ProblemFile};
use crate::dynamics::{applicable, update_pointed, ActionModel, ActionSchema, PointedAction, TypeTable};
use crate::error::{Error, Result};
use crate::iso::{canonical_key, CanonKey};
use crate::par::Exec;
use crate::semantics::{satisfies, PointedModel, Valuation};
use crate::syntax::{Formula, Signature};

/// A ground instance of a task schema at one of its events.
#[derive(Clone, Debug)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub action: PointedAction,
}

impl GroundAction {
    pub fn step(&self) -> PlanStep {
        PlanStep {
            action: self.schema.clone(),
            args: self.args.clone(),
            event: Some(self.action.event_name().to_string()),
        }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.step())
    }
}

#[derive(Clone, Debug)]
pub struct PlanningTask {
    pub initial: PointedModel,
    pub schemas: Vec<ActionSchema>,
    pub goal: Formula,
    pub sig: Arc<Signature>,
    pub types: Option<TypeTable>,
    /// Sorted by schema name, then by argument tuple in constant order.
    pub actions: Vec<GroundAction>,
}

impl PlanningTask {
    /// Grounds every schema at its designated event.
    pub fn new(
        initial: PointedModel,
        schemas: Vec<ActionSchema>,
        goal: Formula,
        types: Option<TypeTable>,
    ) -> Result<Self> {
        if !goal.is_static() || !goal.is_sentence() {
            return Err(Error::Semantic("a goal must be a static sentence".into()));
        }
        let sig = initial.model.sig.clone();
        let mut order: Vec<usize> = (0..schemas.len()).collect();
        order.sort_by(|&a, &b| schemas[a].name().cmp(schemas[b].name()));
        let mut actions = Vec::new();
        for k in order {
            let s = &schemas[k];
            for g in s.ground_all(&sig, types.as_ref())? {
                let model = Arc::new(g.model);
                actions.push(GroundAction {
                    schema: s.name().to_string(),
                    args: g.args,
                    action: PointedAction {
                        action: model,
                        event: s.designated,
                    },
                });
            }
        }
        Ok(PlanningTask {
            initial,
            schemas,
            goal,
            sig,
            types,
            actions,
        })
    }

    pub fn from_files(d: &DomainFile, p: &ProblemFile) -> Result<Self> {
        let goal = p
            .goal
            .clone()
            .ok_or_else(|| Error::Semantic(format!("problem `{}` has no goal", p.name)))?;
        Self::new(p.state.clone(), d.schemas.clone(), goal, Some(p.types.clone()))
    }

    /// Lets every event of every ground action be chosen, not only the
    /// designated one.
    pub fn with_all_events(mut self) -> Self {
        let mut all = Vec::new();
        for g in &self.actions {
            for e in 0..g.action.action.events.len() {
                all.push(GroundAction {
                    action: PointedAction {
                        action: g.action.action.clone(),
                        event: e,
                    },
                    ..g.clone()
                });
            }
        }
        self.actions = all;
        self
    }

    /// Drops ground actions for which `drop` holds.
    pub fn without(mut self, drop: impl Fn(&GroundAction) -> bool) -> Self {
        self.actions.retain(|g| !drop(g));
        self
    }

    /// Resolves a plan line against the task schemas.
    pub fn resolve(&self, step: &PlanStep) -> Result<PointedAction> {
        let schema = self
            .schemas
            .iter()
            .find(|s| s.name() == step.action)
            .ok_or_else(|| Error::UnknownAction(step.action.clone()))?;
        if schema.params.len() != step.args.len() {
            return Err(Error::ArityMismatch {
                name: step.action.clone(),
                expected: schema.params.len(),
                got: step.args.len(),
            });
        }
        if let Some(t) = &self.types {
            for ((c, p), ty) in step.args.iter().zip(&schema.params).zip(&schema.param_types) {
                if self.sig.constant(c).is_some() && !t.admits(c, ty) {
                    return Err(Error::Semantic(format!(
                        "`{c}` is not of type `{ty}` required for `?{}` in `{}`",
                        p.name, step.action
                    )));
                }
            }
        }
        let sigma = schema.params.iter().cloned().zip(step.args.iter().cloned()).collect();
        let model = Arc::new(schema.instantiate(&sigma, &self.sig)?);
        let event = match &step.event {
            Some(e) => model.event(e)?,
            None => schema.designated,
        };
        Ok(PointedAction { action: model, event })
    }
}

/// `γ(s, a)`: the update if `a` is applicable, `None` otherwise.
pub fn transition(s: &PointedModel, a: &PointedAction) -> Result<Option<PointedModel>> {
    if !applicable(s, a)? {
        return Ok(None);
    }
    update_pointed(s, a).map(Some)
}

pub fn goal_holds(s: &PointedModel, goal: &Formula) -> Result<bool> {
    satisfies(&s.model, s.point, &Valuation::new(), goal)
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub valid: bool,
    /// States reached, starting with the initial one.
    pub trace: Vec<PointedModel>,
    /// First step that was not applicable.
    pub failed_step: Option<usize>,
    pub goal_reached: bool,
    /// Verdict of `<A1,e1>...<An,en> goal` checked at the initial state.
    pub model_checked: bool,
}

/// `pre(e1) ∧ [A1,e1](pre(e2) ∧ [A2,e2](... ∧ goal))`.
pub fn plan_formula(plan: &[PointedAction], goal: &Formula) -> Formula {
    plan.iter().rev().fold(goal.clone(), |f, a| {
        Formula::And(vec![
            a.action.pre[a.event].clone(),
            Formula::dynamic(a.action.clone(), a.event_name(), f),
        ])
    })
}

pub fn verify_plan(task: &PlanningTask, plan: &[PlanStep]) -> Result<Verification> {
    let steps = plan.iter().map(|s| task.resolve(s)).collect::<Result<Vec<_>>>()?;
    verify_actions(task, &steps)
}

pub fn verify_actions(task: &PlanningTask, steps: &[PointedAction]) -> Result<Verification> {
    let mut trace = vec![task.initial.clone()];
    let mut failed_step = None;
    for (k, a) in steps.iter().enumerate() {
        match transition(trace.last().unwrap(), a)? {
            Some(next) => trace.push(next),
            None => {
                failed_step = Some(k);
                break;
            }
        }
    }
    let goal_reached = failed_step.is_none() && goal_holds(trace.last().unwrap(), &task.goal)?;
    let f = plan_formula(steps, &task.goal);
    let model_checked = goal_holds(&task.initial, &f)?;
    if model_checked != goal_reached {
        return Err(Error::Internal(format!(
            "iterated update says {goal_reached}, the dynamic formula says {model_checked}"
        )));
    }
    Ok(Verification {
        valid: goal_reached,
        trace,
        failed_step,
        goal_reached,
        model_checked,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Bfs,
    Iddfs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dedup {
    None,
    Isomorphism,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub max_depth: usize,
    pub strategy: Strategy,
    pub dedup: Dedup,
    pub exec: Exec,
}

impl SearchConfig {
    pub fn new(max_depth: usize) -> Self {
        SearchConfig {
            max_depth,
            strategy: Strategy::Bfs,
            dedup: Dedup::None,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub pruned: usize,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Indices into the task's actions; `None` means no plan within bound.
    pub plan: Option<Vec<usize>>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn steps(&self, task: &PlanningTask) -> Option<Vec<PlanStep>> {
        self.plan
            .as_ref()
            .map(|p| p.iter().map(|&i| task.actions[i].step()).collect())
    }
}

struct Node {
    state: PointedModel,
    plan: Vec<usize>,
}

pub fn find_plan(task: &PlanningTask, cfg: &SearchConfig) -> Result<SearchResult> {
    match cfg.strategy {
        Strategy::Bfs => bfs(task, cfg),
        Strategy::Iddfs => iddfs(task, cfg),
    }
}

fn bfs(task: &PlanningTask, cfg: &SearchConfig) -> Result<SearchResult> {
    let mut stats = SearchStats::default();
    if goal_holds(&task.initial, &task.goal)? {
        return Ok(SearchResult { plan: Some(vec![]), stats });
    }
    let mut seen: std::collections::HashSet<CanonKey> = Default::default();
    if cfg.dedup == Dedup::Isomorphism {
        seen.insert(canonical_key(&task.initial));
    }
    let mut frontier = vec![Node {
        state: task.initial.clone(),
        plan: vec![],
    }];
    for _ in 0..cfg.max_depth {
        if frontier.is_empty() {
            break;
        }
        stats.expanded += frontier.len();
        let pairs: Vec<(usize, usize)> = (0..frontier.len())
            .flat_map(|n| (0..task.actions.len()).map(move |a| (n, a)))
            .collect();
        let dedup = cfg.dedup == Dedup::Isomorphism;
        // Successors are computed out of order, then consumed in (node, action) order.
        let children = cfg.exec.map(&pairs, |&(n, a)| -> Result<Option<(PointedModel, Option<CanonKey>, bool)>> {
            let Some(s) = transition(&frontier[n].state, &task.actions[a].action)? else {
                return Ok(None);
            };
            let key = dedup.then(|| canonical_key(&s));
            let goal = goal_holds(&s, &task.goal)?;
            Ok(Some((s, key, goal)))
        });
        let mut next = Vec::new();
        for (&(n, a), child) in pairs.iter().zip(children) {
            let Some((state, key, goal)) = child? else { continue };
            stats.generated += 1;
            if let Some(k) = key {
                if !seen.insert(k) {
                    stats.pruned += 1;
                    continue;
                }
            }
            let mut plan = frontier[n].plan.clone();
            plan.push(a);
            if goal {
                return Ok(SearchResult { plan: Some(plan), stats });
            }
            next.push(Node { state, plan });
        }
        frontier = next;
    }
    Ok(SearchResult { plan: None, stats })
}

fn iddfs(task: &PlanningTask, cfg: &SearchConfig) -> Result<SearchResult> {
    let mut stats = SearchStats::default();
    for limit in 0..=cfg.max_depth {
        let mut best: HashMap<CanonKey, usize> = HashMap::new();
        let mut plan = Vec::new();
        if dfs(task, cfg, &task.initial, limit, &mut plan, &mut best, &mut stats)? {
            return Ok(SearchResult { plan: Some(plan), stats });
        }
    }
    Ok(SearchResult { plan: None, stats })
}

fn dfs(
    task: &PlanningTask,
    cfg: &SearchConfig,
    s: &PointedModel,
    left: usize,
    plan: &mut Vec<usize>,
    best: &mut HashMap<CanonKey, usize>,
    stats: &mut SearchStats,
) -> Result<bool> {
    if cfg.dedup == Dedup::Isomorphism {
        let k = canonical_key(s);
        match best.get(&k) {
            Some(&d) if d >= left => {
                stats.pruned += 1;
                return Ok(false);
            }
            _ => {
                best.insert(k, left);
            }
        }
    }
    if left == 0 {
        return goal_holds(s, &task.goal);
    }
    if goal_holds(s, &task.goal)? {
        // A shorter plan was found by an earlier iteration; reaching here
        // means this branch is not minimal.
        return Ok(false);
    }
    stats.expanded += 1;
    for (i, a) in task.actions.iter().enumerate() {
        let Some(next) = transition(s, &a.action)? else { continue };
        stats.generated += 1;
        plan.push(i);
        if dfs(task, cfg, &next, left - 1, plan, best, stats)? {
            return Ok(true);
        }
        plan.pop();
    }
    Ok(false)
}

/// Every applicable sequence of at most `max_depth` actions reaching the goal,
/// shortest first. Exhaustive; meant for checking the search at small sizes.
pub fn all_plans(task: &PlanningTask, max_depth: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut layer = vec![(task.initial.clone(), Vec::<usize>::new())];
    for d in 0..=max_depth {
        let mut next = Vec::new();
        for (s, plan) in &layer {
            if goal_holds(s, &task.goal)? {
                out.push(plan.clone());
            }
            if d == max_depth {
                continue;
            }
            for (i, a) in task.actions.iter().enumerate() {
                if let Some(t) = transition(s, &a.action)? {
                    let mut p = plan.clone();
                    p.push(i);
                    next.push((t, p));
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Convenience for tests and the CLI: the schema name of the action behind
/// a ground model name such as `Reboot(a1,sn1)`.
pub fn schema_of(a: &ActionModel) -> &str {
    a.name.split('(').next().unwrap_or(&a.name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusConfig, Generator};
    use crate::dynamics::ActionSchema;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    /// Parameterless schemas over a random model and a random goal.
    fn random_task(seed: u64) -> PlanningTask {
        let mut g = Generator::new(seed, CorpusConfig::default());
        let m = g.model();
        let schemas = (0..2)
            .map(|k| {
                let mut body = g.action();
                body.name = format!("A{k}");
                ActionSchema {
                    params: vec![],
                    agent: false,
                    param_types: vec![],
                    designated: 0,
                    body,
                }
            })
            .collect();
        let goal = g.static_formula(2, &[]);
        PlanningTask::new(PointedModel::new(m, 0), schemas, goal, None).unwrap()
    }

    #[test]
    fn goal_must_be_a_static_sentence() {
        let t = random_task(1);
        let open = Formula::atom("q", vec![crate::syntax::Term::var("x", crate::syntax::Sort::Agt)]);
        assert!(PlanningTask::new(t.initial.clone(), vec![], open, None).is_err());
        let dynamic = Formula::dynamic(t.actions[0].action.action.clone(), "e0", Formula::Top);
        assert!(PlanningTask::new(t.initial.clone(), vec![], dynamic, None).is_err());
    }

    #[test]
    fn event_choice_and_filtering() {
        let t = random_task(2);
        let events: usize = t.actions.iter().map(|a| a.action.action.events.len()).sum();
        let names: Vec<String> = t.actions.iter().map(|a| a.schema.clone()).collect();
        assert_eq!(names, ["A0", "A1"]);
        let all = t.clone().with_all_events();
        assert_eq!(all.actions.len(), events);
        let fewer = all.without(|g| g.schema == "A1");
        assert!(fewer.actions.iter().all(|g| g.schema != "A1"));
        assert!(matches!(t.resolve(&PlanStep { action: "B".into(), args: vec![], event: None }), Err(Error::UnknownAction(_))));
        assert_eq!(schema_of(&t.actions[1].action.action), "A1");
    }

    #[test]
    fn inapplicable_transition_is_none() {
        let t = random_task(3);
        let mut a = ActionModel::skip();
        a.set_pre("e", Formula::Bottom).unwrap();
        let a = PointedAction::new(Arc::new(a), "e").unwrap();
        assert!(transition(&t.initial, &a).unwrap().is_none());
        let v = verify_actions(&t, &[a]).unwrap();
        assert_eq!((v.valid, v.failed_step, v.trace.len()), (false, Some(0), 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        /// Every search configuration finds a shortest plan, as listed by
        /// exhaustive enumeration, and the plan verifies both ways.
        #[test]
        fn search_is_shortest(seed in any::<u64>()) {
            let t = random_task(seed).with_all_events();
            let depth = 2;
            let shortest = all_plans(&t, depth).unwrap().first().map(Vec::len);
            for strategy in [Strategy::Bfs, Strategy::Iddfs] {
                for dedup in [Dedup::None, Dedup::Isomorphism] {
                    for exec in [Exec::Sequential, Exec::Parallel] {
                        let cfg = SearchConfig { max_depth: depth, strategy, dedup, exec };
                        let found = find_plan(&t, &cfg).unwrap().plan;
                        prop_assert_eq!(found.as_ref().map(Vec::len), shortest, "{:?}", cfg);
                        if let Some(p) = found {
                            let steps: Vec<PointedAction> = p.iter().map(|&i| t.actions[i].action.clone()).collect();
                            let v = verify_actions(&t, &steps).unwrap();
                            prop_assert!(v.valid && v.model_checked);
                        }
                    }
                }
            }
        }
    }
}
