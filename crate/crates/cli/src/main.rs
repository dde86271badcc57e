use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use termplan::corpus::{self, CorpusConfig, Generator};
use termplan::dsl::{
    formula_text, parse_domain, parse_formula, parse_plan, parse_problem, parse_step, plan_json,
    problem_json, serialize_plan, serialize_problem, DomainFile, ProblemFile,
};
use termplan::dynamics::validate_action;
use termplan::frames::{check_characterization, EnumerationSpec, FrameKind};
use termplan::par::Exec;
use termplan::planning::{find_plan, transition, verify_plan, Dedup, PlanningTask, SearchConfig, Strategy};
use termplan::reduction::{check_equivalence_with, translate_with, KnowledgeRule, ReduceConfig};
use termplan::dynamics::PostRule;
use termplan::semantics::{satisfies, validate_model, Valuation};
use termplan::syntax::{well_formed, Formula, Report};
use termplan::Error;

#[derive(Parser)]
#[command(name = "termplan", version, about = "Term-modal epistemic planning")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Files {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a domain, and a problem against it.
    Validate {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// Evaluate a sentence at a world of the initial state.
    Check {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        formula: String,
        /// World name; the actual world by default.
        #[arg(long)]
        at: Option<String>,
    },
    /// Apply one action and print the resulting problem.
    Update {
        #[command(flatten)]
        files: Files,
        /// `Name(c1,...,cn)` or `Name(c1,...,cn)@event`.
        #[arg(long)]
        action: String,
    },
    /// Search for a plan reaching the goal.
    Plan {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        max_depth: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Bfs)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = DedupArg::None)]
        dedup: DedupArg,
        /// Let every event be chosen, not only designated ones.
        #[arg(long)]
        all_events: bool,
        /// Drop ground actions whose `Name(args)@event` starts with this.
        #[arg(long)]
        exclude: Vec<String>,
    },
    /// Check a plan file against the problem.
    Verify {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Rewrite dynamic modalities away.
    Translate {
        #[arg(long, requires = "problem")]
        domain: Option<PathBuf>,
        #[arg(long, requires = "domain")]
        problem: Option<PathBuf>,
        #[arg(long, required_unless_present = "corpus", requires = "domain")]
        formula: Option<String>,
        /// Instead of one formula, translate this many random instances and
        /// compare each against its source formula.
        #[arg(long, conflicts_with = "formula")]
        corpus: Option<usize>,
        /// Corpus seed; TERMPLAN_SEED, then 0, if absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = KnowledgeArg::Guarded)]
        knowledge: KnowledgeArg,
        #[arg(long, value_enum, default_value_t = PostArg::Alias)]
        post: PostArg,
    },
    /// Check a frame correspondence on all small frames.
    Frames {
        /// T, D, 4, 5, N(n) or M(m).
        #[arg(long)]
        check: String,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        worlds: usize,
        #[arg(long, default_value_t = 1)]
        objects: usize,
        /// Interpretations tried per frame.
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bfs,
    Iddfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum DedupArg {
    None,
    Iso,
}

#[derive(Clone, Copy, ValueEnum)]
enum KnowledgeArg {
    Guarded,
    Printed,
}

#[derive(Clone, Copy, ValueEnum)]
enum PostArg {
    Alias,
    Printed,
}

enum Fail {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Usage(_) => 2,
            Fail::Engine(Error::Internal(_)) | Fail::Engine(Error::RewriteBudgetExhausted(_)) => 3,
            Fail::Engine(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Fail::Usage(m) => m.clone(),
            Fail::Engine(e) => e.to_string(),
        }
    }
}

/// Text and JSON renderings of a result, and whether the answer was positive.
struct Out {
    text: String,
    json: Value,
    positive: bool,
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_domain(path: &Path) -> Result<DomainFile, Fail> {
    parse_domain(&read(path)?).map_err(|e| Fail::Usage(format!("{}:{e}", path.display())))
}

fn load(files: &Files) -> Result<(DomainFile, ProblemFile), Fail> {
    let d = load_domain(&files.domain)?;
    let p = parse_problem(&read(&files.problem)?, &d)
        .map_err(|e| Fail::Usage(format!("{}:{e}", files.problem.display())))?;
    Ok((d, p))
}

fn report_lines(label: &str, r: &Report, out: &mut Vec<String>) {
    for v in &r.violations {
        if v.path.is_empty() {
            out.push(format!("{label}: {}", v.message));
        } else {
            out.push(format!("{label} at {}: {}", v.path, v.message));
        }
    }
}

fn sentence(text: &str, d: &DomainFile, p: &ProblemFile) -> Result<Formula, Fail> {
    let f = parse_formula(text, p.ctx(d))?;
    let r = well_formed(&f, &p.sig);
    if !r.ok() {
        return Err(Fail::Usage(format!("ill-formed formula: {r}")));
    }
    if !f.is_sentence() {
        return Err(Fail::Usage("formula has free variables".into()));
    }
    Ok(f)
}

fn validate(domain: &Path, problem: Option<&Path>) -> Result<Out, Fail> {
    let d = load_domain(domain)?;
    let mut lines = Vec::new();
    let p = match problem {
        Some(path) => Some(parse_problem(&read(path)?, &d).map_err(|e| Fail::Usage(format!("{}:{e}", path.display())))?),
        None => None,
    };
    let sig = match &p {
        Some(p) => (*p.sig).clone(),
        None => d.signature()?,
    };
    for s in &d.schemas {
        report_lines(&format!("schema {}", s.name()), &s.validate(&sig), &mut lines);
    }
    let mut grounded = 0;
    if let Some(p) = &p {
        let goals: Vec<Formula> = p.goal.iter().cloned().collect();
        report_lines("initial state", &validate_model(&p.state.model, &p.sig, &goals), &mut lines);
        if let Some(g) = &p.goal {
            report_lines("goal", &well_formed(g, &p.sig), &mut lines);
        }
        if lines.is_empty() {
            for s in &d.schemas {
                for g in s.ground_all(&p.sig, Some(&p.types))? {
                    grounded += 1;
                    report_lines(&g.model.name, &validate_action(&g.model, &p.sig), &mut lines);
                }
            }
        }
    }
    let ok = lines.is_empty();
    let mut text = lines.join("\n");
    if ok {
        text = match &p {
            Some(p) => format!("ok: domain {}, problem {}, {grounded} ground actions", d.name, p.name),
            None => format!("ok: domain {}, {} schemas", d.name, d.schemas.len()),
        };
    }
    Ok(Out {
        json: json!({
            "domain": d.name,
            "problem": p.as_ref().map(|p| p.name.clone()),
            "ok": ok,
            "violations": lines,
            "ground_actions": grounded,
        }),
        text,
        positive: ok,
    })
}

fn check(files: &Files, formula: &str, at: Option<&str>) -> Result<Out, Fail> {
    let (d, p) = load(files)?;
    let f = sentence(formula, &d, &p)?;
    let m = &p.state.model;
    let w = match at {
        Some(name) => m.world(name)?,
        None => p.state.point,
    };
    let v = satisfies(m, w, &Valuation::new(), &f)?;
    Ok(Out {
        text: v.to_string(),
        json: json!({ "world": m.worlds[w].name, "formula": formula_text(&f), "value": v }),
        positive: v,
    })
}

fn update(files: &Files, action: &str) -> Result<Out, Fail> {
    let (d, p) = load(files)?;
    let step = parse_step(action)?;
    let task = PlanningTask::new(p.state.clone(), d.schemas.clone(), Formula::Top, Some(p.types.clone()))?;
    let a = task.resolve(&step)?;
    match transition(&p.state, &a)? {
        Some(next) => {
            let q = p.with_state(next);
            Ok(Out {
                text: serialize_problem(&q).trim_end().to_string(),
                json: serde_json::to_value(problem_json(&q)).map_err(|e| Error::Internal(e.to_string()))?,
                positive: true,
            })
        }
        None => Ok(Out {
            text: format!("{} is not applicable at {}", a.action.name, p.state.point_name()),
            json: json!({ "applicable": false, "action": a.action.name, "event": a.event_name() }),
            positive: false,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn plan(
    files: &Files,
    max_depth: usize,
    strategy: StrategyArg,
    dedup: DedupArg,
    all_events: bool,
    exclude: &[String],
    exec: Exec,
) -> Result<Out, Fail> {
    let (d, p) = load(files)?;
    let mut task = PlanningTask::from_files(&d, &p)?;
    if all_events {
        task = task.with_all_events();
    }
    if !exclude.is_empty() {
        task = task.without(|g| exclude.iter().any(|x| g.to_string().starts_with(x.as_str())));
    }
    let cfg = SearchConfig {
        max_depth,
        strategy: match strategy {
            StrategyArg::Bfs => Strategy::Bfs,
            StrategyArg::Iddfs => Strategy::Iddfs,
        },
        dedup: match dedup {
            DedupArg::None => Dedup::None,
            DedupArg::Iso => Dedup::Isomorphism,
        },
        exec,
    };
    let r = find_plan(&task, &cfg)?;
    let stats = serde_json::to_value(&r.stats).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(match r.steps(&task) {
        Some(steps) => Out {
            text: serialize_plan(&steps).trim_end().to_string(),
            json: json!({ "found": true, "length": steps.len(), "plan": plan_json(&steps), "stats": stats }),
            positive: true,
        },
        None => Out {
            text: format!("no plan within bound {max_depth}"),
            json: json!({ "found": false, "max_depth": max_depth, "stats": stats }),
            positive: false,
        },
    })
}

fn verify(files: &Files, plan_path: &Path) -> Result<Out, Fail> {
    let (d, p) = load(files)?;
    let task = PlanningTask::from_files(&d, &p)?;
    let steps = parse_plan(&read(plan_path)?).map_err(|e| Fail::Usage(format!("{}:{e}", plan_path.display())))?;
    let v = verify_plan(&task, &steps)?;
    let text = match v.failed_step {
        Some(k) => format!("invalid: step {} ({}) is not applicable", k + 1, steps[k]),
        None if v.valid => format!("valid: {} steps", steps.len()),
        None => format!("invalid: goal not reached after {} steps", steps.len()),
    };
    Ok(Out {
        text,
        json: json!({
            "valid": v.valid,
            "steps": steps.len(),
            "failed_step": v.failed_step.map(|k| k + 1),
            "goal_reached": v.goal_reached,
            "model_checked": v.model_checked,
            "worlds": v.trace.iter().map(|s| s.model.num_worlds()).collect::<Vec<_>>(),
        }),
        positive: v.valid,
    })
}

fn reduce_config(knowledge: KnowledgeArg, post: PostArg) -> ReduceConfig {
    ReduceConfig {
        knowledge: match knowledge {
            KnowledgeArg::Guarded => KnowledgeRule::Guarded,
            KnowledgeArg::Printed => KnowledgeRule::Printed,
        },
        post: match post {
            PostArg::Alias => PostRule::AliasAware,
            PostArg::Printed => PostRule::Printed,
        },
        ..ReduceConfig::default()
    }
}

fn translate_one(files: &Files, formula: &str, cfg: &ReduceConfig, trace: bool, exec: Exec) -> Result<Out, Fail> {
    let (d, p) = load(files)?;
    let f = parse_formula(formula, p.ctx(&d))?;
    let r = well_formed(&f, &p.sig);
    if !r.ok() {
        return Err(Fail::Usage(format!("ill-formed formula: {r}")));
    }
    let (g, t) = translate_with(&f, cfg)?;
    let eq = check_equivalence_with(&f, &g, std::slice::from_ref(&p.state.model), exec)?;
    let out = formula_text(&g);
    let mut text = out.clone();
    text.push_str(&format!(
        "\n; {} rewrite step(s); agrees with the input on {}/{} checks of the initial state",
        t.steps.len(),
        eq.checked - eq.disagreements,
        eq.checked
    ));
    let trace_json = serde_json::to_value(&t).map_err(|e| Error::Internal(e.to_string()))?;
    if trace {
        text.push('\n');
        text.push_str(&serde_json::to_string_pretty(&trace_json).map_err(|e| Error::Internal(e.to_string()))?);
    }
    let mut j = json!({
        "formula": out,
        "steps": t.steps.len(),
        "checked": eq.checked,
        "disagreements": eq.disagreements,
    });
    if trace {
        j["trace"] = trace_json;
    }
    Ok(Out { text, json: j, positive: eq.agree() })
}

fn translate_corpus(n: usize, seed: u64, cfg: &ReduceConfig, exec: Exec) -> Result<Out, Fail> {
    let mut g = Generator::new(seed, CorpusConfig::default());
    let instances: Vec<_> = (0..n).map(|_| g.instance()).collect();
    let results = exec.map(&instances, |(m, f)| -> termplan::Result<_> {
        let (h, t) = translate_with(f, cfg)?;
        let eq = check_equivalence_with(f, &h, std::slice::from_ref(m), Exec::Sequential)?;
        Ok((eq, t))
    });
    let mut disagreeing = Vec::new();
    let mut steps = 0;
    let mut non_decreasing: BTreeMap<String, usize> = BTreeMap::new();
    for (i, r) in results.into_iter().enumerate() {
        let (eq, t) = r?;
        steps += t.steps.len();
        for (a, k) in t.non_decreasing() {
            *non_decreasing.entry(a.to_string()).or_insert(0) += k;
        }
        if !eq.agree() {
            disagreeing.push(i);
        }
    }
    let mut text = format!(
        "seed {seed}: {n} instances, {steps} rewrite steps, {} disagreeing",
        disagreeing.len()
    );
    if let Some(i) = disagreeing.first() {
        text.push_str(&format!("\nfirst disagreeing instance: {i}: {}", formula_text(&instances[*i].1)));
    }
    for (a, k) in &non_decreasing {
        text.push_str(&format!("\nnon-decreasing {a}: {k}"));
    }
    Ok(Out {
        text,
        json: json!({
            "seed": seed,
            "instances": n,
            "steps": steps,
            "disagreeing": disagreeing,
            "non_decreasing": non_decreasing,
        }),
        positive: disagreeing.is_empty(),
    })
}

fn frames(kind: &str, agents: usize, worlds: usize, objects: usize, budget: Option<u64>, exec: Exec) -> Result<Out, Fail> {
    let kind: FrameKind = kind.parse().map_err(|e: Error| Fail::Usage(e.to_string()))?;
    let mut spec = EnumerationSpec::new(agents, worlds);
    spec.max_objects = objects;
    spec.exec = exec;
    if let Some(b) = budget {
        spec.interpretation_budget = b;
    }
    if agents == 0 || worlds == 0 || objects == 0 {
        return Err(Fail::Usage("agents, worlds and objects must be positive".into()));
    }
    let r = check_characterization(kind, None, &spec)?;
    let verdict = if r.confirmed() { "confirmed" } else { "refuted" };
    let mut text = format!(
        "{kind}: {verdict} on {} frames; valid on {}/{} with the property, falsified on {}/{} without, {} inconclusive",
        r.frames, r.valid_with_property, r.with_property, r.falsified_without_property, r.without_property, r.inconclusive
    );
    if let Some(m) = r.mismatches.first() {
        text.push_str(&format!(
            "\nfirst mismatch: {} agents, {} objects, {} worlds, access {:?}, expected {}",
            m.agents,
            m.objects,
            m.worlds,
            m.access,
            if m.expected_valid { "valid" } else { "invalid" }
        ));
    }
    Ok(Out {
        text,
        json: serde_json::to_value(&r).map_err(|e| Error::Internal(e.to_string()))?,
        positive: r.confirmed(),
    })
}

fn run(cli: &Cli) -> Result<Out, Fail> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match &cli.cmd {
        Cmd::Validate { domain, problem } => validate(domain, problem.as_deref()),
        Cmd::Check { files, formula, at } => check(files, formula, at.as_deref()),
        Cmd::Update { files, action } => update(files, action),
        Cmd::Plan {
            files,
            max_depth,
            strategy,
            dedup,
            all_events,
            exclude,
        } => plan(files, *max_depth, *strategy, *dedup, *all_events, exclude, exec),
        Cmd::Verify { files, plan } => verify(files, plan),
        Cmd::Translate {
            domain,
            problem,
            formula,
            corpus,
            seed,
            trace,
            knowledge,
            post,
        } => {
            let cfg = reduce_config(*knowledge, *post);
            match (corpus, formula, domain, problem) {
                (Some(n), _, _, _) => translate_corpus(*n, seed.unwrap_or_else(|| corpus::seed_from_env(0)), &cfg, exec),
                (None, Some(f), Some(d), Some(p)) => {
                    let files = Files {
                        domain: d.clone(),
                        problem: p.clone(),
                    };
                    translate_one(&files, f, &cfg, *trace, exec)
                }
                _ => Err(Fail::Usage("translate needs --domain, --problem and --formula, or --corpus".into())),
            }
        }
        Cmd::Frames {
            check,
            agents,
            worlds,
            objects,
            budget,
        } => frames(check, *agents, *worlds, *objects, *budget, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // a closed pipe is not an error worth reporting
            let _ = if cli.json {
                writeln!(io::stdout(), "{}", out.json)
            } else if !out.text.is_empty() {
                writeln!(io::stdout(), "{}", out.text)
            } else {
                Ok(())
            };
            ExitCode::from(if out.positive { 0 } else { 1 })
        }
        Err(f) => {
            if cli.json {
                let _ = writeln!(io::stdout(), "{}", json!({ "error": f.message(), "code": f.code() }));
            }
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
