//! Command-line front end. Reports are JSON unless `--text` is given.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::apps::{self, plan::GridScene, structure};
use crate::autodiff::learn::{self, LearnConfig, OptimizerKind};
use crate::engine::{Engine, Error};
use crate::ground::{GroundExtras, GroundingConfig, GroundingReport};
use crate::infer::{ReasonerConfig, DEFAULT_GAMMA, SHARP_GAMMA};
use crate::lang::{parse_program, parse_term, render_goal, Program, Term};
use crate::meta::{load_interpreter, Interpreter};

#[derive(Parser, Debug)]
#[command(name = "nemesys", version, about = "Differentiable meta-level reasoning over weighted logic programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Print a human-readable report instead of JSON.
    #[arg(long, global = true)]
    pub text: bool,
    /// Validate inputs and report the grounding size without reasoning.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here as well as to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Reasoning {
    /// Soft-or smoothing; drivers default to a near-hard value.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Forward steps; defaults to the grounding's derivation depth.
    #[arg(long = "t")]
    pub t: Option<usize>,
    /// Write the ground atom table as `index<TAB>atom` lines.
    #[arg(long)]
    pub dump_table: Option<PathBuf>,
    /// Include the k most changed atoms of every step.
    #[arg(long)]
    pub trace_top: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Answer a goal under a meta interpreter.
    Solve {
        #[arg(long)]
        program: PathBuf,
        /// Built-in interpreter name or a meta-program file.
        #[arg(long, default_value = "naive")]
        meta: String,
        #[arg(long)]
        goal: String,
        /// Depth budget for the depth-limited interpreter.
        #[arg(long, default_value_t = 3)]
        max_depth: u64,
        #[command(flatten)]
        reasoning: Reasoning,
        #[command(flatten)]
        common: Common,
    },
    /// Proof trees for a goal.
    Prove {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = apps::PROOF_THRESHOLD)]
        threshold: f64,
        /// Low-probability proofs to list below the threshold.
        #[arg(long, default_value_t = 3)]
        top_k: usize,
        #[command(flatten)]
        reasoning: Reasoning,
        #[command(flatten)]
        common: Common,
    },
    /// Relevance of object atoms to a ground goal.
    Explain {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        goal: String,
        /// Atoms to score; all derivable object atoms when omitted.
        #[arg(long = "atom")]
        atoms: Vec<String>,
        #[command(flatten)]
        reasoning: Reasoning,
        #[command(flatten)]
        common: Common,
    },
    /// Per-object action stacks between two scenes.
    Plan {
        #[arg(long)]
        start: PathBuf,
        #[arg(long)]
        goal: PathBuf,
        #[arg(long, default_value_t = 5)]
        width: u64,
        #[arg(long, default_value_t = 5)]
        height: u64,
        /// Per-axis move budget; defaults to the grid's longest straight move.
        #[arg(long)]
        max_moves: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Query probabilities before and after an intervention.
    Causal {
        #[arg(long)]
        network: PathBuf,
        /// Intervention as `site=value`.
        #[arg(long = "do")]
        intervention: Option<String>,
        #[arg(long = "query", required = true)]
        queries: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Recover an unobserved intervention from target probabilities.
    LearnParam {
        #[arg(long)]
        network: PathBuf,
        /// Target as `atom=probability`; repeatable.
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        /// Candidate do sites; every head of the network when omitted.
        #[arg(long = "candidate")]
        candidates: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Optim::Gd)]
        optimizer: Optim,
        /// Write every loss report as one JSON line.
        #[arg(long)]
        loss_log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Learn which meta rules solve each task in turn.
    LearnStructure {
        /// Object program; a built-in boolean graph program when omitted.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "causal,naive,prooftree")]
        tasks: Vec<String>,
        /// Rule slots.
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Iterations per task.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, value_enum, default_value_t = Optim::Adam)]
        optimizer: Optim,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long)]
        loss_log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score a scene against pattern rules.
    Classify {
        #[arg(long)]
        scene: PathBuf,
        /// Pattern rules; the two-pairs rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = "two_pairs")]
        head: String,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 5)]
        width: u64,
        #[arg(long, default_value_t = 5)]
        height: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Optim {
    Gd,
    Adam,
}

impl From<Optim> for OptimizerKind {
    fn from(o: Optim) -> Self {
        match o {
            Optim::Gd => OptimizerKind::Gd,
            Optim::Adam => OptimizerKind::Adam,
        }
    }
}

/// What a run printed and how it ended.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    grounding: Option<GroundingReport>,
    result: Value,
    timings_ms: Value,
}

/// Failure split into input problems (exit 1) and engine failures (exit 2).
enum Fail {
    Usage(String),
    Engine(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        match e {
            Error::Lang(_) | Error::Io { .. } | Error::Invalid(_) | Error::UnknownAtom(_) => Fail::Usage(e.to_string()),
            Error::Meta(ref m) => match m {
                crate::meta::MetaError::UnknownInterpreter(_)
                | crate::meta::MetaError::Io { .. }
                | crate::meta::MetaError::Parse(_)
                | crate::meta::MetaError::UnknownGoal(_) => Fail::Usage(e.to_string()),
                _ => Fail::Engine(e.to_string()),
            },
            _ => Fail::Engine(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Outcome { code, stdout: text, stderr: String::new() } } else { Outcome { code, stdout: String::new(), stderr: text } };
        }
    };
    let started = Instant::now();
    let (common, res) = dispatch(&cli.command);
    match res {
        Ok(mut report) => {
            report.timings_ms = json!({ "total": started.elapsed().as_secs_f64() * 1e3 });
            let body = if common.text { render_text(&report) } else { serde_json::to_string_pretty(&report).expect("report serializes") + "\n" };
            if let Some(p) = &common.out {
                if let Err(e) = std::fs::write(p, &body) {
                    return Outcome { code: 1, stdout: body, stderr: format!("error: cannot write {}: {e}\n", p.display()) };
                }
            }
            let code = if report.result.get("converged") == Some(&Value::Bool(false)) { 2 } else { 0 };
            let stderr = if code == 2 { "error: learning did not converge\n".to_string() } else { String::new() };
            Outcome { code, stdout: body, stderr }
        }
        Err(Fail::Usage(m)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {m}\n") },
        Err(Fail::Engine(m)) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {m}\n") },
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Fail> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn term(text: &str) -> Result<Term, Fail> {
    parse_term(text).map_err(|e| Fail::Usage(format!("cannot parse '{text}': {e}")))
}

fn check_gamma(g: Option<f64>) -> Result<(), Fail> {
    match g {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Fail::Usage(format!("--gamma must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn reasoner(engine: &Engine, r: &Reasoning) -> Result<ReasonerConfig, Fail> {
    check_gamma(r.gamma)?;
    if r.t == Some(0) {
        return Err(Fail::Usage("--t must be at least 1".into()));
    }
    Ok(ReasonerConfig {
        t: r.t.unwrap_or(engine.grounding.default_t),
        gamma: r.gamma.unwrap_or(SHARP_GAMMA),
        clamp: true,
        trace: false,
    })
}

fn report(command: &'static str, config: Value, grounding: Option<GroundingReport>, result: Value) -> RunReport {
    RunReport { command, config, grounding, result, timings_ms: Value::Null }
}

/// Shared tail of the engine-backed commands: dry run, table dump, trace.
fn reason(engine: &Engine, r: &Reasoning, common: &Common) -> Result<Option<(Vec<f64>, Value)>, Fail> {
    if let Some(p) = &r.dump_table {
        std::fs::write(p, engine.grounding.table.dump()).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    let cfg = reasoner(engine, r)?;
    if common.dry_run {
        return Ok(None);
    }
    let w = engine.identity_weights();
    let v = engine.reason(&w, &cfg).v;
    let trace = r.trace_top.map(|k| serde_json::to_value(engine.trace_changes(&w, &cfg, k)).expect("trace serializes")).unwrap_or(Value::Null);
    Ok(Some((v, json!({ "t": cfg.t, "gamma": cfg.gamma, "trace": trace }))))
}

fn dry(command: &'static str, config: Value, engine: &Engine) -> RunReport {
    report(command, config, Some(engine.grounding.report.clone()), json!({ "dry_run": true, "atoms": engine.grounding.table.len() }))
}

fn dispatch(cmd: &Command) -> (Common, Result<RunReport, Fail>) {
    match cmd {
        Command::Solve { program, meta, goal, max_depth, reasoning, common } => {
            (common.clone(), solve(program, meta, goal, *max_depth, reasoning, common))
        }
        Command::Prove { program, goal, threshold, top_k, reasoning, common } => {
            (common.clone(), prove(program, goal, *threshold, *top_k, reasoning, common))
        }
        Command::Explain { program, goal, atoms, reasoning, common } => (common.clone(), explain(program, goal, atoms, reasoning, common)),
        Command::Plan { start, goal, width, height, max_moves, common } => {
            (common.clone(), plan(start, goal, *width, *height, *max_moves, common))
        }
        Command::Causal { network, intervention, queries, common } => {
            (common.clone(), causal(network, intervention.as_deref(), queries, common))
        }
        Command::LearnParam { network, targets, candidates, lr, steps, optimizer, loss_log, common } => {
            let cfg = LearnConfig { steps: *steps, lr: *lr, seed: common.seed, optimizer: (*optimizer).into(), ..LearnConfig::default() };
            (common.clone(), learn_param(network, targets, candidates, &cfg, loss_log.as_deref(), common))
        }
        Command::LearnStructure { program, tasks, m, steps, lr, optimizer, gamma, loss_log, common } => {
            let cfg = LearnConfig { steps: *steps, lr: *lr, seed: common.seed, optimizer: (*optimizer).into(), gamma: *gamma, report_every: 1 };
            (common.clone(), learn_structure(program.as_deref(), tasks, *m, &cfg, loss_log.as_deref(), common))
        }
        Command::Classify { scene, rules, head, threshold, width, height, common } => {
            (common.clone(), classify(scene, rules.as_deref(), head, *threshold, *width, *height, common))
        }
    }
}

fn solve(program: &Path, meta: &str, goal: &str, max_depth: u64, r: &Reasoning, common: &Common) -> Result<RunReport, Fail> {
    let prog = load_program(program)?;
    let goal_t = term(goal)?;
    let mp = load_interpreter(meta).map_err(Error::from)?;
    let is_depth = mp.kind == Some(Interpreter::Depth);
    let gcfg = if is_depth { apps::query::depth_config(max_depth) } else { GroundingConfig::default() };
    let engine = Engine::new(mp, &prog, &gcfg, &GroundExtras::default())?;
    let config = json!({ "program": program.display().to_string(), "meta": meta, "goal": goal, "max_depth": max_depth });
    if common.dry_run {
        reasoner(&engine, r)?;
        return Ok(dry("solve", config, &engine));
    }
    let (v, run) = reason(&engine, r, common)?.expect("not a dry run");
    let answers = apps::answers(&engine, &v, &goal_t, is_depth.then_some(max_depth))?;
    Ok(report("solve", config, Some(engine.grounding.report.clone()), json!({ "answers": answers, "run": run })))
}

fn prove(program: &Path, goal: &str, threshold: f64, top_k: usize, r: &Reasoning, common: &Common) -> Result<RunReport, Fail> {
    let prog = load_program(program)?;
    let goal_t = term(goal)?;
    let engine = Engine::new(crate::meta::builtin_interpreter(Interpreter::ProofTree), &prog, &GroundingConfig::default(), &GroundExtras::default())?;
    let config = json!({ "program": program.display().to_string(), "goal": goal, "threshold": threshold, "top_k": top_k });
    if common.dry_run {
        reasoner(&engine, r)?;
        return Ok(dry("prove", config, &engine));
    }
    let (v, run) = reason(&engine, r, common)?.expect("not a dry run");
    let all = apps::extract_proofs(&engine, &v, &goal_t);
    let (high, low): (Vec<_>, Vec<_>) = all.into_iter().partition(|p| p.valuation >= threshold);
    let low: Vec<_> = low.into_iter().take(top_k).collect();
    let text: Vec<String> = high.iter().chain(&low).map(|p| p.render_text()).collect();
    Ok(report(
        "prove",
        config,
        Some(engine.grounding.report.clone()),
        json!({ "proofs": high, "low_probability": low, "rendered": text, "run": run }),
    ))
}

fn explain(program: &Path, goal: &str, atoms: &[String], r: &Reasoning, common: &Common) -> Result<RunReport, Fail> {
    let prog = load_program(program)?;
    let goal_t = term(goal)?;
    if !goal_t.is_ground() {
        return Err(Fail::Usage(format!("explain needs a ground goal, got '{goal}'")));
    }
    let atoms_t = atoms.iter().map(|a| term(a)).collect::<Result<Vec<_>, _>>()?;
    let (engine, seed) = apps::relevance_engine(&prog, &goal_t, &GroundingConfig::default())?;
    let config = json!({ "program": program.display().to_string(), "goal": goal, "atoms": atoms });
    if common.dry_run {
        reasoner(&engine, r)?;
        return Ok(dry("explain", config, &engine));
    }
    let (v, run) = reason(&engine, r, common)?.expect("not a dry run");
    let rep = apps::relevance(&engine, &v, &goal_t, seed.as_ref(), &atoms_t)?;
    Ok(report("explain", config, Some(engine.grounding.report.clone()), json!({ "relevance": rep, "run": run })))
}

fn plan(start: &Path, goal: &Path, width: u64, height: u64, max_moves: Option<usize>, common: &Common) -> Result<RunReport, Fail> {
    let s = GridScene::from_json(&read(start)?, width, height)?;
    let g = GridScene::from_json(&read(goal)?, width, height)?;
    let max_moves = max_moves.unwrap_or_else(|| apps::plan::default_max_moves(width, height));
    let config = json!({ "start": start.display().to_string(), "goal": goal.display().to_string(), "width": width, "height": height, "max_moves": max_moves });
    if common.dry_run {
        let engine = apps::plan::plan_engine(&s, &g, max_moves)?;
        return Ok(dry("plan", config, &engine));
    }
    let result = apps::plan(&s, &g, max_moves)?;
    let (reached, ok) = apps::validate_plan(&s, &result)?;
    Ok(report("plan", config, None, json!({ "plan": result, "validated": ok, "reached": reached })))
}

fn causal(network: &Path, intervention: Option<&str>, queries: &[String], common: &Common) -> Result<RunReport, Fail> {
    let prog = load_program(network)?;
    let iv = intervention.map(apps::parse_intervention).transpose()?;
    let qs = queries.iter().map(|q| term(q)).collect::<Result<Vec<_>, _>>()?;
    let config = json!({ "network": network.display().to_string(), "do": intervention, "queries": queries });
    if common.dry_run {
        let extras = GroundExtras { do_sites: iv.iter().cloned().collect(), ..Default::default() };
        let engine = Engine::new(crate::meta::builtin_interpreter(Interpreter::Causal), &prog, &GroundingConfig::default(), &extras)?;
        return Ok(dry("causal", config, &engine));
    }
    let results = apps::run_causal(&prog, iv, &qs)?;
    Ok(report("causal", config, None, json!({ "queries": results })))
}

fn parse_target(text: &str) -> Result<(Term, f64), Fail> {
    let (a, p) = text.split_once('=').ok_or_else(|| Fail::Usage(format!("target '{text}' must look like atom=probability")))?;
    let x: f64 = p.trim().parse().map_err(|_| Fail::Usage(format!("target probability '{}' is not a number", p.trim())))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Fail::Usage(format!("target probability {x} is outside [0,1]")));
    }
    Ok((term(a.trim())?, x))
}

fn write_log(path: Option<&Path>, curve: &[learn::LossReport]) -> Result<(), Fail> {
    if let Some(p) = path {
        let mut s = String::new();
        for r in curve {
            s.push_str(&serde_json::to_string(r).expect("loss report serializes"));
            s.push('\n');
        }
        std::fs::write(p, s).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn check_lr(lr: f64) -> Result<(), Fail> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Fail::Usage(format!("--lr must be positive, got {lr}")));
    }
    Ok(())
}

fn learn_param(network: &Path, targets: &[String], candidates: &[String], cfg: &LearnConfig, log: Option<&Path>, common: &Common) -> Result<RunReport, Fail> {
    check_lr(cfg.lr)?;
    let prog = load_program(network)?;
    let ts = targets.iter().map(|t| parse_target(t)).collect::<Result<Vec<_>, _>>()?;
    let cands: Vec<Term> = if candidates.is_empty() {
        let mut heads: Vec<Term> = prog.clauses.iter().map(|c| c.head.clone()).filter(|h| h.is_ground()).collect();
        heads.dedup();
        heads
    } else {
        candidates.iter().map(|c| term(c)).collect::<Result<_, _>>()?
    };
    let config = json!({
        "network": network.display().to_string(), "targets": targets,
        "candidates": cands.iter().map(render_goal).collect::<Vec<_>>(), "learn": cfg,
    });
    if common.dry_run {
        let extras = GroundExtras { do_sites: cands.iter().map(|c| (c.clone(), 0.5)).collect(), ..Default::default() };
        let engine = Engine::new(crate::meta::builtin_interpreter(Interpreter::Causal), &prog, &GroundingConfig::default(), &extras)?;
        return Ok(dry("learn-param", config, &engine));
    }
    let res = learn::learn_do(&prog, &ts, &cands, cfg)?;
    let curve: Vec<_> = res.runs.iter().flat_map(|r| r.curve.iter().cloned()).collect();
    write_log(log, &curve)?;
    let runs: Vec<Value> = res
        .runs
        .iter()
        .map(|r| json!({ "site": r.site, "initial": r.initial, "value": r.value, "final_loss": r.final_loss }))
        .collect();
    Ok(report(
        "learn-param",
        config,
        None,
        json!({ "winner": res.winner, "value": res.value, "converged": res.converged, "excess_loss": res.excess_loss, "runs": runs }),
    ))
}

fn learn_structure(program: Option<&Path>, tasks: &[String], m: usize, cfg: &LearnConfig, log: Option<&Path>, common: &Common) -> Result<RunReport, Fail> {
    check_lr(cfg.lr)?;
    check_gamma(Some(cfg.gamma))?;
    let prog = match program {
        Some(p) => load_program(p)?,
        None => parse_program(structure::TASK_PROGRAM).expect("built-in program parses"),
    };
    let engine = structure::structure_engine(&prog)?;
    let names: Vec<&str> = tasks.iter().map(String::as_str).collect();
    let task_set = structure::make_tasks(&engine, &names, cfg.seed, 0.3)?;
    let config = json!({ "program": program.map(|p| p.display().to_string()), "tasks": tasks, "m": m, "learn": cfg });
    if common.dry_run {
        return Ok(dry("learn-structure", config, &engine));
    }
    let res = learn::learn_structure(&engine, &task_set, m, cfg)?;
    write_log(log, &res.curve)?;
    let rules: Vec<String> = engine.grounding.rules.iter().map(crate::lang::render_clause).collect();
    Ok(report(
        "learn-structure",
        config,
        Some(engine.grounding.report.clone()),
        json!({ "rules": rules, "phases": res.phases, "final_logits": res.final_weights.logits }),
    ))
}

fn classify(scene: &Path, rules: Option<&Path>, head: &str, threshold: f64, width: u64, height: u64, common: &Common) -> Result<RunReport, Fail> {
    let s = GridScene::from_json(&read(scene)?, width, height)?;
    let rules_p = match rules {
        Some(p) => load_program(p)?,
        None => apps::two_pairs_rules(),
    };
    let head_t = term(head)?;
    let config = json!({ "scene": scene.display().to_string(), "rules": rules.map(|p| p.display().to_string()), "head": head, "threshold": threshold });
    if common.dry_run {
        let mut prog = rules_p.clone();
        prog.clauses.extend(apps::classify::scene_facts(&s));
        let engine = Engine::new(crate::meta::builtin_interpreter(Interpreter::Naive), &prog, &GroundingConfig::default(), &GroundExtras::default())?;
        return Ok(dry("classify", config, &engine));
    }
    let c = apps::classify_scene(&s, &rules_p, &head_t, threshold)?;
    Ok(report("classify", config, None, json!({ "score": c.score, "label": c.label })))
}

fn render_text(r: &RunReport) -> String {
    let mut s = String::new();
    let res = &r.result;
    let _ = writeln!(s, "{}", r.command);
    if let Some(g) = &r.grounding {
        let _ = writeln!(s, "grounding: {} atoms, {} rounds, T={}", g.atoms, g.rounds, g.default_t);
    }
    if res.get("dry_run").is_some() {
        let _ = writeln!(s, "dry run: {} ground atoms", res["atoms"]);
        return s;
    }
    match r.command {
        "solve" => {
            for a in res["answers"].as_array().into_iter().flatten() {
                let _ = writeln!(s, "{:.4}  {}", a["valuation"].as_f64().unwrap_or(0.0), a["atom"].as_str().unwrap_or(""));
            }
        }
        "prove" => {
            for t in res["rendered"].as_array().into_iter().flatten() {
                let _ = write!(s, "{}", t.as_str().unwrap_or(""));
            }
        }
        "explain" => {
            for a in res["relevance"]["scores"].as_array().into_iter().flatten() {
                let _ = writeln!(s, "{:.4}  {}", a["score"].as_f64().unwrap_or(0.0), a["atom"].as_str().unwrap_or(""));
            }
        }
        "plan" => {
            for p in res["plan"]["plans"].as_array().into_iter().flatten() {
                let acts: Vec<&str> = p["actions"].as_array().into_iter().flatten().filter_map(|a| a.as_str()).collect();
                let _ = writeln!(s, "{}: {}", p["id"].as_str().unwrap_or(""), acts.join(" "));
            }
            let _ = writeln!(s, "validated: {}", res["validated"]);
        }
        "causal" => {
            for q in res["queries"].as_array().into_iter().flatten() {
                let _ = write!(s, "P({}) = {:.4}", q["query"].as_str().unwrap_or(""), q["pre"].as_f64().unwrap_or(0.0));
                if let Some(p) = q["post"].as_f64() {
                    let _ = write!(s, "  after do({})={}: {:.4}", q["site"].as_str().unwrap_or(""), q["value"], p);
                }
                s.push('\n');
            }
        }
        "learn-param" => {
            for run in res["runs"].as_array().into_iter().flatten() {
                let _ = writeln!(s, "do({}) = {:.4}  loss {:.4}", run["site"].as_str().unwrap_or(""), run["value"].as_f64().unwrap_or(0.0), run["final_loss"].as_f64().unwrap_or(0.0));
            }
            let _ = writeln!(s, "winner: do({}) = {:.4}", res["winner"].as_str().unwrap_or(""), res["value"].as_f64().unwrap_or(0.0));
        }
        "learn-structure" => {
            let rules = res["rules"].as_array().cloned().unwrap_or_default();
            for ph in res["phases"].as_array().into_iter().flatten() {
                let _ = writeln!(s, "task {}: test accuracy {:.2}", ph["task"].as_str().unwrap_or(""), ph["test_accuracy"].as_f64().unwrap_or(0.0));
                for sel in ph["selection"].as_array().into_iter().flatten() {
                    let i = sel["rule"].as_u64().unwrap_or(0) as usize;
                    let _ = writeln!(s, "  slot {}: {:.3}  {}", sel["slot"], sel["weight"].as_f64().unwrap_or(0.0), rules.get(i).and_then(|x| x.as_str()).unwrap_or("?"));
                }
            }
        }
        "classify" => {
            let _ = writeln!(s, "score {:.4}  label {}", res["score"].as_f64().unwrap_or(0.0), res["label"]);
        }
        _ => {}
    }
    s
}
