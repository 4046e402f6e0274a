//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nemesys::apps::{self, plan::line_fixture, plan::random_scene_pair, structure};
use nemesys::autodiff::learn::{learn_do, learn_structure, LearnConfig, OptimizerKind};
use nemesys::autodiff::{check_gradients, logit, Model, ParamSet};
use nemesys::ground::{GroundExtras, GroundingConfig, IndexTensor};
use nemesys::infer::{ReasonerConfig, RuleWeights, DEFAULT_GAMMA};
use nemesys::lang::{parse_program, parse_term, Term};
use nemesys::meta::{builtin_interpreter, Interpreter};
use nemesys::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, herbrand_base, random_boolean_program, symbolic_closure};

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

type Check = fn() -> Result<String, String>;

fn boolean_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut derived, mut by_rules) = (0, 0);
    for case in 0..100 {
        let p = random_boolean_program(&mut rng);
        let want = symbolic_closure(&p);
        derived += want.len();
        by_rules += want.iter().filter(|a| !p.clauses.iter().any(|c| c.body.is_empty() && &c.head == *a)).count();
        let engine = Engine::new(builtin_interpreter(Interpreter::Naive), &p, &GroundingConfig::default(), &GroundExtras::default())
            .map_err(|e| format!("case {case}: {e}"))?;
        let c = engine.grounding.c();
        let cfg = ReasonerConfig { t: engine.grounding.default_t, gamma: DEFAULT_GAMMA, clamp: true, trace: false };
        let v = engine.reason(&RuleWeights::one_hot(c, &(0..c).collect::<Vec<_>>()), &cfg).v;
        for a in herbrand_base() {
            let got = engine.get(&v, &Term::compound("solve", vec![a.clone()])).round() == 1.0;
            if got != want.contains(&a) {
                return Err(format!("case {case}: {a:?} engine={got} oracle={}", !got));
            }
        }
    }
    Ok(format!("100/100 programs agree ({derived} derived atoms, {by_rules} through rules)"))
}

fn loop_avoidance() -> Result<String, String> {
    let p = fixture("path.pl");
    let mut out = Vec::new();
    for q in ["path(a,a,[])", "path(b,b,[])", "path(c,c,[])", "path(a,c,[edge(a,b),edge(b,c)])"] {
        let x = apps::solve_depth_limited(&p, &t(q), 3).map_err(|e| e.to_string())?;
        if x < 0.9 {
            return Err(format!("{q} = {x:.4}"));
        }
        out.push(format!("{x:.3}"));
    }
    Ok(format!("valuations {}", out.join(" ")))
}

fn causal_forward() -> Result<String, String> {
    let r = apps::run_causal(&fixture("night.pl"), Some((t("light"), 1.0)), &[t("light"), t("sleep")]).map_err(|e| e.to_string())?;
    let (l, s) = (&r[0], &r[1]);
    let near = |x: f64, y: f64| (x - y).abs() <= 0.01;
    let (lp, sp) = (l.post.unwrap(), s.post.unwrap());
    let msg = format!("light {:.3}->{lp:.3}, sleep {:.3}->{sp:.3}", l.pre, s.pre);
    if near(l.pre, 0.40) && near(s.pre, 0.45) && near(lp, 1.0) && near(sp, 0.45) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn do_recovery() -> Result<String, String> {
    let net = fixture("medicine.pl");
    let cands = [t("medicine_a"), t("medicine_b"), t("patient")];
    let three = [(t("medicine_a"), 0.8), (t("medicine_b"), 1.0), (t("patient"), 0.72)];
    let mut wins = 0;
    for seed in 0..5 {
        let cfg = LearnConfig { seed, ..LearnConfig::default() };
        let r = learn_do(&net, &three, &cands, &cfg).map_err(|e| e.to_string())?;
        let a = &r.runs[0];
        let strictly = r.runs[1..].iter().all(|o| a.final_loss < o.final_loss);
        if strictly && (a.value - 0.8).abs() <= 0.05 {
            wins += 1;
        }
    }
    let r = learn_do(&net, &[(t("patient"), 0.72)], &cands, &LearnConfig::default()).map_err(|e| e.to_string())?;
    let losses: Vec<f64> = r.runs.iter().map(|x| x.final_loss).collect();
    let spread = losses.iter().cloned().fold(f64::MIN, f64::max) - losses.iter().cloned().fold(f64::MAX, f64::min);
    let msg = format!("three targets: {wins}/5 seeds; one target loss spread {spread:.2e}");
    if wins >= 4 && spread < 0.01 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn structure_learning() -> Result<String, String> {
    let engine = structure::structure_engine(&parse_program(structure::TASK_PROGRAM).unwrap()).map_err(|e| e.to_string())?;
    if engine.grounding.c() != 7 {
        return Err(format!("pool has {} rules", engine.grounding.c()));
    }
    let tasks = structure::make_tasks(&engine, &["causal", "naive", "prooftree"], 0, 0.3).map_err(|e| e.to_string())?;
    let cfg = LearnConfig { steps: 200, lr: 0.1, seed: 0, optimizer: OptimizerKind::Adam, gamma: DEFAULT_GAMMA, report_every: 1 };
    let r = learn_structure(&engine, &tasks, 3, &cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for ph in &r.phases {
        let low = ph.true_rule_weights.iter().map(|p| p.1).fold(1.0, f64::min);
        parts.push(format!("{} acc {:.2} min true weight {low:.3}", ph.task, ph.test_accuracy));
        if ph.test_accuracy < 1.0 || low < 0.9 {
            return Err(parts.join("; "));
        }
    }
    Ok(format!("{} iterations; {}", cfg.steps * r.phases.len(), parts.join("; ")))
}

/// Random tensors, initial valuation, trainable entries and targets.
fn random_grad_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<IndexTensor>, ReasonerConfig, ParamSet, Vec<(usize, f64)>) {
    let g = rng.gen_range(5..=10);
    let mut v0: Vec<f64> = (0..g).map(|_| rng.gen_range(0.05..0.95)).collect();
    v0[0] = 1.0;
    v0[1] = 0.0;
    let c = rng.gen_range(1..=3);
    let rules = (0..c)
        .map(|rule| {
            let (s, l) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            let mut gs = Vec::new();
            for head in 2..g {
                for _ in 0..rng.gen_range(0..=s) {
                    gs.push((head, (0..rng.gen_range(1..=l)).map(|_| rng.gen_range(0..g)).collect()));
                }
            }
            IndexTensor::build(rule, g, s, l, &gs)
        })
        .collect();
    let cfg = ReasonerConfig { t: rng.gen_range(1..=4), gamma: DEFAULT_GAMMA, clamp: true, trace: false };
    let mut idx: Vec<usize> = (2..g).collect();
    rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), rng);
    let valuation = idx[..rng.gen_range(1..=3)].iter().map(|&i| (i, logit(v0[i]))).collect();
    let m = rng.gen_range(1..=2);
    let weights = RuleWeights::new(m, c, (0..m * c).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let targets = (0..rng.gen_range(1..=3)).map(|_| (rng.gen_range(2..g), rng.gen_range(0.0..1.0))).collect();
    (v0, rules, cfg, ParamSet { valuation, weights, train_weights: true }, targets)
}

fn gradient_checks() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut leaves = 0;
    for case in 0..100 {
        let (v0, rules, cfg, params, targets) = random_grad_case(&mut rng);
        let model = Model { v0: &v0, rules: &rules, support: &[], cfg: &cfg };
        let bad = check_gradients(model, &params, &targets, 1e-4, 1e-3, 1e-6).map_err(|e| format!("case {case}: {e}"))?;
        if let Some(b) = bad.first() {
            return Err(format!("case {case}: {} analytic {:.6e} numeric {:.6e}", b.leaf, b.analytic, b.numeric));
        }
        leaves += params.valuation.len() + params.weights.logits.len();
    }
    Ok(format!("100 configurations, {leaves} leaves agree"))
}

fn proof_trees() -> Result<String, String> {
    let engine = Engine::new(builtin_interpreter(Interpreter::ProofTree), &fixture("shapes.pl"), &GroundingConfig::default(), &GroundExtras::default())
        .map_err(|e| e.to_string())?;
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    let top = apps::extract_proofs(&engine, &v, &t("same_shape_pair(obj0,obj2)"));
    let best = top.first().ok_or("no proof of same_shape_pair(obj0,obj2)")?;
    let leaves: Vec<Term> = best.leaves().into_iter().cloned().collect();
    let low = apps::extract_proofs(&engine, &v, &t("same_shape_pair(obj0,obj1)")).first().map(|p| p.valuation).unwrap_or(0.0);
    let msg = format!("obj0/obj2 {:.4} with {} leaves, obj0/obj1 {low:.4}", best.valuation, leaves.len());
    let leaves_ok = leaves == vec![t("shape(obj0,triangle)"), t("shape(obj2,triangle)")];
    if leaves_ok && (best.valuation - 0.9604).abs() <= 0.01 && low <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn relevance_order() -> Result<String, String> {
    let goal = t("same_shape_pair(obj0,obj2)");
    let (engine, seed) = apps::relevance_engine(&fixture("shapes.pl"), &goal, &GroundingConfig::default()).map_err(|e| e.to_string())?;
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    let r = apps::relevance(&engine, &v, &goal, seed.as_ref(), &[]).map_err(|e| e.to_string())?;
    let score = |a: &str| r.scores.iter().find(|s| s.atom == a).map(|s| s.score).unwrap_or(0.0);
    let (s0, s1) = (score("shape(obj0,triangle)"), score("shape(obj1,triangle)"));
    let related = ["shape(obj0,triangle)", "shape(obj2,triangle)"];
    let worst = r.scores.iter().filter(|s| !related.contains(&s.atom.as_str())).map(|s| s.score).fold(0.0, f64::max);
    let msg = format!("obj0 triangle {s0:.4} > obj1 triangle {s1:.4}; max unrelated {worst:.4}");
    if s0 > s1 && worst <= 0.011 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn check_plan(start: &apps::GridScene, goal: &apps::GridScene) -> Result<(), String> {
    let began = Instant::now();
    let r = apps::plan(start, goal, apps::plan::default_max_moves(5, 5)).map_err(|e| e.to_string())?;
    let (_, ok) = apps::validate_plan(start, &r).map_err(|e| e.to_string())?;
    if !ok {
        return Err("plan does not reach the goal".into());
    }
    for p in &r.plans {
        let (s, g) = (start.get(&p.id).unwrap(), goal.get(&p.id).unwrap());
        if p.horizontal.len() as u64 != s.x.abs_diff(g.x) || p.vertical.len() as u64 != s.y.abs_diff(g.y) {
            return Err(format!("{}: stacks {}/{} for deltas {}/{}", p.id, p.horizontal.len(), p.vertical.len(), s.x.abs_diff(g.x), s.y.abs_diff(g.y)));
        }
    }
    if began.elapsed() > Duration::from_secs(120) {
        return Err(format!("took {:?}", began.elapsed()));
    }
    Ok(())
}

fn planner() -> Result<String, String> {
    let (s, g) = line_fixture();
    check_plan(&s, &g).map_err(|e| format!("line fixture: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..50 {
        let n = rng.gen_range(1..=5);
        let (s, g) = random_scene_pair(&mut rng, n, 5, 5);
        check_plan(&s, &g).map_err(|e| format!("scene {case}: {e}"))?;
    }
    Ok("line fixture and 50/50 random scenes".into())
}

fn two_pairs() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rules = apps::two_pairs_rules();
    let head = t("two_pairs");
    let mut correct = 0;
    for i in 0..100 {
        let scene = apps::classify::random_two_pairs_scene(&mut rng, i % 2 == 0);
        let c = apps::classify_scene(&scene, &rules, &head, 0.5).map_err(|e| e.to_string())?;
        if c.label == apps::two_pairs_oracle(&scene) {
            correct += 1;
        }
    }
    let msg = format!("{correct}/100 correct");
    if correct == 100 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

#[test]
fn acceptance() {
    let checks: [(&str, Check, u64); 10] = [
        ("boolean oracle equivalence", boolean_oracle, 60),
        ("loop avoidance", loop_avoidance, 10),
        ("causal forward", causal_forward, 5),
        ("do recovery", do_recovery, 60),
        ("structure learning", structure_learning, 600),
        ("gradient checks", gradient_checks, 300),
        ("proof trees", proof_trees, 30),
        ("relevance ordering", relevance_order, 30),
        ("planner", planner, 50 * 120),
        ("two-pairs classification", two_pairs, 30),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, budget)) in checks.iter().enumerate() {
        let began = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = began.elapsed();
        let res = match res {
            Ok(m) if took > Duration::from_secs(*budget) => Err(format!("{m}; over the {budget} s budget")),
            r => r,
        };
        match res {
            Ok(m) => println!("PASS {:>2} {name}: {m} ({:.2} s)", i + 1, took.as_secs_f64()),
            Err(m) => {
                println!("FAIL {:>2} {name}: {m} ({:.2} s)", i + 1, took.as_secs_f64());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
