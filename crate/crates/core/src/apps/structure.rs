use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::learn::StructureTask;
use crate::engine::{Engine, Error, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::infer::{ReasonerConfig, RuleWeights, SHARP_GAMMA};
use crate::lang::{parse_program, Program};
use crate::meta::MetaProgram;

pub const POOL_TEXT: &str = include_str!("../../interpreters/pool.pl");

/// Boolean object program the task targets are generated from.
pub const TASK_PROGRAM: &str = "\
1.0: edge(a,b).
1.0: edge(b,c).
1.0: edge(c,d).
1.0: path(X,Y) :- edge(X,Y).
1.0: path(X,Z) :- edge(X,Y), path(Y,Z).
";

/// Pool indices of each task's interpreter.
pub const TASKS: [(&str, &[usize]); 3] = [("causal", &[4, 5, 6]), ("naive", &[0, 1]), ("prooftree", &[2, 3])];

pub fn pool_program() -> MetaProgram {
    let p = parse_program(POOL_TEXT).expect("pool text parses");
    MetaProgram::from_program("pool", None, &p).expect("pool is well formed")
}

pub fn structure_engine(program: &Program) -> Result<Engine> {
    Engine::new(pool_program(), program, &GroundingConfig::default(), &GroundExtras::default())
}

fn derived(engine: &Engine, w: &RuleWeights) -> BTreeSet<usize> {
    let cfg = ReasonerConfig { t: engine.grounding.default_t, gamma: SHARP_GAMMA, clamp: true, trace: false };
    let v = engine.reason(w, &cfg).v;
    v.iter().enumerate().filter(|(_, x)| **x >= 0.5).map(|(i, _)| i).collect()
}

/// Targets per task: atoms the task's interpreter derives are positive,
/// atoms only another interpreter derives are negative. Atoms the support
/// rules derive alone carry no signal and are left out. A seeded shuffle
/// holds out `test_fraction` of each task's atoms.
pub fn make_tasks(engine: &Engine, names: &[&str], seed: u64, test_fraction: f64) -> Result<Vec<StructureTask>> {
    let c = engine.grounding.c();
    let base = derived(engine, &RuleWeights::new(0, c, Vec::new()));
    let sets: Vec<(&str, &[usize], BTreeSet<usize>)> =
        TASKS.iter().map(|(n, rules)| (*n, *rules, derived(engine, &RuleWeights::one_hot(c, rules)))).collect();
    let universe: BTreeSet<usize> = sets.iter().flat_map(|s| s.2.iter().copied()).filter(|i| !base.contains(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for name in names {
        let (_, rules, set) = sets
            .iter()
            .find(|s| s.0 == *name)
            .ok_or_else(|| Error::Invalid(format!("unknown task '{name}' (expected causal, naive or prooftree)")))?;
        let mut items: Vec<(crate::lang::Term, f64)> = universe
            .iter()
            .map(|&i| (engine.grounding.table.atom(i).clone(), if set.contains(&i) { 1.0 } else { 0.0 }))
            .collect();
        items.shuffle(&mut rng);
        let n_test = ((items.len() as f64) * test_fraction).round() as usize;
        let test = items.split_off(items.len() - n_test);
        out.push(StructureTask { name: name.to_string(), true_rules: rules.to_vec(), train: items, test });
    }
    Ok(out)
}
