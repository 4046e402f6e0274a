use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::plan::{GridScene, SceneObject};
use crate::engine::{Engine, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::lang::{parse_program, Clause, Program, Term};
use crate::meta::{builtin_interpreter, Interpreter};

/// Pattern rules for "two pairs of objects share a shape"; `diff/2` facts
/// are supplied with the scene.
pub const TWO_PAIRS_RULES: &str = "\
1.0: same_shape_pair(X,Y) :- shape(X,Z), shape(Y,Z), diff(X,Y).
1.0: two_pairs :- same_shape_pair(A,B), same_shape_pair(C,D), shape(A,S1), shape(C,S2), diff(S1,S2).
";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub score: f64,
    pub label: bool,
}

pub fn two_pairs_rules() -> Program {
    parse_program(TWO_PAIRS_RULES).expect("built-in rules parse")
}

/// `shape`, `color` and `diff` facts of a scene, all with weight 1.
pub fn scene_facts(scene: &GridScene) -> Vec<Clause> {
    let c = Term::constant;
    let mut out = Vec::new();
    for o in &scene.objects {
        out.push(Clause::fact(Term::compound("shape", vec![c(&o.id), c(&o.shape)]), 1.0));
        out.push(Clause::fact(Term::compound("color", vec![c(&o.id), c(&o.color)]), 1.0));
    }
    let mut names: Vec<&str> = scene.objects.iter().map(|o| o.id.as_str()).collect();
    let mut shapes: Vec<&str> = scene.objects.iter().map(|o| o.shape.as_str()).collect();
    shapes.sort();
    shapes.dedup();
    names.sort();
    for group in [&names, &shapes] {
        for a in group.iter() {
            for b in group.iter() {
                if a != b {
                    out.push(Clause::fact(Term::compound("diff", vec![c(a), c(b)]), 1.0));
                }
            }
        }
    }
    out
}

/// Scores `solve(head)` under the naive interpreter over the scene facts
/// plus `rules`.
pub fn classify_scene(scene: &GridScene, rules: &Program, head: &Term, threshold: f64) -> Result<Classification> {
    let mut program = rules.clone();
    program.clauses.extend(scene_facts(scene));
    let engine = Engine::new(builtin_interpreter(Interpreter::Naive), &program, &GroundingConfig::default(), &GroundExtras::default())?;
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    let score = engine.get(&v, &Term::compound("solve", vec![head.clone()]));
    Ok(Classification { score, label: score >= threshold })
}

/// Ground truth: at least two distinct shapes each held by two or more objects.
pub fn two_pairs_oracle(scene: &GridScene) -> bool {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &scene.objects {
        *counts.entry(o.shape.as_str()).or_default() += 1;
    }
    counts.values().filter(|&&n| n >= 2).count() >= 2
}

const SHAPES: [&str; 4] = ["triangle", "square", "circle", "star"];
const COLORS: [&str; 3] = ["red", "blue", "yellow"];

/// A random scene of four objects with the requested two-pairs label.
pub fn random_two_pairs_scene<R: Rng>(rng: &mut R, positive: bool) -> GridScene {
    let mut shapes: Vec<&str> = SHAPES.to_vec();
    shapes.shuffle(rng);
    let picks: Vec<&str> = if positive {
        vec![shapes[0], shapes[0], shapes[1], shapes[1]]
    } else if rng.gen_bool(0.5) {
        vec![shapes[0], shapes[1], shapes[2], shapes[3]]
    } else {
        vec![shapes[0], shapes[0], shapes[1], shapes[2]]
    };
    let cells: Vec<(u64, u64)> = (1..=5).flat_map(|x| (1..=5).map(move |y| (x, y))).collect();
    let at: Vec<(u64, u64)> = cells.choose_multiple(rng, picks.len()).copied().collect();
    let mut objects: Vec<SceneObject> = picks
        .iter()
        .enumerate()
        .map(|(i, s)| SceneObject {
            id: format!("obj{i}"),
            shape: s.to_string(),
            color: COLORS[rng.gen_range(0..COLORS.len())].to_string(),
            x: at[i].0,
            y: at[i].1,
        })
        .collect();
    objects.shuffle(rng);
    for (i, o) in objects.iter_mut().enumerate() {
        o.id = format!("obj{i}");
    }
    GridScene { width: 5, height: 5, objects }
}
