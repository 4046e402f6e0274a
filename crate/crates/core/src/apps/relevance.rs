use serde::Serialize;

use crate::engine::{Engine, Error, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::lang::{render_goal, Program, Term};
use crate::meta::{builtin_interpreter, Interpreter};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomScore {
    pub atom: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelevanceReport {
    pub goal: String,
    /// Clause bodies proving the goal, as used for propagation.
    pub proofs: Vec<String>,
    /// Highest score first; ties by atom text.
    pub scores: Vec<AtomScore>,
}

/// Bodies of every ground clause instance whose head is `goal`.
pub fn goal_bodies(engine: &Engine, goal: &Term) -> Vec<Term> {
    engine
        .grounding
        .ground_clauses
        .iter()
        .filter(|(h, b, _)| h == goal && *b != Term::truth())
        .map(|(_, b, _)| b.clone())
        .collect()
}

/// The list of proofs handed to the relevance interpreter: a right-nested
/// conjunction of clause bodies.
fn proof_seed(bodies: &[Term]) -> Option<Term> {
    let (last, init) = bodies.split_last()?;
    Some(init.iter().rev().fold(last.clone(), |acc, b| Term::conj(b.clone(), acc)))
}

/// Grounds the relevance interpreter for `goal` over `program`.
pub fn relevance_engine(program: &Program, goal: &Term, cfg: &GroundingConfig) -> Result<(Engine, Option<Term>)> {
    let probe = Engine::new(builtin_interpreter(Interpreter::Lrp2), program, cfg, &GroundExtras::default())?;
    let seed = proof_seed(&goal_bodies(&probe, goal));
    let Some(seed) = seed else { return Ok((probe, None)) };
    let extras = GroundExtras { proof_seeds: vec![seed.clone()], ..Default::default() };
    let engine = Engine::new(builtin_interpreter(Interpreter::Lrp2), program, cfg, &extras)?;
    Ok((engine, Some(seed)))
}

/// Scores each of `atoms` (every derivable object atom when empty) as the valuation of
/// `rp(goal, proofs, atom)`.
pub fn relevance(engine: &Engine, v: &[f64], goal: &Term, seed: Option<&Term>, atoms: &[Term]) -> Result<RelevanceReport> {
    let pool: Vec<Term> = if atoms.is_empty() {
        engine.grounding.object_atoms.clone()
    } else {
        for a in atoms {
            let known = engine.grounding.table.get(a).is_some() || engine.grounding.object_atoms.contains(a);
            if !known {
                return Err(Error::UnknownAtom(render_goal(a)));
            }
        }
        atoms.to_vec()
    };
    let mut scores: Vec<AtomScore> = pool
        .iter()
        .map(|a| {
            let score = seed.map(|s| engine.get(v, &Term::compound("rp", vec![goal.clone(), s.clone(), a.clone()]))).unwrap_or(0.0);
            AtomScore { atom: render_goal(a), score }
        })
        .collect();
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.atom.cmp(&b.atom)));
    let proofs = if seed.is_some() { goal_bodies(engine, goal).iter().map(render_goal).collect() } else { Vec::new() };
    Ok(RelevanceReport { goal: render_goal(goal), proofs, scores })
}
