use serde::Serialize;

use crate::engine::{Engine, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::lang::{apply, match_ground, render_goal, Program, Subst, Term};
use crate::meta::{builtin_interpreter, make_goal_atoms, Interpreter};

/// One table atom answering a query, with the goal variables it binds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Answer {
    pub atom: String,
    pub bindings: Vec<(String, String)>,
    pub valuation: f64,
}

/// Meta-level patterns answering `goal`, with the depth counter fixed for
/// the depth interpreter.
pub fn query_patterns(engine: &Engine, goal: &Term, max_depth: Option<u64>) -> Result<Vec<Term>> {
    let mut pats = make_goal_atoms(goal, &engine.meta, &engine.facts)?;
    if let (Some(Interpreter::Depth), Some(d)) = (engine.meta.kind, max_depth) {
        let mut s = Subst::new();
        s.bind(crate::lang::Sym::new("Depth"), Term::peano(d));
        pats = pats.iter().map(|p| apply(p, &s)).collect();
    }
    Ok(pats)
}

/// Every table atom matching a query pattern, highest valuation first.
pub fn answers(engine: &Engine, v: &[f64], goal: &Term, max_depth: Option<u64>) -> Result<Vec<Answer>> {
    let mut goal_vars = Vec::new();
    goal.vars(&mut goal_vars);
    let mut out = Vec::new();
    for pat in query_patterns(engine, goal, max_depth)? {
        for (atom, val) in engine.matches(v, &pat) {
            let mut s = Subst::new();
            match_ground(&pat, &atom, &mut s);
            let bindings = goal_vars
                .iter()
                .filter_map(|x| s.get(*x).map(|t| (x.as_str().to_string(), render_goal(t))))
                .collect();
            out.push(Answer { atom: render_goal(&atom), bindings, valuation: val });
        }
    }
    out.sort_by(|a, b| b.valuation.total_cmp(&a.valuation).then_with(|| a.atom.cmp(&b.atom)));
    Ok(out)
}

/// Grounding settings that cover depth counters up to `max_depth`.
pub fn depth_config(max_depth: u64) -> GroundingConfig {
    GroundingConfig { max_nat: max_depth, ..GroundingConfig::default() }
}

/// Valuation of `li(goal, max_depth)` under the depth-limited interpreter.
pub fn solve_depth_limited(program: &Program, goal: &Term, max_depth: u64) -> Result<f64> {
    let engine = Engine::new(builtin_interpreter(Interpreter::Depth), program, &depth_config(max_depth), &GroundExtras::default())?;
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    Ok(engine.get(&v, &Term::compound("li", vec![goal.clone(), Term::peano(max_depth)])))
}
