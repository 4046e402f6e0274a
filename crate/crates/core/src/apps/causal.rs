use serde::Serialize;

use crate::engine::{Engine, Error, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::lang::{render_goal, Program, Term};
use crate::meta::{builtin_interpreter, Interpreter};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausalQueryResult {
    pub query: String,
    /// `prob(query)`.
    pub pre: f64,
    /// `probs_do(query, site)` when an intervention is given.
    pub post: Option<f64>,
    pub site: Option<String>,
    pub value: Option<f64>,
}

/// Pre- and post-intervention probabilities of `queries`.
pub fn run_causal(network: &Program, intervention: Option<(Term, f64)>, queries: &[Term]) -> Result<Vec<CausalQueryResult>> {
    if let Some((_, x)) = &intervention {
        if !(0.0..=1.0).contains(x) {
            return Err(Error::Invalid(format!("intervention value {x} is outside [0,1]")));
        }
    }
    let extras = GroundExtras { do_sites: intervention.iter().cloned().collect(), ..Default::default() };
    let engine = Engine::new(builtin_interpreter(Interpreter::Causal), network, &GroundingConfig::default(), &extras)?;
    if let Some(c) = engine.grounding.ctx.cyclic_atoms().first() {
        return Err(Error::Cyclic(render_goal(c)));
    }
    let v = engine.reason(&engine.identity_weights(), &engine.driver_config()).v;
    Ok(queries
        .iter()
        .map(|q| {
            let pre = engine.get(&v, &Term::compound("prob", vec![q.clone()]));
            let post = intervention.as_ref().map(|(s, _)| engine.get(&v, &Term::compound("probs_do", vec![q.clone(), s.clone()])));
            CausalQueryResult {
                query: render_goal(q),
                pre,
                post,
                site: intervention.as_ref().map(|(s, _)| render_goal(s)),
                value: intervention.as_ref().map(|p| p.1),
            }
        })
        .collect())
}

/// Parses `site=value`.
pub fn parse_intervention(text: &str) -> Result<(Term, f64)> {
    let (site, value) = text.split_once('=').ok_or_else(|| Error::Invalid(format!("intervention '{text}' must look like site=value")))?;
    let term = crate::lang::parse_term(site.trim())?;
    let x: f64 = value.trim().parse().map_err(|_| Error::Invalid(format!("intervention value '{}' is not a number", value.trim())))?;
    Ok((term, x))
}
