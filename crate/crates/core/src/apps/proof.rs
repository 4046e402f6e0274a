use serde::Serialize;

use crate::engine::Engine;
use crate::lang::term::names;
use crate::lang::{render_goal, Term};

/// Default cut between reported and low-probability proofs.
pub const PROOF_THRESHOLD: f64 = 0.5;

/// A decoded `solve/2` proof term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTree {
    pub goal: String,
    #[serde(skip)]
    pub atom: Term,
    /// The proof term this node was decoded from.
    #[serde(skip)]
    pub proof: Term,
    pub valuation: f64,
    /// `true` when the node is a fact, `A :- true`.
    pub leaf: bool,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    pub fn leaves(&self) -> Vec<&Term> {
        if self.leaf {
            return vec![&self.atom];
        }
        self.children.iter().flat_map(|c| c.leaves()).collect()
    }

    /// Re-evaluates the tree bottom-up with the product semantics, using
    /// clause weights from `engine`.
    pub fn replay(&self, engine: &Engine) -> f64 {
        let body = if self.leaf {
            Term::truth()
        } else {
            Term::conj_of(&self.children.iter().map(|c| c.atom.clone()).collect::<Vec<_>>())
        };
        let w = engine.get(&engine.grounding.v0, &Term::compound("clause", vec![self.atom.clone(), body]));
        self.children.iter().fold(w, |acc, c| acc * c.replay(engine))
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn write_text(&self, out: &mut String, indent: usize) {
        out.push_str(&format!("{}{}  [{:.4}]\n", "  ".repeat(indent), self.goal, self.valuation));
        if self.leaf {
            out.push_str(&format!("{}true\n", "  ".repeat(indent + 1)));
        }
        for c in &self.children {
            c.write_text(out, indent + 1);
        }
    }
}

/// Splits a proof term `(A :- P)` or `(P1, P2)` into the goals it proves.
fn decode(proof: &Term, engine: &Engine, v: &[f64]) -> Option<Vec<ProofTree>> {
    if proof.is_functor(names::CONJ, 2) {
        let a = proof.args();
        let mut left = decode(&a[0], engine, v)?;
        left.extend(decode(&a[1], engine, v)?);
        return Some(left);
    }
    if !proof.is_functor(names::NECK, 2) {
        return None;
    }
    let (atom, sub) = (&proof.args()[0], &proof.args()[1]);
    let valuation = engine.get(v, &Term::compound("solve", vec![atom.clone(), proof.clone()]));
    let (leaf, children) = if *sub == Term::truth() { (true, Vec::new()) } else { (false, decode(sub, engine, v)?) };
    Some(vec![ProofTree { goal: render_goal(atom), atom: atom.clone(), proof: proof.clone(), valuation, leaf, children }])
}

/// Every `solve(goal, P)` atom in the table, decoded, highest valuation
/// first. `goal` may contain variables.
pub fn extract_proofs(engine: &Engine, v: &[f64], goal: &Term) -> Vec<ProofTree> {
    let pattern = Term::compound("solve", vec![goal.clone(), Term::var("Proof")]);
    engine
        .matches(v, &pattern)
        .into_iter()
        .filter_map(|(atom, _)| {
            let proof = &atom.args()[1];
            if !proof.is_functor(names::NECK, 2) {
                return None;
            }
            decode(proof, engine, v).and_then(|mut t| t.pop())
        })
        .collect()
}

/// Proofs at or above `threshold`.
pub fn extract_proof(engine: &Engine, v: &[f64], goal: &Term, threshold: f64) -> Vec<ProofTree> {
    extract_proofs(engine, v, goal).into_iter().filter(|p| p.valuation >= threshold).collect()
}
