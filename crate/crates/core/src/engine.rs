//! The lift, ground and reason pipeline behind one handle.

use thiserror::Error;

use crate::autodiff::TapeError;
use crate::ground::{build, GroundError, GroundExtras, Grounding, GroundingConfig};
use crate::infer::{infer, ReasonerConfig, RuleWeights, StepTrace, SHARP_GAMMA};
use crate::lang::{match_ground, render_term, LangError, Program, Subst, Term};
use crate::meta::{lift_program, MetaError, MetaFactSet, MetaProgram};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Tape(#[from] TapeError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("atom {0} is not in the ground atom table")]
    UnknownAtom(String),
    #[error("network is cyclic through {0}")]
    Cyclic(String),
    #[error("no plan within {max_moves} moves for {objects}")]
    NoPlan { objects: String, max_moves: usize },
    #[error("learning did not converge: best final loss {best:.4} exceeds {threshold:.4}")]
    NotConverged { best: f64, threshold: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A grounded meta program over one object program.
pub struct Engine {
    pub meta: MetaProgram,
    pub facts: MetaFactSet,
    pub grounding: Grounding,
}

/// Final valuations of one reasoning run.
#[derive(Clone, Debug)]
pub struct Valuation {
    pub v: Vec<f64>,
    pub traces: Vec<StepTrace>,
}

impl Engine {
    pub fn new(meta: MetaProgram, program: &Program, cfg: &GroundingConfig, extras: &GroundExtras) -> Result<Engine> {
        let facts = lift_program(program);
        let grounding = build(&meta, &facts, cfg, extras)?;
        Ok(Engine { meta, facts, grounding })
    }

    /// One slot per listing rule, each pinned on its own rule.
    pub fn identity_weights(&self) -> RuleWeights {
        RuleWeights::identity(self.grounding.c())
    }

    /// Grounding-derived step count with the sharp smoothing used by drivers.
    pub fn driver_config(&self) -> ReasonerConfig {
        ReasonerConfig { t: self.grounding.default_t, gamma: SHARP_GAMMA, clamp: true, trace: false }
    }

    pub fn reason(&self, w: &RuleWeights, cfg: &ReasonerConfig) -> Valuation {
        self.reason_from(&self.grounding.v0, w, cfg)
    }

    pub fn reason_from(&self, v0: &[f64], w: &RuleWeights, cfg: &ReasonerConfig) -> Valuation {
        let g = &self.grounding;
        let (v, traces) = infer(v0, &g.tensors, &g.support_tensors, w, cfg);
        Valuation { v, traces }
    }

    /// Valuation of a ground atom; atoms outside the table read as 0.
    pub fn get(&self, v: &[f64], atom: &Term) -> f64 {
        self.grounding.index(atom).map(|i| v[i]).unwrap_or(0.0)
    }

    pub fn index_of(&self, atom: &Term) -> Result<usize> {
        self.grounding.index(atom).ok_or_else(|| Error::UnknownAtom(render_term(atom)))
    }

    /// Table atoms matching `pattern` with their valuations, highest first
    /// (ties in table order).
    pub fn matches(&self, v: &[f64], pattern: &Term) -> Vec<(Term, f64)> {
        let mut out: Vec<(usize, Term, f64)> = self
            .grounding
            .table
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| match_ground(pattern, a, &mut Subst::new()))
            .map(|(i, a)| (i, a.clone(), v[i]))
            .collect();
        out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        out.into_iter().map(|(_, a, x)| (a, x)).collect()
    }
}

/// Atoms whose valuation moved most in one step.
#[derive(Clone, Debug, serde::Serialize)]
pub struct StepChanges {
    pub step: usize,
    pub changes: Vec<(String, f64, f64)>,
}

impl Engine {
    /// Runs `cfg.t` steps and keeps the `k` largest changes of each.
    pub fn trace_changes(&self, w: &RuleWeights, cfg: &ReasonerConfig, k: usize) -> Vec<StepChanges> {
        let g = &self.grounding;
        let mut v = g.v0.clone();
        let mut out = Vec::new();
        let one = ReasonerConfig { t: 1, trace: false, ..cfg.clone() };
        for step in 1..=cfg.t {
            let (next, _) = crate::infer::forward_step(&v, &g.tensors, &g.support_tensors, w, &one);
            let mut idx: Vec<usize> = (0..v.len()).filter(|&i| next[i] != v[i]).collect();
            idx.sort_by(|&a, &b| (next[b] - v[b]).abs().total_cmp(&(next[a] - v[a]).abs()).then(a.cmp(&b)));
            idx.truncate(k);
            let changes = idx.iter().map(|&i| (render_term(g.table.atom(i)), v[i], next[i])).collect();
            out.push(StepChanges { step, changes });
            v = next;
        }
        out
    }
}
