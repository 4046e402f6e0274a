//! Do-value recovery and meta-rule structure learning.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{loss_and_grad, sigmoid, Model, ParamSet};
use crate::engine::{Engine, Error, Result};
use crate::ground::{GroundExtras, GroundingConfig};
use crate::infer::{ReasonerConfig, RuleWeights, SHARP_GAMMA};
use crate::lang::{render_term, Program, Term};
use crate::meta::{builtin_interpreter, Interpreter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Gd,
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnConfig {
    pub steps: usize,
    pub lr: f64,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub gamma: f64,
    /// Record a loss report every this many steps (the last step is always kept).
    pub report_every: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { steps: 1000, lr: 0.05, seed: 0, optimizer: OptimizerKind::Gd, gamma: SHARP_GAMMA, report_every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub run: String,
    pub iteration: usize,
    pub loss: f64,
    pub params: BTreeMap<String, f64>,
    pub grad_norm: f64,
}

/// Gradient descent with optional first/second-moment adaptation.
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, n: usize) -> Optimizer {
        Optimizer { kind, lr, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        match self.kind {
            OptimizerKind::Gd => x.iter_mut().zip(g).for_each(|(xi, gi)| *xi -= self.lr * gi),
            OptimizerKind::Adam => {
                // Short second-moment memory: early large gradients would
                // otherwise mute the small ones that free a saturated slot.
                let (b1, b2, eps) = (0.9, 0.9, 1e-8);
                self.t += 1;
                for i in 0..x.len() {
                    self.m[i] = b1 * self.m[i] + (1.0 - b1) * g[i];
                    self.v[i] = b2 * self.v[i] + (1.0 - b2) * g[i] * g[i];
                    let mh = self.m[i] / (1.0 - b1.powi(self.t));
                    let vh = self.v[i] / (1.0 - b2.powi(self.t));
                    x[i] -= self.lr * mh / (vh.sqrt() + eps);
                }
            }
        }
    }
}

/// Valuations of `targets` in `v`.
pub fn read_prediction(engine: &Engine, v: &[f64], targets: &[Term]) -> Result<Vec<f64>> {
    targets.iter().map(|t| engine.index_of(t).map(|i| v[i])).collect()
}

/// Binary entropy, the least BCE a target `t` admits.
pub fn entropy(t: f64) -> f64 {
    super::bce(t, t)
}

#[derive(Clone, Debug, Serialize)]
pub struct DoRun {
    pub site: String,
    pub initial: f64,
    pub value: f64,
    pub final_loss: f64,
    pub curve: Vec<LossReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoLearnResult {
    pub winner: String,
    pub value: f64,
    pub runs: Vec<DoRun>,
    /// Best final loss minus the target entropy floor.
    pub excess_loss: f64,
    pub converged: bool,
}

/// Loss allowed above the entropy floor before a run counts as stuck.
pub const CONVERGENCE_SLACK: f64 = 0.05;

/// Learns, per candidate site, the do value that best explains `targets`
/// (object atom, probability). Candidates run independently.
pub fn learn_do(network: &Program, targets: &[(Term, f64)], candidates: &[Term], cfg: &LearnConfig) -> Result<DoLearnResult> {
    if candidates.is_empty() {
        return Err(Error::Invalid("learn_do needs at least one candidate site".into()));
    }
    let floor: f64 = targets.iter().map(|t| entropy(t.1)).sum();
    let mut runs = Vec::new();
    for (k, site) in candidates.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(k as u64));
        let initial: f64 = rng.gen_range(0.05..0.95);
        let extras = GroundExtras { do_sites: vec![(site.clone(), initial)], ..Default::default() };
        let engine = Engine::new(builtin_interpreter(Interpreter::Causal), network, &GroundingConfig::default(), &extras)?;
        if let Some(c) = engine.grounding.ctx.cyclic_atoms().first() {
            return Err(Error::Cyclic(render_term(c)));
        }
        let do_idx = engine
            .grounding
            .do_index
            .iter()
            .find(|(s, _)| s == site)
            .map(|p| p.1)
            .ok_or_else(|| Error::UnknownAtom(format!("do({})", render_term(site))))?;
        let idx: Vec<(usize, f64)> = targets
            .iter()
            .map(|(a, t)| engine.index_of(&Term::compound("probs_do", vec![a.clone(), site.clone()])).map(|i| (i, *t)))
            .collect::<Result<_>>()?;
        let rcfg = ReasonerConfig { t: engine.grounding.default_t, gamma: cfg.gamma, clamp: true, trace: false };
        let mut params = ParamSet { valuation: vec![(do_idx, super::logit(initial))], ..ParamSet::fixed(engine.identity_weights()) };
        let model = Model { v0: &engine.grounding.v0, rules: &engine.grounding.tensors, support: &engine.grounding.support_tensors, cfg: &rcfg };
        let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, 1);
        let run_name = render_term(site);
        let mut curve = Vec::new();
        let mut final_loss = 0.0;
        for it in 0..=cfg.steps {
            let (loss, g, _) = loss_and_grad(model, &params, &idx)?;
            final_loss = loss;
            if it % cfg.report_every.max(1) == 0 || it == cfg.steps {
                let mut p = BTreeMap::new();
                p.insert(format!("do({run_name})"), sigmoid(params.valuation[0].1));
                curve.push(LossReport { run: run_name.clone(), iteration: it, loss, params: p, grad_norm: g.norm() });
            }
            if it == cfg.steps {
                break;
            }
            let mut x = [params.valuation[0].1];
            opt.step(&mut x, &g.logits);
            params.valuation[0].1 = x[0];
        }
        runs.push(DoRun { site: run_name, initial, value: sigmoid(params.valuation[0].1), final_loss, curve });
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.final_loss.total_cmp(&b.1.final_loss).then(a.0.cmp(&b.0)))
        .map(|p| p.1)
        .expect("at least one run");
    let excess = best.final_loss - floor;
    Ok(DoLearnResult { winner: best.site.clone(), value: best.value, excess_loss: excess, converged: excess <= CONVERGENCE_SLACK, runs })
}

/// One task phase: training and held-out targets over meta atoms.
#[derive(Clone, Debug, Serialize)]
pub struct StructureTask {
    pub name: String,
    /// Candidate indices the task's interpreter consists of.
    pub true_rules: Vec<usize>,
    #[serde(skip)]
    pub train: Vec<(Term, f64)>,
    #[serde(skip)]
    pub test: Vec<(Term, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlotChoice {
    pub slot: usize,
    pub rule: usize,
    pub weight: f64,
    /// Top two weights within 1e-6 of each other.
    pub tie: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub task: String,
    pub selection: Vec<SlotChoice>,
    /// Largest slot weight each true rule receives.
    pub true_rule_weights: Vec<(usize, f64)>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub final_loss: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureResult {
    pub phases: Vec<PhaseReport>,
    pub curve: Vec<LossReport>,
    pub final_weights: RuleWeights,
}

/// Trains `W` (`m` slots over the engine's listing) through the task phases
/// in order, `cfg.steps` iterations each, carrying `W` across phases.
pub fn learn_structure(engine: &Engine, tasks: &[StructureTask], m: usize, cfg: &LearnConfig) -> Result<StructureResult> {
    let c = engine.grounding.c();
    if m == 0 || m > c {
        return Err(Error::Invalid(format!("slot count {m} must be in 1..={c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = RuleWeights::random(m, c, 0.1, &mut rng);
    learn_structure_from(engine, tasks, w0, cfg)
}

/// [`learn_structure`] from explicit initial weights.
pub fn learn_structure_from(engine: &Engine, tasks: &[StructureTask], w0: RuleWeights, cfg: &LearnConfig) -> Result<StructureResult> {
    let g = &engine.grounding;
    let rcfg = ReasonerConfig { t: g.default_t, gamma: cfg.gamma, clamp: true, trace: false };
    let model = Model { v0: &g.v0, rules: &g.tensors, support: &g.support_tensors, cfg: &rcfg };
    let mut params = ParamSet { valuation: Vec::new(), weights: w0, train_weights: true };
    let mut phases = Vec::new();
    let mut curve = Vec::new();
    let index = |set: &[(Term, f64)]| -> Result<Vec<(usize, f64)>> { set.iter().map(|(a, t)| engine.index_of(a).map(|i| (i, *t))).collect() };
    for task in tasks {
        let train = index(&task.train)?;
        let test = index(&task.test)?;
        let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, params.weights.logits.len());
        let mut last = (0.0, Vec::new());
        for it in 0..=cfg.steps {
            let (loss, grads, vt) = loss_and_grad(model, &params, &train)?;
            last = (loss, vt);
            if it % cfg.report_every.max(1) == 0 || it == cfg.steps {
                let mut p = BTreeMap::new();
                for s in params.weights.selection() {
                    p.insert(format!("slot{}", p.len()), s.0 as f64);
                }
                curve.push(LossReport { run: task.name.clone(), iteration: it, loss, params: p, grad_norm: grads.norm() });
            }
            if it == cfg.steps {
                break;
            }
            opt.step(&mut params.weights.logits, &grads.weights);
        }
        let (final_loss, vt) = last;
        let acc = |set: &[(usize, f64)]| {
            if set.is_empty() {
                return 1.0;
            }
            set.iter().filter(|(i, t)| (vt[*i] >= 0.5) == (*t >= 0.5)).count() as f64 / set.len() as f64
        };
        let ws = params.weights.softmax();
        let cc = params.weights.c;
        let true_rule_weights = task
            .true_rules
            .iter()
            .map(|&r| (r, (0..params.weights.m).map(|s| ws[s * cc + r]).fold(0.0, f64::max)))
            .collect();
        let selection = params
            .weights
            .selection()
            .into_iter()
            .enumerate()
            .map(|(slot, (rule, weight, second))| SlotChoice { slot, rule, weight, tie: weight - second < 1e-6 })
            .collect();
        phases.push(PhaseReport {
            task: task.name.clone(),
            selection,
            true_rule_weights,
            train_accuracy: acc(&train),
            test_accuracy: acc(&test),
            final_loss,
            weights: ws,
        });
    }
    Ok(StructureResult { phases, curve, final_weights: params.weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, parse_term};

    const MEDICINE: &str = "1.0: medicine_a.\n1.0: medicine_b.\n0.9: patient :- medicine_a, medicine_b.\n";

    #[test]
    fn optimizers_descend_a_quadratic() {
        for kind in [OptimizerKind::Gd, OptimizerKind::Adam] {
            let mut opt = Optimizer::new(kind, 0.1, 1);
            let mut x = [3.0];
            for _ in 0..500 {
                let g = [2.0 * (x[0] - 1.0)];
                opt.step(&mut x, &g);
            }
            assert!((x[0] - 1.0).abs() < 1e-2, "{kind:?} ended at {}", x[0]);
        }
    }

    #[test]
    fn unintervened_targets_recover_the_fact_value() {
        let p = parse_program(MEDICINE).unwrap();
        let targets = vec![(parse_term("medicine_a").unwrap(), 1.0), (parse_term("patient").unwrap(), 0.9)];
        let cfg = LearnConfig { steps: 400, lr: 0.5, ..Default::default() };
        let r = learn_do(&p, &targets, &[parse_term("medicine_a").unwrap()], &cfg).unwrap();
        assert!(r.value > 0.95, "{}", r.value);
    }

    #[test]
    fn zero_steps_keep_one_hot_selection() {
        let p = parse_program("1.0: q(a).\n1.0: r(X) :- q(X).\n").unwrap();
        let e = Engine::new(builtin_interpreter(Interpreter::Naive), &p, &GroundingConfig::default(), &GroundExtras::default()).unwrap();
        let c = e.grounding.c();
        let cfg = LearnConfig { steps: 0, ..Default::default() };
        let task = StructureTask { name: "noop".into(), true_rules: (0..c).collect(), train: vec![], test: vec![] };
        let r = learn_structure_from(&e, &[task], RuleWeights::identity(c), &cfg).unwrap();
        let picked: Vec<usize> = r.phases[0].selection.iter().map(|s| s.rule).collect();
        assert_eq!(picked, (0..c).collect::<Vec<_>>());
    }
}
