//! Differentiable replay of the reasoning kernel and the learning loops.

pub mod learn;
pub mod tape;

use serde::Serialize;

use crate::ground::IndexTensor;
use crate::infer::{infer, ReasonerConfig, RuleWeights};
pub use tape::{bce, logit, sigmoid, NodeId, Tape, TapeError};

/// What the tape differentiates through: tensors, initial valuation and
/// reasoner settings.
#[derive(Clone, Copy)]
pub struct Model<'a> {
    pub v0: &'a [f64],
    pub rules: &'a [IndexTensor],
    pub support: &'a [IndexTensor],
    pub cfg: &'a ReasonerConfig,
}

/// Trainable leaves. Valuation entries are stored as logits so the value
/// `sigmoid(logit)` stays inside (0,1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSet {
    pub valuation: Vec<(usize, f64)>,
    pub weights: RuleWeights,
    pub train_weights: bool,
}

impl ParamSet {
    pub fn fixed(weights: RuleWeights) -> ParamSet {
        ParamSet { valuation: Vec::new(), weights, train_weights: false }
    }

    /// Initial valuation with trainable entries substituted.
    pub fn apply(&self, v0: &[f64]) -> Vec<f64> {
        let mut v = v0.to_vec();
        for &(i, z) in &self.valuation {
            v[i] = sigmoid(z);
        }
        v
    }

    pub fn values(&self) -> Vec<f64> {
        self.valuation.iter().map(|&(_, z)| sigmoid(z)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gradients {
    /// Per trainable valuation logit.
    pub logits: Vec<f64>,
    /// With respect to the full initial valuation; zero off the trainable set.
    pub v0: Vec<f64>,
    /// With respect to `W`; all zero when the weights are frozen.
    pub weights: Vec<f64>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.logits.iter().chain(&self.weights).map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Nodes of one recorded forward pass.
pub struct Recorded {
    pub vt: NodeId,
    logits: NodeId,
    values: NodeId,
    weights: NodeId,
}

/// Records `T` reasoning steps on `tape`, mirroring [`crate::infer::infer`].
pub fn record<'a>(tape: &mut Tape<'a>, model: Model<'a>, params: &ParamSet) -> Result<Recorded, TapeError> {
    let cfg = model.cfg;
    let (gamma, clamp) = (cfg.gamma, cfg.clamp);
    let w = &params.weights;
    let logits = tape.leaf(params.valuation.iter().map(|p| p.1).collect())?;
    let values = tape.sigmoid(logits)?;
    let idx = params.valuation.iter().map(|p| p.0).collect();
    let mut v = tape.scatter(model.v0, values, idx)?;
    let weights = if params.train_weights { tape.leaf(w.logits.clone())? } else { tape.constant(w.logits.clone())? };
    let ws = tape.softmax_rows(weights, w.c.max(1))?;
    if w.m + model.support.len() == 0 {
        for _ in 0..cfg.t {
            v = tape.pin(v)?;
        }
        return Ok(Recorded { vt: v, logits, values, weights });
    }
    for _ in 0..cfg.t {
        let mut cs = Vec::with_capacity(model.rules.len());
        for t in model.rules {
            let b = tape.gather_prod(v, t)?;
            cs.push(tape.softor_groups(b, t.s, gamma, clamp)?);
        }
        let mut parts = Vec::new();
        if w.m > 0 {
            parts.push((tape.rule_mix(ws, cs, w.m)?, w.m));
        }
        for t in model.support {
            let b = tape.gather_prod(v, t)?;
            parts.push((tape.softor_groups(b, t.s, gamma, clamp)?, 1));
        }
        let width = parts.iter().map(|p| p.1).sum();
        let cat = tape.concat_rows(parts)?;
        let r = tape.softor_groups(cat, width, gamma, clamp)?;
        let pair = tape.concat_rows(vec![(r, 1), (v, 1)])?;
        let next = tape.softor_groups(pair, 2, gamma, clamp)?;
        v = tape.pin(next)?;
    }
    Ok(Recorded { vt: v, logits, values, weights })
}

/// Summed BCE over `(table index, target)` pairs, with exact gradients.
pub fn loss_and_grad(model: Model<'_>, params: &ParamSet, targets: &[(usize, f64)]) -> Result<(f64, Gradients, Vec<f64>), TapeError> {
    let mut tape = Tape::new();
    let rec = record(&mut tape, model, params)?;
    let pick = tape.pick(rec.vt, targets.iter().map(|t| t.0).collect())?;
    let loss = tape.bce(pick, targets.iter().map(|t| t.1).collect())?;
    let grads = tape.backward(loss)?;
    let mut v0 = vec![0.0; model.v0.len()];
    for (k, &(i, _)) in params.valuation.iter().enumerate() {
        v0[i] = grads[rec.values][k];
    }
    let weights = if params.train_weights { grads[rec.weights].clone() } else { vec![0.0; params.weights.logits.len()] };
    let g = Gradients { logits: grads[rec.logits].clone(), v0, weights };
    Ok((tape.value(loss)[0], g, tape.value(rec.vt).to_vec()))
}

/// The same loss through the plain kernel; used as the finite-difference oracle.
pub fn loss_value(model: Model<'_>, params: &ParamSet, targets: &[(usize, f64)]) -> f64 {
    let v0 = params.apply(model.v0);
    let (vt, _) = infer(&v0, model.rules, model.support, &params.weights, model.cfg);
    targets.iter().map(|&(i, t)| bce(t, vt[i])).sum()
}

/// One mismatch between the tape and central finite differences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradMismatch {
    pub leaf: String,
    pub analytic: f64,
    pub numeric: f64,
}

/// Compares every trainable-leaf gradient with central differences of step
/// `h`, accepting `rel` relative or `abs` absolute error.
pub fn check_gradients(model: Model<'_>, params: &ParamSet, targets: &[(usize, f64)], h: f64, rel: f64, abs: f64) -> Result<Vec<GradMismatch>, TapeError> {
    let (_, g, _) = loss_and_grad(model, params, targets)?;
    let mut bad = Vec::new();
    let mut check = |leaf: String, analytic: f64, plus: &ParamSet, minus: &ParamSet| {
        let numeric = (loss_value(model, plus, targets) - loss_value(model, minus, targets)) / (2.0 * h);
        let err = (analytic - numeric).abs();
        if err > abs && err > rel * analytic.abs().max(numeric.abs()) {
            bad.push(GradMismatch { leaf, analytic, numeric });
        }
    };
    for k in 0..params.valuation.len() {
        let (mut p, mut m) = (params.clone(), params.clone());
        p.valuation[k].1 += h;
        m.valuation[k].1 -= h;
        check(format!("v0[{}]", params.valuation[k].0), g.logits[k], &p, &m);
    }
    if params.train_weights {
        for k in 0..params.weights.logits.len() {
            let (mut p, mut m) = (params.clone(), params.clone());
            p.weights.logits[k] += h;
            m.weights.logits[k] -= h;
            check(format!("W[{},{}]", k / params.weights.c, k % params.weights.c), g.weights[k], &p, &m);
        }
    }
    Ok(bad)
}
