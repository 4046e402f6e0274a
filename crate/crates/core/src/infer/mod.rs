//! Soft forward chaining over index tensors.

use rand::Rng;
use serde::Serialize;

use crate::ground::{IndexTensor, BOT, TOP};

/// Default smoothing of the soft or.
pub const DEFAULT_GAMMA: f64 = 0.01;
/// Smoothing used by the task drivers, where accumulated log-sum-exp drift
/// would otherwise blur probability readouts.
pub const SHARP_GAMMA: f64 = 1e-9;
/// Logit magnitude used to pin a slot on one rule.
pub const ONE_HOT_LOGIT: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReasonerConfig {
    pub t: usize,
    pub gamma: f64,
    /// Clamp soft-or outputs at 1.
    pub clamp: bool,
    /// Record per-step tensors.
    pub trace: bool,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig { t: 4, gamma: DEFAULT_GAMMA, clamp: true, trace: false }
    }
}

/// Rule-selection logits `W` (row-major `M x C`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleWeights {
    pub m: usize,
    pub c: usize,
    pub logits: Vec<f64>,
}

impl RuleWeights {
    pub fn new(m: usize, c: usize, logits: Vec<f64>) -> RuleWeights {
        assert_eq!(logits.len(), m * c, "logit count must be M*C");
        RuleWeights { m, c, logits }
    }

    /// `M = C` slots, slot `i` pinned on rule `i`.
    pub fn identity(c: usize) -> RuleWeights {
        let mut logits = vec![-ONE_HOT_LOGIT; c * c];
        for i in 0..c {
            logits[i * c + i] = ONE_HOT_LOGIT;
        }
        RuleWeights { m: c, c, logits }
    }

    /// Slot `m` pinned on rule `picks[m]`.
    pub fn one_hot(c: usize, picks: &[usize]) -> RuleWeights {
        let mut logits = vec![-ONE_HOT_LOGIT; picks.len() * c];
        for (m, &i) in picks.iter().enumerate() {
            logits[m * c + i] = ONE_HOT_LOGIT;
        }
        RuleWeights { m: picks.len(), c, logits }
    }

    pub fn random<R: Rng>(m: usize, c: usize, scale: f64, rng: &mut R) -> RuleWeights {
        let logits = (0..m * c).map(|_| rng.gen_range(-scale..=scale)).collect();
        RuleWeights { m, c, logits }
    }

    /// Row-wise softmax `W*`.
    pub fn softmax(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m * self.c];
        for m in 0..self.m {
            let row = &self.logits[m * self.c..(m + 1) * self.c];
            let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|x| (x - mx).exp()).sum();
            for i in 0..self.c {
                out[m * self.c + i] = (row[i] - mx).exp() / z;
            }
        }
        out
    }

    /// Per slot: `(argmax rule, its softmax weight, runner-up weight)`.
    pub fn selection(&self) -> Vec<(usize, f64, f64)> {
        let w = self.softmax();
        (0..self.m)
            .map(|m| {
                let row = &w[m * self.c..(m + 1) * self.c];
                let mut idx: Vec<usize> = (0..self.c).collect();
                idx.sort_by(|a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
                let second = idx.get(1).map(|&i| row[i]).unwrap_or(0.0);
                (idx[0], row[idx[0]], second)
            })
            .collect()
    }
}

/// Unclamped `γ·log Σ exp(x/γ)`; 0 for empty input.
pub fn softor_raw(xs: &[f64], gamma: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = xs.iter().map(|x| ((x - mx) / gamma).exp()).sum();
    mx + gamma * s.ln()
}

pub fn softor(xs: &[f64], gamma: f64) -> f64 {
    softor_raw(xs, gamma).min(1.0)
}

fn or(xs: &[f64], gamma: f64, clamp: bool) -> f64 {
    let raw = softor_raw(xs, gamma);
    if clamp {
        raw.min(1.0)
    } else {
        raw
    }
}

/// Body scores `b[j*S + k] = Π_l v[I[j,k,l]]`.
pub fn gather_eval(v: &[f64], t: &IndexTensor) -> Vec<f64> {
    t.data
        .chunks_exact(t.l)
        .map(|row| row.iter().map(|&i| v[i as usize]).product())
        .collect()
}

/// `c[j] = softor_k b[j*S + k]`.
pub fn combine_groundings(b: &[f64], s: usize, gamma: f64, clamp: bool) -> Vec<f64> {
    b.chunks_exact(s).map(|row| or(row, gamma, clamp)).collect()
}

/// Mixes per-rule scores with the slot weights and combines slots and
/// always-on support scores: returns `(h, r)` with `h` laid out `G x M`.
pub fn combine_rules(c: &[Vec<f64>], support: &[Vec<f64>], w: &RuleWeights, g: usize, gamma: f64, clamp: bool) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(c.len(), w.c, "one score vector per candidate rule");
    let ws = w.softmax();
    let mut h = vec![0.0; g * w.m];
    for m in 0..w.m {
        for (i, ci) in c.iter().enumerate() {
            let wi = ws[m * w.c + i];
            if wi == 0.0 {
                continue;
            }
            for j in 0..g {
                h[j * w.m + m] += wi * ci[j];
            }
        }
    }
    let mut r = vec![0.0; g];
    let mut buf = Vec::with_capacity(w.m + support.len());
    for j in 0..g {
        buf.clear();
        buf.extend_from_slice(&h[j * w.m..(j + 1) * w.m]);
        buf.extend(support.iter().map(|s| s[j]));
        r[j] = or(&buf, gamma, clamp);
    }
    (h, r)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StepTrace {
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub r: Vec<f64>,
}

/// One reasoning step: `v'[j] = softor(r[j], v[j])`, then ⊤/⊥ re-pinned.
pub fn forward_step(
    v: &[f64],
    rules: &[IndexTensor],
    support: &[IndexTensor],
    w: &RuleWeights,
    cfg: &ReasonerConfig,
) -> (Vec<f64>, Option<StepTrace>) {
    let g = v.len();
    let mut bs = Vec::new();
    let mut cs = Vec::with_capacity(rules.len());
    for t in rules {
        let b = gather_eval(v, t);
        cs.push(combine_groundings(&b, t.s, cfg.gamma, cfg.clamp));
        if cfg.trace {
            bs.push(b);
        }
    }
    let mut sup = Vec::with_capacity(support.len());
    for t in support {
        let b = gather_eval(v, t);
        sup.push(combine_groundings(&b, t.s, cfg.gamma, cfg.clamp));
    }
    let (h, r) = combine_rules(&cs, &sup, w, g, cfg.gamma, cfg.clamp);
    // With no rule at all there is nothing to combine with v.
    let idle = w.m + support.len() == 0;
    let mut next: Vec<f64> =
        if idle { v.to_vec() } else { (0..g).map(|j| or(&[r[j], v[j]], cfg.gamma, cfg.clamp)).collect() };
    if g > BOT {
        next[TOP] = 1.0;
        next[BOT] = 0.0;
    }
    let trace = cfg.trace.then(|| {
        cs.extend(sup);
        StepTrace { b: bs, c: cs, h, r }
    });
    (next, trace)
}

/// `T` forward steps from `v0`.
pub fn infer(
    v0: &[f64],
    rules: &[IndexTensor],
    support: &[IndexTensor],
    w: &RuleWeights,
    cfg: &ReasonerConfig,
) -> (Vec<f64>, Vec<StepTrace>) {
    let mut v = v0.to_vec();
    let mut traces = Vec::new();
    for _ in 0..cfg.t {
        let (next, tr) = forward_step(&v, rules, support, w, cfg);
        v = next;
        traces.extend(tr);
    }
    (v, traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn softor_closed_forms() {
        assert!(close(softor(&[0.0, 0.0], 0.01), 0.01 * 2f64.ln(), 1e-12));
        assert!(close(softor(&[0.5, 0.5], 0.01), 0.5 + 0.01 * 2f64.ln(), 1e-12));
        assert_eq!(softor(&[1.0, 0.0], 0.01), 1.0);
        assert_eq!(softor(&[], 0.01), 0.0);
        assert!(close(softor(&[0.9, 0.3], 0.01), 0.9, 1e-6));
        assert!(close(softor(&[0.0, 0.0, 0.0], 0.01), 0.01099, 1e-5));
    }

    #[test]
    fn gather_product_and_padding() {
        let v = [1.0, 0.0, 0.9, 0.8];
        let t = IndexTensor { rule: 0, g: 1, s: 3, l: 2, data: vec![2, 3, 2, 0, 1, 1] };
        let b = gather_eval(&v, &t);
        assert!(close(b[0], 0.72, 1e-15));
        assert_eq!(b[1], 0.9);
        assert_eq!(b[2], 0.0);
    }

    #[test]
    fn rule_mixing() {
        let c = vec![vec![0.4], vec![0.8]];
        let w = RuleWeights::new(1, 2, vec![0.0, 0.0]);
        let (h, _) = combine_rules(&c, &[], &w, 1, 0.01, true);
        assert!(close(h[0], 0.6, 1e-12));
        let w = RuleWeights::one_hot(2, &[1]);
        let (h, r) = combine_rules(&c, &[], &w, 1, 0.01, true);
        assert!(close(h[0], 0.8, 1e-9));
        assert!(close(r[0], h[0], 1e-15));
    }

    #[test]
    fn empty_program_keeps_v0() {
        let v0 = vec![1.0, 0.0, 0.3];
        let cfg = ReasonerConfig { t: 3, gamma: 0.01, clamp: true, trace: false };
        let w = RuleWeights::new(0, 0, vec![]);
        let (v, _) = infer(&v0, &[], &[], &w, &cfg);
        assert_eq!(v, v0);
    }

    #[test]
    fn idle_step_grows_by_at_most_ln2() {
        let v0 = vec![1.0, 0.0, 0.3, 0.0];
        let cfg = ReasonerConfig { t: 1, gamma: 0.01, clamp: true, trace: false };
        let dead = IndexTensor::build(0, 4, 1, 1, &[]);
        let w = RuleWeights::new(1, 1, vec![0.0]);
        let (v, _) = forward_step(&v0, &[dead], &[], &w, &cfg);
        // A dead row scores softor([0]) = 0, so each entry grows by at most γ·ln 2.
        for j in 2..4 {
            assert!(v[j] >= v0[j] && v[j] - v0[j] <= 0.01 * 2f64.ln() + 1e-12);
        }
        assert_eq!((v[0], v[1]), (1.0, 0.0));
    }
}
