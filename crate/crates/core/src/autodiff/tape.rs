//! Reverse-mode tape specialised to the reasoning kernel's vector ops.

use thiserror::Error;

use crate::ground::{IndexTensor, BOT, TOP};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TapeError {
    #[error("non-finite value at node {node} ({op})")]
    NonFiniteValue { node: NodeId, op: &'static str },
    #[error("non-finite gradient at node {node} ({op})")]
    NonFiniteGrad { node: NodeId, op: &'static str },
}

enum Op<'a> {
    Leaf,
    Const,
    Sigmoid(NodeId),
    /// `out = base` with `out[idx[i]] = src[i]`.
    Scatter { src: NodeId, idx: Vec<usize> },
    GatherProd { v: NodeId, t: &'a IndexTensor },
    /// Soft or over consecutive groups of `k`.
    Lse { x: NodeId, k: usize, gamma: f64, clamp: bool },
    /// Row-wise concatenation of `(node, width)` blocks sharing a row count.
    ConcatRows { parts: Vec<(NodeId, usize)> },
    SoftmaxRows { x: NodeId, cols: usize },
    /// `h[j*M + m] = Σ_i w[m*C + i] · c_i[j]`.
    RuleMix { w: NodeId, cs: Vec<NodeId>, m: usize },
    Pin(NodeId),
    Pick { x: NodeId, idx: Vec<usize> },
    /// Summed binary cross-entropy against fixed targets.
    Bce { x: NodeId, targets: Vec<f64> },
}

impl Op<'_> {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Const => "const",
            Op::Sigmoid(_) => "sigmoid",
            Op::Scatter { .. } => "scatter",
            Op::GatherProd { .. } => "gather_prod",
            Op::Lse { .. } => "softor",
            Op::ConcatRows { .. } => "concat",
            Op::SoftmaxRows { .. } => "softmax",
            Op::RuleMix { .. } => "rule_mix",
            Op::Pin(_) => "pin",
            Op::Pick { .. } => "pick",
            Op::Bce { .. } => "bce",
        }
    }
}

pub const BCE_CLIP: f64 = 1e-7;

#[derive(Default)]
pub struct Tape<'a> {
    ops: Vec<Op<'a>>,
    vals: Vec<Vec<f64>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Tape<'a> {
        Tape { ops: Vec::new(), vals: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn value(&self, n: NodeId) -> &[f64] {
        &self.vals[n]
    }

    fn push(&mut self, op: Op<'a>, val: Vec<f64>) -> Result<NodeId, TapeError> {
        let id = self.ops.len();
        if val.iter().any(|x| !x.is_finite()) {
            return Err(TapeError::NonFiniteValue { node: id, op: op.name() });
        }
        self.ops.push(op);
        self.vals.push(val);
        Ok(id)
    }

    pub fn leaf(&mut self, x: Vec<f64>) -> Result<NodeId, TapeError> {
        self.push(Op::Leaf, x)
    }

    pub fn constant(&mut self, x: Vec<f64>) -> Result<NodeId, TapeError> {
        self.push(Op::Const, x)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> Result<NodeId, TapeError> {
        let out = self.vals[x].iter().map(|&z| sigmoid(z)).collect();
        self.push(Op::Sigmoid(x), out)
    }

    pub fn scatter(&mut self, base: &[f64], src: NodeId, idx: Vec<usize>) -> Result<NodeId, TapeError> {
        let mut out = base.to_vec();
        for (i, &j) in idx.iter().enumerate() {
            out[j] = self.vals[src][i];
        }
        self.push(Op::Scatter { src, idx }, out)
    }

    pub fn gather_prod(&mut self, v: NodeId, t: &'a IndexTensor) -> Result<NodeId, TapeError> {
        let vv = &self.vals[v];
        let out = t.data.chunks_exact(t.l).map(|row| row.iter().map(|&i| vv[i as usize]).product()).collect();
        self.push(Op::GatherProd { v, t }, out)
    }

    pub fn softor_groups(&mut self, x: NodeId, k: usize, gamma: f64, clamp: bool) -> Result<NodeId, TapeError> {
        let out = self.vals[x]
            .chunks_exact(k)
            .map(|g| {
                let raw = crate::infer::softor_raw(g, gamma);
                if clamp {
                    raw.min(1.0)
                } else {
                    raw
                }
            })
            .collect();
        self.push(Op::Lse { x, k, gamma, clamp }, out)
    }

    pub fn concat_rows(&mut self, parts: Vec<(NodeId, usize)>) -> Result<NodeId, TapeError> {
        let width: usize = parts.iter().map(|p| p.1).sum();
        let rows = parts.first().map(|&(n, w)| self.vals[n].len() / w.max(1)).unwrap_or(0);
        let mut out = Vec::with_capacity(rows * width);
        for j in 0..rows {
            for &(n, w) in &parts {
                out.extend_from_slice(&self.vals[n][j * w..(j + 1) * w]);
            }
        }
        self.push(Op::ConcatRows { parts }, out)
    }

    pub fn softmax_rows(&mut self, x: NodeId, cols: usize) -> Result<NodeId, TapeError> {
        let mut out = self.vals[x].clone();
        for row in out.chunks_exact_mut(cols) {
            let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for e in row.iter_mut() {
                *e = (*e - mx).exp();
                z += *e;
            }
            row.iter_mut().for_each(|e| *e /= z);
        }
        self.push(Op::SoftmaxRows { x, cols }, out)
    }

    pub fn rule_mix(&mut self, w: NodeId, cs: Vec<NodeId>, m: usize) -> Result<NodeId, TapeError> {
        let c = cs.len();
        let g = cs.first().map(|&n| self.vals[n].len()).unwrap_or(0);
        let ws = &self.vals[w];
        let mut out = vec![0.0; g * m];
        for slot in 0..m {
            for (i, &ci) in cs.iter().enumerate() {
                let wi = ws[slot * c + i];
                for (j, &cv) in self.vals[ci].iter().enumerate() {
                    out[j * m + slot] += wi * cv;
                }
            }
        }
        self.push(Op::RuleMix { w, cs, m }, out)
    }

    pub fn pin(&mut self, x: NodeId) -> Result<NodeId, TapeError> {
        let mut out = self.vals[x].clone();
        if out.len() > BOT {
            out[TOP] = 1.0;
            out[BOT] = 0.0;
        }
        self.push(Op::Pin(x), out)
    }

    pub fn pick(&mut self, x: NodeId, idx: Vec<usize>) -> Result<NodeId, TapeError> {
        let out = idx.iter().map(|&i| self.vals[x][i]).collect();
        self.push(Op::Pick { x, idx }, out)
    }

    pub fn bce(&mut self, x: NodeId, targets: Vec<f64>) -> Result<NodeId, TapeError> {
        let loss = self.vals[x].iter().zip(&targets).map(|(&p, &t)| bce(t, p)).sum();
        self.push(Op::Bce { x, targets }, vec![loss])
    }

    /// Gradients of the scalar node `out` with respect to every node.
    pub fn backward(&self, out: NodeId) -> Result<Vec<Vec<f64>>, TapeError> {
        assert_eq!(self.vals[out].len(), 1, "backward needs a scalar output");
        let mut grads: Vec<Vec<f64>> = self.vals.iter().map(|v| vec![0.0; v.len()]).collect();
        grads[out][0] = 1.0;
        for n in (0..=out).rev() {
            let g = std::mem::take(&mut grads[n]);
            if g.iter().all(|&x| x == 0.0) {
                grads[n] = g;
                continue;
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(TapeError::NonFiniteGrad { node: n, op: self.ops[n].name() });
            }
            match &self.ops[n] {
                Op::Leaf | Op::Const => {}
                Op::Sigmoid(x) => {
                    let y = &self.vals[n];
                    for i in 0..g.len() {
                        grads[*x][i] += g[i] * y[i] * (1.0 - y[i]);
                    }
                }
                Op::Scatter { src, idx } => {
                    for (i, &j) in idx.iter().enumerate() {
                        grads[*src][i] += g[j];
                    }
                }
                Op::GatherProd { v, t } => {
                    let vv = &self.vals[*v];
                    let gv = &mut grads[*v];
                    let mut prefix = vec![1.0; t.l + 1];
                    for (r, row) in t.data.chunks_exact(t.l).enumerate() {
                        if g[r] == 0.0 {
                            continue;
                        }
                        for (p, &i) in row.iter().enumerate() {
                            prefix[p + 1] = prefix[p] * vv[i as usize];
                        }
                        let mut suffix = 1.0;
                        for p in (0..t.l).rev() {
                            let i = row[p] as usize;
                            gv[i] += g[r] * prefix[p] * suffix;
                            suffix *= vv[i];
                        }
                    }
                }
                Op::Lse { x, k, gamma, clamp } => {
                    let xv = &self.vals[*x];
                    for (r, grp) in xv.chunks_exact(*k).enumerate() {
                        if g[r] == 0.0 {
                            continue;
                        }
                        let mx = grp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let raw = crate::infer::softor_raw(grp, *gamma);
                        if *clamp && raw > 1.0 {
                            continue;
                        }
                        let e: Vec<f64> = grp.iter().map(|&z| ((z - mx) / gamma).exp()).collect();
                        let s: f64 = e.iter().sum();
                        for (q, ev) in e.iter().enumerate() {
                            grads[*x][r * k + q] += g[r] * ev / s;
                        }
                    }
                }
                Op::ConcatRows { parts } => {
                    let width: usize = parts.iter().map(|p| p.1).sum();
                    let rows = if width == 0 { 0 } else { g.len() / width };
                    for j in 0..rows {
                        let mut off = j * width;
                        for &(p, w) in parts {
                            for q in 0..w {
                                grads[p][j * w + q] += g[off + q];
                            }
                            off += w;
                        }
                    }
                }
                Op::SoftmaxRows { x, cols } => {
                    let y = &self.vals[n];
                    for (r, row) in y.chunks_exact(*cols).enumerate() {
                        let gr = &g[r * cols..(r + 1) * cols];
                        let dot: f64 = row.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for q in 0..*cols {
                            grads[*x][r * cols + q] += row[q] * (gr[q] - dot);
                        }
                    }
                }
                Op::RuleMix { w, cs, m } => {
                    let c = cs.len();
                    for (i, &ci) in cs.iter().enumerate() {
                        for slot in 0..*m {
                            let wi = self.vals[*w][slot * c + i];
                            let mut gw = 0.0;
                            for j in 0..self.vals[ci].len() {
                                let gh = g[j * m + slot];
                                gw += gh * self.vals[ci][j];
                                grads[ci][j] += gh * wi;
                            }
                            grads[*w][slot * c + i] += gw;
                        }
                    }
                }
                Op::Pin(x) => {
                    for (i, &gi) in g.iter().enumerate() {
                        if i != TOP && i != BOT {
                            grads[*x][i] += gi;
                        }
                    }
                }
                Op::Pick { x, idx } => {
                    for (i, &j) in idx.iter().enumerate() {
                        grads[*x][j] += g[i];
                    }
                }
                Op::Bce { x, targets } => {
                    for (i, &t) in targets.iter().enumerate() {
                        let p = self.vals[*x][i];
                        if (BCE_CLIP..=1.0 - BCE_CLIP).contains(&p) {
                            grads[*x][i] += g[0] * (-(t / p) + (1.0 - t) / (1.0 - p));
                        }
                    }
                }
            }
            grads[n] = g;
        }
        Ok(grads)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

/// `−(t·ln p + (1−t)·ln(1−p))` with `p` clipped into `[1e-7, 1−1e-7]`.
pub fn bce(t: f64, p: f64) -> f64 {
    let p = p.clamp(BCE_CLIP, 1.0 - BCE_CLIP);
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}
