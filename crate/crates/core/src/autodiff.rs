//! Define-by-run reverse-mode differentiation on a flat tape.
//!
//! A [`Graph`] owns an append-only arena of nodes; [`Var`] is an index into
//! it. Builder methods evaluate eagerly (the forward value is computed at
//! build time) and record the operation, so [`Graph::backward`] can walk the
//! tape once in reverse and accumulate parameter gradients.
//!
//! Node indices are created in topological order by construction, which makes
//! reverse index order a valid reverse-topological traversal.

use crate::error::{Error, Result};
use crate::params::ParameterStore;
use crate::tensor::{
    self, dot, log_softmax_slice, matmul_into, matmul_nt_into, matmul_tn_into, softmax_slice,
    Tensor,
};

/// Handle to a node in a [`Graph`]. Only valid for the graph that created it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Constant,
    Param(String),
    /// Elementwise sum of two same-shape tensors.
    Add(Var, Var),
    /// Elementwise (Hadamard) product of two same-shape tensors.
    Mul(Var, Var),
    /// Multiply by a fixed scalar.
    Scale(Var, f64),
    /// `x[M×N] + b[N]` broadcast over rows.
    AddBias(Var, Var),
    /// `x[M×N]` with row `i` scaled by `s[i]`.
    ScaleRows(Var, Var),
    /// `a[M×K] · b[K×N]`.
    MatMul(Var, Var),
    /// `a[M×K] · b[N×K]ᵀ` — the natural layout for `[out_dim × in_dim]` weights.
    MatMulNT(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    /// Columns `start..start+len` of a matrix.
    SliceCols(Var, usize, usize),
    /// `[a | b]` along columns.
    ConcatCols(Var, Var),
    /// Row gather: `table[V×E]` indexed by `ids[B]` → `[B×E]`.
    Rows(Var, Vec<usize>),
    /// Stack `n` matrices `[B×H]` into `[B, n, H]`.
    StackSteps(Vec<Var>),
    /// `scores[b,t] = q[b,·] · bank[b,t,·]` for `q[B×H]`, `bank[B,T,H]`.
    AttnScores(Var, Var),
    /// `ctx[b,·] = Σ_t α[b,t] · bank[b,t,·]` for `α[B×T]`, `bank[B,T,H]`.
    AttnContext(Var, Var),
    SoftmaxRows(Var),
    LogSoftmaxRows(Var),
    /// `Σ_b −w[b] · logp[b, target[b]]` → scalar.
    PickNegLogProb(Var, Vec<usize>, Vec<f64>),
    /// Sum of scalar nodes.
    Sum(Vec<Var>),
    /// Sum of every element of one tensor → scalar.
    SumElems(Var),
}

struct Node {
    op: Op,
    value: Tensor,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Forward value of a node.
    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(Op::Constant, value)
    }

    /// Leaf bound to a named parameter; `backward` accumulates its gradient
    /// under the same name.
    pub fn param(&mut self, store: &ParameterStore, name: &str) -> Result<Var> {
        let value = store.get(name)?.clone();
        Ok(self.push(Op::Param(name.to_string()), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).mul(self.value(b))?;
        Ok(self.push(Op::Mul(a, b), value))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let value = self.value(x).scale(c);
        self.push(Op::Scale(x, c), value)
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (xs, bs) = (self.value(x).shape(), self.value(bias).shape());
        if xs.len() != 2 || bs.len() != 1 || xs[1] != bs[0] {
            return Err(Error::dimension(format!(
                "add_bias: shapes {xs:?} + {bs:?}"
            )));
        }
        let (m, n) = (xs[0], xs[1]);
        let mut out = self.value(x).data().to_vec();
        let bd = self.value(bias).data();
        for i in 0..m {
            for j in 0..n {
                out[i * n + j] += bd[j];
            }
        }
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push(Op::AddBias(x, bias), value))
    }

    pub fn scale_rows(&mut self, x: Var, s: Var) -> Result<Var> {
        let (xs, ss) = (self.value(x).shape(), self.value(s).shape());
        if xs.len() != 2 || ss.len() != 1 || xs[0] != ss[0] {
            return Err(Error::dimension(format!(
                "scale_rows: shapes {xs:?} scaled by {ss:?}"
            )));
        }
        let (m, n) = (xs[0], xs[1]);
        let mut out = self.value(x).data().to_vec();
        let sd = self.value(s).data();
        for i in 0..m {
            for v in &mut out[i * n..(i + 1) * n] {
                *v *= sd[i];
            }
        }
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push(Op::ScaleRows(x, s), value))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = tensor::matmul(self.value(a), self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = tensor::matmul_nt(self.value(a), self.value(b))?;
        Ok(self.push(Op::MatMulNT(a, b), value))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| 1.0 / (1.0 + (-v).exp()));
        self.push(Op::Sigmoid(x), value)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::tanh);
        self.push(Op::Tanh(x), value)
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let xs = self.value(x).shape();
        if xs.len() != 2 || start + len > xs[1] || len == 0 {
            return Err(Error::dimension(format!(
                "slice_cols: columns {start}..{} of shape {xs:?}",
                start + len
            )));
        }
        let (m, n) = (xs[0], xs[1]);
        let xd = self.value(x).data();
        let mut out = Vec::with_capacity(m * len);
        for i in 0..m {
            out.extend_from_slice(&xd[i * n + start..i * n + start + len]);
        }
        let value = Tensor::new(vec![m, len], out)?;
        Ok(self.push(Op::SliceCols(x, start, len), value))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ash, bsh) = (self.value(a).shape(), self.value(b).shape());
        if ash.len() != 2 || bsh.len() != 2 || ash[0] != bsh[0] {
            return Err(Error::dimension(format!(
                "concat_cols: shapes {ash:?} | {bsh:?}"
            )));
        }
        let (m, na, nb) = (ash[0], ash[1], bsh[1]);
        let (ad, bd) = (self.value(a).data(), self.value(b).data());
        let mut out = Vec::with_capacity(m * (na + nb));
        for i in 0..m {
            out.extend_from_slice(&ad[i * na..(i + 1) * na]);
            out.extend_from_slice(&bd[i * nb..(i + 1) * nb]);
        }
        let value = Tensor::new(vec![m, na + nb], out)?;
        Ok(self.push(Op::ConcatCols(a, b), value))
    }

    /// Embedding lookup: gather rows of `table[V×E]` by id. Repeated ids are
    /// allowed; their gradients accumulate into the same row.
    pub fn rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let ts = self.value(table).shape();
        if ts.len() != 2 {
            return Err(Error::dimension(format!(
                "rows: table has shape {ts:?}, expected rank 2"
            )));
        }
        let (v, e) = (ts[0], ts[1]);
        if ids.is_empty() {
            return Err(Error::contract("rows: empty id list"));
        }
        if let Some(&bad) = ids.iter().find(|&&id| id >= v) {
            return Err(Error::Index(format!("rows: id {bad} out of range 0..{v}")));
        }
        let td = self.value(table).data();
        let mut out = Vec::with_capacity(ids.len() * e);
        for &id in ids {
            out.extend_from_slice(&td[id * e..(id + 1) * e]);
        }
        let value = Tensor::new(vec![ids.len(), e], out)?;
        Ok(self.push(Op::Rows(table, ids.to_vec()), value))
    }

    /// Stack `n` step matrices `[B×H]` into a bank `[B, n, H]`.
    pub fn stack_steps(&mut self, steps: &[Var]) -> Result<Var> {
        if steps.is_empty() {
            return Err(Error::contract("stack_steps: no steps"));
        }
        let first = self.value(steps[0]).shape().to_vec();
        if first.len() != 2 {
            return Err(Error::dimension(format!(
                "stack_steps: step has shape {first:?}, expected rank 2"
            )));
        }
        let (b, h, n) = (first[0], first[1], steps.len());
        for &s in steps {
            if self.value(s).shape() != first.as_slice() {
                return Err(Error::dimension(format!(
                    "stack_steps: step shapes differ, {:?} vs {:?}",
                    first,
                    self.value(s).shape()
                )));
            }
        }
        let mut out = vec![0.0; b * n * h];
        for (t, &s) in steps.iter().enumerate() {
            let sd = self.value(s).data();
            for bi in 0..b {
                out[(bi * n + t) * h..(bi * n + t) * h + h]
                    .copy_from_slice(&sd[bi * h..(bi + 1) * h]);
            }
        }
        let value = Tensor::new(vec![b, n, h], out)?;
        Ok(self.push(Op::StackSteps(steps.to_vec()), value))
    }

    /// Dot-product scores of a query against every bank position:
    /// `q[B×H]`, `bank[B,T,H]` → `[B×T]`.
    pub fn attn_scores(&mut self, q: Var, bank: Var) -> Result<Var> {
        let (qs, ks) = (self.value(q).shape(), self.value(bank).shape());
        if qs.len() != 2 || ks.len() != 3 || qs[0] != ks[0] || qs[1] != ks[2] {
            return Err(Error::dimension(format!(
                "attn_scores: query {qs:?} against bank {ks:?}"
            )));
        }
        let (b, t, h) = (ks[0], ks[1], ks[2]);
        let (qd, kd) = (self.value(q).data(), self.value(bank).data());
        let mut out = vec![0.0; b * t];
        for bi in 0..b {
            let q_row = &qd[bi * h..(bi + 1) * h];
            for ti in 0..t {
                out[bi * t + ti] = dot(q_row, &kd[(bi * t + ti) * h..(bi * t + ti + 1) * h]);
            }
        }
        let value = Tensor::new(vec![b, t], out)?;
        Ok(self.push(Op::AttnScores(q, bank), value))
    }

    /// Attention-weighted sum of bank positions:
    /// `α[B×T]`, `bank[B,T,H]` → `[B×H]`.
    pub fn attn_context(&mut self, alpha: Var, bank: Var) -> Result<Var> {
        let (als, ks) = (self.value(alpha).shape(), self.value(bank).shape());
        if als.len() != 2 || ks.len() != 3 || als[0] != ks[0] || als[1] != ks[1] {
            return Err(Error::dimension(format!(
                "attn_context: weights {als:?} against bank {ks:?}"
            )));
        }
        let (b, t, h) = (ks[0], ks[1], ks[2]);
        let (ad, kd) = (self.value(alpha).data(), self.value(bank).data());
        let mut out = vec![0.0; b * h];
        for bi in 0..b {
            let o_row = &mut out[bi * h..(bi + 1) * h];
            for ti in 0..t {
                let w = ad[bi * t + ti];
                let k_row = &kd[(bi * t + ti) * h..(bi * t + ti + 1) * h];
                for (ov, &kv) in o_row.iter_mut().zip(k_row) {
                    *ov += w * kv;
                }
            }
        }
        let value = Tensor::new(vec![b, h], out)?;
        Ok(self.push(Op::AttnContext(alpha, bank), value))
    }

    /// Row-wise softmax. A rank-1 input is treated as a single row.
    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let (rows, cols) = row_major(self.value(x))?;
        let xd = self.value(x).data();
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            out.extend(softmax_slice(&xd[i * cols..(i + 1) * cols]));
        }
        let value = Tensor::new(self.value(x).shape().to_vec(), out)?;
        Ok(self.push(Op::SoftmaxRows(x), value))
    }

    /// Row-wise log-softmax. A rank-1 input is treated as a single row.
    pub fn log_softmax_rows(&mut self, x: Var) -> Result<Var> {
        let (rows, cols) = row_major(self.value(x))?;
        let xd = self.value(x).data();
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            out.extend(log_softmax_slice(&xd[i * cols..(i + 1) * cols]));
        }
        let value = Tensor::new(self.value(x).shape().to_vec(), out)?;
        Ok(self.push(Op::LogSoftmaxRows(x), value))
    }

    /// Weighted negative log-likelihood: `Σ_b −w[b]·logp[b, target[b]]`.
    /// Weight 0 removes a (padding) row from both the value and the gradient.
    pub fn pick_neg_log_prob(
        &mut self,
        log_probs: Var,
        targets: &[usize],
        weights: &[f64],
    ) -> Result<Var> {
        let (rows, cols) = row_major(self.value(log_probs))?;
        if targets.len() != rows || weights.len() != rows {
            return Err(Error::dimension(format!(
                "pick_neg_log_prob: {} rows, {} targets, {} weights",
                rows,
                targets.len(),
                weights.len()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= cols) {
            return Err(Error::Index(format!(
                "pick_neg_log_prob: target {bad} out of range 0..{cols}"
            )));
        }
        let ld = self.value(log_probs).data();
        let total: f64 = targets
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(b, (&t, &w))| -w * ld[b * cols + t])
            .sum();
        Ok(self.push(
            Op::PickNegLogProb(log_probs, targets.to_vec(), weights.to_vec()),
            Tensor::scalar(total),
        ))
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, terms: &[Var]) -> Result<Var> {
        if terms.is_empty() {
            return Err(Error::contract("sum: no terms"));
        }
        let mut total = 0.0;
        for &t in terms {
            total += self.value(t).scalar_value()?;
        }
        Ok(self.push(Op::Sum(terms.to_vec()), Tensor::scalar(total)))
    }

    /// Sum of every element of a tensor.
    pub fn sum_elems(&mut self, x: Var) -> Var {
        let total: f64 = self.value(x).data().iter().sum();
        self.push(Op::SumElems(x), Tensor::scalar(total))
    }

    /// Cross-entropy of a 1-D logits vector against one target class.
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Result<Var> {
        let shape = self.value(logits).shape();
        if shape.len() != 1 {
            return Err(Error::dimension(format!(
                "cross_entropy: logits have shape {shape:?}, expected rank 1"
            )));
        }
        let logp = self.log_softmax_rows(logits)?;
        self.pick_neg_log_prob(logp, &[target], &[1.0])
    }

    /// Walk the tape in reverse from a scalar `root`, accumulating `∂root/∂θ`
    /// into `param_grads` (which must already hold every referenced name).
    pub fn backward(&self, root: Var, param_grads: &mut ParameterStore) -> Result<()> {
        if !self.value(root).is_scalar() {
            return Err(Error::contract(format!(
                "backward: root has shape {:?}, expected a scalar",
                self.value(root).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = Vec::new();
        grads.resize_with(self.nodes.len(), || None);
        grads[root.0] = Some(Tensor::scalar(1.0));

        for i in (0..=root.0).rev() {
            let Some(dout) = grads[i].take() else {
                continue;
            };
            match &self.nodes[i].op {
                Op::Constant => {}
                Op::Param(name) => {
                    let g = param_grads.get_mut(name)?;
                    if g.shape() != dout.shape() {
                        return Err(Error::dimension(format!(
                            "backward: gradient for {:?} has shape {:?}, parameter has {:?}",
                            name,
                            dout.shape(),
                            g.shape()
                        )));
                    }
                    for (gv, dv) in g.data_mut().iter_mut().zip(dout.data()) {
                        *gv += dv;
                    }
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, a.0, dout.clone());
                    accumulate(&mut grads, b.0, dout);
                }
                Op::Mul(a, b) => {
                    let da = dout.mul(self.value(*b))?;
                    let db = dout.mul(self.value(*a))?;
                    accumulate(&mut grads, a.0, da);
                    accumulate(&mut grads, b.0, db);
                }
                Op::Scale(x, c) => {
                    accumulate(&mut grads, x.0, dout.scale(*c));
                }
                Op::AddBias(x, bias) => {
                    let [m, n] = dims2(&dout);
                    let mut db = Tensor::zeros(&[n]);
                    for r in 0..m {
                        for j in 0..n {
                            db.data_mut()[j] += dout.data()[r * n + j];
                        }
                    }
                    accumulate(&mut grads, x.0, dout);
                    accumulate(&mut grads, bias.0, db);
                }
                Op::ScaleRows(x, s) => {
                    let [m, n] = dims2(&dout);
                    let sd = self.value(*s).data();
                    let xd = self.value(*x).data();
                    let mut dx = dout.clone();
                    let mut ds = Tensor::zeros(&[m]);
                    for r in 0..m {
                        let row = r * n..(r + 1) * n;
                        for v in &mut dx.data_mut()[row.clone()] {
                            *v *= sd[r];
                        }
                        ds.data_mut()[r] = dot(&dout.data()[row.clone()], &xd[row]);
                    }
                    accumulate(&mut grads, x.0, dx);
                    accumulate(&mut grads, s.0, ds);
                }
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let (m, k) = (av.shape()[0], av.shape()[1]);
                    let n = bv.shape()[1];
                    let mut da = Tensor::zeros(&[m, k]);
                    matmul_nt_into(da.data_mut(), dout.data(), bv.data(), m, n, k);
                    let mut db = Tensor::zeros(&[k, n]);
                    matmul_tn_into(db.data_mut(), av.data(), dout.data(), m, k, n);
                    accumulate(&mut grads, a.0, da);
                    accumulate(&mut grads, b.0, db);
                }
                Op::MatMulNT(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let (m, k) = (av.shape()[0], av.shape()[1]);
                    let n = bv.shape()[0];
                    let mut da = Tensor::zeros(&[m, k]);
                    matmul_into(da.data_mut(), dout.data(), bv.data(), m, n, k);
                    let mut db = Tensor::zeros(&[n, k]);
                    matmul_tn_into(db.data_mut(), dout.data(), av.data(), m, n, k);
                    accumulate(&mut grads, a.0, da);
                    accumulate(&mut grads, b.0, db);
                }
                Op::Sigmoid(x) => {
                    let y = &self.nodes[i].value;
                    let dx = Tensor::new(
                        y.shape().to_vec(),
                        y.data()
                            .iter()
                            .zip(dout.data())
                            .map(|(&yv, &dv)| dv * yv * (1.0 - yv))
                            .collect(),
                    )?;
                    accumulate(&mut grads, x.0, dx);
                }
                Op::Tanh(x) => {
                    let y = &self.nodes[i].value;
                    let dx = Tensor::new(
                        y.shape().to_vec(),
                        y.data()
                            .iter()
                            .zip(dout.data())
                            .map(|(&yv, &dv)| dv * (1.0 - yv * yv))
                            .collect(),
                    )?;
                    accumulate(&mut grads, x.0, dx);
                }
                Op::SliceCols(x, start, len) => {
                    let xs = self.value(*x).shape();
                    let (m, n) = (xs[0], xs[1]);
                    let mut dx = Tensor::zeros(&[m, n]);
                    for r in 0..m {
                        dx.data_mut()[r * n + start..r * n + start + len]
                            .copy_from_slice(&dout.data()[r * len..(r + 1) * len]);
                    }
                    accumulate(&mut grads, x.0, dx);
                }
                Op::ConcatCols(a, b) => {
                    let na = self.value(*a).shape()[1];
                    let nb = self.value(*b).shape()[1];
                    let m = self.value(*a).shape()[0];
                    let n = na + nb;
                    let mut da = Tensor::zeros(&[m, na]);
                    let mut db = Tensor::zeros(&[m, nb]);
                    for r in 0..m {
                        da.data_mut()[r * na..(r + 1) * na]
                            .copy_from_slice(&dout.data()[r * n..r * n + na]);
                        db.data_mut()[r * nb..(r + 1) * nb]
                            .copy_from_slice(&dout.data()[r * n + na..(r + 1) * n]);
                    }
                    accumulate(&mut grads, a.0, da);
                    accumulate(&mut grads, b.0, db);
                }
                Op::Rows(table, ids) => {
                    let ts = self.value(*table).shape();
                    let (v, e) = (ts[0], ts[1]);
                    let mut dt = Tensor::zeros(&[v, e]);
                    for (b, &id) in ids.iter().enumerate() {
                        let src = &dout.data()[b * e..(b + 1) * e];
                        let dst = &mut dt.data_mut()[id * e..(id + 1) * e];
                        for (dv, &sv) in dst.iter_mut().zip(src) {
                            *dv += sv;
                        }
                    }
                    accumulate(&mut grads, table.0, dt);
                }
                Op::StackSteps(steps) => {
                    let sh = self.nodes[i].value.shape();
                    let (b, n, h) = (sh[0], sh[1], sh[2]);
                    for (t, &s) in steps.iter().enumerate() {
                        let mut ds = Tensor::zeros(&[b, h]);
                        for bi in 0..b {
                            ds.data_mut()[bi * h..(bi + 1) * h].copy_from_slice(
                                &dout.data()[(bi * n + t) * h..(bi * n + t + 1) * h],
                            );
                        }
                        accumulate(&mut grads, s.0, ds);
                    }
                }
                Op::AttnScores(q, bank) => {
                    let ks = self.value(*bank).shape();
                    let (b, t, h) = (ks[0], ks[1], ks[2]);
                    let (qd, kd) = (self.value(*q).data(), self.value(*bank).data());
                    let mut dq = Tensor::zeros(&[b, h]);
                    let mut dk = Tensor::zeros(&[b, t, h]);
                    for bi in 0..b {
                        for ti in 0..t {
                            let g = dout.data()[bi * t + ti];
                            let k_row = &kd[(bi * t + ti) * h..(bi * t + ti + 1) * h];
                            let dq_row = &mut dq.data_mut()[bi * h..(bi + 1) * h];
                            for (dqv, &kv) in dq_row.iter_mut().zip(k_row) {
                                *dqv += g * kv;
                            }
                            let q_row = &qd[bi * h..(bi + 1) * h];
                            let dk_row =
                                &mut dk.data_mut()[(bi * t + ti) * h..(bi * t + ti + 1) * h];
                            for (dkv, &qv) in dk_row.iter_mut().zip(q_row) {
                                *dkv += g * qv;
                            }
                        }
                    }
                    accumulate(&mut grads, q.0, dq);
                    accumulate(&mut grads, bank.0, dk);
                }
                Op::AttnContext(alpha, bank) => {
                    let ks = self.value(*bank).shape();
                    let (b, t, h) = (ks[0], ks[1], ks[2]);
                    let (ad, kd) = (self.value(*alpha).data(), self.value(*bank).data());
                    let mut da = Tensor::zeros(&[b, t]);
                    let mut dk = Tensor::zeros(&[b, t, h]);
                    for bi in 0..b {
                        let g_row = &dout.data()[bi * h..(bi + 1) * h];
                        for ti in 0..t {
                            let k_row = &kd[(bi * t + ti) * h..(bi * t + ti + 1) * h];
                            da.data_mut()[bi * t + ti] = dot(g_row, k_row);
                            let w = ad[bi * t + ti];
                            let dk_row =
                                &mut dk.data_mut()[(bi * t + ti) * h..(bi * t + ti + 1) * h];
                            for (dkv, &gv) in dk_row.iter_mut().zip(g_row) {
                                *dkv += w * gv;
                            }
                        }
                    }
                    accumulate(&mut grads, alpha.0, da);
                    accumulate(&mut grads, bank.0, dk);
                }
                Op::SoftmaxRows(x) => {
                    let y = &self.nodes[i].value;
                    let (rows, cols) = row_major(y)?;
                    let mut dx = Tensor::zeros(y.shape());
                    for r in 0..rows {
                        let range = r * cols..(r + 1) * cols;
                        let y_row = &y.data()[range.clone()];
                        let d_row = &dout.data()[range.clone()];
                        let inner = dot(d_row, y_row);
                        for ((dxv, &yv), &dv) in
                            dx.data_mut()[range].iter_mut().zip(y_row).zip(d_row)
                        {
                            *dxv = yv * (dv - inner);
                        }
                    }
                    accumulate(&mut grads, x.0, dx);
                }
                Op::LogSoftmaxRows(x) => {
                    let y = &self.nodes[i].value;
                    let (rows, cols) = row_major(y)?;
                    let mut dx = Tensor::zeros(y.shape());
                    for r in 0..rows {
                        let range = r * cols..(r + 1) * cols;
                        let y_row = &y.data()[range.clone()];
                        let d_row = &dout.data()[range.clone()];
                        let d_sum: f64 = d_row.iter().sum();
                        for ((dxv, &yv), &dv) in
                            dx.data_mut()[range].iter_mut().zip(y_row).zip(d_row)
                        {
                            *dxv = dv - yv.exp() * d_sum;
                        }
                    }
                    accumulate(&mut grads, x.0, dx);
                }
                Op::PickNegLogProb(logp, targets, weights) => {
                    let g = dout.scalar_value()?;
                    let lv = self.value(*logp);
                    let (_, cols) = row_major(lv)?;
                    let mut dl = Tensor::zeros(lv.shape());
                    for (b, (&t, &w)) in targets.iter().zip(weights).enumerate() {
                        dl.data_mut()[b * cols + t] -= w * g;
                    }
                    accumulate(&mut grads, logp.0, dl);
                }
                Op::Sum(terms) => {
                    for &t in terms {
                        accumulate(&mut grads, t.0, dout.clone());
                    }
                }
                Op::SumElems(x) => {
                    let g = dout.scalar_value()?;
                    let dx = Tensor::filled(self.value(*x).shape(), g);
                    accumulate(&mut grads, x.0, dx);
                }
            }
        }
        Ok(())
    }
}

/// Interpret a rank-1 tensor as one row, a rank-2 tensor as its rows.
fn row_major(t: &Tensor) -> Result<(usize, usize)> {
    match t.shape() {
        [n] => Ok((1, *n)),
        [m, n] => Ok((*m, *n)),
        other => Err(Error::dimension(format!(
            "expected rank 1 or 2, got shape {other:?}"
        ))),
    }
}

fn dims2(t: &Tensor) -> [usize; 2] {
    [t.shape()[0], t.shape()[1]]
}

fn accumulate(grads: &mut [Option<Tensor>], idx: usize, delta: Tensor) {
    match &mut grads[idx] {
        Some(g) => {
            for (gv, dv) in g.data_mut().iter_mut().zip(delta.data()) {
                *gv += dv;
            }
        }
        slot @ None => *slot = Some(delta),
    }
}

/// Central-difference gradients of `f` with respect to every parameter.
///
/// `f` must be a pure function of the store contents. Used as the independent
/// oracle for `backward`.
pub fn numeric_gradient<F>(params: &ParameterStore, mut f: F, h: f64) -> Result<ParameterStore>
where
    F: FnMut(&ParameterStore) -> Result<f64>,
{
    let mut work = params.clone();
    let mut grads = params.zeros_like();
    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in &names {
        for i in 0..params.get(name)?.numel() {
            let orig = work.get(name)?.data()[i];
            work.get_mut(name)?.data_mut()[i] = orig + h;
            let fp = f(&work)?;
            work.get_mut(name)?.data_mut()[i] = orig - h;
            let fm = f(&work)?;
            work.get_mut(name)?.data_mut()[i] = orig;
            grads.get_mut(name)?.data_mut()[i] = (fp - fm) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Elementwise relative error `|a−b| / max(|a|, |b|, floor)`, maximized over
/// all parameters. The floor keeps near-zero entries from amplifying
/// finite-difference noise into spurious relative error.
pub fn max_relative_error(a: &ParameterStore, b: &ParameterStore, floor: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (name, ta) in a.iter() {
        let tb = b.get(name)?;
        for (&x, &y) in ta.data().iter().zip(tb.data()) {
            let rel = (x - y).abs() / x.abs().max(y.abs()).max(floor);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
