//! LSTM cell in two flavors: a pure unbatched recurrence for inference and a
//! taped batched step for training graphs.
//!
//! The four gates live stacked in the `4H` leading dimension of the weight
//! arrays, in the fixed order (input, forget, cell-candidate, output). The
//! order is a checkpoint-portability contract; both flavors and the
//! serialization format rely on it.

use crate::autodiff::{Graph, Var};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct LstmCellParams {
    /// `[4H × D]`, gates stacked (i, f, g, o).
    pub input_weights: Tensor,
    /// `[4H × H]`, gates stacked (i, f, g, o).
    pub recurrent_weights: Tensor,
    /// `[4H]`, gates stacked (i, f, g, o).
    pub bias: Tensor,
}

impl LstmCellParams {
    pub fn new(input_weights: Tensor, recurrent_weights: Tensor, bias: Tensor) -> Result<Self> {
        let p = LstmCellParams {
            input_weights,
            recurrent_weights,
            bias,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(hidden: usize, input: usize) -> Self {
        LstmCellParams {
            input_weights: Tensor::zeros(&[4 * hidden, input]),
            recurrent_weights: Tensor::zeros(&[4 * hidden, hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let iw = self.input_weights.shape();
        let rw = self.recurrent_weights.shape();
        let b = self.bias.shape();
        if iw.len() != 2 || rw.len() != 2 || b.len() != 1 {
            return Err(Error::dimension(format!(
                "lstm params: ranks {iw:?} / {rw:?} / {b:?}"
            )));
        }
        let four_h = iw[0];
        if four_h % 4 != 0 || rw[0] != four_h || b[0] != four_h || rw[1] * 4 != four_h {
            return Err(Error::dimension(format!(
                "lstm params: inconsistent gate dimensions {iw:?} / {rw:?} / {b:?}"
            )));
        }
        Ok(())
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent_weights.shape()[1]
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.shape()[1]
    }
}

#[inline]
fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// One unbatched LSTM step:
/// `c = f⊙c_prev + i⊙g`, `h = o⊙tanh(c)` with `i,f,o = σ(...)`, `g = tanh(...)`.
pub fn lstm_cell(
    x: &Tensor,
    h_prev: &Tensor,
    c_prev: &Tensor,
    p: &LstmCellParams,
) -> Result<(Tensor, Tensor)> {
    p.validate()?;
    let h = p.hidden_size();
    let d = p.input_size();
    if x.shape() != [d] || h_prev.shape() != [h] || c_prev.shape() != [h] {
        return Err(Error::dimension(format!(
            "lstm_cell: x {:?}, h_prev {:?}, c_prev {:?} against params D={d}, H={h}",
            x.shape(),
            h_prev.shape(),
            c_prev.shape()
        )));
    }
    let iw = p.input_weights.data();
    let rw = p.recurrent_weights.data();
    let bias = p.bias.data();
    let xd = x.data();
    let hd = h_prev.data();

    // Pre-activations for all 4H gate rows.
    let mut acts = vec![0.0; 4 * h];
    for (r, act) in acts.iter_mut().enumerate() {
        let mut s = bias[r];
        s += crate::tensor::dot(&iw[r * d..(r + 1) * d], xd);
        s += crate::tensor::dot(&rw[r * h..(r + 1) * h], hd);
        *act = s;
    }

    let mut c_new = vec![0.0; h];
    let mut h_new = vec![0.0; h];
    for j in 0..h {
        let i_g = sigmoid(acts[j]);
        let f_g = sigmoid(acts[h + j]);
        let g_c = acts[2 * h + j].tanh();
        let o_g = sigmoid(acts[3 * h + j]);
        c_new[j] = f_g * c_prev.data()[j] + i_g * g_c;
        h_new[j] = o_g * c_new[j].tanh();
    }
    Ok((Tensor::from_vec(h_new), Tensor::from_vec(c_new)))
}

/// One taped batched LSTM step over `[B×D]` inputs and `[B×H]` states.
///
/// `w_ih [4H×D]`, `w_hh [4H×H]`, `bias [4H]` must follow the (i, f, g, o)
/// gate stacking. Returns `(h, c)` as graph nodes.
pub fn lstm_step(
    g: &mut Graph,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    w_ih: Var,
    w_hh: Var,
    bias: Var,
    hidden: usize,
) -> Result<(Var, Var)> {
    let from_x = g.matmul_nt(x, w_ih)?;
    let from_h = g.matmul_nt(h_prev, w_hh)?;
    let pre = g.add(from_x, from_h)?;
    let pre = g.add_bias(pre, bias)?;

    let i_gate = g.slice_cols(pre, 0, hidden)?;
    let f_gate = g.slice_cols(pre, hidden, hidden)?;
    let g_cand = g.slice_cols(pre, 2 * hidden, hidden)?;
    let o_gate = g.slice_cols(pre, 3 * hidden, hidden)?;

    let i_gate = g.sigmoid(i_gate);
    let f_gate = g.sigmoid(f_gate);
    let g_cand = g.tanh(g_cand);
    let o_gate = g.sigmoid(o_gate);

    let keep = g.mul(f_gate, c_prev)?;
    let write = g.mul(i_gate, g_cand)?;
    let c_new = g.add(keep, write)?;
    let c_act = g.tanh(c_new);
    let h_new = g.mul(o_gate, c_act)?;
    Ok((h_new, c_new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{max_relative_error, numeric_gradient};
    use crate::params::ParameterStore;
    use crate::rng::{SeededPrng, Stream};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_params_zero_states_give_zero_outputs() {
        let p = LstmCellParams::zeros(3, 2);
        let (h, c) = lstm_cell(
            &Tensor::from_vec(vec![5.0, -7.0]),
            &Tensor::zeros(&[3]),
            &Tensor::zeros(&[3]),
            &p,
        )
        .unwrap();
        assert_eq!(h.data(), &[0.0; 3]);
        assert_eq!(c.data(), &[0.0; 3]);
    }

    #[test]
    fn saturated_forget_gate_preserves_cell_state() {
        let hidden = 3;
        let mut p = LstmCellParams::zeros(hidden, 2);
        for j in 0..hidden {
            p.bias.data_mut()[hidden + j] = 1e6;
        }
        let c_prev = Tensor::from_vec(vec![0.3, -1.2, 2.5]);
        let (_, c) = lstm_cell(
            &Tensor::from_vec(vec![0.0, 0.0]),
            &Tensor::zeros(&[hidden]),
            &c_prev,
            &p,
        )
        .unwrap();
        for (cv, pv) in c.data().iter().zip(c_prev.data()) {
            assert_abs_diff_eq!(*cv, *pv, epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_independent_straight_line_oracle() {
        // Oracle: gate-by-gate scalar arithmetic with raw row-major indexing,
        // written without any of the crate's linear-algebra helpers.
        let (hidden, input) = (2, 3);
        let mut rng = SeededPrng::new(77, Stream::Init);
        let mut fill = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect() };
        let iw = fill(4 * hidden * input);
        let rw = fill(4 * hidden * hidden);
        let bias = fill(4 * hidden);
        let x = fill(input);
        let h_prev = fill(hidden);
        let c_prev = fill(hidden);

        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h_want = vec![0.0; hidden];
        let mut c_want = vec![0.0; hidden];
        for j in 0..hidden {
            let mut pre = [0.0f64; 4];
            for (gate, pg) in pre.iter_mut().enumerate() {
                let row = gate * hidden + j;
                let mut s = bias[row];
                for (k, xv) in x.iter().enumerate() {
                    s += iw[row * input + k] * xv;
                }
                for (k, hv) in h_prev.iter().enumerate() {
                    s += rw[row * hidden + k] * hv;
                }
                *pg = s;
            }
            let (ig, fg, gc, og) = (sig(pre[0]), sig(pre[1]), pre[2].tanh(), sig(pre[3]));
            c_want[j] = fg * c_prev[j] + ig * gc;
            h_want[j] = og * c_want[j].tanh();
        }

        let p = LstmCellParams::new(
            Tensor::new(vec![4 * hidden, input], iw).unwrap(),
            Tensor::new(vec![4 * hidden, hidden], rw).unwrap(),
            Tensor::from_vec(bias),
        )
        .unwrap();
        let (h, c) = lstm_cell(
            &Tensor::from_vec(x),
            &Tensor::from_vec(h_prev),
            &Tensor::from_vec(c_prev),
            &p,
        )
        .unwrap();
        for j in 0..hidden {
            assert_abs_diff_eq!(h.data()[j], h_want[j], epsilon = 1e-12);
            assert_abs_diff_eq!(c.data()[j], c_want[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn taped_step_matches_pure_cell() {
        let (hidden, input) = (4, 3);
        let mut params = ParameterStore::new();
        params.register("w_ih", &[4 * hidden, input]).unwrap();
        params.register("w_hh", &[4 * hidden, hidden]).unwrap();
        params.register("bias", &[4 * hidden]).unwrap();
        let mut rng = SeededPrng::new(5, Stream::Init);
        params.init_uniform(&mut rng, 0.8);

        let x = Tensor::from_vec(vec![0.4, -0.2, 0.9]);
        let h0 = Tensor::from_vec(vec![0.1, -0.3, 0.2, 0.0]);
        let c0 = Tensor::from_vec(vec![-0.5, 0.6, 0.0, 1.1]);

        let p = LstmCellParams::new(
            params.get("w_ih").unwrap().clone(),
            params.get("w_hh").unwrap().clone(),
            params.get("bias").unwrap().clone(),
        )
        .unwrap();
        let (h_pure, c_pure) = lstm_cell(&x, &h0, &c0, &p).unwrap();

        let mut g = Graph::new();
        let xv = g.constant(Tensor::new(vec![1, input], x.data().to_vec()).unwrap());
        let hv = g.constant(Tensor::new(vec![1, hidden], h0.data().to_vec()).unwrap());
        let cv = g.constant(Tensor::new(vec![1, hidden], c0.data().to_vec()).unwrap());
        let w_ih = g.param(&params, "w_ih").unwrap();
        let w_hh = g.param(&params, "w_hh").unwrap();
        let bias = g.param(&params, "bias").unwrap();
        let (hn, cn) = lstm_step(&mut g, xv, hv, cv, w_ih, w_hh, bias, hidden).unwrap();

        for j in 0..hidden {
            assert_abs_diff_eq!(g.value(hn).data()[j], h_pure.data()[j], epsilon = 1e-12);
            assert_abs_diff_eq!(g.value(cn).data()[j], c_pure.data()[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn taped_step_gradients_match_finite_differences() {
        let (hidden, input, batch) = (3, 2, 2);
        let mut params = ParameterStore::new();
        params.register("w_ih", &[4 * hidden, input]).unwrap();
        params.register("w_hh", &[4 * hidden, hidden]).unwrap();
        params.register("bias", &[4 * hidden]).unwrap();
        let mut rng = SeededPrng::new(6, Stream::Init);
        params.init_uniform(&mut rng, 0.5);

        let build = |p: &ParameterStore, g: &mut Graph| -> Result<Var> {
            let x = g.constant(Tensor::new(
                vec![batch, input],
                vec![0.3, -0.8, 1.2, 0.05],
            )?);
            let h0 = g.constant(Tensor::zeros(&[batch, hidden]));
            let c0 = g.constant(Tensor::zeros(&[batch, hidden]));
            let w_ih = g.param(p, "w_ih")?;
            let w_hh = g.param(p, "w_hh")?;
            let bias = g.param(p, "bias")?;
            let (h1, c1) = lstm_step(g, x, h0, c0, w_ih, w_hh, bias, hidden)?;
            // Second step re-consuming the same weights exercises
            // through-time accumulation.
            let (h2, _) = lstm_step(g, x, h1, c1, w_ih, w_hh, bias, hidden)?;
            let sq = g.mul(h2, h2)?;
            Ok(g.sum_elems(sq))
        };

        let mut g = Graph::new();
        let loss = build(&params, &mut g).unwrap();
        let mut analytic = params.zeros_like();
        g.backward(loss, &mut analytic).unwrap();
        let numeric = numeric_gradient(
            &params,
            |p| {
                let mut g = Graph::new();
                let v = build(p, &mut g)?;
                g.value(v).scalar_value()
            },
            1e-5,
        )
        .unwrap();
        let err = max_relative_error(&analytic, &numeric, 1e-4).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn shape_mismatch_is_a_dimension_error() {
        let p = LstmCellParams::zeros(3, 2);
        let bad = lstm_cell(
            &Tensor::from_vec(vec![1.0, 2.0, 3.0]),
            &Tensor::zeros(&[3]),
            &Tensor::zeros(&[3]),
            &p,
        );
        assert!(bad.is_err());
    }
}
