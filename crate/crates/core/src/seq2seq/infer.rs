//! Pure inference path: encode, attend, and step the decoder without the
//! autodiff tape. This is what perplexity evaluation, greedy decoding, and
//! beam search run on; with dropout disabled it computes exactly the same
//! function as the taped training forward.

use crate::corpus::vocab::{BOS, EOS};
use crate::error::{Error, Result};
use crate::seq2seq::model::{bridge_name, dec_name, enc_name, Model, BACKWARD, FORWARD};
use crate::tensor::{self, log_softmax_slice, Tensor};

/// Mutable decoder snapshot: per-layer `(h, c)` states, the context vector
/// fed into the next step, and the previously emitted symbol.
#[derive(Clone, Debug)]
pub struct DecoderState {
    pub layers: Vec<(Tensor, Tensor)>,
    pub context: Tensor,
    pub prev_token: usize,
}

/// Encoder output for one input: per-position annotations and the decoder
/// start state (hidden/cell from the encoder finals, zero context, BOS as
/// the previous symbol).
#[derive(Clone, Debug)]
pub struct Encoded {
    pub annotations: Tensor,
    pub initial_state: DecoderState,
}

/// Everything one decode step produces.
#[derive(Clone, Debug)]
pub struct StepOutput {
    /// Normalized next-symbol distribution over the output vocabulary.
    pub distribution: Tensor,
    /// The same distribution in log space.
    pub log_probs: Tensor,
    /// Attention weights over the input positions.
    pub attention: Tensor,
    /// Advanced state. `prev_token` still holds the step's input symbol;
    /// assign the emitted symbol before stepping again.
    pub state: DecoderState,
}

/// Run the encoder over one input sequence, producing one annotation per
/// position (`[n × H]`) and the initial decoder state.
pub fn encode(model: &Model, input: &[usize]) -> Result<Encoded> {
    if input.is_empty() {
        return Err(Error::contract("encode: empty input sequence"));
    }
    let v_in = model.input_vocab.len();
    if let Some(&bad) = input.iter().find(|&&id| id >= v_in) {
        return Err(Error::Index(format!(
            "encode: input id {bad} out of range 0..{v_in}"
        )));
    }
    let h_dim = model.config.hidden_dim;
    let embed = model.params.get("embed.in")?;
    let e_dim = embed.shape()[1];
    let mut layer_inputs: Vec<Vec<f64>> = input
        .iter()
        .map(|&id| embed.data()[id * e_dim..(id + 1) * e_dim].to_vec())
        .collect();

    let mut initial_layers = Vec::with_capacity(model.config.num_layers);
    for l in 0..model.config.num_layers {
        let fw = run_direction(model, l, FORWARD, &layer_inputs)?;
        if model.config.bidirectional_encoder {
            let bw = run_direction(model, l, BACKWARD, &layer_inputs)?;
            let bh_w = model.params.get(&bridge_name(l, "h", "w"))?;
            let bh_b = model.params.get(&bridge_name(l, "h", "b"))?;
            let bc_w = model.params.get(&bridge_name(l, "c", "w"))?;
            let bc_b = model.params.get(&bridge_name(l, "c", "b"))?;
            let mut annotations = Vec::with_capacity(input.len());
            for (f, b) in fw.states.iter().zip(&bw.states) {
                annotations.push(linear(bh_w, bh_b, &concat(f, b)));
            }
            let h0 = linear(bh_w, bh_b, &concat(&fw.final_h, &bw.final_h));
            let c0 = linear(bc_w, bc_b, &concat(&fw.final_c, &bw.final_c));
            initial_layers.push((Tensor::from_vec(h0), Tensor::from_vec(c0)));
            layer_inputs = annotations;
        } else {
            initial_layers.push((
                Tensor::from_vec(fw.final_h.clone()),
                Tensor::from_vec(fw.final_c.clone()),
            ));
            layer_inputs = fw.states;
        }
    }

    let mut flat = Vec::with_capacity(input.len() * h_dim);
    for row in &layer_inputs {
        flat.extend_from_slice(row);
    }
    Ok(Encoded {
        annotations: Tensor::new(vec![input.len(), h_dim], flat)?,
        initial_state: DecoderState {
            layers: initial_layers,
            context: Tensor::zeros(&[h_dim]),
            prev_token: BOS,
        },
    })
}

/// Attention: weights `α_i = softmax_i(s · W_a · h_i)` over annotation rows,
/// context `c = Σ α_i h_i`. Returns `(context, α)`.
pub fn attend(s: &Tensor, annotations: &Tensor, w_a: &Tensor) -> Result<(Tensor, Tensor)> {
    let (ss, ans, ws) = (s.shape(), annotations.shape(), w_a.shape());
    if ss.len() != 1 || ans.len() != 2 || ws != [ss[0], ss[0]] || ans[1] != ss[0] {
        return Err(Error::dimension(format!(
            "attend: state {ss:?}, annotations {ans:?}, weights {ws:?}"
        )));
    }
    let (n, h) = (ans[0], ans[1]);
    // q = s·W_a, then score_i = q·h_i.
    let (sd, wd, ad) = (s.data(), w_a.data(), annotations.data());
    let mut q = vec![0.0; h];
    for (k, &sv) in sd.iter().enumerate() {
        for (j, qv) in q.iter_mut().enumerate() {
            *qv += sv * wd[k * h + j];
        }
    }
    let scores: Vec<f64> = (0..n)
        .map(|i| tensor::dot(&q, &ad[i * h..(i + 1) * h]))
        .collect();
    let alpha = tensor::softmax_slice(&scores);
    let mut context = vec![0.0; h];
    for (i, &w) in alpha.iter().enumerate() {
        for (j, cv) in context.iter_mut().enumerate() {
            *cv += w * ad[i * h + j];
        }
    }
    Ok((Tensor::from_vec(context), Tensor::from_vec(alpha)))
}

/// One decoder step: embed the previous symbol, feed it with the previous
/// context through the decoder stack, attend, and project the new context to
/// an output distribution.
pub fn decode_step(model: &Model, annotations: &Tensor, state: &DecoderState) -> Result<StepOutput> {
    let v_out = model.output_vocab.len();
    if state.prev_token >= v_out {
        return Err(Error::Index(format!(
            "decode_step: previous token {} out of range 0..{v_out}",
            state.prev_token
        )));
    }
    if state.layers.len() != model.config.num_layers {
        return Err(Error::dimension(format!(
            "decode_step: state has {} layers, model has {}",
            state.layers.len(),
            model.config.num_layers
        )));
    }
    let embed = model.params.get("embed.out")?;
    let e_dim = embed.shape()[1];
    let emb = &embed.data()[state.prev_token * e_dim..(state.prev_token + 1) * e_dim];

    let mut x = concat(emb, state.context.data());
    let mut new_layers = Vec::with_capacity(state.layers.len());
    for (l, (h_prev, c_prev)) in state.layers.iter().enumerate() {
        let w_ih = model.params.get(&dec_name(l, "w_ih"))?;
        let w_hh = model.params.get(&dec_name(l, "w_hh"))?;
        let bias = model.params.get(&dec_name(l, "bias"))?;
        let (h, c) = cell_step(&x, h_prev.data(), c_prev.data(), w_ih, w_hh, bias)?;
        x = h.clone();
        new_layers.push((Tensor::from_vec(h), Tensor::from_vec(c)));
    }

    let top = Tensor::from_vec(x);
    let w_a = model.params.get("attn.w")?;
    let (context, attention) = attend(&top, annotations, w_a)?;

    let out_w = model.params.get("out.w")?;
    let out_b = model.params.get("out.b")?;
    let logits = linear(out_w, out_b, context.data());
    let log_probs = log_softmax_slice(&logits);
    let distribution: Vec<f64> = log_probs.iter().map(|&v| v.exp()).collect();

    Ok(StepOutput {
        distribution: Tensor::from_vec(distribution),
        log_probs: Tensor::from_vec(log_probs),
        attention,
        state: DecoderState {
            layers: new_layers,
            context,
            prev_token: state.prev_token,
        },
    })
}

/// Greedy decoding: emit the argmax symbol each step (lowest id on ties)
/// until EOS or `max_len` symbols. EOS itself is not included in the output.
pub fn greedy_decode(model: &Model, input: &[usize], max_len: usize) -> Result<Vec<usize>> {
    let encoded = encode(model, input)?;
    let mut state = encoded.initial_state;
    let mut out = Vec::new();
    for _ in 0..max_len {
        let step = decode_step(model, &encoded.annotations, &state)?;
        let lp = step.log_probs.data();
        let mut best = 0;
        for (id, &v) in lp.iter().enumerate() {
            if v > lp[best] {
                best = id;
            }
        }
        if best == EOS {
            return Ok(out);
        }
        out.push(best);
        state = step.state;
        state.prev_token = best;
    }
    Ok(out)
}

/// Teacher-forced total negative log-likelihood of a reference
/// (content + EOS) given an input, in nats. Shared by perplexity.
pub fn score_reference(model: &Model, input: &[usize], reference: &[usize]) -> Result<f64> {
    if reference.is_empty() || reference.last() != Some(&EOS) {
        return Err(Error::contract(
            "score_reference: reference must be content + EOS",
        ));
    }
    let v_out = model.output_vocab.len();
    if let Some(&bad) = reference.iter().find(|&&id| id >= v_out) {
        return Err(Error::Index(format!(
            "score_reference: target id {bad} out of range 0..{v_out}"
        )));
    }
    let encoded = encode(model, input)?;
    let mut state = encoded.initial_state;
    let mut total = 0.0;
    for &gold in reference {
        let step = decode_step(model, &encoded.annotations, &state)?;
        total -= step.log_probs.data()[gold];
        state = step.state;
        state.prev_token = gold;
    }
    Ok(total)
}

struct DirectionRun {
    /// Hidden state at each input position (position-indexed, not visit-indexed).
    states: Vec<Vec<f64>>,
    final_h: Vec<f64>,
    final_c: Vec<f64>,
}

fn run_direction(
    model: &Model,
    layer: usize,
    dir: &str,
    step_inputs: &[Vec<f64>],
) -> Result<DirectionRun> {
    let h_dim = model.config.hidden_dim;
    let w_ih = model.params.get(&enc_name(layer, dir, "w_ih"))?;
    let w_hh = model.params.get(&enc_name(layer, dir, "w_hh"))?;
    let bias = model.params.get(&enc_name(layer, dir, "bias"))?;

    let n = step_inputs.len();
    let order: Vec<usize> = if dir == FORWARD {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut h = vec![0.0; h_dim];
    let mut c = vec![0.0; h_dim];
    let mut states = vec![Vec::new(); n];
    for &t in &order {
        let (hn, cn) = cell_step(&step_inputs[t], &h, &c, w_ih, w_hh, bias)?;
        h = hn;
        c = cn;
        states[t] = h.clone();
    }
    Ok(DirectionRun {
        states,
        final_h: h,
        final_c: c,
    })
}

/// Unbatched LSTM step over slices, borrowing the weight tensors in place.
/// Same arithmetic as `lstm::lstm_cell` (gate order i, f, g, o).
fn cell_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    w_ih: &Tensor,
    w_hh: &Tensor,
    bias: &Tensor,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let four_h = w_ih.shape()[0];
    let d = w_ih.shape()[1];
    let h = four_h / 4;
    if x.len() != d || h_prev.len() != h || c_prev.len() != h {
        return Err(Error::dimension(format!(
            "cell_step: x {} h {} c {} against D={d}, H={h}",
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let (iw, rw, bd) = (w_ih.data(), w_hh.data(), bias.data());
    let mut acts = vec![0.0; four_h];
    for (r, act) in acts.iter_mut().enumerate() {
        let mut s = bd[r];
        s += tensor::dot(&iw[r * d..(r + 1) * d], x);
        s += tensor::dot(&rw[r * h..(r + 1) * h], h_prev);
        *act = s;
    }
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let mut c_new = vec![0.0; h];
    let mut h_new = vec![0.0; h];
    for j in 0..h {
        let i_g = sig(acts[j]);
        let f_g = sig(acts[h + j]);
        let g_c = acts[2 * h + j].tanh();
        let o_g = sig(acts[3 * h + j]);
        c_new[j] = f_g * c_prev[j] + i_g * g_c;
        h_new[j] = o_g * c_new[j].tanh();
    }
    Ok((h_new, c_new))
}

/// `w[H×D]·x + b` with the product accumulated before the bias, matching the
/// taped `matmul_nt` + `add_bias` composition.
fn linear(w: &Tensor, b: &Tensor, x: &[f64]) -> Vec<f64> {
    let (rows, cols) = (w.shape()[0], w.shape()[1]);
    let (wd, bd) = (w.data(), b.data());
    (0..rows)
        .map(|i| tensor::dot(&wd[i * cols..(i + 1) * cols], x) + bd[i])
        .collect()
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}
