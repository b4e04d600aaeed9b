//! Batched teacher-forced forward pass on the autodiff tape.
//!
//! One call builds the whole computation for a mini-batch: embed and encode
//! the padded source batch (masking padded positions so each row's state
//! freezes at its own final token), run the input-feeding attentional decoder
//! along the gold target sequence, and accumulate a token-mean
//! cross-entropy. Padded target positions carry zero loss weight; padded
//! source positions are excluded from attention by an additive penalty
//! before the softmax.

use crate::autodiff::{Graph, Var};
use crate::corpus::vocab::{BOS, EOS, PAD};
use crate::error::{Error, Result};
use crate::lstm::lstm_step;
use crate::rng::SeededPrng;
use crate::seq2seq::model::{bridge_name, dec_name, enc_name, Model, BACKWARD, FORWARD};
use crate::tensor::Tensor;

/// Additive score for padded attention positions; large enough that the
/// softmax assigns them exactly zero weight in f64.
const ATTN_PAD_PENALTY: f64 = -1e30;

/// The taped result of one teacher-forced batch.
pub struct ForwardBatch {
    /// Scalar token-mean negative log-likelihood over all scored positions.
    pub loss: Var,
    /// Per decode step, the `[B × V_out]` log-softmax node.
    pub step_log_probs: Vec<Var>,
    /// Number of scored target positions in the batch.
    pub scored_positions: f64,
}

/// Build the teacher-forced graph for a batch of `(input, target)` id
/// sequences. Targets must be the reference content followed by EOS (the
/// leading BOS is fed implicitly as the first decoder input). Pass a PRNG to
/// enable context-vector dropout (training mode); `None` means evaluation.
pub fn forward_batch(
    g: &mut Graph,
    model: &Model,
    inputs: &[Vec<usize>],
    targets: &[Vec<usize>],
    dropout_rng: Option<&mut SeededPrng>,
) -> Result<ForwardBatch> {
    validate_batch(model, inputs, targets)?;
    let b = inputs.len();
    let h_dim = model.config.hidden_dim;
    let layers = model.config.num_layers;

    let t_in = inputs.iter().map(Vec::len).max().unwrap();
    let any_source_padding = inputs.iter().any(|s| s.len() < t_in);

    // Per-position source ids (padded) and keep-masks.
    let mut source_ids: Vec<Vec<usize>> = Vec::with_capacity(t_in);
    let mut keep_masks: Vec<Option<(Var, Var)>> = Vec::with_capacity(t_in);
    for t in 0..t_in {
        source_ids.push(
            inputs
                .iter()
                .map(|s| s.get(t).copied().unwrap_or(PAD))
                .collect(),
        );
        let keep: Vec<f64> = inputs
            .iter()
            .map(|s| if t < s.len() { 1.0 } else { 0.0 })
            .collect();
        if keep.iter().all(|&k| k == 1.0) {
            keep_masks.push(None);
        } else {
            let drop: Vec<f64> = keep.iter().map(|&k| 1.0 - k).collect();
            let keep = g.constant(Tensor::from_vec(keep));
            let drop = g.constant(Tensor::from_vec(drop));
            keep_masks.push(Some((keep, drop)));
        }
    }

    // Encode: embeddings feed layer 0; each layer's annotations feed the next.
    let embed_in = g.param(&model.params, "embed.in")?;
    let mut layer_inputs: Vec<Var> = source_ids
        .iter()
        .map(|ids| g.rows(embed_in, ids))
        .collect::<Result<_>>()?;
    let mut decoder_init: Vec<(Var, Var)> = Vec::with_capacity(layers);
    for l in 0..layers {
        let (fw_states, fw_final) =
            encode_direction(g, model, l, FORWARD, &layer_inputs, &keep_masks, b)?;
        if model.config.bidirectional_encoder {
            let (bw_states, bw_final) =
                encode_direction(g, model, l, BACKWARD, &layer_inputs, &keep_masks, b)?;
            let bh_w = g.param(&model.params, &bridge_name(l, "h", "w"))?;
            let bh_b = g.param(&model.params, &bridge_name(l, "h", "b"))?;
            let bc_w = g.param(&model.params, &bridge_name(l, "c", "w"))?;
            let bc_b = g.param(&model.params, &bridge_name(l, "c", "b"))?;
            let mut annotations = Vec::with_capacity(t_in);
            for t in 0..t_in {
                let cat = g.concat_cols(fw_states[t], bw_states[t])?;
                annotations.push(linear(g, cat, bh_w, bh_b)?);
            }
            let h_cat = g.concat_cols(fw_final.0, bw_final.0)?;
            let c_cat = g.concat_cols(fw_final.1, bw_final.1)?;
            let h0 = linear(g, h_cat, bh_w, bh_b)?;
            let c0 = linear(g, c_cat, bc_w, bc_b)?;
            decoder_init.push((h0, c0));
            layer_inputs = annotations;
        } else {
            decoder_init.push(fw_final);
            layer_inputs = fw_states;
        }
    }
    let bank = g.stack_steps(&layer_inputs)?;

    // Padded source positions get a large negative score before the softmax.
    let attn_bias = if any_source_padding {
        let mut bias = vec![0.0; b * t_in];
        for (bi, s) in inputs.iter().enumerate() {
            for t in s.len()..t_in {
                bias[bi * t_in + t] = ATTN_PAD_PENALTY;
            }
        }
        Some(g.constant(Tensor::new(vec![b, t_in], bias)?))
    } else {
        None
    };

    // Decode along the gold sequence with input feeding.
    let embed_out = g.param(&model.params, "embed.out")?;
    let attn_w = g.param(&model.params, "attn.w")?;
    let out_w = g.param(&model.params, "out.w")?;
    let out_b = g.param(&model.params, "out.b")?;
    let dec_params: Vec<(Var, Var, Var)> = (0..layers)
        .map(|l| {
            Ok((
                g.param(&model.params, &dec_name(l, "w_ih"))?,
                g.param(&model.params, &dec_name(l, "w_hh"))?,
                g.param(&model.params, &dec_name(l, "bias"))?,
            ))
        })
        .collect::<Result<_>>()?;

    let steps = targets.iter().map(Vec::len).max().unwrap();
    let mut states = decoder_init;
    let mut context = g.constant(Tensor::zeros(&[b, h_dim]));
    let mut step_log_probs = Vec::with_capacity(steps);
    let mut step_losses = Vec::with_capacity(steps);
    let mut dropout_rng = dropout_rng;
    let p = model.config.dropout_p;
    for t in 0..steps {
        let prev_ids: Vec<usize> = targets
            .iter()
            .map(|y| {
                if t == 0 {
                    BOS
                } else {
                    y.get(t - 1).copied().unwrap_or(PAD)
                }
            })
            .collect();
        let emb = g.rows(embed_out, &prev_ids)?;
        let mut x = g.concat_cols(emb, context)?;
        for (l, &(w_ih, w_hh, bias)) in dec_params.iter().enumerate() {
            let (hn, cn) = lstm_step(g, x, states[l].0, states[l].1, w_ih, w_hh, bias, h_dim)?;
            states[l] = (hn, cn);
            x = hn;
        }
        let query = g.matmul(x, attn_w)?;
        let mut scores = g.attn_scores(query, bank)?;
        if let Some(bias) = attn_bias {
            scores = g.add(scores, bias)?;
        }
        let alpha = g.softmax_rows(scores)?;
        let mut c_t = g.attn_context(alpha, bank)?;
        if let Some(rng) = dropout_rng.as_deref_mut() {
            if p > 0.0 {
                let scale = 1.0 / (1.0 - p);
                let mask: Vec<f64> = (0..b * h_dim)
                    .map(|_| if rng.bernoulli(p) { 0.0 } else { scale })
                    .collect();
                let mask = g.constant(Tensor::new(vec![b, h_dim], mask)?);
                c_t = g.mul(c_t, mask)?;
            }
        }
        let logits = g.matmul_nt(c_t, out_w)?;
        let logits = g.add_bias(logits, out_b)?;
        let log_probs = g.log_softmax_rows(logits)?;

        let gold: Vec<usize> = targets
            .iter()
            .map(|y| y.get(t).copied().unwrap_or(PAD))
            .collect();
        let weights: Vec<f64> = targets
            .iter()
            .map(|y| if t < y.len() { 1.0 } else { 0.0 })
            .collect();
        step_losses.push(g.pick_neg_log_prob(log_probs, &gold, &weights)?);
        step_log_probs.push(log_probs);
        context = c_t;
    }

    let scored_positions: f64 = targets.iter().map(|y| y.len() as f64).sum();
    let total = g.sum(&step_losses)?;
    let loss = g.scale(total, 1.0 / scored_positions);
    Ok(ForwardBatch {
        loss,
        step_log_probs,
        scored_positions,
    })
}

/// Teacher-forced token-mean cross-entropy for one pair, evaluation mode.
/// The reference must be content + EOS.
pub fn teacher_forced_loss(model: &Model, input: &[usize], reference: &[usize]) -> Result<f64> {
    let mut g = Graph::new();
    let fb = forward_batch(
        &mut g,
        model,
        &[input.to_vec()],
        &[reference.to_vec()],
        None,
    )?;
    g.value(fb.loss).scalar_value()
}

/// Run one encoder direction of one layer over the padded step inputs.
/// Returns the per-position hidden states (index = source position) and the
/// direction's final `(h, c)`, both mask-frozen per row.
fn encode_direction(
    g: &mut Graph,
    model: &Model,
    layer: usize,
    dir: &str,
    step_inputs: &[Var],
    keep_masks: &[Option<(Var, Var)>],
    batch: usize,
) -> Result<(Vec<Var>, (Var, Var))> {
    let h_dim = model.config.hidden_dim;
    let w_ih = g.param(&model.params, &enc_name(layer, dir, "w_ih"))?;
    let w_hh = g.param(&model.params, &enc_name(layer, dir, "w_hh"))?;
    let bias = g.param(&model.params, &enc_name(layer, dir, "bias"))?;

    let t_in = step_inputs.len();
    let order: Vec<usize> = if dir == FORWARD {
        (0..t_in).collect()
    } else {
        (0..t_in).rev().collect()
    };

    let mut h = g.constant(Tensor::zeros(&[batch, h_dim]));
    let mut c = g.constant(Tensor::zeros(&[batch, h_dim]));
    let mut states = vec![h; t_in];
    for &t in &order {
        let (hn, cn) = lstm_step(g, step_inputs[t], h, c, w_ih, w_hh, bias, h_dim)?;
        if let Some((keep, drop)) = keep_masks[t] {
            h = masked_select(g, hn, h, keep, drop)?;
            c = masked_select(g, cn, c, keep, drop)?;
        } else {
            h = hn;
            c = cn;
        }
        states[t] = h;
    }
    Ok((states, (h, c)))
}

/// Per-row select: `keep⊙new + drop⊙old` with `drop = 1 − keep`.
fn masked_select(g: &mut Graph, new: Var, old: Var, keep: Var, drop: Var) -> Result<Var> {
    let kept = g.scale_rows(new, keep)?;
    let held = g.scale_rows(old, drop)?;
    g.add(kept, held)
}

/// `x[B×D] · wᵀ + b` for a weight stored as `[H×D]`.
fn linear(g: &mut Graph, x: Var, w: Var, b: Var) -> Result<Var> {
    let y = g.matmul_nt(x, w)?;
    g.add_bias(y, b)
}

fn validate_batch(model: &Model, inputs: &[Vec<usize>], targets: &[Vec<usize>]) -> Result<()> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::contract(format!(
            "batch of {} inputs against {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let v_out = model.output_vocab.len();
    for (bi, (input, target)) in inputs.iter().zip(targets).enumerate() {
        if input.is_empty() {
            return Err(Error::contract(format!("pair {bi}: empty input sequence")));
        }
        if target.is_empty() {
            return Err(Error::contract(format!(
                "pair {bi}: empty reference (expected content + EOS)"
            )));
        }
        if target.last() != Some(&EOS) || target[..target.len() - 1].contains(&EOS) {
            return Err(Error::contract(format!(
                "pair {bi}: reference must end with its only EOS"
            )));
        }
        if let Some(&bad) = target.iter().find(|&&id| id >= v_out) {
            return Err(Error::Index(format!(
                "pair {bi}: target id {bad} out of range 0..{v_out}"
            )));
        }
    }
    Ok(())
}
