//! Gradient clipping and parameter updates (SGD and Adam).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::ParameterStore;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub adam_betas: (f64, f64),
    pub adam_epsilon: f64,
    pub step_count: u64,
    /// First/second moment per parameter; populated lazily, Adam only.
    moments: BTreeMap<String, (Tensor, Tensor)>,
}

impl OptimizerState {
    pub fn sgd(learning_rate: f64) -> Self {
        OptimizerState {
            kind: OptimizerKind::Sgd,
            learning_rate,
            adam_betas: (0.9, 0.999),
            adam_epsilon: 1e-8,
            step_count: 0,
            moments: BTreeMap::new(),
        }
    }

    pub fn adam(learning_rate: f64) -> Self {
        OptimizerState {
            kind: OptimizerKind::Adam,
            ..OptimizerState::sgd(learning_rate)
        }
    }

    pub fn halve_learning_rate(&mut self) {
        self.learning_rate /= 2.0;
    }

    pub fn has_moments(&self) -> bool {
        !self.moments.is_empty()
    }
}

/// Scale all gradients so their global L2 norm is at most `max_norm`.
/// Returns the applied scale (1.0 when already within bounds).
pub fn clip_global_norm(grads: &mut ParameterStore, max_norm: f64) -> Result<f64> {
    if max_norm <= 0.0 {
        return Err(Error::contract(format!(
            "clip_global_norm: max_norm must be positive, got {max_norm}"
        )));
    }
    let norm = grads.global_norm();
    if norm <= max_norm {
        return Ok(1.0);
    }
    let scale = max_norm / norm;
    for (_, t) in grads.iter_mut() {
        for v in t.data_mut() {
            *v *= scale;
        }
    }
    Ok(scale)
}

/// Apply one update to `params` from `grads`. The caller clips first.
pub fn optimizer_step(
    params: &mut ParameterStore,
    grads: &ParameterStore,
    state: &mut OptimizerState,
) -> Result<()> {
    match state.kind {
        OptimizerKind::Sgd => {
            let lr = state.learning_rate;
            for (name, theta) in params.iter_mut() {
                let g = grads.get(name)?;
                for (tv, gv) in theta.data_mut().iter_mut().zip(g.data()) {
                    *tv -= lr * gv;
                }
            }
            state.step_count += 1;
        }
        OptimizerKind::Adam => {
            state.step_count += 1;
            let t = state.step_count;
            let (b1, b2) = state.adam_betas;
            let eps = state.adam_epsilon;
            let lr = state.learning_rate;
            let bc1 = 1.0 - b1.powi(t as i32);
            let bc2 = 1.0 - b2.powi(t as i32);
            for (name, theta) in params.iter_mut() {
                let g = grads.get(name)?;
                let (m, v) = state
                    .moments
                    .entry(name.to_string())
                    .or_insert_with(|| (Tensor::zeros(theta.shape()), Tensor::zeros(theta.shape())));
                if m.shape() != theta.shape() {
                    return Err(Error::dimension(format!(
                        "optimizer_step: moment shape {:?} for {:?} does not match parameter {:?}",
                        m.shape(),
                        name,
                        theta.shape()
                    )));
                }
                for (((tv, gv), mv), vv) in theta
                    .data_mut()
                    .iter_mut()
                    .zip(g.data())
                    .zip(m.data_mut())
                    .zip(v.data_mut())
                {
                    *mv = b1 * *mv + (1.0 - b1) * gv;
                    *vv = b2 * *vv + (1.0 - b2) * gv * gv;
                    let m_hat = *mv / bc1;
                    let v_hat = *vv / bc2;
                    *tv -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
    Ok(())
}
