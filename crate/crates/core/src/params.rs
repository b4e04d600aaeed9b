//! Named parameter storage shared by models, optimizers and checkpoints.
//!
//! Parameters live in a `BTreeMap` so every iteration order (updates, norm
//! computation, serialization) is deterministic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::SeededPrng;
use crate::tensor::Tensor;

#[derive(Clone, Debug, Default)]
pub struct ParameterStore {
    entries: BTreeMap<String, Tensor>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a zero-initialized parameter. The name must be fresh.
    pub fn register(&mut self, name: &str, shape: &[usize]) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::contract(format!(
                "parameter {name:?} registered twice"
            )));
        }
        self.entries.insert(name.to_string(), Tensor::zeros(shape));
        Ok(())
    }

    /// Register a parameter with explicit contents. The name must be fresh.
    pub fn insert(&mut self, name: &str, tensor: Tensor) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::contract(format!(
                "parameter {name:?} registered twice"
            )));
        }
        self.entries.insert(name.to_string(), tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::contract(format!("unknown parameter {name:?}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| Error::contract(format!("unknown parameter {name:?}")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.entries.values().map(Tensor::numel).sum()
    }

    /// Names in sorted (deterministic) order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    /// Fill every parameter with draws from `U(-scale, scale)`.
    ///
    /// Parameters are visited in name order and filled element by element, so
    /// the result depends only on the seed and the registered schema.
    pub fn init_uniform(&mut self, rng: &mut SeededPrng, scale: f64) {
        self.init_uniform_where(rng, scale, |_| true);
    }

    /// Fill parameters whose name satisfies `fill` with draws from
    /// `U(-scale, scale)`; reset the rest to zero without consuming draws.
    pub fn init_uniform_where(
        &mut self,
        rng: &mut SeededPrng,
        scale: f64,
        fill: impl Fn(&str) -> bool,
    ) {
        for (name, t) in self.entries.iter_mut() {
            for v in t.data_mut() {
                *v = if fill(name) {
                    rng.uniform(-scale, scale)
                } else {
                    0.0
                };
            }
        }
    }

    /// Reset every tensor to exactly zero (schema unchanged).
    pub fn zero_all(&mut self) {
        for t in self.entries.values_mut() {
            for v in t.data_mut() {
                *v = 0.0;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.entries
            .values()
            .map(|t| t.data().iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.entries.values().all(Tensor::is_finite)
    }

    /// A gradient store with the same schema, all zeros.
    pub fn zeros_like(&self) -> ParameterStore {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), Tensor::zeros(v.shape())))
            .collect();
        ParameterStore { entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_twice_is_error() {
        let mut p = ParameterStore::new();
        p.register("w", &[2, 2]).unwrap();
        assert!(p.register("w", &[2, 2]).is_err());
    }

    #[test]
    fn deterministic_iteration_order() {
        let mut p = ParameterStore::new();
        p.register("b.z", &[1]).unwrap();
        p.register("a.x", &[1]).unwrap();
        p.register("a.y", &[1]).unwrap();
        let names: Vec<_> = p.names().collect();
        assert_eq!(names, vec!["a.x", "a.y", "b.z"]);
    }

    #[test]
    fn init_uniform_is_seed_deterministic_and_in_range() {
        let build = || {
            let mut p = ParameterStore::new();
            p.register("w", &[3, 3]).unwrap();
            p.register("b", &[3]).unwrap();
            let mut rng = SeededPrng::new(7, crate::rng::Stream::Init);
            p.init_uniform(&mut rng, 0.1);
            p
        };
        let p1 = build();
        let p2 = build();
        assert_eq!(p1.get("w").unwrap(), p2.get("w").unwrap());
        assert_eq!(p1.get("b").unwrap(), p2.get("b").unwrap());
        for (_, t) in p1.iter() {
            assert!(t.data().iter().all(|v| v.abs() <= 0.1));
        }
        // Not all zero.
        assert!(p1.global_norm() > 0.0);
    }

    #[test]
    fn zeros_like_matches_schema() {
        let mut p = ParameterStore::new();
        p.register("w", &[2, 3]).unwrap();
        let g = p.zeros_like();
        assert_eq!(g.get("w").unwrap().shape(), &[2, 3]);
        assert_eq!(g.global_norm(), 0.0);
    }
}
