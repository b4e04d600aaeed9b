//! Shannon entropy of pooled n-gram distributions.
//!
//! All n-grams of every requested order, drawn from every text, are pooled
//! into a single empirical distribution; the result is its entropy in bits.
//! Low values mean the corpus keeps reusing the same phrasing.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::eval_tokens;

/// Entropy in bits of the pooled n-gram distribution of `texts` at the given
/// `orders` (e.g. `&[1]` for word entropy, `&[1, 2, 3]` for a phrase-level
/// summary).
///
/// N-grams never cross text boundaries. Errors if `texts` or `orders` is
/// empty, if any order is zero, or if no text is long enough to produce a
/// single n-gram at any requested order.
pub fn ngram_entropy(texts: &[String], orders: &[usize]) -> Result<f64> {
    if texts.is_empty() {
        return Err(Error::contract("ngram_entropy: empty corpus"));
    }
    if orders.is_empty() {
        return Err(Error::contract("ngram_entropy: no orders requested"));
    }
    if orders.contains(&0) {
        return Err(Error::contract("ngram_entropy: order must be at least 1"));
    }

    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    let mut total = 0usize;
    for text in texts {
        let tokens = eval_tokens(text);
        for &n in orders {
            if tokens.len() >= n {
                for window in tokens.windows(n) {
                    *counts.entry(window.to_vec()).or_insert(0) += 1;
                    total += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::contract(
            "ngram_entropy: corpus has no n-grams at the requested orders",
        ));
    }

    let total = total as f64;
    let entropy = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(entropy)
}
