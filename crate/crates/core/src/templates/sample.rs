//! Enumeration and seeded sampling of restaurant meaning representations
//! over the lexicon's value lattice, for building controlled synthetic
//! experiments with held-out attribute combinations.

use crate::corpus::mr::{E2eAttribute, E2eMr};
use crate::rng::{SeededPrng, Stream};
use crate::templates::lexicon::Lexicon;

/// Every meaning representation over the lexicon lattice: `name` fixed to
/// the `NAME` placeholder, every `eatType`, and each optional attribute
/// either absent or bound to one of its lexicon values (`near` to the `NEAR`
/// placeholder). Attribute order inside each MR is canonical. Deterministic
/// order: nested loops over the lexicon's file order.
pub fn enumerate_mrs(lexicon: &Lexicon) -> Vec<E2eMr> {
    let options = |attr: E2eAttribute| -> Vec<Option<String>> {
        std::iter::once(None)
            .chain(lexicon.values(attr).iter().cloned().map(Some))
            .collect()
    };
    let eat_types: Vec<String> = lexicon.values(E2eAttribute::EatType).to_vec();
    let foods = options(E2eAttribute::Food);
    let prices = options(E2eAttribute::PriceRange);
    let ratings = options(E2eAttribute::CustomerRating);
    let areas = options(E2eAttribute::Area);
    let families = options(E2eAttribute::FamilyFriendly);
    let nears: [Option<String>; 2] = [None, Some("NEAR".to_string())];

    let mut out = Vec::new();
    for eat_type in &eat_types {
        for food in &foods {
            for price in &prices {
                for rating in &ratings {
                    for area in &areas {
                        for family in &families {
                            for near in &nears {
                                let mut slots = vec![
                                    (E2eAttribute::Name, "NAME".to_string()),
                                    (E2eAttribute::EatType, eat_type.clone()),
                                ];
                                let optional = [
                                    (E2eAttribute::Food, food),
                                    (E2eAttribute::PriceRange, price),
                                    (E2eAttribute::CustomerRating, rating),
                                    (E2eAttribute::Area, area),
                                    (E2eAttribute::FamilyFriendly, family),
                                    (E2eAttribute::Near, near),
                                ];
                                for (attr, value) in optional {
                                    if let Some(v) = value {
                                        slots.push((attr, v.clone()));
                                    }
                                }
                                out.push(E2eMr::new(slots).expect("no duplicate attributes"));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Deterministically shuffle `mrs` and split off the first `held_out` as the
/// evaluation set; the rest is the training pool. The same seed always
/// produces the same split.
pub fn split_held_out(
    mut mrs: Vec<E2eMr>,
    held_out: usize,
    seed: u64,
) -> (Vec<E2eMr>, Vec<E2eMr>) {
    let mut rng = SeededPrng::new(seed, Stream::Shuffle);
    rng.shuffle(&mut mrs);
    let held: Vec<E2eMr> = mrs.drain(..held_out.min(mrs.len())).collect();
    (mrs, held)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn lattice_size_is_the_product_of_option_counts() {
        let mrs = enumerate_mrs(&Lexicon::builtin());
        // 3 eat types × (1+4) foods × (1+2) prices × (1+6) ratings ×
        // (1+2) areas × (1+2) family × (1+1) near.
        assert_eq!(mrs.len(), 3 * 5 * 3 * 7 * 3 * 3 * 2);
        let unique: BTreeSet<String> = mrs.iter().map(|m| m.serialize().unwrap()).collect();
        assert_eq!(unique.len(), mrs.len(), "lattice points must be distinct");
    }

    #[test]
    fn every_lattice_point_has_the_required_attributes() {
        for mr in enumerate_mrs(&Lexicon::builtin()) {
            assert_eq!(mr.get(E2eAttribute::Name), Some("NAME"));
            assert!(mr.contains(E2eAttribute::EatType));
        }
    }

    #[test]
    fn split_is_seed_deterministic_and_disjoint() {
        let mrs = enumerate_mrs(&Lexicon::builtin());
        let (train_a, held_a) = split_held_out(mrs.clone(), 50, 7);
        let (train_b, held_b) = split_held_out(mrs.clone(), 50, 7);
        assert_eq!(held_a, held_b);
        assert_eq!(train_a, train_b);
        assert_eq!(held_a.len(), 50);
        assert_eq!(train_a.len() + held_a.len(), mrs.len());
        let held_set: BTreeSet<String> =
            held_a.iter().map(|m| m.serialize().unwrap()).collect();
        assert!(train_a
            .iter()
            .all(|m| !held_set.contains(&m.serialize().unwrap())));
        // A different seed gives a different held-out set.
        let (_, held_c) = split_held_out(mrs, 50, 8);
        assert_ne!(held_a, held_c);
    }

    #[test]
    fn oversized_held_out_requests_take_everything() {
        let mrs = enumerate_mrs(&Lexicon::builtin());
        let total = mrs.len();
        let (train, held) = split_held_out(mrs, usize::MAX, 1);
        assert!(train.is_empty());
        assert_eq!(held.len(), total);
    }
}
