use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::morph::sample_warp_factor;
use crate::rng::derive_seed;

/// A key image and one partner, with the warping factor fixed at pairing
/// time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphPair {
    pub pair_id: String,
    pub key_id: String,
    pub partner_id: String,
    pub warp: f64,
    pub seed: u64,
}

/// Random halving: the first half (rounded down) is kept bona fide, the
/// rest becomes the morph pool.
pub fn split_bf_attack<R: Rng + ?Sized>(ids: &[String], rng: &mut R) -> (Vec<String>, Vec<String>) {
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(rng);
    let pool = shuffled.split_off(ids.len() / 2);
    (shuffled, pool)
}

/// Draws `n_keys` key images from `pool` without replacement, then for each
/// key `partners_per_key` distinct partners from the non-key remainder.
/// Every pair gets a warping factor from `rng` and a seed derived from
/// `seed_salt` and its id.
pub fn select_pairs<R: Rng + ?Sized>(
    pool: &[String],
    n_keys: usize,
    partners_per_key: usize,
    rng: &mut R,
    seed_salt: u64,
) -> Result<Vec<MorphPair>, PipelineError> {
    let insufficient = || PipelineError::InsufficientPool {
        pool: pool.len(),
        n_keys,
        partners_per_key,
    };
    if n_keys > pool.len() || (n_keys > 0 && pool.len() - n_keys < partners_per_key) {
        return Err(insufficient());
    }

    let key_idx = index::sample(rng, pool.len(), n_keys).into_vec();
    let key_set: HashSet<usize> = key_idx.iter().copied().collect();
    let rest: Vec<usize> = (0..pool.len()).filter(|i| !key_set.contains(i)).collect();

    let mut pairs = Vec::with_capacity(n_keys * partners_per_key);
    for &k in &key_idx {
        for j in index::sample(rng, rest.len(), partners_per_key) {
            let key_id = pool[k].clone();
            let partner_id = pool[rest[j]].clone();
            let pair_id = format!("{key_id}+{partner_id}");
            let warp = sample_warp_factor(rng);
            let seed = derive_seed(seed_salt, &pair_id);
            pairs.push(MorphPair {
                pair_id,
                key_id,
                partner_id,
                warp,
                seed,
            });
        }
    }
    Ok(pairs)
}
