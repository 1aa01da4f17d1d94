use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seeding::{self, tag};

/// Shuffled order of `n` samples for one epoch, keyed by `(seed, epoch)`.
pub fn epoch_permutation(n: usize, seed: u64, epoch: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeding::stream(seed, &[tag::SHUFFLE, epoch]));
    order
}

/// Index batches covering every sample exactly once; the last batch may be
/// short.
pub fn batches(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    Ok(epoch_permutation(n, seed, epoch)
        .chunks(batch_size)
        .map(<[usize]>::to_vec)
        .collect())
}
