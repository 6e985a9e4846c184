use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::types::FoldAssignment;

/// Shuffles `0..n` once and deals the shuffled indices round-robin into `k`
/// folds, so fold sizes differ by at most one.
pub fn partition_folds(n: usize, k: usize, rng: &mut SeededRng) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { n, k });
    }
    let perm = rng.permutation(n);
    let mut fold_of = vec![0; n];
    for (slot, &i) in perm.iter().enumerate() {
        fold_of[i] = slot % k;
    }
    FoldAssignment::new(fold_of, k)
}
