use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{ActivitySpace, SparseSegment};
use crate::{Error, Result};

/// Assignment of every segment to exactly one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn validation_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Stratified `k`-fold split: each class is shuffled with the seed and dealt
/// round-robin across folds. The dealing position carries over between
/// classes so fold sizes stay balanced too.
pub fn stratified_folds(
    segments: &[SparseSegment],
    space: &ActivitySpace,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    let labels: Vec<usize> = segments.iter().map(|s| s.label).collect();
    stratified_folds_from_labels(&labels, space, k, seed)
}

pub fn stratified_folds_from_labels(
    labels: &[usize],
    space: &ActivitySpace,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); space.len()];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or_else(|| Error::Index(format!("label {l} outside activity space")))?
            .push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::Stratification {
                class: space.name(c).unwrap_or("?").to_string(),
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut offset = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            assignments[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan { k, assignments })
}
