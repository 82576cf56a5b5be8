use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::types::SparseSegment;
use crate::{Error, Result};

/// Number of readings removed from a segment of cardinality `m` at `drop_rate`.
pub fn drop_count(m: usize, drop_rate: f64) -> usize {
    let k = (drop_rate * m as f64).round() as usize;
    k.min(m.saturating_sub(1))
}

/// Removes `round(p·m)` readings chosen uniformly without replacement, always
/// keeping at least one. Survivors keep their original order and values.
pub fn sparsify(segment: &SparseSegment, drop_rate: f64, seed: u64) -> Result<SparseSegment> {
    if !(0.0..1.0).contains(&drop_rate) {
        return Err(Error::Config(format!(
            "drop rate must lie in [0,1), got {drop_rate}"
        )));
    }
    if segment.is_empty() {
        return Err(Error::EmptySegment);
    }
    let m = segment.len();
    let k = drop_count(m, drop_rate);
    if k == 0 {
        return Ok(segment.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = index::sample(&mut rng, m, m - k).into_vec();
    keep.sort_unstable();
    Ok(SparseSegment {
        readings: keep.into_iter().map(|i| segment.readings[i].clone()).collect(),
        ..segment.clone()
    })
}
