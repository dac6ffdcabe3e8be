//! Exact sampling from a mutable discrete weight vector.
//!
//! A Fenwick (binary indexed) tree over the weights gives O(log n) draws and
//! O(log n) single-weight updates, which is what retraining policies need on
//! spaces with millions of ids. Alias tables are deliberately not used: they
//! are O(1) to sample but O(n) to mutate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::knowledge::ArtifactId;
use crate::numeric::compensated_sum;

/// Relative drift of the cached total that triggers a full rebuild.
const DRIFT_REBUILD_THRESHOLD: f64 = 1e-9;
/// Updates between drift checks.
const DRIFT_CHECK_INTERVAL: u64 = 1024;

/// Weighted sampler over artifact ids `0..n`.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    weights: Vec<f64>,
    /// 1-based Fenwick tree; tree[i] covers weights[i - lsb(i)..i].
    tree: Vec<f64>,
    total: f64,
    updates_since_check: u64,
}

#[inline]
fn lsb(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl WeightedSampler {
    /// Builds a sampler; fails when no weight is positive.
    pub fn build(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(
                "weights",
                format!("weights must be finite and non-negative, got {bad}"),
            ));
        }
        let total = compensated_sum(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        let tree = Self::build_tree(&weights);
        Ok(WeightedSampler {
            weights,
            tree,
            total,
            updates_since_check: 0,
        })
    }

    fn build_tree(weights: &[f64]) -> Vec<f64> {
        let n = weights.len();
        let mut tree = vec![0.0f64; n + 1];
        tree[1..=n].copy_from_slice(weights);
        for i in 1..=n {
            let j = i + lsb(i);
            if j <= n {
                tree[j] += tree[i];
            }
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn weight(&self, id: ArtifactId) -> f64 {
        self.weights[id.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cached sum of all weights.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Replaces the weight of `id`, keeping the total in sync incrementally.
    pub fn update_weight(&mut self, id: ArtifactId, w: f64) -> Result<()> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::invalid(
                "w",
                format!("weight must be finite and non-negative, got {w}"),
            ));
        }
        if id.0 >= self.weights.len() {
            return Err(Error::invalid(
                "id",
                format!("id {} out of range 0..{}", id.0, self.weights.len()),
            ));
        }
        let delta = w - self.weights[id.0];
        self.weights[id.0] = w;
        let mut i = id.0 + 1;
        while i <= self.weights.len() {
            self.tree[i] += delta;
            i += lsb(i);
        }
        self.total += delta;

        self.updates_since_check += 1;
        if self.updates_since_check >= DRIFT_CHECK_INTERVAL {
            self.updates_since_check = 0;
            let exact = compensated_sum(self.weights.iter().copied());
            if exact > 0.0 && ((self.total - exact) / exact).abs() > DRIFT_REBUILD_THRESHOLD {
                self.rebuild();
            } else {
                self.total = exact;
            }
        }
        Ok(())
    }

    /// Recomputes the tree and total from the raw weights.
    pub fn rebuild(&mut self) {
        self.tree = Self::build_tree(&self.weights);
        self.total = compensated_sum(self.weights.iter().copied());
    }

    /// Draws one id with probability weight/total.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ArtifactId> {
        if !(self.total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        let u: f64 = rng.gen::<f64>() * self.total;
        Ok(self.find_by_prefix(u))
    }

    /// Largest id whose prefix sum is <= u; zero-weight ids are never returned
    /// for u in [0, total).
    fn find_by_prefix(&self, u: f64) -> ArtifactId {
        let n = self.weights.len();
        let mut pos = 0usize;
        let mut rem = u;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rem {
                rem -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // pos counts fully consumed items; it is the 0-based chosen id.
        let mut id = pos.min(n - 1);
        // Guard against rounding landing on a zero weight.
        if self.weights[id] == 0.0 {
            id = self.nearest_positive(id);
        }
        ArtifactId(id)
    }

    fn nearest_positive(&self, from: usize) -> usize {
        if let Some(id) = (0..from).rev().find(|&i| self.weights[i] > 0.0) {
            return id;
        }
        (from + 1..self.weights.len())
            .find(|&i| self.weights[i] > 0.0)
            .expect("total > 0 implies a positive weight exists")
    }

    /// Draws `n` ids; deterministic given the rng state.
    pub fn sample_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<ArtifactId>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        if !(self.total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        let mut batch = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen::<f64>() * self.total;
            batch.push(self.find_by_prefix(u));
        }
        Ok(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    #[test]
    fn build_rejects_degenerate_weights() {
        assert!(matches!(
            WeightedSampler::build(vec![0.0, 0.0]),
            Err(Error::DegenerateDistribution)
        ));
        assert!(WeightedSampler::build(vec![-1.0, 2.0]).is_err());
        assert!(WeightedSampler::build(vec![f64::NAN]).is_err());
    }

    #[test]
    fn single_support_always_drawn() {
        let sampler = WeightedSampler::build(vec![1.0]).unwrap();
        let mut rng = replicate_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sampler.sample(&mut rng).unwrap(), ArtifactId(0));
        }
    }

    #[test]
    fn zero_weight_excluded() {
        let sampler = WeightedSampler::build(vec![1.0, 0.0]).unwrap();
        let mut rng = replicate_rng(2, 0);
        for _ in 0..10_000 {
            assert_eq!(sampler.sample(&mut rng).unwrap(), ArtifactId(0));
        }
        let sampler = WeightedSampler::build(vec![0.0, 1.0]).unwrap();
        let batch = sampler.sample_batch(5, &mut rng).unwrap();
        assert_eq!(batch, vec![ArtifactId(1); 5]);
    }

    #[test]
    fn empty_batch() {
        let sampler = WeightedSampler::build(vec![1.0]).unwrap();
        let mut rng = replicate_rng(3, 0);
        assert!(sampler.sample_batch(0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn batches_deterministic_per_seed() {
        let sampler = WeightedSampler::build(vec![1.0, 1.0]).unwrap();
        let a = sampler
            .sample_batch(10, &mut replicate_rng(7, 0))
            .unwrap();
        let b = sampler
            .sample_batch(10, &mut replicate_rng(7, 0))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_frequencies_match_weights() {
        // weights [1, 1, 2]: expect (0.25, 0.25, 0.5) within 3 sigma.
        let sampler = WeightedSampler::build(vec![1.0, 1.0, 2.0]).unwrap();
        let mut rng = replicate_rng(11, 0);
        let n = 1_000_000usize;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            counts[sampler.sample(&mut rng).unwrap().0] += 1;
        }
        for (count, p) in counts.iter().zip([0.25, 0.25, 0.5]) {
            let freq = *count as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "freq {freq} vs {p} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn update_weight_moves_all_mass() {
        let mut sampler = WeightedSampler::build(vec![1.0, 0.0]).unwrap();
        sampler.update_weight(ArtifactId(0), 0.0).unwrap();
        sampler.update_weight(ArtifactId(1), 3.0).unwrap();
        let mut rng = replicate_rng(13, 0);
        for _ in 0..1000 {
            assert_eq!(sampler.sample(&mut rng).unwrap(), ArtifactId(1));
        }
    }

    #[test]
    fn update_weight_rejects_bad_input() {
        let mut sampler = WeightedSampler::build(vec![1.0, 1.0]).unwrap();
        assert!(sampler.update_weight(ArtifactId(0), -0.5).is_err());
        assert!(sampler.update_weight(ArtifactId(5), 1.0).is_err());
    }

    #[test]
    fn updated_sampler_matches_fresh_build() {
        // Apply a random update sequence, then compare empirical frequencies
        // against a sampler built directly from the final weights.
        use rand::Rng;
        let n_ids = 64usize;
        let mut rng = replicate_rng(17, 0);
        let mut sampler = WeightedSampler::build(vec![1.0; n_ids]).unwrap();
        let mut weights = vec![1.0f64; n_ids];
        for _ in 0..5000 {
            let id = rng.gen_range(0..n_ids);
            let w = rng.gen::<f64>() * 4.0;
            weights[id] = w;
            sampler.update_weight(ArtifactId(id), w).unwrap();
        }
        let fresh = WeightedSampler::build(weights.clone()).unwrap();

        let draws = 1_000_000usize;
        let mut updated_counts = vec![0u64; n_ids];
        let mut fresh_counts = vec![0u64; n_ids];
        let mut rng_a = replicate_rng(17, 1);
        let mut rng_b = replicate_rng(17, 2);
        for _ in 0..draws {
            updated_counts[sampler.sample(&mut rng_a).unwrap().0] += 1;
            fresh_counts[fresh.sample(&mut rng_b).unwrap().0] += 1;
        }
        let total: f64 = weights.iter().sum();
        for id in 0..n_ids {
            let p = weights[id] / total;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt().max(1e-9);
            let f_updated = updated_counts[id] as f64 / draws as f64;
            let f_fresh = fresh_counts[id] as f64 / draws as f64;
            assert!((f_updated - p).abs() <= 4.0 * sigma, "id {id}");
            assert!((f_fresh - p).abs() <= 4.0 * sigma, "id {id}");
        }
    }

    #[test]
    fn cached_total_does_not_drift() {
        use rand::Rng;
        let n_ids = 512usize;
        let mut rng = replicate_rng(19, 0);
        let mut sampler = WeightedSampler::build(vec![1.0; n_ids]).unwrap();
        for _ in 0..1_000_000 {
            let id = rng.gen_range(0..n_ids);
            let w = rng.gen::<f64>();
            sampler.update_weight(ArtifactId(id), w).unwrap();
        }
        let exact = compensated_sum(sampler.weights().iter().copied());
        assert!(
            ((sampler.total() - exact) / exact).abs() <= 1e-6,
            "total {} vs exact {}",
            sampler.total(),
            exact
        );
    }

    #[test]
    fn chi_square_goodness_of_fit() {
        // 100-outcome Zipf-ish distribution, 1e6 draws per seed. The 0.001
        // critical value for 99 degrees of freedom is 148.230 (chi-square
        // inverse CDF); at least 95% of the fixed seeds must pass.
        const CRITICAL: f64 = 148.230;
        let weights: Vec<f64> = (1..=100).map(|j| 1.0 / j as f64).collect();
        let total: f64 = compensated_sum(weights.iter().copied());
        let sampler = WeightedSampler::build(weights.clone()).unwrap();

        let seeds: Vec<u64> = (0..20).collect();
        let draws = 1_000_000usize;
        let mut passes = 0;
        for &seed in &seeds {
            let mut rng = replicate_rng(23, seed);
            let mut counts = vec![0u64; 100];
            for _ in 0..draws {
                counts[sampler.sample(&mut rng).unwrap().0] += 1;
            }
            let stat: f64 = counts
                .iter()
                .zip(&weights)
                .map(|(c, w)| {
                    let expected = w / total * draws as f64;
                    let diff = *c as f64 - expected;
                    diff * diff / expected
                })
                .sum();
            if stat < CRITICAL {
                passes += 1;
            }
        }
        assert!(
            passes * 100 >= seeds.len() * 95,
            "only {passes}/{} seeds passed",
            seeds.len()
        );
    }
}
