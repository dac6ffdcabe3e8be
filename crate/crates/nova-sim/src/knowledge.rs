//! The ambient candidate space: valid artifacts, their ideal difficulty
//! distribution, and candidate lengths.
//!
//! Valid artifacts occupy the contiguous id prefix `0..n_valid`, rank-ordered
//! by decreasing ideal probability; invalid candidates take the remaining ids.
//! This makes validity tests and rank lookups O(1).

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Index into the ambient candidate space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtifactId(pub usize);

impl ArtifactId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for ArtifactId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense set of artifact ids with O(1) membership and a cached count.
///
/// Iteration order is ascending id, which keeps every consumer deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdSet {
    bits: Vec<bool>,
    len: usize,
}

impl IdSet {
    pub fn with_capacity(n: usize) -> Self {
        IdSet {
            bits: vec![false; n],
            len: 0,
        }
    }

    #[inline]
    pub fn contains(&self, id: ArtifactId) -> bool {
        self.bits.get(id.0).copied().unwrap_or(false)
    }

    /// Returns true when the id was not already present.
    pub fn insert(&mut self, id: ArtifactId) -> bool {
        if id.0 >= self.bits.len() {
            self.bits.resize(id.0 + 1, false);
        }
        if self.bits[id.0] {
            false
        } else {
            self.bits[id.0] = true;
            self.len += 1;
            true
        }
    }

    /// Returns true when the id was present.
    pub fn remove(&mut self, id: ArtifactId) -> bool {
        if self.contains(id) {
            self.bits[id.0] = false;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ascending-id iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = ArtifactId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| ArtifactId(i))
    }
}

impl FromIterator<ArtifactId> for IdSet {
    fn from_iter<T: IntoIterator<Item = ArtifactId>>(iter: T) -> Self {
        let mut set = IdSet::default();
        for id in iter {
            set.insert(id);
        }
        set
    }
}

/// Above this many valid artifacts the space is treated as a stand-in for an
/// infinite domain, where a pure power law needs alpha > 1 to normalize.
pub const INFINITE_MODE_THRESHOLD: usize = 10_000_000;

/// Ambient artifact universe with its valid subset and ideal Zipf
/// difficulty distribution.
#[derive(Debug, Clone)]
pub struct KnowledgeSpace {
    n_total: usize,
    n_valid: usize,
    alpha: f64,
    ideal_probs: Vec<f64>,
    lengths: Vec<f64>,
    improper_tail: bool,
}

impl KnowledgeSpace {
    #[inline]
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    #[inline]
    pub fn n_valid(&self) -> usize {
        self.n_valid
    }

    #[inline]
    pub fn n_invalid(&self) -> usize {
        self.n_total - self.n_valid
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True when alpha <= 1: the matching infinite power law would not
    /// normalize, but finite truncations are still usable.
    #[inline]
    pub fn improper_tail(&self) -> bool {
        self.improper_tail
    }

    #[inline]
    pub fn is_valid(&self, id: ArtifactId) -> bool {
        id.0 < self.n_valid
    }

    #[inline]
    pub fn in_range(&self, id: ArtifactId) -> bool {
        id.0 < self.n_total
    }

    /// Ideal probability P(k) of a valid artifact; zero for invalid ids.
    #[inline]
    pub fn ideal_prob(&self, id: ArtifactId) -> f64 {
        self.ideal_probs.get(id.0).copied().unwrap_or(0.0)
    }

    pub fn ideal_probs(&self) -> &[f64] {
        &self.ideal_probs
    }

    /// Candidate length l(k), used by the verification cost model.
    #[inline]
    pub fn length(&self, id: ArtifactId) -> f64 {
        self.lengths[id.0]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Replaces the per-artifact lengths (must all be >= 1).
    pub fn set_lengths(&mut self, lengths: Vec<f64>) -> Result<()> {
        if lengths.len() != self.n_total {
            return Err(Error::invalid(
                "lengths",
                format!("need {} entries, got {}", self.n_total, lengths.len()),
            ));
        }
        if lengths.iter().any(|&l| !(l >= 1.0)) {
            return Err(Error::invalid("lengths", "every length must be >= 1"));
        }
        self.lengths = lengths;
        Ok(())
    }

    pub fn valid_ids(&self) -> impl Iterator<Item = ArtifactId> {
        (0..self.n_valid).map(ArtifactId)
    }

    pub fn invalid_ids(&self) -> impl Iterator<Item = ArtifactId> {
        (self.n_valid..self.n_total).map(ArtifactId)
    }
}

/// Default length rule: rank j (1-based) gets 1 + floor(log2(j + 1));
/// invalid artifacts apply the same rule over their local index.
pub fn default_lengths(n_valid: usize, n_invalid: usize) -> Vec<f64> {
    fn rule(rank: usize) -> f64 {
        1.0 + ((rank + 1) as f64).log2().floor()
    }
    let mut lengths = Vec::with_capacity(n_valid + n_invalid);
    lengths.extend((1..=n_valid).map(rule));
    lengths.extend((1..=n_invalid).map(rule));
    lengths
}

/// Builds a space whose valid part follows a Zipf law with the given exponent.
///
/// P(rank j) = j^-alpha / sum_i i^-alpha for j = 1..=n_valid. For finite
/// spaces alpha <= 1 is allowed and flagged as an improper tail; in infinite
/// mode (n_valid above [`INFINITE_MODE_THRESHOLD`]) it is rejected.
pub fn build_zipf_space(n_valid: usize, n_invalid: usize, alpha: f64) -> Result<KnowledgeSpace> {
    build_zipf_space_with_limit(n_valid, n_invalid, alpha, INFINITE_MODE_THRESHOLD)
}

/// Same as [`build_zipf_space`] with an explicit infinite-mode threshold.
pub fn build_zipf_space_with_limit(
    n_valid: usize,
    n_invalid: usize,
    alpha: f64,
    infinite_threshold: usize,
) -> Result<KnowledgeSpace> {
    if n_valid == 0 {
        return Err(Error::EmptyDomain);
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    let improper_tail = alpha <= 1.0;
    if improper_tail && n_valid > infinite_threshold {
        return Err(Error::invalid(
            "alpha",
            format!("alpha <= 1 is not normalizable over {n_valid} artifacts (infinite mode)"),
        ));
    }

    let raw: Vec<f64> = (1..=n_valid).map(|j| (j as f64).powf(-alpha)).collect();
    let norm = compensated_sum(raw.iter().copied());
    let ideal_probs: Vec<f64> = raw.into_iter().map(|w| w / norm).collect();

    Ok(KnowledgeSpace {
        n_total: n_valid + n_invalid,
        n_valid,
        alpha,
        ideal_probs,
        lengths: default_lengths(n_valid, n_invalid),
        improper_tail,
    })
}

/// Renormalized conditional distribution over the undiscovered valid artifacts.
#[derive(Debug, Clone)]
pub struct TailDistribution {
    support: Vec<ArtifactId>,
    probs: Vec<f64>,
}

impl TailDistribution {
    pub fn support(&self) -> &[ArtifactId] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob_of(&self, id: ArtifactId) -> Option<f64> {
        self.support
            .binary_search(&id)
            .ok()
            .map(|pos| self.probs[pos])
    }
}

/// Ideal conditional tail over `K \ discovered`.
///
/// Fails with [`Error::EmptyTail`] when every valid artifact is discovered:
/// the exploration frontier is exhausted.
pub fn conditional_tail(space: &KnowledgeSpace, discovered: &IdSet) -> Result<TailDistribution> {
    let mut support = Vec::new();
    let mut raw = Vec::new();
    for id in space.valid_ids() {
        if !discovered.contains(id) {
            support.push(id);
            raw.push(space.ideal_prob(id));
        }
    }
    if support.is_empty() {
        return Err(Error::EmptyTail);
    }
    let norm = compensated_sum(raw.iter().copied());
    for p in raw.iter_mut() {
        *p /= norm;
    }
    Ok(TailDistribution {
        support,
        probs: raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn single_element_space() {
        let space = build_zipf_space(1, 0, 2.0).unwrap();
        assert_eq!(space.ideal_probs(), &[1.0]);
        assert!(!space.improper_tail());
    }

    #[test]
    fn alpha_one_is_flagged_improper() {
        let space = build_zipf_space(2, 0, 1.0).unwrap();
        assert!(space.improper_tail());
        assert_close(space.ideal_prob(ArtifactId(0)), 2.0 / 3.0, 1e-12);
        assert_close(space.ideal_prob(ArtifactId(1)), 1.0 / 3.0, 1e-12);
    }

    #[test]
    fn three_valid_two_invalid_alpha_two() {
        // Brute-force normalization of 1, 1/4, 1/9.
        let space = build_zipf_space(3, 2, 2.0).unwrap();
        assert_eq!(space.n_total(), 5);
        assert_close(space.ideal_prob(ArtifactId(0)), 36.0 / 49.0, 1e-12);
        assert_close(space.ideal_prob(ArtifactId(1)), 9.0 / 49.0, 1e-12);
        assert_close(space.ideal_prob(ArtifactId(2)), 4.0 / 49.0, 1e-12);
        assert!(space.is_valid(ArtifactId(2)));
        assert!(!space.is_valid(ArtifactId(3)));
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(matches!(build_zipf_space(0, 5, 2.0), Err(Error::EmptyDomain)));
        assert!(matches!(
            build_zipf_space(5, 0, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            build_zipf_space(5, 0, -1.0),
            Err(Error::InvalidParameter { .. })
        ));
        // Infinite mode rejects alpha <= 1.
        assert!(build_zipf_space_with_limit(101, 0, 1.0, 100).is_err());
        assert!(build_zipf_space_with_limit(101, 0, 1.5, 100).is_ok());
    }

    #[test]
    fn probs_normalized_positive_nonincreasing() {
        for &(n, alpha) in &[(10usize, 0.5f64), (1000, 1.0), (5000, 1.5), (2000, 3.0)] {
            let space = build_zipf_space(n, 7, alpha).unwrap();
            let sum = compensated_sum(space.ideal_probs().iter().copied());
            assert!((sum - 1.0).abs() <= 1e-9, "alpha={alpha} sum={sum}");
            let probs = space.ideal_probs();
            assert!(probs.iter().all(|&p| p > 0.0));
            assert!(probs.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn tail_mass_decays_like_inverse_rank_for_alpha_two() {
        // For alpha = 2 the mass beyond rank m should stay within 2x of 1/m.
        let n = 100_000;
        let space = build_zipf_space(n, 0, 2.0).unwrap();
        let probs = space.ideal_probs();
        let mut suffix = vec![0.0f64; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + probs[i];
        }
        for m in [10usize, 50, 100, 1000, n / 10] {
            let tail = suffix[m];
            let reference = 1.0 / m as f64;
            assert!(
                tail <= 2.0 * reference && tail >= reference / 2.0,
                "m={m}: tail={tail} ref={reference}"
            );
        }
    }

    #[test]
    fn default_length_rule() {
        let lengths = default_lengths(8, 0);
        assert_eq!(lengths, vec![2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 4.0, 4.0]);
        // Invalid artifacts restart the rule on their local index.
        let lengths = default_lengths(2, 3);
        assert_eq!(lengths, vec![2.0, 2.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn conditional_tail_renormalizes() {
        let space = build_zipf_space(3, 0, 2.0).unwrap();
        let discovered: IdSet = [ArtifactId(0)].into_iter().collect();
        let tail = conditional_tail(&space, &discovered).unwrap();
        assert_eq!(tail.support(), &[ArtifactId(1), ArtifactId(2)]);
        // Normalize 1/4, 1/9.
        assert_close(tail.probs()[0], 9.0 / 13.0, 1e-12);
        assert_close(tail.probs()[1], 4.0 / 13.0, 1e-12);
    }

    #[test]
    fn conditional_tail_identity_when_nothing_discovered() {
        let space = build_zipf_space(50, 0, 1.5).unwrap();
        let tail = conditional_tail(&space, &IdSet::default()).unwrap();
        for (i, id) in space.valid_ids().enumerate() {
            assert_close(tail.probs()[i], space.ideal_prob(id), 1e-12);
        }
    }

    #[test]
    fn conditional_tail_empty_when_all_discovered() {
        let space = build_zipf_space(4, 0, 2.0).unwrap();
        let discovered: IdSet = space.valid_ids().collect();
        assert!(matches!(
            conditional_tail(&space, &discovered),
            Err(Error::EmptyTail)
        ));
    }

    #[test]
    fn conditional_tail_composes() {
        // Conditioning on A then B equals conditioning on A union B.
        let space = build_zipf_space(40, 0, 1.5).unwrap();
        let a: IdSet = [0usize, 3, 7, 12].into_iter().map(ArtifactId).collect();
        let b: IdSet = [1usize, 7, 20, 33].into_iter().map(ArtifactId).collect();
        let mut union = a.clone();
        for id in b.iter() {
            union.insert(id);
        }

        // Two-step: renormalize after A, then after B, over the same base P.
        let after_a = conditional_tail(&space, &a).unwrap();
        let keep: Vec<(ArtifactId, f64)> = after_a
            .support()
            .iter()
            .zip(after_a.probs())
            .filter(|(id, _)| !b.contains(**id))
            .map(|(id, p)| (*id, *p))
            .collect();
        let norm: f64 = keep.iter().map(|(_, p)| *p).sum();

        let direct = conditional_tail(&space, &union).unwrap();
        assert_eq!(
            direct.support(),
            keep.iter().map(|(id, _)| *id).collect::<Vec<_>>().as_slice()
        );
        for ((_, p_two_step), p_direct) in keep.iter().zip(direct.probs()) {
            assert_close(p_two_step / norm, *p_direct, 1e-12);
        }
    }

    #[test]
    fn idset_basics() {
        let mut set = IdSet::with_capacity(10);
        assert!(set.insert(ArtifactId(3)));
        assert!(!set.insert(ArtifactId(3)));
        assert!(set.contains(ArtifactId(3)));
        assert_eq!(set.len(), 1);
        assert!(set.remove(ArtifactId(3)));
        assert!(!set.remove(ArtifactId(3)));
        assert!(set.is_empty());
        set.insert(ArtifactId(100)); // grows past capacity
        assert!(set.contains(ArtifactId(100)));
    }
}
