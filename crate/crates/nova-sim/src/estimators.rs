//! Missing-mass estimation: frequency profiles, Good-Turing, Good-Toulmin,
//! the Monte Carlo new-valid-mass estimator, and the exact batch-unseen-mass
//! oracle.
//!
//! Good-Turing reads the *batch* unseen mass of the current generator; it is
//! a local diversity diagnostic, not an estimate of the historically
//! undiscovered valid mass tracked by the engine.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::knowledge::{ArtifactId, IdSet, KnowledgeSpace};
use crate::numeric::compensated_sum;

/// Multiplicity histogram of one batch: f\[r\] = number of distinct artifacts
/// observed exactly r times.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FrequencyProfile {
    pub f: BTreeMap<u64, u64>,
    pub n: usize,
}

impl FrequencyProfile {
    /// Species observed exactly once.
    pub fn singletons(&self) -> u64 {
        self.f.get(&1).copied().unwrap_or(0)
    }

    /// Distinct species in the batch.
    pub fn distinct(&self) -> u64 {
        self.f.values().sum()
    }
}

/// Exact multiplicity histogram of a batch.
pub fn frequency_profile(batch: &[ArtifactId]) -> FrequencyProfile {
    let mut counts: BTreeMap<ArtifactId, u64> = BTreeMap::new();
    for id in batch {
        *counts.entry(*id).or_insert(0) += 1;
    }
    let mut f: BTreeMap<u64, u64> = BTreeMap::new();
    for count in counts.values() {
        *f.entry(*count).or_insert(0) += 1;
    }
    FrequencyProfile { f, n: batch.len() }
}

/// Good-Turing estimate f_1 / N of the batch unseen mass.
pub fn good_turing(profile: &FrequencyProfile) -> Result<f64> {
    if profile.n == 0 {
        return Err(Error::UndefinedEstimate);
    }
    Ok(profile.singletons() as f64 / profile.n as f64)
}

/// Exact batch unseen mass: the probability mass of every id not appearing
/// in the batch. `probs` is the full normalized distribution the batch was
/// drawn from, indexed by artifact id.
pub fn exact_batch_unseen_mass(probs: &[f64], batch: &[ArtifactId]) -> f64 {
    let mut seen = vec![false; probs.len()];
    for id in batch {
        seen[id.0] = true;
    }
    compensated_sum(
        probs
            .iter()
            .zip(&seen)
            .filter(|(_, s)| !**s)
            .map(|(p, _)| *p),
    )
}

/// Unbiased one-batch Monte Carlo estimate of the new-valid mass: the
/// fraction of candidates that are valid and not yet discovered.
pub fn mc_new_valid_mass(
    batch: &[ArtifactId],
    space: &KnowledgeSpace,
    discovered: &IdSet,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::UndefinedEstimate);
    }
    let hits = batch
        .iter()
        .filter(|id| space.is_valid(**id) && !discovered.contains(**id))
        .count();
    Ok(hits as f64 / batch.len() as f64)
}

/// Good-Toulmin extrapolation result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodToulminEstimate {
    /// Expected number of new species in an additional batch of size s*N.
    pub value: f64,
    /// The formal series is known to be unstable for s > 1; flagged, not an
    /// error.
    pub unstable: bool,
}

/// Good-Toulmin formal series sum_{r>=1} (-s)^{r+1} f_r over the observed
/// multiplicities, predicting new species in a further batch of size s*N
/// from the same fixed generator.
pub fn good_toulmin(profile: &FrequencyProfile, s: f64) -> Result<GoodToulminEstimate> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid("s", format!("must be > 0, got {s}")));
    }
    if profile.n == 0 {
        return Err(Error::UndefinedEstimate);
    }
    let mut value = 0.0f64;
    for (&r, &count) in &profile.f {
        let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
        value += sign * s.powi(r as i32 + 1) * count as f64;
    }
    Ok(GoodToulminEstimate {
        value,
        unstable: s > 1.0,
    })
}
