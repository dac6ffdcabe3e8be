//! Stochastic verification of candidates.
//!
//! A verifier accepts valid candidates with a true-positive rate (optionally
//! overridden per artifact) and invalid candidates with a false-positive
//! rate, either fixed or derived from the verification compute budget.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::knowledge::ArtifactId;

/// Verifier behavior and cost-model parameters.
///
/// Already-discovered valid candidates are re-verified at the same rate as
/// new ones; re-accepted duplicates cannot change the retained set, so this
/// choice only affects cost accounting.
#[derive(Debug, Clone)]
pub struct VerifierSpec {
    /// True-positive rate on valid candidates.
    pub r_default: f64,
    /// Per-artifact overrides of the true-positive rate.
    pub hard_set: HashMap<ArtifactId, f64>,
    /// False-positive rate on invalid candidates.
    pub delta: f64,
    /// Base verification cost.
    pub tau0: f64,
    /// Length exponent of the cost model tau = tau0 * l^beta.
    pub beta: f64,
    /// Reference false-positive rate of the compute-dependent model.
    pub delta0: f64,
    /// Reference verification compute of the compute-dependent model.
    pub w0: f64,
    /// Decay exponent of the compute-dependent model.
    pub a: f64,
    /// Verification compute per candidate; when set, the false-positive rate
    /// becomes delta(w) instead of `delta`.
    pub w: Option<f64>,
}

impl Default for VerifierSpec {
    fn default() -> Self {
        VerifierSpec {
            r_default: 1.0,
            hard_set: HashMap::new(),
            delta: 0.0,
            tau0: 0.0,
            beta: 1.0,
            delta0: 0.1,
            w0: 1.0,
            a: 1.0,
            w: None,
        }
    }
}

impl VerifierSpec {
    /// Validates the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let check_rate = |name: &'static str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid(name, format!("rate must be in [0,1], got {v}")));
            }
            Ok(())
        };
        check_rate("verifier.r", self.r_default)?;
        check_rate("verifier.delta", self.delta)?;
        check_rate("verifier.delta0", self.delta0)?;
        for (id, rate) in &self.hard_set {
            if !(0.0..=1.0).contains(rate) {
                return Err(Error::invalid(
                    "verifier.hard_set",
                    format!("rate for id {} must be in [0,1], got {rate}", id.0),
                ));
            }
        }
        if !(self.tau0 >= 0.0) {
            return Err(Error::invalid("verifier.tau0", "must be >= 0"));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::invalid("verifier.beta", "must be >= 1"));
        }
        if !(self.a > 0.0) {
            return Err(Error::invalid("verifier.a", "must be > 0"));
        }
        if !(self.w0 > 0.0) {
            return Err(Error::invalid("verifier.w0", "must be > 0"));
        }
        if let Some(w) = self.w {
            if !(w > 0.0) {
                return Err(Error::invalid("verifier.w", "must be > 0"));
            }
        }
        Ok(())
    }

    /// True-positive rate for a valid artifact, honoring overrides.
    #[inline]
    pub fn rate_for(&self, id: ArtifactId) -> f64 {
        self.hard_set.get(&id).copied().unwrap_or(self.r_default)
    }

    /// False-positive rate in force: delta(w) when compute is set, else delta.
    pub fn effective_delta(&self) -> f64 {
        match self.w {
            Some(w) => delta_of_w(w, self).expect("validated w is positive"),
            None => self.delta,
        }
    }
}

/// One Bernoulli verification decision.
///
/// Valid candidates are accepted with their artifact rate whether or not they
/// are new; invalid candidates with the effective false-positive rate. A rate
/// of zero never accepts and a rate of one always does, exactly.
pub fn accept<R: Rng + ?Sized>(
    candidate: ArtifactId,
    is_valid: bool,
    _is_new: bool,
    spec: &VerifierSpec,
    rng: &mut R,
) -> bool {
    let rate = if is_valid {
        spec.rate_for(candidate)
    } else {
        spec.effective_delta()
    };
    rng.gen::<f64>() < rate
}

/// Verification cost tau0 * l^beta.
pub fn verification_cost(length: f64, spec: &VerifierSpec) -> f64 {
    spec.tau0 * length.powf(spec.beta)
}

/// Compute-dependent false-positive rate delta0 * (w/w0)^-a, clamped to a
/// probability. The stylized power law is unbounded near w -> 0.
pub fn delta_of_w(w: f64, spec: &VerifierSpec) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::invalid("w", format!("must be > 0, got {w}")));
    }
    Ok((spec.delta0 * (w / spec.w0).powf(-spec.a)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    #[test]
    fn certain_rates_are_exact() {
        let mut rng = replicate_rng(31, 0);
        let mut spec = VerifierSpec::default();
        spec.r_default = 1.0;
        spec.delta = 0.0;
        for _ in 0..10_000 {
            assert!(accept(ArtifactId(0), true, true, &spec, &mut rng));
            assert!(!accept(ArtifactId(1), false, true, &spec, &mut rng));
        }
    }

    #[test]
    fn acceptance_is_bernoulli_at_each_rate() {
        let trials = 100_000usize;
        for (i, rate) in [0.0, 0.1, 0.5, 0.9, 1.0].into_iter().enumerate() {
            let mut spec = VerifierSpec::default();
            spec.r_default = rate;
            let mut rng = replicate_rng(37, i as u64);
            let mut hits = 0u64;
            for _ in 0..trials {
                if accept(ArtifactId(0), true, true, &spec, &mut rng) {
                    hits += 1;
                }
            }
            let freq = hits as f64 / trials as f64;
            let sigma = (rate * (1.0 - rate) / trials as f64).sqrt();
            assert!(
                (freq - rate).abs() <= 3.0 * sigma,
                "rate {rate}: freq {freq}"
            );
        }
    }

    #[test]
    fn hard_set_overrides_default() {
        let mut spec = VerifierSpec::default();
        spec.r_default = 1.0;
        spec.hard_set.insert(ArtifactId(7), 0.0);
        let mut rng = replicate_rng(41, 0);
        for _ in 0..1000 {
            assert!(!accept(ArtifactId(7), true, true, &spec, &mut rng));
            assert!(accept(ArtifactId(8), true, true, &spec, &mut rng));
        }
    }

    #[test]
    fn cost_model_closed_forms() {
        let mut spec = VerifierSpec::default();
        spec.tau0 = 2.0;
        spec.beta = 1.0;
        assert_eq!(verification_cost(3.0, &spec), 6.0);
        spec.tau0 = 1.0;
        spec.beta = 3.7;
        assert_eq!(verification_cost(1.0, &spec), 1.0);
        spec.tau0 = 0.5;
        spec.beta = 2.0;
        assert_eq!(verification_cost(4.0, &spec), 8.0);
    }

    #[test]
    fn cost_monotone_in_length_and_base() {
        let mut spec = VerifierSpec::default();
        spec.tau0 = 1.5;
        spec.beta = 1.3;
        let mut last = 0.0;
        for l in 1..20 {
            let c = verification_cost(l as f64, &spec);
            assert!(c >= last);
            last = c;
        }
        let mut spec2 = spec.clone();
        spec2.tau0 = 2.0;
        assert!(verification_cost(5.0, &spec2) > verification_cost(5.0, &spec));
    }

    #[test]
    fn delta_of_w_closed_forms() {
        let mut spec = VerifierSpec::default();
        spec.delta0 = 0.1;
        spec.w0 = 2.0;
        spec.a = 1.0;
        assert!((delta_of_w(2.0, &spec).unwrap() - 0.1).abs() < 1e-15);

        spec.w0 = 1.0;
        spec.a = 0.5;
        assert!((delta_of_w(4.0, &spec).unwrap() - 0.05).abs() < 1e-15);

        // Clamped from 1.8.
        spec.delta0 = 0.9;
        spec.a = 1.0;
        assert_eq!(delta_of_w(0.5, &spec).unwrap(), 1.0);

        assert!(delta_of_w(0.0, &spec).is_err());
        assert!(delta_of_w(-1.0, &spec).is_err());
    }

    #[test]
    fn validate_catches_bad_ranges() {
        let mut spec = VerifierSpec::default();
        spec.r_default = 1.2;
        assert!(spec.validate().is_err());
        let mut spec = VerifierSpec::default();
        spec.beta = 0.5;
        assert!(spec.validate().is_err());
        let mut spec = VerifierSpec::default();
        spec.hard_set.insert(ArtifactId(0), -0.1);
        assert!(spec.validate().is_err());
        assert!(VerifierSpec::default().validate().is_ok());
    }
}
