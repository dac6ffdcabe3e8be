//! The generate-verify-accumulate-retrain loop.
//!
//! An iteration draws a batch from the generator distribution, verifies each
//! candidate, folds accepted valid ids into the retained set (set semantics:
//! duplicates are no-ops), counts accepted invalid candidates both per
//! candidate and deduplicated, and then applies a retraining policy to the
//! generator. Exact expectation oracles for the per-iteration increments live
//! alongside the sampler so simulations can be checked against closed forms.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{frequency_profile, good_turing};
use crate::knowledge::{ArtifactId, IdSet, KnowledgeSpace};
use crate::numeric::{compensated_sum, normalize_in_place};
use crate::rng::replicate_rng;
use crate::sampler::WeightedSampler;
use crate::verifier::{accept, verification_cost, VerifierSpec};

/// Iterations between full refreshes of the incrementally tracked masses.
const MASS_REFRESH_INTERVAL: u64 = 256;

/// How invalid mass is spread over invalid ids at initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvalidShape {
    Zipf,
    Uniform,
}

/// Initial-generator construction parameters: invalid mass share, valid
/// support fraction, and the invalid-mass shape.
#[derive(Debug, Clone, Copy)]
pub struct Q0Params {
    pub u0: f64,
    pub s0: f64,
    pub invalid_shape: InvalidShape,
}

impl Default for Q0Params {
    fn default() -> Self {
        Q0Params {
            u0: 0.0,
            s0: 1.0,
            invalid_shape: InvalidShape::Zipf,
        }
    }
}

/// The sampling distribution Q_t over the ambient space.
///
/// Weights are kept normalized to one; the base weights snapshot the initial
/// distribution and anchor the tail-reweighting policy.
#[derive(Debug, Clone)]
pub struct GeneratorDistribution {
    sampler: WeightedSampler,
    base_weights: Vec<f64>,
    invalid_mass_target: f64,
}

impl GeneratorDistribution {
    /// Builds Q_0: valid mass (1 - u0) proportional to the ideal distribution
    /// restricted to the first `s0` fraction of valid ids, invalid mass u0
    /// spread Zipf-like or uniformly over invalid ids.
    pub fn build_q0(space: &KnowledgeSpace, params: &Q0Params) -> Result<Self> {
        let Q0Params {
            u0,
            s0,
            invalid_shape,
        } = *params;
        if !(0.0..1.0).contains(&u0) {
            return Err(Error::invalid("q0.u0", format!("must be in [0,1), got {u0}")));
        }
        if u0 > 0.0 && space.n_invalid() == 0 {
            return Err(Error::invalid(
                "q0.u0",
                "positive invalid mass requires invalid artifacts in the space",
            ));
        }
        if !(s0 > 0.0 && s0 <= 1.0) {
            return Err(Error::invalid("q0.s0", format!("must be in (0,1], got {s0}")));
        }

        let n_support = ((s0 * space.n_valid() as f64) + 1e-9).floor().max(1.0) as usize;
        let n_support = n_support.min(space.n_valid());

        let mut weights = vec![0.0f64; space.n_total()];
        let prefix_mass = compensated_sum(space.ideal_probs()[..n_support].iter().copied());
        for id in 0..n_support {
            weights[id] = (1.0 - u0) * space.ideal_probs()[id] / prefix_mass;
        }
        if u0 > 0.0 {
            let n_invalid = space.n_invalid();
            match invalid_shape {
                InvalidShape::Uniform => {
                    for slot in weights[space.n_valid()..].iter_mut() {
                        *slot = u0 / n_invalid as f64;
                    }
                }
                InvalidShape::Zipf => {
                    let raw: Vec<f64> = (1..=n_invalid)
                        .map(|j| (j as f64).powf(-space.alpha()))
                        .collect();
                    let norm = compensated_sum(raw.iter().copied());
                    for (slot, w) in weights[space.n_valid()..].iter_mut().zip(raw) {
                        *slot = u0 * w / norm;
                    }
                }
            }
        }
        Self::from_weights(space, weights)
    }

    /// Builds a generator from explicit weights over the whole ambient space.
    pub fn from_weights(space: &KnowledgeSpace, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.n_total() {
            return Err(Error::invalid(
                "weights",
                format!(
                    "need {} entries, got {}",
                    space.n_total(),
                    weights.len()
                ),
            ));
        }
        normalize_in_place(&mut weights).ok_or(Error::DegenerateDistribution)?;
        let invalid_mass_target =
            compensated_sum(weights[space.n_valid()..].iter().copied());
        let base_weights = weights.clone();
        Ok(GeneratorDistribution {
            sampler: WeightedSampler::build(weights)?,
            base_weights,
            invalid_mass_target,
        })
    }

    /// Probability Q(id).
    #[inline]
    pub fn prob(&self, id: ArtifactId) -> f64 {
        self.sampler.weight(id)
    }

    /// Normalized weights over the whole ambient space, indexed by id.
    pub fn weights(&self) -> &[f64] {
        self.sampler.weights()
    }

    /// Snapshot of the initial normalized weights.
    pub fn base_weights(&self) -> &[f64] {
        &self.base_weights
    }

    /// Configured invalid mass share at initialization.
    pub fn invalid_mass_target(&self) -> f64 {
        self.invalid_mass_target
    }

    #[inline]
    pub fn in_support(&self, id: ArtifactId) -> bool {
        self.sampler.weight(id) > 0.0
    }

    pub fn support(&self) -> impl Iterator<Item = ArtifactId> + '_ {
        self.sampler
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| ArtifactId(i))
    }

    pub fn sample_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<ArtifactId>> {
        self.sampler.sample_batch(n, rng)
    }

    /// Replaces the weights (renormalized); the base snapshot is untouched.
    fn set_weights(&mut self, mut weights: Vec<f64>) -> Result<()> {
        normalize_in_place(&mut weights).ok_or(Error::DegenerateDistribution)?;
        self.sampler = WeightedSampler::build(weights)?;
        Ok(())
    }
}

/// Discovered genuine set, contamination counters, and cumulative exposure.
#[derive(Debug, Clone)]
pub struct RetainedState {
    /// K_t^+: discovered genuine artifacts.
    pub discovered: IdSet,
    /// Accepted invalid candidates, counted with multiplicity.
    pub b_per_candidate: u64,
    /// Distinct accepted invalid ids.
    pub b_dedup: IdSet,
    /// Iteration index.
    pub t: u64,
    /// Cumulative effective exposure sum of n * r * m_new, pre-batch.
    pub e_new: f64,
    /// Cumulative generation plus verification cost.
    pub cost_spent: f64,
}

impl RetainedState {
    pub fn new(space: &KnowledgeSpace) -> Self {
        RetainedState {
            discovered: IdSet::with_capacity(space.n_valid()),
            b_per_candidate: 0,
            b_dedup: IdSet::with_capacity(space.n_total()),
            t: 0,
            e_new: 0.0,
            cost_spent: 0.0,
        }
    }

    pub fn coverage_complete(&self, space: &KnowledgeSpace) -> bool {
        self.discovered.len() == space.n_valid()
    }
}

/// Retraining policy applied after each iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RetrainPolicy {
    /// Q_{t+1} = Q_t.
    Static,
    /// Each undiscovered valid id's base weight is scaled by a fresh,
    /// independent uniform draw in [w_min, w_max]; discovered and invalid ids
    /// keep their base weights. Bounded fresh multipliers keep the
    /// conditional tail within constant distortion of the ideal tail.
    TailReweight { w_min: f64, w_max: f64 },
    /// Discovered ids' weights are multiplied by gamma each iteration,
    /// compounding into distributional narrowing.
    Reinforce { gamma: f64 },
    /// Each discovered id is independently forgotten with probability p_drop
    /// before retraining; acts on the retained state, not the generator.
    Forgetful { p_drop: f64 },
    /// Zeroes the smallest-weight undiscovered valid ids totaling at most
    /// epsilon mass; ties break by ascending id.
    SupportPrune { epsilon: f64 },
}

impl RetrainPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RetrainPolicy::Static => Ok(()),
            RetrainPolicy::TailReweight { w_min, w_max } => {
                if !(w_min > 0.0 && w_min <= w_max && w_max.is_finite()) {
                    return Err(Error::invalid(
                        "policy.tail_reweight",
                        format!("need 0 < w_min <= w_max < inf, got [{w_min}, {w_max}]"),
                    ));
                }
                Ok(())
            }
            RetrainPolicy::Reinforce { gamma } => {
                if !(gamma >= 1.0) {
                    return Err(Error::invalid("policy.gamma", "must be >= 1"));
                }
                Ok(())
            }
            RetrainPolicy::Forgetful { p_drop } => {
                if !(0.0..=1.0).contains(&p_drop) {
                    return Err(Error::invalid("policy.p_drop", "must be in [0,1]"));
                }
                Ok(())
            }
            RetrainPolicy::SupportPrune { epsilon } => {
                if !(0.0..1.0).contains(&epsilon) {
                    return Err(Error::invalid("policy.epsilon", "must be in [0,1)"));
                }
                Ok(())
            }
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, RetrainPolicy::Static)
    }

    /// True when the policy never touches generator weights.
    fn keeps_weights(&self) -> bool {
        matches!(self, RetrainPolicy::Static | RetrainPolicy::Forgetful { .. })
    }
}

/// A human expert: proposal distribution, generation budget, review rates,
/// and guidance edits to the generator.
#[derive(Debug, Clone)]
pub struct HumanExpert {
    /// Proposal distribution P_H over the ambient space (normalized).
    pub proposal_probs: Vec<f64>,
    /// Human candidates generated per iteration.
    pub n_h: usize,
    /// Acceptance rate on valid, new human candidates.
    pub rho_h: f64,
    /// Multiplicative guidance factors on generator weights.
    pub guidance_boost: HashMap<ArtifactId, f64>,
    /// Ids inserted into the guided support with the given probability mass.
    pub guidance_additions: Vec<(ArtifactId, f64)>,
    /// Effective true-positive rate for guided AI candidates after review.
    pub r_eff: f64,
}

impl HumanExpert {
    pub fn validate(&self, space: &KnowledgeSpace) -> Result<()> {
        if self.proposal_probs.len() != space.n_total() {
            return Err(Error::invalid(
                "human.proposal_probs",
                format!(
                    "need {} entries, got {}",
                    space.n_total(),
                    self.proposal_probs.len()
                ),
            ));
        }
        let total = compensated_sum(self.proposal_probs.iter().copied());
        if self.n_h > 0 && (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "human.proposal_probs",
                format!("must sum to 1, got {total}"),
            ));
        }
        if !(0.0..=1.0).contains(&self.rho_h) {
            return Err(Error::invalid("human.rho_h", "must be in [0,1]"));
        }
        if !(0.0..=1.0).contains(&self.r_eff) {
            return Err(Error::invalid("human.r_eff", "must be in [0,1]"));
        }
        if self.guidance_boost.values().any(|b| !(*b > 0.0)) {
            return Err(Error::invalid("human.boost", "factors must be > 0"));
        }
        let add_total: f64 = self.guidance_additions.iter().map(|(_, m)| m).sum();
        if self.guidance_additions.iter().any(|(id, m)| {
            !space.in_range(*id) || !(*m > 0.0)
        }) || add_total >= 1.0
        {
            return Err(Error::invalid(
                "human.additions",
                "masses must be positive, ids in range, total below 1",
            ));
        }
        Ok(())
    }

    /// A neutral expert leaves the generator untouched.
    pub fn is_neutral_guidance(&self) -> bool {
        self.guidance_boost.is_empty() && self.guidance_additions.is_empty()
    }

    /// New-valid mass of the proposal distribution.
    pub fn proposal_new_valid_mass(&self, space: &KnowledgeSpace, discovered: &IdSet) -> f64 {
        compensated_sum(
            space
                .valid_ids()
                .filter(|id| !discovered.contains(*id))
                .map(|id| self.proposal_probs[id.0]),
        )
    }
}

/// Applies guidance edits to the generator: boosts, then inserted masses,
/// then one renormalization. Ids named in `guidance_additions` end up with
/// exactly the given probability mass.
pub fn guided_distribution(
    q: &GeneratorDistribution,
    expert: &HumanExpert,
    space: &KnowledgeSpace,
) -> Result<GeneratorDistribution> {
    if expert.is_neutral_guidance() {
        return Ok(q.clone());
    }
    let mut weights: Vec<f64> = q.weights().to_vec();
    for (id, boost) in &expert.guidance_boost {
        if !space.in_range(*id) {
            return Err(Error::invalid("human.boost", format!("id {} out of range", id.0)));
        }
        weights[id.0] *= boost;
    }
    let add_total: f64 = expert.guidance_additions.iter().map(|(_, m)| m).sum();
    if add_total > 0.0 {
        for (id, _) in &expert.guidance_additions {
            weights[id.0] = 0.0;
        }
        let boosted_total = compensated_sum(weights.iter().copied());
        if !(boosted_total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        let scale = (1.0 - add_total) / boosted_total;
        for w in weights.iter_mut() {
            *w *= scale;
        }
        for (id, mass) in &expert.guidance_additions {
            weights[id.0] = *mass;
        }
    }
    GeneratorDistribution::from_weights(space, weights)
}

/// Per-iteration telemetry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub t: u64,
    /// Pre-batch mass on undiscovered valid artifacts.
    pub m_new: f64,
    /// Pre-batch mass on discovered artifacts.
    pub a_mass: f64,
    /// Pre-batch mass on invalid candidates.
    pub u_mass: f64,
    pub delta_g: u64,
    pub delta_b: u64,
    pub delta_b_dedup: u64,
    pub g: u64,
    pub b: u64,
    /// Realized marginal contamination fraction; undefined when no
    /// candidates were accepted this iteration.
    pub f_marg: Option<f64>,
    pub gt_estimate: f64,
    pub exact_batch_unseen: f64,
    pub e_new_total: f64,
    pub cost_total: f64,
}

/// Splits the generator mass into (new-valid, discovered, invalid).
pub fn mass_decomposition(
    q: &GeneratorDistribution,
    retained: &RetainedState,
    space: &KnowledgeSpace,
) -> (f64, f64, f64) {
    let weights = q.weights();
    let m_new = compensated_sum(
        space
            .valid_ids()
            .filter(|id| !retained.discovered.contains(*id))
            .map(|id| weights[id.0]),
    );
    let a_mass = compensated_sum(retained.discovered.iter().map(|id| weights[id.0]));
    let u_mass = compensated_sum(weights[space.n_valid()..].iter().copied());
    (m_new, a_mass, u_mass)
}

/// Exact expected number of newly accepted genuine artifacts in one batch:
/// sum over undiscovered valid k of 1 - (1 - r_k Q(k))^n.
pub fn expected_new_genuine(
    q: &GeneratorDistribution,
    retained: &RetainedState,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n: usize,
) -> f64 {
    let weights = q.weights();
    compensated_sum(
        space
            .valid_ids()
            .filter(|id| !retained.discovered.contains(*id))
            .map(|id| {
                let p = verifier.rate_for(id) * weights[id.0];
                1.0 - (1.0 - p).powi(n as i32)
            }),
    )
}

/// Expected accepted-invalid count for one batch: n * delta * U per
/// candidate, or the deduplicated sum over distinct invalid ids.
pub fn expected_false_accepts(
    q: &GeneratorDistribution,
    retained: &RetainedState,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n: usize,
    dedup: bool,
) -> f64 {
    let delta = verifier.effective_delta();
    if dedup {
        compensated_sum(space.invalid_ids().map(|id| {
            let p = delta * q.prob(id);
            1.0 - (1.0 - p).powi(n as i32)
        }))
    } else {
        let (_, _, u_mass) = mass_decomposition(q, retained, space);
        n as f64 * delta * u_mass
    }
}

/// Applies a retraining policy: the generator is updated (or, for the
/// forgetful policy, the retained set loses members).
pub fn retrain<R: Rng + ?Sized>(
    policy: &RetrainPolicy,
    q: &mut GeneratorDistribution,
    retained: &mut RetainedState,
    space: &KnowledgeSpace,
    rng: &mut R,
) -> Result<()> {
    match *policy {
        RetrainPolicy::Static => Ok(()),
        RetrainPolicy::TailReweight { w_min, w_max } => {
            let mut weights = q.base_weights().to_vec();
            for id in space.valid_ids() {
                if !retained.discovered.contains(id) {
                    let w = rng.gen::<f64>() * (w_max - w_min) + w_min;
                    weights[id.0] *= w;
                }
            }
            q.set_weights(weights)
        }
        RetrainPolicy::Reinforce { gamma } => {
            let mut weights = q.weights().to_vec();
            for id in retained.discovered.iter() {
                weights[id.0] *= gamma;
            }
            q.set_weights(weights)
        }
        RetrainPolicy::Forgetful { p_drop } => {
            let dropped: Vec<ArtifactId> = retained
                .discovered
                .iter()
                .filter(|_| rng.gen::<f64>() < p_drop)
                .collect();
            for id in dropped {
                retained.discovered.remove(id);
            }
            Ok(())
        }
        RetrainPolicy::SupportPrune { epsilon } => {
            let weights = q.weights();
            let total = compensated_sum(weights.iter().copied());
            let mut candidates: Vec<(f64, usize)> = space
                .valid_ids()
                .filter(|id| !retained.discovered.contains(*id) && weights[id.0] > 0.0)
                .map(|id| (weights[id.0], id.0))
                .collect();
            candidates
                .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut pruned_mass = 0.0f64;
            let mut to_zero = Vec::new();
            for (w, id) in candidates {
                if (pruned_mass + w) / total <= epsilon {
                    pruned_mass += w;
                    to_zero.push(id);
                } else {
                    break;
                }
            }
            if to_zero.is_empty() {
                return Ok(());
            }
            let mut weights = weights.to_vec();
            for id in to_zero {
                weights[id] = 0.0;
            }
            q.set_weights(weights)
        }
    }
}

/// Incrementally tracked raw masses of the current generator.
#[derive(Debug, Clone, Copy)]
struct MassState {
    m_new: f64,
    a_mass: f64,
    u_mass: f64,
    /// Rate-weighted undiscovered valid mass, sum of r_k * Q(k); gives the
    /// Q-weighted mean acceptance rate over the frontier.
    rate_mass: f64,
}

impl MassState {
    fn compute(
        q: &GeneratorDistribution,
        retained: &RetainedState,
        verifier: &VerifierSpec,
        space: &KnowledgeSpace,
    ) -> Self {
        let (m_new, a_mass, u_mass) = mass_decomposition(q, retained, space);
        let rate_mass = if verifier.hard_set.is_empty() {
            verifier.r_default * m_new
        } else {
            compensated_sum(
                space
                    .valid_ids()
                    .filter(|id| !retained.discovered.contains(*id))
                    .map(|id| verifier.rate_for(id) * q.prob(id)),
            )
        };
        MassState {
            m_new,
            a_mass,
            u_mass,
            rate_mass,
        }
    }

    fn on_discover(&mut self, id: ArtifactId, q: &GeneratorDistribution, verifier: &VerifierSpec) {
        let w = q.prob(id);
        self.m_new -= w;
        self.a_mass += w;
        self.rate_mass -= verifier.rate_for(id) * w;
    }
}

/// Scratch buffers reused across iterations of one run.
struct StepScratch {
    batch: Vec<ArtifactId>,
    seen_epoch: Vec<u64>,
    epoch: u64,
}

impl StepScratch {
    fn new(space: &KnowledgeSpace) -> Self {
        StepScratch {
            batch: Vec::new(),
            seen_epoch: vec![0; space.n_total()],
            epoch: 0,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step_iteration<R: Rng + ?Sized>(
    state: &mut RetainedState,
    q: &GeneratorDistribution,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n: usize,
    c_gen: f64,
    masses: &mut MassState,
    scratch: &mut StepScratch,
    rng: &mut R,
) -> Result<IterationRecord> {
    if n == 0 {
        return Err(Error::invalid("n", "batch size must be >= 1"));
    }
    let (m_new, a_mass, u_mass) = (masses.m_new, masses.a_mass, masses.u_mass);

    // Effective exposure uses the pre-batch new-valid mass and the Q-weighted
    // mean acceptance rate over the frontier.
    state.e_new += n as f64 * masses.rate_mass;

    scratch.batch.clear();
    let mut delta_g = 0u64;
    let mut delta_b = 0u64;
    let mut delta_b_dedup = 0u64;
    let mut verify_cost = 0.0f64;
    for _ in 0..n {
        let id = q.sampler.sample(rng)?;
        scratch.batch.push(id);
        let is_valid = space.is_valid(id);
        let is_new = is_valid && !state.discovered.contains(id);
        if verifier.tau0 > 0.0 {
            verify_cost += verification_cost(space.length(id), verifier);
        }
        if accept(id, is_valid, is_new, verifier, rng) {
            if is_valid {
                if state.discovered.insert(id) {
                    delta_g += 1;
                    masses.on_discover(id, q, verifier);
                }
            } else {
                state.b_per_candidate += 1;
                delta_b += 1;
                if state.b_dedup.insert(id) {
                    delta_b_dedup += 1;
                }
            }
        }
    }
    state.cost_spent += n as f64 * c_gen + verify_cost;

    // Batch-unseen mass via the complement of the seen ids.
    scratch.epoch += 1;
    let mut seen_mass = 0.0f64;
    for id in &scratch.batch {
        if scratch.seen_epoch[id.0] != scratch.epoch {
            scratch.seen_epoch[id.0] = scratch.epoch;
            seen_mass += q.prob(*id);
        }
    }
    let exact_batch_unseen = (1.0 - seen_mass).max(0.0);
    let gt_estimate = good_turing(&frequency_profile(&scratch.batch))?;

    let accepted = delta_g + delta_b;
    let f_marg = if accepted > 0 {
        Some(delta_b as f64 / accepted as f64)
    } else {
        None
    };

    let record = IterationRecord {
        t: state.t,
        m_new,
        a_mass,
        u_mass,
        delta_g,
        delta_b,
        delta_b_dedup,
        g: state.discovered.len() as u64,
        b: state.b_per_candidate,
        f_marg,
        gt_estimate,
        exact_batch_unseen,
        e_new_total: state.e_new,
        cost_total: state.cost_spent,
    };
    state.t += 1;
    Ok(record)
}

/// Runs one iteration of the loop: draw n candidates, verify, accumulate.
///
/// Masses are recomputed exactly; long runs should go through
/// [`run_experiment`], which tracks them incrementally.
pub fn run_iteration<R: Rng + ?Sized>(
    state: &mut RetainedState,
    q: &GeneratorDistribution,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n: usize,
    c_gen: f64,
    rng: &mut R,
) -> Result<IterationRecord> {
    let mut masses = MassState::compute(q, state, verifier, space);
    let mut scratch = StepScratch::new(space);
    step_iteration(
        state, q, verifier, space, n, c_gen, &mut masses, &mut scratch, rng,
    )
}

#[allow(clippy::too_many_arguments)]
fn step_augmented<R: Rng + ?Sized>(
    state: &mut RetainedState,
    guided: &GeneratorDistribution,
    expert: &HumanExpert,
    human_sampler: Option<&WeightedSampler>,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n_ai: usize,
    c_gen: f64,
    masses: &mut MassState,
    scratch: &mut StepScratch,
    rng: &mut R,
) -> Result<IterationRecord> {
    // AI part: guided distribution, flat effective rate after human review.
    let mut reviewed = verifier.clone();
    reviewed.r_default = expert.r_eff;
    reviewed.hard_set.clear();
    let mut record = step_iteration(
        state, guided, &reviewed, space, n_ai, c_gen, masses, scratch, rng,
    )?;

    // Human part: expert proposals accepted at rho_h when valid and new;
    // invalid human candidates are never accepted.
    if expert.n_h > 0 {
        let sampler = human_sampler.expect("caller supplies a proposal sampler when n_h > 0");
        let m_h = expert.proposal_new_valid_mass(space, &state.discovered);
        state.e_new += expert.n_h as f64 * expert.rho_h * m_h;
        let mut human_cost = 0.0f64;
        for _ in 0..expert.n_h {
            let id = sampler.sample(rng)?;
            if verifier.tau0 > 0.0 {
                human_cost += verification_cost(space.length(id), verifier);
            }
            let is_new_valid = space.is_valid(id) && !state.discovered.contains(id);
            if is_new_valid && rng.gen::<f64>() < expert.rho_h && state.discovered.insert(id) {
                record.delta_g += 1;
                masses.on_discover(id, guided, &reviewed);
            }
        }
        state.cost_spent += human_cost;
        record.g = state.discovered.len() as u64;
        let accepted = record.delta_g + record.delta_b;
        record.f_marg = if accepted > 0 {
            Some(record.delta_b as f64 / accepted as f64)
        } else {
            None
        };
        record.e_new_total = state.e_new;
        record.cost_total = state.cost_spent;
    }
    Ok(record)
}

/// One iteration of the human-augmented loop: guidance reshapes the
/// generator, the AI draws n_ai candidates verified at the reviewed rate,
/// and the expert contributes n_h proposals of their own.
///
/// With a neutral expert (no boosts, no additions, n_h = 0, r_eff = r) this
/// consumes randomness identically to [`run_iteration`].
#[allow(clippy::too_many_arguments)]
pub fn run_augmented_iteration<R: Rng + ?Sized>(
    state: &mut RetainedState,
    q: &GeneratorDistribution,
    expert: &HumanExpert,
    verifier: &VerifierSpec,
    space: &KnowledgeSpace,
    n_ai: usize,
    c_gen: f64,
    rng: &mut R,
) -> Result<IterationRecord> {
    expert.validate(space)?;
    let guided = guided_distribution(q, expert, space)?;
    let human_sampler = if expert.n_h > 0 {
        Some(WeightedSampler::build(expert.proposal_probs.clone())?)
    } else {
        None
    };
    let mut masses = MassState::compute(&guided, state, verifier, space);
    // The guided frontier is verified at the flat reviewed rate.
    masses.rate_mass = expert.r_eff * masses.m_new;
    let mut scratch = StepScratch::new(space);
    step_augmented(
        state,
        &guided,
        expert,
        human_sampler.as_ref(),
        verifier,
        space,
        n_ai,
        c_gen,
        &mut masses,
        &mut scratch,
        rng,
    )
}

/// Full-run parameters for [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunParams {
    /// Batch size per iteration.
    pub n: usize,
    /// Iteration cap.
    pub t_max: usize,
    /// Stop as soon as every valid artifact is discovered.
    pub stop_on_coverage: bool,
    /// Generation cost per candidate.
    pub c_gen: f64,
    pub policy: RetrainPolicy,
}

/// Runs the loop for up to t_max iterations, retraining after each one.
/// Deterministic given (seed, replicate); the coverage check runs after
/// accumulation and before retraining.
pub fn run_experiment(
    space: &KnowledgeSpace,
    q0: &GeneratorDistribution,
    verifier: &VerifierSpec,
    expert: Option<&HumanExpert>,
    params: &RunParams,
    seed: u64,
    replicate: u64,
) -> Result<Vec<IterationRecord>> {
    let initial = RetainedState::new(space);
    run_experiment_from(space, q0, verifier, expert, params, &initial, seed, replicate)
        .map(|(records, _)| records)
}

/// [`run_experiment`] starting from a pre-seeded retained state (for
/// scenarios with already-discovered artifacts); also hands back the final
/// state so callers can inspect the discovered set.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment_from(
    space: &KnowledgeSpace,
    q0: &GeneratorDistribution,
    verifier: &VerifierSpec,
    expert: Option<&HumanExpert>,
    params: &RunParams,
    initial: &RetainedState,
    seed: u64,
    replicate: u64,
) -> Result<(Vec<IterationRecord>, RetainedState)> {
    params.policy.validate()?;
    verifier.validate()?;
    if let Some(expert) = expert {
        expert.validate(space)?;
    }
    let mut rng = replicate_rng(seed, replicate);
    let mut state = initial.clone();
    let mut records = Vec::with_capacity(params.t_max.min(4096));

    let mut scratch = StepScratch::new(space);
    let human_sampler = match expert {
        Some(e) if e.n_h > 0 => Some(WeightedSampler::build(e.proposal_probs.clone())?),
        _ => None,
    };
    let guiding_expert = expert.filter(|e| !e.is_neutral_guidance());

    // The generator is cloned only when the policy mutates its weights.
    let mut owned_q: Option<GeneratorDistribution> = if params.policy.keeps_weights() {
        None
    } else {
        Some(q0.clone())
    };

    let mut guided_cache: Option<GeneratorDistribution> = match guiding_expert {
        Some(e) => Some(guided_distribution(owned_q.as_ref().unwrap_or(q0), e, space)?),
        None => None,
    };
    let mut masses: Option<MassState> = None;

    for step in 0..params.t_max {
        let base: &GeneratorDistribution = owned_q.as_ref().unwrap_or(q0);
        let active: &GeneratorDistribution = guided_cache.as_ref().unwrap_or(base);

        let mut mass_state = match masses {
            Some(m) if step as u64 % MASS_REFRESH_INTERVAL != 0 => m,
            _ => {
                let mut m = MassState::compute(active, &state, verifier, space);
                if let Some(e) = expert {
                    m.rate_mass = e.r_eff * m.m_new;
                }
                m
            }
        };

        let record = match expert {
            Some(e) => step_augmented(
                &mut state,
                active,
                e,
                human_sampler.as_ref(),
                verifier,
                space,
                params.n,
                params.c_gen,
                &mut mass_state,
                &mut scratch,
                &mut rng,
            )?,
            None => step_iteration(
                &mut state,
                active,
                verifier,
                space,
                params.n,
                params.c_gen,
                &mut mass_state,
                &mut scratch,
                &mut rng,
            )?,
        };
        masses = Some(mass_state);

        let covered = state.coverage_complete(space);
        records.push(record);
        if covered && params.stop_on_coverage {
            break;
        }

        if !params.policy.is_static() {
            match owned_q.as_mut() {
                Some(q_mut) => retrain(&params.policy, q_mut, &mut state, space, &mut rng)?,
                // Forgetful leaves weights alone; only the retained set
                // changes, so the shared generator stays shared.
                None => retrain_state_only(&params.policy, &mut state, &mut rng),
            }
            if !params.policy.keeps_weights() {
                // Weights changed: rebuild guidance and masses.
                if let Some(e) = guiding_expert {
                    guided_cache = Some(guided_distribution(
                        owned_q.as_ref().unwrap_or(q0),
                        e,
                        space,
                    )?);
                }
                masses = None;
            } else {
                // Forgetful moved ids back into the frontier.
                masses = None;
            }
        }
    }
    Ok((records, state))
}

/// Forgetful retraining without touching the generator.
fn retrain_state_only<R: Rng + ?Sized>(
    policy: &RetrainPolicy,
    retained: &mut RetainedState,
    rng: &mut R,
) {
    if let RetrainPolicy::Forgetful { p_drop } = *policy {
        let dropped: Vec<ArtifactId> = retained
            .discovered
            .iter()
            .filter(|_| rng.gen::<f64>() < p_drop)
            .collect();
        for id in dropped {
            retained.discovered.remove(id);
        }
    }
}

/// First iteration index at which coverage is complete, or None within t_max.
pub fn run_until_coverage(
    space: &KnowledgeSpace,
    q0: &GeneratorDistribution,
    verifier: &VerifierSpec,
    params: &RunParams,
    seed: u64,
    replicate: u64,
    t_max: usize,
) -> Result<Option<u64>> {
    let mut params = params.clone();
    params.t_max = t_max;
    params.stop_on_coverage = true;
    let records = run_experiment(space, q0, verifier, None, &params, seed, replicate)?;
    Ok(records
        .iter()
        .find(|r| r.g == space.n_valid() as u64)
        .map(|r| r.t))
}

/// Windowed marginal contamination fraction over the trailing `window`
/// iterations; None where no candidates were accepted in the window.
pub fn windowed_f_marg(records: &[IterationRecord], window: usize) -> Vec<Option<f64>> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(records.len());
    for i in 0..records.len() {
        let lo = (i + 1).saturating_sub(window);
        let (mut dg, mut db) = (0u64, 0u64);
        for r in &records[lo..=i] {
            dg += r.delta_g;
            db += r.delta_b;
        }
        out.push(if dg + db > 0 {
            Some(db as f64 / (dg + db) as f64)
        } else {
            None
        });
    }
    out
}

/// Coverage-theorem condition status, judged statically from the run setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    HoldsByConstruction,
    ViolatedByConstruction,
    Unknown,
}

/// Static classification of the four coverage conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// Monotone accumulation.
    pub c1: ConditionStatus,
    /// Persistent pre-discovery exposure.
    pub c2: ConditionStatus,
    /// Artifact-wise nondegenerate acceptance.
    pub c3: ConditionStatus,
    /// No false positives.
    pub c4: ConditionStatus,
}

/// Classifies the coverage conditions from the policy, whether Q_0 covers
/// the whole valid set, and the verifier rates.
pub fn check_conditions(
    policy: &RetrainPolicy,
    q0_full_valid_support: bool,
    verifier: &VerifierSpec,
) -> ConditionReport {
    use ConditionStatus::*;

    let c1 = match policy {
        RetrainPolicy::Forgetful { p_drop } if *p_drop > 0.0 => ViolatedByConstruction,
        _ => HoldsByConstruction,
    };

    let c2 = match policy {
        RetrainPolicy::Static | RetrainPolicy::TailReweight { .. } if q0_full_valid_support => {
            HoldsByConstruction
        }
        RetrainPolicy::SupportPrune { .. } => ViolatedByConstruction,
        _ => Unknown,
    };

    let min_rate = verifier
        .hard_set
        .values()
        .copied()
        .fold(verifier.r_default, f64::min);
    let c3 = if min_rate > 0.0 {
        HoldsByConstruction
    } else {
        ViolatedByConstruction
    };

    let c4 = if verifier.effective_delta() == 0.0 {
        HoldsByConstruction
    } else {
        ViolatedByConstruction
    };

    ConditionReport { c1, c2, c3, c4 }
}
