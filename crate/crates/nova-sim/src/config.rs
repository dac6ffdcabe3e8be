//! Experiment configuration: JSON schema, strict parsing with key-path
//! errors, defaults, validation, and named presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::FitWindow;
use crate::engine::{HumanExpert, InvalidShape, Q0Params, RetrainPolicy};
use crate::error::{Error, Result};
use crate::knowledge::{ArtifactId, KnowledgeSpace};
use crate::verifier::VerifierSpec;

/// Which experiment the run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Plain loop run emitting per-iteration records.
    Run,
    /// Loop run summarizing coverage behavior per replicate.
    Coverage,
    /// Contamination-fraction grid over new-valid masses and false-positive
    /// rates, cross-checked against the closed form.
    Contamination,
    /// Occupancy scaling: distinct discoveries versus batch size.
    Scaling,
    /// Discovery-versus-exposure cost law under tail reweighting.
    Cumcost,
    /// Compute-sustainability bounds across tail exponents.
    Sustainability,
    /// One-shot estimator readings on a batch file.
    Estimate,
    /// Human amplification: simulated augmented-versus-autonomous ratio and
    /// support expansion.
    Amplification,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Run => "run",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Contamination => "contamination",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Cumcost => "cumcost",
            ExperimentKind::Sustainability => "sustainability",
            ExperimentKind::Estimate => "estimate",
            ExperimentKind::Amplification => "amplification",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "run" => ExperimentKind::Run,
            "coverage" => ExperimentKind::Coverage,
            "contamination" => ExperimentKind::Contamination,
            "scaling" => ExperimentKind::Scaling,
            "cumcost" => ExperimentKind::Cumcost,
            "sustainability" => ExperimentKind::Sustainability,
            "estimate" => ExperimentKind::Estimate,
            "amplification" => ExperimentKind::Amplification,
            _ => return None,
        })
    }

    fn needs_space(self) -> bool {
        matches!(
            self,
            ExperimentKind::Run
                | ExperimentKind::Coverage
                | ExperimentKind::Scaling
                | ExperimentKind::Cumcost
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub n_valid: usize,
    #[serde(default)]
    pub n_invalid: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Q0Config {
    /// Invalid mass share at initialization.
    #[serde(default)]
    pub u0: f64,
    /// Fraction of valid ids (by rank) inside the initial support.
    #[serde(default = "one")]
    pub s0: f64,
    #[serde(default = "zipf_shape")]
    pub invalid_shape: InvalidShape,
}

fn one() -> f64 {
    1.0
}

fn zipf_shape() -> InvalidShape {
    InvalidShape::Zipf
}

impl Default for Q0Config {
    fn default() -> Self {
        Q0Config {
            u0: 0.0,
            s0: 1.0,
            invalid_shape: InvalidShape::Zipf,
        }
    }
}

impl Q0Config {
    pub fn params(&self) -> Q0Params {
        Q0Params {
            u0: self.u0,
            s0: self.s0,
            invalid_shape: self.invalid_shape,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierConfig {
    /// True-positive rate on valid candidates.
    #[serde(default = "one")]
    pub r: f64,
    /// Per-artifact overrides, id -> rate.
    #[serde(default)]
    pub hard_set: BTreeMap<usize, f64>,
    /// False-positive rate on invalid candidates.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub tau0: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "one")]
    pub w0: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub w: Option<f64>,
}

fn default_delta0() -> f64 {
    0.1
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            r: 1.0,
            hard_set: BTreeMap::new(),
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

impl VerifierConfig {
    pub fn spec(&self) -> VerifierSpec {
        VerifierSpec {
            r_default: self.r,
            hard_set: self
                .hard_set
                .iter()
                .map(|(id, rate)| (ArtifactId(*id), *rate))
                .collect(),
            delta: self.delta,
            tau0: self.tau0,
            beta: self.beta,
            delta0: self.delta0,
            w0: self.w0,
            a: self.a,
            w: self.w,
        }
    }
}

/// Shape of the human proposal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalShape {
    /// Same as the initial generator.
    Q0,
    /// The ideal difficulty distribution over valid ids.
    Ideal,
    /// Uniform over valid ids.
    UniformValid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanConfig {
    #[serde(default)]
    pub n_h: usize,
    #[serde(default = "one")]
    pub rho_h: f64,
    /// Effective true-positive rate after review; defaults to the verifier's.
    #[serde(default)]
    pub r_eff: Option<f64>,
    #[serde(default = "default_proposal")]
    pub proposal: ProposalShape,
    /// Multiplicative guidance, id -> factor.
    #[serde(default)]
    pub boost: BTreeMap<usize, f64>,
    /// Support insertions, id -> probability mass.
    #[serde(default)]
    pub additions: BTreeMap<usize, f64>,
}

fn default_proposal() -> ProposalShape {
    ProposalShape::Q0
}

impl HumanConfig {
    pub fn expert(
        &self,
        space: &KnowledgeSpace,
        q0_weights: &[f64],
        verifier: &VerifierSpec,
    ) -> HumanExpert {
        let proposal_probs = match self.proposal {
            ProposalShape::Q0 => q0_weights.to_vec(),
            ProposalShape::Ideal => {
                let mut probs = space.ideal_probs().to_vec();
                probs.resize(space.n_total(), 0.0);
                probs
            }
            ProposalShape::UniformValid => {
                let mut probs = vec![1.0 / space.n_valid() as f64; space.n_valid()];
                probs.resize(space.n_total(), 0.0);
                probs
            }
        };
        HumanExpert {
            proposal_probs,
            n_h: self.n_h,
            rho_h: self.rho_h,
            guidance_boost: self
                .boost
                .iter()
                .map(|(id, b)| (ArtifactId(*id), *b))
                .collect(),
            guidance_additions: self
                .additions
                .iter()
                .map(|(id, m)| (ArtifactId(*id), *m))
                .collect(),
            r_eff: self.r_eff.unwrap_or(verifier.r_default),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsConfig {
    #[serde(default = "one")]
    pub c_gen: f64,
    #[serde(default)]
    pub budget: Option<f64>,
}

impl Default for CostsConfig {
    fn default() -> Self {
        CostsConfig {
            c_gen: 1.0,
            budget: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    /// New-valid mass below which a run counts as contamination-limited or
    /// guidance-starved.
    #[serde(default = "default_low")]
    pub m_low: f64,
    /// Acceptance rate below which human verification is the bottleneck.
    #[serde(default = "default_low")]
    pub r_low: f64,
    /// Target marginal contamination fraction for delta* checks.
    #[serde(default = "default_f_critical")]
    pub f_critical: f64,
}

fn default_low() -> f64 {
    0.01
}

fn default_f_critical() -> f64 {
    0.1
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        ThresholdsConfig {
            m_low: 0.01,
            r_low: 0.01,
            f_critical: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindowConfig {
    #[serde(default)]
    pub min_x: Option<f64>,
    #[serde(default)]
    pub max_x: Option<f64>,
}

impl FitWindowConfig {
    pub fn window(&self) -> FitWindow {
        FitWindow {
            min_x: self.min_x,
            max_x: self.max_x,
        }
    }
}

/// Contamination-grid scenario: one pre-discovered head artifact carries the
/// discovered mass, a uniform tail of undiscovered valid ids carries the
/// target new-valid mass, and invalid ids carry mass u.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContaminationConfig {
    #[serde(default = "default_m_grid")]
    pub m_grid: Vec<f64>,
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default = "default_n_tail")]
    pub n_tail: usize,
    #[serde(default = "default_n_invalid_tail")]
    pub n_invalid: usize,
}

fn default_m_grid() -> Vec<f64> {
    vec![0.2, 0.05, 0.01]
}

fn default_delta_grid() -> Vec<f64> {
    vec![0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2]
}

fn default_u() -> f64 {
    0.5
}

fn default_n_tail() -> usize {
    200_000
}

fn default_n_invalid_tail() -> usize {
    20_000
}

impl Default for ContaminationConfig {
    fn default() -> Self {
        ContaminationConfig {
            m_grid: default_m_grid(),
            delta_grid: default_delta_grid(),
            u: default_u(),
            n_tail: default_n_tail(),
            n_invalid: default_n_invalid_tail(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
}

fn default_n_grid() -> Vec<usize> {
    vec![1_000, 10_000, 100_000, 1_000_000]
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            n_grid: default_n_grid(),
        }
    }
}

/// Amplification scenario: sparse uniform tail plus one pre-discovered head.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplificationConfig {
    #[serde(default = "default_n_ai")]
    pub n_ai: usize,
    #[serde(default = "default_n_h")]
    pub n_h: usize,
    /// Autonomous new-valid mass.
    #[serde(default = "default_m_auto")]
    pub m_new: f64,
    /// New-valid mass after guidance.
    #[serde(default = "default_m_guided")]
    pub m_guided: f64,
    /// New-valid mass of the human proposal distribution.
    #[serde(default = "default_m_guided")]
    pub m_h: f64,
    /// Invalid mass of the scenario.
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default = "default_r_auto")]
    pub r: f64,
    #[serde(default = "one")]
    pub r_eff: f64,
    #[serde(default = "one")]
    pub rho_h: f64,
    #[serde(default = "default_amp_tail")]
    pub n_tail: usize,
    #[serde(default = "default_amp_invalid")]
    pub n_invalid: usize,
    /// Mass the support-expansion scenario places on an id outside supp(Q0).
    #[serde(default = "default_expansion_mass")]
    pub expansion_mass: f64,
    /// Iterations of the support-expansion runs.
    #[serde(default = "default_expansion_t")]
    pub expansion_t: usize,
}

fn default_n_ai() -> usize {
    1000
}

fn default_n_h() -> usize {
    100
}

fn default_m_auto() -> f64 {
    0.1
}

fn default_m_guided() -> f64 {
    0.2
}

fn default_r_auto() -> f64 {
    0.8
}

fn default_amp_tail() -> usize {
    50_000
}

fn default_amp_invalid() -> usize {
    10_000
}

fn default_expansion_mass() -> f64 {
    0.3
}

fn default_expansion_t() -> usize {
    20
}

impl Default for AmplificationConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SustainabilityConfig {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    /// Ratio m_max / c_gen for the marginal frontier.
    #[serde(default = "default_m_max_ratio")]
    pub m_max_ratio: f64,
}

fn default_alphas() -> Vec<f64> {
    vec![2.0, 1.5, 1.2, 1.05]
}

fn default_t_grid() -> Vec<f64> {
    (0..=10).map(|t| t as f64).collect()
}

fn default_m_max_ratio() -> f64 {
    100.0
}

impl Default for SustainabilityConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Newline-delimited decimal artifact ids.
    pub batch_path: String,
    /// Good-Toulmin extrapolation factor.
    #[serde(default = "one")]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_path")]
    pub path: String,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_out_path() -> String {
    "nova_out".to_string()
}

fn default_format() -> OutputFormat {
    OutputFormat::Both
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: default_out_path(),
            format: default_format(),
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Batch size per iteration.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default)]
    pub stop_on_coverage: bool,
    /// Trailing window for marginal-contamination aggregation.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub space: Option<SpaceConfig>,
    #[serde(default)]
    pub q0: Q0Config,
    #[serde(default = "default_policy")]
    pub policy: RetrainPolicy,
    #[serde(default)]
    pub verifier: VerifierConfig,
    #[serde(default)]
    pub human: Option<HumanConfig>,
    #[serde(default)]
    pub costs: CostsConfig,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub fit_window: Option<FitWindowConfig>,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    #[serde(default)]
    pub contamination: Option<ContaminationConfig>,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub amplification: Option<AmplificationConfig>,
    #[serde(default)]
    pub sustainability: Option<SustainabilityConfig>,
    #[serde(default)]
    pub estimate: Option<EstimateConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

fn default_replicates() -> usize {
    1
}

fn default_n() -> usize {
    1000
}

fn default_t_max() -> usize {
    100
}

fn default_window() -> usize {
    10
}

fn default_policy() -> RetrainPolicy {
    RetrainPolicy::Static
}

/// Parses and validates a JSON config; unknown keys are rejected with the
/// offending key path and the accepted alternatives.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let deserializer = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(deserializer)
        .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.replicates == 0 {
            return fail("replicates: must be >= 1".into());
        }
        if self.experiment.needs_space() && self.space.is_none() {
            return fail(format!(
                "space: required for experiment={}",
                self.experiment.name()
            ));
        }
        if let Some(space) = &self.space {
            if space.n_valid == 0 {
                return fail("space.n_valid: must be >= 1".into());
            }
            if !(space.alpha > 0.0) || !space.alpha.is_finite() {
                return fail(format!("space.alpha: must be > 0, got {}", space.alpha));
            }
        }
        if !(0.0..1.0).contains(&self.q0.u0) {
            return fail(format!("q0.u0: must be in [0,1), got {}", self.q0.u0));
        }
        if !(self.q0.s0 > 0.0 && self.q0.s0 <= 1.0) {
            return fail(format!("q0.s0: must be in (0,1], got {}", self.q0.s0));
        }
        self.policy
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.verifier
            .spec()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.costs.c_gen > 0.0) {
            return fail(format!("costs.c_gen: must be > 0, got {}", self.costs.c_gen));
        }
        if !(self.thresholds.f_critical > 0.0 && self.thresholds.f_critical < 1.0) {
            return fail(format!(
                "thresholds.f_critical: must be in (0,1), got {}",
                self.thresholds.f_critical
            ));
        }
        if self.window == 0 {
            return fail("window: must be >= 1".into());
        }
        match self.experiment {
            ExperimentKind::Estimate if self.estimate.is_none() => {
                fail("estimate: block required for experiment=estimate".into())
            }
            ExperimentKind::Run | ExperimentKind::Coverage | ExperimentKind::Cumcost
                if self.n == 0 =>
            {
                fail("n: must be >= 1".into())
            }
            _ => Ok(()),
        }
    }

    /// The scenario's verifier spec.
    pub fn verifier_spec(&self) -> VerifierSpec {
        self.verifier.spec()
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "c1c4",
    "forgetting",
    "exploration-failure",
    "acceptance-failure",
    "contamination",
    "exploration-barrier",
    "amplification",
    "scaling-a15",
    "scaling-a20",
    "cumcost-a20",
    "sustainability-table",
];

fn base_config(experiment: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        seed: 42,
        replicates: 1,
        n: 1000,
        t_max: 100,
        stop_on_coverage: false,
        window: 10,
        space: None,
        q0: Q0Config::default(),
        policy: RetrainPolicy::Static,
        verifier: VerifierConfig::default(),
        human: None,
        costs: CostsConfig::default(),
        experiment,
        fit_window: None,
        thresholds: ThresholdsConfig::default(),
        contamination: None,
        scaling: None,
        amplification: None,
        sustainability: None,
        estimate: None,
        output: None,
    }
}

/// The shared failure-mode budget: 50 valid and 50 invalid artifacts at
/// alpha = 1.5, batches of 500, up to 2000 iterations, 200 replicates.
fn failure_mode_base(experiment: ExperimentKind) -> ExperimentConfig {
    let mut cfg = base_config(experiment);
    cfg.replicates = 200;
    cfg.n = 500;
    cfg.t_max = 2000;
    cfg.space = Some(SpaceConfig {
        n_valid: 50,
        n_invalid: 50,
        alpha: 1.5,
    });
    cfg.q0 = Q0Config {
        u0: 0.2,
        s0: 1.0,
        invalid_shape: InvalidShape::Zipf,
    };
    cfg
}

/// Returns a documented canned configuration by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        // All four coverage conditions hold: Static policy, full valid
        // support, positive rates, no false positives.
        "c1c4" => {
            let mut cfg = failure_mode_base(ExperimentKind::Coverage);
            cfg.verifier.r = 0.5;
            cfg.stop_on_coverage = true;
            cfg
        }
        // Monotone accumulation broken: discovered ids are re-dropped.
        "forgetting" => {
            let mut cfg = failure_mode_base(ExperimentKind::Coverage);
            cfg.policy = RetrainPolicy::Forgetful { p_drop: 0.2 };
            cfg
        }
        // Exposure broken: undiscovered tail ids are pruned out of support.
        "exploration-failure" => {
            let mut cfg = failure_mode_base(ExperimentKind::Coverage);
            cfg.policy = RetrainPolicy::SupportPrune { epsilon: 0.05 };
            cfg
        }
        // Acceptance broken: the five rarest valid artifacts have rate zero.
        "acceptance-failure" => {
            let mut cfg = failure_mode_base(ExperimentKind::Coverage);
            for id in 45..50 {
                cfg.verifier.hard_set.insert(id, 0.0);
            }
            cfg
        }
        // False positives on: the contamination grid around the closed form.
        "contamination" => {
            let mut cfg = base_config(ExperimentKind::Contamination);
            cfg.replicates = 200;
            cfg.n = 1000;
            cfg.t_max = 10;
            cfg.window = 10;
            cfg.contamination = Some(ContaminationConfig::default());
            cfg
        }
        // Support restricted to the easiest 90% of valid ids.
        "exploration-barrier" => {
            let mut cfg = failure_mode_base(ExperimentKind::Coverage);
            cfg.q0.s0 = 0.9;
            cfg
        }
        // Guidance doubles the frontier mass, review lifts acceptance by
        // 1.25x, and expert proposals add 10%: amplification 2.75.
        "amplification" => {
            let mut cfg = base_config(ExperimentKind::Amplification);
            cfg.replicates = 500;
            cfg.amplification = Some(AmplificationConfig::default());
            cfg
        }
        "scaling-a15" | "scaling-a20" => {
            let alpha = if name == "scaling-a15" { 1.5 } else { 2.0 };
            let mut cfg = base_config(ExperimentKind::Scaling);
            cfg.replicates = 50;
            cfg.space = Some(SpaceConfig {
                n_valid: 1_000_000,
                n_invalid: 0,
                alpha,
            });
            cfg.scaling = Some(ScalingConfig::default());
            cfg
        }
        // Desk-scale cost law: reaches roughly 3000 discoveries.
        "cumcost-a20" => {
            let mut cfg = base_config(ExperimentKind::Cumcost);
            cfg.replicates = 20;
            cfg.n = 4000;
            cfg.t_max = 1200;
            cfg.space = Some(SpaceConfig {
                n_valid: 10_000,
                n_invalid: 0,
                alpha: 2.0,
            });
            cfg.policy = RetrainPolicy::TailReweight {
                w_min: 0.5,
                w_max: 2.0,
            };
            cfg
        }
        "sustainability-table" => {
            let mut cfg = base_config(ExperimentKind::Sustainability);
            cfg.sustainability = Some(SustainabilityConfig::default());
            cfg
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset '{name}'; known presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(
            r#"{"seed": 7, "space": {"n_valid": 10, "alpha": 1.5}, "experiment": "run"}"#,
        )
        .unwrap();
        assert_eq!(cfg.n, 1000);
        assert_eq!(cfg.t_max, 100);
        assert_eq!(cfg.replicates, 1);
        assert_eq!(cfg.verifier.delta, 0.0);
        assert_eq!(cfg.verifier.r, 1.0);
        assert_eq!(cfg.policy, RetrainPolicy::Static);
        assert_eq!(cfg.window, 10);
        assert_eq!(cfg.q0.s0, 1.0);
    }

    #[test]
    fn invalid_alpha_names_key_path() {
        let err = parse_config(
            r#"{"seed": 7, "space": {"n_valid": 10, "alpha": -1.0}, "experiment": "run"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("space.alpha"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_path_and_suggestions() {
        let err = parse_config(
            r#"{"seed": 7, "space": {"n_valid": 10, "alpah": 1.5}, "experiment": "run"}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("space.alpah"), "{msg}");
        assert!(msg.contains("alpha"), "{msg}");
    }

    #[test]
    fn missing_required_key_is_an_error() {
        let err =
            parse_config(r#"{"space": {"n_valid": 10, "alpha": 1.5}, "experiment": "run"}"#)
                .unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn estimate_requires_block() {
        let err = parse_config(r#"{"seed": 1, "experiment": "estimate"}"#).unwrap_err();
        assert!(err.to_string().contains("estimate"), "{err}");
    }

    #[test]
    fn policy_params_round_trip() {
        let cfg = parse_config(
            r#"{
                "seed": 1,
                "space": {"n_valid": 10, "alpha": 2.0},
                "policy": {"kind": "tail_reweight", "w_min": 0.5, "w_max": 2.0},
                "experiment": "run"
            }"#,
        )
        .unwrap();
        assert_eq!(
            cfg.policy,
            RetrainPolicy::TailReweight {
                w_min: 0.5,
                w_max: 2.0
            }
        );
        let bad = parse_config(
            r#"{
                "seed": 1,
                "space": {"n_valid": 10, "alpha": 2.0},
                "policy": {"kind": "forgetful", "p_drop": 1.5},
                "experiment": "run"
            }"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn presets_all_validate() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap_or_else(|e| panic!("preset {name}: {e}"));
            cfg.validate().unwrap();
        }
        assert!(preset("no-such-preset").is_err());
        let err = preset("no-such-preset").unwrap_err().to_string();
        assert!(err.contains("c1c4"), "{err}");
    }

    #[test]
    fn documented_preset_contents() {
        let forgetting = preset("forgetting").unwrap();
        assert_eq!(forgetting.policy, RetrainPolicy::Forgetful { p_drop: 0.2 });
        assert_eq!(forgetting.verifier.delta, 0.0);
        assert_eq!(forgetting.verifier.r, 1.0);

        let acceptance = preset("acceptance-failure").unwrap();
        let hard: Vec<usize> = acceptance.verifier.hard_set.keys().copied().collect();
        assert_eq!(hard, vec![45, 46, 47, 48, 49]);
        assert!(acceptance.verifier.hard_set.values().all(|r| *r == 0.0));

        let barrier = preset("exploration-barrier").unwrap();
        assert_eq!(barrier.q0.s0, 0.9);
        assert_eq!(barrier.policy, RetrainPolicy::Static);

        let table = preset("sustainability-table").unwrap();
        assert_eq!(
            table.sustainability.unwrap().alphas,
            vec![2.0, 1.5, 1.2, 1.05]
        );
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = preset("c1c4").unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.replicates, cfg.replicates);
        assert_eq!(back.policy, cfg.policy);
    }
}
