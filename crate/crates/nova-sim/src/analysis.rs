//! Closed-form contamination, budget, allocation, amplification, and
//! sustainability formulas, plus log-log power-law fitting over experiment
//! curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::IterationRecord;
use crate::error::{Error, Result};
use crate::knowledge::build_zipf_space;
use crate::rng::labeled_rng;
use crate::sampler::WeightedSampler;

/// Fitted power law y = exp(intercept) * x^exponent from a log-log OLS fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Slope on log-log axes.
    pub exponent: f64,
    /// Offset on log-log axes (natural log of the prefactor).
    pub intercept: f64,
    /// Coefficient of determination in log space.
    pub r_squared: f64,
    /// Abscissa range actually used.
    pub range: (f64, f64),
}

/// Multiplicative decomposition of the human amplification factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplificationReport {
    pub a_guide: f64,
    pub a_verify: f64,
    pub a_gen: f64,
    pub a_h: f64,
}

/// A threshold that may be unbounded (no invalid mass, or a marginal
/// frontier at the exponent boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    /// Finite value, or +inf for the unbounded case.
    pub fn as_f64(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Unbounded => f64::INFINITY,
        }
    }
}

/// Local regime classification around the contamination threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Safe,
    ContaminationLimited,
    Collapse,
}

/// Advisory focus for limited human effort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortFocus {
    Generation,
    Guidance,
    Verification,
}

/// Sparse-regime marginal contamination fraction delta*u / (r*m + delta*u).
pub fn f_marg_sparse(delta: f64, u: f64, r: f64, m_new: f64) -> Result<f64> {
    let denom = r * m_new + delta * u;
    if !(denom > 0.0) {
        return Err(Error::UndefinedFraction);
    }
    Ok(delta * u / denom)
}

/// Largest false-positive rate keeping the marginal contamination fraction
/// at or below `f_critical`.
pub fn delta_star(r: f64, m_new: f64, u: f64, f_critical: f64) -> Result<Bound> {
    if !(f_critical > 0.0 && f_critical < 1.0) {
        return Err(Error::invalid(
            "f_critical",
            format!("must be in (0,1), got {f_critical}"),
        ));
    }
    if u == 0.0 {
        return Ok(Bound::Unbounded);
    }
    Ok(Bound::Finite(
        r * m_new * f_critical / (u * (1.0 - f_critical)),
    ))
}

/// Feasible batch size floor(budget / (c_gen + tau_mean)) under a
/// per-iteration budget.
pub fn feasible_batch(budget: f64, c_gen: f64, tau_mean: f64) -> Result<u64> {
    if !(budget >= 0.0) {
        return Err(Error::invalid("budget", "must be >= 0"));
    }
    let per_candidate = c_gen + tau_mean;
    if !(per_candidate > 0.0) {
        return Err(Error::invalid(
            "c_gen + tau_mean",
            "per-candidate cost must be > 0",
        ));
    }
    Ok((budget / per_candidate).floor() as u64)
}

/// Stationary verification effort (a * delta0 * u * w0^a * c_gen / (r * m))^(1/(a+1)).
pub fn w_star(
    a: f64,
    delta0: f64,
    u: f64,
    w0: f64,
    c_gen: f64,
    r: f64,
    m_new: f64,
) -> Result<f64> {
    for (name, v) in [
        ("a", a),
        ("delta0", delta0),
        ("u", u),
        ("w0", w0),
        ("c_gen", c_gen),
        ("r", r),
    ] {
        if !(v > 0.0) {
            return Err(Error::invalid(name, format!("must be > 0, got {v}")));
        }
    }
    if !(m_new > 0.0) {
        return Err(Error::FrontierDegenerate);
    }
    Ok((a * delta0 * u * w0.powf(a) * c_gen / (r * m_new)).powf(1.0 / (a + 1.0)))
}

/// Collapse when delta >= delta*, else contamination-limited when the
/// new-valid mass is small, else safe.
pub fn classify_regime(
    delta: f64,
    delta_star_value: f64,
    m_new: f64,
    m_low_threshold: f64,
) -> Regime {
    if delta >= delta_star_value {
        Regime::Collapse
    } else if m_new <= m_low_threshold {
        Regime::ContaminationLimited
    } else {
        Regime::Safe
    }
}

/// First-order decomposition of the human amplification factor.
#[allow(clippy::too_many_arguments)]
pub fn amplification(
    n_ai: f64,
    n_h: f64,
    r: f64,
    r_eff: f64,
    rho_h: f64,
    m_new: f64,
    m_new_guided: f64,
    m_new_h: f64,
) -> Result<AmplificationReport> {
    if !(m_new > 0.0) || !(r > 0.0) {
        return Err(Error::DegenerateBaseline(
            "autonomous rate r * m_new must be positive".into(),
        ));
    }
    let guided_rate = n_ai * r_eff * m_new_guided;
    if !(guided_rate > 0.0) {
        return Err(Error::DegenerateBaseline(
            "guided AI rate n_ai * r_eff * m_new_guided must be positive".into(),
        ));
    }
    let a_guide = m_new_guided / m_new;
    let a_verify = r_eff / r;
    let a_gen = 1.0 + n_h * rho_h * m_new_h / guided_rate;
    Ok(AmplificationReport {
        a_guide,
        a_verify,
        a_gen,
        a_h: a_guide * a_verify * a_gen,
    })
}

/// Advisory classification of where human effort pays off most.
pub fn effort_allocation(
    m_new: f64,
    r: f64,
    m_low_threshold: f64,
    r_low_threshold: f64,
) -> EffortFocus {
    if r <= r_low_threshold {
        EffortFocus::Verification
    } else if m_new <= m_low_threshold {
        EffortFocus::Guidance
    } else {
        EffortFocus::Generation
    }
}

/// Ordinary least squares on (ln x, ln y). Needs at least three strictly
/// positive points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Underdetermined {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(Error::invalid(
            "points",
            format!("all points must be strictly positive, got ({x}, {y})"),
        ));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("points", "all abscissas are equal"));
    }
    let sxy: f64 = logs
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;

    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| (y - (intercept + exponent * x)).powi(2))
        .sum();
    let ss_tot: f64 = logs.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        // Constant ordinate: a flat line fits it perfectly.
        1.0
    };

    let range = points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), (x, _)| (lo.min(*x), hi.max(*x)),
    );

    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        range,
    })
}

/// Sustainable-discovery bound (c0/c_gen)^(1/alpha) * 2^(t/(alpha*tau)) under
/// an exponentially growing compute supply with doubling time tau.
pub fn sustainability_bound(c0: f64, c_gen: f64, alpha: f64, tau: f64, t: f64) -> Result<f64> {
    for (name, v) in [("c0", c0), ("c_gen", c_gen), ("tau", tau)] {
        if !(v > 0.0) {
            return Err(Error::invalid(name, format!("must be > 0, got {v}")));
        }
    }
    if !(alpha > 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("the bound requires alpha > 1, got {alpha}"),
        ));
    }
    Ok((c0 / c_gen).powf(1.0 / alpha) * 2f64.powf(t / (alpha * tau)))
}

/// Marginal sustainable frontier (m_max/c_gen)^(1/(alpha-1)); unbounded at
/// alpha = 1 where the exponent blows up.
pub fn marginal_frontier(m_max: f64, c_gen: f64, alpha: f64) -> Result<Bound> {
    for (name, v) in [("m_max", m_max), ("c_gen", c_gen)] {
        if !(v > 0.0) {
            return Err(Error::invalid(name, format!("must be > 0, got {v}")));
        }
    }
    if alpha < 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("must be >= 1, got {alpha}"),
        ));
    }
    if alpha == 1.0 {
        return Ok(Bound::Unbounded);
    }
    Ok(Bound::Finite((m_max / c_gen).powf(1.0 / (alpha - 1.0))))
}

/// Per-candidate generation cost of a transformer: roughly 2 * params * length
/// forward FLOPs.
pub fn transformer_gen_cost(params_p: f64, output_len_l: f64) -> f64 {
    2.0 * params_p * output_len_l
}

/// Inclusive abscissa window for a fit; unset bounds are open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FitWindow {
    pub min_x: Option<f64>,
    pub max_x: Option<f64>,
}

impl FitWindow {
    pub fn contains(&self, x: f64) -> bool {
        self.min_x.map_or(true, |lo| x >= lo) && self.max_x.map_or(true, |hi| x <= hi)
    }

    pub fn clip(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        points
            .iter()
            .copied()
            .filter(|(x, _)| self.contains(*x))
            .collect()
    }
}

/// Mean distinct-count curve from repeated i.i.d. sampling of a Zipf space.
#[derive(Debug, Clone, Serialize)]
pub struct OccupancyCurve {
    /// (batch size N, mean distinct artifacts over replicates).
    pub points: Vec<(f64, f64)>,
    pub fit: ScalingFit,
    /// True when batch sizes beyond the pre-saturation guard were dropped.
    pub grid_truncated: bool,
}

/// Draws N i.i.d. samples from a Zipf(alpha) space for each N in the grid,
/// counts distinct artifacts, averages over `reps` replicates, and fits a
/// power law to the mean curve. Batch sizes beyond the pre-saturation guard
/// n_valid^alpha / 10 are dropped from the grid.
pub fn occupancy_experiment(
    alpha: f64,
    n_valid: usize,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
    window: FitWindow,
) -> Result<OccupancyCurve> {
    if !(alpha > 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("occupancy scaling needs alpha > 1, got {alpha}"),
        ));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid.is_empty() {
        return Err(Error::invalid("n_grid", "must be ascending and nonempty"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be >= 1"));
    }

    let guard = (n_valid as f64).powf(alpha) / 10.0;
    let kept: Vec<usize> = n_grid
        .iter()
        .copied()
        .filter(|&n| (n as f64) <= guard)
        .collect();
    let grid_truncated = kept.len() < n_grid.len();
    if kept.is_empty() {
        return Err(Error::invalid(
            "n_grid",
            "every batch size exceeds the saturation guard",
        ));
    }

    let space = build_zipf_space(n_valid, 0, alpha)?;
    let sampler = WeightedSampler::build(space.ideal_probs().to_vec())?;

    let mut points = Vec::with_capacity(kept.len());
    for (gi, &n) in kept.iter().enumerate() {
        let distinct_counts: Vec<u64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = labeled_rng(seed, gi as u64, rep as u64);
                let mut seen = vec![false; n_valid];
                let mut distinct = 0u64;
                for _ in 0..n {
                    let id = sampler.sample(&mut rng).expect("positive total");
                    if !seen[id.0] {
                        seen[id.0] = true;
                        distinct += 1;
                    }
                }
                distinct
            })
            .collect();
        let mean = distinct_counts.iter().sum::<u64>() as f64 / reps as f64;
        points.push((n as f64, mean));
    }

    let fit = fit_power_law(&window.clip(&points))?;
    Ok(OccupancyCurve {
        points,
        fit,
        grid_truncated,
    })
}

/// Discovery-versus-exposure curve of one run.
#[derive(Debug, Clone, Serialize)]
pub struct CumulativeCostCurve {
    /// (distinct discoveries D, cumulative verified exposure sum of n*r).
    pub points: Vec<(f64, f64)>,
    /// (distinct discoveries D, cumulative generation cost).
    pub cost_points: Vec<(f64, f64)>,
    pub fit: ScalingFit,
}

/// Default cumulative-cost fit window: drops D < 10 and the top 10% of D,
/// where small counts and the finite-size bend distort the log-log slope.
pub fn default_cumcost_window(d_max: f64) -> FitWindow {
    FitWindow {
        min_x: Some(10.0),
        max_x: Some(0.9 * d_max),
    }
}

/// Extracts the (D, exposure) curve from per-iteration records and fits its
/// power law over the window (defaulting to [`default_cumcost_window`]).
///
/// Exposure here is the cumulative verified-candidate throughput sum of
/// n * r, recovered from the cost column as r * cost / c_gen; it is the
/// quantity whose growth in D carries the tail exponent. Meant for runs
/// with no false positives and zero verification cost.
pub fn cumulative_cost_curve(
    records: &[IterationRecord],
    c_gen: f64,
    r: f64,
    window: Option<FitWindow>,
) -> Result<CumulativeCostCurve> {
    if records.is_empty() {
        return Err(Error::Underdetermined { needed: 3, got: 0 });
    }
    if !(c_gen > 0.0) || !(r > 0.0) {
        return Err(Error::invalid("c_gen/r", "must be > 0"));
    }
    let mut points = Vec::new();
    let mut cost_points = Vec::new();
    let mut last_g = 0u64;
    for rec in records {
        if rec.g > last_g {
            last_g = rec.g;
            points.push((rec.g as f64, r * rec.cost_total / c_gen));
            cost_points.push((rec.g as f64, rec.cost_total));
        }
    }
    if points.is_empty() {
        return Err(Error::Underdetermined { needed: 3, got: 0 });
    }
    let d_max = points.last().unwrap().0;
    let window = window.unwrap_or_else(|| default_cumcost_window(d_max));
    let fit = fit_power_law(&window.clip(&points))?;
    Ok(CumulativeCostCurve {
        points,
        cost_points,
        fit,
    })
}

/// Midpoint finite differences dy/dx over a strictly increasing curve.
/// Returns (x midpoint, slope) pairs; consumers fit these to read marginal
/// growth exponents.
pub fn finite_difference_curve(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            (0.5 * (w[0].0 + w[1].0), slope)
        })
        .collect()
}
