//! Small numeric helpers shared across modules.

/// Compensated (Neumaier) summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Scales `weights` in place so they sum to exactly one (compensated).
/// Returns the pre-normalization total.
pub fn normalize_in_place(weights: &mut [f64]) -> Option<f64> {
    let total = compensated_sum(weights.iter().copied());
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let inv = 1.0 / total;
    for w in weights.iter_mut() {
        *w *= inv;
    }
    Some(total)
}
