//! Lorenz curves, Gini coefficients, and tail shares of non-negative quantities.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InequalityError {
    #[error("no values supplied")]
    EmptyInput,
    #[error("all values are zero")]
    AllZero,
    #[error("value at position {index} is negative or not finite: {value}")]
    InvalidValue { index: usize, value: f64 },
    #[error("quantile {0} must lie strictly between 0 and 1")]
    InvalidQuantile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Top,
    Bottom,
}

/// Sorted cumulative-share curve with derived summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzResult {
    /// `(population share, cumulative value share)` from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    pub gini: f64,
    #[serde(skip)]
    sorted: Vec<f64>,
    #[serde(skip)]
    total: f64,
}

fn check(values: &[f64]) -> Result<f64, InequalityError> {
    if values.is_empty() {
        return Err(InequalityError::EmptyInput);
    }
    let mut total = 0.0;
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(InequalityError::InvalidValue { index, value });
        }
        total += value;
    }
    if total <= 0.0 {
        return Err(InequalityError::AllZero);
    }
    Ok(total)
}

/// Stable ascending sort; equal values keep their input order.
fn sorted_ascending(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

/// Number of observations in a `q` tail: ⌈q·n⌉, with products within 1e-9 of
/// an integer treated as that integer.
pub fn tail_count(n: usize, q: f64) -> usize {
    let raw = q * n as f64;
    let nearest = raw.round();
    let count = if (raw - nearest).abs() < 1e-9 {
        nearest
    } else {
        raw.ceil()
    };
    (count as usize).clamp(1, n)
}

fn share_of(sorted: &[f64], total: f64, q: f64, which: Tail) -> Result<f64, InequalityError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(InequalityError::InvalidQuantile(q));
    }
    let k = tail_count(sorted.len(), q);
    let held: f64 = match which {
        Tail::Bottom => sorted[..k].iter().sum(),
        Tail::Top => sorted[sorted.len() - k..].iter().sum(),
    };
    Ok(held / total)
}

/// Gini via the sorted-rank formula `2 Σ i·x₍ᵢ₎ / (n Σ x) − (n + 1) / n`.
fn gini_sorted(sorted: &[f64], total: f64) -> f64 {
    let n = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (i as f64 + 1.0) * x)
        .sum();
    (2.0 * weighted / (n * total) - (n + 1.0) / n).max(0.0)
}

pub fn lorenz(values: &[f64]) -> Result<LorenzResult, InequalityError> {
    let total = check(values)?;
    let sorted = sorted_ascending(values);
    let n = sorted.len() as f64;
    let mut points = Vec::with_capacity(sorted.len() + 1);
    points.push((0.0, 0.0));
    let mut running = 0.0;
    for (k, x) in sorted.iter().enumerate() {
        running += x;
        points.push(((k + 1) as f64 / n, running / total));
    }
    if let Some(last) = points.last_mut() {
        *last = (1.0, 1.0);
    }
    Ok(LorenzResult {
        gini: gini_sorted(&sorted, total),
        points,
        sorted,
        total,
    })
}

impl LorenzResult {
    pub fn top_share(&self, q: f64) -> Result<f64, InequalityError> {
        share_of(&self.sorted, self.total, q, Tail::Top)
    }

    pub fn bottom_share(&self, q: f64) -> Result<f64, InequalityError> {
        share_of(&self.sorted, self.total, q, Tail::Bottom)
    }

    /// `1 − 2·(trapezoidal area under the curve)`.
    pub fn gini_from_area(&self) -> f64 {
        let area: f64 = self
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum();
        1.0 - 2.0 * area
    }
}

pub fn gini(values: &[f64]) -> Result<f64, InequalityError> {
    let total = check(values)?;
    Ok(gini_sorted(&sorted_ascending(values), total))
}

/// Share of the total held by the ⌈q·n⌉ largest (`Top`) or smallest (`Bottom`) values.
pub fn tail_share(values: &[f64], q: f64, which: Tail) -> Result<f64, InequalityError> {
    let total = check(values)?;
    share_of(&sorted_ascending(values), total, q, which)
}
