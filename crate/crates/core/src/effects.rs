//! Predicted log outcomes as credit varies with every other regressor held
//! at fixed values (normally sample means).

use indexmap::IndexMap;
use serde::Serialize;

use crate::panel::{FitResult, LN_CREDIT, LN_CREDIT_SQ};
use crate::published::{ColumnId, PublishedTable};

/// Relative decline in efficiency the credit claim must exceed.
pub const DECLINE_THRESHOLD: f64 = 3e-4;
pub const DEFAULT_LOW_CREDIT: f64 = 1_000.0;
pub const DEFAULT_HIGH_CREDIT: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EffectsError {
    #[error("model has no ln_credit term")]
    MissingCreditTerm,
    #[error("credit grid value {0} is negative or not finite")]
    InvalidGridValue(f64),
    #[error("credit grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveShape {
    Linear,
    Concave,
    Convex,
}

/// `constant + linear·ln(1+c) + square·ln(1+c)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CreditModel {
    pub linear: f64,
    pub square: f64,
    /// Intercept, household-effect level, and other regressors at their fixed values.
    pub constant: f64,
}

fn split_credit(
    coefficients: &IndexMap<String, f64>,
    means: &IndexMap<String, f64>,
    base: f64,
) -> Result<CreditModel, EffectsError> {
    let linear = *coefficients
        .get(LN_CREDIT)
        .ok_or(EffectsError::MissingCreditTerm)?;
    let square = coefficients.get(LN_CREDIT_SQ).copied().unwrap_or(0.0);
    let constant = base
        + coefficients
            .iter()
            .filter(|(label, _)| label.as_str() != LN_CREDIT && label.as_str() != LN_CREDIT_SQ)
            .map(|(label, beta)| beta * means.get(label).copied().unwrap_or(0.0))
            .sum::<f64>();
    Ok(CreditModel {
        linear,
        square,
        constant,
    })
}

impl CreditModel {
    /// From an estimated model. Regressors are held at the fit's sample means
    /// unless `overrides` supplies a value.
    pub fn from_fit(
        fit: &FitResult,
        overrides: &IndexMap<String, f64>,
    ) -> Result<Self, EffectsError> {
        let coefficients = fit
            .coefficients
            .iter()
            .map(|(l, c)| (l.clone(), c.estimate))
            .collect();
        let mut means = fit.regressor_means.clone();
        means.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        split_credit(&coefficients, &means, fit.mean_fixed_effect)
    }

    /// From a published column; regressors without a supplied value are held at 0,
    /// which only shifts the level.
    pub fn from_published(
        table: &PublishedTable,
        column: ColumnId,
        means: &IndexMap<String, f64>,
    ) -> Result<Self, EffectsError> {
        split_credit(&table.column(column), means, 0.0)
    }

    pub fn predict(&self, credit: f64) -> f64 {
        let l = credit.ln_1p();
        self.constant + self.linear * l + self.square * l * l
    }

    /// Stationary point in `ln(1 + credit)` units.
    pub fn vertex_ln(&self) -> Option<f64> {
        (self.square != 0.0).then(|| -self.linear / (2.0 * self.square))
    }

    pub fn shape(&self) -> CurveShape {
        if self.square < 0.0 {
            CurveShape::Concave
        } else if self.square > 0.0 {
            CurveShape::Convex
        } else {
            CurveShape::Linear
        }
    }
}

/// `points` values spaced evenly in log10 between `low` and `high`, endpoints exact.
pub fn log_grid(low: f64, high: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![low],
        _ => {
            let (a, b) = (low.log10(), high.log10());
            let last = points - 1;
            (0..points)
                .map(|i| match i {
                    0 => low,
                    i if i == last => high,
                    i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
                })
                .collect()
        }
    }
}

/// 50 log-spaced points from 10² to 10⁶ Yuan.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e2, 1e6, 50)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectCurve {
    pub grid: Vec<f64>,
    /// Predicted outcome in log units at each grid point.
    pub predicted: Vec<f64>,
    pub shape: CurveShape,
    pub vertex_ln: Option<f64>,
}

pub fn effect_curve(model: &CreditModel, grid: &[f64]) -> Result<EffectCurve, EffectsError> {
    if grid.is_empty() {
        return Err(EffectsError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(EffectsError::InvalidGridValue(bad));
    }
    Ok(EffectCurve {
        grid: grid.to_vec(),
        predicted: grid.iter().map(|&c| model.predict(c)).collect(),
        shape: model.shape(),
        vertex_ln: model.vertex_ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeclineClaim {
    pub low: f64,
    pub high: f64,
    /// Predicted log-efficiency at `high` minus at `low`.
    pub change: f64,
    pub holds: bool,
}

/// Whether log efficiency falls by more than [`DECLINE_THRESHOLD`] between
/// `low` and `high` credit.
pub fn decline_claim_check(model: &CreditModel, low: f64, high: f64) -> DeclineClaim {
    let change = model.predict(high) - model.predict(low);
    DeclineClaim {
        low,
        high,
        change,
        holds: change < 0.0 && -change > DECLINE_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quad(linear: f64, square: f64) -> CreditModel {
        CreditModel {
            linear,
            square,
            constant: 0.0,
        }
    }

    // Independent evaluation written out longhand.
    fn quad_difference(b1: f64, b2: f64, lo: f64, hi: f64) -> f64 {
        let (a, b) = ((1.0 + lo).ln(), (1.0 + hi).ln());
        b1 * (b - a) + b2 * (b * b - a * a)
    }

    #[test]
    fn published_quadratic_differences() {
        let fe = quad(0.00025, -0.00003);
        let d = fe.predict(1e5) - fe.predict(1e3);
        assert_abs_diff_eq!(
            d,
            quad_difference(0.00025, -0.00003, 1e3, 1e5),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(d, -0.00139, epsilon = 5e-6);
        let claim = decline_claim_check(&fe, DEFAULT_LOW_CREDIT, DEFAULT_HIGH_CREDIT);
        assert!(claim.holds);

        let ols = quad(0.00024, -0.00002);
        let claim = decline_claim_check(&ols, DEFAULT_LOW_CREDIT, DEFAULT_HIGH_CREDIT);
        assert_abs_diff_eq!(claim.change, -0.00059, epsilon = 5e-6);
        assert!(claim.holds);

        assert!(!decline_claim_check(&quad(0.0, 0.0), 1e3, 1e5).holds);
    }

    #[test]
    fn vertex() {
        let m = quad(-0.00850, 0.00188);
        assert_abs_diff_eq!(
            m.vertex_ln().unwrap(),
            2.260_638_297_872_340_7,
            epsilon = 1e-12
        );
        assert_eq!(m.shape(), CurveShape::Convex);
        assert_eq!(quad(1.0, 0.0).vertex_ln(), None);
        assert_eq!(quad(1.0, -1.0).shape(), CurveShape::Concave);
    }

    #[test]
    fn flat_curve() {
        let c = effect_curve(
            &CreditModel {
                linear: 0.0,
                square: 0.0,
                constant: 2.0,
            },
            &default_grid(),
        )
        .unwrap();
        assert!(c.predicted.iter().all(|&p| p == 2.0));
    }

    #[test]
    fn grid() {
        let g = default_grid();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 100.0);
        assert_eq!(g[49], 1e6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!((g[1] / g[0]).log10(), 4.0 / 49.0, epsilon = 1e-12);
    }

    #[test]
    fn bad_grid() {
        let m = quad(1.0, 0.0);
        assert_eq!(
            effect_curve(&m, &[10.0, -1.0]),
            Err(EffectsError::InvalidGridValue(-1.0))
        );
        assert_eq!(effect_curve(&m, &[]), Err(EffectsError::EmptyGrid));
    }

    #[test]
    fn missing_credit_term() {
        let coefs: IndexMap<String, f64> = [("age".to_string(), 1.0)].into_iter().collect();
        assert_eq!(
            split_credit(&coefs, &IndexMap::new(), 0.0),
            Err(EffectsError::MissingCreditTerm)
        );
    }

    #[test]
    fn constant_collects_other_terms() {
        let coefs: IndexMap<String, f64> = [("ln_credit", 0.5), ("age", 0.1), ("male", -1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let means: IndexMap<String, f64> = [("age", 50.0), ("male", 0.5), ("ln_credit", 99.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let m = split_credit(&coefs, &means, 1.0).unwrap();
        assert_abs_diff_eq!(m.constant, 1.0 + 5.0 - 0.5, epsilon = 1e-12);
        assert_eq!(m.linear, 0.5);
        assert_eq!(m.square, 0.0);
    }
}
