use serde::Serialize;

use super::{FitResult, Outcome};

/// Coefficients of `ln(C/E)` must equal those of `ln C` minus `ln E`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error("fits are not comparable: {0}")]
    SpecMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub label: String,
    pub energy: f64,
    pub carbon: f64,
    pub efficiency: f64,
    /// `efficiency − (carbon − energy)`.
    pub discrepancy: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &IdentityRow> {
        self.rows.iter().filter(|r| !r.holds)
    }
}

/// Checks `β_efficiency = β_carbon − β_energy` regressor by regressor.
pub fn coefficient_identity_check(
    energy: &FitResult,
    carbon: &FitResult,
    efficiency: &FitResult,
) -> Result<IdentityReport, IdentityError> {
    let fits = [energy, carbon, efficiency];
    for (fit, expected) in fits.iter().zip(Outcome::ALL) {
        if fit.outcome != expected {
            return Err(IdentityError::SpecMismatch(format!(
                "expected a {expected} fit, got {}",
                fit.outcome
            )));
        }
    }
    if fits.iter().any(|f| f.estimator != energy.estimator) {
        return Err(IdentityError::SpecMismatch("estimators differ".into()));
    }
    if fits.iter().any(|f| f.n_obs != energy.n_obs) {
        return Err(IdentityError::SpecMismatch("samples differ".into()));
    }
    let labels: Vec<&String> = energy.coefficients.keys().collect();
    for f in &fits[1..] {
        if f.coefficients.keys().collect::<Vec<_>>() != labels {
            return Err(IdentityError::SpecMismatch(
                "retained regressors differ".into(),
            ));
        }
    }

    let rows = labels
        .into_iter()
        .map(|label| {
            let e = energy.coefficients[label].estimate;
            let c = carbon.coefficients[label].estimate;
            let ee = efficiency.coefficients[label].estimate;
            let discrepancy = ee - (c - e);
            IdentityRow {
                label: label.clone(),
                energy: e,
                carbon: c,
                efficiency: ee,
                discrepancy,
                holds: discrepancy.abs() <= IDENTITY_TOLERANCE,
            }
        })
        .collect();
    Ok(IdentityReport {
        tolerance: IDENTITY_TOLERANCE,
        rows,
    })
}
