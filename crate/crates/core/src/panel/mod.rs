//! Pooled OLS and household fixed-effects (within) regressions of log
//! footprint outcomes on log credit access and household controls.

pub(crate) mod design;
mod fit;
mod identity;
mod qr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use design::{build_design, regressor_labels, Design, DesignError, SkippedRow, CONTROL_LABELS};
pub use fit::{fit, fit_pooled_ols, fit_within_fe, Coefficient, FitError, FitResult, RankPolicy};
pub use identity::{coefficient_identity_check, IdentityError, IdentityReport, IdentityRow};
pub use qr::{least_squares, LeastSquares};

/// Log footprint quantity on the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    LnEnergy,
    LnCarbon,
    LnEfficiency,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::LnEnergy, Outcome::LnCarbon, Outcome::LnEfficiency];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::LnEnergy => "ln_energy",
            Outcome::LnCarbon => "ln_carbon",
            Outcome::LnEfficiency => "ln_efficiency",
        }
    }

    /// Short name used in published column ids (`energy`, `carbon`, `efficiency`).
    pub fn short(self) -> &'static str {
        match self {
            Outcome::LnEnergy => "energy",
            Outcome::LnCarbon => "carbon",
            Outcome::LnEfficiency => "efficiency",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.name() == s || o.short() == s)
            .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    PooledOls,
    WithinFe,
}

impl Estimator {
    /// Column tag used in published tables.
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::PooledOls => "OLS",
            Estimator::WithinFe => "FE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeType {
    #[default]
    Classical,
    ClusterByHousehold,
}

/// Declarative description of one regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub outcome: Outcome,
    pub estimator: Estimator,
    pub include_credit_square: bool,
    pub year_dummies: bool,
    /// Ignored (and reported as absorbed) under the within estimator.
    pub province_dummies: bool,
    pub se_type: SeType,
}

impl RegressionSpec {
    pub fn new(outcome: Outcome, estimator: Estimator) -> Self {
        RegressionSpec {
            outcome,
            estimator,
            include_credit_square: false,
            year_dummies: true,
            province_dummies: true,
            se_type: SeType::Classical,
        }
    }

    pub fn with_credit_square(mut self, on: bool) -> Self {
        self.include_credit_square = on;
        self
    }

    pub fn with_se(mut self, se_type: SeType) -> Self {
        self.se_type = se_type;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Constant within every household, so absorbed by the household effect.
    NoWithinVariation,
    /// Linear combination of columns earlier in build order.
    Collinear,
    /// Categorical absorbed by the household effect.
    AbsorbedByFixedEffects,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::NoWithinVariation => "no within-household variation",
            DropReason::Collinear => "collinear with earlier columns",
            DropReason::AbsorbedByFixedEffects => "absorbed by household fixed effects",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedTerm {
    pub label: String,
    pub reason: DropReason,
}

pub const LN_CREDIT: &str = "ln_credit";
pub const LN_CREDIT_SQ: &str = "ln_credit_sq";
pub const INTERCEPT: &str = "intercept";
