//! Household indirect energy and carbon accounting from consumption bundles,
//! inequality summaries, and panel regressions of the resulting footprint on
//! household credit access.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`intensity`] holds per-sector energy and carbon intensities for 2005–2019.
//! 2. [`cla`] turns an eight-sector spending bundle into energy use (GJ),
//!    carbon emissions (kg), and efficiency (kg per GJ).
//! 3. [`panel`] builds regression designs and fits pooled OLS or household
//!    fixed-effects models of the log footprint.
//! 4. [`effects`] traces predicted outcomes over a credit grid; [`published`]
//!    checks reported coefficient tables for internal consistency.
//!
//! [`synth`] generates panels with a known data-generating process for testing.

pub mod cla;
pub mod effects;
pub mod inequality;
pub mod intensity;
pub mod panel;
pub mod panel_file;
pub mod published;
pub mod record;
pub mod sector;
pub mod synth;

pub use cla::{estimate_footprint, ConsumptionBundle, Footprint};
pub use intensity::{builtin_table, IntensityTable};
pub use panel::{Estimator, FitResult, Outcome, RegressionSpec, SeType};
pub use record::{HouseholdRecord, ValidationMode};
pub use sector::{PerSector, Sector};
