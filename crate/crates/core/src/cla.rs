//! Consumer-lifestyle accounting: indirect energy use, carbon emissions, and
//! the carbon-per-energy efficiency indicator of household spending.
//!
//! Each sector's spending is multiplied by that sector's intensity for the
//! survey year and the products are summed. Efficiency is the ratio of the
//! two sums, in kg of CO₂ per GJ; lower is more efficient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::intensity::{IntensityError, IntensityTable};
use crate::record::HouseholdRecord;
use crate::sector::{PerSector, Sector};

/// Intensities are quoted per 10⁴ Yuan.
pub const YUAN_PER_INTENSITY_UNIT: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClaError {
    #[error("bundle has zero total spend; efficiency is undefined")]
    EmptyBundle,
    #[error("negative spend {value} for {sector}")]
    NegativeSpend { sector: Sector, value: f64 },
    #[error("non-finite spend for {0}")]
    NonFiniteSpend(Sector),
    #[error("cohort is empty")]
    EmptyCohort,
    #[error(transparent)]
    Intensity(#[from] IntensityError),
}

/// Yuan spent in each sector during one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionBundle {
    pub year: i32,
    pub spend: PerSector<f64>,
}

impl ConsumptionBundle {
    pub fn new(year: i32) -> Self {
        ConsumptionBundle {
            year,
            spend: PerSector::splat(0.0),
        }
    }

    pub fn with(mut self, sector: Sector, yuan: f64) -> Self {
        self.spend[sector] = yuan;
        self
    }

    pub fn total(&self) -> f64 {
        self.spend.0.iter().sum()
    }

    pub fn validate(&self) -> Result<(), ClaError> {
        for (sector, value) in self.spend.iter() {
            if !value.is_finite() {
                return Err(ClaError::NonFiniteSpend(sector));
            }
            if value < 0.0 {
                return Err(ClaError::NegativeSpend { sector, value });
            }
        }
        if self.total() <= 0.0 {
            return Err(ClaError::EmptyBundle);
        }
        Ok(())
    }
}

/// Derived indirect footprint of one household-year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    /// GJ.
    pub energy_use: f64,
    /// kg CO₂.
    pub carbon_emissions: f64,
    /// kg per GJ.
    pub efficiency: f64,
}

impl Footprint {
    pub fn from_totals(energy_use: f64, carbon_emissions: f64) -> Self {
        Footprint {
            energy_use,
            carbon_emissions,
            efficiency: carbon_emissions / energy_use,
        }
    }
}

pub fn estimate_footprint(
    bundle: &ConsumptionBundle,
    table: &IntensityTable,
) -> Result<Footprint, ClaError> {
    let (energy, carbon) = table.year_row(bundle.year)?;
    bundle.validate()?;
    let mut energy_use = 0.0;
    let mut carbon_emissions = 0.0;
    for sector in Sector::ALL {
        let spend = bundle.spend[sector];
        energy_use += spend * energy[sector] / YUAN_PER_INTENSITY_UNIT;
        carbon_emissions += spend * carbon[sector] / YUAN_PER_INTENSITY_UNIT;
    }
    Ok(Footprint::from_totals(energy_use, carbon_emissions))
}

/// Aggregate efficiency of a group: total carbon over total energy.
pub fn cohort_efficiency(footprints: &[Footprint]) -> Result<f64, ClaError> {
    if footprints.is_empty() {
        return Err(ClaError::EmptyCohort);
    }
    let (energy, carbon) = footprints.iter().fold((0.0, 0.0), |(e, c), f| {
        (e + f.energy_use, c + f.carbon_emissions)
    });
    Ok(carbon / energy)
}

/// Sector efficiency over time: one `(year, kg/GJ)` series per sector.
pub fn sector_efficiency_series(table: &IntensityTable) -> Vec<(Sector, Vec<(i32, f64)>)> {
    Sector::ALL
        .into_iter()
        .map(|sector| {
            let points = IntensityTable::years()
                .map(|year| {
                    let ratio = table
                        .sector_ratio(year, sector)
                        .expect("years() only yields covered years");
                    (year, ratio)
                })
                .collect();
            (sector, points)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FootprintRow {
    /// 0-based position in the input.
    pub row: usize,
    pub household_id: String,
    pub year: i32,
    pub footprint: Footprint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub row: usize,
    pub cause: ClaError,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FootprintPanel {
    pub rows: Vec<FootprintRow>,
    pub errors: Vec<RowError>,
}

/// Footprints for every record, in input order. Rows that cannot be
/// evaluated are returned in `errors` with their index.
pub fn footprint_panel(records: &[HouseholdRecord], table: &IntensityTable) -> FootprintPanel {
    let results: Vec<_> = records
        .par_iter()
        .enumerate()
        .map(|(row, record)| (row, estimate_footprint(&record.bundle(), table)))
        .collect();
    let mut panel = FootprintPanel::default();
    for (row, result) in results {
        match result {
            Ok(footprint) => panel.rows.push(FootprintRow {
                row,
                household_id: records[row].household_id.clone(),
                year: records[row].year,
                footprint,
            }),
            Err(cause) => panel.errors.push(RowError { row, cause }),
        }
    }
    panel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::builtin_table;
    use crate::record::sample_record;
    use approx::assert_relative_eq;

    #[test]
    fn single_sector_bundle_reproduces_table_row() {
        let t = builtin_table();
        let f = estimate_footprint(
            &ConsumptionBundle::new(2005).with(Sector::Food, 10_000.0),
            &t,
        )
        .unwrap();
        assert_relative_eq!(f.energy_use, 17.64, max_relative = 1e-14);
        assert_relative_eq!(f.carbon_emissions, 163.68, max_relative = 1e-14);
        assert_relative_eq!(f.efficiency, 9.278_911_564_625_85, max_relative = 1e-12);
    }

    #[test]
    fn two_sector_bundle() {
        let t = builtin_table();
        let b = ConsumptionBundle::new(2019)
            .with(Sector::Residence, 5000.0)
            .with(Sector::Education, 5000.0);
        let f = estimate_footprint(&b, &t).unwrap();
        assert_relative_eq!(f.energy_use, 26.485, max_relative = 1e-13);
        assert_relative_eq!(f.carbon_emissions, 233.585, max_relative = 1e-13);
        assert_relative_eq!(f.efficiency, 8.819_520_483_292_43, max_relative = 1e-12);
    }

    #[test]
    fn bundle_errors() {
        let t = builtin_table();
        assert_eq!(
            estimate_footprint(&ConsumptionBundle::new(2010), &t),
            Err(ClaError::EmptyBundle)
        );
        assert_eq!(
            estimate_footprint(&ConsumptionBundle::new(2004).with(Sector::Food, 1.0), &t),
            Err(ClaError::Intensity(IntensityError::YearOutOfRange(2004)))
        );
        assert!(matches!(
            estimate_footprint(&ConsumptionBundle::new(2010).with(Sector::Food, -1.0), &t),
            Err(ClaError::NegativeSpend {
                sector: Sector::Food,
                ..
            })
        ));
        assert_eq!(
            estimate_footprint(
                &ConsumptionBundle::new(2010).with(Sector::Clothing, f64::NAN),
                &t
            ),
            Err(ClaError::NonFiniteSpend(Sector::Clothing))
        );
    }

    #[test]
    fn cohort_examples() {
        let a = Footprint::from_totals(10.0, 90.0);
        let b = Footprint::from_totals(10.0, 92.0);
        assert_relative_eq!(
            cohort_efficiency(&[a, b]).unwrap(),
            9.1,
            max_relative = 1e-14
        );
        assert_eq!(cohort_efficiency(&[a]).unwrap(), a.efficiency);
        let c = Footprint::from_totals(1.0, 9.0);
        let d = Footprint::from_totals(3.0, 27.6);
        assert_relative_eq!(
            cohort_efficiency(&[c, d]).unwrap(),
            9.15,
            max_relative = 1e-14
        );
        assert_eq!(cohort_efficiency(&[]), Err(ClaError::EmptyCohort));
    }

    #[test]
    fn residence_series() {
        let series = sector_efficiency_series(&builtin_table());
        assert_eq!(series.len(), 8);
        assert!(series.iter().all(|(_, pts)| pts.len() == 15));
        let (_, residence) = &series[Sector::Residence.index()];
        assert_eq!(residence[0].0, 2005);
        assert_relative_eq!(residence[0].1, 9.131_467_345_207_803, max_relative = 1e-12);
        assert_relative_eq!(residence[14].1, 8.727_807_336_880_426, max_relative = 1e-12);
    }

    #[test]
    fn panel_reports_bad_rows_in_order() {
        let t = builtin_table();
        assert_eq!(footprint_panel(&[], &t), FootprintPanel::default());

        let good = sample_record();
        let mut empty = sample_record();
        empty.household_id = "hh2".into();
        empty.spend = PerSector::splat(0.0);
        let mut other = sample_record();
        other.household_id = "hh3".into();

        let panel = footprint_panel(&[good.clone(), empty, other], &t);
        assert_eq!(panel.rows.len(), 2);
        assert_eq!(panel.rows[0].row, 0);
        assert_eq!(panel.rows[1].row, 2);
        assert_eq!(panel.rows[1].household_id, "hh3");
        assert_eq!(
            panel.errors,
            vec![RowError {
                row: 1,
                cause: ClaError::EmptyBundle
            }]
        );
    }
}
