//! Household-year observations and their range checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cla::ConsumptionBundle;
use crate::sector::PerSector;

/// One household observed in one survey year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub household_id: String,
    pub year: i32,
    pub province: String,
    pub rural: bool,
    pub age: f64,
    pub male: bool,
    pub schooling: f64,
    pub married: bool,
    pub employed: bool,
    pub health: bool,
    /// Yuan.
    pub income: f64,
    /// Yuan.
    pub wealth: f64,
    pub business: bool,
    pub family_size: u32,
    /// Outstanding household debt in Yuan.
    pub credit_access: f64,
    /// Yuan spent per sector.
    pub spend: PerSector<f64>,
}

/// Whether range violations reject a row or only annotate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeViolation {
    pub field: &'static str,
    pub value: f64,
    pub allowed: &'static str,
}

impl fmt::Display for RangeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} outside {}",
            self.field, self.value, self.allowed
        )
    }
}

pub const AGE_RANGE: (f64, f64) = (16.0, 80.0);
pub const SCHOOLING_RANGE: (f64, f64) = (0.0, 22.0);
pub const FAMILY_SIZE_RANGE: (u32, u32) = (1, 20);
pub const MIN_INCOME: f64 = 1.05;
pub const MIN_WEALTH: f64 = 4.0;
pub const MAX_CREDIT: f64 = 1_000_000.0;

impl HouseholdRecord {
    pub fn bundle(&self) -> ConsumptionBundle {
        ConsumptionBundle {
            year: self.year,
            spend: self.spend,
        }
    }

    pub fn total_spend(&self) -> f64 {
        self.spend.0.iter().sum()
    }

    /// Checks the survey-variable ranges. An empty result means the record is in range.
    pub fn range_violations(&self) -> Vec<RangeViolation> {
        let mut out = Vec::new();
        let mut check = |field, value: f64, ok: bool, allowed| {
            if !ok {
                out.push(RangeViolation {
                    field,
                    value,
                    allowed,
                });
            }
        };
        check(
            "age",
            self.age,
            (AGE_RANGE.0..=AGE_RANGE.1).contains(&self.age),
            "[16, 80]",
        );
        check(
            "schooling",
            self.schooling,
            (SCHOOLING_RANGE.0..=SCHOOLING_RANGE.1).contains(&self.schooling),
            "[0, 22]",
        );
        check(
            "family_size",
            self.family_size as f64,
            (FAMILY_SIZE_RANGE.0..=FAMILY_SIZE_RANGE.1).contains(&self.family_size),
            "[1, 20]",
        );
        check("income", self.income, self.income >= MIN_INCOME, ">= 1.05");
        check("wealth", self.wealth, self.wealth >= MIN_WEALTH, ">= 4");
        check(
            "credit_access",
            self.credit_access,
            (0.0..=MAX_CREDIT).contains(&self.credit_access),
            "[0, 1000000]",
        );
        out
    }
}

#[cfg(test)]
pub(crate) fn sample_record() -> HouseholdRecord {
    HouseholdRecord {
        household_id: "hh1".into(),
        year: 2013,
        province: "P01".into(),
        rural: false,
        age: 50.0,
        male: true,
        schooling: 9.0,
        married: true,
        employed: true,
        health: false,
        income: 60_000.0,
        wealth: 500_000.0,
        business: false,
        family_size: 3,
        credit_access: 0.0,
        spend: PerSector::splat(1000.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_range_record_has_no_violations() {
        assert!(sample_record().range_violations().is_empty());
    }

    #[test]
    fn boundaries_are_inclusive() {
        let mut r = sample_record();
        r.age = 16.0;
        r.schooling = 22.0;
        r.family_size = 20;
        r.income = 1.05;
        r.wealth = 4.0;
        r.credit_access = 1_000_000.0;
        assert!(r.range_violations().is_empty());
    }

    #[test]
    fn each_violation_is_named() {
        let mut r = sample_record();
        r.age = 15.0;
        r.schooling = -1.0;
        r.family_size = 0;
        r.income = 1.0;
        r.wealth = 3.0;
        r.credit_access = 2e6;
        let fields: Vec<_> = r.range_violations().iter().map(|v| v.field).collect();
        assert_eq!(
            fields,
            [
                "age",
                "schooling",
                "family_size",
                "income",
                "wealth",
                "credit_access"
            ]
        );
    }
}
