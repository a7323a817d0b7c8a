use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::{
    DropReason, DroppedTerm, Estimator, Outcome, RegressionSpec, INTERCEPT, LN_CREDIT, LN_CREDIT_SQ,
};
use crate::cla::{estimate_footprint, Footprint};
use crate::intensity::IntensityTable;
use crate::record::HouseholdRecord;

/// Household controls in the row order of the published tables.
pub const CONTROL_LABELS: [&str; 15] = [
    "age",
    "age_sq_100",
    "male",
    "schooling",
    "schooling_sq_100",
    "married",
    "employed",
    "health",
    "ln_income",
    "ln_income_sq",
    "ln_wealth",
    "ln_wealth_sq",
    "business",
    "family_size",
    "rural",
];

/// Credit terms followed by the controls; no dummies or intercept.
pub fn regressor_labels(include_credit_square: bool) -> Vec<&'static str> {
    let mut labels = vec![LN_CREDIT];
    if include_credit_square {
        labels.push(LN_CREDIT_SQ);
    }
    labels.extend(CONTROL_LABELS);
    labels
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn control_values(r: &HouseholdRecord) -> [f64; 15] {
    let ln_income = r.income.ln();
    let ln_wealth = r.wealth.ln();
    [
        r.age,
        r.age * r.age / 100.0,
        flag(r.male),
        r.schooling,
        r.schooling * r.schooling / 100.0,
        flag(r.married),
        flag(r.employed),
        flag(r.health),
        ln_income,
        ln_income * ln_income,
        ln_wealth,
        ln_wealth * ln_wealth,
        flag(r.business),
        r.family_size as f64,
        flag(r.rural),
    ]
}

fn outcome_value(outcome: Outcome, f: &Footprint) -> f64 {
    match outcome {
        Outcome::LnEnergy => f.energy_use.ln(),
        Outcome::LnCarbon => f.carbon_emissions.ln(),
        Outcome::LnEfficiency => f.efficiency.ln(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRow {
    pub row: usize,
    pub household_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error("no usable observations ({skipped} rows skipped)")]
    EmptySample { skipped: usize },
    #[error("design shape mismatch: {0}")]
    Shape(String),
}

/// Outcome vector, column-major regressors, and household grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub outcome: Outcome,
    pub estimator: Estimator,
    pub y: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    /// Household index (into `group_ids`) for each observation.
    pub groups: Vec<usize>,
    pub group_ids: Vec<String>,
    /// Terms requested but never built (for example province dummies under FE).
    pub pre_dropped: Vec<DroppedTerm>,
    pub skipped_rows: Vec<SkippedRow>,
}

impl Design {
    /// Assembles a design from raw parts; `groups` are household labels per row.
    pub fn from_parts(
        outcome: Outcome,
        estimator: Estimator,
        y: Vec<f64>,
        columns: Vec<Vec<f64>>,
        labels: Vec<String>,
        groups: &[String],
    ) -> Result<Self, DesignError> {
        let n = y.len();
        if columns.len() != labels.len() {
            return Err(DesignError::Shape(format!(
                "{} columns but {} labels",
                columns.len(),
                labels.len()
            )));
        }
        if let Some(bad) = columns.iter().position(|c| c.len() != n) {
            return Err(DesignError::Shape(format!(
                "column `{}` has {} rows, outcome has {n}",
                labels[bad],
                columns[bad].len()
            )));
        }
        if groups.len() != n {
            return Err(DesignError::Shape(format!(
                "{} group ids for {n} rows",
                groups.len()
            )));
        }
        if n == 0 {
            return Err(DesignError::EmptySample { skipped: 0 });
        }
        let (group_index, group_ids) = index_groups(groups.iter().map(String::as_str));
        Ok(Design {
            outcome,
            estimator,
            y,
            columns,
            labels,
            groups: group_index,
            group_ids,
            pre_dropped: Vec::new(),
            skipped_rows: Vec::new(),
        })
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.columns[i].as_slice())
    }
}

/// Dense 0-based indices in order of first appearance.
fn index_groups<'a>(ids: impl Iterator<Item = &'a str>) -> (Vec<usize>, Vec<String>) {
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    let mut names = Vec::new();
    let index = ids
        .map(|id| {
            *lookup.entry(id).or_insert_with(|| {
                names.push(id.to_string());
                names.len() - 1
            })
        })
        .collect();
    (index, names)
}

/// Builds the regression design from household records.
///
/// Credit enters as `ln(1 + credit)`. Year dummies (first year omitted) are
/// always added when requested; province dummies (first province, in
/// lexicographic order, omitted) only for pooled OLS, which also carries an
/// intercept. Rows whose footprint cannot be computed, or whose income or
/// wealth is not positive, are skipped and reported.
pub fn build_design(
    records: &[HouseholdRecord],
    spec: &RegressionSpec,
    table: &IntensityTable,
) -> Result<Design, DesignError> {
    let mut skipped_rows = Vec::new();
    let mut usable: Vec<(&HouseholdRecord, f64)> = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        let skip = |reason: String| SkippedRow {
            row,
            household_id: record.household_id.clone(),
            reason,
        };
        if !(record.income > 0.0 && record.wealth > 0.0 && record.credit_access >= 0.0) {
            skipped_rows.push(skip(
                "income and wealth must be positive, credit non-negative".into(),
            ));
            continue;
        }
        match estimate_footprint(&record.bundle(), table) {
            Ok(f) => usable.push((record, outcome_value(spec.outcome, &f))),
            Err(e) => skipped_rows.push(skip(e.to_string())),
        }
    }
    if usable.is_empty() {
        return Err(DesignError::EmptySample {
            skipped: skipped_rows.len(),
        });
    }

    let pooled = spec.estimator == Estimator::PooledOls;
    let mut labels: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    if pooled {
        labels.push(INTERCEPT.into());
        columns.push(vec![1.0; usable.len()]);
    }

    let ln_credit: Vec<f64> = usable
        .iter()
        .map(|(r, _)| r.credit_access.ln_1p())
        .collect();
    if spec.include_credit_square {
        let sq = ln_credit.iter().map(|v| v * v).collect();
        labels.extend([LN_CREDIT.to_string(), LN_CREDIT_SQ.to_string()]);
        columns.extend([ln_credit, sq]);
    } else {
        labels.push(LN_CREDIT.into());
        columns.push(ln_credit);
    }

    let rows: Vec<[f64; 15]> = usable.iter().map(|(r, _)| control_values(r)).collect();
    for (j, label) in CONTROL_LABELS.iter().enumerate() {
        labels.push(label.to_string());
        columns.push(rows.iter().map(|c| c[j]).collect());
    }

    if spec.year_dummies {
        let years: BTreeSet<i32> = usable.iter().map(|(r, _)| r.year).collect();
        for year in years.into_iter().skip(1) {
            labels.push(format!("year_{year}"));
            columns.push(usable.iter().map(|(r, _)| flag(r.year == year)).collect());
        }
    }

    let mut pre_dropped = Vec::new();
    if spec.province_dummies {
        if pooled {
            let provinces: BTreeSet<&str> =
                usable.iter().map(|(r, _)| r.province.as_str()).collect();
            for province in provinces.into_iter().skip(1) {
                labels.push(format!("province_{province}"));
                columns.push(
                    usable
                        .iter()
                        .map(|(r, _)| flag(r.province == province))
                        .collect(),
                );
            }
        } else {
            pre_dropped.push(DroppedTerm {
                label: "province".into(),
                reason: DropReason::AbsorbedByFixedEffects,
            });
        }
    }

    let (groups, group_ids) = index_groups(usable.iter().map(|(r, _)| r.household_id.as_str()));
    Ok(Design {
        outcome: spec.outcome,
        estimator: spec.estimator,
        y: usable.iter().map(|(_, y)| *y).collect(),
        columns,
        labels,
        groups,
        group_ids,
        pre_dropped,
        skipped_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::builtin_table;
    use crate::record::sample_record;
    use approx::assert_abs_diff_eq;

    fn design_for(records: &[HouseholdRecord], spec: RegressionSpec) -> Design {
        build_design(records, &spec, &builtin_table()).unwrap()
    }

    #[test]
    fn transforms() {
        let mut r = sample_record();
        r.credit_access = 0.0;
        r.age = 50.0;
        r.income = 10f64.exp();
        let d = design_for(
            &[r],
            RegressionSpec::new(Outcome::LnEnergy, Estimator::PooledOls),
        );
        assert_eq!(d.column("ln_credit").unwrap(), [0.0]);
        assert_eq!(d.column("age").unwrap(), [50.0]);
        assert_eq!(d.column("age_sq_100").unwrap(), [25.0]);
        assert_abs_diff_eq!(d.column("ln_income").unwrap()[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.column("ln_income_sq").unwrap()[0], 100.0, epsilon = 1e-10);
        assert_eq!(d.column("intercept").unwrap(), [1.0]);
        assert_eq!(d.column("male").unwrap(), [1.0]);
    }

    #[test]
    fn dummies_drop_first_category() {
        let mut a = sample_record();
        a.province = "Zhejiang".into();
        a.year = 2015;
        let mut b = sample_record();
        b.province = "Anhui".into();
        b.year = 2011;
        let mut c = sample_record();
        c.province = "Beijing".into();
        c.year = 2013;
        let d = design_for(
            &[a.clone(), b.clone(), c.clone()],
            RegressionSpec::new(Outcome::LnCarbon, Estimator::PooledOls).with_credit_square(true),
        );
        let tail: Vec<_> = d.labels.iter().skip(18).cloned().collect();
        assert_eq!(
            tail,
            [
                "year_2013",
                "year_2015",
                "province_Beijing",
                "province_Zhejiang"
            ]
        );
        assert_eq!(d.column("year_2015").unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(d.column("province_Beijing").unwrap(), [0.0, 0.0, 1.0]);

        let fe = design_for(
            &[a, b, c],
            RegressionSpec::new(Outcome::LnCarbon, Estimator::WithinFe),
        );
        assert!(fe
            .labels
            .iter()
            .all(|l| !l.starts_with("province_") && l != "intercept"));
        assert_eq!(fe.pre_dropped.len(), 1);
        assert_eq!(fe.pre_dropped[0].reason, DropReason::AbsorbedByFixedEffects);
    }

    #[test]
    fn outcomes_are_logs_of_footprint() {
        let r = sample_record();
        let f = estimate_footprint(&r.bundle(), &builtin_table()).unwrap();
        for outcome in Outcome::ALL {
            let d = design_for(
                std::slice::from_ref(&r),
                RegressionSpec::new(outcome, Estimator::PooledOls),
            );
            assert_eq!(d.y[0], outcome_value(outcome, &f));
        }
    }

    #[test]
    fn unusable_rows_are_reported() {
        let mut bad = sample_record();
        bad.household_id = "empty".into();
        bad.spend = crate::sector::PerSector::splat(0.0);
        let d = design_for(
            &[sample_record(), bad],
            RegressionSpec::new(Outcome::LnEnergy, Estimator::PooledOls),
        );
        assert_eq!(d.n_obs(), 1);
        assert_eq!(d.skipped_rows.len(), 1);
        assert_eq!(d.skipped_rows[0].row, 1);

        let mut only_bad = sample_record();
        only_bad.year = 2030;
        assert_eq!(
            build_design(
                &[only_bad],
                &RegressionSpec::new(Outcome::LnEnergy, Estimator::PooledOls),
                &builtin_table()
            ),
            Err(DesignError::EmptySample { skipped: 1 })
        );
    }

    #[test]
    fn groups_indexed_by_first_appearance() {
        let (idx, names) = index_groups(["b", "a", "b", "c"].into_iter());
        assert_eq!(idx, [0, 1, 0, 2]);
        assert_eq!(names, ["b", "a", "c"]);
    }
}
