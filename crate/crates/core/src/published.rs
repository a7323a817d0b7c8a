//! Published regression coefficients (two tables × six columns) and the
//! outcome-identity check that validates their transcription.
//!
//! Because efficiency is carbon divided by energy, and least squares is
//! linear in the outcome, every efficiency coefficient must equal the carbon
//! coefficient minus the energy coefficient from the same estimator. The
//! published figures carry five decimals, so the check allows the worst-case
//! accumulation of three roundings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::panel::{Estimator, Outcome};

pub const BUILTIN_PUBLISHED_CSV: &str = include_str!("../data/published_coefficients.csv");
pub const PUBLISHED_HEADER: &str = "table,row_label,column_id,coefficient,std_error,stars";
pub const DEFAULT_TOLERANCE: f64 = 1.5e-5;

/// Decimal with five fractional digits, stored in units of 10⁻⁵.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fixed5(pub i64);

impl Fixed5 {
    pub const SCALE: f64 = 1e5;

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

impl fmt::Display for Fixed5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:05}", a / 100_000, a % 100_000)
    }
}

impl FromStr for Fixed5 {
    type Err = PublishedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PublishedError::BadNumber(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        if whole.is_empty()
            || frac.len() > 5
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: i64 = whole.parse().map_err(|_| bad())?;
        let frac_units: i64 = format!("{frac:0<5}").parse().map_err(|_| bad())?;
        let units = whole
            .checked_mul(100_000)
            .and_then(|w| w.checked_add(frac_units))
            .ok_or_else(bad)?;
        Ok(Fixed5(if negative { -units } else { units }))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PublishedError {
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("unknown column id `{0}` (expected e.g. FE-efficiency)")]
    BadColumn(String),
    #[error("published file header must be `{PUBLISHED_HEADER}`")]
    BadHeader,
    #[error("published file line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("no published table {0}")]
    UnknownTable(u8),
}

/// `OLS-energy`, `FE-efficiency`, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnId {
    pub estimator: Estimator,
    pub outcome: Outcome,
}

impl ColumnId {
    pub fn new(estimator: Estimator, outcome: Outcome) -> Self {
        ColumnId { estimator, outcome }
    }
}

impl fmt::Display for ColumnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.estimator.tag(), self.outcome.short())
    }
}

impl FromStr for ColumnId {
    type Err = PublishedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PublishedError::BadColumn(s.to_string());
        let (est, out) = s.split_once('-').ok_or_else(bad)?;
        let estimator = match est {
            "OLS" => Estimator::PooledOls,
            "FE" => Estimator::WithinFe,
            _ => return Err(bad()),
        };
        let outcome = Outcome::ALL
            .into_iter()
            .find(|o| o.short() == out)
            .ok_or_else(bad)?;
        Ok(ColumnId { estimator, outcome })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PublishedCell {
    pub coefficient: Fixed5,
    pub std_error: Fixed5,
    /// Significance stars (0–3).
    pub stars: u8,
}

/// One published table. A `None` cell is a blank in the original (a term
/// not estimated under that column), never a zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedTable {
    pub id: u8,
    /// Regressor rows in published order.
    pub rows: Vec<String>,
    pub cells: BTreeMap<(String, ColumnId), Option<PublishedCell>>,
}

impl PublishedTable {
    pub fn cell(&self, row: &str, column: ColumnId) -> Option<PublishedCell> {
        self.cells
            .get(&(row.to_string(), column))
            .copied()
            .flatten()
    }

    /// Non-blank coefficients of one column, in row order.
    pub fn column(&self, column: ColumnId) -> IndexMap<String, f64> {
        self.rows
            .iter()
            .filter_map(|r| {
                self.cell(r, column)
                    .map(|c| (r.clone(), c.coefficient.to_f64()))
            })
            .collect()
    }
}

/// Parses the delimited coefficient file into tables ordered by id.
pub fn parse_published(text: &str) -> Result<Vec<PublishedTable>, PublishedError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == PUBLISHED_HEADER => {}
        _ => return Err(PublishedError::BadHeader),
    }
    let mut tables: BTreeMap<u8, PublishedTable> = BTreeMap::new();
    for (idx, line) in lines {
        let bad = |message: String| PublishedError::BadRow {
            line: idx + 1,
            message,
        };
        let f: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let id: u8 = f[0]
            .parse()
            .map_err(|_| bad(format!("bad table id `{}`", f[0])))?;
        let row = f[1].to_string();
        let column: ColumnId = f[2].parse()?;
        let cell = match (f[3], f[4], f[5]) {
            ("", "", "") => None,
            (coef, se, stars) => Some(PublishedCell {
                coefficient: coef.parse()?,
                std_error: se.parse()?,
                stars: stars
                    .parse()
                    .ok()
                    .filter(|s| *s <= 3)
                    .ok_or_else(|| bad(format!("bad stars `{stars}`")))?,
            }),
        };
        let table = tables.entry(id).or_insert_with(|| PublishedTable {
            id,
            rows: Vec::new(),
            cells: BTreeMap::new(),
        });
        if !table.rows.contains(&row) {
            table.rows.push(row.clone());
        }
        if table.cells.insert((row.clone(), column), cell).is_some() {
            return Err(bad(format!("duplicate cell {row} / {column}")));
        }
    }
    Ok(tables.into_values().collect())
}

pub fn builtin_published() -> Vec<PublishedTable> {
    parse_published(BUILTIN_PUBLISHED_CSV).expect("embedded coefficient file is well formed")
}

pub fn builtin_table_by_id(id: u8) -> Result<PublishedTable, PublishedError> {
    builtin_published()
        .into_iter()
        .find(|t| t.id == id)
        .ok_or(PublishedError::UnknownTable(id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// All three cells blank; nothing to check.
    Blank,
    /// Some but not all of the three cells blank.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCheck {
    pub table: u8,
    pub row: String,
    pub estimator: Estimator,
    pub energy: Option<f64>,
    pub carbon: Option<f64>,
    pub efficiency: Option<f64>,
    /// `carbon − energy`.
    pub implied: Option<f64>,
    pub discrepancy: Option<f64>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedReport {
    pub tolerance: f64,
    pub checks: Vec<CellCheck>,
}

impl PublishedReport {
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.status, CheckStatus::Pass | CheckStatus::Blank))
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }
}

/// Checks `β_efficiency = β_carbon − β_energy` for every row and estimator.
/// Arithmetic is done on the exact five-decimal values.
pub fn validate_published(table: &PublishedTable, tolerance: f64) -> PublishedReport {
    let mut checks = Vec::new();
    for row in &table.rows {
        for estimator in [Estimator::PooledOls, Estimator::WithinFe] {
            let get = |o| {
                table
                    .cell(row, ColumnId::new(estimator, o))
                    .map(|c| c.coefficient)
            };
            let (e, c, ee) = (
                get(Outcome::LnEnergy),
                get(Outcome::LnCarbon),
                get(Outcome::LnEfficiency),
            );
            let (implied, discrepancy, status) = match (e, c, ee) {
                (None, None, None) => (None, None, CheckStatus::Blank),
                (Some(e), Some(c), Some(ee)) => {
                    let implied = c.0 - e.0;
                    let diff = ee.0 - implied;
                    let within =
                        diff.unsigned_abs() as f64 <= tolerance * Fixed5::SCALE * (1.0 + 1e-9);
                    (
                        Some(Fixed5(implied).to_f64()),
                        Some(Fixed5(diff).to_f64()),
                        if within {
                            CheckStatus::Pass
                        } else {
                            CheckStatus::Fail
                        },
                    )
                }
                _ => (None, None, CheckStatus::Incomplete),
            };
            checks.push(CellCheck {
                table: table.id,
                row: row.clone(),
                estimator,
                energy: e.map(Fixed5::to_f64),
                carbon: c.map(Fixed5::to_f64),
                efficiency: ee.map(Fixed5::to_f64),
                implied,
                discrepancy,
                status,
            });
        }
    }
    PublishedReport { tolerance, checks }
}
