//! Delimited household-panel files: one header row, one row per household-year.
//!
//! Header names are fixed and case-sensitive. Rows that cannot be turned into
//! a valid [`HouseholdRecord`] are returned as rejections with their cause;
//! nothing is dropped silently.

use std::io::{Read, Write};

use serde::Serialize;

use crate::record::{HouseholdRecord, RangeViolation, ValidationMode};
use crate::sector::{PerSector, Sector};

pub const PANEL_COLUMNS: [&str; 23] = [
    "household_id",
    "year",
    "province",
    "rural",
    "age",
    "male",
    "schooling",
    "married",
    "employed",
    "health",
    "income",
    "wealth",
    "business",
    "family_size",
    "credit_access",
    "food",
    "clothing",
    "facilities",
    "medicine",
    "communication",
    "education",
    "residence",
    "commodities",
];

#[derive(Debug, thiserror::Error)]
pub enum PanelFileError {
    #[error("panel header mismatch at column {position}: expected `{expected}`, found `{found}`")]
    Header {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("panel file: {0}")]
    Csv(#[from] csv::Error),
    #[error("panel file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    MissingField {
        field: &'static str,
    },
    BadValue {
        field: &'static str,
        value: String,
    },
    OutOfRange {
        violations: Vec<RangeViolation>,
    },
    /// Parsed and in range, but rejected later (for example no footprint).
    Unusable {
        cause: String,
    },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::MissingField { field } => write!(f, "missing {field}"),
            RejectReason::BadValue { field, value } => write!(f, "bad {field} `{value}`"),
            RejectReason::OutOfRange { violations } => {
                let parts: Vec<String> = violations.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join("; "))
            }
            RejectReason::Unusable { cause } => write!(f, "{cause}"),
        }
    }
}

impl RejectReason {
    pub fn is_missing(&self) -> bool {
        matches!(self, RejectReason::MissingField { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 0-based data row (the header is not counted).
    pub row: usize,
    pub household_id: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelRead {
    pub records: Vec<HouseholdRecord>,
    /// Input row index of each record.
    pub rows: Vec<usize>,
    pub rejected: Vec<RejectedRow>,
    /// Range violations kept under [`ValidationMode::Soft`].
    pub warnings: Vec<RejectedRow>,
}

struct Fields<'a> {
    record: &'a csv::StringRecord,
}

impl<'a> Fields<'a> {
    fn raw(&self, i: usize) -> Result<&'a str, RejectReason> {
        let value = self.record.get(i).unwrap_or("").trim();
        if value.is_empty() {
            Err(RejectReason::MissingField {
                field: PANEL_COLUMNS[i],
            })
        } else {
            Ok(value)
        }
    }

    fn bad(&self, i: usize) -> RejectReason {
        RejectReason::BadValue {
            field: PANEL_COLUMNS[i],
            value: self.record.get(i).unwrap_or("").to_string(),
        }
    }

    fn number(&self, i: usize) -> Result<f64, RejectReason> {
        self.raw(i)?
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.bad(i))
    }

    fn flag(&self, i: usize) -> Result<bool, RejectReason> {
        match self.raw(i)? {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(self.bad(i)),
        }
    }

    fn integer<T: std::str::FromStr>(&self, i: usize) -> Result<T, RejectReason> {
        self.raw(i)?.parse().map_err(|_| self.bad(i))
    }
}

fn parse_row(record: &csv::StringRecord) -> Result<HouseholdRecord, RejectReason> {
    let f = Fields { record };
    let mut spend = PerSector::splat(0.0);
    for sector in Sector::ALL {
        let i = 15 + sector.index();
        let v = f.number(i)?;
        if v < 0.0 {
            return Err(f.bad(i));
        }
        spend[sector] = v;
    }
    Ok(HouseholdRecord {
        household_id: f.raw(0)?.to_string(),
        year: f.integer(1)?,
        province: f.raw(2)?.to_string(),
        rural: f.flag(3)?,
        age: f.number(4)?,
        male: f.flag(5)?,
        schooling: f.number(6)?,
        married: f.flag(7)?,
        employed: f.flag(8)?,
        health: f.flag(9)?,
        income: f.number(10)?,
        wealth: f.number(11)?,
        business: f.flag(12)?,
        family_size: f.integer(13)?,
        credit_access: f.number(14)?,
        spend,
    })
}

pub fn check_header(header: &csv::StringRecord) -> Result<(), PanelFileError> {
    for (position, expected) in PANEL_COLUMNS.iter().enumerate() {
        let found = header.get(position).unwrap_or("");
        if found != *expected {
            return Err(PanelFileError::Header {
                position,
                expected: expected.to_string(),
                found: found.to_string(),
            });
        }
    }
    if header.len() > PANEL_COLUMNS.len() {
        return Err(PanelFileError::Header {
            position: PANEL_COLUMNS.len(),
            expected: String::new(),
            found: header.get(PANEL_COLUMNS.len()).unwrap_or("").to_string(),
        });
    }
    Ok(())
}

pub fn read_panel<R: Read>(reader: R, mode: ValidationMode) -> Result<PanelRead, PanelFileError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    check_header(rdr.headers()?)?;
    let mut out = PanelRead::default();
    for (row, result) in rdr.records().enumerate() {
        let record = result?;
        let household_id = record.get(0).unwrap_or("").to_string();
        let reject = |reason| RejectedRow {
            row,
            household_id: household_id.clone(),
            reason,
        };
        if record.len() != PANEL_COLUMNS.len() {
            out.rejected.push(reject(RejectReason::BadValue {
                field: "row",
                value: format!("{} fields", record.len()),
            }));
            continue;
        }
        match parse_row(&record) {
            Ok(parsed) => {
                let violations = parsed.range_violations();
                if !violations.is_empty() {
                    let entry = reject(RejectReason::OutOfRange { violations });
                    if mode == ValidationMode::Hard {
                        out.rejected.push(entry);
                        continue;
                    }
                    out.warnings.push(entry);
                }
                out.records.push(parsed);
                out.rows.push(row);
            }
            Err(reason) => out.rejected.push(reject(reason)),
        }
    }
    Ok(out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes records with shortest round-trip number formatting.
pub fn write_panel<W: Write>(records: &[HouseholdRecord], writer: W) -> Result<(), PanelFileError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PANEL_COLUMNS)?;
    for r in records {
        let mut row: Vec<String> = vec![
            r.household_id.clone(),
            r.year.to_string(),
            r.province.clone(),
            flag(r.rural).into(),
            r.age.to_string(),
            flag(r.male).into(),
            r.schooling.to_string(),
            flag(r.married).into(),
            flag(r.employed).into(),
            flag(r.health).into(),
            r.income.to_string(),
            r.wealth.to_string(),
            flag(r.business).into(),
            r.family_size.to_string(),
            r.credit_access.to_string(),
        ];
        row.extend(r.spend.0.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Error sidecar: `row,line,household_id,cause`.
pub fn write_rejections<W: Write>(rows: &[RejectedRow], writer: W) -> Result<(), PanelFileError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "line", "household_id", "cause"])?;
    for r in rows {
        w.write_record([
            r.row.to_string(),
            (r.row + 2).to_string(),
            r.household_id.clone(),
            r.reason.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::sample_record;

    fn to_text(records: &[HouseholdRecord]) -> String {
        let mut buf = Vec::new();
        write_panel(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn write_then_read() {
        let mut r = sample_record();
        r.income = 12345.678901234567;
        r.credit_access = 0.1 + 0.2;
        let text = to_text(&[r.clone()]);
        let read = read_panel(text.as_bytes(), ValidationMode::Hard).unwrap();
        assert_eq!(read.records, vec![r]);
        assert_eq!(read.rows, vec![0]);
        assert!(read.rejected.is_empty());
    }

    #[test]
    fn header_is_case_sensitive() {
        let text = to_text(&[sample_record()]).replacen("household_id", "Household_ID", 1);
        match read_panel(text.as_bytes(), ValidationMode::Hard) {
            Err(PanelFileError::Header { position: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let extra = to_text(&[]).replace("commodities", "commodities,extra");
        assert!(read_panel(extra.as_bytes(), ValidationMode::Hard).is_err());
    }

    #[test]
    fn bad_rows_are_collected() {
        let good = to_text(&[sample_record()]);
        let line = good.lines().nth(1).unwrap();
        let missing = line.replacen(",50,", ",,", 1);
        let bad_flag = line.replacen("hh1,2013,P01,0", "hh3,2013,P01,2", 1);
        let mut young = sample_record();
        young.age = 12.0;
        let young_line = to_text(&[young]).lines().nth(1).unwrap().to_string();
        let text = format!(
            "{}\n{line}\n{missing}\n{bad_flag}\n{young_line}\nshort,row\n",
            PANEL_COLUMNS.join(",")
        );

        let hard = read_panel(text.as_bytes(), ValidationMode::Hard).unwrap();
        assert_eq!(hard.records.len(), 1);
        let reasons: Vec<_> = hard
            .rejected
            .iter()
            .map(|r| (r.row, r.reason.clone()))
            .collect();
        assert_eq!(reasons[0], (1, RejectReason::MissingField { field: "age" }));
        assert_eq!(
            reasons[1],
            (
                2,
                RejectReason::BadValue {
                    field: "rural",
                    value: "2".into()
                }
            )
        );
        assert!(matches!(reasons[2], (3, RejectReason::OutOfRange { .. })));
        assert_eq!(reasons[3].0, 4);

        let soft = read_panel(text.as_bytes(), ValidationMode::Soft).unwrap();
        assert_eq!(soft.records.len(), 2);
        assert_eq!(soft.rows, vec![0, 3]);
        assert_eq!(soft.warnings.len(), 1);
        assert_eq!(soft.rejected.len(), 3);
    }

    #[test]
    fn sidecar_format() {
        let rows = vec![RejectedRow {
            row: 4,
            household_id: "x".into(),
            reason: RejectReason::MissingField { field: "income" },
        }];
        let mut buf = Vec::new();
        write_rejections(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "row,line,household_id,cause\n4,6,x,missing income\n"
        );
    }
}
