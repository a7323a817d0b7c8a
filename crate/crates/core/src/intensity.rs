//! Per-sector energy and carbon intensities for 2005–2019.
//!
//! Values are held as hundredths (two fractional digits) so the published
//! figures survive storage and re-serialization unchanged. Conversion to
//! `f64` happens only when a caller asks for a number to compute with.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::sector::{PerSector, Sector};

pub const FIRST_YEAR: i32 = 2005;
pub const LAST_YEAR: i32 = 2019;
pub const YEAR_COUNT: usize = (LAST_YEAR - FIRST_YEAR + 1) as usize;

/// Canonical text form of the built-in table.
pub const BUILTIN_CSV: &str = include_str!("../data/intensity_tables.csv");

/// A non-negative decimal with exactly two fractional digits, stored in hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Centi(pub u32);

impl Centi {
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Centi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Centi {
    type Err = IntensityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IntensityError::BadNumber(s.to_string());
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if whole.is_empty()
            || frac.len() > 2
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: u32 = whole.parse().map_err(|_| bad())?;
        let mut frac_value: u32 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        if frac.len() == 1 {
            frac_value *= 10;
        }
        whole
            .checked_mul(100)
            .and_then(|w| w.checked_add(frac_value))
            .map(Centi)
            .ok_or_else(bad)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntensityError {
    #[error("year {0} is outside the table coverage {FIRST_YEAR}-{LAST_YEAR}")]
    YearOutOfRange(i32),
    #[error("malformed intensity value `{0}`")]
    BadNumber(String),
    #[error("intensity table header mismatch: expected `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("intensity table line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("intensity table is missing year {0}")]
    MissingYear(i32),
    #[error("non-positive {quantity} intensity for {sector} in {year}")]
    NonPositive {
        year: i32,
        sector: Sector,
        quantity: &'static str,
    },
    #[error("cannot read intensity table: {0}")]
    Io(String),
}

/// Year × sector grid of energy intensity (GJ per 10⁴ Yuan) and carbon
/// intensity (kg per 10⁴ Yuan).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityTable {
    energy: [PerSector<Centi>; YEAR_COUNT],
    carbon: [PerSector<Centi>; YEAR_COUNT],
}

const ENERGY_CENTI: [[u32; 8]; 15] = [
    [1764, 1806, 656, 1385, 585, 4818, 8253, 823], // 2005
    [1482, 1659, 557, 1241, 515, 4393, 6995, 723], // 2006
    [1209, 1403, 459, 980, 459, 3537, 5502, 581],  // 2007
    [1122, 1260, 466, 916, 518, 3361, 5758, 556],  // 2008
    [1027, 1108, 419, 780, 427, 3003, 5166, 470],  // 2009
    [963, 1083, 399, 732, 434, 2806, 4852, 411],   // 2010
    [839, 919, 364, 665, 399, 2616, 4750, 400],    // 2011
    [1169, 1022, 378, 870, 199, 2765, 5117, 524],  // 2012
    [1107, 955, 346, 791, 180, 2535, 4907, 503],   // 2013
    [948, 836, 318, 729, 151, 2207, 4864, 401],    // 2014
    [889, 1079, 291, 720, 148, 2082, 4701, 330],   // 2015
    [866, 1021, 264, 644, 150, 1991, 4489, 281],   // 2016
    [766, 915, 234, 524, 154, 1980, 4146, 265],    // 2017
    [706, 640, 220, 433, 215, 1849, 3817, 248],    // 2018
    [718, 646, 205, 402, 167, 1726, 3571, 223],    // 2019
];

const CARBON_CENTI: [[u32; 8]; 15] = [
    [16368, 16791, 5945, 12884, 5234, 45122, 75362, 7643], // 2005
    [13760, 15450, 5058, 11541, 4615, 41156, 63938, 6707], // 2006
    [11234, 13070, 4172, 9088, 4118, 33135, 50136, 5389],  // 2007
    [10402, 11695, 4212, 8451, 4585, 31396, 52518, 5135],  // 2008
    [9506, 10295, 3773, 7169, 3810, 28093, 46950, 4337],   // 2009
    [8898, 10075, 3588, 6718, 3895, 26253, 43899, 3790],   // 2010
    [7762, 8569, 3303, 6105, 3577, 24525, 42918, 3675],    // 2011
    [10880, 9565, 3449, 8027, 1764, 25863, 46541, 4839],   // 2012
    [10284, 8938, 3152, 7285, 1592, 23646, 44502, 4637],   // 2013
    [8789, 7809, 2903, 6706, 1330, 20545, 44060, 3673],    // 2014
    [8237, 10099, 2660, 6622, 1307, 19307, 42186, 3003],   // 2015
    [7959, 9438, 2396, 5905, 1305, 18407, 40041, 2541],    // 2016
    [6962, 8324, 2100, 4770, 1329, 18087, 36631, 2365],    // 2017
    [6374, 5692, 1965, 3895, 1686, 16710, 33440, 2146],    // 2018
    [6392, 5659, 1841, 3569, 1420, 15550, 31167, 1905],    // 2019
];

/// The published table, embedded in the binary.
pub fn builtin_table() -> IntensityTable {
    let wrap = |rows: &[[u32; 8]; YEAR_COUNT]| rows.map(|row| PerSector(row.map(Centi)));
    IntensityTable {
        energy: wrap(&ENERGY_CENTI),
        carbon: wrap(&CARBON_CENTI),
    }
}

fn year_slot(year: i32) -> Result<usize, IntensityError> {
    if (FIRST_YEAR..=LAST_YEAR).contains(&year) {
        Ok((year - FIRST_YEAR) as usize)
    } else {
        Err(IntensityError::YearOutOfRange(year))
    }
}

/// Column names of the delimited representation.
pub fn csv_header() -> String {
    let mut cols = vec!["year".to_string()];
    for prefix in ["energy", "carbon"] {
        cols.extend(Sector::ALL.iter().map(|s| format!("{prefix}_{s}")));
    }
    cols.join(",")
}

impl IntensityTable {
    pub fn years() -> impl Iterator<Item = i32> {
        FIRST_YEAR..=LAST_YEAR
    }

    pub fn energy_centi(&self, year: i32, sector: Sector) -> Result<Centi, IntensityError> {
        Ok(self.energy[year_slot(year)?][sector])
    }

    pub fn carbon_centi(&self, year: i32, sector: Sector) -> Result<Centi, IntensityError> {
        Ok(self.carbon[year_slot(year)?][sector])
    }

    /// `(energy GJ/10⁴ Yuan, carbon kg/10⁴ Yuan)` for one cell.
    pub fn lookup(&self, year: i32, sector: Sector) -> Result<(f64, f64), IntensityError> {
        let slot = year_slot(year)?;
        Ok((
            self.energy[slot][sector].to_f64(),
            self.carbon[slot][sector].to_f64(),
        ))
    }

    /// Both rows for a year as floating point.
    pub fn year_row(&self, year: i32) -> Result<(PerSector<f64>, PerSector<f64>), IntensityError> {
        let slot = year_slot(year)?;
        Ok((
            self.energy[slot].map(Centi::to_f64),
            self.carbon[slot].map(Centi::to_f64),
        ))
    }

    /// Carbon per unit of energy (kg/GJ) embodied in one sector's spending.
    pub fn sector_ratio(&self, year: i32, sector: Sector) -> Result<f64, IntensityError> {
        let (energy, carbon) = self.lookup(year, sector)?;
        Ok(carbon / energy)
    }

    /// Parses the delimited representation and checks completeness and positivity.
    pub fn from_csv_str(text: &str) -> Result<Self, IntensityError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let expected = csv_header();
        let (_, header) = lines.next().ok_or_else(|| IntensityError::BadHeader {
            expected: expected.clone(),
            found: String::new(),
        })?;
        if header.trim_end_matches('\r') != expected {
            return Err(IntensityError::BadHeader {
                expected,
                found: header.to_string(),
            });
        }

        let mut energy: [Option<PerSector<Centi>>; YEAR_COUNT] = [None; YEAR_COUNT];
        let mut carbon: [Option<PerSector<Centi>>; YEAR_COUNT] = [None; YEAR_COUNT];
        for (idx, line) in lines {
            let line_no = idx + 1;
            let bad_row = |message: String| IntensityError::BadRow {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
            if fields.len() != 1 + 2 * Sector::COUNT {
                return Err(bad_row(format!(
                    "expected {} fields, found {}",
                    1 + 2 * Sector::COUNT,
                    fields.len()
                )));
            }
            let year: i32 = fields[0]
                .trim()
                .parse()
                .map_err(|_| bad_row(format!("bad year `{}`", fields[0])))?;
            let slot = year_slot(year)?;
            if energy[slot].is_some() {
                return Err(bad_row(format!("duplicate year {year}")));
            }
            let mut e = PerSector::<Centi>::default();
            let mut c = PerSector::<Centi>::default();
            for (i, sector) in Sector::ALL.into_iter().enumerate() {
                e[sector] = fields[1 + i].trim().parse()?;
                c[sector] = fields[1 + Sector::COUNT + i].trim().parse()?;
            }
            energy[slot] = Some(e);
            carbon[slot] = Some(c);
        }

        let mut table = IntensityTable {
            energy: [PerSector::default(); YEAR_COUNT],
            carbon: [PerSector::default(); YEAR_COUNT],
        };
        for (slot, year) in Self::years().enumerate() {
            table.energy[slot] = energy[slot].ok_or(IntensityError::MissingYear(year))?;
            table.carbon[slot] = carbon[slot].ok_or(IntensityError::MissingYear(year))?;
        }
        table.check_positive()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, IntensityError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| IntensityError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    /// Canonical delimited representation (header plus one row per year).
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_header();
        out.push('\n');
        for (slot, year) in Self::years().enumerate() {
            out.push_str(&year.to_string());
            for row in [&self.energy[slot], &self.carbon[slot]] {
                for (_, value) in row.iter() {
                    out.push(',');
                    out.push_str(&value.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    fn check_positive(&self) -> Result<(), IntensityError> {
        for (slot, year) in Self::years().enumerate() {
            for sector in Sector::ALL {
                for (quantity, grid) in [("energy", &self.energy), ("carbon", &self.carbon)] {
                    if grid[slot][sector].0 == 0 {
                        return Err(IntensityError::NonPositive {
                            year,
                            sector,
                            quantity,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl Default for IntensityTable {
    fn default() -> Self {
        builtin_table()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn published_spot_values() {
        let t = builtin_table();
        assert_eq!(t.energy_centi(2005, Sector::Food).unwrap(), Centi(1764));
        assert_eq!(
            t.carbon_centi(2019, Sector::Commodities).unwrap(),
            Centi(1905)
        );
        assert_eq!(
            t.energy_centi(2012, Sector::Communication).unwrap(),
            Centi(199)
        );
        assert_eq!(t.lookup(2005, Sector::Residence).unwrap(), (82.53, 753.62));
        assert_eq!(t.lookup(2019, Sector::Education).unwrap(), (17.26, 155.50));
    }

    #[test]
    fn out_of_range_years_fail() {
        let t = builtin_table();
        assert_eq!(
            t.lookup(2004, Sector::Food),
            Err(IntensityError::YearOutOfRange(2004))
        );
        assert!(t.lookup(2020, Sector::Food).is_err());
        assert!(t.sector_ratio(1999, Sector::Residence).is_err());
    }

    #[test]
    fn sector_ratios() {
        let t = builtin_table();
        assert_relative_eq!(
            t.sector_ratio(2005, Sector::Food).unwrap(),
            9.278_911_564_625_85,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            t.sector_ratio(2019, Sector::Residence).unwrap(),
            8.727_807_336_880_426,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            t.sector_ratio(2005, Sector::Education).unwrap(),
            9.365_296_803_652_969,
            max_relative = 1e-12
        );
    }

    #[test]
    fn embedded_file_matches_builtin_bytes() {
        let t = builtin_table();
        assert_eq!(t.to_csv_string(), BUILTIN_CSV);
        assert_eq!(IntensityTable::from_csv_str(BUILTIN_CSV).unwrap(), t);
    }

    #[test]
    fn centi_parsing() {
        assert_eq!("17.64".parse::<Centi>().unwrap(), Centi(1764));
        assert_eq!("155.5".parse::<Centi>().unwrap(), Centi(15550));
        assert_eq!("3".parse::<Centi>().unwrap(), Centi(300));
        assert!("1.234".parse::<Centi>().is_err());
        assert!("-1.00".parse::<Centi>().is_err());
        assert!("1,000.00".parse::<Centi>().is_err());
        assert_eq!(Centi(5).to_string(), "0.05");
    }

    #[test]
    fn rejects_incomplete_or_zero_tables() {
        let truncated: String = BUILTIN_CSV.lines().take(10).collect::<Vec<_>>().join("\n");
        assert_eq!(
            IntensityTable::from_csv_str(&truncated),
            Err(IntensityError::MissingYear(2014))
        );
        let zeroed = BUILTIN_CSV.replacen("17.64", "0.00", 1);
        assert!(matches!(
            IntensityTable::from_csv_str(&zeroed),
            Err(IntensityError::NonPositive {
                year: 2005,
                sector: Sector::Food,
                ..
            })
        ));
        let bad_header = BUILTIN_CSV.replacen("year", "Year", 1);
        assert!(matches!(
            IntensityTable::from_csv_str(&bad_header),
            Err(IntensityError::BadHeader { .. })
        ));
    }
}
