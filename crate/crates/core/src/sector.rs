//! The eight consumption sectors that carry published intensities.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Consumption sector, in the column order of the intensity tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Food,
    Clothing,
    Facilities,
    Medicine,
    Communication,
    Education,
    Residence,
    Commodities,
}

impl Sector {
    pub const COUNT: usize = 8;

    pub const ALL: [Sector; Sector::COUNT] = [
        Sector::Food,
        Sector::Clothing,
        Sector::Facilities,
        Sector::Medicine,
        Sector::Communication,
        Sector::Education,
        Sector::Residence,
        Sector::Commodities,
    ];

    /// Column position of the sector (0-based).
    pub fn index(self) -> usize {
        self as usize
    }

    /// Lowercase name used in file headers.
    pub fn name(self) -> &'static str {
        match self {
            Sector::Food => "food",
            Sector::Clothing => "clothing",
            Sector::Facilities => "facilities",
            Sector::Medicine => "medicine",
            Sector::Communication => "communication",
            Sector::Education => "education",
            Sector::Residence => "residence",
            Sector::Commodities => "commodities",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown sector `{0}`")]
pub struct UnknownSector(pub String);

impl FromStr for Sector {
    type Err = UnknownSector;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sector::ALL
            .into_iter()
            .find(|sector| sector.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownSector(s.to_string()))
    }
}

/// One value per sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PerSector<T>(pub [T; Sector::COUNT]);

impl<T: Copy> PerSector<T> {
    pub fn splat(value: T) -> Self {
        PerSector([value; Sector::COUNT])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Sector, T)> + '_ {
        Sector::ALL.into_iter().zip(self.0.iter().copied())
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> PerSector<U> {
        PerSector(self.0.map(f))
    }
}

impl<T> Index<Sector> for PerSector<T> {
    type Output = T;

    fn index(&self, sector: Sector) -> &T {
        &self.0[sector.index()]
    }
}

impl<T> IndexMut<Sector> for PerSector<T> {
    fn index_mut(&mut self, sector: Sector) -> &mut T {
        &mut self.0[sector.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_table_columns() {
        let names: Vec<_> = Sector::ALL.iter().map(|s| s.name()).collect();
        assert_eq!(
            names,
            [
                "food",
                "clothing",
                "facilities",
                "medicine",
                "communication",
                "education",
                "residence",
                "commodities"
            ]
        );
        for (i, s) in Sector::ALL.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in Sector::ALL {
            assert_eq!(s.name().parse::<Sector>().unwrap(), s);
        }
        assert!("fuel".parse::<Sector>().is_err());
    }
}
