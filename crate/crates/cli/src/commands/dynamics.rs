use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use hhcarbon_core::cla::{cohort_efficiency, footprint_panel, sector_efficiency_series, Footprint};

use super::{num, Validation};
use crate::error::{CliError, Result};
use crate::format::{sig6, Align, TextTable};
use crate::io::{create_output, load_panel, load_table, report_rejections, Log};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum By {
    /// Carbon/energy intensity ratio of each sector from the intensity tables.
    Sector,
    /// Pooled efficiency of the households in each survey year.
    Cohort,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    pub by: By,

    /// Panel CSV, required for `--by cohort`.
    #[arg(short, long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Validation::Hard)]
    pub validation: Validation,

    /// Time-series CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

pub fn run(args: Args, table: Option<&PathBuf>, log: Log) -> Result<()> {
    let table = load_table(table, &log)?;
    let mut w = csv::Writer::from_writer(create_output(args.output.as_deref())?);
    match args.by {
        By::Sector => {
            w.write_record([
                "sector",
                "year",
                "energy_intensity",
                "carbon_intensity",
                "efficiency",
            ])?;
            let series = sector_efficiency_series(&table);
            let mut summary = TextTable::new(
                vec![
                    "sector".into(),
                    "first".into(),
                    "last".into(),
                    "change".into(),
                ],
                vec![Align::Left, Align::Right, Align::Right, Align::Right],
            );
            for (sector, points) in &series {
                for (year, ratio) in points {
                    let e = table
                        .energy_centi(*year, *sector)
                        .map_err(CliError::validation)?;
                    let c = table
                        .carbon_centi(*year, *sector)
                        .map_err(CliError::validation)?;
                    w.write_record([
                        sector.name().to_string(),
                        year.to_string(),
                        e.to_string(),
                        c.to_string(),
                        num(*ratio),
                    ])?;
                }
                if let (Some(first), Some(last)) = (points.first(), points.last()) {
                    summary.push(vec![
                        sector.name().into(),
                        sig6(first.1),
                        sig6(last.1),
                        sig6(last.1 - first.1),
                    ]);
                }
            }
            log.block(&summary.render());
        }
        By::Cohort => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::usage("--by cohort needs --input PANEL"))?;
            let read = load_panel(input, args.validation.into(), None, &log)?;
            report_rejections(&read.rejected, None, &log)?;
            let panel = footprint_panel(&read.records, &table);
            let mut by_year: BTreeMap<i32, Vec<Footprint>> = BTreeMap::new();
            for row in &panel.rows {
                by_year.entry(row.year).or_default().push(row.footprint);
            }
            w.write_record([
                "year",
                "households",
                "energy_use",
                "carbon_emissions",
                "efficiency",
            ])?;
            for (year, fs) in &by_year {
                let efficiency = cohort_efficiency(fs).map_err(CliError::validation)?;
                let energy: f64 = fs.iter().map(|f| f.energy_use).sum();
                let carbon: f64 = fs.iter().map(|f| f.carbon_emissions).sum();
                w.write_record([
                    year.to_string(),
                    fs.len().to_string(),
                    num(energy),
                    num(carbon),
                    num(efficiency),
                ])?;
                log.info(format!(
                    "{year}: {} household(s), efficiency {}",
                    fs.len(),
                    sig6(efficiency)
                ));
            }
        }
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;
    Ok(())
}
