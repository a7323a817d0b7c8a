use std::path::PathBuf;

use hhcarbon_core::cla::footprint_panel;
use hhcarbon_core::inequality::lorenz;
use hhcarbon_core::panel_file::PANEL_COLUMNS;
use hhcarbon_core::HouseholdRecord;
use serde::Serialize;

use super::{num, Validation};
use crate::error::{CliError, Result};
use crate::format::sig6;
use crate::io::{
    create_output, load_table, parse_panel, read_to_string, report_rejections, write_all, Log,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Panel or any headered CSV (for example `footprint` output); `-` reads stdin.
    #[arg(short, long, value_name = "PATH", conflicts_with = "values")]
    pub input: Option<PathBuf>,

    /// Column to measure. Panels also accept energy_use, carbon_emissions,
    /// efficiency and total_spend, derived from the spending columns.
    #[arg(short, long, default_value = "income")]
    pub attribute: String,

    /// Comma-separated values instead of a file.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,

    /// Population share for the top and bottom tail shares.
    #[arg(long, default_value_t = 0.1)]
    pub quantile: f64,

    /// Lorenz points CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Summary JSON (Gini and tail shares).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Validation::Hard)]
    pub validation: Validation,
}

#[derive(Debug, Serialize)]
struct Summary {
    attribute: String,
    n: usize,
    gini: f64,
    quantile: f64,
    top_share: f64,
    bottom_share: f64,
}

fn panel_attribute(
    records: &[HouseholdRecord],
    attribute: &str,
    table: Option<&PathBuf>,
    log: &Log,
) -> Result<Vec<f64>> {
    let plain = |f: fn(&HouseholdRecord) -> f64| Ok(records.iter().map(f).collect());
    match attribute {
        "income" => plain(|r| r.income),
        "wealth" => plain(|r| r.wealth),
        "credit_access" => plain(|r| r.credit_access),
        "age" => plain(|r| r.age),
        "schooling" => plain(|r| r.schooling),
        "family_size" => plain(|r| f64::from(r.family_size)),
        "total_spend" => plain(HouseholdRecord::total_spend),
        "energy_use" | "carbon_emissions" | "efficiency" => {
            let table = load_table(table, log)?;
            let panel = footprint_panel(records, &table);
            if !panel.errors.is_empty() {
                log.info(format!(
                    "{} row(s) without a footprint left out",
                    panel.errors.len()
                ));
            }
            Ok(panel
                .rows
                .iter()
                .map(|r| match attribute {
                    "energy_use" => r.footprint.energy_use,
                    "carbon_emissions" => r.footprint.carbon_emissions,
                    _ => r.footprint.efficiency,
                })
                .collect())
        }
        other => {
            if let Some(sector) = PANEL_COLUMNS[15..].iter().position(|c| *c == other) {
                return Ok(records.iter().map(|r| r.spend.0[sector]).collect());
            }
            Err(CliError::usage(format!(
                "unknown panel attribute `{other}`"
            )))
        }
    }
}

fn column_values(text: &str, source: &str, attribute: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let index = header
        .iter()
        .position(|h| h == attribute)
        .ok_or_else(|| CliError::usage(format!("{source}: no column `{attribute}`")))?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let cell = rec.get(index).unwrap_or("");
            cell.trim().parse::<f64>().map_err(|_| {
                CliError::validation(format!("line {}: bad {attribute} `{cell}`", i + 2))
            })
        })
        .collect()
}

pub fn run(args: Args, table: Option<&PathBuf>, log: Log) -> Result<()> {
    let values = match (&args.values, &args.input) {
        (Some(v), _) => v.clone(),
        (None, Some(path)) => {
            let text = read_to_string(path)?;
            let header = text.lines().next().unwrap_or("");
            if header.trim_end().split(',').eq(PANEL_COLUMNS) {
                let source = path.display().to_string();
                let read = parse_panel(&text, &source, args.validation.into(), None, &log)?;
                report_rejections(&read.rejected, None, &log)?;
                panel_attribute(&read.records, &args.attribute, table, &log)?
            } else {
                column_values(&text, &path.display().to_string(), &args.attribute)?
            }
        }
        (None, None) => return Err(CliError::usage("give --input or --values")),
    };
    if !(args.quantile > 0.0 && args.quantile <= 1.0) {
        return Err(CliError::usage(format!(
            "quantile must lie in (0, 1], got {}",
            args.quantile
        )));
    }
    let result = lorenz(&values).map_err(CliError::validation)?;
    let summary = Summary {
        attribute: if args.values.is_some() {
            "values".into()
        } else {
            args.attribute.clone()
        },
        n: values.len(),
        gini: result.gini,
        quantile: args.quantile,
        top_share: result
            .top_share(args.quantile)
            .map_err(CliError::validation)?,
        bottom_share: result
            .bottom_share(args.quantile)
            .map_err(CliError::validation)?,
    };

    let mut w = csv::Writer::from_writer(create_output(args.output.as_deref())?);
    w.write_record(["population_share", "value_share"])?;
    for (p, l) in &result.points {
        w.write_record([num(*p), num(*l)])?;
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;

    if let Some(path) = &args.summary {
        let mut json = serde_json::to_string_pretty(&summary)?;
        json.push('\n');
        write_all(Some(path), json.as_bytes())?;
    }
    log.info(format!(
        "{}: n={} gini={} top {}={} bottom {}={}",
        summary.attribute,
        summary.n,
        sig6(summary.gini),
        sig6(args.quantile),
        sig6(summary.top_share),
        sig6(args.quantile),
        sig6(summary.bottom_share)
    ));
    Ok(())
}
