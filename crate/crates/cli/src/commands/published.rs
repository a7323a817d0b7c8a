use std::path::PathBuf;

use hhcarbon_core::published::{
    builtin_published, parse_published, validate_published, CheckStatus, DEFAULT_TOLERANCE,
};

use super::num;
use crate::error::{CliError, Result};
use crate::format::sig6;
use crate::io::{create_output, read_to_string, Log};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Published-coefficient CSV replacing the built-in tables.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,

    /// Tables to check; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tables: Vec<u8>,

    /// Largest allowed |β_efficiency − (β_carbon − β_energy)|.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    /// Check report CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn run(args: Args, log: Log) -> Result<()> {
    let tables = match &args.file {
        Some(path) => parse_published(&read_to_string(path)?).map_err(CliError::validation)?,
        None => builtin_published(),
    };
    let selected: Vec<_> = if args.tables.is_empty() {
        tables
    } else {
        for id in &args.tables {
            if !tables.iter().any(|t| t.id == *id) {
                return Err(CliError::usage(format!("no table {id}")));
            }
        }
        tables
            .into_iter()
            .filter(|t| args.tables.contains(&t.id))
            .collect()
    };
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(CliError::usage("--tolerance must be non-negative"));
    }

    let mut w = csv::Writer::from_writer(create_output(args.output.as_deref())?);
    w.write_record([
        "table",
        "row",
        "estimator",
        "energy",
        "carbon",
        "efficiency",
        "implied",
        "discrepancy",
        "status",
    ])?;
    let mut all_pass = true;
    for table in &selected {
        let report = validate_published(table, args.tolerance);
        for c in &report.checks {
            let status = serde_json::to_value(c.status)?;
            w.write_record([
                c.table.to_string(),
                c.row.clone(),
                c.estimator.tag().to_string(),
                opt(c.energy),
                opt(c.carbon),
                opt(c.efficiency),
                opt(c.implied),
                opt(c.discrepancy),
                status.as_str().unwrap_or_default().to_string(),
            ])?;
            if c.status == CheckStatus::Fail || c.status == CheckStatus::Incomplete {
                log.info(format!(
                    "table {} {} {}: {:?} (discrepancy {})",
                    c.table,
                    c.row,
                    c.estimator.tag(),
                    c.status,
                    c.discrepancy.map(sig6).unwrap_or_default()
                ));
            }
        }
        let worst = report
            .checks
            .iter()
            .filter_map(|c| c.discrepancy)
            .fold(0.0f64, |m, d| m.max(d.abs()));
        log.info(format!(
            "table {}: {} pass, {} fail, {} blank, {} incomplete; worst discrepancy {}",
            table.id,
            report.count(CheckStatus::Pass),
            report.count(CheckStatus::Fail),
            report.count(CheckStatus::Blank),
            report.count(CheckStatus::Incomplete),
            sig6(worst)
        ));
        all_pass &= report.passed();
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::validation(
            "published coefficients violate the identity",
        ))
    }
}
