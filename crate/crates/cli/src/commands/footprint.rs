use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use hhcarbon_core::cla::{cohort_efficiency, footprint_panel, Footprint};
use hhcarbon_core::panel_file::{RejectReason, RejectedRow};

use super::{num, PanelInput};
use crate::error::{CliError, Result};
use crate::format::{sig6, Align, TextTable};
use crate::io::{create_output, load_panel, load_table, report_rejections, Log};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    Year,
    Rural,
    Province,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub panel: PanelInput,

    /// Household footprint CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Also compute cohort efficiency for each group.
    #[arg(long, value_enum)]
    pub group_by: Option<GroupBy>,

    /// Cohort CSV; without it cohorts are printed on stderr.
    #[arg(long, value_name = "PATH", requires = "group_by")]
    pub cohorts: Option<PathBuf>,
}

pub const HEADER: [&str; 5] = [
    "household_id",
    "year",
    "energy_use",
    "carbon_emissions",
    "efficiency",
];

pub fn run(args: Args, table: Option<&PathBuf>, log: Log) -> Result<()> {
    let table = load_table(table, &log)?;
    let read = load_panel(
        &args.panel.input,
        args.panel.validation.into(),
        args.panel.errors.as_deref(),
        &log,
    )?;
    let panel = footprint_panel(&read.records, &table);
    let mut rejected = read.rejected.clone();
    rejected.extend(panel.errors.iter().map(|e| RejectedRow {
        row: read.rows[e.row],
        household_id: read.records[e.row].household_id.clone(),
        reason: RejectReason::Unusable {
            cause: e.cause.to_string(),
        },
    }));
    report_rejections(&rejected, args.panel.errors.as_deref(), &log)?;

    let mut w = csv::Writer::from_writer(create_output(args.output.as_deref())?);
    w.write_record(HEADER)?;
    for row in &panel.rows {
        let f = &row.footprint;
        w.write_record([
            row.household_id.clone(),
            row.year.to_string(),
            num(f.energy_use),
            num(f.carbon_emissions),
            num(f.efficiency),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;
    log.info(format!(
        "{} footprint(s), {} row(s) without a footprint",
        panel.rows.len(),
        panel.errors.len()
    ));

    if let Some(group_by) = args.group_by {
        let mut groups: BTreeMap<String, Vec<Footprint>> = BTreeMap::new();
        for row in &panel.rows {
            let r = &read.records[row.row];
            let key = match group_by {
                GroupBy::Year => r.year.to_string(),
                GroupBy::Rural => u8::from(r.rural).to_string(),
                GroupBy::Province => r.province.clone(),
            };
            groups.entry(key).or_default().push(row.footprint);
        }
        let name = format!("{group_by:?}").to_lowercase();
        let cohorts: Vec<(String, usize, f64, f64, f64)> = groups
            .into_iter()
            .map(|(key, fs)| {
                let efficiency = cohort_efficiency(&fs).map_err(CliError::validation)?;
                let energy = fs.iter().map(|f| f.energy_use).sum();
                let carbon = fs.iter().map(|f| f.carbon_emissions).sum();
                Ok((key, fs.len(), energy, carbon, efficiency))
            })
            .collect::<Result<_>>()?;
        match &args.cohorts {
            Some(path) => {
                let mut w = csv::Writer::from_writer(create_output(Some(path))?);
                w.write_record([
                    "group_by",
                    "group",
                    "households",
                    "energy_use",
                    "carbon_emissions",
                    "cohort_efficiency",
                ])?;
                for (key, n, e, c, ee) in &cohorts {
                    w.write_record([
                        name.clone(),
                        key.clone(),
                        n.to_string(),
                        num(*e),
                        num(*c),
                        num(*ee),
                    ])?;
                }
                w.flush().map_err(|e| CliError::io("write failed", e))?;
            }
            None => {
                let mut t = TextTable::new(
                    vec![
                        name,
                        "n".into(),
                        "energy".into(),
                        "carbon".into(),
                        "efficiency".into(),
                    ],
                    vec![
                        Align::Left,
                        Align::Right,
                        Align::Right,
                        Align::Right,
                        Align::Right,
                    ],
                );
                for (key, n, e, c, ee) in &cohorts {
                    t.push(vec![
                        key.clone(),
                        n.to_string(),
                        sig6(*e),
                        sig6(*c),
                        sig6(*ee),
                    ]);
                }
                log.block(&t.render());
            }
        }
    }
    Ok(())
}
