use std::path::PathBuf;

use clap::ValueEnum;
use hhcarbon_core::panel::{
    build_design, coefficient_identity_check, fit, IdentityReport, SkippedRow, INTERCEPT,
};
use hhcarbon_core::panel_file::{RejectReason, RejectedRow};
use hhcarbon_core::synth::repeated_households_filter;
use hhcarbon_core::{Estimator, FitResult, Outcome, RegressionSpec, SeType};
use serde::Serialize;

use super::PanelInput;
use crate::error::{CliError, Result};
use crate::format::{sig6, Align, TextTable};
use crate::io::{load_panel, load_table, report_rejections, write_all, Log};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomeArg {
    Energy,
    Carbon,
    Efficiency,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Ols,
    Fe,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeArg {
    Classical,
    Cluster,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub panel: PanelInput,

    #[arg(long, value_enum, default_value_t = OutcomeArg::All)]
    pub outcome: OutcomeArg,

    #[arg(long, value_enum, default_value_t = EstimatorArg::Both)]
    pub estimator: EstimatorArg,

    /// Add the squared log-credit term.
    #[arg(long)]
    pub credit_square: bool,

    /// Standard errors; `cluster` clusters by household.
    #[arg(long, value_enum, default_value_t = SeArg::Classical)]
    pub se: SeArg,

    /// Keep only households observed in at least two years.
    #[arg(long)]
    pub repeated_only: bool,

    #[arg(long)]
    pub no_year_dummies: bool,

    #[arg(long)]
    pub no_province_dummies: bool,

    /// JSON fit report; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Aligned text table; stderr when omitted.
    #[arg(long, value_name = "PATH")]
    pub text: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SpecSummary {
    credit_square: bool,
    se_type: SeType,
    year_dummies: bool,
    province_dummies: bool,
    repeated_only: bool,
}

#[derive(Debug, Serialize)]
struct IdentitySection {
    estimator: Estimator,
    all_hold: bool,
    report: IdentityReport,
}

#[derive(Debug, Serialize)]
struct Report {
    input_rows: usize,
    rejected_rows: usize,
    /// Rows dropped by `--repeated-only`.
    filtered_rows: usize,
    skipped_rows: Vec<SkippedRow>,
    spec: SpecSummary,
    fits: Vec<FitResult>,
    identity: Vec<IdentitySection>,
}

fn stars(c: &hhcarbon_core::panel::Coefficient) -> &'static str {
    let t = (c.estimate / c.std_error).abs();
    if !t.is_finite() {
        ""
    } else if t >= 2.576 {
        "***"
    } else if t >= 1.960 {
        "**"
    } else if t >= 1.645 {
        "*"
    } else {
        ""
    }
}

fn is_dummy(label: &str) -> bool {
    label == INTERCEPT || label.starts_with("year_") || label.starts_with("province_")
}

fn text_table(report: &Report) -> String {
    let fits = &report.fits;
    let mut header = vec![String::new()];
    header.extend(
        fits.iter()
            .map(|f| format!("{} {}", f.estimator.tag(), f.outcome.short())),
    );
    let mut align = vec![Align::Left];
    align.extend(fits.iter().map(|_| Align::Right));
    let mut t = TextTable::new(header, align);

    let mut labels: Vec<&str> = Vec::new();
    for f in fits {
        let candidates = f
            .coefficients
            .keys()
            .map(String::as_str)
            .chain(f.dropped_terms.iter().map(|d| d.label.as_str()));
        for l in candidates {
            if !is_dummy(l) && l != "province" && !labels.contains(&l) {
                labels.push(l);
            }
        }
    }
    for label in labels {
        let mut est = vec![label.to_string()];
        let mut se = vec![String::new()];
        for f in fits {
            match f.get(label) {
                Some(c) => {
                    est.push(format!("{}{}", sig6(c.estimate), stars(&c)));
                    se.push(format!("({})", sig6(c.std_error)));
                }
                None if f.dropped_terms.iter().any(|d| d.label == label) => {
                    est.push("dropped".into());
                    se.push(String::new());
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        t.push(est);
        t.push(se);
    }
    let row = |name: &str, cell: &dyn Fn(&FitResult) -> String| {
        let mut r = vec![name.to_string()];
        r.extend(fits.iter().map(cell));
        r
    };
    let yes = |b: bool| if b { "Yes" } else { "No" }.to_string();
    t.push(row("Province", &|f| {
        yes(f.estimator == Estimator::WithinFe
            || f.coefficients.keys().any(|l| l.starts_with("province_")))
    }));
    t.push(row("Year", &|f| {
        yes(f.coefficients.keys().any(|l| l.starts_with("year_")))
    }));
    t.push(row("Household FE", &|f| {
        yes(f.estimator == Estimator::WithinFe)
    }));
    t.push(row("Observations", &|f| f.n_obs.to_string()));
    t.push(row("R2", &|f| sig6(f.r2)));
    t.push(row("Adj. R2", &|f| sig6(f.adjusted_r2)));
    let mut out = t.render();
    out.push_str(
        "*** |t| >= 2.576, ** |t| >= 1.960, * |t| >= 1.645; standard errors in parentheses.\n",
    );
    for section in &report.identity {
        out.push_str(&format!(
            "identity ln(C/E) = ln C - ln E ({}): {}\n",
            section.estimator.tag(),
            if section.all_hold { "holds" } else { "FAILS" }
        ));
    }
    out
}

pub fn run(args: Args, table: Option<&PathBuf>, log: Log) -> Result<()> {
    let table = load_table(table, &log)?;
    let read = load_panel(
        &args.panel.input,
        args.panel.validation.into(),
        args.panel.errors.as_deref(),
        &log,
    )?;
    let records = if args.repeated_only {
        repeated_households_filter(&read.records)
    } else {
        read.records.clone()
    };
    // Input row of each retained record; the filter keeps input order.
    let mut source_rows = Vec::with_capacity(records.len());
    let mut cursor = 0;
    for r in &records {
        while read.records[cursor] != *r {
            cursor += 1;
        }
        source_rows.push(read.rows[cursor]);
        cursor += 1;
    }
    let filtered_rows = read.records.len() - records.len();
    if args.repeated_only {
        log.info(format!("--repeated-only removed {filtered_rows} row(s)"));
    }

    let outcomes: Vec<Outcome> = match args.outcome {
        OutcomeArg::Energy => vec![Outcome::LnEnergy],
        OutcomeArg::Carbon => vec![Outcome::LnCarbon],
        OutcomeArg::Efficiency => vec![Outcome::LnEfficiency],
        OutcomeArg::All => Outcome::ALL.to_vec(),
    };
    let estimators: Vec<Estimator> = match args.estimator {
        EstimatorArg::Ols => vec![Estimator::PooledOls],
        EstimatorArg::Fe => vec![Estimator::WithinFe],
        EstimatorArg::Both => vec![Estimator::PooledOls, Estimator::WithinFe],
    };
    let se_type = match args.se {
        SeArg::Classical => SeType::Classical,
        SeArg::Cluster => SeType::ClusterByHousehold,
    };

    let mut fits = Vec::new();
    let mut skipped_rows = Vec::new();
    for &outcome in &outcomes {
        for &estimator in &estimators {
            let mut spec = RegressionSpec::new(outcome, estimator)
                .with_credit_square(args.credit_square)
                .with_se(se_type);
            spec.year_dummies = !args.no_year_dummies;
            spec.province_dummies = !args.no_province_dummies;
            let design = build_design(&records, &spec, &table).map_err(CliError::validation)?;
            if skipped_rows.is_empty() {
                skipped_rows = design.skipped_rows.clone();
            }
            let result = fit(&design, &spec).map_err(|e| {
                CliError::validation(format!("{} {}: {e}", estimator.tag(), outcome))
            })?;
            fits.push(result);
        }
    }
    let mut rejected = read.rejected.clone();
    rejected.extend(skipped_rows.iter().map(|s| RejectedRow {
        row: source_rows[s.row],
        household_id: s.household_id.clone(),
        reason: RejectReason::Unusable {
            cause: s.reason.clone(),
        },
    }));
    report_rejections(&rejected, args.panel.errors.as_deref(), &log)?;

    let mut identity = Vec::new();
    if args.outcome == OutcomeArg::All {
        for &estimator in &estimators {
            let pick = |o: Outcome| {
                fits.iter()
                    .find(|f| f.outcome == o && f.estimator == estimator)
                    .expect("fit for every outcome")
            };
            let report = coefficient_identity_check(
                pick(Outcome::LnEnergy),
                pick(Outcome::LnCarbon),
                pick(Outcome::LnEfficiency),
            )
            .map_err(CliError::validation)?;
            identity.push(IdentitySection {
                estimator,
                all_hold: report.all_hold(),
                report,
            });
        }
    }

    let report = Report {
        input_rows: read.records.len() + read.rejected.len(),
        rejected_rows: read.rejected.len(),
        filtered_rows,
        skipped_rows,
        spec: SpecSummary {
            credit_square: args.credit_square,
            se_type,
            year_dummies: !args.no_year_dummies,
            province_dummies: !args.no_province_dummies,
            repeated_only: args.repeated_only,
        },
        fits,
        identity,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_all(args.output.as_deref(), json.as_bytes())?;

    let text = text_table(&report);
    match &args.text {
        Some(path) => write_all(Some(path), text.as_bytes())?,
        None => log.block(&text),
    }
    if report.identity.iter().any(|s| !s.all_hold) {
        return Err(CliError::validation("coefficient identity violated"));
    }
    Ok(())
}
