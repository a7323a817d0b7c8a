use std::path::{Path, PathBuf};

use hhcarbon_core::effects::{
    decline_claim_check, default_grid, effect_curve, log_grid, CreditModel, CurveShape,
    DeclineClaim, DEFAULT_HIGH_CREDIT, DEFAULT_LOW_CREDIT,
};
use hhcarbon_core::published::{builtin_table_by_id, ColumnId};
use hhcarbon_core::FitResult;
use indexmap::IndexMap;
use serde::Serialize;

use super::num;
use super::regress::{EstimatorArg, OutcomeArg};
use crate::error::{CliError, Result};
use crate::format::sig6;
use crate::io::{create_output, read_to_string, write_all, Log};
use hhcarbon_core::{Estimator, Outcome};

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["fit", "published"])))]
pub struct Args {
    /// JSON report written by `regress`.
    #[arg(long, value_name = "PATH")]
    pub fit: Option<PathBuf>,

    /// Published column as TABLE:COLUMN, for example `3:FE-efficiency`.
    #[arg(long, value_name = "TABLE:COLUMN")]
    pub published: Option<String>,

    /// Outcome to take from the fit report.
    #[arg(long, value_enum, default_value_t = OutcomeArg::Efficiency)]
    pub outcome: OutcomeArg,

    /// Estimator to take from the fit report.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Fe)]
    pub estimator: EstimatorArg,

    /// Credit amounts: a comma list, or `log:LOW:HIGH:POINTS`.
    /// Defaults to 50 log-spaced points from 100 to 1,000,000.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,

    /// Regressor values as LABEL=VALUE pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub means: Vec<String>,

    /// Credit amounts compared by the decline check.
    #[arg(long, default_value_t = DEFAULT_LOW_CREDIT)]
    pub low: f64,
    #[arg(long, default_value_t = DEFAULT_HIGH_CREDIT)]
    pub high: f64,

    /// Curve CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Summary JSON (shape, vertex, decline check).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Summary {
    source: String,
    model: CreditModel,
    shape: CurveShape,
    vertex_ln: Option<f64>,
    /// Credit amount at the vertex.
    vertex_credit: Option<f64>,
    decline: DeclineClaim,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| CliError::usage(format!("bad --grid `{spec}`: {what}"));
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [low, high, points] = parts[..] else {
            return Err(bad("expected log:LOW:HIGH:POINTS"));
        };
        let low: f64 = low.parse().map_err(|_| bad("LOW"))?;
        let high: f64 = high.parse().map_err(|_| bad("HIGH"))?;
        let points: usize = points.parse().map_err(|_| bad("POINTS"))?;
        if !(low > 0.0 && high > low) {
            return Err(bad("need 0 < LOW < HIGH"));
        }
        return Ok(log_grid(low, high, points));
    }
    spec.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
        .collect()
}

fn parse_means(pairs: &[String]) -> Result<IndexMap<String, f64>> {
    pairs
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| {
                CliError::usage(format!("--means expects LABEL=VALUE, got `{p}`"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("--means: bad value in `{p}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn fits_from_report(text: &str) -> Result<Vec<FitResult>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("fits") {
        Some(fits) => Ok(serde_json::from_value(fits.clone())?),
        None => Ok(vec![serde_json::from_value(value)?]),
    }
}

fn model_from_fit(
    path: &Path,
    args: &Args,
    means: &IndexMap<String, f64>,
) -> Result<(CreditModel, String)> {
    let outcome = match args.outcome {
        OutcomeArg::Energy => Outcome::LnEnergy,
        OutcomeArg::Carbon => Outcome::LnCarbon,
        OutcomeArg::Efficiency => Outcome::LnEfficiency,
        OutcomeArg::All => {
            return Err(CliError::usage(
                "--outcome all is not meaningful for effects",
            ))
        }
    };
    let estimator = match args.estimator {
        EstimatorArg::Ols => Estimator::PooledOls,
        EstimatorArg::Fe => Estimator::WithinFe,
        EstimatorArg::Both => {
            return Err(CliError::usage(
                "--estimator both is not meaningful for effects",
            ))
        }
    };
    let fits = fits_from_report(&read_to_string(path)?)?;
    let fit = fits
        .iter()
        .find(|f| f.outcome == outcome && f.estimator == estimator)
        .ok_or_else(|| {
            CliError::validation(format!(
                "{}: no {} {} fit",
                path.display(),
                estimator.tag(),
                outcome
            ))
        })?;
    let model = CreditModel::from_fit(fit, means).map_err(CliError::validation)?;
    Ok((
        model,
        format!("{}:{}-{}", path.display(), estimator.tag(), outcome.short()),
    ))
}

fn model_from_published(
    spec: &str,
    means: &IndexMap<String, f64>,
) -> Result<(CreditModel, String)> {
    let (table, column) = spec.split_once(':').ok_or_else(|| {
        CliError::usage(format!("--published expects TABLE:COLUMN, got `{spec}`"))
    })?;
    let id: u8 = table
        .parse()
        .map_err(|_| CliError::usage(format!("--published: bad table `{table}`")))?;
    let column: ColumnId = column
        .parse()
        .map_err(|e| CliError::usage(format!("--published: {e}")))?;
    let table = builtin_table_by_id(id).map_err(|e| CliError::usage(e.to_string()))?;
    let model = CreditModel::from_published(&table, column, means).map_err(CliError::validation)?;
    Ok((model, format!("published:{id}:{column}")))
}

pub fn run(args: Args, log: Log) -> Result<()> {
    let means = parse_means(&args.means)?;
    let (model, source) = match (&args.fit, &args.published) {
        (Some(path), _) => model_from_fit(path, &args, &means)?,
        (None, Some(spec)) => model_from_published(spec, &means)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(),
    };
    let curve = effect_curve(&model, &grid).map_err(|e| CliError::usage(format!("--grid: {e}")))?;
    if !(args.low >= 0.0 && args.high >= 0.0) {
        return Err(CliError::usage("--low and --high must be non-negative"));
    }
    let decline = decline_claim_check(&model, args.low, args.high);

    let base = curve.predicted[0];
    let mut w = csv::Writer::from_writer(create_output(args.output.as_deref())?);
    w.write_record(["credit", "ln_credit", "predicted", "change"])?;
    for (c, p) in curve.grid.iter().zip(&curve.predicted) {
        w.write_record([num(*c), num(c.ln_1p()), num(*p), num(p - base)])?;
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;

    let summary = Summary {
        source,
        model,
        shape: curve.shape,
        vertex_ln: curve.vertex_ln,
        vertex_credit: curve.vertex_ln.map(f64::exp_m1),
        decline,
    };
    if let Some(path) = &args.summary {
        let mut json = serde_json::to_string_pretty(&summary)?;
        json.push('\n');
        write_all(Some(path), json.as_bytes())?;
    }
    log.info(format!(
        "{}: linear={} square={} shape={:?}",
        summary.source,
        sig6(model.linear),
        sig6(model.square),
        summary.shape
    ));
    if let (Some(v), Some(c)) = (summary.vertex_ln, summary.vertex_credit) {
        log.info(format!(
            "vertex at ln(1+credit)={} (credit {})",
            sig6(v),
            sig6(c)
        ));
    }
    log.info(format!(
        "change from {} to {}: {} (decline beyond threshold: {})",
        sig6(decline.low),
        sig6(decline.high),
        sig6(decline.change),
        if decline.holds { "yes" } else { "no" }
    ));
    Ok(())
}
