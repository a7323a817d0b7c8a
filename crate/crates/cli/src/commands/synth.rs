use std::path::PathBuf;

use hhcarbon_core::panel_file::write_panel;
use hhcarbon_core::synth::{generate, Allocation, DgpConfig};
use hhcarbon_core::PerSector;

use crate::error::{CliError, Result};
use crate::io::{create_output, load_table, Log};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    #[arg(long, default_value_t = 500)]
    pub households: usize,

    /// Survey years, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2011, 2013, 2015, 2017, 2019])]
    pub years: Vec<i32>,

    /// Coefficient on ln(1 + credit).
    #[arg(long, default_value_t = 0.012, allow_hyphen_values = true)]
    pub beta: f64,

    /// Coefficient on ln(1 + credit)².
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta_sq: f64,

    #[arg(long, default_value_t = 4.2, allow_hyphen_values = true)]
    pub intercept: f64,

    /// Change in log energy per calendar year.
    #[arg(long, default_value_t = -0.02, allow_hyphen_values = true)]
    pub trend: f64,

    /// Standard deviation of the idiosyncratic error.
    #[arg(long, default_value_t = 0.3)]
    pub noise_sd: f64,

    /// Standard deviation of the household effect.
    #[arg(long, default_value_t = 0.5)]
    pub effect_sd: f64,

    /// Dependence of credit on the household effect.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub credit_loading: f64,

    /// Probability a household is surveyed in a given year.
    #[arg(long, default_value_t = 0.8)]
    pub observe_prob: f64,

    #[arg(long, default_value_t = 10)]
    pub provinces: usize,

    /// Lower bound of the per-household sector weight draws.
    #[arg(long, default_value_t = 0.2, conflicts_with = "shares")]
    pub min_weight: f64,

    /// Fixed sector shares for every household (8 comma-separated weights).
    #[arg(long, value_delimiter = ',', num_args = 8)]
    pub shares: Option<Vec<f64>>,

    /// Panel CSV; stdout when omitted.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

pub fn run(args: Args, table: Option<&PathBuf>, log: Log) -> Result<()> {
    let table = load_table(table, &log)?;
    let allocation = match &args.shares {
        Some(s) => {
            let shares: [f64; 8] = s
                .as_slice()
                .try_into()
                .map_err(|_| CliError::usage("--shares needs exactly 8 weights"))?;
            Allocation::Fixed(PerSector(shares))
        }
        None => Allocation::RandomShares {
            min_weight: args.min_weight,
        },
    };
    let config = DgpConfig {
        n_households: args.households,
        years: args.years,
        seed: args.seed,
        intercept: args.intercept,
        beta_credit: args.beta,
        beta_credit_sq: args.beta_sq,
        year_trend: args.trend,
        household_effect_sd: args.effect_sd,
        noise_sd: args.noise_sd,
        credit_effect_loading: args.credit_loading,
        observe_prob: args.observe_prob,
        n_provinces: args.provinces,
        allocation,
        ..DgpConfig::default()
    };
    let records = generate(&config, &table).map_err(|e| CliError::usage(e.to_string()))?;
    write_panel(&records, create_output(args.output.as_deref())?).map_err(CliError::validation)?;
    log.info(format!(
        "seed {}: {} household(s), {} row(s)",
        config.seed,
        config.n_households,
        records.len()
    ));
    Ok(())
}
