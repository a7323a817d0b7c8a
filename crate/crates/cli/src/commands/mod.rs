pub mod dynamics;
pub mod effects;
pub mod footprint;
pub mod inequality;
pub mod published;
pub mod regress;
pub mod synth;

use std::path::PathBuf;

use clap::ValueEnum;
use hhcarbon_core::ValidationMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Validation {
    /// Reject rows outside the documented ranges.
    Hard,
    /// Keep them and warn.
    Soft,
}

impl From<Validation> for ValidationMode {
    fn from(v: Validation) -> Self {
        match v {
            Validation::Hard => ValidationMode::Hard,
            Validation::Soft => ValidationMode::Soft,
        }
    }
}

/// Panel input shared by the commands that read household records.
#[derive(Debug, Clone, clap::Args)]
pub struct PanelInput {
    /// Panel CSV; `-` reads stdin.
    #[arg(short, long, value_name = "PATH", default_value = "-")]
    pub input: PathBuf,

    /// Range checking applied to each row.
    #[arg(long, value_enum, default_value_t = Validation::Hard)]
    pub validation: Validation,

    /// Write rejected rows to this CSV instead of listing them on stderr.
    #[arg(long, value_name = "PATH")]
    pub errors: Option<PathBuf>,
}

/// Full-precision CSV field.
pub fn num(x: f64) -> String {
    x.to_string()
}
