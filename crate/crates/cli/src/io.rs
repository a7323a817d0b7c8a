use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hhcarbon_core::intensity::{builtin_table, IntensityTable};
use hhcarbon_core::panel_file::{
    read_panel, write_rejections, PanelFileError, PanelRead, RejectedRow,
};
use hhcarbon_core::ValidationMode;

use crate::error::{CliError, Result};

pub const STDIO: &str = "-";

pub fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path == Path::new(STDIO) {
        return Ok(Box::new(io::stdin().lock()));
    }
    let file =
        File::open(path).map_err(|e| CliError::io(format!("cannot open {}", path.display()), e))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    open_input(path)?
        .read_to_string(&mut text)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    Ok(text)
}

pub fn create_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p == Path::new(STDIO) => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::io(format!("cannot create {}", p.display()), e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

pub fn write_all(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let mut out = create_output(path)?;
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("write failed", e))
}

pub fn load_table(path: Option<&PathBuf>, log: &Log) -> Result<IntensityTable> {
    match path {
        None => Ok(builtin_table()),
        Some(p) => {
            let table = IntensityTable::load(p).map_err(CliError::validation)?;
            log.info(format!("intensity table from {}", p.display()));
            Ok(table)
        }
    }
}

/// Reads a panel. Rejected rows are left for the caller to report with
/// [`report_rejections`] unless nothing usable remains.
pub fn load_panel(
    path: &Path,
    mode: ValidationMode,
    errors: Option<&Path>,
    log: &Log,
) -> Result<PanelRead> {
    let text = read_to_string(path)?;
    parse_panel(&text, &path.display().to_string(), mode, errors, log)
}

pub fn parse_panel(
    text: &str,
    source: &str,
    mode: ValidationMode,
    errors: Option<&Path>,
    log: &Log,
) -> Result<PanelRead> {
    let read = read_panel(text.as_bytes(), mode).map_err(|e| match e {
        PanelFileError::Io(e) => CliError::io(format!("cannot read {source}"), e),
        other => CliError::validation(format!("{source}: {other}")),
    })?;
    for w in &read.warnings {
        log.info(format!(
            "  warning line {} ({}): {}",
            w.row + 2,
            w.household_id,
            w.reason
        ));
    }
    if read.records.is_empty() {
        report_rejections(&read.rejected, errors, log)?;
        return Err(CliError::validation(format!("{source}: no valid rows")));
    }
    Ok(read)
}

/// Writes the sidecar when one was requested, otherwise lists the rows on stderr.
pub fn report_rejections(rows: &[RejectedRow], errors: Option<&Path>, log: &Log) -> Result<()> {
    if let Some(sidecar) = errors {
        let mut sorted = rows.to_vec();
        sorted.sort_by_key(|r| r.row);
        write_rejections(&sorted, create_output(Some(sidecar))?).map_err(CliError::validation)?;
    }
    if !rows.is_empty() {
        log.info(format!("{} row(s) rejected", rows.len()));
        if errors.is_none() {
            for r in rows {
                log.info(format!(
                    "  line {} ({}): {}",
                    r.row + 2,
                    r.household_id,
                    r.reason
                ));
            }
        }
    }
    Ok(())
}

/// Human-readable progress on stderr.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    /// Multi-line blocks such as text tables.
    pub fn block(&self, text: &str) {
        if !self.quiet {
            eprint!("{text}");
        }
    }
}
