use std::io::Write;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// CSV bytes: a `#` comment line with the config hash and master seed, the
/// header row, then `rows`.
pub fn csv_bytes<R: Serialize>(config: &ExperimentConfig, rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# config_sha256={} master_seed={}\n", config.hash(), config.master_seed).into_bytes();
    let mut writer = csv::Writer::from_writer(&mut out);
    for row in rows {
        writer.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Output(e.to_string()))?;
    drop(writer);
    Ok(out)
}

/// Writes to `config.output`, or stdout when unset.
pub fn emit(config: &ExperimentConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Output(e.to_string())),
    }
}
