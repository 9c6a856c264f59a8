//! Library side of the `qgld` binary; the acceptance suite calls it directly.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod inputs;
pub mod pool;

pub use args::Cli;
pub use commands::{run, Output};
pub use error::{CliError, CliResult};

/// Writes `output` to its target, standard output by default.
pub fn emit(output: &Output) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
