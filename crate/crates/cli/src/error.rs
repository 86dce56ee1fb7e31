use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Compute(#[from] kindist::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// 1 for I/O failures, 2 for everything the input itself got wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Compute(kindist::Error::Io(_)) => 1,
            CliError::Compute(kindist::Error::Csv(e)) if e.is_io_error() => 1,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::io(Path::new("a"), io).exit_code(), 1);
        assert_eq!(CliError::from(kindist::Error::Infeasible { t1: -1.0 }).exit_code(), 2);
        let io = std::io::Error::other("disk");
        assert_eq!(CliError::from(kindist::Error::Io(io)).exit_code(), 1);
    }
}
