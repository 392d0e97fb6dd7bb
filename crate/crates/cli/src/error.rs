use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] spinbath::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 1 i/o, 2 configuration or validation, 3 numerical integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Config(_) | CliError::Core(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                spinbath::Error::Specification(_) => "specification",
                spinbath::Error::Validation(_) => "validation",
                spinbath::Error::Domain(_) => "domain",
                spinbath::Error::Capacity(_) => "capacity",
                spinbath::Error::Degeneracy(_) => "degeneracy",
                spinbath::Error::NumericalIntegrity(_) => "numerical_integrity",
            },
        }
    }

    /// Single-line JSON record for stderr.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(spinbath::Error::Domain("x".into())).exit_code(), 2);
        let numerical = CliError::Core(spinbath::Error::NumericalIntegrity("drift".into()));
        assert_eq!(numerical.exit_code(), 3);
        let record: serde_json::Value = serde_json::from_str(&numerical.record()).unwrap();
        assert_eq!(record["error"], "numerical_integrity");
        assert_eq!(record["exit_code"], 3);
        assert_eq!(CliError::io("out", std::io::Error::other("full")).exit_code(), 1);
    }
}
