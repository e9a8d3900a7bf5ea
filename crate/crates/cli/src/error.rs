use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrity failure in {context}: {source}")]
    Integrity {
        context: String,
        source: coinflip::Error,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration errors, 3 for conservation or positivity
    /// failures, 4 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integrity { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn from_engine(context: impl Into<String>, e: coinflip::Error) -> Self {
        match e {
            coinflip::Error::Integrity { .. } | coinflip::Error::Bankruptcy { .. } => {
                CliError::Integrity {
                    context: context.into(),
                    source: e,
                }
            }
            other => CliError::Config(format!("{}: {other}", context.into())),
        }
    }
}

impl From<coinflip::Error> for CliError {
    fn from(e: coinflip::Error) -> Self {
        CliError::from_engine("configuration", e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let drift = coinflip::Error::Integrity {
            drift: 1e-6,
            limit: 1e-8,
            matches: 10,
        };
        assert_eq!(CliError::from_engine("run", drift).exit_code(), 3);
        let io = CliError::io("/x", std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 4);
        let domain = coinflip::Error::Domain("bad".into());
        assert_eq!(CliError::from_engine("run", domain).exit_code(), 2);
    }
}
