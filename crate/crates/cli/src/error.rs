use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("duplicate key `{key}` on lines {first} and {second}")]
    DuplicateKey { key: String, first: usize, second: usize },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("{key}: {msg}")]
    Semantic { key: String, msg: String },

    #[error("{key}: {source}")]
    Core { key: String, source: quasilab::Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Run(#[from] quasilab::Error),
}

impl CliError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        Self::Syntax { line, msg: msg.into() }
    }

    pub(crate) fn semantic(key: &str, msg: impl Into<String>) -> Self {
        Self::Semantic { key: key.to_string(), msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
