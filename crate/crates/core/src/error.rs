use std::fmt;

use thiserror::Error;

/// Errors raised while loading resources or running the parser.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("invalid ontology at type `{name}`: {message}")]
    Structure { name: String, message: String },
    #[error("invalid synset graph at `{id}`: {message}")]
    SynsetGraph { id: String, message: String },
    #[error("unknown ontology type `{0}`")]
    UnknownType(String),
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("cannot parse an empty sentence")]
    EmptySentence,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(origin: &str, line: usize, message: impl fmt::Display) -> Self {
        Error::Parse {
            origin: origin.to_string(),
            line,
            message: message.to_string(),
        }
    }

    pub(crate) fn structure(name: &str, message: impl fmt::Display) -> Self {
        Error::Structure {
            name: name.to_string(),
            message: message.to_string(),
        }
    }
}

/// Reads a resource file, tagging IO failures with the path.
pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Ensures `value` lies in `[0, 1]`.
pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { what, value })
    }
}
