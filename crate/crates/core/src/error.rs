//   Copyright 2026 robustlp developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model at layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label {label} out of range for {num_labels} labels")]
    LabelOutOfRange { label: usize, num_labels: usize },

    #[error("{path}: line {line}: {reason}")]
    Dataset {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: invalid IDX file: {reason}")]
    Idx { path: PathBuf, reason: String },

    #[error("layer {layer} ({kind}) is not supported here")]
    UnsupportedLayer { layer: usize, kind: &'static str },

    #[error("network has {sites} activation sites, exceeding the limit of {max}")]
    TooManySites { sites: usize, max: usize },

    #[error("grid search refused: {0}")]
    GridTooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn expect_dim(expected: usize, found: usize) -> Result<()> {
        if expected != found {
            Err(Error::DimensionMismatch { expected, found })
        } else {
            Ok(())
        }
    }
}
