// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed log line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("confidence graph has no directed edges")]
    EmptyGraph,

    #[error("no transactions to mine")]
    EmptyTransactions,

    #[error("sensor {0} is not part of the ground-truth layout")]
    UnknownSensor(String),

    #[error("floorplan room graph is disconnected")]
    DisconnectedFloorplan,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid ground-truth file, line {line_no}: {reason}")]
    InvalidTruth { line_no: usize, reason: String },

    #[error("invalid floorplan: {0}")]
    InvalidPlan(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
