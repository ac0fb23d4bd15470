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

//! Passive inference over smart-home sensor event logs.
//!
//! Given a stream of sensor triggers (as decoded from eavesdropped wireless
//! traffic), this crate reconstructs which sensors are physically adjacent,
//! deduces which sensors sit in bedrooms, the kitchen/dining area and at
//! entrances, and profiles the residents' daily routines.
//!
//! The pipeline is:
//!
//! 1. [`ingest`]: parse a CASAS-style log into a sorted [`SensorLog`].
//! 2. [`segment`]: cut the log into indoor activities and leave-back
//!    (absence) episodes.
//! 3. [`topology`]: accumulate directed transition counts and filter them
//!    against their average into a sensor [`Topology`].
//! 4. [`mining`] + [`locate`]: frequent-itemset mining over activities in
//!    fixed clock windows, expanded over the topology, yields a [`LocationMap`].
//! 5. [`routine`]: hourly histograms of activity per deduced location.
//!
//! [`eval`] scores results against ground-truth layouts and [`sim`] generates
//! synthetic logs from planted floorplans for end-to-end checks.

pub mod error;
pub mod eval;
pub mod ingest;
pub mod locate;
pub mod mining;
pub mod pipeline;
pub mod routine;
pub mod segment;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
pub use ingest::{IngestConfig, IngestStats, SensorEvent, SensorLog};
pub use locate::{DeductionConfig, LocationMap};
pub use segment::{ClockWindow, IndoorActivity, LeaveBackActivity, SegmentationParams};
pub use topology::{ConfidenceGraph, EdgeKind, Topology};

/// Sensor identifiers are short opaque tokens such as `M013` or `D001`.
pub type SensorId = String;
