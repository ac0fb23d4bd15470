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

//! End-to-end run producing every artifact of one analysis.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::eval::{
    location_scores, relationship_accuracy, scores_json, GroundTruthLayout, LocationScores,
    RelationshipScore,
};
use crate::ingest::{IngestConfig, IngestStats, SensorLog};
use crate::locate::{location_map_json, run_full_deduction, Deduction, DeductionConfig};
use crate::routine::{hourly_histograms_with, ClassPolarity, RoutineHistogram};
use crate::segment::{activities_json, leavebacks_json, SegmentationParams};
use crate::topology::{groups_over_days, GroupSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub ingest: IngestConfig,
    pub segmentation: SegmentationParams,
    pub deduction: DeductionConfig,
    pub polarity: ClassPolarity,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.ingest.validate()?;
        self.segmentation.validate()?;
        self.deduction.validate()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub log: SensorLog,
    pub stats: Option<IngestStats>,
    pub deduction: Deduction,
    pub groups: GroupSeries,
    pub routine: RoutineHistogram,
    pub relationship: Option<RelationshipScore>,
    pub locations: Option<LocationScores>,
}

/// Runs every stage. Fails with [`Error::EmptyGraph`] when the log yields
/// no indoor activity transitions.
pub fn run(
    log: SensorLog,
    stats: Option<IngestStats>,
    config: &PipelineConfig,
    truth: Option<&GroundTruthLayout>,
) -> Result<PipelineRun> {
    config.validate()?;
    let deduction = run_full_deduction(&log, &config.segmentation, &config.deduction)?;
    let groups = groups_over_days(&log, &config.segmentation);
    let routine = hourly_histograms_with(
        &deduction.activities,
        &deduction.leavebacks,
        &deduction.map,
        config.polarity,
    );
    let (relationship, locations) = match truth {
        Some(t) => (
            Some(relationship_accuracy(&deduction.topology, t)?),
            Some(location_scores(&deduction.map, t)),
        ),
        None => (None, None),
    };
    Ok(PipelineRun {
        log,
        stats,
        deduction,
        groups,
        routine,
        relationship,
        locations,
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    source: &'a str,
    events: usize,
    days: usize,
    activities: usize,
    leavebacks: usize,
    topology_nodes: usize,
    topology_edges: usize,
    alpha: u64,
    groups_final: Option<usize>,
    groups_stable_from_day: Option<usize>,
    bedrooms: usize,
    kitchen_dining_sensors: usize,
    entrances: usize,
    unattributed: usize,
    partial_overlap: usize,
    accuracy_percent: Option<f64>,
}

impl PipelineRun {
    /// `(file name, contents)` for every artifact, in a fixed order.
    pub fn artifacts(&self, plot_data: bool) -> Vec<(&'static str, String)> {
        let d = &self.deduction;
        let mut out = Vec::new();
        if let Some(stats) = &self.stats {
            out.push((
                "ingest.json",
                serde_json::to_string_pretty(stats).expect("serializable"),
            ));
        }
        out.push(("activities.json", activities_json(&d.activities)));
        out.push(("leavebacks.json", leavebacks_json(&d.leavebacks)));
        out.push(("topology.dot", d.topology.to_dot()));
        out.push(("topology.json", d.topology.to_json()));
        out.push(("groups.csv", self.groups.to_csv()));
        out.push(("locations.json", location_map_json(&d.map, &d.report)));
        out.push(("routine.csv", self.routine.to_csv()));
        out.push(("routine.json", self.routine.to_json()));
        out.push(("leavebacks.csv", self.routine.leavebacks_csv()));
        if plot_data {
            out.push(("routine.dat", self.routine.to_plot_data()));
        }
        if let Some(loc) = &self.locations {
            out.push(("scores.json", scores_json(self.relationship.as_ref(), loc)));
        }
        if let Some(rel) = &self.relationship {
            out.push(("matrix.csv", rel.matrix_csv()));
        }
        out.push(("summary.json", self.summary_json()));
        out
    }

    pub fn summary_json(&self) -> String {
        let d = &self.deduction;
        let s = Summary {
            source: self.log.source_name(),
            events: self.log.len(),
            days: self.log.day_span(),
            activities: d.activities.len(),
            leavebacks: d.leavebacks.len(),
            topology_nodes: d.topology.nodes().len(),
            topology_edges: d.topology.edges().len(),
            alpha: d.topology.alpha(),
            groups_final: self.groups.entries.last().map(|e| e.groups),
            groups_stable_from_day: self.groups.stable_from(),
            bedrooms: d.map.bedrooms.len(),
            kitchen_dining_sensors: d.map.kitchen_dining.len(),
            entrances: d.map.entrances.len(),
            unattributed: self.routine.unattributed,
            partial_overlap: self.routine.partial_overlap,
            accuracy_percent: self.relationship.as_ref().map(|r| r.accuracy_percent),
        };
        serde_json::to_string_pretty(&s).expect("serializable")
    }

    /// Writes all artifacts into `dir`, creating it if needed.
    pub fn write_to(&self, dir: impl AsRef<Path>, plot_data: bool) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, mut body) in self.artifacts(plot_data) {
            if !body.ends_with('\n') {
                body.push('\n');
            }
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
