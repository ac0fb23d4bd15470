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

//! Scoring against hand-made ground-truth layouts.
//!
//! Ground-truth text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! sensors: M001 M002 M003 D001
//! adjacent: M001 M002
//! adjacent: M002 M003 overlap
//! room: bedroom-1 M001 M002
//! room: kitchen_dining M003
//! room: entrance D001
//! ```
//!
//! `overlap` marks a pair that is reachable only because two sensing areas
//! overlap; it still counts as adjacent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::locate::{LocationMap, SensorSet};
use crate::topology::{ordered_pair, Topology};
use crate::{Error, Result, SensorId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomCategory {
    Bedroom(usize),
    KitchenDining,
    Entrance,
    Other,
}

impl RoomCategory {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "kitchen_dining" => Some(RoomCategory::KitchenDining),
            "other" => Some(RoomCategory::Other),
            _ if s == "entrance" || s.starts_with("entrance-") => Some(RoomCategory::Entrance),
            _ => s
                .strip_prefix("bedroom-")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 1)
                .map(RoomCategory::Bedroom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruthLayout {
    pub sensors: BTreeSet<SensorId>,
    /// Unordered pairs stored as `(min, max)`.
    pub adjacency: BTreeSet<(SensorId, SensorId)>,
    /// Subset of `adjacency` annotated `overlap`.
    pub overlap: BTreeSet<(SensorId, SensorId)>,
    pub room_labels: BTreeMap<SensorId, RoomCategory>,
}

impl GroundTruthLayout {
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = GroundTruthLayout::default();
        let mut pending_pairs = Vec::new();
        let mut pending_rooms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: String| Error::InvalidTruth { line_no, reason };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| err(format!("expected `key: values`, got {line:?}")))?;
            let vals: Vec<&str> = rest.split_whitespace().collect();
            match key.trim() {
                "sensors" => g.sensors.extend(vals.iter().map(|s| s.to_string())),
                "adjacent" => match vals.as_slice() {
                    [a, b] => pending_pairs.push((line_no, *a, *b, false)),
                    [a, b, "overlap"] => pending_pairs.push((line_no, *a, *b, true)),
                    _ => return Err(err("expected `adjacent: A B [overlap]`".into())),
                },
                "room" => {
                    let (cat, ids) = vals
                        .split_first()
                        .ok_or_else(|| err("room needs a category".into()))?;
                    let cat = RoomCategory::parse(cat)
                        .ok_or_else(|| err(format!("unknown room category {cat:?}")))?;
                    pending_rooms.push((line_no, cat, ids.to_vec()));
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        for (line_no, a, b, overlap) in pending_pairs {
            for s in [a, b] {
                if !g.sensors.contains(s) {
                    return Err(Error::InvalidTruth {
                        line_no,
                        reason: format!("adjacency names unknown sensor {s}"),
                    });
                }
            }
            if a == b {
                return Err(Error::InvalidTruth {
                    line_no,
                    reason: format!("self-adjacency {a}"),
                });
            }
            let p = ordered_pair(a, b);
            if overlap {
                g.overlap.insert(p.clone());
            }
            g.adjacency.insert(p);
        }
        for (line_no, cat, ids) in pending_rooms {
            for s in ids {
                if !g.sensors.contains(s) {
                    return Err(Error::InvalidTruth {
                        line_no,
                        reason: format!("room names unknown sensor {s}"),
                    });
                }
                g.room_labels.insert(s.to_string(), cat.clone());
            }
        }
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn is_adjacent(&self, a: &str, b: &str) -> bool {
        self.adjacency.contains(&ordered_pair(a, b))
    }

    pub fn room(&self, category: &RoomCategory) -> SensorSet {
        self.room_labels
            .iter()
            .filter(|(_, c)| *c == category)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn bedrooms(&self) -> Vec<SensorSet> {
        let ks: BTreeSet<usize> = self
            .room_labels
            .values()
            .filter_map(|c| match c {
                RoomCategory::Bedroom(k) => Some(*k),
                _ => None,
            })
            .collect();
        ks.into_iter()
            .map(|k| self.room(&RoomCategory::Bedroom(k)))
            .collect()
    }
}

/// `truth/deduced` for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    #[serde(rename = "1/1")]
    TruePositive,
    #[serde(rename = "1/0")]
    Missed,
    #[serde(rename = "0/1")]
    Spurious,
    #[serde(rename = "0/0")]
    TrueNegative,
}

impl PairLabel {
    fn new(truth: bool, deduced: bool) -> Self {
        match (truth, deduced) {
            (true, true) => PairLabel::TruePositive,
            (true, false) => PairLabel::Missed,
            (false, true) => PairLabel::Spurious,
            (false, false) => PairLabel::TrueNegative,
        }
    }

    pub fn is_error(self) -> bool {
        matches!(self, PairLabel::Missed | PairLabel::Spurious)
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::TruePositive => "1/1",
            PairLabel::Missed => "1/0",
            PairLabel::Spurious => "0/1",
            PairLabel::TrueNegative => "0/0",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationshipScore {
    pub n: usize,
    pub sensors: Vec<SensorId>,
    pub pair_labels: BTreeMap<(SensorId, SensorId), PairLabel>,
    pub false_count: usize,
    pub accuracy_percent: f64,
}

impl RelationshipScore {
    pub fn label_count(&self, label: PairLabel) -> usize {
        self.pair_labels.values().filter(|&&l| l == label).count()
    }

    /// Square matrix with `truth/deduced` cells, rows are the "from" sensor.
    pub fn matrix_csv(&self) -> String {
        let mut s = String::from("From/To");
        for b in &self.sensors {
            let _ = write!(s, ",{b}");
        }
        s.push('\n');
        for a in &self.sensors {
            s.push_str(a);
            for b in &self.sensors {
                if a == b {
                    s.push_str(",-");
                } else {
                    let _ = write!(s, ",{}", self.pair_labels[&(a.clone(), b.clone())]);
                }
            }
            s.push('\n');
        }
        s
    }
}

/// `accuracy = (1 - false / (n^2 - n)) * 100` over ordered pairs.
pub fn accuracy_percent(false_count: usize, n: usize) -> f64 {
    let pairs = n * n - n;
    if pairs == 0 {
        return 100.0;
    }
    (1.0 - false_count as f64 / pairs as f64) * 100.0
}

pub fn relationship_accuracy(
    topology: &Topology,
    truth: &GroundTruthLayout,
) -> Result<RelationshipScore> {
    if let Some(unknown) = topology
        .nodes()
        .iter()
        .find(|s| !truth.sensors.contains(*s))
    {
        return Err(Error::UnknownSensor(unknown.clone()));
    }
    let sensors: Vec<SensorId> = truth.sensors.iter().cloned().collect();
    let mut pair_labels = BTreeMap::new();
    let mut false_count = 0;
    for a in &sensors {
        for b in &sensors {
            if a == b {
                continue;
            }
            let label = PairLabel::new(truth.is_adjacent(a, b), topology.has_edge(a, b));
            false_count += usize::from(label.is_error());
            pair_labels.insert((a.clone(), b.clone()), label);
        }
    }
    let n = sensors.len();
    Ok(RelationshipScore {
        n,
        sensors,
        pair_labels,
        false_count,
        accuracy_percent: accuracy_percent(false_count, n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub deduced: usize,
    pub truth: usize,
    pub overlap: usize,
    /// `None` when nothing was deduced.
    pub precision: Option<f64>,
    /// `None` when the truth set is empty.
    pub recall: Option<f64>,
}

impl SetScore {
    fn from_counts(deduced: usize, truth: usize, overlap: usize) -> Self {
        SetScore {
            deduced,
            truth,
            overlap,
            precision: (deduced > 0).then(|| overlap as f64 / deduced as f64),
            recall: (truth > 0).then(|| overlap as f64 / truth as f64),
        }
    }

    pub fn of(deduced: &SensorSet, truth: &SensorSet) -> Self {
        Self::from_counts(
            deduced.len(),
            truth.len(),
            deduced.intersection(truth).count(),
        )
    }
}

pub fn jaccard(a: &SensorSet, b: &SensorSet) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BedroomMatch {
    /// 0-based indices; `truth` is `None` for an unmatched deduced room.
    pub deduced: usize,
    pub truth: Option<usize>,
    pub score: SetScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationScores {
    pub bedrooms: SetScore,
    pub bedroom_matches: Vec<BedroomMatch>,
    pub kitchen_dining: SetScore,
    pub entrances: SetScore,
}

/// Assignment of deduced rooms to distinct true rooms maximizing total
/// overlap; exhaustive, ties resolved toward the lexicographically first
/// assignment.
fn best_matching(deduced: &[SensorSet], truth: &[SensorSet]) -> Vec<Option<usize>> {
    fn search(
        i: usize,
        deduced: &[SensorSet],
        truth: &[SensorSet],
        used: &mut Vec<bool>,
        current: &mut Vec<Option<usize>>,
        best: &mut (usize, Vec<Option<usize>>),
        total: usize,
    ) {
        if i == deduced.len() {
            if total > best.0 || best.1.is_empty() {
                *best = (total, current.clone());
            }
            return;
        }
        for j in 0..truth.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            current.push(Some(j));
            let gain = deduced[i].intersection(&truth[j]).count();
            search(i + 1, deduced, truth, used, current, best, total + gain);
            current.pop();
            used[j] = false;
        }
        current.push(None);
        search(i + 1, deduced, truth, used, current, best, total);
        current.pop();
    }
    let mut best = (0, Vec::new());
    search(
        0,
        deduced,
        truth,
        &mut vec![false; truth.len()],
        &mut Vec::new(),
        &mut best,
        0,
    );
    best.1
}

pub fn location_scores(locmap: &LocationMap, truth: &GroundTruthLayout) -> LocationScores {
    let true_bedrooms = truth.bedrooms();
    let assignment = best_matching(&locmap.bedrooms, &true_bedrooms);
    let empty = SensorSet::new();
    let bedroom_matches: Vec<BedroomMatch> = assignment
        .iter()
        .enumerate()
        .map(|(i, t)| BedroomMatch {
            deduced: i,
            truth: *t,
            score: SetScore::of(
                &locmap.bedrooms[i],
                t.map(|j| &true_bedrooms[j]).unwrap_or(&empty),
            ),
        })
        .collect();
    let overlap: usize = bedroom_matches.iter().map(|m| m.score.overlap).sum();
    let bedrooms = SetScore::from_counts(
        locmap.bedrooms.iter().map(BTreeSet::len).sum(),
        true_bedrooms.iter().map(BTreeSet::len).sum(),
        overlap,
    );
    LocationScores {
        bedrooms,
        bedroom_matches,
        kitchen_dining: SetScore::of(
            &locmap.kitchen_dining,
            &truth.room(&RoomCategory::KitchenDining),
        ),
        entrances: SetScore::of(
            &locmap.entrance_sensors(),
            &truth.room(&RoomCategory::Entrance),
        ),
    }
}

/// Score export: relationship summary plus location scores.
pub fn scores_json(rel: Option<&RelationshipScore>, loc: &LocationScores) -> String {
    #[derive(Serialize)]
    struct Rel {
        n: usize,
        ordered_pairs: usize,
        false_count: usize,
        missed: usize,
        spurious: usize,
        accuracy_percent: f64,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        relationship: Option<Rel>,
        locations: &'a LocationScores,
    }
    let rel = rel.map(|r| Rel {
        n: r.n,
        ordered_pairs: r.n * r.n - r.n,
        false_count: r.false_count,
        missed: r.label_count(PairLabel::Missed),
        spurious: r.label_count(PairLabel::Spurious),
        accuracy_percent: r.accuracy_percent,
    });
    serde_json::to_string_pretty(&Out {
        relationship: rel,
        locations: loc,
    })
    .expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::EdgeKind;

    const SMALL: &str = "\
# three rooms
sensors: A B C D
adjacent: A B
adjacent: B C overlap   # sensing areas overlap
room: bedroom-1 A B
room: kitchen_dining C
room: entrance D
";

    fn set(ids: &[&str]) -> SensorSet {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_truth() {
        let g = GroundTruthLayout::parse(SMALL).unwrap();
        assert_eq!(g.sensors.len(), 4);
        assert!(g.is_adjacent("C", "B"));
        assert_eq!(g.overlap.len(), 1);
        assert_eq!(g.bedrooms(), vec![set(&["A", "B"])]);
        assert_eq!(g.room(&RoomCategory::Entrance), set(&["D"]));
    }

    #[test]
    fn truth_errors_carry_line_numbers() {
        let e = GroundTruthLayout::parse("sensors: A\nadjacent: A Z\n").unwrap_err();
        assert!(matches!(e, Error::InvalidTruth { line_no: 2, .. }));
        assert!(GroundTruthLayout::parse("colour: red").is_err());
        assert!(GroundTruthLayout::parse("sensors: A\nroom: attic A").is_err());
        assert!(GroundTruthLayout::parse("sensors: A\nadjacent: A A").is_err());
    }

    #[test]
    fn formula_matches_reported_rates() {
        assert_eq!(format!("{:.1}", accuracy_percent(23, 31)), "97.5");
        assert_eq!(format!("{:.1}", accuracy_percent(31, 31)), "96.7");
        assert_eq!(accuracy_percent(0, 31), 100.0);
    }

    #[test]
    fn perfect_topology_scores_100() {
        let g = GroundTruthLayout::parse(SMALL).unwrap();
        let t = Topology::from_edges(
            ["A", "B", "C", "D"],
            [("A", "B", EdgeKind::Solid), ("B", "C", EdgeKind::Dashed)],
        );
        let s = relationship_accuracy(&t, &g).unwrap();
        assert_eq!(s.pair_labels.len(), 12);
        assert_eq!(s.false_count, 0);
        assert_eq!(s.accuracy_percent, 100.0);
        assert_eq!(s.label_count(PairLabel::TruePositive), 4);
    }

    #[test]
    fn errors_are_counted_both_directions() {
        let g = GroundTruthLayout::parse(SMALL).unwrap();
        let t = Topology::from_edges(
            ["A", "B", "C", "D"],
            [("A", "B", EdgeKind::Solid), ("C", "D", EdgeKind::Solid)],
        );
        let s = relationship_accuracy(&t, &g).unwrap();
        assert_eq!(s.label_count(PairLabel::Missed), 2);
        assert_eq!(s.label_count(PairLabel::Spurious), 2);
        assert_eq!(s.false_count, 4);
        let csv = s.matrix_csv();
        assert!(csv.starts_with("From/To,A,B,C,D\nA,-,1/1,0/0,0/0\n"));
        assert!(csv.contains("\nC,0/0,1/0,-,0/1\n"));
    }

    #[test]
    fn unknown_topology_sensor() {
        let g = GroundTruthLayout::parse(SMALL).unwrap();
        let t = Topology::from_edges(["A", "X"], [("A", "X", EdgeKind::Solid)]);
        assert!(matches!(relationship_accuracy(&t, &g), Err(Error::UnknownSensor(s)) if s == "X"));
    }

    #[test]
    fn bedroom_matching_picks_best_overlap() {
        let truth = GroundTruthLayout::parse(
            "sensors: M017 M018 M019 M020 M021 M022 M026 M028 M029 M030 M031\n\
             room: bedroom-1 M018 M019 M020 M021 M022\n\
             room: bedroom-2 M017 M028 M029 M030 M031\n",
        )
        .unwrap();
        let map = LocationMap {
            bedrooms: vec![
                set(&["M017", "M028", "M029", "M030", "M031"]),
                set(&["M018", "M020", "M021", "M022", "M026"]),
            ],
            ..LocationMap::default()
        };
        let s = location_scores(&map, &truth);
        assert_eq!(s.bedroom_matches[0].truth, Some(1));
        assert_eq!(s.bedroom_matches[1].truth, Some(0));
        assert_eq!(s.bedroom_matches[1].score.precision, Some(0.8));
        assert_eq!(s.bedroom_matches[1].score.recall, Some(0.8));
        assert_eq!(s.bedrooms.overlap, 9);
    }

    #[test]
    fn empty_map_has_zero_recall() {
        let g = GroundTruthLayout::parse(SMALL).unwrap();
        let s = location_scores(&LocationMap::default(), &g);
        assert_eq!(s.bedrooms.recall, Some(0.0));
        assert_eq!(s.kitchen_dining.recall, Some(0.0));
        assert_eq!(s.entrances.recall, Some(0.0));
        assert_eq!(s.bedrooms.precision, None);
    }

    #[test]
    fn jaccard_basics() {
        assert_eq!(jaccard(&set(&["A", "B"]), &set(&["B", "C"])), 1.0 / 3.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
    }
}
