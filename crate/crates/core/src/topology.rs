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

//! Directed transition counts between sensors and the filtered topology
//! derived from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::ingest::SensorLog;
use crate::segment::{segment_indoor, IndoorActivity, SegmentationParams};
use crate::{Error, Result, SensorId};

/// Directed transitions of one activity: consecutive repeats of the same
/// sensor are collapsed first, so there are no self-edges.
pub fn activity_edges(activity: &IndoorActivity) -> Vec<(SensorId, SensorId)> {
    sequence_edges(activity.sensor_ids())
}

pub fn sequence_edges<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<(SensorId, SensorId)> {
    let mut out = Vec::new();
    let mut prev: Option<&str> = None;
    for id in ids {
        match prev {
            Some(p) if p == id => {}
            Some(p) => out.push((p.to_string(), id.to_string())),
            None => {}
        }
        prev = Some(id);
    }
    out
}

/// Occurrence count per directed sensor pair, accumulated over activities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfidenceGraph {
    counts: BTreeMap<(SensorId, SensorId), u64>,
    nodes: BTreeSet<SensorId>,
}

impl ConfidenceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_activity(&mut self, activity: &IndoorActivity) {
        for s in activity.distinct_sensors() {
            self.nodes.insert(s.clone());
        }
        for edge in activity_edges(activity) {
            self.add_edge(edge.0, edge.1, 1);
        }
    }

    /// Adds `n` occurrences of `from -> to`. Self-edges and `n == 0` are ignored
    /// apart from registering the nodes.
    pub fn add_edge(&mut self, from: impl Into<SensorId>, to: impl Into<SensorId>, n: u64) {
        let (from, to) = (from.into(), to.into());
        self.nodes.insert(from.clone());
        self.nodes.insert(to.clone());
        if from != to && n > 0 {
            *self.counts.entry((from, to)).or_default() += n;
        }
    }

    pub fn add_node(&mut self, node: impl Into<SensorId>) {
        self.nodes.insert(node.into());
    }

    /// Folds another graph in; the operation is commutative and associative.
    pub fn merge(&mut self, other: &ConfidenceGraph) {
        self.nodes.extend(other.nodes.iter().cloned());
        for ((a, b), n) in &other.counts {
            *self.counts.entry((a.clone(), b.clone())).or_default() += n;
        }
    }

    pub fn count(&self, from: &str, to: &str) -> u64 {
        // BTreeMap<(String, String)> cannot be probed with (&str, &str) directly.
        self.counts
            .get(&(from.to_string(), to.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<(SensorId, SensorId), u64> {
        &self.counts
    }

    pub fn nodes(&self) -> &BTreeSet<SensorId> {
        &self.nodes
    }

    /// Sum of all directed-edge counts.
    pub fn beta(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of distinct directed edges.
    pub fn gamma(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Unordered pairs present in at least one direction.
    pub fn undirected_pairs(&self) -> BTreeSet<(SensorId, SensorId)> {
        self.counts
            .keys()
            .map(|(a, b)| ordered_pair(a, b))
            .collect()
    }
}

pub fn ordered_pair(a: &str, b: &str) -> (SensorId, SensorId) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

pub fn build_confidence_graph<'a>(
    activities: impl IntoIterator<Item = &'a IndoorActivity>,
) -> ConfidenceGraph {
    let mut g = ConfidenceGraph::new();
    for a in activities {
        g.add_activity(a);
    }
    g
}

/// `floor(beta / gamma)`.
pub fn alpha(graph: &ConfidenceGraph) -> Result<u64> {
    alpha_from_totals(graph.beta(), graph.gamma())
}

pub fn alpha_from_totals(beta: u64, gamma: u64) -> Result<u64> {
    if gamma == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(beta / gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Both directions above the threshold.
    Solid,
    /// Exactly one direction above the threshold.
    Dashed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyEdge {
    pub kind: EdgeKind,
    pub count_ab: u64,
    pub count_ba: u64,
}

/// Undirected sensor adjacency kept after thresholding.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topology {
    nodes: BTreeSet<SensorId>,
    edges: BTreeMap<(SensorId, SensorId), TopologyEdge>,
    alpha: u64,
    beta: u64,
    gamma: u64,
}

impl Topology {
    /// A topology with explicit edges, mostly for fixtures. Counts are left at 0.
    pub fn from_edges<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, EdgeKind)>,
    ) -> Self {
        let mut t = Topology {
            nodes: nodes.into_iter().map(str::to_string).collect(),
            ..Topology::default()
        };
        for (a, b, kind) in edges {
            t.insert(a, b, kind);
        }
        t
    }

    fn insert(&mut self, a: &str, b: &str, kind: EdgeKind) {
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        self.edges.insert(
            ordered_pair(a, b),
            TopologyEdge {
                kind,
                count_ab: 0,
                count_ba: 0,
            },
        );
    }

    pub fn nodes(&self) -> &BTreeSet<SensorId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(SensorId, SensorId), TopologyEdge> {
        &self.edges
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&TopologyEdge> {
        self.edges.get(&ordered_pair(a, b))
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        a != b && self.edge(a, b).is_some()
    }

    pub fn neighbors<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.keys().filter_map(move |(a, b)| {
            if a == node {
                Some(b.as_str())
            } else if b == node {
                Some(a.as_str())
            } else {
                None
            }
        })
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &(SensorId, SensorId)> {
        self.edges
            .iter()
            .filter(move |(_, e)| e.kind == kind)
            .map(|(k, _)| k)
    }

    /// Connected components of the topology itself (not the raw counts).
    pub fn components(&self) -> Vec<Vec<SensorId>> {
        components(&self.nodes, self.edges.keys())
    }

    /// Graphviz DOT, nodes and edges in lexicographic order.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph topology {\n");
        let _ = writeln!(
            s,
            "  // alpha={} beta={} gamma={}",
            self.alpha, self.beta, self.gamma
        );
        for n in &self.nodes {
            let _ = writeln!(s, "  \"{n}\";");
        }
        for ((a, b), e) in &self.edges {
            let style = match e.kind {
                EdgeKind::Solid => "solid",
                EdgeKind::Dashed => "dashed",
            };
            let _ = writeln!(
                s,
                "  \"{a}\" -- \"{b}\" [style={style}, label=\"{}/{}\"];",
                e.count_ab, e.count_ba
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct EdgeOut<'a> {
            a: &'a str,
            b: &'a str,
            kind: EdgeKind,
            count_ab: u64,
            count_ba: u64,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            nodes: Vec<&'a str>,
            edges: Vec<EdgeOut<'a>>,
            alpha: u64,
            beta: u64,
            gamma: u64,
        }
        let out = Out {
            nodes: self.nodes.iter().map(String::as_str).collect(),
            edges: self
                .edges
                .iter()
                .map(|((a, b), e)| EdgeOut {
                    a,
                    b,
                    kind: e.kind,
                    count_ab: e.count_ab,
                    count_ba: e.count_ba,
                })
                .collect(),
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        };
        serde_json::to_string_pretty(&out).expect("serializable")
    }
}

/// Keeps a pair as solid when both directions exceed `alpha`, as dashed when
/// exactly one does. A missing direction counts as zero.
pub fn apply_rules(graph: &ConfidenceGraph) -> Result<Topology> {
    let alpha = alpha(graph)?;
    Ok(apply_rules_with_alpha(graph, alpha))
}

pub fn apply_rules_with_alpha(graph: &ConfidenceGraph, alpha: u64) -> Topology {
    let mut topo = Topology {
        nodes: graph.nodes().clone(),
        edges: BTreeMap::new(),
        alpha,
        beta: graph.beta(),
        gamma: graph.gamma(),
    };
    for (a, b) in graph.undirected_pairs() {
        let ab = graph.count(&a, &b);
        let ba = graph.count(&b, &a);
        let kind = match (ab > alpha, ba > alpha) {
            (true, true) => EdgeKind::Solid,
            (true, false) | (false, true) => EdgeKind::Dashed,
            (false, false) => continue,
        };
        topo.edges.insert(
            (a, b),
            TopologyEdge {
                kind,
                count_ab: ab,
                count_ba: ba,
            },
        );
    }
    topo
}

fn components<'a>(
    nodes: &BTreeSet<SensorId>,
    edges: impl IntoIterator<Item = &'a (SensorId, SensorId)>,
) -> Vec<Vec<SensorId>> {
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut uf = UnionFind::<usize>::new(nodes.len());
    for (a, b) in edges {
        if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<SensorId>> = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(n.clone());
    }
    let mut out: Vec<Vec<SensorId>> = groups.into_values().collect();
    out.sort();
    out
}

/// Weakly connected components of the raw count graph. Each group is sorted,
/// and groups are ordered by their smallest member.
pub fn sensor_groups(graph: &ConfidenceGraph) -> Vec<Vec<SensorId>> {
    components(graph.nodes(), graph.counts().keys())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCount {
    /// 1-based index into the log's distinct dates.
    pub day: usize,
    pub date: NaiveDate,
    pub groups: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupSeries {
    pub entries: Vec<GroupCount>,
}

impl GroupSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("day,groups,nodes\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{}", e.day, e.groups, e.nodes);
        }
        s
    }

    /// First day from which the group count never changes again.
    pub fn stable_from(&self) -> Option<usize> {
        let last = self.entries.last()?.groups;
        let mut day = self.entries.last()?.day;
        for e in self.entries.iter().rev() {
            if e.groups != last {
                break;
            }
            day = e.day;
        }
        Some(day)
    }
}

/// Group count after each day of eavesdropping, recomputed on every prefix.
pub fn groups_over_days(log: &SensorLog, params: &SegmentationParams) -> GroupSeries {
    let dates = log.dates();
    let mut entries = Vec::with_capacity(dates.len());
    for (i, date) in dates.iter().enumerate() {
        let prefix = log.first_days(i + 1);
        let activities = segment_indoor(&prefix, params);
        let graph = build_confidence_graph(&activities);
        entries.push(GroupCount {
            day: i + 1,
            date: *date,
            groups: sensor_groups(&graph).len(),
            nodes: graph.nodes().len(),
        });
    }
    GroupSeries { entries }
}
