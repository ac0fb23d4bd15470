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

//! Deduction of bedroom, kitchen/dining and entrance sensors.
//!
//! Bedrooms and the kitchen are found by mining the sensor lists of
//! activities that start inside a fixed clock window, taking the largest
//! frequent set, and growing it over the topology. Entrances are the
//! leave-back sensors left over once bedroom and kitchen sensors are
//! eliminated, grouped by topology adjacency.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::SensorLog;
use crate::mining::{frequent_itemsets, select_target_set_with_ties, Transaction};
use crate::segment::{
    detect_leaveback, filter_by_clock, segment_indoor, ClockWindow, IndoorActivity,
    LeaveBackActivity, SegmentationParams,
};
use crate::topology::{apply_rules, build_confidence_graph, ConfidenceGraph, Topology};
use crate::{Error, Result, SensorId};

pub type SensorSet = BTreeSet<SensorId>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeductionConfig {
    pub bedroom_window: ClockWindow,
    pub kitchen_window: ClockWindow,
    pub min_support: f64,
}

impl Default for DeductionConfig {
    fn default() -> Self {
        DeductionConfig {
            bedroom_window: ClockWindow::bedroom_default(),
            kitchen_window: ClockWindow::kitchen_default(),
            min_support: 0.5,
        }
    }
}

impl DeductionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_support > 0.0 && self.min_support < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "min_support must lie in (0, 1), got {}",
                self.min_support
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocationMap {
    pub bedrooms: Vec<SensorSet>,
    pub kitchen_dining: SensorSet,
    pub entrances: Vec<SensorSet>,
}

impl LocationMap {
    pub fn bedroom_sensors(&self) -> SensorSet {
        self.bedrooms.iter().flatten().cloned().collect()
    }

    pub fn entrance_sensors(&self) -> SensorSet {
        self.entrances.iter().flatten().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.bedrooms.is_empty() && self.kitchen_dining.is_empty() && self.entrances.is_empty()
    }
}

/// `ceil(n / 2)`: how many members of a set a sensor must be linked to.
pub fn half_of(n: usize) -> usize {
    n.div_ceil(2)
}

/// A sensor pulled into a set by topology expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub sensor: SensorId,
    /// Set members it is linked to at the moment it joined.
    pub linked_to: Vec<SensorId>,
    /// Set size at the moment it joined.
    pub set_size: usize,
}

/// Grows `seed` to a fixpoint: a sensor joins once it shares a topology edge
/// (solid or dashed) with at least half of the current set. Candidates are
/// scanned lexicographically and the set grows immediately, so later
/// candidates in the same round face the larger set.
pub fn expand_by_topology(seed: &SensorSet, topology: &Topology) -> SensorSet {
    expand_excluding(seed, topology, &SensorSet::new()).0
}

/// [`expand_by_topology`] that never adds a sensor from `exclude`.
pub fn expand_excluding(
    seed: &SensorSet,
    topology: &Topology,
    exclude: &SensorSet,
) -> (SensorSet, Vec<Expansion>) {
    let mut set = seed.clone();
    let mut added = Vec::new();
    if set.is_empty() {
        return (set, added);
    }
    loop {
        let mut grew = false;
        for cand in topology.nodes() {
            if set.contains(cand) || exclude.contains(cand) {
                continue;
            }
            let linked: Vec<SensorId> = set
                .iter()
                .filter(|m| topology.has_edge(cand, m))
                .cloned()
                .collect();
            if linked.len() >= half_of(set.len()) {
                added.push(Expansion {
                    sensor: cand.clone(),
                    linked_to: linked,
                    set_size: set.len(),
                });
                set.insert(cand.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    (set, added)
}

/// One mine-select-expand pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningRound {
    pub transactions: usize,
    pub mined: Vec<SensorId>,
    pub support_count: usize,
    pub support_ratio: f64,
    /// Other sets tying with `mined` on size and support.
    pub ties: Vec<Vec<SensorId>>,
    pub expanded: Vec<Expansion>,
    /// Mined sensors dropped because an earlier location already claimed them.
    pub conflicts: Vec<SensorId>,
    pub result: SensorSet,
}

fn mine_round(
    transactions: &[Transaction],
    topology: &Topology,
    claimed: &SensorSet,
    min_support: f64,
) -> Result<Option<MiningRound>> {
    if transactions.is_empty() {
        return Ok(None);
    }
    let sets = frequent_itemsets(transactions, min_support)?;
    let Some((target, ties)) = select_target_set_with_ties(&sets) else {
        return Ok(None);
    };
    let (seed, conflicts): (Vec<SensorId>, Vec<SensorId>) = target
        .items
        .iter()
        .cloned()
        .partition(|s| !claimed.contains(s));
    let seed: SensorSet = seed.into_iter().collect();
    let (result, expanded) = expand_excluding(&seed, topology, claimed);
    Ok(Some(MiningRound {
        transactions: transactions.len(),
        mined: target.items.clone(),
        support_count: target.support_count,
        support_ratio: target.support_ratio,
        ties: ties.into_iter().map(|t| t.items).collect(),
        expanded,
        conflicts,
        result,
    }))
}

/// Repeats mine-select-expand, discarding every list that touches an
/// already-deduced bedroom, until the lists run out or the best set found
/// has a single sensor. The first round always runs.
pub fn deduce_bedrooms_from_transactions(
    transactions: &[Transaction],
    topology: &Topology,
    min_support: f64,
) -> Result<Vec<MiningRound>> {
    let mut remaining = transactions.to_vec();
    let mut claimed = SensorSet::new();
    let mut rounds: Vec<MiningRound> = Vec::new();
    while let Some(round) = mine_round(&remaining, topology, &claimed, min_support)? {
        if !rounds.is_empty() && round.mined.len() <= 1 {
            break;
        }
        if round.result.is_empty() {
            break;
        }
        remaining.retain(|t| !t.contains_any(&round.result));
        claimed.extend(round.result.iter().cloned());
        rounds.push(round);
    }
    Ok(rounds)
}

fn window_transactions(activities: &[IndoorActivity], window: &ClockWindow) -> Vec<Transaction> {
    filter_by_clock(activities, window)
        .iter()
        .enumerate()
        .map(|(i, a)| Transaction::from_activity(i, a))
        .collect()
}

/// Bedrooms from activities already restricted to the bedroom window.
pub fn deduce_bedrooms(
    activities: &[IndoorActivity],
    topology: &Topology,
    config: &DeductionConfig,
) -> Result<Vec<SensorSet>> {
    let tx: Vec<Transaction> = activities
        .iter()
        .enumerate()
        .map(|(i, a)| Transaction::from_activity(i, a))
        .collect();
    Ok(
        deduce_bedrooms_from_transactions(&tx, topology, config.min_support)?
            .into_iter()
            .map(|r| r.result)
            .collect(),
    )
}

/// Single mine-select-expand pass; sensors already claimed (bedrooms) are
/// neither kept nor added.
pub fn deduce_kitchen_from_transactions(
    transactions: &[Transaction],
    topology: &Topology,
    claimed: &SensorSet,
    min_support: f64,
) -> Result<Option<MiningRound>> {
    mine_round(transactions, topology, claimed, min_support)
}

/// Kitchen/dining sensors from activities already restricted to the kitchen
/// window.
pub fn deduce_kitchen(
    activities: &[IndoorActivity],
    topology: &Topology,
    config: &DeductionConfig,
) -> Result<SensorSet> {
    let tx: Vec<Transaction> = activities
        .iter()
        .enumerate()
        .map(|(i, a)| Transaction::from_activity(i, a))
        .collect();
    Ok(
        deduce_kitchen_from_transactions(&tx, topology, &SensorSet::new(), config.min_support)?
            .map(|r| r.result)
            .unwrap_or_default(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntranceDecision {
    /// Already a bedroom sensor (a long sleep looks like an absence).
    BedroomSensor,
    KitchenSensor,
    /// Joined entrance set `index` (0-based).
    Joined {
        index: usize,
    },
    /// Started entrance set `index` (0-based).
    Started {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntranceStep {
    pub sensor: SensorId,
    pub leavebacks: usize,
    pub decision: EntranceDecision,
}

/// Groups the leave-back sensors that are neither bedroom nor kitchen
/// sensors. Each joins the first entrance set it is linked to at least half
/// of, otherwise it starts a new one. Sensors are visited in order of their
/// first leave-back.
pub fn deduce_entrances_traced(
    leavebacks: &[LeaveBackActivity],
    bedrooms: &[SensorSet],
    kitchen: &SensorSet,
    topology: &Topology,
) -> (Vec<SensorSet>, Vec<EntranceStep>) {
    let mut order: Vec<&SensorId> = Vec::new();
    let mut counts: BTreeMap<&SensorId, usize> = BTreeMap::new();
    for lb in leavebacks {
        let c = counts.entry(&lb.sensor_id).or_default();
        if *c == 0 {
            order.push(&lb.sensor_id);
        }
        *c += 1;
    }

    let mut entrances: Vec<SensorSet> = Vec::new();
    let mut steps = Vec::new();
    for sensor in order {
        let decision = if bedrooms.iter().any(|b| b.contains(sensor)) {
            EntranceDecision::BedroomSensor
        } else if kitchen.contains(sensor) {
            EntranceDecision::KitchenSensor
        } else {
            let joined = entrances.iter().position(|set| {
                let links = set.iter().filter(|m| topology.has_edge(sensor, m)).count();
                links >= half_of(set.len())
            });
            match joined {
                Some(index) => {
                    entrances[index].insert(sensor.clone());
                    EntranceDecision::Joined { index }
                }
                None => {
                    entrances.push(SensorSet::from([sensor.clone()]));
                    EntranceDecision::Started {
                        index: entrances.len() - 1,
                    }
                }
            }
        };
        steps.push(EntranceStep {
            sensor: sensor.clone(),
            leavebacks: counts[sensor],
            decision,
        });
    }
    (entrances, steps)
}

pub fn deduce_entrances(
    leavebacks: &[LeaveBackActivity],
    bedrooms: &[SensorSet],
    kitchen: &SensorSet,
    topology: &Topology,
) -> Vec<SensorSet> {
    deduce_entrances_traced(leavebacks, bedrooms, kitchen, topology).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorSource {
    Mined,
    Expanded,
    LeaveBack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub location: String,
    pub source: SensorSource,
    pub detail: String,
}

/// How every deduced sensor got there, plus the intermediate counts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeductionReport {
    pub bedroom_window_activities: usize,
    pub kitchen_window_activities: usize,
    pub leaveback_count: usize,
    pub bedroom_rounds: Vec<MiningRound>,
    pub kitchen_round: Option<MiningRound>,
    pub entrance_steps: Vec<EntranceStep>,
    pub provenance: BTreeMap<SensorId, Provenance>,
}

#[derive(Debug, Clone)]
pub struct Deduction {
    pub map: LocationMap,
    pub report: DeductionReport,
    pub activities: Vec<IndoorActivity>,
    pub leavebacks: Vec<LeaveBackActivity>,
    pub graph: ConfidenceGraph,
    pub topology: Topology,
}

fn record_round(
    prov: &mut BTreeMap<SensorId, Provenance>,
    round: &MiningRound,
    location: &str,
    topology: &Topology,
) {
    for s in &round.mined {
        if round.result.contains(s) {
            prov.insert(
                s.clone(),
                Provenance {
                    location: location.to_string(),
                    source: SensorSource::Mined,
                    detail: format!("support {}/{}", round.support_count, round.transactions),
                },
            );
        }
    }
    for x in &round.expanded {
        let links: Vec<String> = x
            .linked_to
            .iter()
            .map(|m| {
                let e = topology.edge(&x.sensor, m);
                let (ab, ba) = match e {
                    Some(e) if x.sensor < *m => (e.count_ab, e.count_ba),
                    Some(e) => (e.count_ba, e.count_ab),
                    None => (0, 0),
                };
                format!("{m}({ab}/{ba})")
            })
            .collect();
        prov.insert(
            x.sensor.clone(),
            Provenance {
                location: location.to_string(),
                source: SensorSource::Expanded,
                detail: format!(
                    "linked to {} of {}: {}",
                    x.linked_to.len(),
                    x.set_size,
                    links.join(" ")
                ),
            },
        );
    }
}

/// Runs the three deductions on already-computed activities and topology.
pub fn deduce_locations(
    activities: &[IndoorActivity],
    leavebacks: &[LeaveBackActivity],
    topology: &Topology,
    config: &DeductionConfig,
) -> Result<(LocationMap, DeductionReport)> {
    config.validate()?;
    let mut report = DeductionReport::default();

    let bedroom_tx = window_transactions(activities, &config.bedroom_window);
    report.bedroom_window_activities = bedroom_tx.len();
    let rounds = deduce_bedrooms_from_transactions(&bedroom_tx, topology, config.min_support)?;
    let bedrooms: Vec<SensorSet> = rounds.iter().map(|r| r.result.clone()).collect();
    for (i, r) in rounds.iter().enumerate() {
        record_round(
            &mut report.provenance,
            r,
            &format!("bedroom-{}", i + 1),
            topology,
        );
    }
    report.bedroom_rounds = rounds;

    let claimed: SensorSet = bedrooms.iter().flatten().cloned().collect();
    let kitchen_tx = window_transactions(activities, &config.kitchen_window);
    report.kitchen_window_activities = kitchen_tx.len();
    let kitchen_round =
        deduce_kitchen_from_transactions(&kitchen_tx, topology, &claimed, config.min_support)?;
    let kitchen = kitchen_round
        .as_ref()
        .map(|r| r.result.clone())
        .unwrap_or_default();
    if let Some(r) = &kitchen_round {
        record_round(&mut report.provenance, r, "kitchen_dining", topology);
    }
    report.kitchen_round = kitchen_round;

    report.leaveback_count = leavebacks.len();
    let (entrances, steps) = deduce_entrances_traced(leavebacks, &bedrooms, &kitchen, topology);
    for step in &steps {
        let index = match step.decision {
            EntranceDecision::Joined { index } | EntranceDecision::Started { index } => index,
            _ => continue,
        };
        report.provenance.insert(
            step.sensor.clone(),
            Provenance {
                location: format!("entrance-{}", index + 1),
                source: SensorSource::LeaveBack,
                detail: format!("{} leave-back activities", step.leavebacks),
            },
        );
    }
    report.entrance_steps = steps;

    Ok((
        LocationMap {
            bedrooms,
            kitchen_dining: kitchen,
            entrances,
        },
        report,
    ))
}

/// Segmentation, topology and location deduction over a whole log.
pub fn run_full_deduction(
    log: &SensorLog,
    seg_params: &SegmentationParams,
    config: &DeductionConfig,
) -> Result<Deduction> {
    seg_params.validate()?;
    let activities = segment_indoor(log, seg_params);
    let leavebacks = detect_leaveback(log, seg_params);
    let graph = build_confidence_graph(&activities);
    let topology = apply_rules(&graph)?;
    let (map, report) = deduce_locations(&activities, &leavebacks, &topology, config)?;
    Ok(Deduction {
        map,
        report,
        activities,
        leavebacks,
        graph,
        topology,
    })
}

/// `{bedrooms, kitchen_dining, entrances, provenance}` as JSON.
pub fn location_map_json(map: &LocationMap, report: &DeductionReport) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        bedrooms: &'a [SensorSet],
        kitchen_dining: &'a SensorSet,
        entrances: &'a [SensorSet],
        provenance: &'a BTreeMap<SensorId, Provenance>,
    }
    serde_json::to_string_pretty(&Out {
        bedrooms: &map.bedrooms,
        kitchen_dining: &map.kitchen_dining,
        entrances: &map.entrances,
        provenance: &report.provenance,
    })
    .expect("serializable")
}
