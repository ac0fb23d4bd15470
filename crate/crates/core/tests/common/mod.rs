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

//! Shared fixtures and brute-force oracles for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use pds::ingest::SensorEvent;
use pds::mining::{min_support_count, Transaction};
use pds::topology::{EdgeKind, Topology};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MILAN_NIGHT: &str = include_str!("../fixtures/milan_night.txt");
pub const MILAN_EVENING: &str = include_str!("../fixtures/milan_evening.txt");
pub const TULUM_NIGHT: &str = include_str!("../fixtures/tulum_night.txt");
pub const TULUM_EVENING: &str = include_str!("../fixtures/tulum_evening.txt");

pub fn set(ids: &[&str]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

pub fn ts(s: &str) -> NaiveDateTime {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").unwrap()
}

pub fn ev(t: &str, sensor: &str) -> SensorEvent {
    SensorEvent::new(ts(t), sensor, "ON")
}

fn solid(pairs: &[(&'static str, &'static str)]) -> Vec<(&'static str, &'static str, EdgeKind)> {
    pairs
        .iter()
        .map(|&(a, b)| (a, b, EdgeKind::Solid))
        .collect()
}

/// A Milan-like topology: M019 is linked to three of the five mined bedroom
/// sensors; D003, M012 and M016 reach the kitchen set; every other sensor
/// touches at most one member of either set.
pub fn milan_topology() -> Topology {
    let nodes = [
        "D001", "D003", "M001", "M002", "M003", "M004", "M005", "M006", "M007", "M008", "M009",
        "M010", "M011", "M012", "M013", "M014", "M015", "M016", "M017", "M018", "M019", "M020",
        "M021", "M022", "M023", "M024", "M025", "M026", "M027", "M028",
    ];
    let edges = solid(&[
        ("M013", "M020"),
        ("M020", "M021"),
        ("M021", "M025"),
        ("M025", "M028"),
        ("M019", "M020"),
        ("M019", "M021"),
        ("M019", "M025"),
        ("M024", "M028"),
        ("M014", "M015"),
        ("M015", "M022"),
        ("M022", "M023"),
        ("D003", "M014"),
        ("D003", "M015"),
        ("M012", "M014"),
        ("M012", "M022"),
        ("M012", "M023"),
        ("M016", "M014"),
        ("M016", "M015"),
        ("M016", "M023"),
        ("M011", "M016"),
        ("M017", "M016"),
        ("D001", "M001"),
        ("M001", "M002"),
        ("M002", "M003"),
    ]);
    Topology::from_edges(nodes, edges)
}

/// A Tulum-like topology matching the expansions and non-expansions
/// observed there: M021 joins the first bedroom, M028 the second, six
/// sensors chain into the kitchen, M007/M008 stay out, M001 and M008 are
/// not linked.
pub fn tulum_topology() -> Topology {
    let nodes = (1..=31).map(|i| format!("M{i:03}")).collect::<Vec<_>>();
    let edges = solid(&[
        ("M018", "M021"),
        ("M020", "M021"),
        ("M022", "M021"),
        ("M018", "M020"),
        ("M020", "M022"),
        ("M019", "M018"),
        ("M017", "M029"),
        ("M029", "M030"),
        ("M030", "M031"),
        ("M028", "M029"),
        ("M028", "M031"),
        ("M003", "M014"),
        ("M014", "M015"),
        ("M015", "M016"),
        ("M002", "M003"),
        ("M002", "M014"),
        ("M002", "M015"),
        ("M009", "M002"),
        ("M009", "M003"),
        ("M009", "M015"),
        ("M010", "M009"),
        ("M010", "M002"),
        ("M010", "M003"),
        ("M011", "M010"),
        ("M011", "M009"),
        ("M011", "M002"),
        ("M011", "M003"),
        ("M012", "M011"),
        ("M012", "M010"),
        ("M012", "M009"),
        ("M012", "M002"),
        ("M013", "M012"),
        ("M013", "M011"),
        ("M013", "M010"),
        ("M013", "M003"),
        ("M013", "M014"),
        ("M007", "M008"),
        ("M007", "M009"),
        ("M008", "M010"),
        ("M001", "M005"),
        ("M005", "M006"),
    ]);
    let refs: Vec<&str> = nodes.iter().map(String::as_str).collect();
    Topology::from_edges(refs, edges)
}

/// Every non-empty subset of the item universe meeting the support count,
/// as `(items, count)` sorted by items.
pub fn brute_force_itemsets(tx: &[Transaction], min_support: f64) -> Vec<(Vec<String>, usize)> {
    let universe: Vec<String> = tx
        .iter()
        .flat_map(|t| t.items.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(universe.len() <= 16, "oracle is exponential");
    let need = min_support_count(min_support, tx.len());
    let mut out = Vec::new();
    for mask in 1u32..(1 << universe.len()) {
        let items: Vec<String> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect();
        let count = tx
            .iter()
            .filter(|t| items.iter().all(|i| t.items.contains(i)))
            .count();
        if count >= need {
            out.push((items, count));
        }
    }
    out.sort();
    out
}

/// All maximal index ranges `[i, j]` whose internal gaps are `<= y` and
/// whose span is `>= x`, found by enumerating start/end pairs.
pub fn brute_force_runs(events: &[SensorEvent], x_ms: i64, y_ms: i64) -> Vec<(usize, usize)> {
    let gap = |k: usize| (events[k + 1].timestamp - events[k].timestamp).num_milliseconds();
    let n = events.len();
    let mut out = Vec::new();
    for i in 0..n {
        let mut max_gap = 0;
        for j in i..n {
            if j > i {
                max_gap = max_gap.max(gap(j - 1));
            }
            if max_gap > y_ms {
                break;
            }
            let closed_left = i == 0 || gap(i - 1) > y_ms;
            let closed_right = j == n - 1 || gap(j) > y_ms;
            let span = (events[j].timestamp - events[i].timestamp).num_milliseconds();
            if closed_left && closed_right && span >= x_ms {
                out.push((i, j));
            }
        }
    }
    out
}

/// Random sorted log of `n` triggers over `sensors` ids, with gaps drawn to
/// straddle `y` and occasional long absences.
pub fn random_log(rng: &mut ChaCha8Rng, n: usize, sensors: usize, y_ms: i64) -> Vec<SensorEvent> {
    let mut t = NaiveDate::from_ymd_opt(2021, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let roll = rng.gen_range(0..100);
        let gap = match roll {
            0..=4 => y_ms,
            5..=9 => y_ms + 1,
            10..=69 => rng.gen_range(0..y_ms),
            70..=94 => rng.gen_range(y_ms..6 * y_ms),
            _ => rng.gen_range(3_000_000..8_000_000),
        };
        t += Duration::milliseconds(gap);
        let s = rng.gen_range(0..sensors);
        out.push(SensorEvent::new(t, format!("M{s:03}"), "ON"));
    }
    out
}

/// Random transaction database over at most `items` items.
pub fn random_transactions(rng: &mut ChaCha8Rng, max_tx: usize, items: usize) -> Vec<Transaction> {
    let n = rng.gen_range(1..=max_tx);
    (0..n)
        .map(|_| {
            let mut t: Vec<String> = (0..items)
                .filter(|_| rng.gen_bool(0.45))
                .map(|i| format!("I{i:02}"))
                .collect();
            if t.is_empty() {
                t.push(format!("I{:02}", rng.gen_range(0..items)));
            }
            Transaction::new(t)
        })
        .collect()
}
