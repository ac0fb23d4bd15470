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

//! Sensor-ID lists and leave-backs recorded in the Milan and Tulum homes.

mod common;

use common::*;
use pds::locate::{
    deduce_bedrooms_from_transactions, deduce_entrances_traced, deduce_kitchen_from_transactions,
    EntranceDecision,
};
use pds::mining::{
    frequent_itemsets, select_target_set, select_target_set_with_ties, transactions_from_text,
};
use pds::segment::{detect_leaveback, LeaveBackActivity, SegmentationParams};
use pds::topology::alpha_from_totals;
use pds::SensorLog;

fn target(text: &str) -> (Vec<String>, usize, usize) {
    let tx = transactions_from_text(text);
    let sets = frequent_itemsets(&tx, 0.5).unwrap();
    let t = select_target_set(&sets).unwrap();
    (t.items, t.support_count, tx.len())
}

fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn milan_night_target() {
    let (items, count, n) = target(MILAN_NIGHT);
    assert_eq!(items, ids(&["M013", "M020", "M021", "M025", "M028"]));
    assert_eq!((count, n), (2, 4));
}

#[test]
fn milan_night_target_matches_oracle() {
    let tx = transactions_from_text(MILAN_NIGHT);
    let oracle = brute_force_itemsets(&tx, 0.5);
    let best = oracle
        .iter()
        .max_by(|a, b| {
            a.0.len()
                .cmp(&b.0.len())
                .then(a.1.cmp(&b.1))
                .then(b.0.cmp(&a.0))
        })
        .unwrap();
    assert_eq!(best.0, ids(&["M013", "M020", "M021", "M025", "M028"]));
}

#[test]
fn tulum_night_target() {
    let (items, count, n) = target(TULUM_NIGHT);
    assert_eq!(items, ids(&["M018", "M020", "M022", "M026"]));
    assert_eq!((count, n), (4, 7));
    let tx = transactions_from_text(TULUM_NIGHT);
    let (_, ties) = select_target_set_with_ties(&frequent_itemsets(&tx, 0.5).unwrap()).unwrap();
    assert!(ties.is_empty());
}

#[test]
fn kitchen_targets() {
    assert_eq!(
        target(MILAN_EVENING).0,
        ids(&["M014", "M015", "M022", "M023"])
    );
    assert_eq!(
        target(TULUM_EVENING).0,
        ids(&["M003", "M014", "M015", "M016"])
    );
    assert_eq!(transactions_from_text(MILAN_EVENING).len(), 41);
    assert_eq!(transactions_from_text(TULUM_EVENING).len(), 46);
}

#[test]
fn alpha_values() {
    assert_eq!(alpha_from_totals(5597, 415).unwrap(), 13);
    assert_eq!(alpha_from_totals(13645, 728).unwrap(), 18);
}

#[test]
fn milan_bedroom_rounds() {
    let tx = transactions_from_text(MILAN_NIGHT);
    let rounds = deduce_bedrooms_from_transactions(&tx, &milan_topology(), 0.5).unwrap();
    assert_eq!(rounds.len(), 1);
    assert_eq!(
        rounds[0].result,
        set(&["M013", "M019", "M020", "M021", "M025", "M028"])
    );
    assert_eq!(rounds[0].expanded.len(), 1);
    assert_eq!(rounds[0].expanded[0].sensor, "M019");
}

#[test]
fn milan_kitchen_expansion() {
    let topo = milan_topology();
    let bedrooms =
        deduce_bedrooms_from_transactions(&transactions_from_text(MILAN_NIGHT), &topo, 0.5)
            .unwrap();
    let claimed = bedrooms[0].result.clone();
    let round = deduce_kitchen_from_transactions(
        &transactions_from_text(MILAN_EVENING),
        &topo,
        &claimed,
        0.5,
    )
    .unwrap()
    .unwrap();
    assert_eq!(
        round.result,
        set(&["D003", "M012", "M014", "M015", "M016", "M022", "M023"])
    );
    assert!(round.conflicts.is_empty());
}

#[test]
fn tulum_two_bedrooms() {
    let tx = transactions_from_text(TULUM_NIGHT);
    let rounds = deduce_bedrooms_from_transactions(&tx, &tulum_topology(), 0.5).unwrap();
    assert_eq!(rounds.len(), 2);
    assert_eq!(
        rounds[0].result,
        set(&["M018", "M020", "M021", "M022", "M026"])
    );
    assert_eq!(rounds[1].transactions, 1);
    assert_eq!(rounds[1].mined, ids(&["M017", "M029", "M030", "M031"]));
    assert_eq!(
        rounds[1].result,
        set(&["M017", "M028", "M029", "M030", "M031"])
    );
}

#[test]
fn tulum_kitchen_grows_recursively() {
    let topo = tulum_topology();
    let round = deduce_kitchen_from_transactions(
        &transactions_from_text(TULUM_EVENING),
        &topo,
        &Default::default(),
        0.5,
    )
    .unwrap()
    .unwrap();
    let expected = set(&[
        "M002", "M003", "M009", "M010", "M011", "M012", "M013", "M014", "M015", "M016",
    ]);
    assert_eq!(round.result, expected);
    assert!(!round.result.contains("M007"));
    assert!(!round.result.contains("M008"));
}

fn lb(sensor: &str, depart: &str, ret: &str) -> LeaveBackActivity {
    LeaveBackActivity {
        sensor_id: sensor.into(),
        depart_ts: ts(depart),
        return_ts: ts(ret),
    }
}

#[test]
fn tulum_entrances() {
    let topo = tulum_topology();
    let kitchen = set(&[
        "M002", "M003", "M009", "M010", "M011", "M012", "M013", "M014", "M015", "M016",
    ]);
    let bedrooms = vec![
        set(&["M018", "M020", "M021", "M022", "M026"]),
        set(&["M017", "M028", "M029", "M030", "M031"]),
    ];
    let leavebacks = vec![
        lb("M008", "2009-09-30 08:38:00", "2009-09-30 11:09:00"),
        lb("M008", "2009-10-01 08:35:00", "2009-10-01 11:04:00"),
        lb("M002", "2009-10-01 12:00:00", "2009-10-01 13:30:00"),
        lb("M001", "2009-10-01 17:13:00", "2009-10-01 18:39:00"),
        lb("M010", "2009-10-02 09:00:00", "2009-10-02 10:30:00"),
    ];
    let (entrances, steps) = deduce_entrances_traced(&leavebacks, &bedrooms, &kitchen, &topo);
    assert_eq!(entrances, vec![set(&["M008"]), set(&["M001"])]);
    assert_eq!(steps.len(), 4);
    assert!(steps
        .iter()
        .any(|s| s.sensor == "M002" && s.decision == EntranceDecision::KitchenSensor));
}

#[test]
fn milan_entrance_skips_bedroom_sensor() {
    let bedrooms = vec![set(&["M013", "M019", "M020", "M021", "M025", "M028"])];
    let leavebacks = vec![
        lb("M028", "2009-10-17 10:00:00", "2009-10-17 12:00:00"),
        lb("D001", "2009-10-18 10:00:00", "2009-10-18 12:00:00"),
    ];
    let (entrances, _) = deduce_entrances_traced(
        &leavebacks,
        &bedrooms,
        &Default::default(),
        &milan_topology(),
    );
    assert_eq!(entrances, vec![set(&["D001"])]);
}

#[test]
fn leaveback_records() {
    let p = SegmentationParams::default();
    let log = SensorLog::new(
        "t",
        vec![
            ev("2009-09-30 08:38:06", "S008"),
            ev("2009-09-30 11:09:48", "S008"),
        ],
    );
    let found = detect_leaveback(&log, &p);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].absence_seconds(), 9102);

    let short = SensorLog::new(
        "t",
        vec![
            ev("2009-09-30 08:38:06", "S008"),
            ev("2009-09-30 09:38:05", "S008"),
        ],
    );
    assert!(detect_leaveback(&short, &p).is_empty());
    let exact = SensorLog::new(
        "t",
        vec![
            ev("2009-09-30 08:38:06", "S008"),
            ev("2009-09-30 09:38:06", "S008"),
        ],
    );
    assert_eq!(detect_leaveback(&exact, &p).len(), 1);
}

#[test]
fn tulum_leaveback_table() {
    let p = SegmentationParams::default();
    let log = SensorLog::new(
        "t",
        vec![
            ev("2009-09-30 08:38:00", "M008"),
            ev("2009-09-30 11:09:00", "M008"),
            ev("2009-10-01 08:35:00", "M008"),
            ev("2009-10-01 11:04:00", "M008"),
            ev("2009-10-01 17:13:00", "M001"),
            ev("2009-10-01 18:39:00", "M001"),
        ],
    );
    let found = detect_leaveback(&log, &p);
    // the overnight M008 gap counts too
    let sensors: Vec<&str> = found.iter().map(|l| l.sensor_id.as_str()).collect();
    assert_eq!(sensors, vec!["M008", "M008", "M008", "M001"]);
    let hist = pds::routine::hourly_histograms(&[], &found, &Default::default());
    let rows: Vec<(String, String, String)> = hist
        .leaveback_entries
        .iter()
        .map(|e| (e.date.clone(), e.depart.clone(), e.sensor.clone()))
        .collect();
    assert_eq!(
        rows[0],
        ("2009-09-30".into(), "08:38:00".into(), "M008".into())
    );
    assert_eq!(
        rows[3],
        ("2009-10-01".into(), "17:13:00".into(), "M001".into())
    );
}
