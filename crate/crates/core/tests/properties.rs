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

//! Invariants over randomly generated inputs.

mod common;

use std::collections::BTreeSet;

use chrono::Duration;
use common::*;
use pds::eval::{relationship_accuracy, GroundTruthLayout, PairLabel};
use pds::ingest::{load_reader, IngestConfig, SensorEvent};
use pds::locate::{deduce_locations, DeductionConfig, LocationMap};
use pds::mining::{frequent_itemsets, Transaction};
use pds::routine::{classify_activity, hourly_histograms, ActivityClass};
use pds::segment::{detect_leaveback, segment_events, segment_indoor, SegmentationParams};
use pds::topology::{
    apply_rules, apply_rules_with_alpha, build_confidence_graph, sensor_groups, ConfidenceGraph,
    Topology,
};
use pds::SensorLog;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn log_line() -> impl Strategy<Value = String> {
    let ts = (
        0u32..5,
        0u32..24,
        0u32..60,
        0u32..60,
        proptest::option::of(0u32..1_000_000),
    );
    let sensor = prop_oneof![
        (1u32..20).prop_map(|i| format!("M{i:03}")),
        (1u32..4).prop_map(|i| format!("D{i:03}")),
        Just("T001".to_string()),
    ];
    let state = prop_oneof![
        Just("ON"),
        Just("OFF"),
        Just("OPEN"),
        Just("CLOSE"),
        Just("21.5")
    ];
    let tail = prop_oneof![
        Just(""),
        Just(" Sleep begin"),
        Just("\tMeal_Preparation end")
    ];
    let garbage = prop_oneof![
        Just("garbage line"),
        Just(""),
        Just("2009-13-40 99:00:00 M001 ON")
    ];
    prop_oneof![
        8 => (ts, sensor, state, tail).prop_map(|((d, h, m, s, f), id, st, tail)| {
            let frac = f.map(|f| format!(".{f:06}")).unwrap_or_default();
            format!("2009-10-{:02} {h:02}:{m:02}:{s:02}{frac} {id} {st}{tail}", d + 1)
        }),
        1 => garbage.prop_map(str::to_string),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_endings_do_not_matter(lines in prop::collection::vec(log_line(), 0..60)) {
        let cfg = IngestConfig::default();
        let lf = lines.join("\n");
        let crlf = lines.join("\r\n");
        let (a, sa) = load_reader(lf.as_bytes(), "x", &cfg).unwrap();
        let (b, sb) = load_reader(crlf.as_bytes(), "x", &cfg).unwrap();
        prop_assert_eq!(a.events(), b.events());
        prop_assert_eq!(&sa, &sb);
        prop_assert_eq!(sa.kept + sa.skipped + sa.malformed, sa.total_lines);
    }

    #[test]
    fn reload_of_normalized_output_is_identity(lines in prop::collection::vec(log_line(), 0..60)) {
        let cfg = IngestConfig::default();
        let (a, _) = load_reader(lines.join("\n").as_bytes(), "x", &cfg).unwrap();
        let text = a.to_normalized_string();
        let (b, stats) = load_reader(text.as_bytes(), "x", &cfg).unwrap();
        prop_assert_eq!(a.events(), b.events());
        prop_assert_eq!(stats.malformed, 0);
        prop_assert_eq!(b.to_normalized_string(), text);
    }

    #[test]
    fn activities_respect_their_invariants(seed in any::<u64>(), x in 11u64..90, y in 1u64..=10) {
        let p = SegmentationParams::new(x, y, 3600).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = random_log(&mut rng, 300, 6, y as i64 * 1000);
        let acts = segment_events(&events, &p);
        let mut cursor = 0;
        let mut prev_end = None;
        for a in &acts {
            prop_assert!(a.duration_ms() >= x as i64 * 1000);
            for w in a.events().windows(2) {
                prop_assert!((w[1].timestamp - w[0].timestamp).num_milliseconds() <= y as i64 * 1000);
            }
            if let Some(end) = prev_end {
                prop_assert!(a.start_ts() >= end);
            }
            prev_end = Some(a.end_ts());
            // contiguous slice of the log, after the previous one
            let start = events[cursor..].iter().position(|e| e == &a.events()[0]).unwrap() + cursor;
            prop_assert_eq!(&events[start..start + a.events().len()], a.events());
            cursor = start + a.events().len();
            prop_assert_eq!(
                classify_activity(a) == ActivityClass::Crossing,
                a.distinct_sensors().len() >= 2
            );
        }
    }

    #[test]
    fn smaller_gap_refines_runs(seed in any::<u64>(), y_small in 1u64..10, extra in 1u64..10) {
        let y_big = y_small + extra;
        let x = 30;
        let small = SegmentationParams::new(x, y_small, 3600).unwrap();
        let big = SegmentationParams::new(x, y_big, 3600).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = random_log(&mut rng, 300, 4, y_big as i64 * 1000);
        let coarse = segment_events(&events, &big);
        for a in segment_events(&events, &small) {
            prop_assert!(coarse
                .iter()
                .any(|c| c.start_ts() <= a.start_ts() && a.end_ts() <= c.end_ts()));
        }
    }

    #[test]
    fn late_events_keep_existing_leavebacks(seed in any::<u64>(), late in 3601i64..20_000) {
        let p = SegmentationParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut events = random_log(&mut rng, 300, 3, 10_000);
        let before = detect_leaveback(&SensorLog::new("a", events.clone()), &p);
        let last = events.last().unwrap().clone();
        let other = if last.sensor_id == "M900" { "M901" } else { "M900" };
        events.push(SensorEvent::new(last.timestamp + Duration::seconds(late), other, "ON"));
        let after = detect_leaveback(&SensorLog::new("a", events), &p);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn rules_depend_only_on_comparison_with_alpha(
        counts in prop::collection::btree_map((0u8..8, 0u8..8), 1u64..40, 1..30),
        alpha in 0u64..30,
    ) {
        let mut g = ConfidenceGraph::new();
        let mut doubled = ConfidenceGraph::new();
        for (&(a, b), &n) in &counts {
            g.add_edge(format!("S{a}"), format!("S{b}"), n);
            doubled.add_edge(format!("S{a}"), format!("S{b}"), 2 * n);
        }
        let t1 = apply_rules_with_alpha(&g, alpha);
        let t2 = apply_rules_with_alpha(&doubled, 2 * alpha);
        let kinds = |t: &Topology| t.edges().iter().map(|(k, e)| (k.clone(), e.kind)).collect::<Vec<_>>();
        prop_assert_eq!(kinds(&t1), kinds(&t2));
        let raw = g.undirected_pairs();
        for pair in t1.edges().keys() {
            prop_assert!(raw.contains(pair));
        }
    }

    #[test]
    fn groups_partition_and_shrink(
        nodes in 1u8..15,
        edges in prop::collection::vec((0u8..15, 0u8..15), 0..30),
    ) {
        let mut g = ConfidenceGraph::new();
        for i in 0..nodes {
            g.add_node(format!("S{i:02}"));
        }
        let mut last = sensor_groups(&g).len();
        for (a, b) in edges {
            let (a, b) = (a % nodes, b % nodes);
            g.add_edge(format!("S{a:02}"), format!("S{b:02}"), 1);
            let groups = sensor_groups(&g);
            prop_assert!(groups.len() <= last);
            last = groups.len();
            let flat: Vec<&String> = groups.iter().flatten().collect();
            let uniq: BTreeSet<&String> = flat.iter().copied().collect();
            prop_assert_eq!(flat.len(), uniq.len());
            prop_assert_eq!(uniq.len(), g.nodes().len());
        }
    }

    #[test]
    fn mining_is_downward_closed_and_order_free(seed in any::<u64>(), s in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tx = random_transactions(&mut rng, 15, 9);
        let sets = frequent_itemsets(&tx, s).unwrap();
        let keys: BTreeSet<Vec<String>> = sets.iter().map(|f| f.items.clone()).collect();
        for f in &sets {
            let scan = tx.iter().filter(|t| f.items.iter().all(|i| t.items.contains(i))).count();
            prop_assert_eq!(scan, f.support_count);
            for skip in 0..f.items.len() {
                let mut sub = f.items.clone();
                sub.remove(skip);
                prop_assert!(sub.is_empty() || keys.contains(&sub));
            }
        }
        let mut shuffled: Vec<Transaction> = tx
            .iter()
            .map(|t| {
                let mut items: Vec<String> = t.items.iter().cloned().collect();
                items.shuffle(&mut rng);
                Transaction::new(items)
            })
            .collect();
        shuffled.shuffle(&mut rng);
        prop_assert_eq!(frequent_itemsets(&shuffled, s).unwrap(), sets);
    }

    #[test]
    fn error_count_is_symmetric(
        n in 2u8..10,
        e1 in prop::collection::btree_set((0u8..10, 0u8..10), 0..20),
        e2 in prop::collection::btree_set((0u8..10, 0u8..10), 0..20),
    ) {
        let name = |i: u8| format!("S{:02}", i % n);
        let clean = |e: &BTreeSet<(u8, u8)>| -> Vec<(String, String)> {
            e.iter().filter(|(a, b)| a % n != b % n).map(|&(a, b)| (name(a), name(b))).collect()
        };
        let (p1, p2) = (clean(&e1), clean(&e2));
        let sensors: Vec<String> = (0..n).map(name).collect();
        let truth_of = |pairs: &[(String, String)]| {
            let mut text = format!("sensors: {}\n", sensors.join(" "));
            for (a, b) in pairs {
                text.push_str(&format!("adjacent: {a} {b}\n"));
            }
            GroundTruthLayout::parse(&text).unwrap()
        };
        let topo_of = |pairs: &[(String, String)]| {
            Topology::from_edges(
                sensors.iter().map(String::as_str),
                pairs.iter().map(|(a, b)| (a.as_str(), b.as_str(), pds::topology::EdgeKind::Solid)),
            )
        };
        let r1 = relationship_accuracy(&topo_of(&p2), &truth_of(&p1)).unwrap();
        let r2 = relationship_accuracy(&topo_of(&p1), &truth_of(&p2)).unwrap();
        prop_assert_eq!(r1.false_count, r2.false_count);
        prop_assert_eq!(r1.accuracy_percent, r2.accuracy_percent);
        prop_assert_eq!(r1.label_count(PairLabel::Missed), r2.label_count(PairLabel::Spurious));
        prop_assert!((0.0..=100.0).contains(&r1.accuracy_percent));
        prop_assert_eq!(r1.accuracy_percent == 100.0, r1.false_count == 0);
    }
}

fn night_and_evening_log(rng: &mut ChaCha8Rng) -> SensorLog {
    let mut events = Vec::new();
    let base = ts("2021-01-01 00:00:00");
    for day in 0..4i64 {
        for (hour, pool) in [(3, 0..4), (18, 4..8), (12, 0..10)] {
            for k in 0..3i64 {
                let mut t =
                    base + Duration::days(day) + Duration::hours(hour) + Duration::minutes(20 * k);
                for _ in 0..12 {
                    t += Duration::seconds(rand::Rng::gen_range(rng, 2..6));
                    let s = rand::Rng::gen_range(rng, pool.clone());
                    events.push(SensorEvent::new(t, format!("M{s:03}"), "ON"));
                }
            }
        }
    }
    SensorLog::new("r", events)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deduction_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log = night_and_evening_log(&mut rng);
        let p = SegmentationParams::default();
        let acts = segment_indoor(&log, &p);
        let lbs = detect_leaveback(&log, &p);
        let topo = apply_rules(&build_confidence_graph(&acts)).unwrap();
        let cfg = DeductionConfig::default();
        let (map, report) = deduce_locations(&acts, &lbs, &topo, &cfg).unwrap();
        let (map2, _) = deduce_locations(&acts, &lbs, &topo, &cfg).unwrap();
        prop_assert_eq!(&map, &map2);
        for (i, a) in map.bedrooms.iter().enumerate() {
            for b in &map.bedrooms[i + 1..] {
                prop_assert!(a.is_disjoint(b));
            }
        }
        let entrances = map.entrance_sensors();
        prop_assert!(entrances.is_disjoint(&map.bedroom_sensors()));
        prop_assert!(entrances.is_disjoint(&map.kitchen_dining));
        for round in report.bedroom_rounds.iter().chain(report.kitchen_round.iter()) {
            let mut size = round.mined.len() - round.conflicts.len();
            for x in &round.expanded {
                prop_assert_eq!(x.set_size, size);
                size += 1;
            }
            prop_assert_eq!(size, round.result.len());
        }

        let hist = hourly_histograms(&acts, &lbs, &map);
        prop_assert!(hist.attributed() <= acts.len());
        let mut shuffled = acts.clone();
        shuffled.shuffle(&mut rng);
        prop_assert_eq!(hourly_histograms(&shuffled, &lbs, &map), hist);
        let empty = hourly_histograms(&acts, &lbs, &LocationMap::default());
        prop_assert_eq!(empty.attributed(), 0);
    }
}
