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

//! Hourly activity profiles per deduced location.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use chrono::Timelike;
use serde::{Deserialize, Serialize};

use crate::locate::LocationMap;
use crate::segment::{IndoorActivity, LeaveBackActivity};
use crate::SensorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityClass {
    /// Movement across two or more sensors.
    Crossing,
    /// A single sensor firing repeatedly (a still activity such as cooking).
    NonCrossing,
}

/// Which activities are labelled "crossing".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClassPolarity {
    /// Multi-sensor activities are crossing.
    #[default]
    MultiSensorCrossing,
    /// Single-sensor activities are crossing.
    SingleSensorCrossing,
}

pub fn classify_activity(activity: &IndoorActivity) -> ActivityClass {
    classify_with(activity, ClassPolarity::default())
}

pub fn classify_with(activity: &IndoorActivity, polarity: ClassPolarity) -> ActivityClass {
    let single = activity.distinct_sensors().len() == 1;
    match (polarity, single) {
        (ClassPolarity::MultiSensorCrossing, false)
        | (ClassPolarity::SingleSensorCrossing, true) => ActivityClass::Crossing,
        _ => ActivityClass::NonCrossing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Location {
    /// 1-based bedroom index.
    Bedroom(usize),
    KitchenDining,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Bedroom(i) => write!(f, "bedroom-{i}"),
            Location::KitchenDining => f.write_str("kitchen_dining"),
        }
    }
}

/// The location whose sensor set contains every sensor of the activity.
/// Bedrooms are tried before the kitchen.
pub fn attribute_to_location(activity: &IndoorActivity, locmap: &LocationMap) -> Option<Location> {
    let sensors = activity.distinct_sensors();
    for (i, room) in locmap.bedrooms.iter().enumerate() {
        if sensors.iter().all(|s| room.contains(s)) {
            return Some(Location::Bedroom(i + 1));
        }
    }
    if !locmap.kitchen_dining.is_empty()
        && sensors.iter().all(|s| locmap.kitchen_dining.contains(s))
    {
        return Some(Location::KitchenDining);
    }
    None
}

fn touches_any_location(activity: &IndoorActivity, locmap: &LocationMap) -> bool {
    activity
        .distinct_sensors()
        .iter()
        .any(|s| locmap.kitchen_dining.contains(s) || locmap.bedrooms.iter().any(|b| b.contains(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HourBin {
    pub crossing: usize,
    pub non_crossing: usize,
}

impl HourBin {
    pub fn total(&self) -> usize {
        self.crossing + self.non_crossing
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveBackEntry {
    pub date: String,
    pub depart: String,
    #[serde(rename = "return")]
    pub return_: String,
    pub sensor: SensorId,
    pub seconds: i64,
}

impl From<&LeaveBackActivity> for LeaveBackEntry {
    fn from(l: &LeaveBackActivity) -> Self {
        let return_ = if l.return_ts.date() == l.depart_ts.date() {
            l.return_ts.format("%H:%M:%S").to_string()
        } else {
            l.return_ts.format("%Y-%m-%d %H:%M:%S").to_string()
        };
        LeaveBackEntry {
            date: l.depart_ts.format("%Y-%m-%d").to_string(),
            depart: l.depart_ts.format("%H:%M:%S").to_string(),
            return_,
            sensor: l.sensor_id.clone(),
            seconds: l.absence_seconds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoutineHistogram {
    /// 24 bins per location, indexed by start hour.
    pub locations: BTreeMap<Location, Vec<HourBin>>,
    pub leaveback_entries: Vec<LeaveBackEntry>,
    pub total_activities: usize,
    /// Activities not contained in any single location.
    pub unattributed: usize,
    /// Unattributed activities that still touch a located sensor.
    pub partial_overlap: usize,
}

impl RoutineHistogram {
    pub fn bins(&self, location: Location) -> Option<&[HourBin]> {
        self.locations.get(&location).map(Vec::as_slice)
    }

    pub fn attributed(&self) -> usize {
        self.locations
            .values()
            .flat_map(|bins| bins.iter().map(HourBin::total))
            .sum()
    }

    /// `location,hour,crossing,non_crossing`, 24 rows per location.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("location,hour,crossing,non_crossing\n");
        for (loc, bins) in &self.locations {
            for (hour, b) in bins.iter().enumerate() {
                let _ = writeln!(s, "{loc},{hour},{},{}", b.crossing, b.non_crossing);
            }
        }
        s
    }

    /// `date,depart,return,sensor,seconds`.
    pub fn leavebacks_csv(&self) -> String {
        let mut s = String::from("date,depart,return,sensor,seconds\n");
        for e in &self.leaveback_entries {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                e.date, e.depart, e.return_, e.sensor, e.seconds
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Loc<'a> {
            location: String,
            bins: &'a [HourBin],
        }
        #[derive(Serialize)]
        struct Out<'a> {
            locations: Vec<Loc<'a>>,
            leavebacks: &'a [LeaveBackEntry],
            total_activities: usize,
            unattributed: usize,
            partial_overlap: usize,
        }
        serde_json::to_string_pretty(&Out {
            locations: self
                .locations
                .iter()
                .map(|(l, b)| Loc {
                    location: l.to_string(),
                    bins: b,
                })
                .collect(),
            leavebacks: &self.leaveback_entries,
            total_activities: self.total_activities,
            unattributed: self.unattributed,
            partial_overlap: self.partial_overlap,
        })
        .expect("serializable")
    }

    /// Gnuplot data: one indexed block per location, columns
    /// `hour crossing non_crossing total`.
    pub fn to_plot_data(&self) -> String {
        let mut s = String::new();
        for (i, (loc, bins)) in self.locations.iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            let _ = writeln!(s, "# {loc}");
            s.push_str("# hour crossing non_crossing total\n");
            for (hour, b) in bins.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{hour:02} {} {} {}",
                    b.crossing,
                    b.non_crossing,
                    b.total()
                );
            }
        }
        s
    }
}

pub fn hourly_histograms(
    activities: &[IndoorActivity],
    leavebacks: &[LeaveBackActivity],
    locmap: &LocationMap,
) -> RoutineHistogram {
    hourly_histograms_with(activities, leavebacks, locmap, ClassPolarity::default())
}

pub fn hourly_histograms_with(
    activities: &[IndoorActivity],
    leavebacks: &[LeaveBackActivity],
    locmap: &LocationMap,
    polarity: ClassPolarity,
) -> RoutineHistogram {
    let mut hist = RoutineHistogram::default();
    for i in 0..locmap.bedrooms.len() {
        hist.locations
            .insert(Location::Bedroom(i + 1), vec![HourBin::default(); 24]);
    }
    if !locmap.kitchen_dining.is_empty() {
        hist.locations
            .insert(Location::KitchenDining, vec![HourBin::default(); 24]);
    }
    hist.total_activities = activities.len();
    for a in activities {
        match attribute_to_location(a, locmap) {
            Some(loc) => {
                let bin = &mut hist.locations.get_mut(&loc).expect("bins exist")
                    [a.start_ts().hour() as usize];
                match classify_with(a, polarity) {
                    ActivityClass::Crossing => bin.crossing += 1,
                    ActivityClass::NonCrossing => bin.non_crossing += 1,
                }
            }
            None => {
                hist.unattributed += 1;
                if touches_any_location(a, locmap) {
                    hist.partial_overlap += 1;
                }
            }
        }
    }
    let mut lbs: Vec<&LeaveBackActivity> = leavebacks.iter().collect();
    lbs.sort_by(|a, b| (a.depart_ts, &a.sensor_id).cmp(&(b.depart_ts, &b.sensor_id)));
    hist.leaveback_entries = lbs.into_iter().map(LeaveBackEntry::from).collect();
    hist
}
