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

//! Gap-based segmentation of a sensor log into indoor activities and
//! leave-back (absence) episodes.
//!
//! An indoor activity is a maximal run of triggers in which consecutive
//! triggers are at most `y` seconds apart and the run spans at least `x`
//! seconds. A leave-back is a single sensor firing twice at least `z`
//! seconds apart with nothing else firing in between.

use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::ingest::{format_timestamp, SensorEvent, SensorLog};
use crate::{Error, Result, SensorId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationParams {
    /// Minimum activity span, seconds.
    pub x_min_duration: u64,
    /// Maximum gap between consecutive triggers inside one activity, seconds.
    pub y_max_gap: u64,
    /// Minimum absence for a leave-back, seconds.
    pub z_min_absence: u64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            x_min_duration: 40,
            y_max_gap: 10,
            z_min_absence: 3600,
        }
    }
}

impl SegmentationParams {
    pub fn new(x_min_duration: u64, y_max_gap: u64, z_min_absence: u64) -> Result<Self> {
        let p = SegmentationParams {
            x_min_duration,
            y_max_gap,
            z_min_absence,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.y_max_gap == 0 || self.x_min_duration <= self.y_max_gap {
            return Err(Error::InvalidParameter(format!(
                "need x > y > 0, got x={} y={}",
                self.x_min_duration, self.y_max_gap
            )));
        }
        if self.z_min_absence == 0 {
            return Err(Error::InvalidParameter("z must be positive".into()));
        }
        Ok(())
    }

    fn min_duration_ms(&self) -> i64 {
        self.x_min_duration as i64 * 1000
    }

    fn max_gap_ms(&self) -> i64 {
        self.y_max_gap as i64 * 1000
    }

    fn min_absence_ms(&self) -> i64 {
        self.z_min_absence as i64 * 1000
    }
}

fn millis_between(a: &NaiveDateTime, b: &NaiveDateTime) -> i64 {
    (*b - *a).num_milliseconds()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndoorActivity {
    events: Vec<SensorEvent>,
    distinct_sensors: Vec<SensorId>,
}

impl IndoorActivity {
    /// Wraps an already time-ordered, non-empty run of events.
    ///
    /// # Panics
    /// If `events` is empty.
    pub fn from_events(events: Vec<SensorEvent>) -> Self {
        assert!(!events.is_empty(), "an activity needs at least one event");
        let mut distinct_sensors: Vec<SensorId> = Vec::new();
        for e in &events {
            if !distinct_sensors.contains(&e.sensor_id) {
                distinct_sensors.push(e.sensor_id.clone());
            }
        }
        IndoorActivity {
            events,
            distinct_sensors,
        }
    }

    pub fn events(&self) -> &[SensorEvent] {
        &self.events
    }

    pub fn start_ts(&self) -> NaiveDateTime {
        self.events[0].timestamp
    }

    pub fn end_ts(&self) -> NaiveDateTime {
        self.events[self.events.len() - 1].timestamp
    }

    pub fn duration_ms(&self) -> i64 {
        millis_between(&self.start_ts(), &self.end_ts())
    }

    /// Distinct sensors in order of first occurrence.
    pub fn distinct_sensors(&self) -> &[SensorId] {
        &self.distinct_sensors
    }

    pub fn sensor_ids(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.sensor_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveBackActivity {
    pub sensor_id: SensorId,
    pub depart_ts: NaiveDateTime,
    pub return_ts: NaiveDateTime,
}

impl LeaveBackActivity {
    pub fn absence_seconds(&self) -> i64 {
        (self.return_ts - self.depart_ts).num_seconds()
    }
}

/// Greedy maximal runs with gaps `<= y`, kept when they span `>= x`.
pub fn segment_indoor(log: &SensorLog, params: &SegmentationParams) -> Vec<IndoorActivity> {
    segment_events(log.events(), params)
}

pub fn segment_events(events: &[SensorEvent], params: &SegmentationParams) -> Vec<IndoorActivity> {
    let max_gap = params.max_gap_ms();
    let min_duration = params.min_duration_ms();
    let mut out = Vec::new();
    let mut run_start = 0;
    for i in 1..=events.len() {
        let breaks = i == events.len()
            || millis_between(&events[i - 1].timestamp, &events[i].timestamp) > max_gap;
        if breaks {
            let span = millis_between(&events[run_start].timestamp, &events[i - 1].timestamp);
            if span >= min_duration {
                out.push(IndoorActivity::from_events(events[run_start..i].to_vec()));
            }
            run_start = i;
        }
    }
    out
}

/// Log-adjacent same-sensor pairs at least `z` apart.
pub fn detect_leaveback(log: &SensorLog, params: &SegmentationParams) -> Vec<LeaveBackActivity> {
    let min_absence = params.min_absence_ms();
    log.events()
        .windows(2)
        .filter(|w| {
            w[0].sensor_id == w[1].sensor_id
                && millis_between(&w[0].timestamp, &w[1].timestamp) >= min_absence
        })
        .map(|w| LeaveBackActivity {
            sensor_id: w[0].sensor_id.clone(),
            depart_ts: w[0].timestamp,
            return_ts: w[1].timestamp,
        })
        .collect()
}

/// The activity's de-duplicated sensors in first-occurrence order.
pub fn sensor_id_list(activity: &IndoorActivity) -> Vec<SensorId> {
    activity.distinct_sensors().to_vec()
}

/// A half-open, non-wrapping time-of-day window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockWindow {
    pub start_clock: NaiveTime,
    pub end_clock: NaiveTime,
}

impl ClockWindow {
    pub fn new(start_clock: NaiveTime, end_clock: NaiveTime) -> Result<Self> {
        if start_clock >= end_clock {
            return Err(Error::InvalidParameter(format!(
                "clock window {}-{} is empty or wraps midnight",
                start_clock.format("%H:%M"),
                end_clock.format("%H:%M")
            )));
        }
        Ok(ClockWindow {
            start_clock,
            end_clock,
        })
    }

    pub fn hm(start: (u32, u32), end: (u32, u32)) -> Result<Self> {
        let t = |(h, m): (u32, u32)| {
            NaiveTime::from_hms_opt(h, m, 0)
                .ok_or_else(|| Error::InvalidParameter(format!("invalid time {h:02}:{m:02}")))
        };
        ClockWindow::new(t(start)?, t(end)?)
    }

    pub fn bedroom_default() -> Self {
        ClockWindow::hm((2, 0), (6, 0)).expect("valid window")
    }

    pub fn kitchen_default() -> Self {
        ClockWindow::hm((18, 0), (19, 0)).expect("valid window")
    }

    pub fn contains(&self, time: NaiveTime) -> bool {
        self.start_clock <= time && time < self.end_clock
    }
}

impl fmt::Display for ClockWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}",
            self.start_clock.format("%H:%M"),
            self.end_clock.format("%H:%M")
        )
    }
}

impl FromStr for ClockWindow {
    type Err = Error;

    /// Parses `HH:MM-HH:MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected HH:MM-HH:MM, got {s:?}"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let a = NaiveTime::parse_from_str(a.trim(), "%H:%M").map_err(|_| bad())?;
        let b = NaiveTime::parse_from_str(b.trim(), "%H:%M").map_err(|_| bad())?;
        ClockWindow::new(a, b)
    }
}

/// Activities whose start time-of-day falls inside `window`, on any day.
pub fn filter_by_clock(activities: &[IndoorActivity], window: &ClockWindow) -> Vec<IndoorActivity> {
    activities
        .iter()
        .filter(|a| window.contains(a.start_ts().time()))
        .cloned()
        .collect()
}

/// JSON row for an activity dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub start: String,
    pub end: String,
    pub sensors: Vec<SensorId>,
    pub event_count: usize,
}

impl From<&IndoorActivity> for ActivityRecord {
    fn from(a: &IndoorActivity) -> Self {
        ActivityRecord {
            start: format_timestamp(&a.start_ts()),
            end: format_timestamp(&a.end_ts()),
            sensors: a.distinct_sensors().to_vec(),
            event_count: a.events().len(),
        }
    }
}

/// JSON row for a leave-back dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveBackRecord {
    pub sensor: SensorId,
    pub depart: String,
    #[serde(rename = "return")]
    pub return_: String,
    pub seconds: i64,
}

impl From<&LeaveBackActivity> for LeaveBackRecord {
    fn from(l: &LeaveBackActivity) -> Self {
        LeaveBackRecord {
            sensor: l.sensor_id.clone(),
            depart: format_timestamp(&l.depart_ts),
            return_: format_timestamp(&l.return_ts),
            seconds: l.absence_seconds(),
        }
    }
}

pub fn activities_json(activities: &[IndoorActivity]) -> String {
    let rows: Vec<ActivityRecord> = activities.iter().map(ActivityRecord::from).collect();
    serde_json::to_string_pretty(&rows).expect("serializable")
}

pub fn leavebacks_json(leavebacks: &[LeaveBackActivity]) -> String {
    let rows: Vec<LeaveBackRecord> = leavebacks.iter().map(LeaveBackRecord::from).collect();
    serde_json::to_string_pretty(&rows).expect("serializable")
}
