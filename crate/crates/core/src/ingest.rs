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

//! Parsing of CASAS-style sensor logs.
//!
//! A log line is `YYYY-MM-DD HH:MM:SS[.ffffff] <sensor> <state> [annotation...]`.
//! Only trigger transitions (by default `ON` and `OPEN`) are kept; everything
//! else is counted and dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, SensorId};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.3f";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorEvent {
    pub timestamp: NaiveDateTime,
    pub sensor_id: SensorId,
    pub raw_state: String,
}

impl SensorEvent {
    pub fn new(
        timestamp: NaiveDateTime,
        sensor_id: impl Into<SensorId>,
        raw_state: impl Into<String>,
    ) -> Self {
        SensorEvent {
            timestamp,
            sensor_id: sensor_id.into(),
            raw_state: raw_state.into(),
        }
    }
}

/// Writes the normalized single-line form (millisecond precision).
impl fmt::Display for SensorEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.timestamp.format(TIMESTAMP_FORMAT),
            self.sensor_id,
            self.raw_state
        )
    }
}

/// Formats a timestamp the way normalized logs and reports print it.
pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// A time-ordered stream of trigger events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SensorLog {
    events: Vec<SensorEvent>,
    source_name: String,
    day_span: usize,
}

impl SensorLog {
    /// Builds a log, stably sorting `events` by timestamp.
    pub fn new(source_name: impl Into<String>, mut events: Vec<SensorEvent>) -> Self {
        events.sort_by_key(|e| e.timestamp);
        let day_span = events
            .iter()
            .map(|e| e.timestamp.date())
            .collect::<BTreeSet<_>>()
            .len();
        SensorLog {
            events,
            source_name: source_name.into(),
            day_span,
        }
    }

    pub fn events(&self) -> &[SensorEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<SensorEvent> {
        self.events
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    /// Number of distinct calendar dates covered by the events.
    pub fn day_span(&self) -> usize {
        self.day_span
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Distinct dates in chronological order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.events
            .iter()
            .map(|e| e.timestamp.date())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// The sub-log covering the first `days` distinct dates.
    pub fn first_days(&self, days: usize) -> SensorLog {
        if days == 0 {
            return SensorLog::new(self.source_name.clone(), Vec::new());
        }
        let dates = self.dates();
        let Some(&last) = dates.get(days - 1) else {
            return self.clone();
        };
        let cut = self.events.partition_point(|e| e.timestamp.date() <= last);
        SensorLog::new(self.source_name.clone(), self.events[..cut].to_vec())
    }

    /// Writes the normalized four-field form, LF line endings.
    pub fn write_normalized<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }

    pub fn to_normalized_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_normalized(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("normalized log is UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub trigger_states: BTreeSet<String>,
    pub ignored_sensor_prefixes: BTreeSet<String>,
    pub tolerate_trailing_fields: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            trigger_states: ["ON", "OPEN"].iter().map(|s| s.to_string()).collect(),
            ignored_sensor_prefixes: ["T"].iter().map(|s| s.to_string()).collect(),
            tolerate_trailing_fields: true,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trigger_states.is_empty() {
            return Err(Error::InvalidParameter(
                "trigger_states must not be empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NonTriggerState,
    IgnoredSensor,
    /// Blank lines and `#` comments.
    AnnotationOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineOutcome {
    Event(SensorEvent),
    Skipped(SkipReason),
}

/// Parses one log line.
///
/// Malformed lines are reported with `line_no` 0; [`load_reader`] fills in
/// the real position.
pub fn parse_event_line(line: &str, config: &IngestConfig) -> Result<LineOutcome> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(LineOutcome::Skipped(SkipReason::AnnotationOnly));
    }
    let fields: Vec<&str> = line.split_whitespace().collect();
    let malformed = |reason: String| Error::MalformedLine { line_no: 0, reason };
    if fields.len() < 4 {
        return Err(malformed(format!(
            "expected 4 fields, found {}",
            fields.len()
        )));
    }
    if fields.len() > 4 && !config.tolerate_trailing_fields {
        return Err(malformed(format!(
            "unexpected trailing fields after state: {}",
            fields[4..].join(" ")
        )));
    }
    let timestamp = parse_timestamp(fields[0], fields[1]).map_err(malformed)?;
    let (sensor, state) = (fields[2], fields[3]);

    if config
        .ignored_sensor_prefixes
        .iter()
        .any(|p| !p.is_empty() && sensor.starts_with(p.as_str()))
    {
        return Ok(LineOutcome::Skipped(SkipReason::IgnoredSensor));
    }
    if !config.trigger_states.contains(state) {
        return Ok(LineOutcome::Skipped(SkipReason::NonTriggerState));
    }
    Ok(LineOutcome::Event(SensorEvent::new(
        timestamp, sensor, state,
    )))
}

fn parse_timestamp(date: &str, time: &str) -> std::result::Result<NaiveDateTime, String> {
    let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .map_err(|e| format!("bad date {date:?}: {e}"))?;
    let time = NaiveTime::parse_from_str(time, "%H:%M:%S%.f")
        .map_err(|e| format!("bad time {time:?}: {e}"))?;
    // millisecond resolution; leap-second nanos (>= 1e9) are clamped
    let millis = (time.nanosecond() / 1_000_000).min(999);
    let time = time
        .with_nanosecond(millis * 1_000_000)
        .expect("millisecond value is in range");
    Ok(date.and_time(time))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub total_lines: usize,
    pub kept: usize,
    pub skipped: usize,
    pub malformed: usize,
    pub skipped_by_reason: BTreeMap<SkipReason, usize>,
    /// 1-based line numbers of malformed lines.
    pub malformed_lines: Vec<usize>,
    pub per_sensor: BTreeMap<SensorId, usize>,
}

/// Parses every line of `reader`. Malformed lines are counted, not fatal.
pub fn load_reader<R: Read>(
    reader: R,
    source_name: &str,
    config: &IngestConfig,
) -> Result<(SensorLog, IngestStats)> {
    config.validate()?;
    let mut stats = IngestStats::default();
    let mut events = Vec::new();
    let mut reader = BufReader::new(reader);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(source_name, e))?;
        if n == 0 {
            break;
        }
        stats.total_lines += 1;
        let line = String::from_utf8_lossy(&buf);
        match parse_event_line(&line, config) {
            Ok(LineOutcome::Event(ev)) => {
                stats.kept += 1;
                *stats.per_sensor.entry(ev.sensor_id.clone()).or_default() += 1;
                events.push(ev);
            }
            Ok(LineOutcome::Skipped(reason)) => {
                stats.skipped += 1;
                *stats.skipped_by_reason.entry(reason).or_default() += 1;
            }
            Err(_) => {
                stats.malformed += 1;
                stats.malformed_lines.push(stats.total_lines);
            }
        }
    }
    Ok((SensorLog::new(source_name, events), stats))
}

pub fn load_log(path: impl AsRef<Path>, config: &IngestConfig) -> Result<(SensorLog, IngestStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_reader(file, &path.display().to_string(), config)
}

/// Like [`load_reader`] but fails on the first malformed line.
pub fn load_reader_strict<R: Read>(
    reader: R,
    source_name: &str,
    config: &IngestConfig,
) -> Result<(SensorLog, IngestStats)> {
    let mut text = String::new();
    BufReader::new(reader)
        .read_to_string(&mut text)
        .map_err(|e| Error::io(source_name, e))?;
    for (i, line) in text.lines().enumerate() {
        if let Err(Error::MalformedLine { reason, .. }) = parse_event_line(line, config) {
            return Err(Error::MalformedLine {
                line_no: i + 1,
                reason,
            });
        }
    }
    load_reader(text.as_bytes(), source_name, config)
}
