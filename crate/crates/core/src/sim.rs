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

//! Seeded synthetic-home simulator.
//!
//! A floorplan is a set of rooms, each holding a chain of sensors whose first
//! member sits at the doorway. Adjacent rooms are linked doorway to doorway.
//! Residents only ever move along these planted links, so the planted sensor
//! adjacency is an exact oracle for what the topology inference should find.
//!
//! Each resident gets an independent ChaCha stream derived from the run seed
//! and its index, so adding a resident never perturbs the others' traces.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{SensorEvent, SensorLog};
use crate::segment::ClockWindow;
use crate::topology::ordered_pair;
use crate::{Error, Result, SensorId};

const DAY: u64 = 86_400;
/// Chance that a lingering step moves to a neighbouring sensor in the room.
const LINGER_MOVE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomCategory {
    Bedroom,
    KitchenDining,
    Entrance,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub name: String,
    pub category: RoomCategory,
    /// Walking order through the room; the first sensor is by the doorway.
    pub sensors: Vec<SensorId>,
}

/// Where a stationary decoy device is mounted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyPlacement {
    pub id: SensorId,
    pub room: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloorplanSpec {
    pub start_date: NaiveDate,
    pub rooms: Vec<Room>,
    pub room_adjacency: Vec<(String, String)>,
    pub decoys: Vec<DecoyPlacement>,
}

fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 1).expect("valid date")
}

impl FloorplanSpec {
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        let mut sensors = BTreeSet::new();
        for room in &self.rooms {
            if !names.insert(room.name.as_str()) {
                return Err(Error::InvalidPlan(format!("duplicate room {}", room.name)));
            }
            if room.sensors.is_empty() {
                return Err(Error::InvalidPlan(format!(
                    "room {} has no sensors",
                    room.name
                )));
            }
            for s in &room.sensors {
                if s.is_empty() || s.contains(char::is_whitespace) {
                    return Err(Error::InvalidPlan(format!("bad sensor id {s:?}")));
                }
                if !sensors.insert(s.as_str()) {
                    return Err(Error::InvalidPlan(format!("duplicate sensor {s}")));
                }
            }
        }
        if self.rooms.is_empty() {
            return Err(Error::InvalidPlan("no rooms".into()));
        }
        for (a, b) in &self.room_adjacency {
            for r in [a, b] {
                if !names.contains(r.as_str()) {
                    return Err(Error::InvalidPlan(format!(
                        "door references unknown room {r}"
                    )));
                }
            }
        }
        for d in &self.decoys {
            if !names.contains(d.room.as_str()) {
                return Err(Error::InvalidPlan(format!(
                    "decoy {} in unknown room {}",
                    d.id, d.room
                )));
            }
            if sensors.contains(d.id.as_str()) {
                return Err(Error::InvalidPlan(format!(
                    "decoy id {} clashes with a sensor",
                    d.id
                )));
            }
        }
        // room graph connectivity
        let mut seen = BTreeSet::from([self.rooms[0].name.as_str()]);
        let mut queue = VecDeque::from([self.rooms[0].name.as_str()]);
        while let Some(r) = queue.pop_front() {
            for (a, b) in &self.room_adjacency {
                let next = if a == r {
                    b.as_str()
                } else if b == r {
                    a.as_str()
                } else {
                    continue;
                };
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        if seen.len() != self.rooms.len() {
            return Err(Error::DisconnectedFloorplan);
        }
        Ok(())
    }

    pub fn room(&self, name: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.name == name)
    }

    pub fn sensors(&self) -> BTreeSet<SensorId> {
        self.rooms
            .iter()
            .flat_map(|r| r.sensors.iter().cloned())
            .collect()
    }

    pub fn room_of(&self, sensor: &str) -> Option<&Room> {
        self.rooms
            .iter()
            .find(|r| r.sensors.iter().any(|s| s == sensor))
    }

    /// Unordered sensor pairs a resident can move between directly:
    /// consecutive sensors of a room chain, and doorway sensors of adjacent rooms.
    pub fn sensor_adjacency(&self) -> BTreeSet<(SensorId, SensorId)> {
        let mut out = BTreeSet::new();
        for room in &self.rooms {
            for w in room.sensors.windows(2) {
                out.insert(ordered_pair(&w[0], &w[1]));
            }
        }
        for (a, b) in &self.room_adjacency {
            if let (Some(ra), Some(rb)) = (self.room(a), self.room(b)) {
                if ra.sensors[0] != rb.sensors[0] {
                    out.insert(ordered_pair(&ra.sensors[0], &rb.sensors[0]));
                }
            }
        }
        out
    }

    /// Ground truth in the evaluation text format.
    pub fn ground_truth_text(&self) -> String {
        let mut s = String::from("# generated from a simulator floorplan\nsensors:");
        for id in self.sensors() {
            let _ = write!(s, " {id}");
        }
        s.push('\n');
        for (a, b) in self.sensor_adjacency() {
            let _ = writeln!(s, "adjacent: {a} {b}");
        }
        let mut bedroom = 0;
        for room in &self.rooms {
            let label = match room.category {
                RoomCategory::Bedroom => {
                    bedroom += 1;
                    format!("bedroom-{bedroom}")
                }
                RoomCategory::KitchenDining => "kitchen_dining".into(),
                RoomCategory::Entrance => "entrance".into(),
                RoomCategory::Other => "other".into(),
            };
            let _ = writeln!(s, "room: {label} {}", room.sensors.join(" "));
        }
        s
    }
}

fn default_wake() -> String {
    "07:00".into()
}
fn default_sleep() -> String {
    "22:30".into()
}
fn default_kitchen_window() -> String {
    "18:00-19:00".into()
}
fn default_night_window() -> String {
    "02:00-06:00".into()
}
fn default_night_stirs() -> f64 {
    1.5
}
fn default_wander_rate() -> f64 {
    3.0
}
fn default_leave_prob() -> f64 {
    0.5
}
fn default_min_absence() -> u64 {
    3600
}
fn default_extra_absence() -> u64 {
    7200
}
fn default_dwell_min() -> u64 {
    2
}
fn default_dwell_max() -> u64 {
    6
}
fn default_episode_min() -> u64 {
    45
}

/// Daily habits of one resident. Times are `HH:MM` local clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidentProfile {
    pub home_room: String,
    #[serde(default = "default_wake")]
    pub wake: String,
    #[serde(default = "default_sleep")]
    pub sleep: String,
    #[serde(default = "default_kitchen_window")]
    pub kitchen_window: String,
    /// When the resident may stir in bed.
    #[serde(default = "default_night_window")]
    pub night_window: String,
    /// Expected in-bedroom movement episodes per night.
    #[serde(default = "default_night_stirs")]
    pub night_stirs: f64,
    /// Daytime movement episodes per hour.
    #[serde(default = "default_wander_rate")]
    pub wander_rate: f64,
    /// Chance of leaving home on a given day.
    #[serde(default = "default_leave_prob")]
    pub leave_prob: f64,
    #[serde(default = "default_min_absence")]
    pub min_absence: u64,
    #[serde(default = "default_extra_absence")]
    pub max_extra_absence: u64,
    /// Seconds between consecutive triggers while moving.
    #[serde(default = "default_dwell_min")]
    pub dwell_min: u64,
    #[serde(default = "default_dwell_max")]
    pub dwell_max: u64,
    /// Minimum length of a movement episode, seconds.
    #[serde(default = "default_episode_min")]
    pub episode_min: u64,
    /// Ignores the bedroom-at-night and kitchen-at-dinner habits.
    #[serde(default)]
    pub contrarian: bool,
}

impl ResidentProfile {
    pub fn new(home_room: impl Into<String>) -> Self {
        ResidentProfile {
            home_room: home_room.into(),
            wake: default_wake(),
            sleep: default_sleep(),
            kitchen_window: default_kitchen_window(),
            night_window: default_night_window(),
            night_stirs: default_night_stirs(),
            wander_rate: default_wander_rate(),
            leave_prob: default_leave_prob(),
            min_absence: default_min_absence(),
            max_extra_absence: default_extra_absence(),
            dwell_min: default_dwell_min(),
            dwell_max: default_dwell_max(),
            episode_min: default_episode_min(),
            contrarian: false,
        }
    }
}

fn clock_seconds(t: NaiveTime) -> u64 {
    t.num_seconds_from_midnight() as u64
}

fn parse_clock(s: &str) -> Result<u64> {
    NaiveTime::parse_from_str(s, "%H:%M")
        .map(clock_seconds)
        .map_err(|_| Error::InvalidPlan(format!("expected HH:MM, got {s:?}")))
}

struct Habits {
    wake: u64,
    sleep: u64,
    kitchen: (u64, u64),
    night: (u64, u64),
}

impl ResidentProfile {
    fn habits(&self) -> Result<Habits> {
        let window = |s: &str| -> Result<(u64, u64)> {
            let w: ClockWindow = s
                .parse()
                .map_err(|e: Error| Error::InvalidPlan(e.to_string()))?;
            Ok((clock_seconds(w.start_clock), clock_seconds(w.end_clock)))
        };
        let h = Habits {
            wake: parse_clock(&self.wake)?,
            sleep: parse_clock(&self.sleep)?,
            kitchen: window(&self.kitchen_window)?,
            night: window(&self.night_window)?,
        };
        let bad = |m: &str| Err(Error::InvalidPlan(m.to_string()));
        if h.sleep <= h.wake {
            return bad("sleep must come after wake");
        }
        if self.night_stirs < 0.0
            || self.wander_rate <= 0.0
            || !(0.0..=1.0).contains(&self.leave_prob)
        {
            return bad("rates must be non-negative and leave_prob a probability");
        }
        if self.dwell_min == 0 || self.dwell_min > self.dwell_max {
            return bad("need 0 < dwell_min <= dwell_max");
        }
        if self.min_absence == 0 {
            return bad("min_absence must be positive");
        }
        Ok(h)
    }
}

/// Floorplan plus residents, as read from one TOML file.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub plan: FloorplanSpec,
    pub residents: Vec<ResidentProfile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    start_date: Option<NaiveDate>,
    #[serde(default)]
    doors: Vec<[String; 2]>,
    #[serde(default)]
    room: Vec<Room>,
    #[serde(default)]
    decoy: Vec<DecoyPlacement>,
    #[serde(default)]
    resident: Vec<ResidentProfile>,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SimFile = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|sp| text[..sp.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().trim().replace('\n', " ");
            Error::InvalidPlan(match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            })
        })?;
        let plan = FloorplanSpec {
            start_date: file.start_date.unwrap_or_else(default_start_date),
            rooms: file.room,
            room_adjacency: file.doors.into_iter().map(|[a, b]| (a, b)).collect(),
            decoys: file.decoy,
        };
        plan.validate()?;
        for r in &file.resident {
            if plan.room(&r.home_room).is_none() {
                return Err(Error::InvalidPlan(format!(
                    "unknown home room {}",
                    r.home_room
                )));
            }
            r.habits()?;
        }
        Ok(SimConfig {
            plan,
            residents: file.resident,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Five rooms, one resident.
    pub fn demo() -> Self {
        Self::from_toml_str(include_str!("../data/demo_home.toml")).expect("bundled plan is valid")
    }

    /// Six rooms, two residents with separate bedrooms.
    pub fn two_bedroom() -> Self {
        Self::from_toml_str(include_str!("../data/two_bedroom_home.toml"))
            .expect("bundled plan is valid")
    }
}

/// Sensor graph with precomputed shortest-path next hops.
struct SensorGraph {
    ids: Vec<SensorId>,
    neighbors: Vec<Vec<usize>>,
    /// `next_hop[from][to]`
    next_hop: Vec<Vec<usize>>,
}

impl SensorGraph {
    fn new(plan: &FloorplanSpec) -> Self {
        let ids: Vec<SensorId> = plan.sensors().into_iter().collect();
        let index: BTreeMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut neighbors = vec![Vec::new(); ids.len()];
        for (a, b) in plan.sensor_adjacency() {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        // BFS from every target; next_hop[u][t] = parent of u toward t
        let n = ids.len();
        let mut next_hop = vec![vec![usize::MAX; n]; n];
        #[allow(clippy::needless_range_loop)]
        for t in 0..n {
            next_hop[t][t] = t;
            let mut queue = VecDeque::from([t]);
            while let Some(u) = queue.pop_front() {
                for &v in &neighbors[u] {
                    if next_hop[v][t] == usize::MAX {
                        next_hop[v][t] = u;
                        queue.push_back(v);
                    }
                }
            }
        }
        SensorGraph {
            ids,
            neighbors,
            next_hop,
        }
    }

    fn index(&self, id: &str) -> usize {
        self.ids
            .iter()
            .position(|s| s == id)
            .expect("sensor in plan")
    }

    /// Sensors visited after `from` on a shortest path to `to`.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = from;
        while cur != to {
            cur = self.next_hop[cur][to];
            out.push(cur);
        }
        out
    }

    /// A closed walk visiting every sensor, consecutive entries adjacent.
    fn tour(&self) -> Vec<usize> {
        fn dfs(g: &SensorGraph, u: usize, seen: &mut [bool], out: &mut Vec<usize>) {
            seen[u] = true;
            out.push(u);
            for &v in &g.neighbors[u] {
                if !seen[v] {
                    dfs(g, v, seen, out);
                    out.push(u);
                }
            }
        }
        let mut out = Vec::new();
        if !self.ids.is_empty() {
            dfs(self, 0, &mut vec![false; self.ids.len()], &mut out);
        }
        if out.len() > 1 {
            out.pop(); // the walk ends where it started
        }
        out
    }
}

struct RoomIndex {
    sensors: Vec<usize>,
}

struct Walker<'a> {
    graph: &'a SensorGraph,
    rooms: &'a [RoomIndex],
    room_of: &'a [usize],
    profile: &'a ResidentProfile,
    rng: ChaCha8Rng,
    now: u64,
    last_fire: Option<u64>,
    at: usize,
    out: Vec<(u64, usize)>,
}

impl Walker<'_> {
    fn fire(&mut self, sensor: usize) {
        if let Some(last) = self.last_fire {
            if self.now <= last {
                self.now = last + 1;
            }
        }
        self.out.push((self.now, sensor));
        self.last_fire = Some(self.now);
        self.at = sensor;
    }

    fn dwell(&mut self) -> u64 {
        self.rng
            .gen_range(self.profile.dwell_min..=self.profile.dwell_max)
    }

    fn walk(&mut self, target: usize) {
        for s in self.graph.path(self.at, target) {
            self.now += self.dwell();
            self.fire(s);
        }
    }

    /// Random steps inside the current room until the episode is long enough.
    fn linger(&mut self, episode_start: u64) {
        let goal = self.profile.episode_min + self.rng.gen_range(0..=self.profile.episode_min);
        while self.now - episode_start < goal {
            self.now += self.dwell();
            let room = &self.rooms[self.room_of[self.at]];
            let local: Vec<usize> = self.graph.neighbors[self.at]
                .iter()
                .copied()
                .filter(|n| room.sensors.contains(n))
                .collect();
            let next = if local.is_empty() || !self.rng.gen_bool(LINGER_MOVE) {
                self.at
            } else {
                local[self.rng.gen_range(0..local.len())]
            };
            self.fire(next);
        }
    }

    /// Walks to a random sensor of `room` and moves around there.
    fn episode_in(&mut self, room: usize) {
        let start = self.now;
        self.fire(self.at);
        let sensors = &self.rooms[room].sensors;
        let target = sensors[self.rng.gen_range(0..sensors.len())];
        self.walk(target);
        self.linger(start);
    }

    fn idle(&mut self, lo: u64, hi: u64) {
        self.now += self.rng.gen_range(lo..=hi.max(lo));
    }
}

fn simulate_resident(
    plan: &FloorplanSpec,
    graph: &SensorGraph,
    profile: &ResidentProfile,
    days: u32,
    seed: u64,
    stream: u64,
) -> Result<Vec<(u64, usize)>> {
    let habits = profile.habits()?;
    let rooms: Vec<RoomIndex> = plan
        .rooms
        .iter()
        .map(|r| RoomIndex {
            sensors: r.sensors.iter().map(|s| graph.index(s)).collect(),
        })
        .collect();
    let mut room_of = vec![0; graph.ids.len()];
    for (ri, r) in rooms.iter().enumerate() {
        for &s in &r.sensors {
            room_of[s] = ri;
        }
    }
    let home = plan
        .rooms
        .iter()
        .position(|r| r.name == profile.home_room)
        .ok_or_else(|| Error::InvalidPlan(format!("unknown home room {}", profile.home_room)))?;
    let bed = *rooms[home].sensors.last().expect("rooms are non-empty");
    let kitchens: Vec<usize> = idx_of(plan, RoomCategory::KitchenDining);
    let entrances: Vec<usize> = idx_of(plan, RoomCategory::Entrance);
    let wander_rooms: Vec<usize> = (0..rooms.len())
        .filter(|&r| plan.rooms[r].category != RoomCategory::Entrance)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut w = Walker {
        graph,
        rooms: &rooms,
        room_of: &room_of,
        profile,
        rng,
        now: 0,
        last_fire: None,
        at: bed,
        out: Vec::new(),
    };
    let mean_idle = (3600.0 / profile.wander_rate) as u64;
    let jitter = 1800;

    for d in 0..days as u64 {
        let base = d * DAY;

        let stirs = profile.night_stirs.floor() as usize
            + usize::from(w.rng.gen_bool(profile.night_stirs.fract()));
        let mut times: Vec<u64> = (0..stirs)
            .map(|_| base + w.rng.gen_range(habits.night.0..habits.night.1))
            .collect();
        times.sort_unstable();
        for t in times {
            if t <= w.now {
                continue;
            }
            w.now = t;
            let room = if profile.contrarian {
                wander_rooms[w.rng.gen_range(0..wander_rooms.len())]
            } else {
                home
            };
            w.episode_in(room);
        }

        let wake = base + (habits.wake + w.rng.gen_range(0..=2 * jitter)).saturating_sub(jitter);
        w.now = w.now.max(wake);
        w.idle(20, 20);
        let sleep = base + habits.sleep + w.rng.gen_range(0..=2 * jitter) - jitter;
        let mut leave_at = w
            .rng
            .gen_bool(profile.leave_prob)
            .then(|| base + w.rng.gen_range(9 * 3600..16 * 3600));
        let (k_start, k_end) = (base + habits.kitchen.0, base + habits.kitchen.1);

        while w.now < sleep {
            let in_kitchen_window = w.now >= k_start && w.now < k_end;
            if in_kitchen_window && !profile.contrarian && !kitchens.is_empty() {
                let k = kitchens[w.rng.gen_range(0..kitchens.len())];
                w.episode_in(k);
                w.idle(20, 240);
                continue;
            }
            if leave_at.is_some_and(|t| w.now >= t) && !entrances.is_empty() {
                leave_at = None;
                let e = entrances[w.rng.gen_range(0..entrances.len())];
                let door = rooms[e].sensors[0];
                w.fire(w.at);
                w.walk(door);
                w.now += profile.min_absence + w.rng.gen_range(0..=profile.max_extra_absence);
                w.fire(door);
                let room = wander_rooms[w.rng.gen_range(0..wander_rooms.len())];
                let start = w.now;
                let sensors = &rooms[room].sensors;
                let target = sensors[w.rng.gen_range(0..sensors.len())];
                w.walk(target);
                w.linger(start);
            } else {
                let room = wander_rooms[w.rng.gen_range(0..wander_rooms.len())];
                w.episode_in(room);
            }
            let gap = w.rng.gen_range(20..=2 * mean_idle);
            if !profile.contrarian && w.now < k_start && w.now + gap >= k_start {
                w.now = k_start + w.rng.gen_range(0..120);
            } else {
                w.now += gap;
            }
        }

        // bedtime
        let start = w.now;
        w.fire(w.at);
        w.walk(bed);
        w.linger(start);
        w.idle(20, 20);
    }
    let horizon = days as u64 * DAY;
    w.out.retain(|&(t, _)| t < horizon);
    Ok(w.out)
}

fn idx_of(plan: &FloorplanSpec, cat: RoomCategory) -> Vec<usize> {
    plan.rooms
        .iter()
        .enumerate()
        .filter(|(_, r)| r.category == cat)
        .map(|(i, _)| i)
        .collect()
}

fn epoch(plan: &FloorplanSpec) -> NaiveDateTime {
    plan.start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
}

/// Simulates `days` days. Deterministic in `(plan, residents, days, seed)`.
pub fn simulate(
    plan: &FloorplanSpec,
    residents: &[ResidentProfile],
    days: u32,
    seed: u64,
) -> Result<SensorLog> {
    plan.validate()?;
    if days == 0 {
        return Err(Error::InvalidParameter("days must be at least 1".into()));
    }
    let graph = SensorGraph::new(plan);
    let mut merged: Vec<(u64, usize, usize)> = Vec::new();
    for (i, r) in residents.iter().enumerate() {
        let trace = simulate_resident(plan, &graph, r, days, seed, i as u64)?;
        merged.extend(trace.into_iter().map(|(t, s)| (t, i, s)));
    }
    merged.sort_by_key(|&(t, i, _)| (t, i));
    let t0 = epoch(plan);
    let events = merged
        .into_iter()
        .map(|(t, _, s)| {
            SensorEvent::new(t0 + Duration::seconds(t as i64), graph.ids[s].clone(), "ON")
        })
        .collect();
    Ok(SensorLog::new(format!("simulated:seed={seed}"), events))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoyMode {
    /// One fixed device firing every period.
    Stationary,
    /// A robot walking the home, triggering real sensors on its way.
    Roaming,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyConfig {
    pub decoy_sensor_id: SensorId,
    /// Seconds between activations.
    pub period: u64,
    pub mode: DecoyMode,
}

/// Sensors the roaming robot triggers per activation, 4 s apart.
const ROAM_STEPS: usize = 12;
const ROAM_DWELL: i64 = 4;

/// Merges periodic decoy triggers into `log`.
///
/// Decoy activity covers whole days, from midnight of the log's first date
/// to midnight after its last; an empty log gets one day from the plan's
/// start date.
pub fn inject_decoy(
    log: &SensorLog,
    decoy: &DecoyConfig,
    plan: &FloorplanSpec,
) -> Result<SensorLog> {
    if decoy.period == 0 {
        return Err(Error::InvalidParameter(
            "decoy period must be positive".into(),
        ));
    }
    let (start, end) = match (log.events().first(), log.events().last()) {
        (Some(first), Some(last)) => (
            first
                .timestamp
                .date()
                .and_hms_opt(0, 0, 0)
                .expect("midnight"),
            last.timestamp
                .date()
                .and_hms_opt(0, 0, 0)
                .expect("midnight")
                + Duration::days(1),
        ),
        _ => (epoch(plan), epoch(plan) + Duration::days(1)),
    };
    let mut events = log.events().to_vec();
    let period = Duration::seconds(decoy.period as i64);
    match decoy.mode {
        DecoyMode::Stationary => {
            let placed = plan.decoys.iter().any(|d| d.id == decoy.decoy_sensor_id)
                || plan.sensors().contains(&decoy.decoy_sensor_id);
            if !placed {
                return Err(Error::InvalidPlan(format!(
                    "decoy {} is not placed in the floorplan",
                    decoy.decoy_sensor_id
                )));
            }
            let mut t = start;
            while t < end {
                events.push(SensorEvent::new(t, decoy.decoy_sensor_id.clone(), "ON"));
                t += period;
            }
        }
        DecoyMode::Roaming => {
            plan.validate()?;
            let graph = SensorGraph::new(plan);
            let tour = graph.tour();
            let mut pos = 0;
            let mut t = start;
            while t < end {
                for k in 0..ROAM_STEPS {
                    let at = t + Duration::seconds(ROAM_DWELL * k as i64);
                    if at >= end {
                        break;
                    }
                    events.push(SensorEvent::new(at, graph.ids[tour[pos]].clone(), "ON"));
                    pos = (pos + 1) % tour.len();
                }
                t += period;
            }
        }
    }
    Ok(SensorLog::new(log.source_name().to_string(), events))
}
