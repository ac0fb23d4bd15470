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

//! `pds`: batch front end for the inference pipeline.
//!
//! Exit status: 0 success, 1 usage error, 2 input or parse failure,
//! 3 nothing to analyse (no indoor activities).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pds::eval::{location_scores, relationship_accuracy, scores_json, GroundTruthLayout};
use pds::ingest::{load_log, load_reader, load_reader_strict, IngestConfig, IngestStats};
use pds::locate::{location_map_json, run_full_deduction, DeductionConfig};
use pds::pipeline::{run, PipelineConfig};
use pds::routine::hourly_histograms;
use pds::segment::{
    activities_json, detect_leaveback, leavebacks_json, segment_indoor, ActivityRecord,
};
use pds::sim::{inject_decoy, simulate, DecoyConfig, DecoyMode, SimConfig};
use pds::topology::{apply_rules, build_confidence_graph, groups_over_days};
use pds::{ClockWindow, Error, SegmentationParams, SensorLog};

#[derive(Parser)]
#[command(
    name = "pds",
    version,
    about = "Infer layout and routines from smart-home sensor logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a log and print it in normalized form (or its stats as JSON).
    Ingest(Common),
    /// Print indoor activities (or leave-backs with --leavebacks).
    Segment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        leavebacks: bool,
    },
    /// Print the inferred sensor topology.
    Topology(Common),
    /// Print the sensor group count after each day.
    Groups(Common),
    /// Print deduced bedroom, kitchen/dining and entrance sensors.
    Locate(Common),
    /// Print hourly activity histograms per deduced location.
    Routine {
        #[command(flatten)]
        common: Common,
        /// Gnuplot-ready blocks instead of CSV/JSON.
        #[arg(long)]
        plot_data: bool,
        /// Print the leave-back table instead.
        #[arg(long)]
        leavebacks: bool,
    },
    /// Score topology and locations against a ground-truth layout.
    Eval(Common),
    /// Generate a synthetic log from a floorplan.
    Simulate {
        /// Floorplan and residents (TOML); defaults to the bundled demo home.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 14)]
        days: u32,
        #[arg(long)]
        seed: u64,
        /// Inject a decoy firing every N seconds.
        #[arg(long)]
        decoy_period: Option<u64>,
        #[arg(long, value_enum, default_value_t = DecoyArg::Stationary)]
        decoy_mode: DecoyArg,
        /// Decoy sensor id; defaults to the first decoy listed in the plan.
        #[arg(long)]
        decoy_id: Option<String>,
        /// Also write the planted layout in ground-truth format.
        #[arg(long)]
        truth_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline and write every artifact into --out.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot_data: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoyArg {
    Stationary,
    Roaming,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Args)]
struct Common {
    /// Log file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    input: String,
    /// Ground-truth layout file.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Minimum activity duration, seconds.
    #[arg(long, default_value_t = 40)]
    x: u64,
    /// Maximum gap inside an activity, seconds.
    #[arg(long, default_value_t = 10)]
    y: u64,
    /// Minimum leave-back absence, seconds.
    #[arg(long, default_value_t = 3600)]
    z: u64,
    #[arg(long, default_value_t = 0.5)]
    min_support: f64,
    #[arg(long, default_value = "02:00-06:00")]
    bedroom_window: ClockWindow,
    #[arg(long, default_value = "18:00-19:00")]
    kitchen_window: ClockWindow,
    /// Output file (a directory for `report`); standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Only use the first N days of the log.
    #[arg(long)]
    days: Option<usize>,
    /// Reject the whole log on the first malformed line.
    #[arg(long)]
    strict: bool,
}

enum Failure {
    Usage(String),
    Input(String),
    Empty(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            Error::EmptyGraph | Error::EmptyTransactions => Failure::Empty(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

impl Common {
    fn segmentation(&self) -> Result<SegmentationParams, Failure> {
        Ok(SegmentationParams::new(self.x, self.y, self.z)?)
    }

    fn deduction(&self) -> Result<DeductionConfig, Failure> {
        let cfg = DeductionConfig {
            bedroom_window: self.bedroom_window,
            kitchen_window: self.kitchen_window,
            min_support: self.min_support,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn pipeline(&self) -> Result<PipelineConfig, Failure> {
        Ok(PipelineConfig {
            segmentation: self.segmentation()?,
            deduction: self.deduction()?,
            ..PipelineConfig::default()
        })
    }

    fn format(&self, allowed: &[Format], default: Format) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::Usage(
                "--format not supported by this command".into(),
            ))
        }
    }

    fn load(&self) -> Result<(SensorLog, IngestStats), Failure> {
        let cfg = IngestConfig::default();
        let (log, stats) = if self.input == "-" {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Input(format!("reading standard input: {e}")))?;
            if self.strict {
                load_reader_strict(buf.as_slice(), "stdin", &cfg)?
            } else {
                load_reader(buf.as_slice(), "stdin", &cfg)?
            }
        } else if self.strict {
            let file = fs::File::open(&self.input)
                .map_err(|e| Failure::Input(format!("{}: {e}", self.input)))?;
            load_reader_strict(file, &self.input, &cfg)?
        } else {
            load_log(&self.input, &cfg)?
        };
        let log = match self.days {
            Some(d) => log.first_days(d),
            None => log,
        };
        Ok((log, stats))
    }

    fn truth(&self) -> Result<Option<GroundTruthLayout>, Failure> {
        match &self.truth {
            Some(p) => Ok(Some(GroundTruthLayout::load(p)?)),
            None => Ok(None),
        }
    }

    fn emit(&self, body: &str) -> CmdResult {
        emit(self.out.as_deref(), body)
    }
}

fn emit(out: Option<&Path>, body: &str) -> CmdResult {
    match out {
        Some(path) => {
            fs::write(path, body).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| {
                    if body.ends_with('\n') {
                        Ok(())
                    } else {
                        stdout.write_all(b"\n")
                    }
                })
                .or_else(|e| match e.kind() {
                    io::ErrorKind::BrokenPipe => Ok(()),
                    _ => Err(Failure::Input(format!("writing standard output: {e}"))),
                })
        }
    }
}

fn activities_csv(log: &SensorLog, p: &SegmentationParams) -> String {
    let mut s = String::from("start,end,event_count,sensors\n");
    for a in segment_indoor(log, p) {
        let r = ActivityRecord::from(&a);
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.start,
            r.end,
            r.event_count,
            r.sensors.join(" ")
        ));
    }
    s
}

fn require_activities(log: &SensorLog, p: &SegmentationParams) -> CmdResult {
    if segment_indoor(log, p).is_empty() {
        return Err(Failure::Empty("no indoor activities in the log".into()));
    }
    Ok(())
}

fn execute(cmd: Command) -> CmdResult {
    match cmd {
        Command::Ingest(c) => {
            let fmt = c.format.unwrap_or(Format::Csv);
            let (log, stats) = c.load()?;
            match fmt {
                Format::Json => {
                    c.emit(&serde_json::to_string_pretty(&stats).expect("serializable"))
                }
                Format::Csv => c.emit(&log.to_normalized_string()),
                Format::Dot => Err(Failure::Usage("--format dot is only for topology".into())),
            }
        }
        Command::Segment {
            common: c,
            leavebacks,
        } => {
            let p = c.segmentation()?;
            let fmt = c.format(&[Format::Json, Format::Csv], Format::Json)?;
            let (log, _) = c.load()?;
            if leavebacks {
                let l = detect_leaveback(&log, &p);
                return match fmt {
                    Format::Json => c.emit(&leavebacks_json(&l)),
                    _ => c.emit(&hourly_histograms(&[], &l, &Default::default()).leavebacks_csv()),
                };
            }
            match fmt {
                Format::Json => c.emit(&activities_json(&segment_indoor(&log, &p))),
                _ => c.emit(&activities_csv(&log, &p)),
            }
        }
        Command::Topology(c) => {
            let p = c.segmentation()?;
            let fmt = c.format(&[Format::Dot, Format::Json], Format::Dot)?;
            let (log, _) = c.load()?;
            require_activities(&log, &p)?;
            let topo = apply_rules(&build_confidence_graph(&segment_indoor(&log, &p)))?;
            c.emit(&match fmt {
                Format::Dot => topo.to_dot(),
                _ => topo.to_json(),
            })
        }
        Command::Groups(c) => {
            let p = c.segmentation()?;
            let fmt = c.format(&[Format::Csv, Format::Json], Format::Csv)?;
            let (log, _) = c.load()?;
            let series = groups_over_days(&log, &p);
            c.emit(&match fmt {
                Format::Csv => series.to_csv(),
                _ => serde_json::to_string_pretty(&series.entries).expect("serializable"),
            })
        }
        Command::Locate(c) => {
            let (p, cfg) = (c.segmentation()?, c.deduction()?);
            c.format(&[Format::Json], Format::Json)?;
            let (log, _) = c.load()?;
            require_activities(&log, &p)?;
            let d = run_full_deduction(&log, &p, &cfg)?;
            c.emit(&location_map_json(&d.map, &d.report))
        }
        Command::Routine {
            common: c,
            plot_data,
            leavebacks,
        } => {
            let cfg = c.pipeline()?;
            let fmt = c.format(&[Format::Csv, Format::Json], Format::Csv)?;
            let (log, _) = c.load()?;
            require_activities(&log, &cfg.segmentation)?;
            let d = run_full_deduction(&log, &cfg.segmentation, &cfg.deduction)?;
            let hist = hourly_histograms(&d.activities, &d.leavebacks, &d.map);
            c.emit(&if plot_data {
                hist.to_plot_data()
            } else if leavebacks {
                hist.leavebacks_csv()
            } else if fmt == Format::Json {
                hist.to_json()
            } else {
                hist.to_csv()
            })
        }
        Command::Eval(c) => {
            let (p, cfg) = (c.segmentation()?, c.deduction()?);
            let fmt = c.format(&[Format::Json, Format::Csv], Format::Json)?;
            let truth = c
                .truth()?
                .ok_or_else(|| Failure::Usage("eval needs --truth".into()))?;
            let (log, _) = c.load()?;
            require_activities(&log, &p)?;
            let d = run_full_deduction(&log, &p, &cfg)?;
            let rel = relationship_accuracy(&d.topology, &truth)?;
            c.emit(&match fmt {
                Format::Csv => rel.matrix_csv(),
                _ => scores_json(Some(&rel), &location_scores(&d.map, &truth)),
            })
        }
        Command::Simulate {
            plan,
            days,
            seed,
            decoy_period,
            decoy_mode,
            decoy_id,
            truth_out,
            out,
        } => {
            let config = match plan {
                Some(p) => SimConfig::load(p)?,
                None => SimConfig::demo(),
            };
            if config.residents.is_empty() {
                return Err(Failure::Input("plan has no [[resident]] entries".into()));
            }
            let mut log = simulate(&config.plan, &config.residents, days, seed)?;
            if let Some(period) = decoy_period {
                let mode = match decoy_mode {
                    DecoyArg::Stationary => DecoyMode::Stationary,
                    DecoyArg::Roaming => DecoyMode::Roaming,
                };
                let id = decoy_id
                    .or_else(|| config.plan.decoys.first().map(|d| d.id.clone()))
                    .ok_or_else(|| Failure::Usage("no decoy in plan; pass --decoy-id".into()))?;
                let decoy = DecoyConfig {
                    decoy_sensor_id: id,
                    period,
                    mode,
                };
                log = inject_decoy(&log, &decoy, &config.plan)?;
            }
            if let Some(t) = truth_out {
                emit(Some(&t), &config.plan.ground_truth_text())?;
            }
            emit(out.as_deref(), &log.to_normalized_string())
        }
        Command::Report {
            common: c,
            plot_data,
        } => {
            let cfg = c.pipeline()?;
            let dir = c
                .out
                .clone()
                .ok_or_else(|| Failure::Usage("report needs --out DIR".into()))?;
            let truth = c.truth()?;
            let (log, stats) = c.load()?;
            require_activities(&log, &cfg.segmentation)?;
            let r = run(log, Some(stats), &cfg, truth.as_ref())?;
            r.write_to(&dir, plot_data)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let summary: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("pds: {}", summary.join(" ").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("pds: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("pds: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Empty(m)) => {
            eprintln!("pds: {m}");
            ExitCode::from(3)
        }
    }
}
