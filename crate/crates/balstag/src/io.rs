//! File formats: instance and solution JSON, schedule and metrics CSV, run
//! log JSONL.
//!
//! Every file written here carries a configuration hash: as a `config_hash`
//! field in JSON and JSONL, and as a leading `# config_hash=...` comment line
//! in CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use balstag_core::delay::DelaySpec;
use balstag_core::instance::{Instance, InstanceData, TripData};
use balstag_core::network::Network;
use balstag_core::schedule::{Assignment, CostBreakdown, Schedule, Solution};
use balstag_core::solver::{LogRecord, Objective, Variant};
use balstag_core::TripId;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub fn read_bytes(path: &Path) -> AppResult<Vec<u8>> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

/// Parses JSON, reporting failures with the JSON path of the offending value.
pub fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> AppResult<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| AppError::Json {
        path: path.to_path_buf(),
        at: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> AppResult<T> {
    parse_json(path, &read_bytes(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes to JSON");
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub network: Network,
    pub delay: DelaySpec,
    pub horizon_s: f64,
    pub trips: Vec<TripData>,
}

impl InstanceFile {
    pub fn new(instance: &Instance, config_hash: Option<String>) -> Self {
        let data = InstanceData::from(instance);
        InstanceFile {
            config_hash,
            network: data.network,
            delay: data.delay,
            horizon_s: data.horizon_s,
            trips: data.trips,
        }
    }

    pub fn into_instance(self) -> balstag_core::Result<Instance> {
        Instance::try_from(InstanceData {
            network: self.network,
            delay: self.delay,
            horizon_s: self.horizon_s,
            trips: self.trips,
        })
    }
}

pub fn load_instance(path: &Path) -> AppResult<Instance> {
    let file: InstanceFile = read_json(path)?;
    file.into_instance()
        .map_err(|e| AppError::core(Some(path), e))
}

pub fn save_instance(
    instance: &Instance,
    path: &Path,
    config_hash: Option<String>,
) -> AppResult<()> {
    write_json(path, &InstanceFile::new(instance, config_hash))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRecord {
    pub trip: u32,
    pub route_index: usize,
    pub start_time_s: f64,
}

/// Provenance of a solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    /// Content hash of the instance file the run read.
    pub instance_hash: String,
    pub variant: Variant,
    pub seed: u64,
    pub control_fraction: f64,
    pub control_seed: u64,
    pub objective: Objective,
    pub cost: CostBreakdown,
    pub timed_out: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
    /// One entry per trip, `null` for an unscheduled trip.
    pub assignments: Vec<Option<AssignmentRecord>>,
}

impl SolutionFile {
    pub fn new(solution: &Solution, config_hash: Option<String>, run: Option<RunInfo>) -> Self {
        let assignments = solution
            .assignments()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.map(|a| AssignmentRecord {
                    trip: i as u32,
                    route_index: a.route,
                    start_time_s: a.start_s,
                })
            })
            .collect();
        SolutionFile {
            config_hash,
            run,
            assignments,
        }
    }

    /// Checks the file against `instance` and converts it.
    pub fn to_solution(&self, instance: &Instance, path: &Path) -> AppResult<Solution> {
        let mismatch = |reason: String| AppError::Mismatch {
            path: path.to_path_buf(),
            reason,
        };
        if self.assignments.len() != instance.trip_count() {
            return Err(mismatch(format!(
                "{} assignments for an instance with {} trips",
                self.assignments.len(),
                instance.trip_count()
            )));
        }
        let mut solution = Solution::empty(instance.trip_count());
        for (i, rec) in self.assignments.iter().enumerate() {
            if let Some(rec) = rec {
                if rec.trip as usize != i {
                    return Err(mismatch(format!(
                        "assignments[{i}] is for trip {}",
                        rec.trip
                    )));
                }
                solution.set(
                    TripId(rec.trip),
                    Some(Assignment {
                        route: rec.route_index,
                        start_s: rec.start_time_s,
                    }),
                );
            }
        }
        solution
            .validate(instance)
            .map_err(|e| AppError::core(Some(path), e))?;
        Ok(solution)
    }
}

pub fn write_solution(path: &Path, file: &SolutionFile) -> AppResult<()> {
    write_json(path, file)
}

pub fn read_solution(path: &Path) -> AppResult<SolutionFile> {
    read_json(path)
}

/// Writes `rows` as CSV below a `# config_hash=...` line.
pub fn write_csv<T: Serialize>(path: &Path, config_hash: &str, rows: &[T]) -> AppResult<()> {
    let csv_err = |e| AppError::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = format!("# config_hash={config_hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| AppError::io(path, e))?;
    }
    write_bytes(path, &out)
}

/// Reads CSV written by [`write_csv`]; comment lines are skipped.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> AppResult<Vec<T>> {
    let bytes = read_bytes(path)?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes.as_slice());
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| AppError::Csv {
            path: path.to_path_buf(),
            source: e,
        })
}

/// The hash from the first line of a file written by [`write_csv`].
pub fn csv_config_hash(path: &Path) -> AppResult<Option<String>> {
    let bytes = read_bytes(path)?;
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    Ok(std::str::from_utf8(first)
        .ok()
        .and_then(|l| l.strip_prefix("# config_hash="))
        .map(str::to_owned))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub trip: u32,
    pub arc: u32,
    pub departure_s: f64,
    pub arrival_s: f64,
    pub flow: u32,
    pub delay_s: f64,
}

/// One row per traversal, by trip and then route position.
pub fn schedule_rows(schedule: &Schedule) -> Vec<ScheduleRow> {
    schedule
        .iter()
        .flat_map(|(id, ts)| {
            ts.legs.iter().map(move |l| ScheduleRow {
                trip: id.0,
                arc: l.arc.0,
                departure_s: l.departure_s,
                arrival_s: l.arrival_s,
                flow: l.flow,
                delay_s: l.delay_s,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub variant: Variant,
    pub seed: u64,
    pub control_fraction: f64,
    pub objective: Objective,
    pub cost: f64,
    pub total_delay_s: f64,
    pub congestion_delay_s: f64,
    pub detour_delay_s: f64,
    pub infeasibility_s: f64,
    pub feasible: bool,
    pub timed_out: bool,
    pub runtime_s: f64,
    pub oracle_cost: Option<f64>,
    pub oracle_gap: Option<f64>,
}

#[derive(Serialize)]
struct LogLine<'a> {
    config_hash: &'a str,
    #[serde(flatten)]
    record: &'a LogRecord,
}

pub fn write_run_log(path: &Path, config_hash: &str, log: &[LogRecord]) -> AppResult<()> {
    let mut out = Vec::new();
    for record in log {
        serde_json::to_writer(
            &mut out,
            &LogLine {
                config_hash,
                record,
            },
        )
        .expect("log record serializes");
        out.write_all(b"\n").expect("writing to memory");
    }
    write_bytes(path, &out)
}

pub fn read_run_log(path: &Path) -> AppResult<Vec<LogRecord>> {
    let bytes = read_bytes(path)?;
    bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            parse_json::<LogRecord>(path, line).map_err(|e| match e {
                AppError::Json { path, at, message } => AppError::Json {
                    path,
                    at: format!("line {}: {at}", i + 1),
                    message,
                },
                other => other,
            })
        })
        .collect()
}
