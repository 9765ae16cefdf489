//! Aggregation of solver runs into plain CSV tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use balstag_core::instance::Instance;
use balstag_core::schedule::{construct_schedule, evaluate, ObjectiveScope};
use balstag_core::solver::{build_rduo, ControlScenario, Objective, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::{write_csv, SolutionFile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteShareRow {
    pub variant: Variant,
    pub seed: u64,
    pub route_index: usize,
    pub trips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub variant: Variant,
    pub seed: u64,
    pub bin_lo_s: f64,
    pub bin_hi_s: f64,
    pub trips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripDeltaRow {
    pub variant: Variant,
    pub seed: u64,
    pub trip: u32,
    pub route: usize,
    pub rduo_route: usize,
    pub stagger_s: f64,
    pub travel_time_delta_s: f64,
    pub arrival_delta_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcDelayRow {
    pub variant: Variant,
    pub seed: u64,
    pub arc: u32,
    pub total_delay_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSweepRow {
    pub control_fraction: f64,
    pub objective: Objective,
    pub variant: Variant,
    pub runs: usize,
    pub mean_fleet_delay_s: f64,
    pub mean_system_delay_s: f64,
    pub mean_cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub routes: Vec<RouteShareRow>,
    pub stagger_histogram: Vec<HistogramRow>,
    pub arrival_delta_histogram: Vec<HistogramRow>,
    pub trip_deltas: Vec<TripDeltaRow>,
    pub arc_delay: Vec<ArcDelayRow>,
    pub control_sweep: Vec<ControlSweepRow>,
}

/// Contiguous bins of `width` seconds from the bin holding the smallest value
/// to the one holding the largest: `(lo, hi, count)` with `lo <= x < hi`.
pub fn histogram(values: &[f64], width: f64) -> Vec<(f64, f64, usize)> {
    if values.is_empty() {
        return Vec::new();
    }
    let bin = |x: f64| (x / width).floor() as i64;
    let lo = values.iter().map(|&x| bin(x)).min().expect("non-empty");
    let hi = values.iter().map(|&x| bin(x)).max().expect("non-empty");
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &x in values {
        counts[(bin(x) - lo) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (lo + i as i64) as f64;
            (k * width, (k + 1.0) * width, c)
        })
        .collect()
}

/// Control fraction bits, objective, variant.
type SweepKey = (u64, Objective, Variant);
/// Runs, fleet delay, system delay, cost.
type SweepSums = (usize, f64, f64, f64);

/// Builds every table from runs on the instance with content hash
/// `instance_hash`.
///
/// Runs that do not carry run information, were made on another instance or
/// do not fit the instance are rejected.
pub fn build_report(
    instance: &Instance,
    instance_hash: &str,
    runs: &[(PathBuf, SolutionFile)],
    bin_width_s: f64,
) -> AppResult<Report> {
    if !(bin_width_s > 0.0 && bin_width_s.is_finite()) {
        return Err(AppError::Usage("bin width must be positive".into()));
    }
    let mut report = Report::default();
    let mut sweep: BTreeMap<SweepKey, SweepSums> = BTreeMap::new();
    for (path, file) in runs {
        let mismatch = |reason: String| AppError::Mismatch {
            path: path.clone(),
            reason,
        };
        let run = file
            .run
            .as_ref()
            .ok_or_else(|| mismatch("solution carries no run information".into()))?;
        if run.instance_hash != instance_hash {
            return Err(mismatch(format!(
                "run was made on instance {}, not {instance_hash}",
                run.instance_hash
            )));
        }
        let scenario = ControlScenario {
            control_fraction: run.control_fraction,
            objective: run.objective,
            seed: run.control_seed,
        };
        let inst = scenario
            .designate(instance)
            .map_err(|e| AppError::core(Some(path), e))?;
        let solution = file.to_solution(&inst, path)?;
        let (variant, seed) = (run.variant, run.seed);

        let schedule = construct_schedule(&inst, &solution);
        let base = construct_schedule(&inst, &build_rduo(&inst));
        let mut route_counts: BTreeMap<usize, usize> = BTreeMap::new();
        let (mut staggers, mut arrivals) = (Vec::new(), Vec::new());
        for (r, ts) in schedule.iter() {
            *route_counts.entry(ts.route).or_default() += 1;
            let b = base.trip(r).expect("RDUO schedules every trip");
            let row = TripDeltaRow {
                variant,
                seed,
                trip: r.0,
                route: ts.route,
                rduo_route: b.route,
                stagger_s: ts.start_s() - inst.trip(r).earliest_departure_s,
                travel_time_delta_s: (ts.arrival_s() - ts.start_s())
                    - (b.arrival_s() - b.start_s()),
                arrival_delta_s: ts.arrival_s() - b.arrival_s(),
            };
            staggers.push(row.stagger_s);
            arrivals.push(row.arrival_delta_s);
            report.trip_deltas.push(row);
        }
        report.routes.extend(
            route_counts
                .into_iter()
                .map(|(route_index, trips)| RouteShareRow {
                    variant,
                    seed,
                    route_index,
                    trips,
                }),
        );
        let hist = |values: &[f64]| {
            histogram(values, bin_width_s)
                .into_iter()
                .map(|(bin_lo_s, bin_hi_s, trips)| HistogramRow {
                    variant,
                    seed,
                    bin_lo_s,
                    bin_hi_s,
                    trips,
                })
                .collect::<Vec<_>>()
        };
        report.stagger_histogram.extend(hist(&staggers));
        report.arrival_delta_histogram.extend(hist(&arrivals));

        let mut per_arc = vec![0.0; inst.network().arc_count()];
        for (_, ts) in schedule.iter() {
            for leg in &ts.legs {
                per_arc[leg.arc.index()] += leg.delay_s;
            }
        }
        report
            .arc_delay
            .extend(per_arc.into_iter().enumerate().map(|(a, d)| ArcDelayRow {
                variant,
                seed,
                arc: a as u32,
                total_delay_s: d,
            }));

        let alpha = run.cost.alpha;
        let fleet = evaluate(&inst, &schedule, alpha, ObjectiveScope::Fleet);
        let system = evaluate(&inst, &schedule, alpha, ObjectiveScope::System);
        let cost = evaluate(&inst, &schedule, alpha, scenario.scope()).cost;
        let e = sweep
            .entry((run.control_fraction.to_bits(), run.objective, variant))
            .or_default();
        e.0 += 1;
        e.1 += fleet.total_delay_s;
        e.2 += system.total_delay_s;
        e.3 += cost;
    }
    report.control_sweep = sweep
        .into_iter()
        .map(
            |((bits, objective, variant), (n, fleet, system, cost))| ControlSweepRow {
                control_fraction: f64::from_bits(bits),
                objective,
                variant,
                runs: n,
                mean_fleet_delay_s: fleet / n as f64,
                mean_system_delay_s: system / n as f64,
                mean_cost: cost / n as f64,
            },
        )
        .collect();
    Ok(report)
}

pub const REPORT_FILES: [&str; 6] = [
    "route_distribution.csv",
    "stagger_histogram.csv",
    "arrival_delta_histogram.csv",
    "trip_deltas.csv",
    "arc_delay.csv",
    "control_sweep.csv",
];

pub fn write_report(dir: &Path, config_hash: &str, report: &Report) -> AppResult<()> {
    let [routes, stagger, arrival, deltas, arcs, sweep] = REPORT_FILES.map(|f| dir.join(f));
    write_csv(&routes, config_hash, &report.routes)?;
    write_csv(&stagger, config_hash, &report.stagger_histogram)?;
    write_csv(&arrival, config_hash, &report.arrival_delta_histogram)?;
    write_csv(&deltas, config_hash, &report.trip_deltas)?;
    write_csv(&arcs, config_hash, &report.arc_delay)?;
    write_csv(&sweep, config_hash, &report.control_sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins_are_half_open_and_contiguous() {
        let h = histogram(&[0.0, 4.9, 5.0, 17.0, -0.5], 5.0);
        assert_eq!(
            h,
            vec![
                (-5.0, 0.0, 1),
                (0.0, 5.0, 2),
                (5.0, 10.0, 1),
                (10.0, 15.0, 0),
                (15.0, 20.0, 1)
            ]
        );
        assert!(histogram(&[], 1.0).is_empty());
    }
}
