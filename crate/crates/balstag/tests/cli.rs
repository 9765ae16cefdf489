use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use balstag::cli::VickreyRow;
use balstag::io::{
    csv_config_hash, load_instance, read_csv, read_run_log, read_solution, save_instance,
    MetricsRow, ScheduleRow,
};
use balstag::report::{ArcDelayRow, HistogramRow, RouteShareRow};
use balstag_core::delay::DelaySpec;
use balstag_core::instance::TripId;
use balstag_core::oracle::{solve_exhaustive, OracleGrid, COMBINATION_LIMIT};
use balstag_core::schedule::ObjectiveScope;
use balstag_core::solver::LogRecord;
use balstag_core::{ArcId, NodeId};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balstag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "balstag {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("sub/b.json"));
    for p in [&a, &b] {
        ok(&[
            "generate",
            "--nodes",
            "grid:6x6",
            "--trips",
            "50",
            "--seed",
            "7",
            "--out",
            s(p),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    ok(&[
        "generate",
        "--nodes",
        "grid:6x6",
        "--trips",
        "50",
        "--seed",
        "8",
        "--out",
        s(&b),
    ]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generate_rejects_zero_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "generate",
        "--nodes",
        "grid:3x3",
        "--trips",
        "0",
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn generate_summary_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.json");
    let stdout = ok(&[
        "generate",
        "--nodes",
        "ring:8",
        "--trips",
        "30",
        "--seed",
        "3",
        "--out",
        s(&path),
    ]);
    let values: Vec<f64> = stdout
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    let inst = load_instance(&path).unwrap();
    let n = inst.trip_count() as f64;
    let ff = inst
        .trips()
        .iter()
        .map(|t| t.routes.shortest().free_flow_s())
        .sum::<f64>()
        / n;
    let sigma = inst.trips().iter().map(|t| t.max_staggering_s).sum::<f64>() / n;
    assert_eq!(values[0], 8.0);
    assert_eq!(values[1], 30.0);
    assert!((values[3] - ff).abs() <= 0.005, "{} vs {ff}", values[3]);
    assert!((values[4] - sigma).abs() <= 0.005);
}

#[test]
fn instance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:4x5",
        "--trips",
        "40",
        "--delay",
        "piecewise:15:3",
        "--out",
        s(&path),
    ]);
    let inst = load_instance(&path).unwrap();
    let copy = dir.path().join("copy.json");
    save_instance(&inst, &copy, None).unwrap();
    assert_eq!(load_instance(&copy).unwrap(), inst);
}

#[test]
fn three_trip_fixture_fields() {
    let inst = load_instance(&fixture("three_trips.json")).unwrap();
    assert_eq!(inst.trip_count(), 3);
    assert_eq!(inst.network().arc_count(), 3);
    assert_eq!(inst.horizon_s(), 60.0);
    assert_eq!(
        inst.delay_spec(),
        &DelaySpec::Piecewise {
            headway_s: 5.0,
            segments: 2
        }
    );
    let t0 = inst.trip(TripId(0));
    assert_eq!((t0.origin, t0.dest), (NodeId(0), NodeId(2)));
    assert_eq!(t0.routes.len(), 2);
    assert_eq!(t0.routes.routes[0].arcs(), &[ArcId(0), ArcId(1)]);
    assert_eq!(t0.routes.routes[1].arcs(), &[ArcId(2)]);
    assert_eq!(t0.routes.shortest().free_flow_s(), 30.0);
    assert_eq!(t0.latest_start_s(), 5.0);
    let t2 = inst.trip(TripId(2));
    assert_eq!(t2.earliest_departure_s, 12.5);
    assert_eq!(t2.latest_start_s(), 22.5);
    assert!(t0.controlled && inst.trip(TripId(1)).controlled && !t2.controlled);
}

#[test]
fn unknown_arc_is_a_schema_error_naming_the_trip() {
    let out = run(&[
        "evaluate",
        "--instance",
        s(&fixture("bad_arc.json")),
        "--solution",
        "unused.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trip 1"), "{err}");
    assert!(err.contains('7'), "{err}");
}

#[test]
fn unknown_field_names_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.json");
    let text = std::fs::read_to_string(fixture("three_trips.json"))
        .unwrap()
        .replace("\"k\": 1,", "\"k\": 1, \"speed\": 3,");
    std::fs::write(&path, text).unwrap();
    let out = run(&[
        "solve",
        "--instance",
        s(&path),
        "--variant",
        "rduo",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trips[1]"));
}

#[test]
fn solve_writes_hashed_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:4x4",
        "--trips",
        "40",
        "--seed",
        "2",
        "--out",
        s(&inst),
    ]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "solve",
            "--instance",
            s(&inst),
            "--variant",
            "rduo,integ",
            "--seeds",
            "0..2",
            "--out",
            s(out),
        ]);
    }
    for run_dir in ["rduo-seed0", "integ-seed0", "integ-seed1"] {
        for f in ["solution.json", "schedule.csv"] {
            assert_eq!(
                std::fs::read(a.join(run_dir).join(f)).unwrap(),
                std::fs::read(b.join(run_dir).join(f)).unwrap(),
                "{run_dir}/{f}"
            );
        }
        // Log timestamps are wall-clock; everything else must agree.
        let strip = |p: PathBuf| {
            read_run_log(&p)
                .unwrap()
                .into_iter()
                .map(|r| LogRecord { t_s: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        assert_eq!(
            strip(a.join(run_dir).join("run_log.jsonl")),
            strip(b.join(run_dir).join("run_log.jsonl"))
        );
    }
    let rows: Vec<MetricsRow> = read_csv(&a.join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    let rduo = rows.iter().find(|r| r.variant.name() == "rduo").unwrap();
    assert!(rduo.infeasibility_s >= 0.0);
    assert_eq!(rduo.feasible, rduo.infeasibility_s == 0.0);
    assert!(rows
        .iter()
        .all(|r| (r.total_delay_s - r.congestion_delay_s - r.detour_delay_s).abs() < 1e-6));

    // Each file carries the hash of its own run.
    let sol = read_solution(&a.join("integ-seed1/solution.json")).unwrap();
    let hash = sol.config_hash.clone().unwrap();
    assert_eq!(
        csv_config_hash(&a.join("integ-seed1/schedule.csv"))
            .unwrap()
            .as_deref(),
        Some(hash.as_str())
    );
    let log_text = std::fs::read_to_string(a.join("integ-seed1/run_log.jsonl")).unwrap();
    assert!(log_text.lines().all(|l| l.contains(&hash)));
    let seed0 = read_solution(&a.join("integ-seed0/solution.json")).unwrap();
    assert_ne!(seed0.config_hash, sol.config_hash);

    let log = read_run_log(&a.join("integ-seed1/run_log.jsonl")).unwrap();
    assert!(log.windows(2).all(|w| w[1].cost < w[0].cost));
    let integ = rows
        .iter()
        .find(|r| r.variant.name() == "integ" && r.seed == 1)
        .unwrap();
    assert_eq!(log.last().unwrap().cost, integ.cost);

    let eval = ok(&[
        "evaluate",
        "--instance",
        s(&inst),
        "--solution",
        s(&a.join("integ-seed1/solution.json")),
    ]);
    let v: serde_json::Value = serde_json::from_str(&eval).unwrap();
    assert!((v["cost"]["cost"].as_f64().unwrap() - integ.cost).abs() < 1e-9);
    assert_eq!(v["scheduled_trips"], 40);
}

#[test]
fn integ_with_oracle_gap_on_five_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("five_trips.json");
    ok(&[
        "solve",
        "--instance",
        s(&path),
        "--variant",
        "integ",
        "--seeds",
        "0..4",
        "--grid-step",
        "1",
        "--oracle-gap",
        "--out",
        s(dir.path()),
    ]);
    let inst = load_instance(&path).unwrap();
    let oracle = solve_exhaustive(
        &inst,
        &OracleGrid { step_s: 1.0 },
        10.0,
        ObjectiveScope::System,
        false,
        COMBINATION_LIMIT,
    )
    .unwrap();
    assert_eq!(oracle.combinations, 22 * 10 * 5 * 3);
    let rows: Vec<MetricsRow> = read_csv(&dir.path().join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.oracle_cost, Some(oracle.cost.cost));
        assert!(
            r.cost >= oracle.cost.cost - 1e-9,
            "LNS {} beat the oracle {}",
            r.cost,
            oracle.cost.cost
        );
        assert!(r.oracle_gap.unwrap() >= -1e-9);
    }
}

#[test]
fn oracle_refusal_exits_with_budget_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:3x3",
        "--trips",
        "20",
        "--out",
        s(&inst),
    ]);
    let out = run(&[
        "solve",
        "--instance",
        s(&inst),
        "--variant",
        "integ",
        "--oracle-gap",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn time_limit_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:4x4",
        "--trips",
        "60",
        "--out",
        s(&inst),
    ]);
    ok(&[
        "solve",
        "--instance",
        s(&inst),
        "--variant",
        "integ",
        "--time-limit",
        "0",
        "--out",
        s(dir.path()),
    ]);
    let rows: Vec<MetricsRow> = read_csv(&dir.path().join("metrics.csv")).unwrap();
    assert!(rows[0].timed_out);
    assert!(rows[0].cost.is_finite());
}

#[test]
fn report_tables_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("i.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:4x4",
        "--trips",
        "40",
        "--seed",
        "5",
        "--out",
        s(&inst_path),
    ]);
    let runs = dir.path().join("runs");
    ok(&[
        "solve",
        "--instance",
        s(&inst_path),
        "--variant",
        "rduo,integ",
        "--out",
        s(&runs),
    ]);
    let report = dir.path().join("report");
    ok(&[
        "report",
        "--instance",
        s(&inst_path),
        "--out",
        s(&report),
        "--bin-width",
        "5",
        s(&runs.join("rduo-seed0/solution.json")),
        s(&runs.join("integ-seed0/solution.json")),
    ]);
    let inst = load_instance(&inst_path).unwrap();

    let shares: Vec<RouteShareRow> = read_csv(&report.join("route_distribution.csv")).unwrap();
    for v in ["rduo", "integ"] {
        let total: usize = shares
            .iter()
            .filter(|r| r.variant.name() == v)
            .map(|r| r.trips)
            .sum();
        assert_eq!(total, inst.trip_count(), "{v}");
    }
    let rduo_routes: Vec<_> = shares
        .iter()
        .filter(|r| r.variant.name() == "rduo")
        .collect();
    assert_eq!(rduo_routes.len(), 1);
    assert_eq!(rduo_routes[0].route_index, 0);

    let arrivals: Vec<HistogramRow> =
        read_csv(&report.join("arrival_delta_histogram.csv")).unwrap();
    let own: Vec<_> = arrivals
        .iter()
        .filter(|r| r.variant.name() == "rduo")
        .collect();
    assert_eq!(own.len(), 1);
    assert_eq!(
        (own[0].bin_lo_s, own[0].bin_hi_s, own[0].trips),
        (0.0, 5.0, inst.trip_count())
    );
    let stagger: Vec<HistogramRow> = read_csv(&report.join("stagger_histogram.csv")).unwrap();
    let integ_total: usize = stagger
        .iter()
        .filter(|r| r.variant.name() == "integ")
        .map(|r| r.trips)
        .sum();
    assert_eq!(integ_total, inst.trip_count());

    let arcs: Vec<ArcDelayRow> = read_csv(&report.join("arc_delay.csv")).unwrap();
    let schedule: Vec<ScheduleRow> = read_csv(&runs.join("integ-seed0/schedule.csv")).unwrap();
    let mut recount = vec![0.0; inst.network().arc_count()];
    for row in &schedule {
        recount[row.arc as usize] += row.delay_s;
    }
    let integ_arcs: Vec<_> = arcs
        .iter()
        .filter(|r| r.variant.name() == "integ")
        .collect();
    assert_eq!(integ_arcs.len(), recount.len());
    for r in integ_arcs {
        assert!((r.total_delay_s - recount[r.arc as usize]).abs() < 1e-9);
    }

    // A run made on another instance is refused.
    let other = dir.path().join("other.json");
    ok(&[
        "generate",
        "--nodes",
        "grid:4x4",
        "--trips",
        "40",
        "--seed",
        "6",
        "--out",
        s(&other),
    ]);
    let out = run(&[
        "report",
        "--instance",
        s(&other),
        "--out",
        s(&dir.path().join("r2")),
        s(&runs.join("rduo-seed0/solution.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("instance"));
}

#[test]
fn validate_vickrey_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    ok(&[
        "validate-vickrey",
        "--rho-grid",
        "0.3,0.5",
        "--tau",
        "2",
        "--n",
        "200000",
        "--out",
        s(&path),
    ]);
    let rows: Vec<VickreyRow> = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].rho, 0.5);
    assert_eq!(rows[1].analytic_s, 3.0);
    assert!(rows.iter().all(|r| r.z.abs() < 4.0));
    assert!(csv_config_hash(&path).unwrap().is_some());
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().nth(1).unwrap();
    assert_eq!(
        header,
        "rho,phi,analytic_s,linear_s,simulated_s,std_error_s,z"
    );
    let out = run(&["validate-vickrey", "--rho-grid", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
}
