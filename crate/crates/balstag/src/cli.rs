//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use balstag_core::delay::DelaySpec;
use balstag_core::generate::{
    generate_synthetic, synthetic_network, DeadlinePolicy, GeneratorConfig, NetworkShape,
    SigmaPolicy,
};
use balstag_core::instance::Instance;
use balstag_core::oracle::{solve_exhaustive, OracleGrid, COMBINATION_LIMIT};
use balstag_core::schedule::{check_feasibility, construct_schedule, evaluate, ObjectiveScope};
use balstag_core::solver::{run_variant, ControlScenario, LnsParams, Objective, Variant};
use balstag_core::vickrey::{
    expected_bottleneck_time, expected_linear_time, phi_for_rho, simulate_bottleneck,
    BottleneckConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{exit, AppError, AppResult};
use crate::hash::{config_hash, content_hash};
use crate::io::{
    load_instance, read_bytes, read_solution, save_instance, schedule_rows, write_csv,
    write_run_log, write_solution, MetricsRow, RunInfo, SolutionFile,
};
use crate::report::{build_report, write_report, REPORT_FILES};
use crate::WallClock;

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(
    name = "balstag",
    version,
    about = "Route balancing and departure staggering under congestion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance.
    Generate(GenerateArgs),
    /// Run solver variants on an instance.
    Solve(SolveArgs),
    /// Evaluate a solution file.
    Evaluate(EvaluateArgs),
    /// Aggregate solved runs into CSV tables.
    Report(ReportArgs),
    /// Compare the linear congestion model with a simulated bottleneck queue.
    ValidateVickrey(VickreyArgs),
}

/// `grid:RxC` or `ring:N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeArg(pub NetworkShape);

impl FromStr for ShapeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected grid:RxC or ring:N, got {s:?}");
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "grid" => {
                let (r, c) = rest.split_once('x').ok_or_else(bad)?;
                let rows = r.parse().map_err(|_| bad())?;
                let cols = c.parse().map_err(|_| bad())?;
                Ok(ShapeArg(NetworkShape::Grid { rows, cols }))
            }
            "ring" => Ok(ShapeArg(NetworkShape::Ring {
                nodes: rest.parse().map_err(|_| bad())?,
            })),
            _ => Err(bad()),
        }
    }
}

/// `shortest:F` or `nominal:F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaArg(pub SigmaPolicy);

impl FromStr for SigmaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected shortest:F or nominal:F, got {s:?}");
        let (kind, f) = s.split_once(':').ok_or_else(bad)?;
        let f: f64 = f.parse().map_err(|_| bad())?;
        match kind {
            "shortest" => Ok(SigmaArg(SigmaPolicy::FractionOfShortestFreeFlow(f))),
            "nominal" => Ok(SigmaArg(SigmaPolicy::FractionOfNominal(f))),
            _ => Err(bad()),
        }
    }
}

/// `freeflow:F` or `rduo:F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeadlineArg(pub DeadlinePolicy);

impl FromStr for DeadlineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected freeflow:F or rduo:F, got {s:?}");
        let (kind, f) = s.split_once(':').ok_or_else(bad)?;
        let f: f64 = f.parse().map_err(|_| bad())?;
        match kind {
            "freeflow" => Ok(DeadlineArg(DeadlinePolicy::FreeFlowFactor(f))),
            "rduo" => Ok(DeadlineArg(DeadlinePolicy::RduoFactor(f))),
            _ => Err(bad()),
        }
    }
}

/// `polynomial`, `polynomial:A,B,G` or `piecewise:HEADWAY:SEGMENTS`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayArg(pub DelaySpec);

impl FromStr for DelayArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected polynomial, polynomial:A,B,G or piecewise:H:S, got {s:?}");
        let spec = match s.split_once(':') {
            None if s == "polynomial" => DelaySpec::default(),
            Some(("polynomial", rest)) => {
                let v: Vec<f64> = rest
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                let [alpha, beta, gamma] = v[..] else {
                    return Err(bad());
                };
                DelaySpec::Polynomial { alpha, beta, gamma }
            }
            Some(("piecewise", rest)) => {
                let (h, k) = rest.split_once(':').ok_or_else(bad)?;
                DelaySpec::Piecewise {
                    headway_s: h.parse().map_err(|_| bad())?,
                    segments: k.parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(DelayArg(spec))
    }
}

/// `a..b` (exclusive), `a..=b` or a single seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected a..b, a..=b or a seed, got {s:?}");
        let num = |x: &str| x.trim().parse::<u64>().map_err(|_| bad());
        let (start, end) = if let Some((a, b)) = s.split_once("..=") {
            (num(a)?, num(b)?.checked_add(1).ok_or_else(bad)?)
        } else if let Some((a, b)) = s.split_once("..") {
            (num(a)?, num(b)?)
        } else {
            let a = num(s)?;
            (a, a + 1)
        };
        if start >= end {
            return Err(format!("seed range {s:?} is empty"));
        }
        Ok(SeedRange { start, end })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Welfare,
    Fleet,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Welfare => Objective::Welfare,
            ObjectiveArg::Fleet => Objective::Fleet,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Network shape: grid:RxC or ring:N.
    #[arg(long)]
    pub nodes: ShapeArg,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub trips: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Earliest departures are spread over [0, horizon) seconds.
    #[arg(long, default_value_t = 600.0)]
    pub horizon: f64,
    /// Staggering window: shortest:F (of shortest free flow) or nominal:F.
    #[arg(long, default_value = "shortest:0.2")]
    pub sigma: SigmaArg,
    /// Latest arrival: freeflow:F or rduo:F.
    #[arg(long, default_value = "freeflow:1.25")]
    pub deadline: DeadlineArg,
    #[arg(long, default_value_t = balstag_core::route::DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = balstag_core::route::DEFAULT_THETA)]
    pub theta: f64,
    /// polynomial, polynomial:A,B,G or piecewise:HEADWAY:SEGMENTS.
    #[arg(long, default_value = "polynomial")]
    pub delay: DelayArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub instance: PathBuf,
    /// Comma-separated variants: rduo, greedy, stag, bal, integ.
    #[arg(long, value_delimiter = ',', default_value = "integ")]
    pub variant: Vec<Variant>,
    /// Seed range, e.g. 0..10.
    #[arg(long, alias = "seed", default_value = "0")]
    pub seeds: SeedRange,
    #[arg(long, default_value_t = 1.0)]
    pub control_fraction: f64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Welfare)]
    pub objective: ObjectiveArg,
    /// Seed of the controlled-trip draw.
    #[arg(long, default_value_t = 0)]
    pub control_seed: u64,
    #[arg(long, default_value_t = 0.4)]
    pub pool_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sample_fraction: f64,
    #[arg(long, default_value_t = 2)]
    pub max_cycles: usize,
    #[arg(long, default_value_t = 1)]
    pub max_idle_sweeps: usize,
    /// Wall-clock limit per run, seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Restrict start times to e + k * step.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Also solve exhaustively on the start grid (1 s unless --grid-step)
    /// and report the gap.
    #[arg(long)]
    pub oracle_gap: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub instance: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Defaults to the objective recorded in the solution, else welfare.
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Write the schedule CSV here.
    #[arg(long)]
    #[serde(skip)]
    pub schedule: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    #[serde(skip)]
    pub instance: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Histogram bin width, seconds.
    #[arg(long, default_value_t = 5.0)]
    pub bin_width: f64,
    /// Solution files written by `solve`.
    #[arg(required = true)]
    #[serde(skip)]
    pub runs: Vec<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VickreyArgs {
    /// Comma-separated traffic intensities in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.8")]
    pub rho_grid: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Arrivals per intensity.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> AppResult<()> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Report(a) => cmd_report(&a),
        Command::ValidateVickrey(a) => cmd_validate_vickrey(&a),
    }
}

fn core_err(e: balstag_core::Error) -> AppError {
    AppError::from(e)
}

pub fn cmd_generate(a: &GenerateArgs) -> AppResult<()> {
    let hash = config_hash(a);
    let net = synthetic_network(a.nodes.0, a.seed).map_err(core_err)?;
    let cfg = GeneratorConfig {
        n_trips: a.trips as usize,
        horizon_s: a.horizon,
        sigma: a.sigma.0,
        deadline: a.deadline.0,
        k: a.k,
        theta: a.theta,
        delay: a.delay.0.clone(),
        ..GeneratorConfig::default()
    };
    let inst = generate_synthetic(&net, &cfg, a.seed).map_err(core_err)?;
    save_instance(&inst, &a.out, Some(hash))?;
    print_summary(&inst);
    Ok(())
}

fn print_summary(inst: &Instance) {
    let n = inst.trip_count() as f64;
    let ff = inst
        .trips()
        .iter()
        .map(|t| t.routes.shortest().free_flow_s())
        .sum::<f64>()
        / n;
    let sigma = inst.trips().iter().map(|t| t.max_staggering_s).sum::<f64>() / n;
    let routes = inst.trips().iter().map(|t| t.routes.len()).sum::<usize>() as f64 / n;
    say!(
        "{:<8} {:>6} {:>6} {:>10} {:>12} {:>10}",
        "network",
        "nodes",
        "trips",
        "routes",
        "free_flow_s",
        "sigma_s"
    );
    say!(
        "{:<8} {:>6} {:>6} {:>10.2} {:>12.2} {:>10.2}",
        "",
        inst.network().node_count(),
        inst.trip_count(),
        routes,
        ff,
        sigma
    );
}

#[derive(Serialize)]
struct RunConfig<'a> {
    instance_hash: &'a str,
    variant: Variant,
    seed: u64,
    control: ControlScenario,
    params: &'a LnsParams,
}

struct RunOutput {
    row: MetricsRow,
}

fn run_dir(out: &Path, variant: Variant, seed: u64) -> PathBuf {
    out.join(format!("{}-seed{seed}", variant.name()))
}

pub fn cmd_solve(a: &SolveArgs) -> AppResult<()> {
    if !(0.0..=1.0).contains(&a.control_fraction) {
        return Err(AppError::Usage(
            "--control-fraction must lie in [0, 1]".into(),
        ));
    }
    let bytes = read_bytes(&a.instance)?;
    let instance_hash = content_hash(&bytes);
    let base = load_instance(&a.instance)?;
    let scenario = ControlScenario {
        control_fraction: a.control_fraction,
        objective: a.objective.into(),
        seed: a.control_seed,
    };
    let inst = scenario.designate(&base).map_err(core_err)?;
    let template = LnsParams {
        pool_fraction: a.pool_fraction,
        sample_fraction: a.sample_fraction,
        max_cycles: a.max_cycles,
        max_idle_sweeps: a.max_idle_sweeps,
        time_limit_s: a.time_limit,
        max_iterations: a.max_iterations,
        alpha_initial: a.alpha,
        grid_step: a.grid_step,
        ..LnsParams::default()
    };
    template
        .validate()
        .map_err(|e| AppError::Usage(e.to_string()))?;

    let oracle = if a.oracle_gap {
        let grid = OracleGrid {
            step_s: a.grid_step.unwrap_or(1.0),
        };
        Some(
            solve_exhaustive(
                &inst,
                &grid,
                a.alpha,
                scenario.scope(),
                false,
                COMBINATION_LIMIT,
            )
            .map_err(core_err)?,
        )
    } else {
        None
    };

    let jobs: Vec<(Variant, u64)> = a
        .variant
        .iter()
        .flat_map(|&v| (a.seeds.start..a.seeds.end).map(move |s| (v, s)))
        .collect();
    let work = |&(variant, seed): &(Variant, u64)| -> AppResult<RunOutput> {
        let params = LnsParams {
            seed,
            ..template.clone()
        };
        let hash = config_hash(&RunConfig {
            instance_hash: &instance_hash,
            variant,
            seed,
            control: scenario,
            params: &params,
        });
        let clock = WallClock::start();
        let run =
            run_variant(&inst, variant, &params, scenario.scope(), &clock).map_err(core_err)?;
        let runtime_s = clock.elapsed();
        let dir = run_dir(&a.out, variant, seed);
        let info = RunInfo {
            instance_hash: instance_hash.clone(),
            variant,
            seed,
            control_fraction: a.control_fraction,
            control_seed: a.control_seed,
            objective: scenario.objective,
            cost: run.cost,
            timed_out: run.timed_out,
        };
        write_solution(
            &dir.join("solution.json"),
            &SolutionFile::new(&run.solution, Some(hash.clone()), Some(info)),
        )?;
        write_run_log(&dir.join("run_log.jsonl"), &hash, &run.log)?;
        write_csv(
            &dir.join("schedule.csv"),
            &hash,
            &schedule_rows(&run.schedule),
        )?;
        let oracle_cost = oracle.as_ref().map(|o| o.cost.cost);
        let row = MetricsRow {
            variant,
            seed,
            control_fraction: a.control_fraction,
            objective: scenario.objective,
            cost: run.cost.cost,
            total_delay_s: run.cost.total_delay_s,
            congestion_delay_s: run.cost.congestion_delay_s,
            detour_delay_s: run.cost.detour_delay_s,
            infeasibility_s: run.cost.infeasibility_s,
            feasible: run.cost.is_feasible(),
            timed_out: run.timed_out,
            runtime_s,
            oracle_cost,
            oracle_gap: oracle_cost.map(|o| {
                if o > 0.0 {
                    (run.cost.cost - o) / o
                } else {
                    run.cost.cost - o
                }
            }),
        };
        write_csv(&dir.join("metrics.csv"), &hash, std::slice::from_ref(&row))?;
        Ok(RunOutput { row })
    };
    let results: Vec<AppResult<RunOutput>> = if a.threads == 1 {
        jobs.iter().map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.threads)
            .build()
            .map_err(|e| AppError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(work).collect())
    };
    let rows: Vec<MetricsRow> = results
        .into_iter()
        .map(|r| r.map(|o| o.row))
        .collect::<AppResult<_>>()?;
    write_csv(&a.out.join("metrics.csv"), &config_hash(a), &rows)?;
    say!(
        "{:<8} {:>6} {:>12} {:>12} {:>12} {:>12} {:>9} {:>10}",
        "variant",
        "seed",
        "cost",
        "congestion",
        "detour",
        "late",
        "feasible",
        "runtime_s"
    );
    for r in &rows {
        say!(
            "{:<8} {:>6} {:>12.3} {:>12.3} {:>12.3} {:>12.3} {:>9} {:>10.3}{}",
            r.variant.name(),
            r.seed,
            r.cost,
            r.congestion_delay_s,
            r.detour_delay_s,
            r.infeasibility_s,
            r.feasible,
            r.runtime_s,
            if r.timed_out { "  (time limit)" } else { "" }
        );
    }
    if let Some(o) = &oracle {
        say!(
            "oracle   {:>6} {:>12.3}  ({} combinations)",
            "-",
            o.cost.cost,
            o.combinations
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct Evaluation {
    cost: balstag_core::schedule::CostBreakdown,
    infeasible_trips: Vec<u32>,
    scheduled_trips: usize,
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> AppResult<()> {
    let base = load_instance(&a.instance)?;
    let file = read_solution(&a.solution)?;
    let inst = match &file.run {
        Some(run) => ControlScenario {
            control_fraction: run.control_fraction,
            objective: run.objective,
            seed: run.control_seed,
        }
        .designate(&base)
        .map_err(core_err)?,
        None => base,
    };
    let objective = match a.objective {
        Some(o) => o.into(),
        None => file
            .run
            .as_ref()
            .map_or(Objective::Welfare, |r| r.objective),
    };
    let scope = match objective {
        Objective::Welfare => ObjectiveScope::System,
        Objective::Fleet => ObjectiveScope::Fleet,
    };
    let solution = file.to_solution(&inst, &a.solution)?;
    let schedule = construct_schedule(&inst, &solution);
    let cost = evaluate(&inst, &schedule, a.alpha, scope);
    if let Some(path) = &a.schedule {
        write_csv(path, &config_hash(a), &schedule_rows(&schedule))?;
    }
    let out = Evaluation {
        cost,
        infeasible_trips: check_feasibility(&inst, &schedule)
            .into_iter()
            .map(|t| t.0)
            .collect(),
        scheduled_trips: solution.present_count(),
    };
    say!(
        "{}",
        serde_json::to_string_pretty(&out).expect("evaluation serializes")
    );
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> AppResult<()> {
    let bytes = read_bytes(&a.instance)?;
    let instance_hash = content_hash(&bytes);
    let inst = load_instance(&a.instance)?;
    let runs = a
        .runs
        .iter()
        .map(|p| read_solution(p).map(|f| (p.clone(), f)))
        .collect::<AppResult<Vec<_>>>()?;
    let report = build_report(&inst, &instance_hash, &runs, a.bin_width)?;
    write_report(&a.out, &config_hash(a), &report)?;
    for f in REPORT_FILES {
        say!("{}", a.out.join(f).display());
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct VickreyRow {
    pub rho: f64,
    pub phi: f64,
    pub analytic_s: f64,
    pub linear_s: f64,
    pub simulated_s: f64,
    pub std_error_s: f64,
    /// `(simulated - analytic) / std_error`.
    pub z: f64,
}

pub fn vickrey_rows(a: &VickreyArgs) -> AppResult<Vec<VickreyRow>> {
    if a.n == 0 {
        return Err(AppError::Usage("--n must be at least 1".into()));
    }
    a.rho_grid
        .iter()
        .enumerate()
        .map(|(i, &rho)| {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(AppError::Usage(format!("rho {rho} is outside (0, 1)")));
            }
            let usage = |e: balstag_core::Error| AppError::Usage(e.to_string());
            let phi = phi_for_rho(rho).map_err(usage)?;
            let analytic = expected_bottleneck_time(a.tau, rho).map_err(usage)?;
            let linear = expected_linear_time(a.tau, rho, phi).map_err(usage)?;
            let sim = simulate_bottleneck(
                &BottleneckConfig::from_rho(a.tau, rho),
                a.n,
                a.seed.wrapping_add(i as u64),
            )
            .map_err(usage)?;
            Ok(VickreyRow {
                rho,
                phi,
                analytic_s: analytic,
                linear_s: linear,
                simulated_s: sim.mean_s,
                std_error_s: sim.std_error_s,
                z: (sim.mean_s - analytic) / sim.std_error_s,
            })
        })
        .collect()
}

pub fn cmd_validate_vickrey(a: &VickreyArgs) -> AppResult<()> {
    let rows = vickrey_rows(a)?;
    let hash = config_hash(a);
    match &a.out {
        Some(path) => write_csv(path, &hash, &rows),
        None => {
            say!("# config_hash={hash}");
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r).map_err(|e| AppError::Csv {
                    path: "<stdout>".into(),
                    source: e,
                })?;
            }
            w.flush().map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_shapes_and_policies() {
        assert_eq!(
            "grid:6x6".parse::<ShapeArg>().unwrap().0,
            NetworkShape::Grid { rows: 6, cols: 6 }
        );
        assert_eq!(
            "ring:12".parse::<ShapeArg>().unwrap().0,
            NetworkShape::Ring { nodes: 12 }
        );
        assert!("grid:6".parse::<ShapeArg>().is_err());
        assert!("hex:3".parse::<ShapeArg>().is_err());
        assert_eq!(
            "nominal:0.1".parse::<SigmaArg>().unwrap().0,
            SigmaPolicy::FractionOfNominal(0.1)
        );
        assert_eq!(
            "rduo:1.25".parse::<DeadlineArg>().unwrap().0,
            DeadlinePolicy::RduoFactor(1.25)
        );
        assert_eq!(
            "piecewise:15:3".parse::<DelayArg>().unwrap().0,
            DelaySpec::Piecewise {
                headway_s: 15.0,
                segments: 3
            }
        );
        assert_eq!(
            "polynomial:0.2,10,2".parse::<DelayArg>().unwrap().0,
            DelaySpec::Polynomial {
                alpha: 0.2,
                beta: 10.0,
                gamma: 2.0
            }
        );
        assert!("polynomial:1,2".parse::<DelayArg>().is_err());
        assert!("piecewise:0:3".parse::<DelayArg>().is_err());
    }

    #[test]
    fn parses_seed_ranges() {
        assert_eq!(
            "3..7".parse::<SeedRange>().unwrap(),
            SeedRange { start: 3, end: 7 }
        );
        assert_eq!(
            "3..=7".parse::<SeedRange>().unwrap(),
            SeedRange { start: 3, end: 8 }
        );
        assert_eq!(
            "5".parse::<SeedRange>().unwrap(),
            SeedRange { start: 5, end: 6 }
        );
        assert!("7..3".parse::<SeedRange>().is_err());
        assert!("a..b".parse::<SeedRange>().is_err());
    }
}
