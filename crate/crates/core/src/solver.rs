//! Reactive user optimum, greedy assignment and large neighborhood search.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incremental::{ChangeRequest, Engine, EngineStats};
use crate::instance::{Instance, TripId};
use crate::moves::{
    best_assignment, insert, local_search, remove, MoveContext, OperatorMode, INSERT_ORDERS,
};
use crate::schedule::{
    check_feasibility, construct_schedule, evaluate, trip_cost, CostBreakdown, ObjectiveScope,
    Schedule, Solution,
};
use crate::time::EPS;

/// Source of elapsed wall time for time limits and log stamps.
pub trait Clock {
    fn elapsed_s(&self) -> f64;
}

/// A clock that never advances: no time limit ever fires and every log stamp
/// is zero, which makes run logs exactly reproducible.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_s(&self) -> f64 {
        0.0
    }
}

/// Every trip at its earliest departure, in ascending order of it, on the
/// route with the shortest own travel time given the trips already placed.
pub fn build_rduo(instance: &Instance) -> Solution {
    let mut engine = Engine::empty(instance);
    let mut order: Vec<TripId> = instance.trip_ids().collect();
    order.sort_by(|&a, &b| {
        instance
            .trip(a)
            .earliest_departure_s
            .total_cmp(&instance.trip(b).earliest_departure_s)
            .then(a.cmp(&b))
    });
    for r in order {
        let t = instance.trip(r);
        let e = t.earliest_departure_s;
        let mut best = (0usize, f64::INFINITY);
        for route in 0..t.routes.len() {
            push(
                &mut engine,
                ChangeRequest::Insert {
                    trip: r,
                    route,
                    start_s: e,
                },
            );
            let travel = engine.schedule().trip(r).expect("inserted").arrival_s() - e;
            if travel < best.1 - EPS {
                best = (route, travel);
            }
            push(&mut engine, ChangeRequest::Remove { trip: r });
        }
        push(
            &mut engine,
            ChangeRequest::Insert {
                trip: r,
                route: best.0,
                start_s: e,
            },
        );
    }
    engine.solution().clone()
}

fn push(engine: &mut Engine<'_>, change: ChangeRequest) {
    match engine.apply(change) {
        Ok(()) | Err(Error::BudgetExceeded { .. }) => {}
        Err(e) => panic!("solver produced an invalid change: {e}"),
    }
}

/// Controlled trips keep nothing from `baseline`; baseload trips keep their
/// baseline assignment.
fn baseload_only(instance: &Instance, baseline: &Solution) -> Solution {
    let mut sol = Solution::empty(instance.trip_count());
    for t in instance.trips().iter().filter(|t| !t.controlled) {
        sol.set(t.id, baseline.get(t.id));
    }
    sol
}

/// Inserts controlled trips by ascending latest arrival at their best
/// assignment, then runs local search on those still late.
///
/// Baseload trips are fixed to their assignment in `baseline`.
pub fn greedy_assignment(instance: &Instance, baseline: &Solution, ctx: &MoveContext) -> Solution {
    let mut engine = Engine::new(instance, baseload_only(instance, baseline))
        .expect("baseline assignments are valid");
    let mut order: Vec<TripId> = instance
        .trips()
        .iter()
        .filter(|t| t.controlled)
        .map(|t| t.id)
        .collect();
    order.sort_by(|&a, &b| {
        instance
            .trip(a)
            .latest_arrival_s
            .total_cmp(&instance.trip(b).latest_arrival_s)
            .then(a.cmp(&b))
    });
    for r in order {
        best_assignment(&mut engine, r, ctx);
    }
    engine.repair();
    let late: Vec<TripId> = check_feasibility(instance, engine.schedule())
        .into_iter()
        .filter(|&r| instance.trip(r).controlled)
        .collect();
    if !late.is_empty() {
        local_search(&mut engine, &late, ctx);
    }
    engine.solution().clone()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LnsParams {
    /// Share of controlled trips in the removal pool.
    pub pool_fraction: f64,
    /// Share of the pool removed per destroy step.
    pub sample_fraction: f64,
    /// Fruitless destroy cycles before local search.
    pub max_cycles: usize,
    /// Consecutive sweeps without an accepted move before the search stops.
    pub max_idle_sweeps: usize,
    pub time_limit_s: Option<f64>,
    /// Cap on destroy-and-reinsert attempts.
    pub max_iterations: Option<usize>,
    pub seed: u64,
    pub mode: OperatorMode,
    pub alpha_initial: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Consecutive feasible (infeasible) insert calls before alpha is
    /// divided (multiplied) by ten.
    pub alpha_streak: usize,
    /// Restrict start times to a grid of this step.
    pub grid_step: Option<f64>,
}

impl Default for LnsParams {
    fn default() -> Self {
        LnsParams {
            pool_fraction: 0.4,
            sample_fraction: 0.1,
            max_cycles: 2,
            max_idle_sweeps: 1,
            time_limit_s: None,
            max_iterations: None,
            seed: 0,
            mode: OperatorMode::Integ,
            alpha_initial: 10.0,
            alpha_min: 0.01,
            alpha_max: 1000.0,
            alpha_streak: 10,
            grid_step: None,
        }
    }
}

impl LnsParams {
    /// Larger pool and more cycles, for staggering-only benchmarks.
    pub fn stag_benchmark() -> Self {
        LnsParams {
            pool_fraction: 0.5,
            sample_fraction: 0.1,
            max_cycles: 25,
            mode: OperatorMode::Stag,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |v: f64| v > 0.0 && v <= 1.0;
        if !frac(self.pool_fraction) || !frac(self.sample_fraction) {
            return Err(Error::InvalidParameter(
                "pool and sample fractions must lie in (0, 1]".into(),
            ));
        }
        if self.max_cycles == 0 || self.max_idle_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "max_cycles and max_idle_sweeps must be at least 1".into(),
            ));
        }
        if !(0.01 <= self.alpha_min && self.alpha_min <= self.alpha_max && self.alpha_max <= 1000.0)
        {
            return Err(Error::InvalidParameter(
                "alpha bounds must satisfy 0.01 <= min <= max <= 1000".into(),
            ));
        }
        if !(self.alpha_min <= self.alpha_initial && self.alpha_initial <= self.alpha_max) {
            return Err(Error::InvalidParameter(
                "alpha_initial must lie within the alpha bounds".into(),
            ));
        }
        if self.alpha_streak == 0 {
            return Err(Error::InvalidParameter(
                "alpha_streak must be at least 1".into(),
            ));
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidParameter("grid_step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Delay of all trips.
    #[default]
    Welfare,
    /// Delay of controlled trips only.
    Fleet,
}

/// Mixed traffic: which trips the operator controls and whose delay counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlScenario {
    pub control_fraction: f64,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for ControlScenario {
    fn default() -> Self {
        ControlScenario {
            control_fraction: 1.0,
            objective: Objective::Welfare,
            seed: 0,
        }
    }
}

impl ControlScenario {
    pub fn scope(&self) -> ObjectiveScope {
        match self.objective {
            Objective::Welfare => ObjectiveScope::System,
            Objective::Fleet => ObjectiveScope::Fleet,
        }
    }

    /// Copy of `instance` where `round(control_fraction * n)` trips, drawn
    /// uniformly without replacement, are controlled.
    pub fn designate(&self, instance: &Instance) -> Result<Instance> {
        if !(0.0..=1.0).contains(&self.control_fraction) {
            return Err(Error::InvalidParameter(
                "control_fraction must lie in [0, 1]".into(),
            ));
        }
        let n = instance.trip_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let take = libm::round(self.control_fraction * n as f64) as usize;
        let mut flags = vec![false; n];
        for &i in &order[..take] {
            flags[i] = true;
        }
        instance.with_control(&flags)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogOperator {
    Init,
    CostlyTrips,
    UntouchedTrips,
    LocalSearch,
}

/// One incumbent of a search run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t_s: f64,
    pub cost: f64,
    pub total_delay: f64,
    pub congestion: f64,
    pub detour: f64,
    pub infeasibility: f64,
    pub alpha: f64,
    pub operator: LogOperator,
}

impl LogRecord {
    fn new(t_s: f64, c: &CostBreakdown, operator: LogOperator) -> Self {
        LogRecord {
            t_s,
            cost: c.cost,
            total_delay: c.total_delay_s,
            congestion: c.congestion_delay_s,
            detour: c.detour_delay_s,
            infeasibility: c.infeasibility_s,
            alpha: c.alpha,
            operator,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LnsOutcome {
    /// Best solution found, judged at `alpha_initial`.
    pub solution: Solution,
    /// Its cost at `alpha_initial`.
    pub cost: CostBreakdown,
    pub log: Vec<LogRecord>,
    /// Alpha after every insert call.
    pub alpha_trajectory: Vec<f64>,
    pub iterations: usize,
    pub timed_out: bool,
    pub stats: EngineStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Destroy {
    CostlyTrips,
    UntouchedTrips,
}

struct Alpha {
    value: f64,
    min: f64,
    max: f64,
    streak: usize,
    feasible_run: usize,
    infeasible_run: usize,
}

impl Alpha {
    fn record(&mut self, feasible: bool) {
        if feasible {
            self.feasible_run += 1;
            self.infeasible_run = 0;
            if self.feasible_run >= self.streak {
                self.value = (self.value / 10.0).max(self.min);
                self.feasible_run = 0;
            }
        } else {
            self.infeasible_run += 1;
            self.feasible_run = 0;
            if self.infeasible_run >= self.streak {
                self.value = (self.value * 10.0).min(self.max);
                self.infeasible_run = 0;
            }
        }
    }
}

struct Search<'a, 'c> {
    instance: &'a Instance,
    engine: Engine<'a>,
    ctx: MoveContext,
    params: &'c LnsParams,
    clock: &'c dyn Clock,
    rng: ChaCha8Rng,
    alpha: Alpha,
    controlled: Vec<TripId>,
    log: Vec<LogRecord>,
    alpha_trajectory: Vec<f64>,
    best: Solution,
    best_cost: CostBreakdown,
    iterations: usize,
    timed_out: bool,
    /// Per-trip (delay, lateness) at the last local search.
    seen: Option<Vec<(f64, f64)>>,
}

impl<'a> Search<'a, '_> {
    fn cost(&self) -> CostBreakdown {
        self.engine.cost(self.ctx.alpha, self.ctx.scope)
    }

    fn out_of_budget(&mut self) -> bool {
        let over_time = self
            .params
            .time_limit_s
            .is_some_and(|l| self.clock.elapsed_s() >= l);
        let over_iter = self
            .params
            .max_iterations
            .is_some_and(|m| self.iterations >= m);
        if over_time {
            self.timed_out = true;
        }
        over_time || over_iter
    }

    /// Accepts the engine state when it beats both the incumbent cost `prev`
    /// and the last logged cost.
    fn try_accept(&mut self, prev: f64, op: LogOperator) -> bool {
        let c = self.cost();
        let last = self.log.last().map_or(f64::INFINITY, |r| r.cost);
        if !(c.cost < prev - EPS && c.cost < last - EPS) {
            return false;
        }
        self.log
            .push(LogRecord::new(self.clock.elapsed_s(), &c, op));
        let at_ref = c.at_alpha(self.params.alpha_initial);
        if at_ref.cost < self.best_cost.cost - EPS {
            self.best = self.engine.solution().clone();
            self.best_cost = at_ref;
        }
        true
    }

    fn pool(&self, op: Destroy) -> Vec<TripId> {
        let inst = self.instance;
        let sched = self.engine.schedule();
        let sol = self.engine.solution();
        let mut ranked = self.controlled.clone();
        match op {
            Destroy::CostlyTrips => {
                let cost = |r: TripId| {
                    sched
                        .trip(r)
                        .map_or(0.0, |ts| trip_cost(inst, r, ts).weighted(self.ctx.alpha))
                };
                ranked.sort_by(|&a, &b| cost(b).total_cmp(&cost(a)).then(a.cmp(&b)));
            }
            Destroy::UntouchedTrips => {
                let key = |r: TripId| {
                    let a = sol.get(r).expect("controlled trips are scheduled");
                    (a.route != 0, a.start_s)
                };
                ranked.sort_by(|&a, &b| {
                    let (ka, kb) = (key(a), key(b));
                    ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
                });
            }
        }
        let n = libm::ceil(self.params.pool_fraction * ranked.len() as f64) as usize;
        let mut pool: Vec<TripId> = ranked[..n.min(ranked.len())].to_vec();
        for r in check_feasibility(inst, sched) {
            if inst.trip(r).controlled && !pool.contains(&r) {
                pool.push(r);
            }
        }
        pool
    }

    /// One destroy-and-reinsert attempt per insertion order, in shuffled
    /// order, until one is accepted.
    fn destroy_repair(&mut self, pool: &[TripId], op: Destroy) -> bool {
        let k = (libm::round(self.params.sample_fraction * pool.len() as f64) as usize)
            .clamp(1, pool.len());
        let sample: Vec<TripId> = pool.choose_multiple(&mut self.rng, k).copied().collect();
        let mut orders = INSERT_ORDERS;
        orders.shuffle(&mut self.rng);
        let log_op = match op {
            Destroy::CostlyTrips => LogOperator::CostlyTrips,
            Destroy::UntouchedTrips => LogOperator::UntouchedTrips,
        };
        for order in orders {
            if self.out_of_budget() {
                return false;
            }
            let prev = self.cost().cost;
            let snapshot = self.engine.solution().clone();
            let delays = remove(&mut self.engine, &sample);
            insert(&mut self.engine, &sample, &delays, order, &self.ctx);
            self.iterations += 1;
            let feasible = self.cost().is_feasible();
            if self.try_accept(prev, log_op) {
                self.adapt_alpha(feasible);
                return true;
            }
            self.engine.reset(snapshot).expect("snapshot is valid");
            self.adapt_alpha(feasible);
        }
        false
    }

    fn adapt_alpha(&mut self, feasible: bool) {
        self.alpha.record(feasible);
        self.ctx.alpha = self.alpha.value;
        self.alpha_trajectory.push(self.alpha.value);
    }

    fn trip_state(&self) -> Vec<(f64, f64)> {
        let sched = self.engine.schedule();
        self.instance
            .trip_ids()
            .map(|r| {
                sched.trip(r).map_or((0.0, 0.0), |ts| {
                    let c = trip_cost(self.instance, r, ts);
                    (c.delay_s(), c.lateness_s)
                })
            })
            .collect()
    }

    /// Local search on every controlled trip the first time, afterwards only
    /// on trips whose delay or lateness changed since the previous call.
    fn local_search_changed(&mut self) -> bool {
        let now = self.trip_state();
        let trips: Vec<TripId> = match &self.seen {
            None => self.controlled.clone(),
            Some(prev) => self
                .controlled
                .iter()
                .copied()
                .filter(|r| {
                    let (a, b) = (prev[r.index()], now[r.index()]);
                    libm::fabs(a.0 - b.0) > EPS || libm::fabs(a.1 - b.1) > EPS
                })
                .collect(),
        };
        let prev = self.cost().cost;
        let snapshot = self.engine.solution().clone();
        let accepted = !trips.is_empty() && {
            local_search(&mut self.engine, &trips, &self.ctx);
            self.try_accept(prev, LogOperator::LocalSearch)
        };
        if !accepted && self.engine.solution() != &snapshot {
            self.engine.reset(snapshot).expect("snapshot is valid");
        }
        self.seen = Some(self.trip_state());
        accepted
    }

    fn run(&mut self) {
        if self.controlled.is_empty() {
            return;
        }
        let mut idle = 0;
        'sweeps: loop {
            let mut improved = false;
            for op in [Destroy::CostlyTrips, Destroy::UntouchedTrips] {
                'pool: loop {
                    let pool = self.pool(op);
                    let mut fruitless = 0;
                    while fruitless < self.params.max_cycles {
                        if self.out_of_budget() {
                            break 'sweeps;
                        }
                        if self.destroy_repair(&pool, op) {
                            improved = true;
                            continue 'pool;
                        }
                        fruitless += 1;
                    }
                    break;
                }
                if self.out_of_budget() {
                    break 'sweeps;
                }
                if self.local_search_changed() {
                    improved = true;
                }
            }
            idle = if improved { 0 } else { idle + 1 };
            if idle >= self.params.max_idle_sweeps {
                break;
            }
        }
    }
}

/// Context for the operators of `mode`, pinning STAG routes to `rduo`.
pub fn move_context(params: &LnsParams, scope: ObjectiveScope, rduo: &Solution) -> MoveContext {
    MoveContext {
        mode: params.mode,
        alpha: params.alpha_initial,
        scope,
        grid_step: params.grid_step,
        pinned_routes: rduo
            .assignments()
            .iter()
            .map(|a| a.map_or(0, |a| a.route))
            .collect(),
    }
}

/// Large neighborhood search from the cheaper of RDUO and greedy.
///
/// Baseload trips keep their RDUO assignment throughout.
pub fn lns(
    instance: &Instance,
    params: &LnsParams,
    scope: ObjectiveScope,
    clock: &dyn Clock,
) -> Result<LnsOutcome> {
    params.validate()?;
    let rduo = build_rduo(instance);
    let ctx = move_context(params, scope, &rduo);
    let greedy = greedy_assignment(instance, &rduo, &ctx);
    lns_from(instance, params, scope, clock, &rduo, &greedy)
}

/// [`lns`] with precomputed RDUO and greedy solutions.
pub fn lns_from(
    instance: &Instance,
    params: &LnsParams,
    scope: ObjectiveScope,
    clock: &dyn Clock,
    rduo: &Solution,
    greedy: &Solution,
) -> Result<LnsOutcome> {
    params.validate()?;
    let ctx = move_context(params, scope, rduo);
    let c_rduo = evaluate(
        instance,
        &construct_schedule(instance, rduo),
        ctx.alpha,
        scope,
    );
    let c_greedy = evaluate(
        instance,
        &construct_schedule(instance, greedy),
        ctx.alpha,
        scope,
    );
    let init = if c_greedy.cost < c_rduo.cost {
        greedy.clone()
    } else {
        rduo.clone()
    };
    let engine = Engine::new(instance, init.clone())?;
    let init_cost = engine.cost(ctx.alpha, scope);
    let mut search = Search {
        instance,
        engine,
        ctx,
        params,
        clock,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        alpha: Alpha {
            value: params.alpha_initial,
            min: params.alpha_min,
            max: params.alpha_max,
            streak: params.alpha_streak,
            feasible_run: 0,
            infeasible_run: 0,
        },
        controlled: instance
            .trips()
            .iter()
            .filter(|t| t.controlled)
            .map(|t| t.id)
            .collect(),
        log: vec![LogRecord::new(
            clock.elapsed_s(),
            &init_cost,
            LogOperator::Init,
        )],
        alpha_trajectory: Vec::new(),
        best: init,
        best_cost: init_cost,
        iterations: 0,
        timed_out: false,
        seen: None,
    };
    search.run();
    Ok(LnsOutcome {
        solution: search.best,
        cost: search.best_cost,
        log: search.log,
        alpha_trajectory: search.alpha_trajectory,
        iterations: search.iterations,
        timed_out: search.timed_out,
        stats: search.engine.stats(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Rduo,
    Greedy,
    Stag,
    Bal,
    Integ,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Rduo,
        Variant::Greedy,
        Variant::Stag,
        Variant::Bal,
        Variant::Integ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rduo => "rduo",
            Variant::Greedy => "greedy",
            Variant::Stag => "stag",
            Variant::Bal => "bal",
            Variant::Integ => "integ",
        }
    }

    pub fn mode(self) -> Option<OperatorMode> {
        match self {
            Variant::Stag => Some(OperatorMode::Stag),
            Variant::Bal => Some(OperatorMode::Bal),
            Variant::Integ => Some(OperatorMode::Integ),
            Variant::Rduo | Variant::Greedy => None,
        }
    }
}

impl core::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant {s:?}")))
    }
}

/// Per-trip comparison against the RDUO schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripDelta {
    pub trip: TripId,
    pub route: usize,
    pub rduo_route: usize,
    pub stagger_s: f64,
    pub travel_time_delta_s: f64,
    pub arrival_delta_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantRun {
    pub variant: Variant,
    pub solution: Solution,
    pub schedule: Schedule,
    /// Cost at `alpha_initial` under the scenario's scope.
    pub cost: CostBreakdown,
    pub log: Vec<LogRecord>,
    pub alpha_trajectory: Vec<f64>,
    pub trip_deltas: Vec<TripDelta>,
    /// Total delay accumulated on each arc.
    pub arc_delay_s: Vec<f64>,
    pub timed_out: bool,
}

/// Runs one solver variant and collects its metrics.
pub fn run_variant(
    instance: &Instance,
    variant: Variant,
    params: &LnsParams,
    scope: ObjectiveScope,
    clock: &dyn Clock,
) -> Result<VariantRun> {
    params.validate()?;
    let rduo = build_rduo(instance);
    let (solution, log, alpha_trajectory, timed_out) = match variant.mode() {
        None if variant == Variant::Rduo => (rduo.clone(), Vec::new(), Vec::new(), false),
        None => {
            let ctx = move_context(params, scope, &rduo);
            (
                greedy_assignment(instance, &rduo, &ctx),
                Vec::new(),
                Vec::new(),
                false,
            )
        }
        Some(mode) => {
            let p = LnsParams {
                mode,
                ..params.clone()
            };
            let ctx = move_context(&p, scope, &rduo);
            let greedy = greedy_assignment(instance, &rduo, &ctx);
            let out = lns_from(instance, &p, scope, clock, &rduo, &greedy)?;
            (out.solution, out.log, out.alpha_trajectory, out.timed_out)
        }
    };
    let schedule = construct_schedule(instance, &solution);
    let cost = evaluate(instance, &schedule, params.alpha_initial, scope);
    let base = construct_schedule(instance, &rduo);
    let trip_deltas = schedule
        .iter()
        .map(|(r, ts)| {
            let b = base.trip(r).expect("RDUO schedules every trip");
            TripDelta {
                trip: r,
                route: ts.route,
                rduo_route: b.route,
                stagger_s: ts.start_s() - instance.trip(r).earliest_departure_s,
                travel_time_delta_s: (ts.arrival_s() - ts.start_s())
                    - (b.arrival_s() - b.start_s()),
                arrival_delta_s: ts.arrival_s() - b.arrival_s(),
            }
        })
        .collect();
    let mut arc_delay_s = vec![0.0; instance.network().arc_count()];
    for (_, ts) in schedule.iter() {
        for leg in &ts.legs {
            arc_delay_s[leg.arc.index()] += leg.delay_s;
        }
    }
    Ok(VariantRun {
        variant,
        solution,
        schedule,
        cost,
        log,
        alpha_trajectory,
        trip_deltas,
        arc_delay_s,
        timed_out,
    })
}
