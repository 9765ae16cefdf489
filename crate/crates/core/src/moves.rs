//! The routing operator and the insert, remove and local-search operators.
//!
//! All operators work on an [`Engine`]. Candidate moves are evaluated by
//! applying them incrementally and undoing them the same way; every operator
//! ends with a full repair.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::incremental::{ChangeRequest, Engine};
use crate::instance::TripId;
use crate::schedule::{trip_cost, CostBreakdown, ObjectiveScope};
use crate::time::{conflicts, precedes, EPS};

/// Which decision dimensions the operators may change.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// Routes and start times.
    #[default]
    Integ,
    /// Start times only; each trip keeps its pinned route.
    Stag,
    /// Routes only; every trip starts at its earliest departure.
    Bal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertOrder {
    /// Ascending earliest departure.
    Earliest,
    /// Ascending latest arrival.
    Deadline,
    /// Descending delay recorded when the trip was removed.
    Delay,
}

pub const INSERT_ORDERS: [InsertOrder; 3] = [
    InsertOrder::Earliest,
    InsertOrder::Deadline,
    InsertOrder::Delay,
];

/// Settings shared by all operators of one solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveContext {
    pub mode: OperatorMode,
    pub alpha: f64,
    pub scope: ObjectiveScope,
    /// When set, start times are restricted to `e + k * step`, plus the end
    /// of the window.
    pub grid_step: Option<f64>,
    /// Route of each trip under [`OperatorMode::Stag`]. Missing entries fall
    /// back to the current route, then to route 0.
    pub pinned_routes: Vec<usize>,
}

impl Default for MoveContext {
    fn default() -> Self {
        MoveContext {
            mode: OperatorMode::Integ,
            alpha: 10.0,
            scope: ObjectiveScope::System,
            grid_step: None,
            pinned_routes: Vec::new(),
        }
    }
}

impl MoveContext {
    fn cost(&self, engine: &Engine<'_>) -> CostBreakdown {
        engine.cost(self.alpha, self.scope)
    }

    /// Rounds `start` up to the next grid point of `trip`'s window.
    pub fn snap(&self, engine: &Engine<'_>, trip: TripId, start: f64) -> f64 {
        let t = engine.instance().trip(trip);
        let hi = t.latest_start_s();
        let s = start.clamp(t.earliest_departure_s, hi);
        match self.grid_step {
            None => s,
            Some(step) => {
                let k = libm::ceil((s - t.earliest_departure_s) / step - 1e-9).max(0.0);
                (t.earliest_departure_s + k * step).min(hi)
            }
        }
    }
}

/// Outcome of [`best_assignment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveCandidate {
    pub trip: TripId,
    pub route: usize,
    pub start_s: f64,
    /// Sum of the predicted net conflict gains of the accepted start shifts.
    pub gain: i64,
    pub cost: CostBreakdown,
}

/// Start time that lets the arc's immediate predecessor leave before `trip`
/// enters, clamped to the window. Unchanged when there is no conflict.
pub fn resolve_conflict_shift(engine: &Engine<'_>, trip: TripId, pos: usize) -> f64 {
    let t = engine.instance().trip(trip);
    let s = engine
        .solution()
        .get(trip)
        .expect("trip is scheduled")
        .start_s;
    let leg = engine
        .schedule()
        .trip(trip)
        .expect("trip is scheduled")
        .legs[pos];
    let idx = engine
        .index()
        .insertion_point(leg.arc, leg.departure_s, trip);
    if idx == 0 {
        return s;
    }
    let pred = engine.index().inactive(leg.arc)[idx - 1];
    if leg.departure_s < pred.arr - EPS {
        (s + pred.arr - leg.departure_s).min(t.latest_start_s())
    } else {
        s
    }
}

/// Conflicts on the arc at `pos` that moving `trip` to `start` resolves,
/// minus the ones it creates.
///
/// Upstream delays are assumed unchanged, so the entry moves by exactly the
/// start shift; only the delay on this arc is re-estimated.
pub fn net_conflict_gain(engine: &Engine<'_>, trip: TripId, pos: usize, start: f64) -> i64 {
    let s = engine
        .solution()
        .get(trip)
        .expect("trip is scheduled")
        .start_s;
    let leg = engine
        .schedule()
        .trip(trip)
        .expect("trip is scheduled")
        .legs[pos];
    let labels = engine.index().inactive(leg.arc);
    let dep = leg.departure_s + (start - s);

    let mut old_succ = 0i64;
    let mut new_pred = 0u32;
    for l in labels.iter().filter(|l| l.trip != trip) {
        if conflicts(leg.departure_s, leg.arrival_s, trip, l.dep, l.trip) {
            old_succ += 1;
        }
        if conflicts(l.dep, l.arr, l.trip, dep, trip) {
            new_pred += 1;
        }
    }
    let arr = dep
        + engine.instance().network().arc(leg.arc).nominal_s
        + engine.instance().delay_fn(leg.arc).delay(new_pred);
    let new_succ = labels
        .iter()
        .filter(|l| l.trip != trip && conflicts(dep, arr, trip, l.dep, l.trip))
        .count() as i64;
    (i64::from(leg.flow) + old_succ) - (i64::from(new_pred) + new_succ)
}

/// Earliest start that keeps every arc entry after the exits of the trips
/// that entered the arc before it.
///
/// Arcs without earlier entrants impose no bound; arcs where `trip` already
/// overlaps an earlier entrant forbid any forward shift.
pub fn trim_forward_shift(engine: &Engine<'_>, trip: TripId) -> f64 {
    let t = engine.instance().trip(trip);
    let s = engine
        .solution()
        .get(trip)
        .expect("trip is scheduled")
        .start_s;
    let mut slack = f64::INFINITY;
    for leg in &engine
        .schedule()
        .trip(trip)
        .expect("trip is scheduled")
        .legs
    {
        let labels = engine.index().inactive(leg.arc);
        let preds = labels
            .iter()
            .take_while(|l| precedes(l.dep, l.trip, leg.departure_s, trip));
        let latest = preds
            .map(|l| l.arr.max(l.dep))
            .fold(f64::NEG_INFINITY, f64::max);
        if latest.is_finite() {
            slack = slack.min((leg.departure_s - latest).max(0.0));
        }
    }
    if slack.is_infinite() {
        t.earliest_departure_s
    } else {
        (s - slack).max(t.earliest_departure_s)
    }
}

fn apply(engine: &mut Engine<'_>, change: ChangeRequest) {
    match engine.apply(change) {
        // The engine has rebuilt itself from the updated solution.
        Ok(()) | Err(crate::Error::BudgetExceeded { .. }) => {}
        Err(e) => panic!("operator produced an invalid change: {e}"),
    }
}

fn route_for(engine: &Engine<'_>, ctx: &MoveContext, trip: TripId) -> usize {
    ctx.pinned_routes
        .get(trip.index())
        .copied()
        .or_else(|| engine.solution().get(trip).map(|a| a.route))
        .unwrap_or(0)
}

/// Staggering search on one route for an inserted `trip`.
///
/// Repeatedly tries the start shift of the arc with the highest predicted
/// gain and keeps it if the cost drops, then tries a forward trim.
fn search_start(
    engine: &mut Engine<'_>,
    ctx: &MoveContext,
    trip: TripId,
    cost: &mut CostBreakdown,
) -> i64 {
    let len = engine.schedule().trip(trip).expect("inserted").legs.len();
    let mut gain_sum = 0;
    let mut s = engine.solution().get(trip).expect("inserted").start_s;
    for _ in 0..len * 10 {
        let mut best: Option<(i64, f64)> = None;
        for pos in 0..len {
            let cand = ctx.snap(engine, trip, resolve_conflict_shift(engine, trip, pos));
            if cand <= s + EPS {
                continue;
            }
            let g = net_conflict_gain(engine, trip, pos, cand);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, cand));
            }
        }
        let Some((g, cand)) = best else { break };
        apply(
            engine,
            ChangeRequest::Stagger {
                trip,
                start_s: cand,
            },
        );
        let c = ctx.cost(engine);
        if c.cost < cost.cost - EPS {
            *cost = c;
            s = cand;
            gain_sum += g;
        } else {
            apply(engine, ChangeRequest::Stagger { trip, start_s: s });
            break;
        }
    }
    let trimmed = ctx.snap(engine, trip, trim_forward_shift(engine, trip));
    if trimmed < s - EPS {
        apply(
            engine,
            ChangeRequest::Stagger {
                trip,
                start_s: trimmed,
            },
        );
        let c = ctx.cost(engine);
        if c.cost <= cost.cost + EPS {
            *cost = c;
        } else {
            apply(engine, ChangeRequest::Stagger { trip, start_s: s });
        }
    }
    gain_sum
}

/// Lowest-cost route and start for `trip`, which is left scheduled there.
///
/// A scheduled trip keeps its current assignment unless a candidate is
/// strictly cheaper. Does not repair.
pub fn best_assignment(engine: &mut Engine<'_>, trip: TripId, ctx: &MoveContext) -> MoveCandidate {
    let t = engine.instance().trip(trip);
    let e = t.earliest_departure_s;
    let incumbent = engine.solution().get(trip);
    let mut best: Option<MoveCandidate> = incumbent.map(|a| MoveCandidate {
        trip,
        route: a.route,
        start_s: a.start_s,
        gain: 0,
        cost: ctx.cost(engine),
    });
    let routes: Vec<usize> = match ctx.mode {
        OperatorMode::Stag => alloc::vec![route_for(engine, ctx, trip)],
        OperatorMode::Integ | OperatorMode::Bal => (0..t.routes.len()).collect(),
    };
    if incumbent.is_some() {
        apply(engine, ChangeRequest::Remove { trip });
    }
    for route in routes {
        apply(
            engine,
            ChangeRequest::Insert {
                trip,
                route,
                start_s: e,
            },
        );
        let mut cost = ctx.cost(engine);
        let gain = if ctx.mode == OperatorMode::Bal {
            0
        } else {
            search_start(engine, ctx, trip, &mut cost)
        };
        let start_s = engine.solution().get(trip).expect("inserted").start_s;
        if best.is_none_or(|b| cost.cost < b.cost.cost - EPS) {
            best = Some(MoveCandidate {
                trip,
                route,
                start_s,
                gain,
                cost,
            });
        }
        apply(engine, ChangeRequest::Remove { trip });
    }
    let best = best.expect("at least one route");
    apply(
        engine,
        ChangeRequest::Insert {
            trip,
            route: best.route,
            start_s: best.start_s,
        },
    );
    best
}

/// Removes `trips` and repairs. Returns each trip's delay at removal, indexed
/// like `trips`.
pub fn remove(engine: &mut Engine<'_>, trips: &[TripId]) -> Vec<f64> {
    let inst = engine.instance();
    let delays = trips
        .iter()
        .map(|&r| {
            trip_cost(
                inst,
                r,
                engine.schedule().trip(r).expect("trip is scheduled"),
            )
            .delay_s()
        })
        .collect();
    for &r in trips {
        apply(engine, ChangeRequest::Remove { trip: r });
    }
    engine.repair();
    delays
}

/// Inserts absent `trips` one at a time with [`best_assignment`], then
/// repairs. `delays` are the values returned by [`remove`].
pub fn insert(
    engine: &mut Engine<'_>,
    trips: &[TripId],
    delays: &[f64],
    order: InsertOrder,
    ctx: &MoveContext,
) {
    let inst = engine.instance();
    let mut seq: Vec<(TripId, f64)> = trips
        .iter()
        .copied()
        .zip(delays.iter().copied().chain(core::iter::repeat(0.0)))
        .collect();
    match order {
        InsertOrder::Earliest => seq.sort_by(|a, b| {
            inst.trip(a.0)
                .earliest_departure_s
                .total_cmp(&inst.trip(b.0).earliest_departure_s)
                .then(a.0.cmp(&b.0))
        }),
        InsertOrder::Deadline => seq.sort_by(|a, b| {
            inst.trip(a.0)
                .latest_arrival_s
                .total_cmp(&inst.trip(b.0).latest_arrival_s)
                .then(a.0.cmp(&b.0))
        }),
        InsertOrder::Delay => seq.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))),
    }
    for (r, _) in seq {
        best_assignment(engine, r, ctx);
    }
    engine.repair();
}

/// Reassigns each of `trips` (ascending earliest departure) when strictly
/// cheaper. Reverts everything if the repaired cost went up. Returns whether
/// the cost dropped.
pub fn local_search(engine: &mut Engine<'_>, trips: &[TripId], ctx: &MoveContext) -> bool {
    let inst = engine.instance();
    let before = ctx.cost(engine);
    let snapshot = engine.solution().clone();
    let mut seq: Vec<TripId> = trips
        .iter()
        .copied()
        .filter(|&r| engine.solution().get(r).is_some())
        .collect();
    seq.sort_by(|&a, &b| {
        inst.trip(a)
            .earliest_departure_s
            .total_cmp(&inst.trip(b).earliest_departure_s)
            .then(a.cmp(&b))
    });
    for r in seq {
        best_assignment(engine, r, ctx);
    }
    engine.repair();
    let after = ctx.cost(engine);
    if after.cost > before.cost + EPS {
        engine.reset(snapshot).expect("snapshot is valid");
        return false;
    }
    after.cost < before.cost - EPS
}
