//! Solutions, schedules and cost evaluation.
//!
//! A [`Solution`] fixes a route and a start time per trip. The [`Schedule`]
//! it induces is computed by an event sweep over arc entries: every time a
//! trip enters an arc, the trips still on that arc define its flow, the flow
//! defines its delay, and its exit time becomes the entry time of its next
//! arc. Delay is fixed at entry.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, TripId};
use crate::network::ArcId;
use crate::time::EPS;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub route: usize,
    pub start_s: f64,
}

/// Route and start time per trip; `None` marks a trip that is not scheduled.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Solution {
    assignments: Vec<Option<Assignment>>,
}

impl Solution {
    pub fn empty(trip_count: usize) -> Self {
        Solution {
            assignments: vec![None; trip_count],
        }
    }

    pub fn from_assignments(assignments: Vec<Option<Assignment>>) -> Self {
        Solution { assignments }
    }

    /// Every trip on its shortest route at its earliest departure.
    pub fn earliest_shortest(instance: &Instance) -> Self {
        Solution {
            assignments: instance
                .trips()
                .iter()
                .map(|t| {
                    Some(Assignment {
                        route: 0,
                        start_s: t.earliest_departure_s,
                    })
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    #[inline]
    pub fn get(&self, trip: TripId) -> Option<Assignment> {
        self.assignments[trip.index()]
    }

    #[inline]
    pub fn set(&mut self, trip: TripId, assignment: Option<Assignment>) {
        self.assignments[trip.index()] = assignment;
    }

    pub fn assignments(&self) -> &[Option<Assignment>] {
        &self.assignments
    }

    pub fn present(&self) -> impl Iterator<Item = (TripId, Assignment)> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|a| (TripId(i as u32), a)))
    }

    pub fn present_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_some()).count()
    }

    /// Checks start windows and route indices against `instance`.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.assignments.len() != instance.trip_count() {
            return Err(Error::InvalidParameter(alloc::format!(
                "solution has {} entries for {} trips",
                self.assignments.len(),
                instance.trip_count()
            )));
        }
        for (id, a) in self.present() {
            let trip = instance.trip(id);
            if a.route >= trip.routes.len() {
                return Err(Error::InvalidTrip {
                    trip: id.0,
                    reason: alloc::format!("route index {} out of range", a.route),
                });
            }
            if !trip.admits_start(a.start_s) {
                return Err(Error::InvalidTrip {
                    trip: id.0,
                    reason: alloc::format!("start {} outside the staggering window", a.start_s),
                });
            }
        }
        Ok(())
    }
}

/// Traversal of one arc by one trip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub arc: ArcId,
    pub departure_s: f64,
    pub arrival_s: f64,
    /// Trips on the arc at entry.
    pub flow: u32,
    pub delay_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripSchedule {
    pub route: usize,
    pub legs: Vec<Leg>,
}

impl TripSchedule {
    #[inline]
    pub fn start_s(&self) -> f64 {
        self.legs[0].departure_s
    }

    /// Arrival at the destination.
    #[inline]
    pub fn arrival_s(&self) -> f64 {
        self.legs[self.legs.len() - 1].arrival_s
    }

    pub fn congestion_s(&self) -> f64 {
        self.legs.iter().map(|l| l.delay_s).sum()
    }
}

/// Arc entry and exit times of every scheduled trip.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Schedule {
    trips: Vec<Option<TripSchedule>>,
}

impl Schedule {
    pub fn empty(trip_count: usize) -> Self {
        Schedule {
            trips: vec![None; trip_count],
        }
    }

    #[inline]
    pub fn trip(&self, id: TripId) -> Option<&TripSchedule> {
        self.trips[id.index()].as_ref()
    }

    #[inline]
    pub(crate) fn trip_mut(&mut self, id: TripId) -> &mut Option<TripSchedule> {
        &mut self.trips[id.index()]
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TripId, &TripSchedule)> + '_ {
        self.trips
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.as_ref().map(|t| (TripId(i as u32), t)))
    }

    /// Largest absolute difference over all leg times, or infinity when the
    /// two schedules do not cover the same trips and arcs.
    pub fn max_time_diff(&self, other: &Schedule) -> f64 {
        if self.trips.len() != other.trips.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.trips.iter().zip(&other.trips) {
            match (a, b) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    if a.route != b.route || a.legs.len() != b.legs.len() {
                        return f64::INFINITY;
                    }
                    for (la, lb) in a.legs.iter().zip(&b.legs) {
                        if la.arc != lb.arc {
                            return f64::INFINITY;
                        }
                        worst = worst
                            .max(libm::fabs(la.departure_s - lb.departure_s))
                            .max(libm::fabs(la.arrival_s - lb.arrival_s));
                    }
                }
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Event {
    time: f64,
    trip: TripId,
    arc: ArcId,
    pos: usize,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.trip.cmp(&other.trip))
            .then(self.arc.cmp(&other.arc))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Exit(f64);

impl Eq for Exit {}

impl PartialOrd for Exit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Builds the schedule of `solution` from scratch.
///
/// Entries are processed in `(time, trip id, arc id)` order. The flow seen by
/// an entering trip is the number of earlier entrants on the arc that have
/// not left it yet.
///
/// # Panics
///
/// If a route index is out of range; call [`Solution::validate`] on
/// untrusted input.
pub fn construct_schedule(instance: &Instance, solution: &Solution) -> Schedule {
    let network = instance.network();
    let mut schedule = Schedule::empty(instance.trip_count());
    let mut queue = BinaryHeap::new();
    for (id, a) in solution.present() {
        let route = instance.trip(id).route(a.route);
        let legs = route
            .arcs()
            .iter()
            .map(|&arc| Leg {
                arc,
                departure_s: f64::NAN,
                arrival_s: f64::NAN,
                flow: 0,
                delay_s: 0.0,
            })
            .collect();
        *schedule.trip_mut(id) = Some(TripSchedule {
            route: a.route,
            legs,
        });
        queue.push(Reverse(Event {
            time: a.start_s,
            trip: id,
            arc: route.arcs()[0],
            pos: 0,
        }));
    }

    // Exit times of trips that entered each arc, earliest first.
    let mut on_arc: Vec<BinaryHeap<Reverse<Exit>>> = vec![BinaryHeap::new(); network.arc_count()];
    let mut last = f64::NEG_INFINITY;
    while let Some(Reverse(ev)) = queue.pop() {
        debug_assert!(ev.time >= last, "event queue out of order");
        last = ev.time;
        let occupants = &mut on_arc[ev.arc.index()];
        while occupants
            .peek()
            .is_some_and(|Reverse(Exit(w))| *w <= ev.time + EPS)
        {
            occupants.pop();
        }
        let flow = occupants.len() as u32;
        let delay = instance.delay_fn(ev.arc).delay(flow);
        let arrival = ev.time + network.arc(ev.arc).nominal_s + delay;
        occupants.push(Reverse(Exit(arrival)));

        let ts = schedule.trip_mut(ev.trip).as_mut().expect("scheduled trip");
        ts.legs[ev.pos] = Leg {
            arc: ev.arc,
            departure_s: ev.time,
            arrival_s: arrival,
            flow,
            delay_s: delay,
        };
        if ev.pos + 1 < ts.legs.len() {
            let next = ts.legs[ev.pos + 1].arc;
            queue.push(Reverse(Event {
                time: arrival,
                trip: ev.trip,
                arc: next,
                pos: ev.pos + 1,
            }));
        }
    }
    schedule
}

/// Whose delay the objective counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveScope {
    /// Every trip (welfare objective).
    #[default]
    System,
    /// Controlled trips only; baseload trips still congest the network.
    Fleet,
}

impl ObjectiveScope {
    #[inline]
    pub fn includes(self, instance: &Instance, trip: TripId) -> bool {
        match self {
            ObjectiveScope::System => true,
            ObjectiveScope::Fleet => instance.trip(trip).controlled,
        }
    }
}

/// Delay and lateness of a single trip.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TripCost {
    pub congestion_s: f64,
    pub detour_s: f64,
    pub lateness_s: f64,
}

impl TripCost {
    #[inline]
    pub fn delay_s(&self) -> f64 {
        self.congestion_s + self.detour_s
    }

    /// Congestion plus detour plus weighted lateness.
    #[inline]
    pub fn weighted(&self, alpha: f64) -> f64 {
        self.delay_s() + alpha * self.lateness_s
    }
}

/// Cost of one scheduled trip.
pub fn trip_cost(instance: &Instance, trip: TripId, ts: &TripSchedule) -> TripCost {
    let t = instance.trip(trip);
    let travel = ts.arrival_s() - ts.start_s();
    let chosen_ff = t.route(ts.route).free_flow_s();
    let detour = (chosen_ff - t.reference_free_flow_s()).max(0.0);
    // Equals `travel - chosen_ff` up to rounding, and is exactly zero in free flow.
    let congestion: f64 = ts.legs.iter().map(|l| l.delay_s).sum();
    debug_assert!(libm::fabs(congestion - (travel - chosen_ff)) <= 1e-6 * (1.0 + travel));
    let lateness = (ts.arrival_s() - t.latest_arrival_s).max(0.0);
    TripCost {
        congestion_s: congestion,
        detour_s: detour,
        lateness_s: if lateness > EPS { lateness } else { 0.0 },
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total_delay_s: f64,
    pub congestion_delay_s: f64,
    pub detour_delay_s: f64,
    pub infeasibility_s: f64,
    pub alpha: f64,
    pub cost: f64,
}

impl CostBreakdown {
    pub fn from_parts(congestion: f64, detour: f64, infeasibility: f64, alpha: f64) -> Self {
        let total = congestion + detour;
        CostBreakdown {
            total_delay_s: total,
            congestion_delay_s: congestion,
            detour_delay_s: detour,
            infeasibility_s: infeasibility,
            alpha,
            cost: total + alpha * infeasibility,
        }
    }

    /// Same delays re-weighted with a different infeasibility weight.
    pub fn at_alpha(&self, alpha: f64) -> Self {
        Self::from_parts(
            self.congestion_delay_s,
            self.detour_delay_s,
            self.infeasibility_s,
            alpha,
        )
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasibility_s <= EPS
    }
}

/// Sums trip costs over the trips in `scope`.
pub fn evaluate(
    instance: &Instance,
    schedule: &Schedule,
    alpha: f64,
    scope: ObjectiveScope,
) -> CostBreakdown {
    let (mut congestion, mut detour, mut late) = (0.0, 0.0, 0.0);
    for (id, ts) in schedule.iter() {
        if !scope.includes(instance, id) {
            continue;
        }
        let c = trip_cost(instance, id, ts);
        congestion += c.congestion_s;
        detour += c.detour_s;
        late += c.lateness_s;
    }
    CostBreakdown::from_parts(congestion, detour, late, alpha)
}

/// Builds the schedule of `solution` and evaluates it.
pub fn evaluate_solution(
    instance: &Instance,
    solution: &Solution,
    alpha: f64,
    scope: ObjectiveScope,
) -> (Schedule, CostBreakdown) {
    let schedule = construct_schedule(instance, solution);
    let cost = evaluate(instance, &schedule, alpha, scope);
    (schedule, cost)
}

/// Trips arriving after their latest arrival time (beyond [`EPS`]).
pub fn check_feasibility(instance: &Instance, schedule: &Schedule) -> Vec<TripId> {
    schedule
        .iter()
        .filter(|(id, ts)| ts.arrival_s() > instance.trip(*id).latest_arrival_s + EPS)
        .map(|(id, _)| id)
        .collect()
}
