//! Incremental schedule updates.
//!
//! Every arc keeps its traversals in two lists: an inactive list sorted by
//! entry order, and an unsorted active list of traversals waiting in the
//! propagation queue. A change seeds the queue; each popped label recomputes
//! one traversal from the current state of the arc, and when the traversal
//! moves, every trip whose conflict status with it flipped is queued again.
//!
//! Propagation stops at a fixed point of the flow equations, which is unique,
//! so a completed update reproduces [`construct_schedule`] exactly. The
//! budget only guards against pathological cycling; hitting it triggers a
//! full rebuild.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::instance::{Instance, TripId};
use crate::network::ArcId;
use crate::schedule::{
    construct_schedule, evaluate, Assignment, CostBreakdown, Leg, ObjectiveScope, Schedule,
    Solution, TripSchedule,
};
use crate::time::{conflicts, precedes, EPS};

/// Entry and exit of one trip on one arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Label {
    pub dep: f64,
    pub arr: f64,
    pub trip: TripId,
}

#[derive(Clone, Debug, Default)]
pub struct ArcTripIndex {
    inactive: Vec<Vec<Label>>,
    active: Vec<Vec<(TripId, usize)>>,
    /// Upper bound on `arr - dep` over every label ever stored on the arc.
    max_occupancy: Vec<f64>,
}

impl ArcTripIndex {
    /// Index of a fully computed schedule; every label is inactive.
    pub fn build(arc_count: usize, schedule: &Schedule) -> Self {
        let mut inactive = vec![Vec::new(); arc_count];
        let mut max_occupancy = vec![0.0f64; arc_count];
        for (trip, ts) in schedule.iter() {
            for leg in &ts.legs {
                inactive[leg.arc.index()].push(Label {
                    dep: leg.departure_s,
                    arr: leg.arrival_s,
                    trip,
                });
                let occ = &mut max_occupancy[leg.arc.index()];
                *occ = occ.max(leg.arrival_s - leg.departure_s);
            }
        }
        for list in &mut inactive {
            list.sort_by(|a, b| a.dep.total_cmp(&b.dep).then(a.trip.cmp(&b.trip)));
        }
        ArcTripIndex {
            inactive,
            active: vec![Vec::new(); arc_count],
            max_occupancy,
        }
    }

    /// Inactive labels of `arc` in entry order. Between updates this is every
    /// traversal of the arc.
    pub fn inactive(&self, arc: ArcId) -> &[Label] {
        &self.inactive[arc.index()]
    }

    /// Queued traversals of `arc` as `(trip, route position)`.
    pub fn active(&self, arc: ArcId) -> &[(TripId, usize)] {
        &self.active[arc.index()]
    }

    /// Number of inactive labels preceding the entry `(dep, trip)`.
    pub fn insertion_point(&self, arc: ArcId, dep: f64, trip: TripId) -> usize {
        self.inactive[arc.index()].partition_point(|l| precedes(l.dep, l.trip, dep, trip))
    }

    fn insert(&mut self, arc: ArcId, label: Label) {
        let pos = self.insertion_point(arc, label.dep, label.trip);
        self.inactive[arc.index()].insert(pos, label);
        let occ = &mut self.max_occupancy[arc.index()];
        *occ = occ.max(label.arr - label.dep);
    }

    fn remove(&mut self, arc: ArcId, dep: f64, trip: TripId) -> Label {
        let pos = self.insertion_point(arc, dep, trip);
        let list = &mut self.inactive[arc.index()];
        debug_assert!(
            pos < list.len() && list[pos].trip == trip,
            "label missing from inactive list"
        );
        list.remove(pos)
    }

    /// Inactive trips entering before `(dep, trip)` that are still on the arc.
    ///
    /// Scans backward from the insertion position and stops once no earlier
    /// label can still occupy the arc, using the arc's occupancy bound.
    pub fn count_inactive(&self, arc: ArcId, dep: f64, trip: TripId) -> u32 {
        let list = &self.inactive[arc.index()];
        let occ = self.max_occupancy[arc.index()];
        let mut count = 0;
        for l in list[..self.insertion_point(arc, dep, trip)].iter().rev() {
            if l.dep + occ <= dep + EPS {
                break;
            }
            if dep < l.arr - EPS {
                count += 1;
            }
        }
        count
    }
}

/// Trips of a sorted label list whose conflict status with `trip` differs
/// between its `old` and `new` `(entry, exit)` interval on the arc.
///
/// The trips that see `trip` form a contiguous run of the list, from the
/// first label `trip` precedes up to the first entry at or after its exit.
/// The result is the symmetric difference of the old and new runs, in list
/// order.
pub fn activation_range(
    labels: &[Label],
    trip: TripId,
    old: Option<(f64, f64)>,
    new: Option<(f64, f64)>,
) -> Vec<TripId> {
    let range = |iv: Option<(f64, f64)>| match iv {
        None => (0, 0),
        Some((dep, arr)) => {
            let i = labels.partition_point(|l| !precedes(dep, trip, l.dep, l.trip));
            let j = labels.partition_point(|l| l.dep < arr - EPS);
            (i, j.max(i))
        }
    };
    let (a, b) = range(old);
    let (c, d) = range(new);
    let lo = a.min(c);
    let hi = b.max(d);
    (lo..hi)
        .filter(|&k| ((a..b).contains(&k)) != ((c..d).contains(&k)))
        .map(|k| labels[k].trip)
        .filter(|&t| t != trip)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChangeRequest {
    Stagger {
        trip: TripId,
        start_s: f64,
    },
    Insert {
        trip: TripId,
        route: usize,
        start_s: f64,
    },
    Reroute {
        trip: TripId,
        route: usize,
        start_s: f64,
    },
    Remove {
        trip: TripId,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub updates: u64,
    pub labels_processed: u64,
    /// Trips queued again because a traversal changed their conflict status.
    pub reenqueued: u64,
    /// Pops earlier than the previous pop of the same update.
    pub non_monotone_pops: u64,
    pub repairs: u64,
    pub budget_hits: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct QLabel {
    time: f64,
    trip: TripId,
    pos: usize,
    version: u32,
}

impl Eq for QLabel {}

impl PartialOrd for QLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.trip.cmp(&other.trip))
            .then(self.pos.cmp(&other.pos))
    }
}

/// A solution, its schedule and the arc index, updated in place.
#[derive(Clone, Debug)]
pub struct Engine<'a> {
    instance: &'a Instance,
    solution: Solution,
    schedule: Schedule,
    index: ArcTripIndex,
    /// Route positions of each trip waiting to be recomputed, ascending.
    pending: Vec<Vec<usize>>,
    version: Vec<u32>,
    queue: BinaryHeap<Reverse<QLabel>>,
    budget: usize,
    stats: EngineStats,
}

impl<'a> Engine<'a> {
    pub fn new(instance: &'a Instance, solution: Solution) -> Result<Self> {
        solution.validate(instance)?;
        let schedule = construct_schedule(instance, &solution);
        let index = ArcTripIndex::build(instance.network().arc_count(), &schedule);
        let n = instance.trip_count();
        let budget = 50 * instance.max_route_len().max(1) * n.max(1);
        Ok(Engine {
            instance,
            solution,
            schedule,
            index,
            pending: vec![Vec::new(); n],
            version: vec![0; n],
            queue: BinaryHeap::new(),
            budget,
            stats: EngineStats::default(),
        })
    }

    /// Engine with no trip scheduled.
    pub fn empty(instance: &'a Instance) -> Self {
        Engine::new(instance, Solution::empty(instance.trip_count()))
            .expect("empty solution is valid")
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn index(&self) -> &ArcTripIndex {
        &self.index
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Label evaluations allowed per update.
    pub fn set_budget(&mut self, budget: usize) {
        self.budget = budget.max(1);
    }

    pub fn cost(&self, alpha: f64, scope: ObjectiveScope) -> CostBreakdown {
        evaluate(self.instance, &self.schedule, alpha, scope)
    }

    /// Rebuilds schedule and index from the solution.
    pub fn repair(&mut self) {
        self.schedule = construct_schedule(self.instance, &self.solution);
        self.index = ArcTripIndex::build(self.instance.network().arc_count(), &self.schedule);
        for p in &mut self.pending {
            p.clear();
        }
        self.queue.clear();
        self.stats.repairs += 1;
    }

    /// Replaces the solution and rebuilds everything from it.
    pub fn reset(&mut self, solution: Solution) -> Result<()> {
        solution.validate(self.instance)?;
        self.solution = solution;
        self.repair();
        Ok(())
    }

    /// Position of `arc` on the current route of `trip`.
    pub fn leg_position(&self, trip: TripId, arc: ArcId) -> Option<usize> {
        self.schedule
            .trip(trip)?
            .legs
            .iter()
            .position(|l| l.arc == arc)
    }

    fn check_change(&self, change: &ChangeRequest) -> Result<()> {
        let (trip, route, start, present) = match *change {
            ChangeRequest::Stagger { trip, start_s } => (trip, None, Some(start_s), true),
            ChangeRequest::Insert {
                trip,
                route,
                start_s,
            } => (trip, Some(route), Some(start_s), false),
            ChangeRequest::Reroute {
                trip,
                route,
                start_s,
            } => (trip, Some(route), Some(start_s), true),
            ChangeRequest::Remove { trip } => (trip, None, None, true),
        };
        if trip.index() >= self.instance.trip_count() {
            return Err(Error::InvalidParameter(format!("unknown trip {trip}")));
        }
        let t = self.instance.trip(trip);
        if self.solution.get(trip).is_some() != present {
            let reason = if present {
                "trip is not scheduled"
            } else {
                "trip is already scheduled"
            };
            return Err(Error::InvalidTrip {
                trip: trip.0,
                reason: reason.into(),
            });
        }
        if let Some(r) = route {
            if r >= t.routes.len() {
                return Err(Error::InvalidTrip {
                    trip: trip.0,
                    reason: format!("route index {r} out of range"),
                });
            }
        }
        if let Some(s) = start {
            if !t.admits_start(s) {
                return Err(Error::InvalidTrip {
                    trip: trip.0,
                    reason: format!("start {s} outside the staggering window"),
                });
            }
        }
        Ok(())
    }

    /// Applies `change` and propagates it.
    ///
    /// On a budget overrun the engine rebuilds itself from the updated
    /// solution before returning the error, so it stays consistent.
    pub fn apply(&mut self, change: ChangeRequest) -> Result<()> {
        self.check_change(&change)?;
        self.stats.updates += 1;
        match change {
            ChangeRequest::Stagger { trip, start_s } => {
                let mut a = self.solution.get(trip).expect("checked");
                if a.start_s == start_s {
                    return Ok(());
                }
                a.start_s = start_s;
                self.solution.set(trip, Some(a));
                self.activate(trip, 0);
            }
            ChangeRequest::Insert {
                trip,
                route,
                start_s,
            } => self.attach(trip, route, start_s),
            ChangeRequest::Reroute {
                trip,
                route,
                start_s,
            } => {
                self.detach(trip);
                self.attach(trip, route, start_s);
            }
            ChangeRequest::Remove { trip } => {
                self.detach(trip);
                self.solution.set(trip, None);
            }
        }
        self.propagate()
    }

    /// Adds `trip` with unknown traversal times; every position is queued.
    fn attach(&mut self, trip: TripId, route: usize, start_s: f64) {
        self.solution.set(trip, Some(Assignment { route, start_s }));
        let arcs = self.instance.trip(trip).route(route).arcs();
        let legs = arcs
            .iter()
            .map(|&arc| Leg {
                arc,
                departure_s: f64::NAN,
                arrival_s: f64::NAN,
                flow: 0,
                delay_s: 0.0,
            })
            .collect();
        *self.schedule.trip_mut(trip) = Some(TripSchedule { route, legs });
        for (pos, &arc) in arcs.iter().enumerate() {
            self.index.active[arc.index()].push((trip, pos));
        }
        self.pending[trip.index()] = (0..arcs.len()).collect();
        self.push_label(trip);
    }

    /// Drops every traversal of `trip` and queues the trips that saw it.
    fn detach(&mut self, trip: TripId) {
        debug_assert!(self.pending[trip.index()].is_empty());
        let ts = self
            .schedule
            .trip_mut(trip)
            .take()
            .expect("trip is scheduled");
        for leg in &ts.legs {
            self.index.remove(leg.arc, leg.departure_s, trip);
            let hit = activation_range(
                self.index.inactive(leg.arc),
                trip,
                Some((leg.departure_s, leg.arrival_s)),
                None,
            );
            for other in hit {
                let pos = self
                    .leg_position(other, leg.arc)
                    .expect("indexed trip uses the arc");
                self.activate(other, pos);
                self.stats.reenqueued += 1;
            }
        }
    }

    /// Entry time of `trip` at route position `pos` under the current state.
    fn entry_time(&self, trip: TripId, pos: usize) -> f64 {
        if pos == 0 {
            self.solution.get(trip).expect("scheduled").start_s
        } else {
            self.schedule.trip(trip).expect("scheduled").legs[pos - 1].arrival_s
        }
    }

    /// Marks the traversal at `pos` for recomputation.
    fn activate(&mut self, trip: TripId, pos: usize) {
        let pending = &mut self.pending[trip.index()];
        let at = match pending.binary_search(&pos) {
            Ok(_) => return,
            Err(at) => at,
        };
        pending.insert(at, pos);
        let leg = self.schedule.trip(trip).expect("scheduled").legs[pos];
        self.index.remove(leg.arc, leg.departure_s, trip);
        self.index.active[leg.arc.index()].push((trip, pos));
        if at == 0 {
            self.push_label(trip);
        }
    }

    /// Queues the smallest pending position of `trip`, invalidating older labels.
    fn push_label(&mut self, trip: TripId) {
        let v = &mut self.version[trip.index()];
        *v = v.wrapping_add(1);
        let version = *v;
        if let Some(&pos) = self.pending[trip.index()].first() {
            let time = self.entry_time(trip, pos);
            self.queue.push(Reverse(QLabel {
                time,
                trip,
                pos,
                version,
            }));
        }
    }

    fn propagate(&mut self) -> Result<()> {
        let mut processed = 0usize;
        let mut last = f64::NEG_INFINITY;
        while let Some(Reverse(q)) = self.queue.pop() {
            if q.version != self.version[q.trip.index()] {
                continue;
            }
            processed += 1;
            if processed > self.budget {
                self.stats.budget_hits += 1;
                self.repair();
                return Err(Error::BudgetExceeded {
                    budget: self.budget,
                });
            }
            if q.time < last {
                self.stats.non_monotone_pops += 1;
            }
            last = q.time;
            self.process(q.trip, q.pos);
        }
        self.stats.labels_processed += processed as u64;
        Ok(())
    }

    fn count_active(&self, arc: ArcId, dep: f64, trip: TripId) -> u32 {
        let mut n = 0;
        for &(other, pos) in &self.index.active[arc.index()] {
            if other == trip {
                continue;
            }
            let leg = &self.schedule.trip(other).expect("scheduled").legs[pos];
            if !leg.departure_s.is_nan()
                && conflicts(leg.departure_s, leg.arrival_s, other, dep, trip)
            {
                n += 1;
            }
        }
        n
    }

    fn process(&mut self, trip: TripId, pos: usize) {
        let dep = self.entry_time(trip, pos);
        let old = self.schedule.trip(trip).expect("scheduled").legs[pos];
        let arc = old.arc;
        let list = &mut self.index.active[arc.index()];
        let at = list
            .iter()
            .position(|&(t, _)| t == trip)
            .expect("queued traversal is active");
        list.swap_remove(at);

        let flow = self.index.count_inactive(arc, dep, trip) + self.count_active(arc, dep, trip);
        let delay = self.instance.delay_fn(arc).delay(flow);
        let arr = dep + self.instance.network().arc(arc).nominal_s + delay;
        let moved = old.departure_s != dep || old.arrival_s != arr;

        let hit = if moved {
            let before = (!old.departure_s.is_nan()).then_some((old.departure_s, old.arrival_s));
            activation_range(self.index.inactive(arc), trip, before, Some((dep, arr)))
        } else {
            Vec::new()
        };
        let ts = self.schedule.trip_mut(trip).as_mut().expect("scheduled");
        ts.legs[pos] = Leg {
            arc,
            departure_s: dep,
            arrival_s: arr,
            flow,
            delay_s: delay,
        };
        let len = ts.legs.len();
        self.index.insert(arc, Label { dep, arr, trip });
        for other in hit {
            let p = self
                .leg_position(other, arc)
                .expect("indexed trip uses the arc");
            self.activate(other, p);
            self.stats.reenqueued += 1;
        }

        let pending = &mut self.pending[trip.index()];
        let first = pending.remove(0);
        debug_assert_eq!(first, pos);
        if moved && pos + 1 < len {
            self.activate(trip, pos + 1);
        }
        self.push_label(trip);
    }

    /// Checks sortedness, partition and leg agreement of the arc index.
    pub fn check_index(&self) -> core::result::Result<(), String> {
        let arcs = self.instance.network().arc_count();
        let mut expected: Vec<Vec<TripId>> = vec![Vec::new(); arcs];
        for (trip, ts) in self.schedule.iter() {
            let a = self
                .solution
                .get(trip)
                .ok_or_else(|| format!("trip {trip} scheduled but absent"))?;
            if a.route != ts.route {
                return Err(format!("trip {trip}: schedule route differs from solution"));
            }
            for leg in &ts.legs {
                expected[leg.arc.index()].push(trip);
            }
        }
        if self.solution.present_count() != self.schedule.iter().count() {
            return Err("solution and schedule cover different trips".into());
        }
        for (a, mut want) in expected.into_iter().enumerate() {
            let arc = ArcId(a as u32);
            let inactive = &self.index.inactive[a];
            for w in inactive.windows(2) {
                if !precedes(w[0].dep, w[0].trip, w[1].dep, w[1].trip) {
                    return Err(format!("arc {a}: inactive list out of order"));
                }
            }
            let mut seen: Vec<TripId> = inactive.iter().map(|l| l.trip).collect();
            for l in inactive {
                let pos = self
                    .leg_position(l.trip, arc)
                    .ok_or_else(|| format!("arc {a}: stray label"))?;
                let leg = &self.schedule.trip(l.trip).expect("scheduled").legs[pos];
                if leg.departure_s != l.dep || leg.arrival_s != l.arr {
                    return Err(format!(
                        "arc {a}: label of trip {} disagrees with its leg",
                        l.trip
                    ));
                }
                if self.index.max_occupancy[a] < l.arr - l.dep {
                    return Err(format!("arc {a}: occupancy bound violated"));
                }
            }
            seen.extend(self.index.active[a].iter().map(|&(t, _)| t));
            seen.sort();
            want.sort();
            if seen != want {
                return Err(format!(
                    "arc {a}: index does not partition the trips using it"
                ));
            }
        }
        Ok(())
    }
}
