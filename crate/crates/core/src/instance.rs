//! Trips and instances.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::delay::{DelayFunction, DelaySpec};
use crate::error::{Error, Result};
use crate::network::{Network, NodeId};
use crate::route::{Route, RouteSet};
use crate::time::EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripId(pub u32);

impl TripId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl core::fmt::Display for TripId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trip {
    pub id: TripId,
    pub origin: NodeId,
    pub dest: NodeId,
    pub earliest_departure_s: f64,
    pub latest_arrival_s: f64,
    pub max_staggering_s: f64,
    pub routes: RouteSet,
    /// Fleet trip (optimized) or baseload trip (fixed behavior).
    pub controlled: bool,
}

impl Trip {
    /// Latest admissible start time.
    #[inline]
    pub fn latest_start_s(&self) -> f64 {
        self.earliest_departure_s + self.max_staggering_s
    }

    /// Free-flow time of the fastest alternative; the zero-delay reference.
    #[inline]
    pub fn reference_free_flow_s(&self) -> f64 {
        self.routes.min_free_flow_s()
    }

    pub fn route(&self, idx: usize) -> &Route {
        &self.routes.routes[idx]
    }

    /// `true` when `start` lies in `[e, e + sigma]` up to [`EPS`].
    pub fn admits_start(&self, start: f64) -> bool {
        start >= self.earliest_departure_s - EPS && start <= self.latest_start_s() + EPS
    }
}

/// An immutable problem instance.
#[derive(Clone, Debug)]
pub struct Instance {
    network: Network,
    delay_spec: DelaySpec,
    delays: Vec<DelayFunction>,
    trips: Vec<Trip>,
    horizon_s: f64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.network == other.network
            && self.delay_spec == other.delay_spec
            && self.trips == other.trips
            && self.horizon_s == other.horizon_s
    }
}

impl Instance {
    pub fn new(
        network: Network,
        delay_spec: DelaySpec,
        trips: Vec<Trip>,
        horizon_s: f64,
    ) -> Result<Self> {
        let delays = network
            .arcs()
            .iter()
            .map(|a| delay_spec.resolve(a.nominal_s))
            .collect::<Result<Vec<_>>>()?;
        for (pos, trip) in trips.iter().enumerate() {
            validate_trip(&network, pos, trip)?;
        }
        if !(horizon_s >= 0.0 && horizon_s.is_finite()) {
            return Err(Error::Schema {
                path: "horizon_s".into(),
                reason: "must be non-negative".into(),
            });
        }
        Ok(Instance {
            network,
            delay_spec,
            delays,
            trips,
            horizon_s,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn delay_spec(&self) -> &DelaySpec {
        &self.delay_spec
    }

    #[inline]
    pub fn delay_fn(&self, arc: crate::ArcId) -> &DelayFunction {
        &self.delays[arc.index()]
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    #[inline]
    pub fn trip(&self, id: TripId) -> &Trip {
        &self.trips[id.index()]
    }

    pub fn trip_count(&self) -> usize {
        self.trips.len()
    }

    pub fn trip_ids(&self) -> impl Iterator<Item = TripId> + '_ {
        (0..self.trips.len() as u32).map(TripId)
    }

    pub fn horizon_s(&self) -> f64 {
        self.horizon_s
    }

    /// Copy with the `controlled` flags replaced.
    pub fn with_control(&self, controlled: &[bool]) -> Result<Instance> {
        if controlled.len() != self.trips.len() {
            return Err(Error::InvalidParameter(format!(
                "{} control flags for {} trips",
                controlled.len(),
                self.trips.len()
            )));
        }
        let mut out = self.clone();
        for (t, &c) in out.trips.iter_mut().zip(controlled) {
            t.controlled = c;
        }
        Ok(out)
    }

    /// Copy with new latest-arrival times.
    pub fn with_deadlines(&self, latest_arrival_s: &[f64]) -> Result<Instance> {
        let mut trips = self.trips.clone();
        for (t, &l) in trips.iter_mut().zip(latest_arrival_s) {
            t.latest_arrival_s = l;
        }
        Instance::new(
            self.network.clone(),
            self.delay_spec.clone(),
            trips,
            self.horizon_s,
        )
    }

    /// Longest route in arcs over all alternatives of all trips.
    pub fn max_route_len(&self) -> usize {
        self.trips
            .iter()
            .flat_map(|t| t.routes.routes.iter().map(Route::len))
            .max()
            .unwrap_or(0)
    }
}

fn trip_err(trip: &Trip, reason: String) -> Error {
    Error::InvalidTrip {
        trip: trip.id.0,
        reason,
    }
}

fn validate_trip(network: &Network, pos: usize, trip: &Trip) -> Result<()> {
    if trip.id.index() != pos {
        return Err(trip_err(trip, format!("id is not dense (expected {pos})")));
    }
    if !network.contains(trip.origin) || !network.contains(trip.dest) {
        return Err(trip_err(
            trip,
            "origin or destination is not a network node".into(),
        ));
    }
    if trip.routes.is_empty() {
        return Err(trip_err(trip, "route set is empty".into()));
    }
    for (i, r) in trip.routes.routes.iter().enumerate() {
        if r.origin(network) != trip.origin || r.dest(network) != trip.dest {
            return Err(trip_err(
                trip,
                format!("route {i} does not connect origin to destination"),
            ));
        }
    }
    if !trip.earliest_departure_s.is_finite() || !trip.latest_arrival_s.is_finite() {
        return Err(trip_err(trip, "time window must be finite".into()));
    }
    if !(trip.max_staggering_s >= 0.0 && trip.max_staggering_s.is_finite()) {
        return Err(trip_err(
            trip,
            "max_staggering_s must be non-negative".into(),
        ));
    }
    let ff = trip.routes.shortest().free_flow_s();
    if trip.earliest_departure_s + ff > trip.latest_arrival_s + EPS {
        return Err(trip_err(
            trip,
            "shortest route cannot arrive on time even in free flow".into(),
        ));
    }
    Ok(())
}

/// Serialized trip: route sets are arc-id lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripData {
    pub id: TripId,
    pub origin: NodeId,
    pub dest: NodeId,
    pub earliest_departure_s: f64,
    pub latest_arrival_s: f64,
    pub max_staggering_s: f64,
    pub k: usize,
    pub theta: f64,
    pub routes: Vec<Vec<crate::ArcId>>,
    #[serde(default = "default_controlled")]
    pub controlled: bool,
}

fn default_controlled() -> bool {
    true
}

/// Serialized instance with embedded network, delay spec and route sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceData {
    pub network: Network,
    pub delay: DelaySpec,
    pub horizon_s: f64,
    pub trips: Vec<TripData>,
}

impl TryFrom<InstanceData> for Instance {
    type Error = Error;

    fn try_from(data: InstanceData) -> Result<Self> {
        let network = data.network;
        let mut trips = Vec::with_capacity(data.trips.len());
        for (pos, t) in data.trips.into_iter().enumerate() {
            let mut routes = Vec::with_capacity(t.routes.len());
            for (i, arcs) in t.routes.into_iter().enumerate() {
                let route = Route::new(&network, arcs).map_err(|e| Error::Schema {
                    path: format!("trips[{pos}].routes[{i}]"),
                    reason: format!("trip {}: {}", t.id.0, e),
                })?;
                routes.push(route);
            }
            trips.push(Trip {
                id: t.id,
                origin: t.origin,
                dest: t.dest,
                earliest_departure_s: t.earliest_departure_s,
                latest_arrival_s: t.latest_arrival_s,
                max_staggering_s: t.max_staggering_s,
                routes: RouteSet {
                    routes,
                    k_requested: t.k,
                    theta: t.theta,
                },
                controlled: t.controlled,
            });
        }
        Instance::new(network, data.delay, trips, data.horizon_s).map_err(|e| match e {
            Error::InvalidTrip { trip, reason } => Error::Schema {
                path: format!("trips[{trip}]"),
                reason: format!("trip {trip}: {reason}"),
            },
            Error::InvalidDelay(r) => Error::Schema {
                path: "delay".into(),
                reason: r,
            },
            other => other,
        })
    }
}

impl From<&Instance> for InstanceData {
    fn from(inst: &Instance) -> Self {
        InstanceData {
            network: inst.network.clone(),
            delay: inst.delay_spec.clone(),
            horizon_s: inst.horizon_s,
            trips: inst
                .trips
                .iter()
                .map(|t| TripData {
                    id: t.id,
                    origin: t.origin,
                    dest: t.dest,
                    earliest_departure_s: t.earliest_departure_s,
                    latest_arrival_s: t.latest_arrival_s,
                    max_staggering_s: t.max_staggering_s,
                    k: t.routes.k_requested,
                    theta: t.routes.theta,
                    routes: t.routes.routes.iter().map(|r| r.arcs().to_vec()).collect(),
                    controlled: t.controlled,
                })
                .collect(),
        }
    }
}

impl core::fmt::Display for Instance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} nodes, {} arcs, {} trips",
            self.network.node_count(),
            self.network.arc_count(),
            self.trips.len()
        )
    }
}
