//! Time conventions shared by every module.
//!
//! Times are `f64` seconds. Two instants closer than [`EPS`] are treated as
//! equal by the conflict predicate; exact departure ties on an arc are broken
//! by trip id.

use core::cmp::Ordering;

use crate::instance::TripId;

/// Absolute tolerance for time comparisons, in seconds.
pub const EPS: f64 = 1e-9;

/// Total order of arc entries: by departure time, then by trip id.
#[inline]
pub fn entry_order(dep_a: f64, trip_a: TripId, dep_b: f64, trip_b: TripId) -> Ordering {
    dep_a.total_cmp(&dep_b).then(trip_a.cmp(&trip_b))
}

/// `true` when the entry `(dep_a, trip_a)` comes strictly before `(dep_b, trip_b)`.
#[inline]
pub fn precedes(dep_a: f64, trip_a: TripId, dep_b: f64, trip_b: TripId) -> bool {
    entry_order(dep_a, trip_a, dep_b, trip_b) == Ordering::Less
}

/// Conflict predicate: trip `b` enters the arc while `a` is still on it.
///
/// `a` must precede `b` in entry order and `b` must enter before `a` leaves
/// (minus [`EPS`]). The predicate is asymmetric; the later entrant is the one
/// that sees the flow.
#[inline]
pub fn conflicts(dep_a: f64, arr_a: f64, trip_a: TripId, dep_b: f64, trip_b: TripId) -> bool {
    precedes(dep_a, trip_a, dep_b, trip_b) && dep_b < arr_a - EPS
}

/// `|a - b| <= EPS`.
#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= EPS
}
