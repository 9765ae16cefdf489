#![allow(dead_code)]

use balstag_core::delay::{DelaySpec, Piece};
use balstag_core::generate::{
    generate_synthetic, synthetic_network, GeneratorConfig, NetworkShape, SigmaPolicy,
};
use balstag_core::instance::{Instance, Trip, TripId};
use balstag_core::network::{Arc, ArcId, Network, NodeId};
use balstag_core::route::{Route, RouteSet};
use balstag_core::schedule::{Assignment, Schedule, Solution};
use balstag_core::time::conflicts;

/// Unit-slope line: the delay equals the flow.
pub fn unit_slope() -> DelaySpec {
    DelaySpec::PiecewiseExplicit {
        pieces: vec![Piece {
            slope: 1.0,
            threshold: 0.0,
        }],
    }
}

/// Crowded instance on a small grid or ring. Many trips share arcs within
/// a short horizon, so flows are regularly positive.
pub fn crowded(seed: u64, n_trips: usize, horizon_s: f64, delay: DelaySpec) -> Instance {
    let shape = if seed.is_multiple_of(2) {
        NetworkShape::Grid { rows: 3, cols: 3 }
    } else {
        NetworkShape::Ring { nodes: 7 }
    };
    let net = synthetic_network(shape, seed).unwrap();
    let cfg = GeneratorConfig {
        n_trips,
        horizon_s,
        sigma: SigmaPolicy::FractionOfShortestFreeFlow(0.5),
        k: 3,
        delay,
        ..GeneratorConfig::default()
    };
    generate_synthetic(&net, &cfg, seed).unwrap()
}

/// Trips `(e, sigma, deadline)` all sharing one arc of nominal time `tau`.
pub fn one_arc(tau: f64, trips: &[(f64, f64, f64)], delay: DelaySpec) -> Instance {
    let net = Network::new(
        2,
        vec![Arc {
            id: ArcId(0),
            tail: NodeId(0),
            head: NodeId(1),
            length_m: 100.0,
            nominal_s: tau,
        }],
    )
    .unwrap();
    let route = Route::new(&net, vec![ArcId(0)]).unwrap();
    let trips = trips
        .iter()
        .enumerate()
        .map(|(i, &(e, sigma, l))| Trip {
            id: TripId(i as u32),
            origin: NodeId(0),
            dest: NodeId(1),
            earliest_departure_s: e,
            latest_arrival_s: l,
            max_staggering_s: sigma,
            routes: RouteSet {
                routes: vec![route.clone()],
                k_requested: 1,
                theta: 1.0,
            },
            controlled: true,
        })
        .collect();
    Instance::new(net, delay, trips, 1000.0).unwrap()
}

pub fn starts_on_route0(starts: &[f64]) -> Solution {
    Solution::from_assignments(
        starts
            .iter()
            .map(|&s| {
                Some(Assignment {
                    route: 0,
                    start_s: s,
                })
            })
            .collect(),
    )
}

/// Flow of every traversal recounted pairwise: the number of traversals of
/// the same arc that entered earlier and are still on it.
pub fn recount_flows(schedule: &Schedule) -> Vec<(TripId, usize, u32)> {
    let legs: Vec<(TripId, usize, ArcId, f64, f64)> = schedule
        .iter()
        .flat_map(|(id, ts)| {
            ts.legs
                .iter()
                .enumerate()
                .map(move |(p, l)| (id, p, l.arc, l.departure_s, l.arrival_s))
        })
        .collect();
    legs.iter()
        .map(|&(r, pos, arc, dep, _)| {
            let f = legs
                .iter()
                .filter(|&&(o, _, a, d, w)| a == arc && o != r && conflicts(d, w, o, dep, r))
                .count();
            (r, pos, f as u32)
        })
        .collect()
}

/// Delay families that charge from the first conflicting trip, so that a
/// handful of trips can congest.
fn tiny_delay(seed: u64) -> DelaySpec {
    match seed % 3 {
        0 => DelaySpec::PiecewiseExplicit {
            pieces: vec![Piece {
                slope: 1.0,
                threshold: 0.0,
            }],
        },
        1 => DelaySpec::default(),
        _ => DelaySpec::Piecewise {
            headway_s: 30.0,
            segments: 3,
        },
    }
}

/// At most five trips with at most two routes each and integral staggering
/// windows of at most 10 s, shrunk until the oracle grid has no more than
/// `max_combinations` points.
pub fn tiny(seed: u64, max_combinations: u128) -> Instance {
    use balstag_core::oracle::OracleGrid;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // Arc times of 2 to 5 s, so that windows of at most 10 s can separate
    // trips.
    let grid = synthetic_network(NetworkShape::Grid { rows: 3, cols: 3 }, seed).unwrap();
    let arcs = grid
        .arcs()
        .iter()
        .map(|a| Arc {
            nominal_s: a.length_m / 50.0,
            ..a.clone()
        })
        .collect();
    let net = Network::new(grid.node_count(), arcs).unwrap();
    let cfg = GeneratorConfig {
        n_trips: rng.random_range(2..=5),
        horizon_s: 4.0,
        k: 2,
        theta: 0.9,
        delay: tiny_delay(seed),
        ..GeneratorConfig::default()
    };
    let base = generate_synthetic(&net, &cfg, seed).unwrap();
    let mut trips: Vec<Trip> = base.trips().to_vec();
    for t in &mut trips {
        t.earliest_departure_s = t.earliest_departure_s.round();
        t.max_staggering_s = f64::from(rng.random_range(0u32..=10));
        t.latest_arrival_s = t.earliest_departure_s + 1.25 * t.routes.shortest().free_flow_s();
    }
    loop {
        let inst =
            Instance::new(net.clone(), cfg.delay.clone(), trips.clone(), cfg.horizon_s).unwrap();
        if OracleGrid::default().combinations(&inst) <= max_combinations {
            return inst;
        }
        let i = rng.random_range(0..trips.len());
        trips[i].max_staggering_s = (trips[i].max_staggering_s - 1.0).max(0.0);
    }
}
