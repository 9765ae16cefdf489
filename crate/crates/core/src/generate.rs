//! Seeded synthetic networks and instances.
//!
//! All randomness comes from `ChaCha8Rng`. The network uses stream 0 of its
//! seed; trip `i` uses stream `i + 1` of the instance seed, so growing the
//! trip count leaves the first trips untouched.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delay::DelaySpec;
use crate::error::{Error, Result};
use crate::instance::{Instance, Trip, TripId};
use crate::network::{Arc, ArcId, Network, NodeId};
use crate::route::{kspwlo, DEFAULT_K, DEFAULT_THETA};

/// Free-flow speed of synthetic arcs, m/s (20 km/h).
pub const SPEED_MPS: f64 = 20.0 / 3.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkShape {
    /// Bidirectional 4-neighbor grid.
    Grid { rows: u32, cols: u32 },
    /// Bidirectional ring with a chord from every third node.
    Ring { nodes: u32 },
}

fn push_pair(arcs: &mut Vec<Arc>, a: u32, b: u32, length_m: f64) {
    for (tail, head) in [(a, b), (b, a)] {
        arcs.push(Arc {
            id: ArcId(arcs.len() as u32),
            tail: NodeId(tail),
            head: NodeId(head),
            length_m,
            nominal_s: length_m / SPEED_MPS,
        });
    }
}

/// Synthetic road network. Street lengths are uniform in [100, 250) m.
pub fn synthetic_network(shape: NetworkShape, seed: u64) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    let nodes = match shape {
        NetworkShape::Grid { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols < 2 {
                return Err(Error::InvalidParameter(
                    "grid needs at least two nodes".into(),
                ));
            }
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        push_pair(&mut arcs, v, v + 1, rng.random_range(100.0..250.0));
                    }
                    if r + 1 < rows {
                        push_pair(&mut arcs, v, v + cols, rng.random_range(100.0..250.0));
                    }
                }
            }
            rows * cols
        }
        NetworkShape::Ring { nodes } => {
            if nodes < 3 {
                return Err(Error::InvalidParameter(
                    "ring needs at least three nodes".into(),
                ));
            }
            for v in 0..nodes {
                push_pair(
                    &mut arcs,
                    v,
                    (v + 1) % nodes,
                    rng.random_range(100.0..250.0),
                );
            }
            if nodes >= 6 {
                for v in (0..nodes).step_by(3) {
                    // Any node at ring distance >= 2.
                    let offset = rng.random_range(2..=nodes - 2);
                    let w = (v + offset) % nodes;
                    let len = rng.random_range(150.0..400.0);
                    push_pair(&mut arcs, v, w, len);
                }
            }
            nodes
        }
    };
    Network::new(nodes as usize, arcs)
}

/// Maximum staggering per trip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "fraction", rename_all = "snake_case")]
pub enum SigmaPolicy {
    /// Fraction of the free-flow time of the shortest-distance route.
    FractionOfNominal(f64),
    /// Fraction of the fastest alternative's free-flow time.
    FractionOfShortestFreeFlow(f64),
}

impl Default for SigmaPolicy {
    fn default() -> Self {
        SigmaPolicy::FractionOfShortestFreeFlow(0.2)
    }
}

/// Latest arrival per trip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "factor", rename_all = "snake_case")]
pub enum DeadlinePolicy {
    /// `e + factor * free_flow(routes[0])`.
    FreeFlowFactor(f64),
    /// `e + factor * (RDUO travel time)`, computed in a post-pass.
    RduoFactor(f64),
}

impl Default for DeadlinePolicy {
    fn default() -> Self {
        DeadlinePolicy::FreeFlowFactor(1.25)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_trips: usize,
    /// Earliest departures are uniform over `[0, horizon_s)`.
    pub horizon_s: f64,
    pub sigma: SigmaPolicy,
    pub deadline: DeadlinePolicy,
    pub k: usize,
    pub theta: f64,
    pub delay: DelaySpec,
    /// Redraws of an OD pair without a path before giving up.
    pub max_od_retries: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_trips: 100,
            horizon_s: 600.0,
            sigma: SigmaPolicy::default(),
            deadline: DeadlinePolicy::default(),
            k: DEFAULT_K,
            theta: DEFAULT_THETA,
            delay: DelaySpec::default(),
            max_od_retries: 100,
        }
    }
}

/// Trip generator over a fixed network.
///
/// Origins and destinations are uniform over distinct node pairs; earliest
/// departures are uniform over the horizon, which is a Poisson arrival
/// process conditioned on its count.
pub fn generate_synthetic(
    network: &Network,
    config: &GeneratorConfig,
    seed: u64,
) -> Result<Instance> {
    if config.n_trips == 0 {
        return Err(Error::InvalidParameter("n_trips must be at least 1".into()));
    }
    if network.node_count() < 2 {
        return Err(Error::InvalidParameter(
            "network needs at least two nodes".into(),
        ));
    }
    if !(config.horizon_s >= 0.0 && config.horizon_s.is_finite()) {
        return Err(Error::InvalidParameter(
            "horizon_s must be non-negative".into(),
        ));
    }
    let fraction = match config.sigma {
        SigmaPolicy::FractionOfNominal(p) | SigmaPolicy::FractionOfShortestFreeFlow(p) => p,
    };
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::InvalidParameter(
            "sigma fraction must be non-negative".into(),
        ));
    }
    let factor = match config.deadline {
        DeadlinePolicy::FreeFlowFactor(f) | DeadlinePolicy::RduoFactor(f) => f,
    };
    if !(factor >= 1.0 && factor.is_finite()) {
        return Err(Error::InvalidParameter(
            "deadline factor must be at least 1".into(),
        ));
    }
    config.delay.validate()?;

    let n = network.node_count() as u32;
    let mut trips = Vec::with_capacity(config.n_trips);
    for i in 0..config.n_trips {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let e = if config.horizon_s > 0.0 {
            rng.random_range(0.0..config.horizon_s)
        } else {
            0.0
        };
        let mut routes = None;
        for _ in 0..=config.max_od_retries {
            let o = rng.random_range(0..n);
            let mut d = rng.random_range(0..n - 1);
            if d >= o {
                d += 1;
            }
            match kspwlo(network, NodeId(o), NodeId(d), config.k, config.theta) {
                Ok(set) => {
                    routes = Some((NodeId(o), NodeId(d), set));
                    break;
                }
                Err(Error::NoPath { .. }) => continue,
                Err(other) => return Err(other),
            }
        }
        let (origin, dest, routes) = routes.ok_or_else(|| {
            Error::Generation(format!(
                "trip {i}: no connected OD pair after {} draws",
                config.max_od_retries + 1
            ))
        })?;
        let nominal = routes.shortest().free_flow_s();
        let sigma = match config.sigma {
            SigmaPolicy::FractionOfNominal(p) => p * nominal,
            SigmaPolicy::FractionOfShortestFreeFlow(p) => p * routes.min_free_flow_s(),
        };
        trips.push(Trip {
            id: TripId(i as u32),
            origin,
            dest,
            earliest_departure_s: e,
            latest_arrival_s: e + factor * nominal,
            max_staggering_s: sigma,
            routes,
            controlled: true,
        });
    }
    let instance = Instance::new(
        network.clone(),
        config.delay.clone(),
        trips,
        config.horizon_s,
    )?;
    match config.deadline {
        DeadlinePolicy::FreeFlowFactor(_) => Ok(instance),
        DeadlinePolicy::RduoFactor(f) => {
            let rduo = crate::solver::build_rduo(&instance);
            let schedule = crate::schedule::construct_schedule(&instance, &rduo);
            let deadlines: Vec<f64> = instance
                .trips()
                .iter()
                .map(|t| {
                    let ts = schedule.trip(t.id).expect("RDUO schedules every trip");
                    let travel = ts.arrival_s() - ts.start_s();
                    (t.earliest_departure_s + f * travel)
                        .max(t.earliest_departure_s + t.routes.shortest().free_flow_s())
                })
                .collect();
            instance.with_deadlines(&deadlines)
        }
    }
}
