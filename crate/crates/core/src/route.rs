//! Alternative routes with limited pairwise overlap.
//!
//! Candidates are single-via paths: a shortest path from the origin to a via
//! node followed by a shortest path from the via node to the destination.
//! They are ranked by length and accepted greedily while every accepted pair
//! stays at or below the overlap threshold.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{ArcId, Network, NodeId, ShortestPathTree, Weight};

/// Default number of alternatives per trip.
pub const DEFAULT_K: usize = 5;
/// Default overlap threshold.
pub const DEFAULT_THETA: f64 = 0.6;

/// A simple path through the network.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    arcs: Vec<ArcId>,
    length_m: f64,
    free_flow_s: f64,
}

impl Route {
    /// Checks connectivity and simplicity and computes length and free-flow
    /// time.
    pub fn new(network: &Network, arcs: Vec<ArcId>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidRoute("route has no arcs".into()));
        }
        let mut seen = BTreeSet::new();
        for (pos, &a) in arcs.iter().enumerate() {
            if a.index() >= network.arc_count() {
                return Err(Error::InvalidRoute(format!("arc {} does not exist", a.0)));
            }
            let arc = network.arc(a);
            if pos == 0 {
                seen.insert(arc.tail);
            } else if network.arc(arcs[pos - 1]).head != arc.tail {
                return Err(Error::InvalidRoute(format!(
                    "arc {} does not continue from arc {}",
                    a.0,
                    arcs[pos - 1].0
                )));
            }
            if !seen.insert(arc.head) {
                return Err(Error::InvalidRoute(format!(
                    "node {} visited twice",
                    arc.head.0
                )));
            }
        }
        let length_m = network.path_weight(&arcs, Weight::Length);
        let free_flow_s = network.path_weight(&arcs, Weight::NominalTime);
        Ok(Route {
            arcs,
            length_m,
            free_flow_s,
        })
    }

    pub fn arcs(&self) -> &[ArcId] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn free_flow_s(&self) -> f64 {
        self.free_flow_s
    }

    pub fn origin(&self, network: &Network) -> NodeId {
        network.arc(self.arcs[0]).tail
    }

    pub fn dest(&self, network: &Network) -> NodeId {
        network.arc(self.arcs[self.arcs.len() - 1]).head
    }

    /// Position of `arc` on the route.
    pub fn position(&self, arc: ArcId) -> Option<usize> {
        self.arcs.iter().position(|&a| a == arc)
    }
}

/// Shared length over the length of the shorter route.
pub fn similarity(network: &Network, p: &Route, q: &Route) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Domain("similarity of an empty route".into()));
    }
    let in_q: BTreeSet<ArcId> = q.arcs.iter().copied().collect();
    let shared: f64 = p
        .arcs
        .iter()
        .filter(|a| in_q.contains(a))
        .map(|&a| network.arc(a).length_m)
        .sum();
    let ratio = shared / p.length_m.min(q.length_m);
    Ok(ratio.clamp(0.0, 1.0))
}

/// Alternatives of one trip. `routes[0]` is the shortest-distance path.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteSet {
    pub routes: Vec<Route>,
    pub k_requested: usize,
    pub theta: f64,
}

impl RouteSet {
    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn shortest(&self) -> &Route {
        &self.routes[0]
    }

    /// Smallest free-flow time over all alternatives.
    pub fn min_free_flow_s(&self) -> f64 {
        self.routes
            .iter()
            .map(Route::free_flow_s)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One single-via candidate, in ranking order.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub route: Route,
    /// `None` for the shortest path itself.
    pub via: Option<NodeId>,
    pub accepted: bool,
}

/// Full record of a route generation run, for replaying the greedy choice.
#[derive(Clone, Debug, PartialEq)]
pub struct KspTrace {
    pub candidates: Vec<Candidate>,
    pub k: usize,
    pub theta: f64,
}

fn check_params(k: usize, theta: f64) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta {theta} is outside (0, 1]"
        )));
    }
    Ok(())
}

/// k shortest single-via paths with pairwise similarity at most `theta`.
///
/// May return fewer than `k` routes when the candidate list runs out.
pub fn kspwlo(
    network: &Network,
    origin: NodeId,
    dest: NodeId,
    k: usize,
    theta: f64,
) -> Result<RouteSet> {
    let trace = kspwlo_traced(network, origin, dest, k, theta)?;
    let routes = trace
        .candidates
        .into_iter()
        .filter(|c| c.accepted)
        .map(|c| c.route)
        .collect();
    Ok(RouteSet {
        routes,
        k_requested: k,
        theta,
    })
}

/// Like [`kspwlo`] but returns every ranked candidate with its decision.
pub fn kspwlo_traced(
    network: &Network,
    origin: NodeId,
    dest: NodeId,
    k: usize,
    theta: f64,
) -> Result<KspTrace> {
    check_params(k, theta)?;
    if !network.contains(origin) || !network.contains(dest) {
        return Err(Error::InvalidParameter(
            "unknown origin or destination".into(),
        ));
    }
    if origin == dest {
        return Err(Error::InvalidParameter("origin equals destination".into()));
    }
    let fwd = ShortestPathTree::forward(network, origin, Weight::Length);
    if !fwd.reaches(dest) {
        return Err(Error::NoPath {
            origin: origin.0,
            dest: dest.0,
        });
    }
    let bwd = ShortestPathTree::backward(network, dest, Weight::Length);

    let shortest = fwd
        .path_to(network, dest)
        .expect("destination is reachable");
    let mut seen: BTreeSet<Vec<ArcId>> = BTreeSet::new();
    seen.insert(shortest.clone());
    let mut candidates = vec![Candidate {
        route: Route::new(network, shortest)?,
        via: None,
        accepted: false,
    }];

    let mut others = Vec::new();
    for v in 0..network.node_count() as u32 {
        let via = NodeId(v);
        if !fwd.reaches(via) || !bwd.reaches(via) {
            continue;
        }
        let mut arcs = fwd.path_to(network, via).expect("reachable");
        arcs.extend(bwd.path_to(network, via).expect("reachable"));
        if arcs.is_empty() || !seen.insert(arcs.clone()) {
            continue;
        }
        // Concatenations that revisit a node are dropped.
        if let Ok(route) = Route::new(network, arcs) {
            others.push(Candidate {
                route,
                via: Some(via),
                accepted: false,
            });
        }
    }
    others.sort_by(|a, b| {
        a.route
            .length_m
            .total_cmp(&b.route.length_m)
            .then(a.via.cmp(&b.via))
    });
    candidates.extend(others);

    let mut accepted: Vec<usize> = Vec::new();
    for i in 0..candidates.len() {
        if accepted.len() == k {
            break;
        }
        let ok = accepted.iter().all(|&j| {
            similarity(network, &candidates[i].route, &candidates[j].route)
                .is_ok_and(|s| s <= theta)
        });
        if ok {
            candidates[i].accepted = true;
            accepted.push(i);
        }
    }
    Ok(KspTrace {
        candidates,
        k,
        theta,
    })
}

impl KspTrace {
    /// Replays the greedy selection and checks every recorded decision.
    ///
    /// A candidate must have been accepted exactly when fewer than `k` routes
    /// were accepted before it and it respects the threshold against all of
    /// them.
    pub fn verify(&self, network: &Network) -> bool {
        let mut accepted: Vec<&Route> = Vec::new();
        let mut prev_len = f64::NEG_INFINITY;
        for (i, c) in self.candidates.iter().enumerate() {
            if i > 0 && c.route.length_m < prev_len {
                return false;
            }
            prev_len = c.route.length_m;
            let admissible = accepted.len() < self.k
                && accepted
                    .iter()
                    .all(|r| similarity(network, &c.route, r).is_ok_and(|s| s <= self.theta));
            if admissible != c.accepted {
                return false;
            }
            if c.accepted {
                accepted.push(&c.route);
            }
        }
        true
    }
}
