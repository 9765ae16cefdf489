//! Directed road network and free-flow shortest paths.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub u32);

impl ArcId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A road segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
    pub length_m: f64,
    /// Free-flow traversal time in seconds.
    pub nominal_s: f64,
}

/// Serialized form of a [`Network`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkData {
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<Arc>,
}

/// Immutable directed graph with dense node ids `0..n` and arc ids `0..m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkData", into = "NetworkData")]
pub struct Network {
    node_count: usize,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<ArcId>>,
    in_adj: Vec<Vec<ArcId>>,
}

/// Arc weight used by shortest-path queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Length,
    NominalTime,
}

impl Weight {
    #[inline]
    pub fn of(self, arc: &Arc) -> f64 {
        match self {
            Weight::Length => arc.length_m,
            Weight::NominalTime => arc.nominal_s,
        }
    }
}

impl Network {
    /// Builds a network over nodes `0..node_count`. Arc ids must equal their
    /// position in `arcs`.
    pub fn new(node_count: usize, arcs: Vec<Arc>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); node_count];
        let mut in_adj = vec![Vec::new(); node_count];
        for (pos, arc) in arcs.iter().enumerate() {
            if arc.id.index() != pos {
                return Err(Error::InvalidNetwork(format!(
                    "arcs[{pos}]: id {} is not dense (expected {pos})",
                    arc.id.0
                )));
            }
            if arc.tail.index() >= node_count || arc.head.index() >= node_count {
                return Err(Error::InvalidNetwork(format!(
                    "arcs[{pos}]: endpoint ({}, {}) is not a declared node",
                    arc.tail.0, arc.head.0
                )));
            }
            if arc.tail == arc.head {
                return Err(Error::InvalidNetwork(format!("arcs[{pos}]: self loop")));
            }
            if !(arc.length_m > 0.0 && arc.length_m.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "arcs[{pos}]: length_m must be positive"
                )));
            }
            if !(arc.nominal_s > 0.0 && arc.nominal_s.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "arcs[{pos}]: nominal_s must be positive"
                )));
            }
            out_adj[arc.tail.index()].push(arc.id);
            in_adj[arc.head.index()].push(arc.id);
        }
        Ok(Network {
            node_count,
            arcs,
            out_adj,
            in_adj,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.index()]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.out_adj[node.index()]
    }

    pub fn in_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.in_adj[node.index()]
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.node_count
    }

    /// Sum of `weight` over `path`.
    pub fn path_weight(&self, path: &[ArcId], weight: Weight) -> f64 {
        path.iter().map(|&a| weight.of(self.arc(a))).sum()
    }

    /// Minimum-weight path from `origin` to `dest`.
    pub fn shortest_path(
        &self,
        origin: NodeId,
        dest: NodeId,
        weight: Weight,
    ) -> Result<Vec<ArcId>> {
        self.check_node(origin)?;
        self.check_node(dest)?;
        let tree = ShortestPathTree::forward(self, origin, weight);
        tree.path_to(self, dest).ok_or(Error::NoPath {
            origin: origin.0,
            dest: dest.0,
        })
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(format!("unknown node {}", node.0)))
        }
    }
}

impl TryFrom<NetworkData> for Network {
    type Error = Error;

    fn try_from(data: NetworkData) -> Result<Self> {
        for (pos, node) in data.nodes.iter().enumerate() {
            if node.index() != pos {
                return Err(Error::InvalidNetwork(format!(
                    "nodes[{pos}]: id {} is not dense (expected {pos})",
                    node.0
                )));
            }
        }
        Network::new(data.nodes.len(), data.arcs)
    }
}

impl From<Network> for NetworkData {
    fn from(net: Network) -> Self {
        NetworkData {
            nodes: (0..net.node_count as u32).map(NodeId).collect(),
            arcs: net.arcs,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapKey(f64, NodeId);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Single-source (or single-target) Dijkstra tree.
///
/// Settles nodes by `(distance, node id)` and prefers the smaller arc id when
/// two arcs give the same distance, so trees are reproducible.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    root: NodeId,
    reverse: bool,
    dist: Vec<f64>,
    /// Forward tree: arc entering the node. Reverse tree: arc leaving it
    /// toward the root.
    pred: Vec<Option<ArcId>>,
}

impl ShortestPathTree {
    pub fn forward(network: &Network, source: NodeId, weight: Weight) -> Self {
        Self::build(network, source, weight, false)
    }

    /// Tree of shortest paths from every node *to* `target`.
    pub fn backward(network: &Network, target: NodeId, weight: Weight) -> Self {
        Self::build(network, target, weight, true)
    }

    fn build(network: &Network, root: NodeId, weight: Weight, reverse: bool) -> Self {
        let n = network.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<ArcId>> = vec![None; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[root.index()] = 0.0;
        heap.push(Reverse(HeapKey(0.0, root)));
        while let Some(Reverse(HeapKey(d, node))) = heap.pop() {
            if settled[node.index()] || d > dist[node.index()] {
                continue;
            }
            settled[node.index()] = true;
            let adj = if reverse {
                network.in_arcs(node)
            } else {
                network.out_arcs(node)
            };
            for &arc_id in adj {
                let arc = network.arc(arc_id);
                let next = if reverse { arc.tail } else { arc.head };
                if settled[next.index()] {
                    continue;
                }
                let nd = d + weight.of(arc);
                let cur = dist[next.index()];
                let better =
                    nd < cur || (nd == cur && pred[next.index()].is_some_and(|p| arc_id < p));
                if better {
                    dist[next.index()] = nd;
                    pred[next.index()] = Some(arc_id);
                    heap.push(Reverse(HeapKey(nd, next)));
                }
            }
        }
        ShortestPathTree {
            root,
            reverse,
            dist,
            pred,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn distance(&self, node: NodeId) -> f64 {
        self.dist[node.index()]
    }

    pub fn reaches(&self, node: NodeId) -> bool {
        self.dist[node.index()].is_finite()
    }

    /// Forward tree: arcs from the root to `node`. Reverse tree: arcs from
    /// `node` to the root. `None` when unreachable.
    pub fn path_to(&self, network: &Network, node: NodeId) -> Option<Vec<ArcId>> {
        if !self.reaches(node) {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = node;
        while cur != self.root {
            let arc_id = self.pred[cur.index()]?;
            path.push(arc_id);
            let arc = network.arc(arc_id);
            cur = if self.reverse { arc.head } else { arc.tail };
        }
        if !self.reverse {
            path.reverse();
        }
        Some(path)
    }
}
