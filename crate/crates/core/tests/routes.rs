use balstag_core::generate::{synthetic_network, NetworkShape};
use balstag_core::network::{Network, Weight};
use balstag_core::route::{kspwlo, kspwlo_traced, similarity};
use balstag_core::{ArcId, NodeId};
use proptest::prelude::*;

/// Every simple path from `from` to `to`, by depth-first enumeration.
fn simple_paths(net: &Network, from: NodeId, to: NodeId) -> Vec<Vec<ArcId>> {
    fn walk(
        net: &Network,
        at: NodeId,
        to: NodeId,
        seen: &mut Vec<bool>,
        path: &mut Vec<ArcId>,
        out: &mut Vec<Vec<ArcId>>,
    ) {
        if at == to {
            out.push(path.clone());
            return;
        }
        for &a in net.out_arcs(at) {
            let next = net.arc(a).head;
            if !seen[next.index()] {
                seen[next.index()] = true;
                path.push(a);
                walk(net, next, to, seen, path, out);
                path.pop();
                seen[next.index()] = false;
            }
        }
    }
    let mut seen = vec![false; net.node_count()];
    seen[from.index()] = true;
    let mut out = Vec::new();
    walk(net, from, to, &mut seen, &mut Vec::new(), &mut out);
    out
}

#[test]
fn grid_shortest_paths_match_enumeration() {
    let net = synthetic_network(NetworkShape::Grid { rows: 5, cols: 5 }, 11).unwrap();
    for (o, d) in [(0, 24), (4, 20), (12, 0), (7, 18), (24, 1)] {
        let (o, d) = (NodeId(o), NodeId(d));
        let best = simple_paths(&net, o, d)
            .iter()
            .map(|p| net.path_weight(p, Weight::Length))
            .fold(f64::INFINITY, f64::min);
        let sp = net.shortest_path(o, d, Weight::Length).unwrap();
        assert!(
            (net.path_weight(&sp, Weight::Length) - best).abs() < 1e-9,
            "{o:?} -> {d:?}"
        );
    }
}

/// All-pairs distances by Floyd-Warshall.
fn floyd(net: &Network, weight: Weight) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for a in net.arcs() {
        let w = weight.of(a);
        let cell = &mut d[a.tail.index()][a.head.index()];
        *cell = cell.min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trees_match_floyd_warshall(seed in 0u64..10_000, ring in any::<bool>(), size in 3u32..7) {
        let shape = if ring { NetworkShape::Ring { nodes: size * 2 } } else { NetworkShape::Grid { rows: size, cols: size } };
        let net = synthetic_network(shape, seed).unwrap();
        for weight in [Weight::Length, Weight::NominalTime] {
            let d = floyd(&net, weight);
            for v in 0..net.node_count() as u32 {
                let fwd = balstag_core::network::ShortestPathTree::forward(&net, NodeId(v), weight);
                let bwd = balstag_core::network::ShortestPathTree::backward(&net, NodeId(v), weight);
                for u in 0..net.node_count() as u32 {
                    let (vi, ui) = (v as usize, u as usize);
                    prop_assert!((fwd.distance(NodeId(u)) - d[vi][ui]).abs() < 1e-9);
                    prop_assert!((bwd.distance(NodeId(u)) - d[ui][vi]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn route_sets_respect_overlap_and_certify(
        seed in 0u64..10_000,
        ring in any::<bool>(),
        k in 1usize..6,
        theta in prop::sample::select(vec![0.3, 0.6, 0.9, 1.0]),
    ) {
        let shape = if ring { NetworkShape::Ring { nodes: 9 } } else { NetworkShape::Grid { rows: 4, cols: 4 } };
        let net = synthetic_network(shape, seed).unwrap();
        let n = net.node_count() as u32;
        let (o, d) = (NodeId(seed as u32 % n), NodeId((seed as u32 / n + 1 + seed as u32) % n));
        prop_assume!(o != d);
        let trace = kspwlo_traced(&net, o, d, k, theta).unwrap();
        prop_assert!(trace.verify(&net));
        let set = kspwlo(&net, o, d, k, theta).unwrap();
        prop_assert!(!set.routes.is_empty() && set.routes.len() <= k);
        let sp = net.shortest_path(o, d, Weight::Length).unwrap();
        prop_assert!((set.routes[0].length_m() - net.path_weight(&sp, Weight::Length)).abs() < 1e-9);
        for (i, p) in set.routes.iter().enumerate() {
            prop_assert_eq!(p.origin(&net), o);
            prop_assert_eq!(p.dest(&net), d);
            let mut arcs = p.arcs().to_vec();
            arcs.sort();
            arcs.dedup();
            prop_assert_eq!(arcs.len(), p.len());
            if i > 0 {
                prop_assert!(set.routes[i - 1].length_m() <= p.length_m());
            }
            for q in &set.routes[..i] {
                let s = similarity(&net, p, q).unwrap();
                prop_assert!(s <= theta);
                prop_assert_eq!(s, similarity(&net, q, p).unwrap());
            }
        }
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let net = synthetic_network(NetworkShape::Grid { rows: 4, cols: 4 }, 3).unwrap();
    let mut trace = kspwlo_traced(&net, NodeId(0), NodeId(15), 3, 0.6).unwrap();
    assert!(trace.verify(&net));
    let flip = trace.candidates.iter().position(|c| !c.accepted).unwrap();
    trace.candidates[flip].accepted = true;
    assert!(!trace.verify(&net));
}
