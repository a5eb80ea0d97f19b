//! Instance generators and brute-force oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the library's algorithms: reachability is a
//! fixpoint relaxation instead of a label-ordered scan, journeys and cuts are
//! enumerated outright.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempflow::maxflow::{Capacity, StaticNetwork};
use tempflow::{Buffer, Label, TemporalGraph, TimeEdge};

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub max_vertices: usize,
    pub max_time_edges: usize,
    pub max_label: Label,
    pub max_capacity: u64,
    /// Give every inner vertex a buffer drawn from `1..=max_buffer`.
    pub max_buffer: Option<u64>,
}

impl Params {
    pub const SMALL: Params = Params {
        max_vertices: 5,
        max_time_edges: 8,
        max_label: 6,
        max_capacity: 4,
        max_buffer: None,
    };

    pub const SMALL_BOUNDED: Params = Params {
        max_buffer: Some(3),
        ..Params::SMALL
    };
}

/// A random valid network drawn from `seed`. Vertices are `s`, `t` and
/// `a`, `b`, `c`, ...; edges `e0`, `e1`, ... may be parallel.
pub fn random_instance(seed: u64, p: Params) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=p.max_vertices);
    let mut vertices = vec!["s".to_string(), "t".to_string()];
    vertices.extend((0..n - 2).map(|i| ((b'a' + i as u8) as char).to_string()));
    let budget = rng.gen_range(1..=p.max_time_edges);

    let mut b = TemporalGraph::builder("s", "t");
    for v in &vertices {
        b.vertex(v.clone());
    }
    let mut used = 0;
    let mut id = 0;
    while used < budget {
        let tail = vertices.choose(&mut rng).unwrap();
        let head = vertices.choose(&mut rng).unwrap();
        if tail == head || head == "s" || tail == "t" {
            continue;
        }
        let k = rng.gen_range(1..=(budget - used).min(3));
        let mut labels = BTreeSet::new();
        while labels.len() < k {
            labels.insert(rng.gen_range(1..=p.max_label));
        }
        used += k;
        b.edge(
            format!("e{id}"),
            tail.clone(),
            head.clone(),
            rng.gen_range(1..=p.max_capacity),
            labels,
        );
        id += 1;
    }
    if let Some(max) = p.max_buffer {
        for v in &vertices[2..] {
            b.buffer(v.clone(), Buffer::Bounded(rng.gen_range(1..=max)));
        }
    }
    b.build().expect("generated instances are valid")
}

/// Same topology, every edge available only on `label`.
pub fn with_single_label(g: &TemporalGraph, label: Label) -> TemporalGraph {
    let mut b = TemporalGraph::builder(g.source(), g.sink());
    for v in g.vertices() {
        b.vertex(v);
    }
    for e in g.edges() {
        b.edge(
            e.id.clone(),
            e.tail.clone(),
            e.head.clone(),
            e.capacity,
            [label],
        );
    }
    for (v, limit) in g.bounded_buffers() {
        b.buffer(v, Buffer::Bounded(limit));
    }
    b.build().unwrap()
}

/// Same network with every buffer unbounded.
pub fn with_unbounded_buffers(g: &TemporalGraph) -> TemporalGraph {
    let mut b = TemporalGraph::builder(g.source(), g.sink());
    for v in g.vertices() {
        b.vertex(v);
    }
    for e in g.edges() {
        b.edge(
            e.id.clone(),
            e.tail.clone(),
            e.head.clone(),
            e.capacity,
            e.labels.iter().copied(),
        );
    }
    b.build().unwrap()
}

/// Earliest arrival at `to` leaving `from` after day 0, by relaxing every
/// time-edge until nothing changes.
pub fn oracle_distance(g: &TemporalGraph, from: &str, to: &str) -> Option<Label> {
    let idx = |v: &str| g.vertices().position(|x| x == v).unwrap();
    let mut arrival: Vec<Option<Label>> = vec![None; g.vertex_count()];
    arrival[idx(from)] = Some(0);
    loop {
        let mut changed = false;
        for e in g.edges() {
            let Some(at) = arrival[idx(&e.tail)] else {
                continue;
            };
            let Some(&l) = e.labels.range(at + 1..).next() else {
                continue;
            };
            let h = idx(&e.head);
            if arrival[h].is_none_or(|old| l < old) {
                arrival[h] = Some(l);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    arrival[idx(to)]
}

/// Every source-sink journey, as time-edge sequences.
pub fn all_journeys(g: &TemporalGraph) -> Vec<Vec<TimeEdge>> {
    fn extend(
        g: &TemporalGraph,
        at: &str,
        last: Label,
        path: &mut Vec<TimeEdge>,
        out: &mut Vec<Vec<TimeEdge>>,
    ) {
        if at == g.sink() {
            out.push(path.clone());
            return;
        }
        for e in g.out_edges(at) {
            for &l in e.labels.range(last + 1..) {
                path.push(TimeEdge::new(e.id.clone(), l));
                extend(g, &e.head, l, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(g, g.source(), 0, &mut Vec::new(), &mut out);
    out
}

/// Minimum capacity over all subsets of time-edges (labels up to `deadline`)
/// whose removal leaves no journey arriving by `deadline`.
pub fn brute_force_min_temporal_cut(g: &TemporalGraph, deadline: Label) -> u64 {
    let g = g.restrict_to_deadline(deadline);
    let journeys = all_journeys(&g);
    let tes: Vec<TimeEdge> = g.time_edges().collect();
    assert!(tes.len() <= 20, "too many time-edges to enumerate");
    let cap = |te: &TimeEdge| g.edge(&te.edge).unwrap().capacity;
    (0u32..1 << tes.len())
        .filter_map(|mask| {
            let chosen: BTreeSet<&TimeEdge> = tes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t)
                .collect();
            let blocks = journeys
                .iter()
                .all(|j| j.iter().any(|te| chosen.contains(te)));
            blocks.then(|| chosen.iter().map(|te| cap(te)).sum())
        })
        .min()
        .expect("removing everything is a cut")
}

/// Minimum `s-t` cut of a static network by enumerating node subsets.
/// `None` when every cut has infinite capacity.
pub fn brute_force_min_cut(net: &StaticNetwork) -> Option<u64> {
    let n = net.node_count;
    assert!(n <= 16);
    (0u32..1 << n)
        .filter(|m| m >> net.source & 1 == 1 && m >> net.sink & 1 == 0)
        .filter_map(|m| {
            net.arcs
                .iter()
                .filter(|a| m >> a.from & 1 == 1 && m >> a.to & 1 == 0)
                .map(|a| a.capacity.finite())
                .sum::<Option<u64>>()
        })
        .min()
}

/// A random static network with `n` nodes, source 0 and sink `n - 1`.
pub fn random_static_network(
    seed: u64,
    n: usize,
    arcs: usize,
    unbounded_share: f64,
) -> StaticNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arcs = (0..arcs)
        .filter_map(|_| {
            let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
            (from != to).then(|| tempflow::maxflow::StaticArc {
                from,
                to,
                capacity: if rng.gen_bool(unbounded_share) {
                    Capacity::Unbounded
                } else {
                    Capacity::Finite(rng.gen_range(1..=9))
                },
            })
        })
        .collect();
    StaticNetwork {
        node_count: n,
        arcs,
        source: 0,
        sink: n - 1,
    }
}
