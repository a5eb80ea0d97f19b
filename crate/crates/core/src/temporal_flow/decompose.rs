use num_traits::{Signed, Zero};

use super::{verify_flow, Amount, FlowError, JourneyFlow, TemporalFlow};
use crate::steg::{ArcKind, StegGraph};
use crate::temporal_graph::{Journey, TemporalGraph};

/// Splits a feasible temporal flow into flows along source-sink journeys.
///
/// The flow is lifted to the time-extended DAG, where waiting in a buffer is
/// a vertical arc, and source-sink paths are peeled off one at a time. Each
/// peel takes the lexicographically earliest path by (label sequence, vertex
/// ids) and removes its bottleneck amount, so at most `|E_L|` journeys result
/// and their amounts add up to the flow value.
///
/// Fails if the flow is infeasible, or if flow that never reaches the sink
/// remains after all journeys are removed.
pub fn decompose_into_journeys(
    g: &TemporalGraph,
    tf: &TemporalFlow,
) -> Result<Vec<JourneyFlow>, FlowError> {
    verify_flow(g, tf).map_err(FlowError::Infeasible)?;
    let steg = StegGraph::build(g, g.l_max().max(1));
    let mut flow = steg.induced_flow(g, tf);

    let nodes = steg.nodes();
    let arcs = steg.arcs();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, a) in arcs.iter().enumerate() {
        adj[a.from].push(i);
    }
    for out in &mut adj {
        // leave now (crossing, by head vertex then edge id) before waiting
        out.sort_by(|&x, &y| {
            let key = |i: usize| {
                let a = &arcs[i];
                match &a.kind {
                    ArcKind::Crossing(te) => (0, nodes[a.to].vertex.as_str(), te.edge.as_str()),
                    ArcKind::Vertical => (1, "", ""),
                }
            };
            key(x).cmp(&key(y))
        });
    }

    let mut journeys = Vec::new();
    while let Some(path) = earliest_path(&steg, &adj, &flow) {
        let bottleneck = path
            .iter()
            .map(|&a| &flow[a])
            .min()
            .expect("paths are non-empty")
            .clone();
        for &a in &path {
            flow[a] -= &bottleneck;
        }
        let time_edges = path
            .iter()
            .filter_map(|&a| match &arcs[a].kind {
                ArcKind::Crossing(te) => Some(te.clone()),
                ArcKind::Vertical => None,
            })
            .collect();
        let journey =
            Journey::new(g, time_edges).expect("paths in the time-extended DAG are journeys");
        journeys.push(JourneyFlow {
            journey,
            amount: bottleneck,
        });
    }

    for (a, f) in arcs.iter().zip(&flow) {
        if let ArcKind::Crossing(te) = &a.kind {
            if f.is_positive() {
                return Err(FlowError::TrappedFlow {
                    time_edge: te.clone(),
                    amount: f.clone(),
                });
            }
        }
    }
    Ok(journeys)
}

/// First source-sink path, in adjacency order, over arcs with positive flow.
fn earliest_path(steg: &StegGraph, adj: &[Vec<usize>], flow: &[Amount]) -> Option<Vec<usize>> {
    let arcs = steg.arcs();
    let (source, sink) = (steg.source_node(), steg.sink_node());
    let mut dead = vec![false; adj.len()];
    let mut next = vec![0usize; adj.len()];
    let mut path: Vec<usize> = Vec::new();
    let mut u = source;
    loop {
        if u == sink {
            return Some(path);
        }
        let step = adj[u][next[u]..]
            .iter()
            .position(|&a| !flow[a].is_zero() && !dead[arcs[a].to]);
        match step {
            Some(k) => {
                next[u] += k;
                let a = adj[u][next[u]];
                path.push(a);
                u = arcs[a].to;
            }
            None => {
                dead[u] = true;
                let a = path.pop()?;
                u = arcs[a].from;
                next[u] += 1;
            }
        }
    }
}
