//! The simplified time-extended graph.
//!
//! Every vertex gets a copy at time 0 plus one copy per departure (`2l`) and
//! arrival (`2l + 1`) event. Consecutive copies of a vertex are joined by a
//! vertical arc that models storage; each time-edge `(u, v, l)` becomes a
//! crossing arc from `(u, 2l)` to `(v, 2l + 1)`. Static flows on this DAG
//! correspond to temporal flows, and minimum cuts made of crossing arcs to
//! minimum temporal cuts.
//!
//! Vertical arcs are capacitated at `B(v)` when the buffer is bounded, which
//! bounds the morning, noon and evening contents of the buffer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::maxflow::{Capacity, StaticArc, StaticNetwork};
use crate::temporal_flow::{buffer_trajectories, Amount, TemporalCut, TemporalFlow};
use crate::temporal_graph::{Label, TemporalGraph, TimeEdge, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StegNode {
    pub vertex: String,
    pub time: TimePoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Vertical,
    /// Transmission along the given time-edge.
    Crossing(TimeEdge),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StegArc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
    pub kind: ArcKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StegError {
    #[error("flow vector has {got} entries for {expected} arcs")]
    FlowLength { expected: usize, got: usize },
    #[error("flow {flow} on arc {arc} ({from} -> {to}) exceeds capacity {capacity}")]
    OverCapacity {
        arc: usize,
        from: String,
        to: String,
        flow: u64,
        capacity: u64,
    },
    #[error("flow not conserved at copy {node}: in {inflow}, out {outflow}")]
    NotConserved {
        node: String,
        inflow: u128,
        outflow: u128,
    },
    #[error("arc {0} is not an arc of this graph")]
    UnknownArc(usize),
    #[error("cut contains vertical arc {0} ({1}); storage-limited cuts have no temporal-cut form")]
    VerticalArcInCut(usize, String),
    #[error("time-edges {0:?} do not separate source from sink")]
    NotACut(Vec<TimeEdge>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StegGraph {
    nodes: Vec<StegNode>,
    arcs: Vec<StegArc>,
    node_index: BTreeMap<StegNode, usize>,
    crossing: BTreeMap<TimeEdge, usize>,
    source_node: usize,
    sink_node: usize,
    deadline: Label,
}

impl StegGraph {
    /// Builds the graph for `g` restricted to labels `<= deadline`.
    pub fn build(g: &TemporalGraph, deadline: Label) -> StegGraph {
        let g = g.restrict_to_deadline(deadline);
        let mut copies: BTreeSet<(&str, TimePoint)> =
            g.vertices().map(|v| (v, TimePoint::ORIGIN)).collect();
        for e in g.edges() {
            for &l in &e.labels {
                copies.insert((e.tail.as_str(), TimePoint::departure(l)));
                copies.insert((e.head.as_str(), TimePoint::arrival(l)));
            }
        }
        let nodes: Vec<StegNode> = copies
            .iter()
            .map(|&(v, time)| StegNode {
                vertex: v.to_string(),
                time,
            })
            .collect();
        let node_index: BTreeMap<StegNode, usize> = nodes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();

        let mut arcs = Vec::new();
        // copies of one vertex are contiguous and sorted by time
        for (i, pair) in nodes.windows(2).enumerate() {
            if pair[0].vertex == pair[1].vertex {
                let capacity = match g.buffer(&pair[0].vertex).limit() {
                    Some(b) => Capacity::Finite(b),
                    None => Capacity::Unbounded,
                };
                arcs.push(StegArc {
                    from: i,
                    to: i + 1,
                    capacity,
                    kind: ArcKind::Vertical,
                });
            }
        }
        let mut crossing = BTreeMap::new();
        for te in g.time_edges() {
            let e = g.edge(&te.edge).expect("time-edge of g");
            let from = node_index[&StegNode {
                vertex: e.tail.clone(),
                time: TimePoint::departure(te.label),
            }];
            let to = node_index[&StegNode {
                vertex: e.head.clone(),
                time: TimePoint::arrival(te.label),
            }];
            crossing.insert(te.clone(), arcs.len());
            arcs.push(StegArc {
                from,
                to,
                capacity: Capacity::Finite(e.capacity),
                kind: ArcKind::Crossing(te),
            });
        }
        let source_node = node_index[&StegNode {
            vertex: g.source().to_string(),
            time: TimePoint::ORIGIN,
        }];
        let sink_node = nodes
            .iter()
            .rposition(|n| n.vertex == g.sink())
            .expect("sink has a copy at time 0");
        StegGraph {
            nodes,
            arcs,
            node_index,
            crossing,
            source_node,
            sink_node,
            deadline,
        }
    }

    pub fn nodes(&self) -> &[StegNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[StegArc] {
        &self.arcs
    }

    pub fn source_node(&self) -> usize {
        self.source_node
    }

    pub fn sink_node(&self) -> usize {
        self.sink_node
    }

    pub fn deadline(&self) -> Label {
        self.deadline
    }

    pub fn node_index(&self, vertex: &str, time: TimePoint) -> Option<usize> {
        self.node_index
            .get(&StegNode {
                vertex: vertex.to_string(),
                time,
            })
            .copied()
    }

    /// The crossing arc of a time-edge.
    pub fn crossing_arc(&self, te: &TimeEdge) -> Option<usize> {
        self.crossing.get(te).copied()
    }

    pub fn network(&self) -> StaticNetwork {
        StaticNetwork {
            node_count: self.nodes.len(),
            arcs: self
                .arcs
                .iter()
                .map(|a| StaticArc {
                    from: a.from,
                    to: a.to,
                    capacity: a.capacity,
                })
                .collect(),
            source: self.source_node,
            sink: self.sink_node,
        }
    }

    fn node_name(&self, i: usize) -> String {
        let n = &self.nodes[i];
        format!("{}@{}", n.vertex, n.time)
    }

    /// Checks an integral static flow and translates it into a temporal flow
    /// on `g`: each time-edge carries the flow of its crossing arc.
    pub fn static_flow_to_temporal(
        &self,
        g: &TemporalGraph,
        flow: &[u64],
    ) -> Result<TemporalFlow, StegError> {
        if flow.len() != self.arcs.len() {
            return Err(StegError::FlowLength {
                expected: self.arcs.len(),
                got: flow.len(),
            });
        }
        let mut inflow = vec![0u128; self.nodes.len()];
        let mut outflow = vec![0u128; self.nodes.len()];
        for (i, (a, &f)) in self.arcs.iter().zip(flow).enumerate() {
            if let Capacity::Finite(c) = a.capacity {
                if f > c {
                    return Err(StegError::OverCapacity {
                        arc: i,
                        from: self.node_name(a.from),
                        to: self.node_name(a.to),
                        flow: f,
                        capacity: c,
                    });
                }
            }
            outflow[a.from] += u128::from(f);
            inflow[a.to] += u128::from(f);
        }
        for node in 0..self.nodes.len() {
            if node != self.source_node && node != self.sink_node && inflow[node] != outflow[node] {
                return Err(StegError::NotConserved {
                    node: self.node_name(node),
                    inflow: inflow[node],
                    outflow: outflow[node],
                });
            }
        }
        let assignments = self
            .arcs
            .iter()
            .zip(flow)
            .filter_map(|(a, &f)| match &a.kind {
                ArcKind::Crossing(te) if f > 0 => {
                    Some((te.clone(), Amount::from_integer(f.into())))
                }
                _ => None,
            })
            .collect();
        Ok(buffer_trajectories(g, assignments))
    }

    /// Maps a cut made of crossing arcs to the corresponding temporal cut and
    /// checks that removing it leaves no source-sink journey.
    pub fn static_cut_to_temporal(
        &self,
        g: &TemporalGraph,
        cut_arcs: &[usize],
    ) -> Result<TemporalCut, StegError> {
        let mut time_edges = BTreeSet::new();
        let mut capacity = 0u64;
        for &i in cut_arcs {
            let a = self.arcs.get(i).ok_or(StegError::UnknownArc(i))?;
            match &a.kind {
                ArcKind::Vertical => {
                    return Err(StegError::VerticalArcInCut(
                        i,
                        format!("{} -> {}", self.node_name(a.from), self.node_name(a.to)),
                    ))
                }
                ArcKind::Crossing(te) => {
                    if time_edges.insert(te.clone()) {
                        capacity += a.capacity.finite().expect("crossing arcs are finite");
                    }
                }
            }
        }
        let remaining = g
            .restrict_to_deadline(self.deadline)
            .without_time_edges(&time_edges);
        if remaining.has_source_sink_journey() {
            return Err(StegError::NotACut(time_edges.into_iter().collect()));
        }
        Ok(TemporalCut {
            time_edges,
            capacity,
        })
    }

    /// Text listing: `node <vertex> <half_units>` lines, then
    /// `arc <kind> <from> <to> <cap>` lines with nodes written `vertex@half_units`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            writeln!(out, "node {} {}", n.vertex, n.time).unwrap();
        }
        for a in &self.arcs {
            let kind = match a.kind {
                ArcKind::Vertical => "vertical",
                ArcKind::Crossing(_) => "crossing",
            };
            writeln!(
                out,
                "arc {kind} {} {} {}",
                self.node_name(a.from),
                self.node_name(a.to),
                a.capacity
            )
            .unwrap();
        }
        out
    }

    /// Flow on every arc induced by a temporal flow on the same graph.
    ///
    /// Crossing arcs carry `f(e, l)`. Vertical arcs carry the buffer content
    /// between events: the noon content after a departure copy, the evening
    /// content after an arrival copy. For the source they carry the total of
    /// all later departures.
    pub(crate) fn induced_flow(&self, g: &TemporalGraph, tf: &TemporalFlow) -> Vec<Amount> {
        let mut flow = vec![Amount::zero(); self.arcs.len()];
        let mut source_departures: BTreeMap<Label, Amount> = BTreeMap::new();
        for (i, a) in self.arcs.iter().enumerate() {
            if let ArcKind::Crossing(te) = &a.kind {
                let f = tf.amount(te);
                if self.nodes[a.from].vertex == g.source() {
                    *source_departures
                        .entry(te.label)
                        .or_insert_with(Amount::zero) += &f;
                }
                flow[i] = f;
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if a.kind != ArcKind::Vertical {
                continue;
            }
            let node = &self.nodes[a.from];
            let day = node.time.label();
            flow[i] = if node.vertex == g.source() {
                source_departures
                    .range(day + u32::from(node.time != TimePoint::ORIGIN)..)
                    .map(|(_, f)| f)
                    .sum()
            } else if node.time == TimePoint::ORIGIN {
                Amount::zero()
            } else {
                let state = tf
                    .state(&node.vertex, day)
                    .expect("every copy day is a relevant label");
                if node.time.is_departure() {
                    state.noon.clone()
                } else {
                    state.evening.clone()
                }
            };
        }
        flow
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxflow::{max_flow, min_cut};
    use crate::temporal_graph::parse_network;

    fn late_link() -> TemporalGraph {
        parse_network("source s\nsink t\nedge sv s v 10 1,7\nedge vt v t 2 8\n").unwrap()
    }

    #[test]
    fn late_link_copies_and_crossings() {
        let g = late_link();
        let steg = StegGraph::build(&g, 8);
        let v_times: Vec<u64> = steg
            .nodes()
            .iter()
            .filter(|n| n.vertex == "v")
            .map(|n| n.time.half_units())
            .collect();
        assert_eq!(v_times, vec![0, 3, 15, 16]);
        let crossings: Vec<(String, String, Capacity)> = steg
            .arcs()
            .iter()
            .filter(|a| matches!(a.kind, ArcKind::Crossing(_)))
            .map(|a| (steg.node_name(a.from), steg.node_name(a.to), a.capacity))
            .collect();
        assert_eq!(
            crossings,
            vec![
                ("s@2".into(), "v@3".into(), Capacity::Finite(10)),
                ("s@14".into(), "v@15".into(), Capacity::Finite(10)),
                ("v@16".into(), "t@17".into(), Capacity::Finite(2)),
            ]
        );
        assert!(steg.nodes().len() <= 3 + 2 * 3);
        assert!(steg.arcs().len() <= 3 + 3 * 3);
        assert_eq!(steg.node_name(steg.source_node()), "s@0");
        assert_eq!(steg.node_name(steg.sink_node()), "t@17");
    }

    #[test]
    fn empty_graph_has_isolated_copies() {
        let g = parse_network("source s\nsink t\nvertex x\n").unwrap();
        let steg = StegGraph::build(&g, 1);
        assert_eq!(steg.nodes().len(), 3);
        assert!(steg.arcs().is_empty());
    }

    #[test]
    fn single_edge() {
        let g = parse_network("source s\nsink t\nedge e s t 5 3\n").unwrap();
        let steg = StegGraph::build(&g, 3);
        assert_eq!(steg.nodes().len(), 4);
        assert_eq!(steg.arcs().len(), 3);
        let mf = max_flow(&steg.network()).unwrap();
        assert_eq!(mf.value, 5);
        let tf = steg.static_flow_to_temporal(&g, &mf.flow).unwrap();
        assert_eq!(
            tf.amount(&TimeEdge::new("e", 3)),
            Amount::from_integer(5.into())
        );
        let cut = steg
            .static_cut_to_temporal(&g, &[steg.crossing_arc(&TimeEdge::new("e", 3)).unwrap()])
            .unwrap();
        assert_eq!(cut.capacity, 5);
    }

    #[test]
    fn late_link_cuts() {
        let g = late_link();
        let steg = StegGraph::build(&g, 8);
        let vt = steg.crossing_arc(&TimeEdge::new("vt", 8)).unwrap();
        let cut = steg.static_cut_to_temporal(&g, &[vt]).unwrap();
        assert_eq!(cut.capacity, 2);
        let both = [
            steg.crossing_arc(&TimeEdge::new("sv", 1)).unwrap(),
            steg.crossing_arc(&TimeEdge::new("sv", 7)).unwrap(),
        ];
        let cut = steg.static_cut_to_temporal(&g, &both).unwrap();
        assert_eq!(cut.capacity, 20);
        assert!(matches!(
            steg.static_cut_to_temporal(&g, &both[..1]),
            Err(StegError::NotACut(_))
        ));

        let mf = max_flow(&steg.network()).unwrap();
        assert_eq!(mf.value, 2);
        assert_eq!(min_cut(&steg.network(), &mf.flow).unwrap(), vec![vt]);
    }

    #[test]
    fn vertical_arcs_are_not_temporal_cuts() {
        let g = late_link();
        let steg = StegGraph::build(&g, 8);
        let vertical = steg
            .arcs()
            .iter()
            .position(|a| a.kind == ArcKind::Vertical)
            .unwrap();
        assert!(matches!(
            steg.static_cut_to_temporal(&g, &[vertical]),
            Err(StegError::VerticalArcInCut(..))
        ));
    }

    #[test]
    fn infeasible_static_flow_is_rejected() {
        let g = late_link();
        let steg = StegGraph::build(&g, 8);
        let mut flow = vec![0; steg.arcs().len()];
        let vt = steg.crossing_arc(&TimeEdge::new("vt", 8)).unwrap();
        flow[vt] = 1;
        assert!(matches!(
            steg.static_flow_to_temporal(&g, &flow),
            Err(StegError::NotConserved { .. })
        ));
        flow[vt] = 3;
        assert!(matches!(
            steg.static_flow_to_temporal(&g, &flow),
            Err(StegError::OverCapacity { .. })
        ));
    }

    #[test]
    fn zero_flow_maps_to_zero() {
        let g = late_link();
        let steg = StegGraph::build(&g, 8);
        let tf = steg
            .static_flow_to_temporal(&g, &vec![0; steg.arcs().len()])
            .unwrap();
        assert!(tf.assignments().is_empty());
    }

    #[test]
    fn bounded_buffer_caps_vertical_arcs() {
        let g = parse_network("source s\nsink t\nbuffer v 3\nedge a s v 10 1\nedge b v t 10 2\n")
            .unwrap();
        let steg = StegGraph::build(&g, 2);
        let mf = max_flow(&steg.network()).unwrap();
        assert_eq!(mf.value, 3);
    }

    #[test]
    fn dump_format() {
        let g = parse_network("source s\nsink t\nedge e s t 5 3\n").unwrap();
        let dump = StegGraph::build(&g, 3).dump();
        assert_eq!(
            dump,
            "node s 0\nnode s 6\nnode t 0\nnode t 7\n\
             arc vertical s@0 s@6 inf\narc vertical t@0 t@7 inf\narc crossing s@6 t@7 5\n"
        );
    }
}
