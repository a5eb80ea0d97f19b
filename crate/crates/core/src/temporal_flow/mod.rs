//! Temporal flows: buffer trajectories, feasibility, maximum flow by a
//! deadline, minimum temporal cuts and journey decomposition.
//!
//! A flow assigns an amount to every time-edge. Buffer contents follow from
//! the assignments by one pass over each vertex's relevant days: the morning
//! content is the previous evening's, noon is morning minus departures, and
//! evening is noon plus arrivals.
//!
//! "Feasible" here means that all capacity, buffer and availability
//! conditions hold; a flow with value `> 0` is called positive.

mod decompose;
mod json;

pub use decompose::decompose_into_journeys;
pub use json::{amount_to_json, flow_from_json, flow_to_json, FlowJsonError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::maxflow::{self, MaxFlowError};
use crate::steg::{StegError, StegGraph};
use crate::temporal_graph::{Journey, Label, TemporalGraph, TimeEdge};

/// Flow amounts are exact rationals; solver output is always integral.
pub type Amount = BigRational;

pub(crate) fn amount(n: u64) -> Amount {
    Amount::from_integer(n.into())
}

/// Buffer content of a vertex on one relevant day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferState {
    pub label: Label,
    pub morning: Amount,
    pub noon: Amount,
    pub evening: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalFlow {
    assignments: BTreeMap<TimeEdge, Amount>,
    trajectories: BTreeMap<String, Vec<BufferState>>,
}

impl TemporalFlow {
    /// Non-zero assignments, including any that do not name a time-edge of the graph.
    pub fn assignments(&self) -> &BTreeMap<TimeEdge, Amount> {
        &self.assignments
    }

    pub fn amount(&self, te: &TimeEdge) -> Amount {
        self.assignments
            .get(te)
            .cloned()
            .unwrap_or_else(Amount::zero)
    }

    /// Buffer states of `v` in increasing day order; `None` for the source.
    pub fn trajectory(&self, v: &str) -> Option<&[BufferState]> {
        self.trajectories.get(v).map(Vec::as_slice)
    }

    pub fn state(&self, v: &str, label: Label) -> Option<&BufferState> {
        let states = self.trajectories.get(v)?;
        states
            .binary_search_by_key(&label, |s| s.label)
            .ok()
            .map(|i| &states[i])
    }
}

/// Derives buffer trajectories of every vertex except the source.
///
/// Assignments on pairs that are not time-edges of `g` are kept in the
/// result but do not move any buffer; [`verify_flow`] reports them.
pub fn buffer_trajectories(
    g: &TemporalGraph,
    assignments: BTreeMap<TimeEdge, Amount>,
) -> TemporalFlow {
    let assignments: BTreeMap<TimeEdge, Amount> = assignments
        .into_iter()
        .filter(|(_, a)| !a.is_zero())
        .collect();
    let mut trajectories = BTreeMap::new();
    for v in g.vertices().filter(|&v| v != g.source()) {
        let mut out_by_day: BTreeMap<Label, Amount> = BTreeMap::new();
        let mut in_by_day: BTreeMap<Label, Amount> = BTreeMap::new();
        for (te, f) in &assignments {
            let Some(e) = g.edge(&te.edge) else { continue };
            if te.label == 0 || !e.labels.contains(&te.label) {
                continue;
            }
            if e.tail == v {
                *out_by_day.entry(te.label).or_insert_with(Amount::zero) += f;
            }
            if e.head == v {
                *in_by_day.entry(te.label).or_insert_with(Amount::zero) += f;
            }
        }
        let mut states = Vec::new();
        let mut carried = Amount::zero();
        for l in g.relevant_labels(v) {
            let morning = carried;
            let noon = out_by_day
                .get(&l)
                .map_or_else(|| morning.clone(), |out| &morning - out);
            let evening = in_by_day
                .get(&l)
                .map_or_else(|| noon.clone(), |inc| &noon + inc);
            carried = evening.clone();
            states.push(BufferState {
                label: l,
                morning,
                noon,
                evening,
            });
        }
        trajectories.insert(v.to_string(), states);
    }
    TemporalFlow {
        assignments,
        trajectories,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Morning,
    Noon,
    Evening,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Morning => "morning",
            Phase::Noon => "noon",
            Phase::Evening => "evening",
        })
    }
}

/// A broken feasibility condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NegativeFlow {
        time_edge: TimeEdge,
        amount: Amount,
    },
    OverCapacity {
        time_edge: TimeEdge,
        amount: Amount,
        capacity: u64,
    },
    NegativeBuffer {
        vertex: String,
        label: Label,
        phase: Phase,
        amount: Amount,
    },
    BufferOverflow {
        vertex: String,
        label: Label,
        phase: Phase,
        amount: Amount,
        limit: u64,
    },
    FlowOnDayZero {
        time_edge: TimeEdge,
        amount: Amount,
    },
    UnknownEdge {
        time_edge: TimeEdge,
        amount: Amount,
    },
    UnavailableDay {
        time_edge: TimeEdge,
        amount: Amount,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeFlow { time_edge, amount } => {
                write!(f, "edge capacity: flow {amount} on {time_edge} is negative")
            }
            Violation::OverCapacity {
                time_edge,
                amount,
                capacity,
            } => write!(
                f,
                "edge capacity: flow {amount} on {time_edge} exceeds capacity {capacity}"
            ),
            Violation::NegativeBuffer {
                vertex,
                label,
                phase,
                amount,
            } => write!(
                f,
                "buffer bounds: {phase} content of {vertex} on day {label} is {amount} < 0"
            ),
            Violation::BufferOverflow {
                vertex,
                label,
                phase,
                amount,
                limit,
            } => write!(
                f,
                "buffer bounds: {phase} content of {vertex} on day {label} is {amount} > {limit}"
            ),
            Violation::FlowOnDayZero { time_edge, amount } => {
                write!(f, "no flow on day 0: {time_edge} carries {amount}")
            }
            Violation::UnknownEdge { time_edge, amount } => {
                write!(
                    f,
                    "availability: {time_edge} carries {amount} but the edge does not exist"
                )
            }
            Violation::UnavailableDay { time_edge, amount } => write!(
                f,
                "availability: {time_edge} carries {amount} but the edge is not available that day"
            ),
        }
    }
}

/// Checks every feasibility condition. Trajectories are recomputed from the
/// assignments; any trajectories stored in `tf` are ignored.
pub fn verify_flow(g: &TemporalGraph, tf: &TemporalFlow) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    for (te, f) in &tf.assignments {
        let (time_edge, amount) = (te.clone(), f.clone());
        if f.is_negative() {
            violations.push(Violation::NegativeFlow { time_edge, amount });
            continue;
        }
        let Some(e) = g.edge(&te.edge) else {
            violations.push(Violation::UnknownEdge { time_edge, amount });
            continue;
        };
        if te.label == 0 {
            violations.push(Violation::FlowOnDayZero { time_edge, amount });
        } else if !e.labels.contains(&te.label) {
            violations.push(Violation::UnavailableDay { time_edge, amount });
        } else if *f > self::amount(e.capacity) {
            violations.push(Violation::OverCapacity {
                time_edge,
                amount,
                capacity: e.capacity,
            });
        }
    }
    let recomputed = buffer_trajectories(g, tf.assignments.clone());
    for (v, states) in &recomputed.trajectories {
        let limit = g.buffer(v).limit();
        for s in states {
            for (phase, value) in [
                (Phase::Morning, &s.morning),
                (Phase::Noon, &s.noon),
                (Phase::Evening, &s.evening),
            ] {
                if value.is_negative() {
                    violations.push(Violation::NegativeBuffer {
                        vertex: v.clone(),
                        label: s.label,
                        phase,
                        amount: value.clone(),
                    });
                } else if let Some(b) = limit.filter(|&b| *value > amount(b)) {
                    violations.push(Violation::BufferOverflow {
                        vertex: v.clone(),
                        label: s.label,
                        phase,
                        amount: value.clone(),
                        limit: b,
                    });
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Amount held by the sink at the end of its last relevant day.
pub fn flow_value(g: &TemporalGraph, tf: &TemporalFlow) -> Amount {
    let recomputed;
    let states = match tf.trajectory(g.sink()) {
        Some(s) => s,
        None => {
            recomputed = buffer_trajectories(g, tf.assignments.clone());
            recomputed.trajectory(g.sink()).unwrap_or(&[])
        }
    };
    states
        .last()
        .map_or_else(Amount::zero, |s| s.evening.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error(transparent)]
    MaxFlow(#[from] MaxFlowError),
    #[error(transparent)]
    Steg(#[from] StegError),
    #[error("minimum temporal cuts need unbounded buffers; {0} is bounded")]
    BoundedBuffer(String),
    #[error("flow is infeasible: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Infeasible(Vec<Violation>),
    #[error("{amount} units on {time_edge} never reach the sink")]
    TrappedFlow { time_edge: TimeEdge, amount: Amount },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtfSolution {
    pub value: u64,
    pub flow: TemporalFlow,
}

/// Maximum amount that reaches the sink by the end of day `deadline`,
/// together with an integral flow achieving it.
pub fn solve_mtf(g: &TemporalGraph, deadline: Label) -> Result<MtfSolution, FlowError> {
    let steg = StegGraph::build(g, deadline);
    let mf = maxflow::max_flow(&steg.network())?;
    let flow = steg.static_flow_to_temporal(g, &mf.flow)?;
    Ok(MtfSolution {
        value: mf.value,
        flow,
    })
}

/// Value of [`solve_mtf`] without building the temporal flow.
pub fn max_temporal_flow_value(g: &TemporalGraph, deadline: Label) -> Result<u64, FlowError> {
    let steg = StegGraph::build(g, deadline);
    Ok(maxflow::max_flow(&steg.network())?.value)
}

/// A set of time-edges whose removal leaves no source-sink journey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalCut {
    pub time_edges: BTreeSet<TimeEdge>,
    pub capacity: u64,
}

/// A minimum-capacity temporal cut of the network restricted to `deadline`.
/// Requires every buffer to be unbounded.
pub fn min_temporal_cut(g: &TemporalGraph, deadline: Label) -> Result<TemporalCut, FlowError> {
    if let Some((v, _)) = g.bounded_buffers().next() {
        return Err(FlowError::BoundedBuffer(v.to_string()));
    }
    let steg = StegGraph::build(g, deadline);
    let net = steg.network();
    let mf = maxflow::max_flow(&net)?;
    let cut = maxflow::min_cut(&net, &mf.flow)?;
    Ok(steg.static_cut_to_temporal(g, &cut)?)
}

/// Flow of `amount` along a single journey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JourneyFlow {
    pub journey: Journey,
    pub amount: Amount,
}
