//! Maximum temporal flow on temporal networks.
//!
//! A temporal network is a directed graph whose edges exist only on a finite
//! set of integer days. Commodity leaves the source, crosses an edge on one of
//! its days and waits in node buffers until a later day. This crate computes
//! the maximum amount that can reach the sink by a deadline, minimum temporal
//! cuts, decompositions of temporal flows into journeys, and statistics of the
//! maximum flow when some edge days are drawn at random.
//!
//! The main pipeline is [`temporal_flow::solve_mtf`]: the network is turned
//! into a small static DAG ([`steg::StegGraph`]) on which an exact max-flow
//! ([`maxflow`]) is run. [`lp_oracle`] solves the same problem as an exact
//! rational linear program and serves as an independent check.

pub mod cli;
pub mod lp_oracle;
pub mod maxflow;
pub mod random_models;
pub mod steg;
pub mod temporal_flow;
pub mod temporal_graph;

pub use temporal_flow::{
    decompose_into_journeys, flow_value, min_temporal_cut, solve_mtf, verify_flow, Amount,
    JourneyFlow, TemporalCut, TemporalFlow,
};
pub use temporal_graph::{
    parse_network, serialize_network, Buffer, Journey, Label, TemporalGraph, TimeEdge, TimePoint,
};
