//! Temporal flow networks: directed graphs whose edges carry sets of days.

mod format;

pub use format::{
    parse_document, parse_network, serialize_network, EdgeRecord, LabelSpec, NetworkDocument,
    ParseError, ParseErrorKind,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A day on which an edge is available. Real labels are always `>= 1`; `0`
/// only appears as the artificial initial day of a buffer trajectory.
pub type Label = u32;

/// Time on a doubled integer scale.
///
/// Departure on day `l` is `2l`, arrival at the end of day `l` is `2l + 1`,
/// so arrivals of day `l` precede departures of any later day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePoint(u64);

impl TimePoint {
    pub const ORIGIN: TimePoint = TimePoint(0);

    pub fn departure(label: Label) -> Self {
        TimePoint(2 * u64::from(label))
    }

    pub fn arrival(label: Label) -> Self {
        TimePoint(2 * u64::from(label) + 1)
    }

    pub fn from_half_units(half_units: u64) -> Self {
        TimePoint(half_units)
    }

    pub fn half_units(self) -> u64 {
        self.0
    }

    pub fn is_departure(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn is_arrival(self) -> bool {
        self.0 % 2 == 1
    }

    /// The day this point belongs to.
    pub fn label(self) -> Label {
        (self.0 / 2) as Label
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Storage capacity of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Buffer {
    Bounded(u64),
    Unbounded,
}

impl Buffer {
    pub fn limit(self) -> Option<u64> {
        match self {
            Buffer::Bounded(b) => Some(b),
            Buffer::Unbounded => None,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Buffer::Bounded(_))
    }
}

impl fmt::Display for Buffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Buffer::Bounded(b) => write!(f, "{b}"),
            Buffer::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub capacity: u64,
    pub labels: BTreeSet<Label>,
}

/// One availability of an edge: the edge `edge` on day `label`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeEdge {
    pub edge: String,
    pub label: Label,
}

impl TimeEdge {
    pub fn new(edge: impl Into<String>, label: Label) -> Self {
        TimeEdge {
            edge: edge.into(),
            label,
        }
    }
}

impl fmt::Display for TimeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.edge, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("source and sink must be distinct (both are {0})")]
    SourceIsSink(String),
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("edge {0} enters the source")]
    EdgeIntoSource(String),
    #[error("edge {0} leaves the sink")]
    EdgeOutOfSink(String),
    #[error("edge {0}: capacity must be ≥ 1")]
    ZeroCapacity(String),
    #[error("edge {0}: label must be ≥ 1")]
    ZeroLabel(String),
    #[error("edge {0} has no labels")]
    NoLabels(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("buffer of {0} must be at least 1")]
    ZeroBuffer(String),
    #[error("source and sink buffers are unbounded; cannot bound {0}")]
    BoundedTerminal(String),
    #[error("{0} is not a time-edge of the graph")]
    NotATimeEdge(TimeEdge),
    #[error("journey is empty")]
    EmptyJourney,
    #[error("time-edges {0} and {1} are not consecutive on a journey")]
    BrokenJourney(TimeEdge, TimeEdge),
}

/// Accumulates vertices, edges and buffers and validates them on [`build`].
///
/// [`build`]: GraphBuilder::build
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    source: String,
    sink: String,
    vertices: BTreeSet<String>,
    edges: Vec<Edge>,
    buffers: Vec<(String, Buffer)>,
}

impl GraphBuilder {
    pub fn vertex(&mut self, id: impl Into<String>) -> &mut Self {
        self.vertices.insert(id.into());
        self
    }

    pub fn edge(
        &mut self,
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        capacity: u64,
        labels: impl IntoIterator<Item = Label>,
    ) -> &mut Self {
        let edge = Edge {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            capacity,
            labels: labels.into_iter().collect(),
        };
        self.vertices.insert(edge.tail.clone());
        self.vertices.insert(edge.head.clone());
        self.edges.push(edge);
        self
    }

    pub fn buffer(&mut self, vertex: impl Into<String>, buffer: Buffer) -> &mut Self {
        self.buffers.push((vertex.into(), buffer));
        self
    }

    pub fn build(&self) -> Result<TemporalGraph, GraphError> {
        if self.source == self.sink {
            return Err(GraphError::SourceIsSink(self.source.clone()));
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.as_str()) {
                return Err(GraphError::DuplicateEdge(e.id.clone()));
            }
            validate_edge(e, &self.source, &self.sink)?;
        }
        let mut vertices = self.vertices.clone();
        vertices.insert(self.source.clone());
        vertices.insert(self.sink.clone());

        let mut buffers = BTreeMap::new();
        for (v, b) in &self.buffers {
            if !vertices.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
            match b {
                Buffer::Bounded(0) => return Err(GraphError::ZeroBuffer(v.clone())),
                Buffer::Bounded(_) if *v == self.source || *v == self.sink => {
                    return Err(GraphError::BoundedTerminal(v.clone()))
                }
                Buffer::Bounded(_) => {
                    buffers.insert(v.clone(), *b);
                }
                Buffer::Unbounded => {
                    buffers.remove(v);
                }
            }
        }

        let mut edges = self.edges.clone();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(TemporalGraph::assemble(
            vertices,
            edges,
            buffers,
            self.source.clone(),
            self.sink.clone(),
        ))
    }
}

fn validate_edge(e: &Edge, source: &str, sink: &str) -> Result<(), GraphError> {
    if e.tail == e.head {
        return Err(GraphError::SelfLoop(e.id.clone()));
    }
    if e.head == source {
        return Err(GraphError::EdgeIntoSource(e.id.clone()));
    }
    if e.tail == sink {
        return Err(GraphError::EdgeOutOfSink(e.id.clone()));
    }
    if e.capacity == 0 {
        return Err(GraphError::ZeroCapacity(e.id.clone()));
    }
    if e.labels.is_empty() {
        return Err(GraphError::NoLabels(e.id.clone()));
    }
    if e.labels.contains(&0) {
        return Err(GraphError::ZeroLabel(e.id.clone()));
    }
    Ok(())
}

/// A validated temporal flow network.
///
/// Vertices iterate in id order and edges in edge-id order, so everything
/// derived from a graph is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalGraph {
    vertices: Vec<String>,
    vertex_index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<String, usize>,
    // (tail, head) vertex indices, parallel to `edges`
    endpoints: Vec<(usize, usize)>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    // every time-edge as (label, edge index), sorted
    by_label: Vec<(Label, usize)>,
    buffers: BTreeMap<String, Buffer>,
    source: String,
    sink: String,
}

impl TemporalGraph {
    pub fn builder(source: impl Into<String>, sink: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            source: source.into(),
            sink: sink.into(),
            vertices: BTreeSet::new(),
            edges: Vec::new(),
            buffers: Vec::new(),
        }
    }

    fn assemble(
        vertices: BTreeSet<String>,
        edges: Vec<Edge>,
        buffers: BTreeMap<String, Buffer>,
        source: String,
        sink: String,
    ) -> Self {
        let vertices: Vec<String> = vertices.into_iter().collect();
        let vertex_index: BTreeMap<String, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        let endpoints: Vec<(usize, usize)> = edges
            .iter()
            .map(|e| (vertex_index[&e.tail], vertex_index[&e.head]))
            .collect();
        let mut out_edges = vec![Vec::new(); vertices.len()];
        let mut in_edges = vec![Vec::new(); vertices.len()];
        for (i, &(t, h)) in endpoints.iter().enumerate() {
            out_edges[t].push(i);
            in_edges[h].push(i);
        }
        let mut by_label: Vec<(Label, usize)> = edges
            .iter()
            .enumerate()
            .flat_map(|(i, e)| e.labels.iter().map(move |&l| (l, i)))
            .collect();
        by_label.sort_unstable();
        TemporalGraph {
            vertices,
            vertex_index,
            edges,
            edge_index,
            endpoints,
            out_edges,
            in_edges,
            by_label,
            buffers,
            source,
            sink,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn sink(&self) -> &str {
        &self.sink
    }

    pub fn vertices(&self) -> impl Iterator<Item = &str> + '_ {
        self.vertices.iter().map(String::as_str)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: &str) -> bool {
        self.vertex_index.contains_key(v)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    pub fn out_edges<'a>(&'a self, v: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        let idx = self.vertex_index.get(v).copied();
        idx.into_iter()
            .flat_map(move |i| self.out_edges[i].iter().map(move |&e| &self.edges[e]))
    }

    pub fn in_edges<'a>(&'a self, v: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        let idx = self.vertex_index.get(v).copied();
        idx.into_iter()
            .flat_map(move |i| self.in_edges[i].iter().map(move |&e| &self.edges[e]))
    }

    pub fn buffer(&self, v: &str) -> Buffer {
        self.buffers.get(v).copied().unwrap_or(Buffer::Unbounded)
    }

    /// Bounded buffers, by vertex.
    pub fn bounded_buffers(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.buffers
            .iter()
            .filter_map(|(v, b)| b.limit().map(|l| (v.as_str(), l)))
    }

    pub fn has_bounded_buffers(&self) -> bool {
        !self.buffers.is_empty()
    }

    /// All time-edges in (edge id, label) order.
    pub fn time_edges(&self) -> impl Iterator<Item = TimeEdge> + '_ {
        self.edges.iter().flat_map(|e| {
            e.labels
                .iter()
                .map(move |&l| TimeEdge::new(e.id.clone(), l))
        })
    }

    /// `|E_L|`.
    pub fn time_edge_count(&self) -> usize {
        self.by_label.len()
    }

    pub fn contains_time_edge(&self, te: &TimeEdge) -> bool {
        self.edge(&te.edge)
            .is_some_and(|e| e.labels.contains(&te.label))
    }

    /// Largest label in the graph, 0 when there are no time-edges.
    pub fn l_max(&self) -> Label {
        self.by_label.last().map_or(0, |&(l, _)| l)
    }

    /// Labels on edges incident to `v`, plus the initial day 0.
    pub fn relevant_labels(&self, v: &str) -> BTreeSet<Label> {
        let mut labels = BTreeSet::from([0]);
        for e in self.out_edges(v).chain(self.in_edges(v)) {
            labels.extend(e.labels.iter().copied());
        }
        labels
    }

    /// Copy of the graph without any label larger than `deadline`. Edges left
    /// with no labels are dropped.
    pub fn restrict_to_deadline(&self, deadline: Label) -> TemporalGraph {
        if deadline >= self.l_max() {
            return self.clone();
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let labels: BTreeSet<Label> = e.labels.range(..=deadline).copied().collect();
                (!labels.is_empty()).then(|| Edge {
                    labels,
                    ..e.clone()
                })
            })
            .collect();
        TemporalGraph::assemble(
            self.vertices.iter().cloned().collect(),
            edges,
            self.buffers.clone(),
            self.source.clone(),
            self.sink.clone(),
        )
    }

    /// Copy of the graph with the given time-edges removed.
    pub fn without_time_edges(&self, removed: &BTreeSet<TimeEdge>) -> TemporalGraph {
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let labels: BTreeSet<Label> = e
                    .labels
                    .iter()
                    .copied()
                    .filter(|&l| !removed.contains(&TimeEdge::new(e.id.clone(), l)))
                    .collect();
                (!labels.is_empty()).then(|| Edge {
                    labels,
                    ..e.clone()
                })
            })
            .collect();
        TemporalGraph::assemble(
            self.vertices.iter().cloned().collect(),
            edges,
            self.buffers.clone(),
            self.source.clone(),
            self.sink.clone(),
        )
    }

    /// Same topology with every edge's labels replaced.
    pub(crate) fn with_labels(&self, labels: &[BTreeSet<Label>]) -> TemporalGraph {
        let edges = self
            .edges
            .iter()
            .zip(labels)
            .map(|(e, l)| Edge {
                labels: l.clone(),
                ..e.clone()
            })
            .collect();
        TemporalGraph::assemble(
            self.vertices.iter().cloned().collect(),
            edges,
            self.buffers.clone(),
            self.source.clone(),
            self.sink.clone(),
        )
    }

    /// Earliest arrival at every vertex starting from `from` at day 0.
    ///
    /// Time-edges are scanned in label order; `(x, y, l)` improves `y` only
    /// when `x` was reached strictly before `l`.
    fn earliest_arrivals(&self, from: usize, target: Option<usize>) -> Arrivals {
        let n = self.vertices.len();
        let mut arrival: Vec<Option<Label>> = vec![None; n];
        let mut via: Vec<Option<(usize, Label)>> = vec![None; n];
        arrival[from] = Some(0);
        for &(l, e) in &self.by_label {
            let (x, y) = self.endpoints[e];
            let Some(ax) = arrival[x] else { continue };
            if ax < l && arrival[y].is_none() {
                arrival[y] = Some(l);
                via[y] = Some((e, l));
                if Some(y) == target {
                    break;
                }
            }
        }
        Arrivals { arrival, via }
    }

    /// Temporal distance: the minimum arrival time over all `u → v` journeys.
    ///
    /// `Some(0)` when `u == v`, `None` when no journey exists or a vertex is unknown.
    pub fn temporal_distance(&self, u: &str, v: &str) -> Option<Label> {
        let (&ui, &vi) = (self.vertex_index.get(u)?, self.vertex_index.get(v)?);
        self.earliest_arrivals(ui, Some(vi)).arrival[vi]
    }

    /// A journey achieving [`temporal_distance`](Self::temporal_distance).
    /// For `u == v` the result is `None`: there is no non-empty journey to report.
    pub fn foremost_journey(&self, u: &str, v: &str) -> Option<Journey> {
        let (&ui, &vi) = (self.vertex_index.get(u)?, self.vertex_index.get(v)?);
        if ui == vi {
            return None;
        }
        let arrivals = self.earliest_arrivals(ui, Some(vi));
        arrivals.arrival[vi]?;
        let mut hops = Vec::new();
        let mut cur = vi;
        while cur != ui {
            let (e, l) = arrivals.via[cur].expect("reached vertex has a predecessor");
            hops.push(TimeEdge::new(self.edges[e].id.clone(), l));
            cur = self.endpoints[e].0;
        }
        hops.reverse();
        Some(Journey { time_edges: hops })
    }

    /// Whether some journey leads from the source to the sink.
    pub fn has_source_sink_journey(&self) -> bool {
        self.temporal_distance(&self.source, &self.sink).is_some()
    }
}

struct Arrivals {
    arrival: Vec<Option<Label>>,
    via: Vec<Option<(usize, Label)>>,
}

/// A non-empty sequence of time-edges forming a directed walk with strictly
/// increasing labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Journey {
    time_edges: Vec<TimeEdge>,
}

impl Journey {
    pub fn new(g: &TemporalGraph, time_edges: Vec<TimeEdge>) -> Result<Self, GraphError> {
        if time_edges.is_empty() {
            return Err(GraphError::EmptyJourney);
        }
        for te in &time_edges {
            if !g.contains_time_edge(te) {
                return Err(GraphError::NotATimeEdge(te.clone()));
            }
        }
        for pair in time_edges.windows(2) {
            let a = g.edge(&pair[0].edge).expect("checked above");
            let b = g.edge(&pair[1].edge).expect("checked above");
            if a.head != b.tail || pair[0].label >= pair[1].label {
                return Err(GraphError::BrokenJourney(pair[0].clone(), pair[1].clone()));
            }
        }
        Ok(Journey { time_edges })
    }

    pub fn time_edges(&self) -> &[TimeEdge] {
        &self.time_edges
    }

    pub fn arrival_time(&self) -> Label {
        self.time_edges.last().map_or(0, |te| te.label)
    }

    pub fn len(&self) -> usize {
        self.time_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_edges.is_empty()
    }

    /// The vertex sequence of the journey in `g`.
    pub fn vertices<'a>(&self, g: &'a TemporalGraph) -> Vec<&'a str> {
        let mut out = Vec::with_capacity(self.time_edges.len() + 1);
        for (i, te) in self.time_edges.iter().enumerate() {
            let e = g.edge(&te.edge).expect("journey built against this graph");
            if i == 0 {
                out.push(e.tail.as_str());
            }
            out.push(e.head.as_str());
        }
        out
    }
}

impl fmt::Display for Journey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, te) in self.time_edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{te}")?;
        }
        f.write_str("]")
    }
}
