//! Line-oriented network file format.
//!
//! ```text
//! # comment
//! source s
//! sink t
//! vertex x                    # optional, for isolated vertices
//! buffer v 3                  # or `inf` (the default)
//! edge e1 s v 10 1,7          # id tail head capacity labels
//! edge e2 v t 2 ?             # `?` marks a random-label edge (models only)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{Buffer, GraphError, Label, TemporalGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based line number; `None` for whole-document problems.
    pub line: Option<usize>,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("label must be ≥ 1")]
    ZeroLabel,
    #[error("capacity must be ≥ 1")]
    ZeroCapacity,
    #[error("buffer must be ≥ 1 or inf")]
    ZeroBuffer,
    #[error("edge {0} enters the source")]
    EdgeIntoSource(String),
    #[error("edge {0} leaves the sink")]
    EdgeOutOfSink(String),
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("missing `source` record")]
    MissingSource,
    #[error("missing `sink` record")]
    MissingSink,
    #[error("duplicate `{0}` record")]
    DuplicateRecord(&'static str),
    #[error("source and sink must be distinct")]
    SourceIsSink,
    #[error("buffer of {0} cannot be bounded (source and sink store without limit)")]
    BoundedTerminal(String),
    #[error("edge {0} has a random label; use a random model for this file")]
    RandomLabel(String),
}

/// Labels of an edge record: either given, or drawn at random.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSpec {
    Fixed(BTreeSet<Label>),
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub capacity: u64,
    pub labels: LabelSpec,
    pub line: usize,
}

/// A syntactically valid network file whose records have been checked
/// against each other (endpoints, ids, terminals).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDocument {
    pub source: String,
    pub sink: String,
    pub vertices: BTreeSet<String>,
    pub buffers: BTreeMap<String, Buffer>,
    pub edges: Vec<EdgeRecord>,
}

impl NetworkDocument {
    /// Builds the graph, with `labels_for` supplying labels of random edges.
    pub fn to_graph_with(
        &self,
        mut labels_for: impl FnMut(&EdgeRecord) -> BTreeSet<Label>,
    ) -> Result<TemporalGraph, GraphError> {
        let mut b = TemporalGraph::builder(self.source.clone(), self.sink.clone());
        for v in &self.vertices {
            b.vertex(v.clone());
        }
        for e in &self.edges {
            let labels = match &e.labels {
                LabelSpec::Fixed(l) => l.clone(),
                LabelSpec::Random => labels_for(e),
            };
            b.edge(
                e.id.clone(),
                e.tail.clone(),
                e.head.clone(),
                e.capacity,
                labels,
            );
        }
        for (v, buf) in &self.buffers {
            b.buffer(v.clone(), *buf);
        }
        b.build()
    }
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError {
        line: Some(line),
        kind,
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Syntax(msg.into()))
}

fn parse_uint(line: usize, tok: &str, what: &str) -> Result<u64, ParseError> {
    tok.parse::<u64>()
        .map_err(|_| syntax(line, format!("expected {what}, found `{tok}`")))
}

fn parse_labels(line: usize, tok: &str) -> Result<LabelSpec, ParseError> {
    if tok == "?" {
        return Ok(LabelSpec::Random);
    }
    let mut labels = BTreeSet::new();
    for part in tok.split(',') {
        let l: Label = part
            .parse()
            .map_err(|_| syntax(line, format!("expected label, found `{part}`")))?;
        if l == 0 {
            return Err(err(line, ParseErrorKind::ZeroLabel));
        }
        labels.insert(l);
    }
    Ok(LabelSpec::Fixed(labels))
}

/// Parses a network file, allowing `?` (random) label fields.
pub fn parse_document(text: &str) -> Result<NetworkDocument, ParseError> {
    let mut source: Option<String> = None;
    let mut sink: Option<String> = None;
    let mut vertices = BTreeSet::new();
    let mut buffer_records: Vec<(usize, String, Buffer)> = Vec::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();
    let mut edge_ids = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            kw @ ("source" | "sink") => {
                let [_, id] = toks[..] else {
                    return Err(syntax(line, format!("usage: {kw} <id>")));
                };
                let slot = if kw == "source" {
                    &mut source
                } else {
                    &mut sink
                };
                if slot.is_some() {
                    return Err(err(
                        line,
                        ParseErrorKind::DuplicateRecord(if kw == "source" {
                            "source"
                        } else {
                            "sink"
                        }),
                    ));
                }
                *slot = Some(id.to_string());
            }
            "vertex" => {
                let [_, id] = toks[..] else {
                    return Err(syntax(line, "usage: vertex <id>"));
                };
                vertices.insert(id.to_string());
            }
            "buffer" => {
                let [_, id, size] = toks[..] else {
                    return Err(syntax(line, "usage: buffer <id> <positive-int|inf>"));
                };
                let buf = if size == "inf" {
                    Buffer::Unbounded
                } else {
                    match parse_uint(line, size, "buffer size")? {
                        0 => return Err(err(line, ParseErrorKind::ZeroBuffer)),
                        b => Buffer::Bounded(b),
                    }
                };
                buffer_records.push((line, id.to_string(), buf));
            }
            "edge" => {
                let [_, id, tail, head, cap, labels] = toks[..] else {
                    return Err(syntax(
                        line,
                        "usage: edge <id> <tail> <head> <capacity> <label>[,<label>...]",
                    ));
                };
                let capacity = parse_uint(line, cap, "capacity")?;
                if capacity == 0 {
                    return Err(err(line, ParseErrorKind::ZeroCapacity));
                }
                let labels = parse_labels(line, labels)?;
                if tail == head {
                    return Err(err(line, ParseErrorKind::SelfLoop(id.to_string())));
                }
                if !edge_ids.insert(id.to_string()) {
                    return Err(err(line, ParseErrorKind::DuplicateEdge(id.to_string())));
                }
                edges.push(EdgeRecord {
                    id: id.to_string(),
                    tail: tail.to_string(),
                    head: head.to_string(),
                    capacity,
                    labels,
                    line,
                });
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }

    let source = source.ok_or(ParseError {
        line: None,
        kind: ParseErrorKind::MissingSource,
    })?;
    let sink = sink.ok_or(ParseError {
        line: None,
        kind: ParseErrorKind::MissingSink,
    })?;
    if source == sink {
        return Err(ParseError {
            line: None,
            kind: ParseErrorKind::SourceIsSink,
        });
    }
    vertices.insert(source.clone());
    vertices.insert(sink.clone());
    for e in &edges {
        if e.head == source {
            return Err(err(e.line, ParseErrorKind::EdgeIntoSource(e.id.clone())));
        }
        if e.tail == sink {
            return Err(err(e.line, ParseErrorKind::EdgeOutOfSink(e.id.clone())));
        }
        vertices.insert(e.tail.clone());
        vertices.insert(e.head.clone());
    }
    let mut buffers = BTreeMap::new();
    for (line, v, buf) in buffer_records {
        if !vertices.contains(&v) {
            return Err(err(line, ParseErrorKind::UnknownVertex(v)));
        }
        if buf.is_bounded() && (v == source || v == sink) {
            return Err(err(line, ParseErrorKind::BoundedTerminal(v)));
        }
        buffers.insert(v, buf);
    }
    Ok(NetworkDocument {
        source,
        sink,
        vertices,
        buffers,
        edges,
    })
}

/// Parses and validates a network file with fully specified labels.
pub fn parse_network(text: &str) -> Result<TemporalGraph, ParseError> {
    let doc = parse_document(text)?;
    if let Some(e) = doc.edges.iter().find(|e| e.labels == LabelSpec::Random) {
        return Err(err(e.line, ParseErrorKind::RandomLabel(e.id.clone())));
    }
    doc.to_graph_with(|_| unreachable!("no random edges"))
        .map_err(|e| ParseError {
            line: None,
            kind: ParseErrorKind::Syntax(e.to_string()),
        })
}

/// Writes a graph in the network file format, records in a fixed order.
pub fn serialize_network(g: &TemporalGraph) -> String {
    let mut out = String::new();
    writeln!(out, "source {}", g.source()).unwrap();
    writeln!(out, "sink {}", g.sink()).unwrap();
    let mut mentioned: BTreeSet<&str> = BTreeSet::from([g.source(), g.sink()]);
    for e in g.edges() {
        mentioned.insert(&e.tail);
        mentioned.insert(&e.head);
    }
    for v in g.vertices().filter(|v| !mentioned.contains(v)) {
        writeln!(out, "vertex {v}").unwrap();
    }
    for (v, b) in g.bounded_buffers() {
        writeln!(out, "buffer {v} {b}").unwrap();
    }
    for e in g.edges() {
        let labels: Vec<String> = e.labels.iter().map(|l| l.to_string()).collect();
        writeln!(
            out,
            "edge {} {} {} {} {}",
            e.id,
            e.tail,
            e.head,
            e.capacity,
            labels.join(",")
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LATE_LINK: &str = "\
# two-hop network with a late bottleneck
source s
sink t
edge sv s v 10 1,7
edge vt v t 2 8
";

    #[test]
    fn parses_late_link() {
        let g = parse_network(LATE_LINK).unwrap();
        assert_eq!(g.time_edge_count(), 3);
        assert_eq!(g.edge("sv").unwrap().capacity, 10);
    }

    #[test]
    fn empty_edge_list() {
        let g = parse_network("source s\nsink t\n").unwrap();
        assert_eq!(g.time_edge_count(), 0);
        assert_eq!(g.vertex_count(), 2);
    }

    #[test]
    fn error_kinds_and_lines() {
        let e = parse_network("source s\nsink t\nedge e s t 1 0\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(e.kind, ParseErrorKind::ZeroLabel);
        assert_eq!(e.to_string(), "line 3: label must be ≥ 1");

        let e = parse_network("source s\nsink t\nedge e s t 0 1\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ZeroCapacity);

        let e = parse_network("source s\nsink t\nedge e s t 1 1\nedge e s t 1 2\n").unwrap_err();
        assert_eq!(
            (e.line, e.kind),
            (Some(4), ParseErrorKind::DuplicateEdge("e".into()))
        );

        let e = parse_network("source s\nsink t\nedge e v s 1 1\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::EdgeIntoSource("e".into()));

        let e = parse_network("source s\nsink t\nedge e t v 1 1\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::EdgeOutOfSink("e".into()));

        let e = parse_network("source s\nsink t\nbuffer q 3\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownVertex("q".into()));

        let e = parse_network("sink t\n").unwrap_err();
        assert_eq!((e.line, e.kind), (None, ParseErrorKind::MissingSource));

        let e = parse_network("source s\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingSink);

        let e = parse_network("source s\nsink t\nedge e s t x 1\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse_network("source s\nsink t\nfrobnicate\n").unwrap_err();
        assert_eq!(e.line, Some(3));

        let e = parse_network("source s\nsink t\nedge e s t 1 ?\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::RandomLabel("e".into()));
    }

    #[test]
    fn serialization_is_sorted_and_round_trips() {
        let text =
            "sink t\nsource s\nvertex lonely\nbuffer v 4\nedge z v t 2 8\nedge a s v 10 7,1\n";
        let g = parse_network(text).unwrap();
        let out = serialize_network(&g);
        assert_eq!(
            out,
            "source s\nsink t\nvertex lonely\nbuffer v 4\nedge a s v 10 1,7\nedge z v t 2 8\n"
        );
        assert_eq!(parse_network(&out).unwrap(), g);
    }

    #[test]
    fn random_labels_in_documents() {
        let doc = parse_document("source s\nsink t\nedge a s v 1 ?\nedge b v t 1 3\n").unwrap();
        assert_eq!(doc.edges[0].labels, LabelSpec::Random);
        let g = doc.to_graph_with(|_| BTreeSet::from([2])).unwrap();
        assert_eq!(g.temporal_distance("s", "t"), Some(3));
    }
}
