//! Exact maximum flow and minimum cut on static networks.
//!
//! Capacities are positive integers or [`Capacity::Unbounded`]. The solver is
//! Dinic's algorithm with an explicit stack; it is integral and, for a fixed
//! arc order, deterministic.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

impl Capacity {
    pub fn finite(self) -> Option<u64> {
        match self {
            Capacity::Finite(c) => Some(c),
            Capacity::Unbounded => None,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaticArc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticNetwork {
    pub node_count: usize,
    pub arcs: Vec<StaticArc>,
    pub source: usize,
    pub sink: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaxFlowError {
    #[error("source and sink coincide")]
    SourceIsSink,
    #[error("arc {arc} references node {node} outside 0..{count}")]
    NodeOutOfRange {
        arc: usize,
        node: usize,
        count: usize,
    },
    #[error("arc {0} has zero capacity")]
    ZeroCapacity(usize),
    #[error("unbounded flow: an s-t path uses only unbounded arcs")]
    UnboundedFlow,
    #[error("sum of capacities overflows u64")]
    Overflow,
    #[error("flow vector has {got} entries for {expected} arcs")]
    FlowLength { expected: usize, got: usize },
    #[error("flow {flow} on arc {arc} exceeds capacity {capacity}")]
    OverCapacity {
        arc: usize,
        flow: u64,
        capacity: u64,
    },
    #[error("flow is not conserved at node {node}: in {inflow}, out {outflow}")]
    NotConserved {
        node: usize,
        inflow: u128,
        outflow: u128,
    },
    #[error("flow is not maximum: the residual network has an s-t path")]
    NotMaximum,
}

/// A maximum flow: its value and the flow on every arc, indexed like `arcs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: u64,
    pub flow: Vec<u64>,
}

impl StaticNetwork {
    fn validate(&self) -> Result<(), MaxFlowError> {
        if self.source == self.sink {
            return Err(MaxFlowError::SourceIsSink);
        }
        for (node, count) in [(self.source, self.node_count), (self.sink, self.node_count)] {
            if node >= count {
                return Err(MaxFlowError::NodeOutOfRange {
                    arc: usize::MAX,
                    node,
                    count,
                });
            }
        }
        let mut total: u64 = 0;
        for (i, a) in self.arcs.iter().enumerate() {
            for node in [a.from, a.to] {
                if node >= self.node_count {
                    return Err(MaxFlowError::NodeOutOfRange {
                        arc: i,
                        node,
                        count: self.node_count,
                    });
                }
            }
            match a.capacity {
                Capacity::Finite(0) => return Err(MaxFlowError::ZeroCapacity(i)),
                Capacity::Finite(c) => {
                    total = total.checked_add(c).ok_or(MaxFlowError::Overflow)?;
                }
                Capacity::Unbounded => {}
            }
        }
        // every s-t path must cross some finite arc
        let mut adj = vec![Vec::new(); self.node_count];
        for a in self
            .arcs
            .iter()
            .filter(|a| a.capacity == Capacity::Unbounded)
        {
            adj[a.from].push(a.to);
        }
        if reachable(&adj, self.source)[self.sink] {
            return Err(MaxFlowError::UnboundedFlow);
        }
        Ok(())
    }

    /// Checks capacity and conservation (except at source and sink) and
    /// returns the net flow out of the source.
    pub fn check_flow(&self, flow: &[u64]) -> Result<u64, MaxFlowError> {
        if flow.len() != self.arcs.len() {
            return Err(MaxFlowError::FlowLength {
                expected: self.arcs.len(),
                got: flow.len(),
            });
        }
        let mut inflow = vec![0u128; self.node_count];
        let mut outflow = vec![0u128; self.node_count];
        for (i, (a, &f)) in self.arcs.iter().zip(flow).enumerate() {
            if let Capacity::Finite(c) = a.capacity {
                if f > c {
                    return Err(MaxFlowError::OverCapacity {
                        arc: i,
                        flow: f,
                        capacity: c,
                    });
                }
            }
            outflow[a.from] += u128::from(f);
            inflow[a.to] += u128::from(f);
        }
        for node in 0..self.node_count {
            if node != self.source && node != self.sink && inflow[node] != outflow[node] {
                return Err(MaxFlowError::NotConserved {
                    node,
                    inflow: inflow[node],
                    outflow: outflow[node],
                });
            }
        }
        let net = outflow[self.source] as i128 - inflow[self.source] as i128;
        u64::try_from(net).map_err(|_| MaxFlowError::Overflow)
    }
}

fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Residual graph. Arc `i` of the network is residual edge `2i`, its reverse `2i+1`.
struct Residual {
    head: Vec<usize>,
    // None: unbounded residual capacity
    cap: Vec<Option<u64>>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(net: &StaticNetwork) -> Self {
        let m = net.arcs.len();
        let mut head = Vec::with_capacity(2 * m);
        let mut cap = Vec::with_capacity(2 * m);
        let mut adj = vec![Vec::new(); net.node_count];
        for (i, a) in net.arcs.iter().enumerate() {
            head.push(a.to);
            cap.push(a.capacity.finite());
            head.push(a.from);
            cap.push(Some(0));
            adj[a.from].push(2 * i);
            adj[a.to].push(2 * i + 1);
        }
        Residual { head, cap, adj }
    }

    fn has_room(&self, e: usize) -> bool {
        self.cap[e] != Some(0)
    }

    fn push(&mut self, e: usize, amount: u64) {
        if let Some(c) = &mut self.cap[e] {
            *c -= amount;
        }
        if let Some(c) = &mut self.cap[e ^ 1] {
            *c += amount;
        }
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.has_room(e) && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn reachable_from(&self, source: usize) -> Vec<bool> {
        self.levels(source)
            .into_iter()
            .map(|l| l != usize::MAX)
            .collect()
    }

    /// Saturates the level graph; returns the amount pushed.
    fn blocking_flow(&mut self, source: usize, sink: usize, level: &mut [usize]) -> u64 {
        let mut next = vec![0usize; self.adj.len()];
        let mut pushed = 0u64;
        let mut path: Vec<usize> = Vec::new();
        let mut u = source;
        loop {
            if u == sink {
                let amount = path
                    .iter()
                    .filter_map(|&e| self.cap[e])
                    .min()
                    .expect("validated: every s-t path has a finite arc");
                for &e in &path {
                    self.push(e, amount);
                }
                pushed += amount;
                // retreat to the tail of the first saturated edge
                let cut = path.iter().position(|&e| !self.has_room(e)).unwrap();
                path.truncate(cut);
                u = path.last().map_or(source, |&e| self.head[e]);
                continue;
            }
            let mut advanced = false;
            while next[u] < self.adj[u].len() {
                let e = self.adj[u][next[u]];
                let v = self.head[e];
                if self.has_room(e) && level[v] == level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if advanced {
                continue;
            }
            level[u] = usize::MAX;
            match path.pop() {
                None => return pushed,
                Some(e) => {
                    u = self.head[e ^ 1];
                    next[u] += 1;
                }
            }
        }
    }
}

/// Computes a maximum flow.
pub fn max_flow(net: &StaticNetwork) -> Result<MaxFlow, MaxFlowError> {
    net.validate()?;
    let mut res = Residual::new(net);
    let mut value: u64 = 0;
    loop {
        let mut level = res.levels(net.source);
        if level[net.sink] == usize::MAX {
            break;
        }
        let pushed = res.blocking_flow(net.source, net.sink, &mut level);
        value = value.checked_add(pushed).ok_or(MaxFlowError::Overflow)?;
    }
    // flow on arc i is the residual capacity of its reverse edge
    let flow = (0..net.arcs.len())
        .map(|i| res.cap[2 * i + 1].expect("reverse edges are finite"))
        .collect();
    Ok(MaxFlow { value, flow })
}

/// The arcs leaving the set of nodes reachable from the source in the
/// residual network of `flow`. Fails if `flow` is infeasible or not maximum.
pub fn min_cut(net: &StaticNetwork, flow: &[u64]) -> Result<Vec<usize>, MaxFlowError> {
    net.validate()?;
    net.check_flow(flow)?;
    let mut res = Residual::new(net);
    for (i, &f) in flow.iter().enumerate() {
        if f > 0 {
            res.push(2 * i, f);
        }
    }
    let side = res.reachable_from(net.source);
    if side[net.sink] {
        return Err(MaxFlowError::NotMaximum);
    }
    Ok(net
        .arcs
        .iter()
        .enumerate()
        .filter(|(_, a)| side[a.from] && !side[a.to])
        .map(|(i, _)| i)
        .collect())
}

/// Total finite capacity of a set of arcs; `None` if any is unbounded.
pub fn cut_capacity(net: &StaticNetwork, arcs: &[usize]) -> Option<u64> {
    arcs.iter().map(|&i| net.arcs[i].capacity.finite()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(from: usize, to: usize, c: u64) -> StaticArc {
        StaticArc {
            from,
            to,
            capacity: Capacity::Finite(c),
        }
    }

    fn inf(from: usize, to: usize) -> StaticArc {
        StaticArc {
            from,
            to,
            capacity: Capacity::Unbounded,
        }
    }

    #[test]
    fn parallel_arcs() {
        let net = StaticNetwork {
            node_count: 2,
            arcs: vec![arc(0, 1, 3), arc(0, 1, 4)],
            source: 0,
            sink: 1,
        };
        let mf = max_flow(&net).unwrap();
        assert_eq!(mf.value, 7);
        assert_eq!(mf.flow, vec![3, 4]);
        let cut = min_cut(&net, &mf.flow).unwrap();
        assert_eq!(cut, vec![0, 1]);
        assert_eq!(cut_capacity(&net, &cut), Some(7));
    }

    #[test]
    fn unbounded_arcs_are_routed_through() {
        // 0 -inf-> 1 -5-> 2 -inf-> 3, plus 0 -2-> 3
        let net = StaticNetwork {
            node_count: 4,
            arcs: vec![inf(0, 1), arc(1, 2, 5), inf(2, 3), arc(0, 3, 2)],
            source: 0,
            sink: 3,
        };
        let mf = max_flow(&net).unwrap();
        assert_eq!(mf.value, 7);
        let cut = min_cut(&net, &mf.flow).unwrap();
        assert_eq!(cut, vec![1, 3]);
    }

    #[test]
    fn all_unbounded_path_is_rejected() {
        let net = StaticNetwork {
            node_count: 3,
            arcs: vec![inf(0, 1), inf(1, 2), arc(0, 2, 1)],
            source: 0,
            sink: 2,
        };
        assert_eq!(max_flow(&net), Err(MaxFlowError::UnboundedFlow));
    }

    #[test]
    fn zero_capacity_and_overflow() {
        let net = StaticNetwork {
            node_count: 2,
            arcs: vec![arc(0, 1, 0)],
            source: 0,
            sink: 1,
        };
        assert_eq!(max_flow(&net), Err(MaxFlowError::ZeroCapacity(0)));
        let net = StaticNetwork {
            node_count: 2,
            arcs: vec![arc(0, 1, u64::MAX), arc(0, 1, 1)],
            source: 0,
            sink: 1,
        };
        assert_eq!(max_flow(&net), Err(MaxFlowError::Overflow));
    }

    #[test]
    fn min_cut_rejects_non_maximum_flow() {
        let net = StaticNetwork {
            node_count: 2,
            arcs: vec![arc(0, 1, 3)],
            source: 0,
            sink: 1,
        };
        assert_eq!(min_cut(&net, &[1]), Err(MaxFlowError::NotMaximum));
        assert!(matches!(
            min_cut(&net, &[4]),
            Err(MaxFlowError::OverCapacity { .. })
        ));
    }

    #[test]
    fn needs_reverse_residual_edges() {
        // classic case where a greedy path must be partially undone
        let net = StaticNetwork {
            node_count: 4,
            arcs: vec![
                arc(0, 1, 1),
                arc(0, 2, 1),
                arc(1, 2, 1),
                arc(1, 3, 1),
                arc(2, 3, 1),
            ],
            source: 0,
            sink: 3,
        };
        let mf = max_flow(&net).unwrap();
        assert_eq!(mf.value, 2);
        assert_eq!(net.check_flow(&mf.flow), Ok(2));
    }

    #[test]
    fn empty_network() {
        let net = StaticNetwork {
            node_count: 2,
            arcs: vec![],
            source: 0,
            sink: 1,
        };
        let mf = max_flow(&net).unwrap();
        assert_eq!(mf.value, 0);
        assert!(min_cut(&net, &mf.flow).unwrap().is_empty());
    }
}
