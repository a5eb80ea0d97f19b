//! Temporal networks with randomly drawn edge days.
//!
//! A [`RandomModelSpec`] fixes the topology, capacities and buffers. Some
//! edges keep fixed label sets; every other edge draws exactly one day
//! uniformly from `1..=alpha`, independently. With no fixed edges this is the
//! uniform random temporal network. The maximum flow by a deadline is then a
//! random variable, studied here by exact enumeration of all labelings when
//! there are few random edges and by seeded Monte Carlo otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::temporal_flow::{max_temporal_flow_value, FlowError};
use crate::temporal_graph::{
    parse_document, GraphBuilder, GraphError, Label, LabelSpec, NetworkDocument, ParseError,
    TemporalGraph,
};

/// Default limit on the number of labelings [`exact_flow_distribution`] visits.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("alpha must be a positive even integer, got {0}")]
    Alpha(Label),
    #[error("random edge {0} is not an edge of the network")]
    UnknownEdge(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{count} labelings exceed the enumeration cap of {cap}; use a Monte Carlo estimate")]
    TooManyLabelings { count: String, cap: u64 },
    #[error("invalid family: {0}")]
    Family(String),
    #[error("at least one trial is required")]
    NoTrials,
}

/// A network whose random edges each draw one day from `1..=alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomModelSpec {
    // labels of random edges in `base` are placeholders
    base: TemporalGraph,
    random: Vec<usize>,
    alpha: Label,
}

impl RandomModelSpec {
    /// `random_edges` name the edges whose labels are drawn; the labels they
    /// carry in `base` are ignored. All other edges keep theirs.
    pub fn new(
        base: TemporalGraph,
        random_edges: &BTreeSet<String>,
        alpha: Label,
    ) -> Result<Self, ModelError> {
        if alpha == 0 || !alpha.is_multiple_of(2) {
            return Err(ModelError::Alpha(alpha));
        }
        if let Some(e) = random_edges.iter().find(|e| base.edge(e).is_none()) {
            return Err(ModelError::UnknownEdge(e.clone()));
        }
        let random = base
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| random_edges.contains(&e.id))
            .map(|(i, _)| i)
            .collect();
        Ok(RandomModelSpec {
            base,
            random,
            alpha,
        })
    }

    /// Edges written with `?` as their label field become random.
    pub fn from_document(doc: &NetworkDocument, alpha: Label) -> Result<Self, ModelError> {
        let base = doc.to_graph_with(|_| BTreeSet::from([1]))?;
        let random = doc
            .edges
            .iter()
            .filter(|e| e.labels == LabelSpec::Random)
            .map(|e| e.id.clone())
            .collect();
        Self::new(base, &random, alpha)
    }

    pub fn alpha(&self) -> Label {
        self.alpha
    }

    pub fn source(&self) -> &str {
        self.base.source()
    }

    pub fn sink(&self) -> &str {
        self.base.sink()
    }

    /// The underlying network. Random edges carry placeholder labels.
    pub fn topology(&self) -> &TemporalGraph {
        &self.base
    }

    pub fn random_edges(&self) -> impl Iterator<Item = &str> + '_ {
        self.random
            .iter()
            .map(|&i| self.base.edges()[i].id.as_str())
    }

    pub fn is_random(&self, edge: &str) -> bool {
        self.random_edges().any(|e| e == edge)
    }

    /// The later of `alpha` and the largest fixed label.
    pub fn default_deadline(&self) -> Label {
        let fixed = self
            .base
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.random.contains(i))
            .filter_map(|(_, e)| e.labels.last().copied())
            .max()
            .unwrap_or(0);
        fixed.max(self.alpha)
    }

    /// `alpha ^ (number of random edges)`.
    pub fn labeling_count(&self) -> BigUint {
        Pow::pow(BigUint::from(self.alpha), self.random.len())
    }

    /// The network with the `i`-th random edge available on day `draws[i]` only.
    pub fn with_draws(&self, draws: &[Label]) -> TemporalGraph {
        assert_eq!(draws.len(), self.random.len(), "one draw per random edge");
        let mut labels: Vec<BTreeSet<Label>> =
            self.base.edges().iter().map(|e| e.labels.clone()).collect();
        for (&i, &l) in self.random.iter().zip(draws) {
            labels[i] = BTreeSet::from([l]);
        }
        self.base.with_labels(&labels)
    }

    fn draws_for_trial(&self, seed: u64, trial: u64) -> Vec<Label> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        (0..self.random.len())
            .map(|_| rng.gen_range(1..=self.alpha))
            .collect()
    }
}

/// Reads a model from the network file format, `?` marking random edges.
pub fn parse_model(text: &str, alpha: Label) -> Result<RandomModelSpec, ModelError> {
    RandomModelSpec::from_document(&parse_document(text)?, alpha)
}

/// One random labeling; a deterministic function of `(spec, seed)`.
pub fn sample_labeling(spec: &RandomModelSpec, seed: u64) -> TemporalGraph {
    spec.with_draws(&spec.draws_for_trial(seed, 0))
}

/// Probability that `k` independent uniform draws from `1..=alpha` are
/// strictly increasing, `C(alpha, k) / alpha^k`.
pub fn journey_probability_exact(k: u32, alpha: u32) -> BigRational {
    assert!(k >= 1 && alpha >= 1, "k and alpha must be positive");
    let ways = binomial(BigInt::from(alpha), BigInt::from(k));
    BigRational::new(ways, Pow::pow(BigInt::from(alpha), k))
}

/// Law of the maximum flow value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDistribution {
    /// Value to probability (exact) or to relative frequency (sampled).
    pub support: BTreeMap<u64, BigRational>,
    /// Number of samples and seed, for sampled distributions.
    pub samples: Option<(u64, u64)>,
}

impl FlowDistribution {
    pub fn point_mass(value: u64) -> Self {
        FlowDistribution {
            support: BTreeMap::from([(value, BigRational::one())]),
            samples: None,
        }
    }

    pub fn probability(&self, value: u64) -> BigRational {
        self.support
            .get(&value)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn probability_at_most(&self, value: u64) -> BigRational {
        self.support.range(..=value).map(|(_, p)| p).sum()
    }

    fn from_counts(counts: BTreeMap<u64, u64>, total: u64, samples: Option<(u64, u64)>) -> Self {
        let support = counts
            .into_iter()
            .map(|(v, c)| (v, BigRational::new(c.into(), total.into())))
            .collect();
        FlowDistribution { support, samples }
    }
}

fn decode_labeling(mut index: u64, alpha: Label, len: usize) -> Vec<Label> {
    (0..len)
        .map(|_| {
            let l = (index % u64::from(alpha)) as Label + 1;
            index /= u64::from(alpha);
            l
        })
        .collect()
}

/// Exact law of the maximum flow by `deadline`, by solving every labeling.
///
/// Fails when there are more than `cap` labelings.
pub fn exact_flow_distribution(
    spec: &RandomModelSpec,
    deadline: Label,
    cap: u64,
) -> Result<FlowDistribution, ModelError> {
    let count = spec.labeling_count();
    let total = match count.to_u64() {
        Some(n) if n <= cap => n,
        _ => {
            return Err(ModelError::TooManyLabelings {
                count: count.to_string(),
                cap,
            })
        }
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| {
            let draws = decode_labeling(i, spec.alpha, spec.random.len());
            max_temporal_flow_value(&spec.with_draws(&draws), deadline)
        })
        .collect::<Result<Vec<u64>, FlowError>>()?;
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    Ok(FlowDistribution::from_counts(counts, total, None))
}

/// Empirical law of the maximum flow over `trials` sampled labelings.
pub fn sampled_flow_distribution(
    spec: &RandomModelSpec,
    deadline: Label,
    trials: u64,
    seed: u64,
) -> Result<FlowDistribution, ModelError> {
    if trials == 0 {
        return Err(ModelError::NoTrials);
    }
    let values = (0..trials)
        .into_par_iter()
        .map(|t| {
            max_temporal_flow_value(&spec.with_draws(&spec.draws_for_trial(seed, t)), deadline)
        })
        .collect::<Result<Vec<u64>, FlowError>>()?;
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    Ok(FlowDistribution::from_counts(
        counts,
        trials,
        Some((trials, seed)),
    ))
}

/// `E[v] = sum of i * Pr[v = i]`.
pub fn expected_max_flow(dist: &FlowDistribution) -> BigRational {
    dist.support
        .iter()
        .map(|(&v, p)| BigRational::from_integer(v.into()) * p)
        .sum()
}

/// `E[v, B] = sum over 1 <= i <= B of i * Pr[v = i]`.
pub fn truncated_expectation(dist: &FlowDistribution, bound: u64) -> BigRational {
    dist.support
        .range(..=bound)
        .map(|(&v, p)| BigRational::from_integer(v.into()) * p)
        .sum()
}

/// Per-labeling quantity averaged by [`mc_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Indicator of a positive maximum flow.
    PositiveFlowProbability,
    /// The maximum flow value itself.
    ExpectedMaxFlow,
    /// Indicator of a maximum flow of at most the given value.
    TailAtMost(u64),
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::PositiveFlowProbability => f.write_str("positive"),
            Statistic::ExpectedMaxFlow => f.write_str("mean"),
            Statistic::TailAtMost(c) => write!(f, "tail:{c}"),
        }
    }
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Statistic::PositiveFlowProbability),
            "mean" => Ok(Statistic::ExpectedMaxFlow),
            _ => s
                .strip_prefix("tail:")
                .and_then(|c| c.parse().ok())
                .map(Statistic::TailAtMost)
                .ok_or_else(|| {
                    format!("unknown statistic `{s}` (expected positive, mean or tail:<C>)")
                }),
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn statistic_value(
    g: &TemporalGraph,
    deadline: Label,
    statistic: Statistic,
) -> Result<u64, FlowError> {
    Ok(match statistic {
        // positive capacities: some flow arrives iff some journey does
        Statistic::PositiveFlowProbability => g
            .temporal_distance(g.source(), g.sink())
            .is_some_and(|d| d <= deadline)
            .into(),
        Statistic::ExpectedMaxFlow => max_temporal_flow_value(g, deadline)?,
        Statistic::TailAtMost(c) => (max_temporal_flow_value(g, deadline)? <= c).into(),
    })
}

/// Monte Carlo mean of `statistic` over `trials` labelings.
///
/// Trial `i` draws from its own stream of a generator seeded with `seed`, and
/// sums are accumulated as exact integers, so the result does not depend on
/// how trials are scheduled across threads.
pub fn mc_estimate(
    spec: &RandomModelSpec,
    deadline: Label,
    statistic: Statistic,
    trials: u64,
    seed: u64,
) -> Result<Estimate, ModelError> {
    if trials == 0 {
        return Err(ModelError::NoTrials);
    }
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = spec.with_draws(&spec.draws_for_trial(seed, t));
            let x = u128::from(statistic_value(&g, deadline, statistic)?);
            Ok((x, x * x))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
        .map_err(ModelError::Flow)?;
    let n = u128::from(trials);
    let estimate = sum as f64 / trials as f64;
    let stderr = if trials == 1 {
        0.0
    } else {
        // n * sum(x^2) - sum(x)^2 is exact and non-negative
        let spread = (n * sum_sq - sum * sum) as f64;
        (spread / (n * n * (n - 1)) as f64).sqrt()
    };
    Ok(Estimate { estimate, stderr })
}

/// Graph families with random labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    /// Paths `s -> v_i -> t` with capacities `(w_i, w'_i)`, `w'_i >= w_i`;
    /// every edge random.
    ParallelTwoEdgePaths(Vec<(u64, u64)>),
    /// Parallel two-edge paths into `t1`, followed by one fixed edge
    /// `t1 -> t` of capacity `bottleneck` on day `label > alpha`.
    TruncatedParallelPaths {
        weights: Vec<(u64, u64)>,
        bottleneck: u64,
        label: Label,
    },
    /// A chain of `n - 1` blocks of `d` parallel unit edges between
    /// consecutive hubs. Each block is an `s-t` cut of size `d`, the blocks
    /// are disjoint and ordered along the chain, and `n - 1 >= c ln n`.
    Multiblock { c: u32, d: u32, n: u32 },
    /// A single path of unit edges with the given number of hops.
    LongThinPath(u32),
}

fn weights_str(w: &[(u64, u64)]) -> String {
    w.iter()
        .map(|(a, b)| format!("{a}/{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl FamilyKind {
    /// Short family name, used as the `family` column of CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::ParallelTwoEdgePaths(_) => "parallel",
            FamilyKind::TruncatedParallelPaths { .. } => "truncated",
            FamilyKind::Multiblock { .. } => "multiblock",
            FamilyKind::LongThinPath(_) => "thin",
        }
    }

    /// Parameters in the descriptor syntax, the `param` column of CSV output.
    pub fn params(&self) -> String {
        match self {
            FamilyKind::ParallelTwoEdgePaths(w) => weights_str(w),
            FamilyKind::TruncatedParallelPaths {
                weights,
                bottleneck,
                label,
            } => {
                format!("{bottleneck}:{label}:{}", weights_str(weights))
            }
            FamilyKind::Multiblock { c, d, n } => format!("{c}:{d}:{n}"),
            FamilyKind::LongThinPath(len) => len.to_string(),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name(), self.params())
    }
}

fn parse_weights(s: &str) -> Option<Vec<(u64, u64)>> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair.split_once('/')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect()
}

impl FromStr for FamilyKind {
    type Err = ModelError;

    /// `parallel:1/1,1/2`, `truncated:B:b:1/1,1/2`, `multiblock:c:d:n`, `thin:len`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Family(format!("cannot parse `{s}`"));
        let (name, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let num = |p: &str| p.parse::<u64>().map_err(|_| bad());
        let small = |p: &str| p.parse::<u32>().map_err(|_| bad());
        match (name, parts.as_slice()) {
            ("parallel", [w]) => Ok(FamilyKind::ParallelTwoEdgePaths(
                parse_weights(w).ok_or_else(bad)?,
            )),
            ("truncated", [b, l, w]) => Ok(FamilyKind::TruncatedParallelPaths {
                weights: parse_weights(w).ok_or_else(bad)?,
                bottleneck: num(b)?,
                label: small(l)?,
            }),
            ("multiblock", [c, d, n]) => Ok(FamilyKind::Multiblock {
                c: small(c)?,
                d: small(d)?,
                n: small(n)?,
            }),
            ("thin", [len]) => Ok(FamilyKind::LongThinPath(small(len)?)),
            _ => Err(bad()),
        }
    }
}

fn check_weights(weights: &[(u64, u64)]) -> Result<(), ModelError> {
    if weights.is_empty() {
        return Err(ModelError::Family("at least one path is required".into()));
    }
    for &(w, w2) in weights {
        if w == 0 || w2 < w {
            return Err(ModelError::Family(format!(
                "path weights must satisfy 0 < w <= w', got {w}/{w2}"
            )));
        }
    }
    Ok(())
}

/// Builds a member of a family; all edges are random unless stated otherwise.
pub fn generate_family(kind: &FamilyKind, alpha: Label) -> Result<RandomModelSpec, ModelError> {
    let mut b = TemporalGraph::builder("s", "t");
    let mut random = BTreeSet::new();
    let mut add = |b: &mut GraphBuilder, id: String, tail: &str, head: &str, cap: u64| {
        b.edge(id.clone(), tail, head, cap, [1]);
        random.insert(id);
    };
    match kind {
        FamilyKind::ParallelTwoEdgePaths(weights) => {
            check_weights(weights)?;
            for (i, &(w, w2)) in weights.iter().enumerate() {
                let v = format!("v{}", i + 1);
                add(&mut b, format!("a{}", i + 1), "s", &v, w);
                add(&mut b, format!("b{}", i + 1), &v, "t", w2);
            }
        }
        FamilyKind::TruncatedParallelPaths {
            weights,
            bottleneck,
            label,
        } => {
            check_weights(weights)?;
            if *bottleneck == 0 || *label <= alpha {
                return Err(ModelError::Family(format!(
                    "need a positive bottleneck and a final day after alpha = {alpha}"
                )));
            }
            for (i, &(w, w2)) in weights.iter().enumerate() {
                let v = format!("v{}", i + 1);
                add(&mut b, format!("a{}", i + 1), "s", &v, w);
                add(&mut b, format!("b{}", i + 1), &v, "t1", w2);
            }
            b.edge("z", "t1", "t", *bottleneck, [*label]);
        }
        FamilyKind::Multiblock { c, d, n } => {
            let blocks = n.saturating_sub(1);
            if *d == 0
                || *c == 0
                || blocks == 0
                || f64::from(blocks) < f64::from(*c) * f64::from(*n).ln()
            {
                return Err(ModelError::Family(format!(
                    "multiblock needs d >= 1 and n - 1 >= c ln n, got c={c} d={d} n={n}"
                )));
            }
            let width = blocks.to_string().len();
            let hub = |j: u32| match j {
                0 => "s".to_string(),
                j if j == blocks => "t".to_string(),
                j => format!("h{j:0width$}"),
            };
            for j in 0..blocks {
                for i in 0..*d {
                    add(
                        &mut b,
                        format!("e{:0width$}_{i}", j + 1),
                        &hub(j),
                        &hub(j + 1),
                        1,
                    );
                }
            }
        }
        FamilyKind::LongThinPath(len) => {
            if *len == 0 {
                return Err(ModelError::Family("path length must be positive".into()));
            }
            let width = len.to_string().len();
            let vertex = |j: u32| match j {
                0 => "s".to_string(),
                j if j == *len => "t".to_string(),
                j => format!("p{j:0width$}"),
            };
            for j in 0..*len {
                add(
                    &mut b,
                    format!("e{:0width$}", j + 1),
                    &vertex(j),
                    &vertex(j + 1),
                    1,
                );
            }
        }
    }
    RandomModelSpec::new(b.build()?, &random, alpha)
}

/// Header of the CSV produced by [`csv_rows`].
pub const CSV_HEADER: [&str; 8] = [
    "family",
    "param",
    "alpha",
    "statistic",
    "estimate",
    "stderr",
    "trials",
    "seed",
];

/// One configuration's estimate, as a CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub family: String,
    pub param: String,
    pub alpha: Label,
    pub statistic: Statistic,
    pub estimate: Estimate,
    pub trials: u64,
    pub seed: u64,
}

/// Renders rows as CSV with a header line.
pub fn csv_rows(rows: &[EstimateRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.param.clone(),
            r.alpha.to_string(),
            r.statistic.to_string(),
            r.estimate.estimate.to_string(),
            r.estimate.stderr.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV fields are UTF-8")
}
