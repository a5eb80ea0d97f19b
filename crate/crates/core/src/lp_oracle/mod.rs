//! Maximum temporal flow as a linear program, solved exactly.
//!
//! One variable per time-edge flow and per buffer content (morning, noon,
//! evening) of every non-source vertex on every relevant day; one constraint
//! per feasibility condition. The source has no buffer variables, which
//! encodes its unlimited supply. This is an independent route to the optimum
//! used to check the time-extended graph pipeline, bounded buffers included.

mod simplex;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::temporal_flow::{buffer_trajectories, TemporalFlow};
use crate::temporal_graph::{Label, TemporalGraph, TimeEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("constraint references variable {0} which does not exist")]
    UnknownVariable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variable {
    Flow(TimeEdge),
    Morning(String, Label),
    Noon(String, Label),
    Evening(String, Label),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::Flow(te) => write!(f, "f({},{})", te.edge, te.label),
            Variable::Morning(v, l) => write!(f, "bminus({v},{l})"),
            Variable::Noon(v, l) => write!(f, "bmid({v},{l})"),
            Variable::Evening(v, l) => write!(f, "bplus({v},{l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, BigRational)>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// Maximize a single variable subject to linear constraints over
/// non-negative variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: usize,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Formulates maximum temporal flow by day `deadline`.
///
/// Labels above the deadline are removed first; the objective is the sink's
/// evening content on its last remaining relevant day.
pub fn build_lp(g: &TemporalGraph, deadline: Label) -> LinearProgram {
    let g = g.restrict_to_deadline(deadline);
    let mut variables = Vec::new();
    let mut index: BTreeMap<Variable, usize> = BTreeMap::new();
    let mut var = |v: Variable| -> usize {
        *index.entry(v.clone()).or_insert_with(|| {
            variables.push(v);
            variables.len() - 1
        })
    };
    let mut constraints = Vec::new();
    let one = BigRational::one;

    for te in g.time_edges() {
        let cap = g.edge(&te.edge).expect("time-edge of g").capacity;
        let j = var(Variable::Flow(te));
        constraints.push(Constraint {
            terms: vec![(j, one())],
            relation: Relation::Le,
            rhs: BigRational::from_integer(cap.into()),
        });
    }

    let mut objective = None;
    for v in g.vertices().filter(|&v| v != g.source()) {
        let limit = g.buffer(v).limit();
        let mut prev_evening: Option<usize> = None;
        for l in g.relevant_labels(v) {
            let m = var(Variable::Morning(v.to_string(), l));
            let n = var(Variable::Noon(v.to_string(), l));
            let e = var(Variable::Evening(v.to_string(), l));
            if let Some(b) = limit {
                for j in [m, n, e] {
                    constraints.push(Constraint {
                        terms: vec![(j, one())],
                        relation: Relation::Le,
                        rhs: BigRational::from_integer(b.into()),
                    });
                }
            }
            match prev_evening {
                // everything starts empty
                None => {
                    for j in [m, n, e] {
                        constraints.push(Constraint {
                            terms: vec![(j, one())],
                            relation: Relation::Eq,
                            rhs: BigRational::zero(),
                        });
                    }
                }
                Some(pe) => {
                    // morning = previous evening
                    constraints.push(Constraint {
                        terms: vec![(m, one()), (pe, int(-1))],
                        relation: Relation::Eq,
                        rhs: BigRational::zero(),
                    });
                    // noon = morning - departures
                    let mut terms = vec![(n, one()), (m, int(-1))];
                    for edge in g.out_edges(v).filter(|e| e.labels.contains(&l)) {
                        terms.push((
                            var(Variable::Flow(TimeEdge::new(edge.id.clone(), l))),
                            one(),
                        ));
                    }
                    constraints.push(Constraint {
                        terms,
                        relation: Relation::Eq,
                        rhs: BigRational::zero(),
                    });
                    // evening = noon + arrivals
                    let mut terms = vec![(e, one()), (n, int(-1))];
                    for edge in g.in_edges(v).filter(|e| e.labels.contains(&l)) {
                        terms.push((
                            var(Variable::Flow(TimeEdge::new(edge.id.clone(), l))),
                            int(-1),
                        ));
                    }
                    constraints.push(Constraint {
                        terms,
                        relation: Relation::Eq,
                        rhs: BigRational::zero(),
                    });
                }
            }
            prev_evening = Some(e);
            if v == g.sink() {
                objective = Some(e);
            }
        }
    }
    LinearProgram {
        variables,
        constraints,
        objective: objective.expect("the sink has at least the day-0 variables"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub optimum: BigRational,
    pub values: Vec<BigRational>,
}

/// Solves the program exactly.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let (optimum, values) = simplex::maximize(
        lp.variables.len(),
        &lp.constraints,
        &[(lp.objective, BigRational::one())],
    )?;
    Ok(LpSolution { optimum, values })
}

impl LpSolution {
    /// The temporal flow given by the solution's flow variables.
    pub fn temporal_flow(&self, lp: &LinearProgram, g: &TemporalGraph) -> TemporalFlow {
        let assignments = lp
            .variables
            .iter()
            .zip(&self.values)
            .filter_map(|(v, x)| match v {
                Variable::Flow(te) => Some((te.clone(), x.clone())),
                _ => None,
            })
            .collect();
        buffer_trajectories(g, assignments)
    }

    /// Checks every constraint exactly.
    pub fn satisfies(&self, lp: &LinearProgram) -> bool {
        self.values.iter().all(|x| *x >= BigRational::zero())
            && lp.constraints.iter().all(|c| {
                let lhs: BigRational = c.terms.iter().map(|(j, a)| a * &self.values[*j]).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }
}

impl LinearProgram {
    /// Plain-text form: `max <var>` then one `st <coeff> <var> ... <rel> <rhs>` per constraint.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "max {}", self.variables[self.objective]).unwrap();
        for c in &self.constraints {
            out.push_str("st");
            for (j, a) in &c.terms {
                write!(out, " {a} {}", self.variables[*j]).unwrap();
            }
            writeln!(out, " {} {}", c.relation, c.rhs).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal_flow::verify_flow;
    use crate::temporal_graph::parse_network;

    #[test]
    fn single_edge() {
        let g = parse_network("source s\nsink t\nedge e s t 5 3\n").unwrap();
        let lp = build_lp(&g, 3);
        let flows = lp
            .variables
            .iter()
            .filter(|v| matches!(v, Variable::Flow(_)))
            .count();
        assert_eq!(flows, 1);
        assert!(lp.variables.contains(&Variable::Evening("t".into(), 0)));
        assert!(lp.variables.contains(&Variable::Evening("t".into(), 3)));
        assert_eq!(lp.variables.len(), 1 + 3 * 2);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.optimum, int(5));
        assert!(sol.satisfies(&lp));
    }

    #[test]
    fn late_link_and_empty() {
        let g = parse_network("source s\nsink t\nedge sv s v 10 1,7\nedge vt v t 2 8\n").unwrap();
        let lp = build_lp(&g, 8);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.optimum, int(2));
        assert_eq!(verify_flow(&g, &sol.temporal_flow(&lp, &g)), Ok(()));
        assert_eq!(solve_lp(&build_lp(&g, 7)).unwrap().optimum, int(0));

        let empty = parse_network("source s\nsink t\n").unwrap();
        assert_eq!(solve_lp(&build_lp(&empty, 1)).unwrap().optimum, int(0));
    }

    #[test]
    fn storage_bottleneck() {
        let g = parse_network("source s\nsink t\nbuffer v 3\nedge a s v 10 1\nedge b v t 10 2\n")
            .unwrap();
        assert_eq!(solve_lp(&build_lp(&g, 2)).unwrap().optimum, int(3));
    }

    #[test]
    fn dump_lists_objective_and_constraints() {
        let g = parse_network("source s\nsink t\nedge e s t 5 3\n").unwrap();
        let dump = build_lp(&g, 3).dump();
        let mut lines = dump.lines();
        assert_eq!(lines.next(), Some("max bplus(t,3)"));
        assert_eq!(lines.next(), Some("st 1 f(e,3) <= 5"));
        assert!(dump.contains("st 1 bplus(t,3) -1 bmid(t,3) -1 f(e,3) = 0"));
    }
}
