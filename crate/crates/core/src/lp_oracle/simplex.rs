//! Dense two-phase primal simplex over exact rationals, Bland's rule.
//!
//! All variables are non-negative. Row operations skip zero entries, which
//! keeps the cost per pivot proportional to the non-zeros touched.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Constraint, LpError, Relation};

type Q = BigRational;

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    // reduced costs and the negated objective value
    cost: Vec<Q>,
    neg_value: Q,
    allowed: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            let inv = p.recip();
            for x in self.rows[r].iter_mut().filter(|x| !x.is_zero()) {
                *x *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !self.cost[c].is_zero() {
            let factor = self.cost[c].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                self.cost[j] -= delta;
            }
            self.neg_value -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations until optimal. Bland's rule: lowest-index
    /// improving column, ties in the ratio test to the lowest basic index.
    fn optimize(&mut self) -> Result<(), LpError> {
        loop {
            let Some(c) =
                (0..self.cost.len()).find(|&j| self.allowed[j] && self.cost[j].is_positive())
            else {
                return Ok(());
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let (r, _) = best.ok_or(LpError::Unbounded)?;
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, objective: &[Q]) {
        self.cost = objective.to_vec();
        self.neg_value = Q::zero();
        for i in 0..self.rows.len() {
            let cb = objective[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.cost.len() {
                if !self.rows[i][j].is_zero() {
                    let delta = &cb * &self.rows[i][j];
                    self.cost[j] -= delta;
                }
            }
            self.neg_value -= &cb * &self.rhs[i];
        }
    }
}

/// Maximizes `objective · x` subject to `constraints` and `x >= 0`.
pub(super) fn maximize(
    n_vars: usize,
    constraints: &[Constraint],
    objective: &[(usize, Q)],
) -> Result<(Q, Vec<Q>), LpError> {
    let m = constraints.len();
    let n_slack = constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let n_art = constraints
        .iter()
        .filter(|c| {
            let flip = c.rhs.is_negative();
            match c.relation {
                Relation::Eq => true,
                Relation::Le => flip,
                Relation::Ge => !flip,
            }
        })
        .count();
    let width = n_vars + n_slack + n_art;
    let art_start = n_vars + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n_vars, art_start);
    for c in constraints {
        let mut row = vec![Q::zero(); width];
        for (j, a) in &c.terms {
            if *j >= n_vars {
                return Err(LpError::UnknownVariable(*j));
            }
            row[*j] += a;
        }
        let mut b = c.rhs.clone();
        let mut relation = c.relation;
        if b.is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            b = -b;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        match relation {
            Relation::Le => {
                row[next_slack] = Q::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Q::one();
                next_slack += 1;
                row[next_art] = Q::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Q::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
        rhs.push(b);
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cost: Vec::new(),
        neg_value: Q::zero(),
        allowed: vec![true; width],
    };

    if n_art > 0 {
        let mut phase1 = vec![Q::zero(); width];
        for x in &mut phase1[art_start..] {
            *x = -Q::one();
        }
        t.set_objective(&phase1);
        t.optimize()?;
        if !t.neg_value.is_zero() {
            return Err(LpError::Infeasible);
        }
        // drive remaining (zero-valued) artificials out of the basis
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for a in &mut t.allowed[art_start..] {
            *a = false;
        }
    }

    let mut phase2 = vec![Q::zero(); width];
    for (j, c) in objective {
        if *j >= n_vars {
            return Err(LpError::UnknownVariable(*j));
        }
        phase2[*j] += c;
    }
    t.set_objective(&phase2);
    t.optimize()?;

    let mut x = vec![Q::zero(); n_vars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n_vars {
            x[b] = t.rhs[i].clone();
        }
    }
    Ok((-t.neg_value, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn c(terms: &[(usize, i64)], relation: Relation, rhs: i64) -> Constraint {
        Constraint {
            terms: terms.iter().map(|&(j, a)| (j, q(a))).collect(),
            relation,
            rhs: q(rhs),
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18  -> 36 at (2, 6)
        let cons = [
            c(&[(0, 1)], Relation::Le, 4),
            c(&[(1, 2)], Relation::Le, 12),
            c(&[(0, 3), (1, 2)], Relation::Le, 18),
        ];
        let (opt, x) = maximize(2, &cons, &[(0, q(3)), (1, q(5))]).unwrap();
        assert_eq!(opt, q(36));
        assert_eq!(x, vec![q(2), q(6)]);
    }

    #[test]
    fn equalities_and_fractions() {
        // max x + y; x + 2y = 3; 2x + y <= 3 -> x = y = 1
        let cons = [
            c(&[(0, 1), (1, 2)], Relation::Eq, 3),
            c(&[(0, 2), (1, 1)], Relation::Le, 3),
        ];
        let (opt, _) = maximize(2, &cons, &[(0, q(1)), (1, q(1))]).unwrap();
        assert_eq!(opt, q(2));
        // max x; 2x = 1 -> 1/2
        let (opt, _) = maximize(1, &[c(&[(0, 2)], Relation::Eq, 1)], &[(0, q(1))]).unwrap();
        assert_eq!(opt, Q::new(1.into(), 2.into()));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let cons = [c(&[(0, 1)], Relation::Ge, 2), c(&[(0, 1)], Relation::Le, 1)];
        assert_eq!(maximize(1, &cons, &[(0, q(1))]), Err(LpError::Infeasible));
        let cons = [c(&[(0, 1), (1, -1)], Relation::Le, 1)];
        assert_eq!(maximize(2, &cons, &[(0, q(1))]), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let cons = [
            c(&[(0, 1), (1, 1)], Relation::Eq, 2),
            c(&[(0, 2), (1, 2)], Relation::Eq, 4),
            c(&[(0, 1)], Relation::Le, 1),
        ];
        let (opt, _) = maximize(2, &cons, &[(1, q(1))]).unwrap();
        assert_eq!(opt, q(2));
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -2 is x >= 2; max -x -> -2
        let cons = [c(&[(0, -1)], Relation::Le, -2)];
        let (opt, x) = maximize(1, &cons, &[(0, q(-1))]).unwrap();
        assert_eq!(opt, q(-2));
        assert_eq!(x, vec![q(2)]);
    }
}
