//! Exact phase-1 simplex over rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use super::system::{Constraint, FeasibilityResult, LinearSystem, Relation};
use crate::market::Value;

/// Witness candidates larger than this skip the deletion filter.
const FILTER_LIMIT: usize = 64;

/// Rows added to the working set per round of row generation.
const ROW_BATCH: usize = 16;

/// Decides whether `system` has a real solution.
///
/// Variables constrained by a row `p_j >= 0` are bounded at zero, the rest
/// are split into a difference of two nonnegative columns. Each row gets a
/// slack (for `>=`) and, unless the slack can start basic, an artificial.
/// Minimising the sum of artificials with Bland's rule terminates on every
/// input. On infeasibility the rows with a nonzero phase-1 dual, together
/// with the bound rows, form the candidate witness, which is then shrunk by
/// dropping rows one at a time while it stays infeasible.
///
/// Large systems are solved by row generation: the simplex runs on a working
/// set, and rows the current point violates are added until none remain or
/// the working set is itself infeasible.
pub fn lp_feasibility(system: &LinearSystem) -> FeasibilityResult {
    let rows = system.constraints();
    let mut active: Vec<usize> = (0..rows.len())
        .filter(|&i| is_sign_row(&rows[i]).is_some())
        .collect();
    let mut pending: Vec<usize> = (0..rows.len())
        .filter(|&i| is_sign_row(&rows[i]).is_none())
        .collect();
    let initial = pending.len().min(ROW_BATCH + system.variable_count());
    active.extend(pending.drain(..initial));
    loop {
        match solve(&system.subsystem(active.iter().copied())) {
            Phase1::Feasible(point) => {
                let (violated, rest): (Vec<usize>, Vec<usize>) =
                    pending.iter().partition(|&&i| !rows[i].is_satisfied_by(&point));
                if violated.is_empty() {
                    debug_assert!(system.is_satisfied_by(&point));
                    return FeasibilityResult::Feasible(point);
                }
                let take = violated.len().min(ROW_BATCH);
                active.extend(&violated[..take]);
                pending = violated[take..].iter().copied().chain(rest).collect();
                pending.sort_unstable();
            }
            Phase1::Infeasible { support } => {
                let support = support.into_iter().map(|i| active[i]).collect();
                return FeasibilityResult::Infeasible {
                    witness: shrink_witness(system, support),
                };
            }
        }
    }
}

enum Phase1 {
    Feasible(Vec<Value>),
    /// Constraint indices with a nonzero dual, plus bound rows.
    Infeasible { support: Vec<usize> },
}

fn is_sign_row(c: &Constraint) -> Option<usize> {
    match (c.relation, c.bound, c.coeffs.len()) {
        (Relation::Ge, 0, 1) => {
            let (&var, &coeff) = c.coeffs.iter().next().unwrap();
            (coeff > 0).then_some(var)
        }
        _ => None,
    }
}

fn shrink_witness(system: &LinearSystem, support: Vec<usize>) -> LinearSystem {
    let candidate = system.subsystem(support.iter().copied());
    if matches!(solve(&candidate), Phase1::Feasible(_)) {
        return system.clone();
    }
    if support.len() > FILTER_LIMIT {
        return candidate;
    }
    let mut keep = support;
    let mut pos = 0;
    while pos < keep.len() {
        let mut trial = keep.clone();
        trial.remove(pos);
        if matches!(solve(&system.subsystem(trial.iter().copied())), Phase1::Infeasible { .. }) {
            keep = trial;
        } else {
            pos += 1;
        }
    }
    system.subsystem(keep)
}

struct Tableau {
    rows: Vec<Vec<Value>>,
    rhs: Vec<Value>,
    basis: Vec<usize>,
    /// Reduced phase-1 costs.
    costs: Vec<Value>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &pivot;
        }
        self.rhs[row] /= &pivot;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (v, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        if !self.costs[col].is_zero() {
            let factor = self.costs[col].clone();
            for (v, p) in self.costs.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule to optimality.
    fn optimise(&mut self) {
        while let Some(col) = self.costs.iter().position(|c| c.is_negative()) {
            let mut best: Option<(usize, Value)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((b, br)) => {
                        ratio < *br || (ratio == *br && self.basis[r] < self.basis[*b])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let (row, _) = best.expect("phase-1 objective is bounded below");
            self.pivot(row, col);
        }
    }
}

fn solve(system: &LinearSystem) -> Phase1 {
    let n = system.variable_count();
    let constraints = system.constraints();

    let mut bounded = vec![false; n];
    let mut sign_rows = Vec::new();
    let mut rows_used = Vec::new();
    for (idx, c) in constraints.iter().enumerate() {
        match is_sign_row(c) {
            Some(var) => {
                bounded[var] = true;
                sign_rows.push(idx);
            }
            None => rows_used.push(idx),
        }
    }

    // Column layout: one or two columns per variable, then one identity
    // column per row (slack or artificial), then slacks of rows whose
    // identity column is an artificial.
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut next = 0;
    for &b in &bounded {
        if b {
            var_cols.push((next, None));
            next += 1;
        } else {
            var_cols.push((next, Some(next + 1)));
            next += 2;
        }
    }
    let structural = next;
    let row_count = rows_used.len();
    let identity_base = structural;
    let mut extra_slacks = 0;
    // (negate row, identity column is a slack)
    let mut shape = Vec::with_capacity(row_count);
    for &idx in &rows_used {
        let c = &constraints[idx];
        let negate = c.bound < 0;
        let slack_identity = c.relation == Relation::Ge && negate;
        if c.relation == Relation::Ge && !slack_identity {
            extra_slacks += 1;
        }
        shape.push((negate, slack_identity));
    }
    let width = identity_base + row_count + extra_slacks;

    let mut rows = Vec::with_capacity(row_count);
    let mut rhs = Vec::with_capacity(row_count);
    let mut costs = vec![Value::zero(); width];
    let mut extra = identity_base + row_count;
    for (r, &idx) in rows_used.iter().enumerate() {
        let c = &constraints[idx];
        let (negate, slack_identity) = shape[r];
        let sign = if negate { -1i64 } else { 1 };
        let mut row = vec![Value::zero(); width];
        for (&var, &coeff) in &c.coeffs {
            let value = Value::from_integer((sign * coeff).into());
            let (pos, neg) = var_cols[var];
            if let Some(neg) = neg {
                row[neg] = -value.clone();
            }
            row[pos] = value;
        }
        // a.x - s = b, negated when b < 0 so the right side is nonnegative.
        row[identity_base + r] = Value::one();
        if c.relation == Relation::Ge && !slack_identity {
            row[extra] = -Value::one();
            extra += 1;
        }
        let b = Value::from_integer((sign * c.bound).into());
        if !slack_identity {
            // Artificial: cost 1, priced out of the starting basis.
            costs[identity_base + r] = Value::one();
        }
        rows.push(row);
        rhs.push(b);
    }
    for (r, &(_, slack_identity)) in shape.iter().enumerate() {
        if !slack_identity {
            for (cost, a) in costs.iter_mut().zip(&rows[r]) {
                *cost -= a;
            }
            // The artificial's own entry cancels to zero.
        }
    }
    let basis: Vec<usize> = (0..row_count).map(|r| identity_base + r).collect();
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        costs,
    };
    t.optimise();

    let objective: Value = (0..row_count)
        .filter(|&r| !shape[r].1)
        .map(|r| {
            t.basis
                .iter()
                .position(|&b| b == identity_base + r)
                .map(|pos| t.rhs[pos].clone())
                .unwrap_or_else(Value::zero)
        })
        .fold(Value::zero(), |acc, v| acc + v);

    if objective.is_zero() {
        let mut columns = vec![Value::zero(); width];
        for (r, &b) in t.basis.iter().enumerate() {
            columns[b] = t.rhs[r].clone();
        }
        let point = var_cols
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => &columns[pos] - &columns[neg],
                None => columns[pos].clone(),
            })
            .collect();
        return Phase1::Feasible(point);
    }

    // Phase-1 dual of row r: y_r = c_r - reduced cost of its identity column.
    let mut support: Vec<usize> = Vec::new();
    for (r, &idx) in rows_used.iter().enumerate() {
        let col = identity_base + r;
        let c = if shape[r].1 { Value::zero() } else { Value::one() };
        let dual = c - &t.costs[col];
        if !dual.is_zero() {
            support.push(idx);
        }
    }
    support.extend(sign_rows);
    support.sort_unstable();
    Phase1::Infeasible { support }
}
