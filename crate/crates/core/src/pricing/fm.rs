//! Fourier-Motzkin elimination, the independent feasibility oracle.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::system::{Constraint, LinearSystem, Relation};
use crate::budget::Budgets;
use crate::error::{ensure_budget, Result};
use crate::market::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmVerdict {
    Feasible,
    Infeasible,
}

/// `coeffs . x >= bound`, or `>` when `strict`. `history` marks the input
/// rows this one was combined from.
#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<Value>,
    bound: Value,
    strict: bool,
    history: History,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct History(Vec<u64>);

impl History {
    fn single(index: usize, len: usize) -> Self {
        let mut words = vec![0; len.div_ceil(64)];
        words[index / 64] |= 1 << (index % 64);
        History(words)
    }

    fn union(&self, other: &History) -> History {
        History(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn is_subset(&self, other: &History) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Rows grouped by normalised coefficient vector. A row is dropped only
/// when another is at least as tight and was combined from a subset of its
/// inputs, which keeps the history pruning exact.
type RowSet = BTreeMap<Vec<Value>, Vec<(Value, bool, History)>>;

/// Whether `(bound, strict, history)` makes `other` redundant.
fn dominates(a: &(Value, bool, History), b: &(Value, bool, History)) -> bool {
    let tighter = a.0 > b.0 || (a.0 == b.0 && (a.1 || !b.1));
    tighter && a.2.is_subset(&b.2)
}

/// Adds `row`, scaled so its first nonzero coefficient is +1 or -1. Returns
/// false if the row is a constant contradiction.
fn insert(rows: &mut RowSet, row: Row) -> bool {
    let Some(lead) = row.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) else {
        return if row.strict {
            row.bound.is_negative()
        } else {
            !row.bound.is_positive()
        };
    };
    let coeffs: Vec<Value> = row.coeffs.iter().map(|c| c / &lead).collect();
    let entry = (row.bound / &lead, row.strict, row.history);
    let group = rows.entry(coeffs).or_default();
    if group.iter().any(|e| dominates(e, &entry)) {
        return true;
    }
    group.retain(|e| !dominates(&entry, e));
    group.push(entry);
    true
}

fn rows_of(system: &LinearSystem) -> Vec<Row> {
    let n = system.variable_count();
    let mut out = Vec::new();
    for c in system.constraints() {
        let mut coeffs = vec![Value::zero(); n];
        for (&var, &a) in &c.coeffs {
            coeffs[var] = Value::from_integer(a.into());
        }
        let bound = Value::from_integer(c.bound.into());
        if c.relation == Relation::Eq {
            out.push(Row {
                coeffs: coeffs.iter().map(|a| -a).collect(),
                bound: -bound.clone(),
                strict: false,
                history: History(Vec::new()),
            });
        }
        out.push(Row {
            coeffs,
            bound,
            strict: false,
            history: History(Vec::new()),
        });
    }
    out
}

fn eliminate(mut rows: Vec<Row>, variable_count: usize, budgets: &Budgets) -> Result<FmVerdict> {
    ensure_budget(
        "Fourier-Motzkin variable",
        variable_count as u128,
        budgets.fm_max_variables as u128,
    )?;
    let total = rows.len();
    for (i, row) in rows.iter_mut().enumerate() {
        row.history = History::single(i, total);
    }
    let mut set = RowSet::new();
    for row in rows {
        if !insert(&mut set, row) {
            return Ok(FmVerdict::Infeasible);
        }
    }
    let mut remaining: Vec<usize> = (0..variable_count).collect();
    let mut eliminated = 0;
    while !remaining.is_empty() {
        // Eliminate the variable producing the fewest combined rows.
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &var)| {
                let count = |positive: bool| -> usize {
                    set.iter()
                        .filter(|(c, _)| if positive { c[var].is_positive() } else { c[var].is_negative() })
                        .map(|(_, g)| g.len())
                        .sum()
                };
                let (lower, upper) = (count(true), count(false));
                (pos, lower * upper)
            })
            .min_by_key(|&(pos, cost)| (cost, std::cmp::Reverse(remaining[pos])))
            .unwrap();
        let var = remaining.remove(pos);
        eliminated += 1;

        let mut upper = Vec::new();
        let mut lower = Vec::new();
        let mut next = RowSet::new();
        let mut kept = 0;
        for (coeffs, group) in set {
            if coeffs[var].is_zero() {
                kept += group.len();
                next.insert(coeffs, group);
                continue;
            }
            for (bound, strict, history) in group {
                let row = Row {
                    coeffs: coeffs.clone(),
                    bound,
                    strict,
                    history,
                };
                if row.coeffs[var].is_positive() {
                    lower.push(row);
                } else {
                    upper.push(row);
                }
            }
        }
        ensure_budget(
            "Fourier-Motzkin constraint",
            (kept + lower.len() * upper.len()) as u128,
            budgets.fm_max_constraints as u128,
        )?;
        for lo in &lower {
            for up in &upper {
                // Chernikov: a row built from more than `eliminated + 1`
                // inputs is implied by rows with smaller histories.
                let history = lo.history.union(&up.history);
                if history.len() > eliminated + 1 {
                    continue;
                }
                // Scale each row by the other's coefficient on `var`.
                let a = &lo.coeffs[var];
                let b = -&up.coeffs[var];
                let coeffs = lo
                    .coeffs
                    .iter()
                    .zip(&up.coeffs)
                    .map(|(x, y)| x * &b + y * a)
                    .collect();
                let combined = Row {
                    coeffs,
                    bound: &lo.bound * &b + &up.bound * a,
                    strict: lo.strict || up.strict,
                    history,
                };
                if !insert(&mut next, combined) {
                    return Ok(FmVerdict::Infeasible);
                }
            }
        }
        set = next;
    }
    Ok(FmVerdict::Feasible)
}

/// Decides feasibility of `system` by eliminating its variables one at a
/// time. Refuses systems with more than `budgets.fm_max_variables`
/// variables.
pub fn fm_eliminate(system: &LinearSystem, budgets: &Budgets) -> Result<FmVerdict> {
    eliminate(rows_of(system), system.variable_count(), budgets)
}

/// Whether every solution of `system` satisfies `constraint`, decided by
/// checking that `system` plus the negation of `constraint` is infeasible.
pub fn fm_implies(system: &LinearSystem, constraint: &Constraint, budgets: &Budgets) -> Result<bool> {
    let n = system.variable_count();
    let mut coeffs = vec![Value::zero(); n];
    for (&var, &a) in &constraint.coeffs {
        coeffs[var] = Value::from_integer(a.into());
    }
    let bound = Value::from_integer(constraint.bound.into());
    // Negation of `a.x >= b` is `-a.x > -b`; of `a.x <= b` is `a.x > b`.
    let mut negations = vec![Row {
        coeffs: coeffs.iter().map(|a| -a).collect(),
        bound: -bound.clone(),
        strict: true,
        history: History(Vec::new()),
    }];
    if constraint.relation == Relation::Eq {
        negations.push(Row {
            coeffs,
            bound,
            strict: true,
            history: History(Vec::new()),
        });
    }
    for negation in negations {
        let mut rows = rows_of(system);
        rows.push(negation);
        if eliminate(rows, n, budgets)? == FmVerdict::Feasible {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether two systems over the same variables have the same solution set.
pub fn fm_equivalent(a: &LinearSystem, b: &LinearSystem, budgets: &Budgets) -> Result<bool> {
    for (from, to) in [(a, b), (b, a)] {
        for c in to.constraints() {
            if !fm_implies(from, c, budgets)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::system::Origin;

    fn ge(terms: &[(usize, i64)], bound: i64) -> Constraint {
        Constraint::new(terms.iter().copied(), Relation::Ge, bound, Origin::Other)
    }

    #[test]
    fn empty_system() {
        assert_eq!(
            fm_eliminate(&LinearSystem::new(2), &Budgets::default()).unwrap(),
            FmVerdict::Feasible
        );
    }

    #[test]
    fn opposed_differences() {
        let sys = LinearSystem::from_constraints(2, [ge(&[(0, 1), (1, -1)], 1), ge(&[(1, 1), (0, -1)], 0)])
            .unwrap();
        assert_eq!(fm_eliminate(&sys, &Budgets::default()).unwrap(), FmVerdict::Infeasible);
    }

    #[test]
    fn implication_uses_strictness() {
        let sys = LinearSystem::from_constraints(1, [ge(&[(0, 1)], 2)]).unwrap();
        let b = Budgets::default();
        assert!(fm_implies(&sys, &ge(&[(0, 1)], 2), &b).unwrap());
        assert!(fm_implies(&sys, &ge(&[(0, 2)], 3), &b).unwrap());
        assert!(!fm_implies(&sys, &ge(&[(0, 1)], 3), &b).unwrap());
    }

    #[test]
    fn pruning_keeps_subsystem_infeasibility() {
        // Duplicate directions with different histories once made the
        // history rule drop the only contradiction.
        let rows = [
            ge(&[(1, 1)], 0),
            ge(&[(4, 1)], 0),
            ge(&[(5, 1)], 0),
            ge(&[(0, -1), (1, -3), (3, 1), (4, 1)], 5),
            ge(&[(0, -2), (1, -1), (5, -3)], -5),
            ge(&[(0, 2), (1, 1), (5, 3)], 5),
            ge(&[(2, 1), (3, -1), (5, 3)], -2),
            ge(&[(2, 3), (5, 3)], -3),
            ge(&[(0, 2), (1, 2), (4, -3)], 2),
            ge(&[(0, -2), (1, -3), (3, 1), (5, 3)], 2),
            ge(&[(0, 2), (1, 3), (3, -1), (5, -3)], -2),
            ge(&[(2, 3), (5, 3)], 3),
            ge(&[(2, -3), (5, -3)], -3),
            ge(&[(2, 1), (4, -1), (5, -1)], 2),
            ge(&[(2, 3), (3, -1), (5, 2)], -1),
        ];
        let sys = LinearSystem::from_constraints(6, rows).unwrap();
        assert_eq!(fm_eliminate(&sys, &Budgets::default()).unwrap(), FmVerdict::Infeasible);
    }

    #[test]
    fn variable_cap() {
        assert!(fm_eliminate(&LinearSystem::new(9), &Budgets::default()).is_err());
    }
}
