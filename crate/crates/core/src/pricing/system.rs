//! Linear systems over item prices.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::budget::Budgets;
use crate::bundle::{count_up_to, subsets_up_to, ItemSet};
use crate::error::{ensure_budget, Error, Result};
use crate::market::{Allocation, Market, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `lhs >= bound`
    Ge,
    /// `lhs = bound`
    Eq,
}

/// Where a constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Agent `agent` weakly prefers its allocated bundle to `bundle`.
    AgentBundle { agent: usize, bundle: ItemSet },
    /// `p_item >= 0` for an allocated item.
    PriceNonNegative { item: usize },
    /// `p_item = 0` for an unallocated item.
    PriceZero { item: usize },
    Other,
}

/// `sum_j coeffs[j] * p_j (>= | =) bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: BTreeMap<usize, i64>,
    pub relation: Relation,
    pub bound: i64,
    pub origin: Origin,
}

impl Constraint {
    /// Builds a constraint, merging repeated variables and dropping zero
    /// coefficients.
    pub fn new(
        terms: impl IntoIterator<Item = (usize, i64)>,
        relation: Relation,
        bound: i64,
        origin: Origin,
    ) -> Constraint {
        let mut coeffs = BTreeMap::new();
        for (var, c) in terms {
            *coeffs.entry(var).or_insert(0i64) += c;
        }
        coeffs.retain(|_, c| *c != 0);
        Constraint {
            coeffs,
            relation,
            bound,
            origin,
        }
    }

    /// A constraint with no variables, which the system rejects.
    pub fn is_vacuous(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lhs(&self, point: &[Value]) -> Value {
        self.coeffs
            .iter()
            .map(|(&var, &c)| &point[var] * Value::from_integer(c.into()))
            .fold(Value::zero(), |acc, term| acc + term)
    }

    pub fn is_satisfied_by(&self, point: &[Value]) -> bool {
        let lhs = self.lhs(point);
        let bound = Value::from_integer(self.bound.into());
        match self.relation {
            Relation::Ge => lhs >= bound,
            Relation::Eq => lhs == bound,
        }
    }
}

/// `p1 - 2 p3 >= 4` with 1-indexed variables.
impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, (&var, &c)) in self.coeffs.iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            match (pos, c.unsigned_abs()) {
                (0, 1) if c < 0 => write!(f, "-p{}", var + 1)?,
                (0, 1) => write!(f, "p{}", var + 1)?,
                (0, a) if c < 0 => write!(f, "-{a} p{}", var + 1)?,
                (0, a) => write!(f, "{a} p{}", var + 1)?,
                (_, 1) => write!(f, " {sign} p{}", var + 1)?,
                (_, a) => write!(f, " {sign} {a} p{}", var + 1)?,
            }
        }
        if self.coeffs.is_empty() {
            f.write_str("0")?;
        }
        let rel = match self.relation {
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        write!(f, " {rel} {}", self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    variable_count: usize,
    constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(variable_count: usize) -> LinearSystem {
        LinearSystem {
            variable_count,
            constraints: Vec::new(),
        }
    }

    /// Adds a constraint; rejects vacuous ones and unknown variables.
    pub fn push(&mut self, constraint: Constraint) -> Result<()> {
        if constraint.is_vacuous() {
            return Err(Error::InvalidSystem(format!(
                "vacuous constraint `{constraint}`"
            )));
        }
        if let Some(&var) = constraint.coeffs.keys().next_back() {
            if var >= self.variable_count {
                return Err(Error::InvalidSystem(format!(
                    "variable p{} out of range for {} variables",
                    var + 1,
                    self.variable_count
                )));
            }
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn from_constraints(
        variable_count: usize,
        constraints: impl IntoIterator<Item = Constraint>,
    ) -> Result<LinearSystem> {
        let mut system = LinearSystem::new(variable_count);
        for c in constraints {
            system.push(c)?;
        }
        Ok(system)
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_satisfied_by(&self, point: &[Value]) -> bool {
        point.len() == self.variable_count && self.constraints.iter().all(|c| c.is_satisfied_by(point))
    }

    /// The subsystem made of the constraints at `indices`.
    pub fn subsystem(&self, indices: impl IntoIterator<Item = usize>) -> LinearSystem {
        LinearSystem {
            variable_count: self.variable_count,
            constraints: indices.into_iter().map(|i| self.constraints[i].clone()).collect(),
        }
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    /// A point satisfying every constraint.
    Feasible(Vec<Value>),
    /// No point exists; `witness` is an infeasible subsystem (the whole
    /// system when nothing smaller was found).
    Infeasible { witness: LinearSystem },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible(_))
    }
}

/// The system of Walrasian pricing constraints for `allocation`:
///
/// * `v_i(S_i) - p(S_i) >= v_i(X) - p(X)` for every agent `i` and bundle `X`
///   with `|X| <= k_cap`, the empty bundle included;
/// * `p_j >= 0` for allocated items and `p_j = 0` for unallocated ones.
///
/// With `prune`, each agent only contributes the bundles of
/// [`crate::Valuation::relevant_bundles`]; every other bundle is worth no more
/// than a listed subset of it, so its constraint is implied. The constraint
/// for `X = S_i` is vacuous and never emitted.
pub fn build_pricing_system(
    market: &Market,
    allocation: &Allocation,
    k_cap: usize,
    prune: bool,
    budgets: &Budgets,
) -> Result<LinearSystem> {
    market.check_allocation(allocation)?;
    let m = market.item_count();
    let mut system = LinearSystem::new(m);
    let mut emitted: u128 = 0;
    for (agent, valuation) in market.valuations().iter().enumerate() {
        let held = allocation.bundle(agent);
        let held_value = valuation.value(held) as i64;
        let bundles: Vec<ItemSet> = if prune {
            valuation
                .relevant_bundles(m, budgets.bundles)?
                .into_iter()
                .filter(|b| b.len() <= k_cap)
                .filter(|b| {
                    let v = valuation.value(*b);
                    b.iter().all(|j| {
                        let mut smaller = *b;
                        smaller.remove(j);
                        valuation.value(smaller) < v
                    })
                })
                .collect()
        } else {
            ensure_budget("bundle", count_up_to(m, k_cap), budgets.bundles)?;
            subsets_up_to(ItemSet::full(m), k_cap).collect()
        };
        emitted += bundles.len() as u128;
        ensure_budget("pricing constraint", emitted, budgets.bundles)?;
        for bundle in bundles {
            // sum_{X \ S} p - sum_{S \ X} p >= v(X) - v(S)
            let terms = bundle
                .difference(held)
                .iter()
                .map(|j| (j, 1))
                .chain(held.difference(bundle).iter().map(|j| (j, -1)));
            let c = Constraint::new(
                terms,
                Relation::Ge,
                valuation.value(bundle) as i64 - held_value,
                Origin::AgentBundle { agent, bundle },
            );
            if !c.is_vacuous() {
                system.push(c)?;
            }
        }
    }
    let unallocated = allocation.unallocated();
    for item in 0..m {
        let c = if unallocated.contains(item) {
            Constraint::new([(item, 1)], Relation::Eq, 0, Origin::PriceZero { item })
        } else {
            Constraint::new([(item, 1)], Relation::Ge, 0, Origin::PriceNonNegative { item })
        };
        system.push(c)?;
    }
    Ok(system)
}
