//! Equilibrium verification and the end-to-end solver.

use crate::budget::Budgets;
use crate::bundle::{count_up_to, subsets_up_to, ItemSet};
use crate::error::{ensure_budget, Error, Result};
use crate::market::{Allocation, Market, Pricing, Valuation, Value};
use crate::wd::{dispatch, Algorithm};

use super::difference::difference_constraint_pricing;
use super::simplex::lp_feasibility;
use super::system::{build_pricing_system, FeasibilityResult, LinearSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeVerdict {
    Accept,
    Reject(Rejection),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// An unallocated item carries a positive price.
    UnallocatedPriced { item: usize, price: Value },
    /// `agent` strictly prefers `bundle` to what it holds.
    Envy {
        agent: usize,
        bundle: ItemSet,
        held_utility: Value,
        better_utility: Value,
    },
}

/// Checks both equilibrium conditions exactly.
///
/// Unallocated items are checked first, in item order. Then each agent's
/// held bundle is compared with every bundle of at most
/// [`Valuation::demand_bound`] items, in size-then-lexicographic order
/// starting from the empty bundle; the first strictly better bundle is
/// reported. At nonnegative prices a k-demand agent's best bundle always has
/// at most k items, so this covers every bundle.
pub fn verify_we(
    market: &Market,
    allocation: &Allocation,
    pricing: &Pricing,
    budgets: &Budgets,
) -> Result<WeVerdict> {
    market.check_allocation(allocation)?;
    market.check_pricing(pricing)?;
    for item in allocation.unallocated().iter() {
        let price = pricing.price(item);
        if *price > Value::from_integer(0.into()) {
            return Ok(WeVerdict::Reject(Rejection::UnallocatedPriced {
                item,
                price: price.clone(),
            }));
        }
    }
    let m = market.item_count();
    let mut work: u128 = 0;
    for (agent, valuation) in market.valuations().iter().enumerate() {
        let k = valuation.demand_bound(m);
        work = work.saturating_add(count_up_to(m, k));
        ensure_budget("verification bundle", work, budgets.bundles)?;
        let held_utility = valuation.utility(allocation.bundle(agent), pricing)?;
        for bundle in subsets_up_to(ItemSet::full(m), k) {
            let utility = valuation.utility(bundle, pricing)?;
            if utility > held_utility {
                return Ok(WeVerdict::Reject(Rejection::Envy {
                    agent,
                    bundle,
                    held_utility,
                    better_utility: utility,
                }));
            }
        }
    }
    Ok(WeVerdict::Accept)
}

/// Prices supporting `allocation`, if any exist, together with the system
/// they were checked against.
///
/// Unit-demand markets whose agents hold at most one item each go through
/// [`difference_constraint_pricing`]; everything else through the pruned
/// pricing system and [`lp_feasibility`].
pub fn price_allocation(
    market: &Market,
    allocation: &Allocation,
    budgets: &Budgets,
) -> Result<(LinearSystem, FeasibilityResult)> {
    let k = market.demand_bound();
    let system = build_pricing_system(market, allocation, k, true, budgets)?;
    let unit_demand = market
        .valuations()
        .iter()
        .all(|v| matches!(v, Valuation::UnitDemand(_)))
        && allocation.bundles().iter().all(|b| b.len() <= 1);
    let result = if unit_demand {
        difference_constraint_pricing(market, allocation)?
    } else {
        lp_feasibility(&system)
    };
    Ok((system, result))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquilibriumResult {
    Equilibrium {
        allocation: Allocation,
        pricing: Pricing,
        welfare: u64,
        algorithm: Algorithm,
    },
    NoEquilibrium {
        allocation: Allocation,
        welfare: u64,
        algorithm: Algorithm,
        /// The pricing system of `allocation`.
        system: LinearSystem,
        /// An infeasible subsystem of `system`.
        witness: LinearSystem,
    },
}

impl EquilibriumResult {
    pub fn allocation(&self) -> &Allocation {
        match self {
            EquilibriumResult::Equilibrium { allocation, .. }
            | EquilibriumResult::NoEquilibrium { allocation, .. } => allocation,
        }
    }

    pub fn welfare(&self) -> u64 {
        match self {
            EquilibriumResult::Equilibrium { welfare, .. }
            | EquilibriumResult::NoEquilibrium { welfare, .. } => *welfare,
        }
    }

    pub fn is_equilibrium(&self) -> bool {
        matches!(self, EquilibriumResult::Equilibrium { .. })
    }
}

/// Decides whether `market` has a Walrasian equilibrium and returns one if
/// it does.
///
/// Finds an optimal allocation with [`dispatch`], then looks for prices
/// supporting it. Any optimal allocation works: a market has an equilibrium
/// exactly when the pricing system of one (equivalently, every) optimal
/// allocation is feasible. Prices found are verified with [`verify_we`]
/// before being returned.
pub fn solve_walrasian(market: &Market, budgets: &Budgets) -> Result<EquilibriumResult> {
    let wd = dispatch(market, budgets)?;
    let (system, result) = price_allocation(market, &wd.allocation, budgets)?;
    match result {
        FeasibilityResult::Feasible(point) => {
            let pricing = Pricing::new(point)?;
            match verify_we(market, &wd.allocation, &pricing, budgets)? {
                WeVerdict::Accept => Ok(EquilibriumResult::Equilibrium {
                    allocation: wd.allocation,
                    pricing,
                    welfare: wd.welfare,
                    algorithm: wd.algorithm,
                }),
                WeVerdict::Reject(reason) => Err(Error::Internal(format!(
                    "feasible prices fail verification: {reason:?}"
                ))),
            }
        }
        FeasibilityResult::Infeasible { witness } => Ok(EquilibriumResult::NoEquilibrium {
            allocation: wd.allocation,
            welfare: wd.welfare,
            algorithm: wd.algorithm,
            system,
            witness,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::fm::{fm_eliminate, FmVerdict};

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn ud_example() -> (Market, Allocation) {
        let m = Market::new(
            2,
            vec![Valuation::UnitDemand(vec![2, 1]), Valuation::UnitDemand(vec![1, 2])],
        )
        .unwrap();
        let a = Allocation::new(2, vec![set(&[0]), set(&[1])]).unwrap();
        (m, a)
    }

    fn no_we_market() -> Market {
        Market::new(
            2,
            vec![
                Valuation::SingleMinded {
                    bundle: set(&[0, 1]),
                    value: 3,
                },
                Valuation::UnitDemand(vec![2, 2]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn verify_examples() {
        let (m, a) = ud_example();
        let b = Budgets::default();
        assert_eq!(
            verify_we(&m, &a, &Pricing::from_integers(&[0, 0]), &b).unwrap(),
            WeVerdict::Accept
        );
        match verify_we(&m, &a, &Pricing::from_integers(&[0, 3]), &b).unwrap() {
            WeVerdict::Reject(Rejection::Envy { agent, bundle, .. }) => {
                assert_eq!((agent, bundle), (1, ItemSet::EMPTY));
            }
            other => panic!("{other:?}"),
        }
        let partial = Allocation::new(2, vec![set(&[0]), ItemSet::EMPTY]).unwrap();
        assert!(matches!(
            verify_we(&m, &partial, &Pricing::from_integers(&[0, 1]), &b).unwrap(),
            WeVerdict::Reject(Rejection::UnallocatedPriced { item: 1, .. })
        ));
    }

    #[test]
    fn solve_examples() {
        let b = Budgets::default();
        let (m, _) = ud_example();
        let r = solve_walrasian(&m, &b).unwrap();
        assert!(r.is_equilibrium());
        assert_eq!(r.welfare(), 4);

        match solve_walrasian(&no_we_market(), &b).unwrap() {
            EquilibriumResult::NoEquilibrium {
                welfare, witness, system, ..
            } => {
                assert_eq!(welfare, 3);
                assert_eq!(fm_eliminate(&witness, &b).unwrap(), FmVerdict::Infeasible);
                assert_eq!(fm_eliminate(&system, &b).unwrap(), FmVerdict::Infeasible);
            }
            other => panic!("{other:?}"),
        }

        let zeros = Market::new(3, vec![Valuation::Additive(vec![0; 3]); 2]).unwrap();
        match solve_walrasian(&zeros, &b).unwrap() {
            EquilibriumResult::Equilibrium {
                pricing, welfare, ..
            } => {
                assert_eq!(welfare, 0);
                assert_eq!(pricing, Pricing::zeros(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_demand_system_counts() {
        let (m, a) = ud_example();
        let b = Budgets::default();
        let sys = build_pricing_system(&m, &a, 1, false, &b).unwrap();
        // Three bundles per agent, minus the vacuous one for the held item,
        // plus two sign constraints.
        assert_eq!(sys.len(), 2 * 2 + 2);
    }

    #[test]
    fn all_unallocated_forces_zero_prices() {
        let (m, _) = ud_example();
        let a = Allocation::empty(2, 2);
        let sys = build_pricing_system(&m, &a, 1, true, &Budgets::default()).unwrap();
        assert_eq!(
            sys.constraints()
                .iter()
                .filter(|c| matches!(c.origin, super::super::system::Origin::PriceZero { .. }))
                .count(),
            2
        );
    }
}
