//! Oracles and helpers shared by the integration tests. Everything here is
//! written independently of the solvers it checks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use kdemand::bundle::ItemSet;
use kdemand::matching::{max_weight_set_packing, WeightedHypergraph};
use kdemand::pricing::{Constraint, LinearSystem, Origin, Relation};
use kdemand::reductions::{Prng, ThreeDm3Instance};
use kdemand::{Allocation, Market, Valuation};

/// Optimal welfare by recursing over item owners, evaluating through the
/// checked `eval` path.
pub fn naive_welfare(market: &Market) -> u64 {
    fn go(market: &Market, item: usize, bundles: &mut Vec<ItemSet>) -> u64 {
        if item == market.item_count() {
            return bundles
                .iter()
                .enumerate()
                .map(|(i, &b)| market.eval(i, b).unwrap())
                .sum();
        }
        let mut best = go(market, item + 1, bundles);
        for agent in 0..market.agent_count() {
            bundles[agent].insert(item);
            best = best.max(go(market, item + 1, bundles));
            bundles[agent].remove(item);
        }
        best
    }
    go(market, 0, &mut vec![ItemSet::EMPTY; market.agent_count()])
}

/// Every allocation reaching the optimal welfare.
pub fn optimal_allocations(market: &Market) -> Vec<Allocation> {
    let mut all = Vec::new();
    let mut owners = vec![None; market.item_count()];
    fn go(
        market: &Market,
        item: usize,
        owners: &mut Vec<Option<usize>>,
        all: &mut Vec<(u64, Allocation)>,
    ) {
        let n = market.agent_count();
        if item == owners.len() {
            let a = Allocation::from_owners(n, owners).unwrap();
            all.push((market.social_welfare(&a).unwrap(), a));
            return;
        }
        for owner in std::iter::once(None).chain((0..n).map(Some)) {
            owners[item] = owner;
            go(market, item + 1, owners, all);
        }
    }
    go(market, 0, &mut owners, &mut all);
    let best = all.iter().map(|(w, _)| *w).max().unwrap();
    all.into_iter()
        .filter(|(w, _)| *w == best)
        .map(|(_, a)| a)
        .collect()
}

/// Every item has exactly one owner, counting "unallocated" as an owner.
pub fn is_partition(market: &Market, allocation: &Allocation) -> bool {
    let mut union = allocation.unallocated();
    let mut total = union.len();
    for b in allocation.bundles() {
        union = union.union(*b);
        total += b.len();
    }
    union == ItemSet::full(market.item_count()) && total == market.item_count()
}

pub fn scale_valuation(v: &Valuation, c: u64) -> Valuation {
    let s = |xs: &Vec<u64>| xs.iter().map(|x| x * c).collect::<Vec<_>>();
    match v {
        Valuation::UnitDemand(xs) => Valuation::UnitDemand(s(xs)),
        Valuation::Additive(xs) => Valuation::Additive(s(xs)),
        Valuation::BudgetAdditive { values, budget } => Valuation::BudgetAdditive {
            values: s(values),
            budget: budget * c,
        },
        Valuation::SingleMinded { bundle, value } => Valuation::SingleMinded {
            bundle: *bundle,
            value: value * c,
        },
        Valuation::MultiMindedPair {
            a,
            b,
            value_a,
            value_b,
            value_ab,
        } => Valuation::MultiMindedPair {
            a: *a,
            b: *b,
            value_a: value_a * c,
            value_b: value_b * c,
            value_ab: value_ab * c,
        },
        Valuation::KDemandTable { k, entries } => Valuation::KDemandTable {
            k: *k,
            entries: entries.iter().map(|(b, v)| (*b, v * c)).collect::<BTreeMap<_, _>>(),
        },
        Valuation::Xos { rows } => Valuation::Xos {
            rows: rows.iter().map(s).collect(),
        },
    }
}

pub fn scale_market(market: &Market, c: u64) -> Market {
    Market::new(
        market.item_count(),
        market
            .valuations()
            .iter()
            .map(|v| scale_valuation(v, c))
            .collect(),
    )
    .unwrap()
}

/// Market with one extra agent valuing everything at zero.
pub fn with_idle_agent(market: &Market) -> Market {
    let mut valuations = market.valuations().to_vec();
    valuations.push(Valuation::Additive(vec![0; market.item_count()]));
    Market::new(market.item_count(), valuations).unwrap()
}

/// Whether the triples contain `q` pairwise-disjoint ones, decided by
/// packing unit-weight triples over `x`, `y` and `z` vertices.
pub fn has_perfect_cover(instance: &ThreeDm3Instance) -> bool {
    let q = instance.q();
    let mut graph = WeightedHypergraph::new(3 * q);
    for t in instance.triples() {
        graph.add_edge(vec![t[0], q + t[1], 2 * q + t[2]], 1).unwrap();
    }
    max_weight_set_packing(&graph, usize::MAX).unwrap().total_weight == q as u64
}

/// Whether `values` split into triples that each sum to `sum / n`.
pub fn has_3partition(values: &[u64], n: usize) -> bool {
    let total: u64 = values.iter().sum();
    if values.len() != 3 * n || !total.is_multiple_of(n as u64) {
        return false;
    }
    let target = total / n as u64;
    fn go(values: &[u64], used: &mut [bool], target: u64) -> bool {
        let Some(first) = used.iter().position(|u| !u) else {
            return true;
        };
        used[first] = true;
        for j in first + 1..values.len() {
            if used[j] {
                continue;
            }
            for l in j + 1..values.len() {
                if used[l] || values[first] + values[j] + values[l] != target {
                    continue;
                }
                used[j] = true;
                used[l] = true;
                if go(values, used, target) {
                    return true;
                }
                used[j] = false;
                used[l] = false;
            }
        }
        used[first] = false;
        false
    }
    go(values, &mut vec![false; values.len()], target)
}

/// A random system with `vars` variables: a mix of `>=` and `=` rows with
/// small coefficients, plus sign rows on some variables.
pub fn random_system(rng: &mut Prng, vars: usize, rows: usize) -> LinearSystem {
    let mut system = LinearSystem::new(vars);
    for var in 0..vars {
        if rng.below(2) == 0 {
            system
                .push(Constraint::new(
                    [(var, 1)],
                    Relation::Ge,
                    0,
                    Origin::PriceNonNegative { item: var },
                ))
                .unwrap();
        }
    }
    while system.len() < rows {
        let mut terms = Vec::new();
        for var in 0..vars {
            if rng.below(2) == 0 {
                terms.push((var, rng.range(0, 6) as i64 - 3));
            }
        }
        let relation = if rng.below(5) == 0 {
            Relation::Eq
        } else {
            Relation::Ge
        };
        let c = Constraint::new(terms, relation, rng.range(0, 10) as i64 - 5, Origin::Other);
        if !c.is_vacuous() {
            system.push(c).unwrap();
        }
    }
    system
}

/// Draws `(agents, items)` with `1 <= agents <= max_agents` and
/// `min_items <= items <= max_items`.
pub fn shape(rng: &mut Prng, max_agents: usize, min_items: usize, max_items: usize) -> (usize, usize) {
    (
        rng.range(1, max_agents as u64) as usize,
        rng.range(min_items as u64, max_items as u64) as usize,
    )
}
