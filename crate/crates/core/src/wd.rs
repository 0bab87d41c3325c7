//! Winner determination: welfare-maximising allocations.
//!
//! Every solver returns a [`WdResult`] whose welfare has been recomputed from
//! the allocation. [`brute_force`] is the reference every other solver is
//! tested against.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::budget::Budgets;
use crate::bundle::{binomial, combinations, count_up_to, subsets_up_to, ItemSet};
use crate::error::{ensure_budget, Error, Result};
use crate::market::{Allocation, Market, Valuation};
use crate::matching::{
    max_weight_bipartite_matching, max_weight_general_matching, max_weight_set_packing,
    GraphEdge, WeightedBipartiteGraph, WeightedHypergraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    UnitDemandMatching,
    PairMatching,
    FewItemsDp,
    FewAgentsEnum,
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::UnitDemandMatching,
        Algorithm::PairMatching,
        Algorithm::FewItemsDp,
        Algorithm::FewAgentsEnum,
        Algorithm::BruteForce,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::UnitDemandMatching => "unit-demand-matching",
            Algorithm::PairMatching => "pair-matching",
            Algorithm::FewItemsDp => "few-items-dp",
            Algorithm::FewAgentsEnum => "few-agents-enum",
            Algorithm::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown algorithm `{s}`")))
    }
}

/// An optimal allocation and the solver that found it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WdResult {
    pub allocation: Allocation,
    pub welfare: u64,
    pub algorithm: Algorithm,
}

fn finish(
    market: &Market,
    allocation: Allocation,
    claimed: u64,
    algorithm: Algorithm,
) -> Result<WdResult> {
    let welfare = market.social_welfare(&allocation)?;
    if welfare != claimed {
        return Err(Error::Internal(format!(
            "{algorithm} claimed welfare {claimed}, allocation is worth {welfare}"
        )));
    }
    Ok(WdResult {
        allocation,
        welfare,
        algorithm,
    })
}

/// `table[X] = v(X)` for every bundle of an `item_count`-item market.
fn value_table(valuation: &Valuation, item_count: usize) -> Vec<u64> {
    (0..1u64 << item_count)
        .map(|bits| valuation.value(ItemSet::from_bits(bits)))
        .collect()
}

fn check_no_items_overflow(market: &Market, limit: usize, what: &'static str) -> Result<()> {
    ensure_budget(what, market.item_count() as u128, limit as u128)
}

/// Exhaustive search over every assignment of items to agents or to `S_0`.
///
/// Ties go to the lexicographically smallest owner vector, with "unallocated"
/// sorting before agent 0.
pub fn brute_force(market: &Market, budgets: &Budgets) -> Result<WdResult> {
    let n = market.agent_count();
    let m = market.item_count();
    let assignments = (n as u128 + 1)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    ensure_budget("brute-force assignment", assignments, budgets.brute_force_assignments)?;

    let tables: Vec<Vec<u64>> = market
        .valuations()
        .iter()
        .map(|v| value_table(v, m))
        .collect();

    // digits[j] = 0 for unallocated, i + 1 for agent i. Odometer in
    // lexicographic order, item 0 most significant.
    let mut digits = vec![0usize; m];
    let mut masks = vec![0u64; n + 1];
    masks[0] = ItemSet::full(m).bits();
    let score = |masks: &[u64]| -> u64 {
        tables
            .iter()
            .zip(&masks[1..])
            .map(|(t, &mask)| t[mask as usize])
            .sum()
    };
    let mut best_welfare = score(&masks);
    let mut best_digits = digits.clone();
    loop {
        let mut pos = m;
        loop {
            if pos == 0 {
                let owners: Vec<Option<usize>> =
                    best_digits.iter().map(|&d| d.checked_sub(1)).collect();
                let allocation = Allocation::from_owners(n, &owners)?;
                return finish(market, allocation, best_welfare, Algorithm::BruteForce);
            }
            pos -= 1;
            let bit = 1u64 << pos;
            masks[digits[pos]] &= !bit;
            if digits[pos] < n {
                digits[pos] += 1;
                masks[digits[pos]] |= bit;
                break;
            }
            digits[pos] = 0;
            masks[0] |= bit;
        }
        let welfare = score(&masks);
        if welfare > best_welfare {
            best_welfare = welfare;
            best_digits.clone_from(&digits);
        }
    }
}

fn require_class(
    market: &Market,
    solver: &'static str,
    expected: &'static str,
    accept: impl Fn(&Valuation) -> bool,
) -> Result<()> {
    match market.valuations().iter().position(|v| !accept(v)) {
        Some(agent) => Err(Error::WrongClass {
            agent,
            solver,
            expected,
            found: market.valuation(agent).class_name(),
        }),
        None => Ok(()),
    }
}

/// Unit-demand markets: maximum-weight matching between agents and items,
/// where edge `(i, j)` weighs agent `i`'s value for item `j`.
pub fn unit_demand(market: &Market) -> Result<WdResult> {
    require_class(market, "unit-demand matching", "unit-demand", |v| {
        matches!(v, Valuation::UnitDemand(_))
    })?;
    let rows: Vec<Vec<u64>> = market
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::UnitDemand(values) => values.clone(),
            _ => unreachable!(),
        })
        .collect();
    let matching = max_weight_bipartite_matching(&WeightedBipartiteGraph::from_matrix(&rows)?);
    let mut bundles = vec![ItemSet::EMPTY; market.agent_count()];
    for &(agent, item) in &matching.pairs {
        bundles[agent] = ItemSet::singleton(item);
    }
    let allocation = Allocation::new(market.item_count(), bundles)?;
    finish(
        market,
        allocation,
        matching.total_weight,
        Algorithm::UnitDemandMatching,
    )
}

fn is_pair_class(v: &Valuation) -> bool {
    match v {
        Valuation::UnitDemand(_) | Valuation::MultiMindedPair { .. } => true,
        Valuation::SingleMinded { bundle, .. } => (1..=2).contains(&bundle.len()),
        _ => false,
    }
}

/// What taking a graph edge means for the allocation.
#[derive(Debug, Clone, Copy)]
enum EdgeOwner {
    /// Both endpoints are items; the agent receives the pair.
    Pair { agent: usize, items: ItemSet },
    /// One endpoint is the agent's private vertex, the other an item.
    Single { agent: usize, item: usize },
}

/// Markets where every agent is unit-demand, single-minded on at most two
/// items, or multi-minded over a pair.
///
/// Builds a graph on the items plus one private vertex per agent that can
/// take a single item. A pair wanted by several agents becomes one item-item
/// edge carrying the highest pair value, attributed to the lowest-index agent
/// among those bidding it. The maximum-weight matching of that graph is an
/// optimal allocation.
pub fn pair_market(market: &Market, budgets: &Budgets) -> Result<WdResult> {
    require_class(
        market,
        "pair matching",
        "unit-demand, single-minded on at most 2 items, or pair",
        is_pair_class,
    )?;
    let m = market.item_count();

    let mut pair_edges: BTreeMap<(usize, usize), (u64, usize)> = BTreeMap::new();
    let mut bid_pair = |a: usize, b: usize, weight: u64, agent: usize| {
        let key = (a.min(b), a.max(b));
        match pair_edges.get(&key) {
            Some(&(current, _)) if current >= weight => {}
            _ => {
                pair_edges.insert(key, (weight, agent));
            }
        }
    };
    let mut single_edges: Vec<(usize, usize, u64)> = Vec::new();
    for (agent, v) in market.valuations().iter().enumerate() {
        match v {
            Valuation::UnitDemand(values) => {
                for (item, &w) in values.iter().enumerate() {
                    single_edges.push((agent, item, w));
                }
            }
            Valuation::SingleMinded { bundle, value } => {
                let items = bundle.to_vec();
                if let [a, b] = items[..] {
                    bid_pair(a, b, *value, agent);
                } else {
                    single_edges.push((agent, items[0], *value));
                }
            }
            Valuation::MultiMindedPair {
                a,
                b,
                value_a,
                value_b,
                value_ab,
            } => {
                bid_pair(*a, *b, *value_ab, agent);
                single_edges.push((agent, *a, *value_a));
                single_edges.push((agent, *b, *value_b));
            }
            _ => unreachable!(),
        }
    }

    // Vertex m + t is the private vertex of the t-th agent owning single
    // edges, in agent order.
    let mut private_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    for &(agent, _, _) in &single_edges {
        let next = m + private_vertex.len();
        private_vertex.entry(agent).or_insert(next);
    }
    let vertex_count = m + private_vertex.len();

    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut owners: Vec<EdgeOwner> = Vec::new();
    for (&(a, b), &(weight, agent)) in &pair_edges {
        if weight > 0 {
            edges.push((a, b, weight));
            owners.push(EdgeOwner::Pair {
                agent,
                items: ItemSet::from_iter([a, b]),
            });
        }
    }
    for &(agent, item, weight) in &single_edges {
        if weight > 0 {
            edges.push((private_vertex[&agent], item, weight));
            owners.push(EdgeOwner::Single { agent, item });
        }
    }

    let (chosen, weight) =
        max_weight_general_matching(vertex_count, &edges, budgets.matching_states)?;
    let mut bundles = vec![ItemSet::EMPTY; market.agent_count()];
    for e in chosen {
        match owners[e] {
            EdgeOwner::Pair { agent, items } => bundles[agent] = bundles[agent].union(items),
            EdgeOwner::Single { agent, item } => bundles[agent].insert(item),
        }
    }
    let allocation = Allocation::new(m, bundles)?;
    finish(market, allocation, weight, Algorithm::PairMatching)
}

fn dp_work(market: &Market) -> u128 {
    3u128
        .checked_pow(market.item_count() as u32)
        .and_then(|w| w.checked_mul(market.agent_count() as u128))
        .unwrap_or(u128::MAX)
}

/// Dynamic programming over (agent prefix, item subset):
/// `OPT(i, S) = max_{T subset S} v_i(T) + OPT(i - 1, S \ T)`.
///
/// Ties go to the numerically smallest bitmask `T`.
pub fn few_items_dp(market: &Market, budgets: &Budgets) -> Result<WdResult> {
    check_no_items_overflow(market, budgets.dp_max_items, "dynamic-programming item")?;
    ensure_budget("dynamic-programming", dp_work(market), budgets.dp_work)?;
    let m = market.item_count();
    let size = 1usize << m;

    let mut opt = vec![0u64; size];
    let mut choices: Vec<Vec<u64>> = Vec::with_capacity(market.agent_count());
    for valuation in market.valuations() {
        let table = value_table(valuation, m);
        let mut next = vec![0u64; size];
        let mut choice = vec![0u64; size];
        for s in 0..size as u64 {
            let mut best = opt[s as usize];
            let mut best_t = 0u64;
            // Ascending submasks of s, skipping T = 0 (already the start).
            let mut t = s & s.wrapping_neg();
            while t != 0 {
                let candidate = table[t as usize] + opt[(s & !t) as usize];
                if candidate > best {
                    best = candidate;
                    best_t = t;
                }
                t = (t | !s).wrapping_add(1) & s;
            }
            next[s as usize] = best;
            choice[s as usize] = best_t;
        }
        opt = next;
        choices.push(choice);
    }

    let mut remaining = ItemSet::full(m).bits();
    let mut bundles = vec![ItemSet::EMPTY; market.agent_count()];
    for agent in (0..market.agent_count()).rev() {
        let t = choices[agent][remaining as usize];
        bundles[agent] = ItemSet::from_bits(t);
        remaining &= !t;
    }
    let allocation = Allocation::new(m, bundles)?;
    finish(market, allocation, opt[size - 1], Algorithm::FewItemsDp)
}

/// Whether `valuation` satisfies `v(X) = max_{X' subset X, |X'| <= k} v(X')`
/// for every bundle, by exhaustive check.
pub fn is_k_demand(valuation: &Valuation, item_count: usize, k: usize) -> Result<bool> {
    if valuation.demand_bound(item_count) <= k {
        return Ok(true);
    }
    ensure_budget("k-demand check item", item_count as u128, 20)?;
    let size = 1usize << item_count;
    // best[X] = max over subsets of X with at most k items.
    let mut best = vec![0u64; size];
    for bits in 0..size {
        let bundle = ItemSet::from_bits(bits as u64);
        let value = valuation.value(bundle);
        best[bits] = if bundle.len() <= k {
            value
        } else {
            bundle
                .iter()
                .map(|j| best[bits & !(1 << j)])
                .max()
                .unwrap_or(0)
        };
        if best[bits] != value {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Work estimate for [`few_agents_enum`]: (candidate item sets, hyperedges
/// per candidate set).
fn few_agents_shape(market: &Market, k: usize) -> (u128, u128) {
    let n = market.agent_count();
    let m = market.item_count();
    let target = k.saturating_mul(n);
    if m >= target {
        (binomial(m, target), binomial(target, k) * n as u128)
    } else {
        (1, (count_up_to(m, k) - 1) * n as u128)
    }
}

fn few_agents_fits(market: &Market, k: usize, budgets: &Budgets) -> bool {
    let (sets, edges) = few_agents_shape(market, k);
    edges <= budgets.packing_edges as u128
        && sets.saturating_mul(edges) <= budgets.enumeration_work
}

/// Markets with few agents and k-demand valuations.
///
/// At most `k * n` items are ever appreciated, so it suffices to try every
/// `(k * n)`-subset `L` of the items. For each, a hypergraph on `L` plus the
/// agents gets one hyperedge `T + {i}` per k-subset `T` of `L` and agent `i`,
/// weighted `v_i(T)`; its maximum-weight packing is the best allocation of
/// `L`. With fewer than `k * n` items the whole item set is the only
/// candidate and hyperedges range over all nonempty subsets of size at most
/// `k`.
///
/// Ties go to the first optimal `L` in lexicographic order, then to the
/// packing tie-break.
pub fn few_agents_enum(market: &Market, k: usize, budgets: &Budgets) -> Result<WdResult> {
    if k == 0 {
        return Err(Error::InvalidInstance("k must be positive".into()));
    }
    let n = market.agent_count();
    let m = market.item_count();
    for (agent, valuation) in market.valuations().iter().enumerate() {
        if !is_k_demand(valuation, m, k)? {
            return Err(Error::NotKDemand { agent, k });
        }
    }
    let (sets, edges_per_set) = few_agents_shape(market, k);
    ensure_budget(
        "set packing edge",
        edges_per_set,
        budgets.packing_edges as u128,
    )?;
    ensure_budget(
        "few-agents enumeration",
        sets.saturating_mul(edges_per_set),
        budgets.enumeration_work,
    )?;

    let target = k * n;
    let all = ItemSet::full(m);
    let candidates: Box<dyn Iterator<Item = ItemSet>> = if m >= target {
        Box::new(combinations(all, target))
    } else {
        Box::new(std::iter::once(all))
    };

    let mut best: Option<(u64, Vec<ItemSet>)> = None;
    for pool in candidates {
        let items = pool.to_vec();
        let position = |j: usize| items.iter().position(|&x| x == j).expect("item in pool");
        let bundles: Vec<ItemSet> = if m >= target {
            combinations(pool, k).collect()
        } else {
            subsets_up_to(pool, k).skip(1).collect()
        };

        let mut graph = WeightedHypergraph::new(items.len() + n);
        let mut meaning = Vec::new();
        for (agent, valuation) in market.valuations().iter().enumerate() {
            for &bundle in &bundles {
                let mut vertices: Vec<usize> = bundle.iter().map(position).collect();
                vertices.push(items.len() + agent);
                graph.add_edge(vertices, valuation.value(bundle))?;
                meaning.push((agent, bundle));
            }
        }
        let packing = max_weight_set_packing(&graph, budgets.packing_edges)?;
        if best
            .as_ref()
            .is_none_or(|(weight, _)| packing.total_weight > *weight)
        {
            let mut allocated = vec![ItemSet::EMPTY; n];
            for &e in &packing.edges {
                let (agent, bundle) = meaning[e];
                allocated[agent] = bundle;
            }
            best = Some((packing.total_weight, allocated));
        }
    }
    let (welfare, bundles) = best.expect("at least one candidate item set");
    let allocation = Allocation::new(m, bundles)?;
    finish(market, allocation, welfare, Algorithm::FewAgentsEnum)
}

/// Runs one specific solver. `FewAgentsEnum` uses the market's
/// [`Market::demand_bound`] (at least 1) as `k`.
pub fn solve_with(market: &Market, algorithm: Algorithm, budgets: &Budgets) -> Result<WdResult> {
    match algorithm {
        Algorithm::UnitDemandMatching => unit_demand(market),
        Algorithm::PairMatching => pair_market(market, budgets),
        Algorithm::FewItemsDp => few_items_dp(market, budgets),
        Algorithm::FewAgentsEnum => few_agents_enum(market, market.demand_bound().max(1), budgets),
        Algorithm::BruteForce => brute_force(market, budgets),
    }
}

/// Picks the first applicable solver in the order unit-demand matching, pair
/// matching, few-items DP, few-agents enumeration, brute force.
pub fn dispatch(market: &Market, budgets: &Budgets) -> Result<WdResult> {
    let valuations = market.valuations();
    if valuations.iter().all(|v| matches!(v, Valuation::UnitDemand(_))) {
        return unit_demand(market);
    }
    if valuations.iter().all(is_pair_class) {
        match pair_market(market, budgets) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => return other,
        }
    }
    if dp_fits(market, budgets) {
        return few_items_dp(market, budgets);
    }
    let k = market.demand_bound().max(1);
    if few_agents_fits(market, k, budgets) {
        return few_agents_enum(market, k, budgets);
    }
    if brute_force_fits(market, budgets) {
        return brute_force(market, budgets);
    }
    Err(Error::NoApplicableAlgorithm)
}

fn dp_fits(market: &Market, budgets: &Budgets) -> bool {
    market.item_count() <= budgets.dp_max_items && dp_work(market) <= budgets.dp_work
}

fn brute_force_fits(market: &Market, budgets: &Budgets) -> bool {
    (market.agent_count() as u128 + 1)
        .checked_pow(market.item_count() as u32)
        .is_some_and(|a| a <= budgets.brute_force_assignments)
}

/// Whether [`dispatch`] has a solver it can run within `budgets`, without
/// running it. Pair-class markets count as solvable; their matching state
/// budget can still be exceeded at run time.
pub fn has_applicable_algorithm(market: &Market, budgets: &Budgets) -> bool {
    let valuations = market.valuations();
    valuations.iter().all(is_pair_class)
        || dp_fits(market, budgets)
        || few_agents_fits(market, market.demand_bound().max(1), budgets)
        || brute_force_fits(market, budgets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn budgets() -> Budgets {
        Budgets::default()
    }

    fn ud(rows: &[&[u64]]) -> Market {
        let m = rows[0].len();
        Market::new(m, rows.iter().map(|r| Valuation::UnitDemand(r.to_vec())).collect()).unwrap()
    }

    fn sm(bundle: &[usize], value: u64) -> Valuation {
        Valuation::SingleMinded {
            bundle: set(bundle),
            value,
        }
    }

    fn no_we_market() -> Market {
        Market::new(2, vec![sm(&[0, 1], 3), Valuation::UnitDemand(vec![2, 2])]).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force(&ud(&[&[7, 1]]), &budgets()).unwrap();
        assert_eq!(r.welfare, 7);
        assert_eq!(r.allocation.bundle(0), set(&[0]));
        assert_eq!(r.allocation.unallocated(), set(&[1]));

        assert_eq!(brute_force(&ud(&[&[5, 0], &[0, 5]]), &budgets()).unwrap().welfare, 10);
        assert_eq!(brute_force(&no_we_market(), &budgets()).unwrap().welfare, 3);
    }

    #[test]
    fn brute_force_budget() {
        let m = Market::new(12, vec![Valuation::Additive(vec![1; 12]); 5]).unwrap();
        assert!(matches!(
            brute_force(&m, &budgets()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn unit_demand_examples() {
        let r = unit_demand(&ud(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(r.welfare, 4);
        assert_eq!(r.allocation.bundles(), &[set(&[0]), set(&[1])]);
        assert_eq!(unit_demand(&ud(&[&[3]])).unwrap().welfare, 3);
        let zero = unit_demand(&ud(&[&[0, 0], &[0, 0]])).unwrap();
        assert_eq!(zero.welfare, 0);
        assert_eq!(zero.allocation.unallocated(), set(&[0, 1]));
        assert!(matches!(
            unit_demand(&no_we_market()),
            Err(Error::WrongClass { agent: 0, .. })
        ));
    }

    #[test]
    fn pair_market_examples() {
        let conflict = Market::new(3, vec![sm(&[0, 1], 3), sm(&[1, 2], 3)]).unwrap();
        assert_eq!(pair_market(&conflict, &budgets()).unwrap().welfare, 3);

        let disjoint = Market::new(4, vec![sm(&[0, 1], 3), sm(&[2, 3], 4)]).unwrap();
        assert_eq!(pair_market(&disjoint, &budgets()).unwrap().welfare, 7);

        let mixed = Market::new(
            2,
            vec![Valuation::pair(0, 1, 2, 2, 3), Valuation::UnitDemand(vec![0, 2])],
        )
        .unwrap();
        let r = pair_market(&mixed, &budgets()).unwrap();
        assert_eq!(r.welfare, 4);
        assert_eq!(r.allocation.bundles(), &[set(&[0]), set(&[1])]);
    }

    #[test]
    fn pair_edge_goes_to_lowest_agent_on_ties() {
        let m = Market::new(2, vec![sm(&[0, 1], 5), sm(&[0, 1], 5)]).unwrap();
        let r = pair_market(&m, &budgets()).unwrap();
        assert_eq!(r.allocation.bundles(), &[set(&[0, 1]), ItemSet::EMPTY]);
        let m = Market::new(2, vec![sm(&[0, 1], 4), sm(&[0, 1], 5)]).unwrap();
        let r = pair_market(&m, &budgets()).unwrap();
        assert_eq!(r.allocation.bundles(), &[ItemSet::EMPTY, set(&[0, 1])]);
    }

    #[test]
    fn pair_market_rejects_other_classes() {
        let m = Market::new(3, vec![sm(&[0, 1, 2], 3)]).unwrap();
        assert!(matches!(
            pair_market(&m, &budgets()),
            Err(Error::WrongClass { .. })
        ));
    }

    #[test]
    fn dp_examples() {
        let one = Market::new(3, vec![Valuation::Additive(vec![1, 2, 3])]).unwrap();
        let r = few_items_dp(&one, &budgets()).unwrap();
        assert_eq!(r.welfare, 6);
        let zero = Market::new(3, vec![Valuation::Additive(vec![0; 3]); 2]).unwrap();
        assert_eq!(few_items_dp(&zero, &budgets()).unwrap().welfare, 0);
        assert_eq!(few_items_dp(&no_we_market(), &budgets()).unwrap().welfare, 3);
        let big = Market::new(15, vec![Valuation::Additive(vec![1; 15])]).unwrap();
        assert!(few_items_dp(&big, &budgets()).is_err());
    }

    #[test]
    fn few_agents_examples() {
        let m = ud(&[&[2, 1, 0], &[1, 2, 0]]);
        assert_eq!(few_agents_enum(&m, 1, &budgets()).unwrap().welfare, 4);

        let table = Valuation::KDemandTable {
            k: 2,
            entries: [(set(&[0]), 2), (set(&[1, 2]), 5), (set(&[0, 3]), 4)]
                .into_iter()
                .collect(),
        };
        let single = Market::new(4, vec![table]).unwrap();
        let r = few_agents_enum(&single, 2, &budgets()).unwrap();
        assert_eq!(r.welfare, 5);
        assert!(r.allocation.bundle(0).len() <= 2);
    }

    #[test]
    fn few_agents_rejects_non_k_demand() {
        let m = Market::new(3, vec![Valuation::Additive(vec![1, 1, 1])]).unwrap();
        assert!(matches!(
            few_agents_enum(&m, 2, &budgets()),
            Err(Error::NotKDemand { agent: 0, k: 2 })
        ));
        // Budget-additive with a budget reached by any two items is 2-demand
        // even though three items carry value.
        let ba = Valuation::BudgetAdditive {
            values: vec![3, 3, 3],
            budget: 5,
        };
        assert!(is_k_demand(&ba, 3, 2).unwrap());
        assert!(!is_k_demand(&ba, 3, 1).unwrap());
        let m = Market::new(3, vec![ba]).unwrap();
        assert_eq!(few_agents_enum(&m, 2, &budgets()).unwrap().welfare, 5);
    }

    #[test]
    fn dispatch_rules() {
        assert_eq!(
            dispatch(&ud(&[&[1, 2]]), &budgets()).unwrap().algorithm,
            Algorithm::UnitDemandMatching
        );
        let sm2 = Market::new(3, vec![sm(&[0, 1], 3), sm(&[1, 2], 2)]).unwrap();
        assert_eq!(dispatch(&sm2, &budgets()).unwrap().algorithm, Algorithm::PairMatching);
        let ba = Valuation::BudgetAdditive {
            values: vec![1, 2, 3, 1, 2, 3, 2, 2, 2],
            budget: 6,
        };
        let identical = Market::new(9, vec![ba; 3]).unwrap();
        assert_eq!(dispatch(&identical, &budgets()).unwrap().algorithm, Algorithm::FewItemsDp);
    }

    #[test]
    fn dispatch_falls_back_to_enumeration() {
        // 20 items rule out the DP; one 2-demand agent fits the enumeration.
        let mut values = vec![0u64; 20];
        values[3] = 4;
        values[17] = 6;
        let m = Market::new(20, vec![Valuation::Xos { rows: vec![values] }]).unwrap();
        let r = dispatch(&m, &budgets()).unwrap();
        assert_eq!(r.algorithm, Algorithm::FewAgentsEnum);
        assert_eq!(r.welfare, 10);
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
        }
        assert!("simplex".parse::<Algorithm>().is_err());
    }
}
