//! Markets, valuation classes, allocations and prices.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::bundle::{count_up_to, subsets_up_to, ItemSet, MAX_ITEMS};
use crate::error::{ensure_budget, Error, Result};

/// Exact rational used for prices and utilities.
pub type Value = BigRational;

/// Largest value the market accepts for a single item, bundle or budget.
///
/// Keeps every welfare sum comfortably inside `u64`.
pub const MAX_VALUE: u64 = 1_000_000_000_000;

/// A valuation function over the items of a market.
///
/// All values are nonnegative integers. Evaluation of the empty bundle is 0
/// for every variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// `v(X) = max_{j in X} values[j]`.
    UnitDemand(Vec<u64>),
    /// `v(X) = sum_{j in X} values[j]`.
    Additive(Vec<u64>),
    /// `v(X) = min(budget, sum_{j in X} values[j])`.
    BudgetAdditive { values: Vec<u64>, budget: u64 },
    /// `v(X) = value` if `bundle` is a subset of `X`, else 0.
    SingleMinded { bundle: ItemSet, value: u64 },
    /// Positive value only through `{a}`, `{b}` and `{a, b}`.
    MultiMindedPair {
        a: usize,
        b: usize,
        value_a: u64,
        value_b: u64,
        value_ab: u64,
    },
    /// Explicit values for bundles of size at most `k`.
    ///
    /// An unlisted bundle of size at most `k` is worth the best listed bundle
    /// it contains (0 if none), and any larger bundle is worth its best
    /// subset of size at most `k`. Both collapse to: the best listed entry
    /// contained in the bundle.
    KDemandTable {
        k: usize,
        entries: BTreeMap<ItemSet, u64>,
    },
    /// `v(X) = max_r sum_{j in X} rows[r][j]`.
    Xos { rows: Vec<Vec<u64>> },
}

impl Valuation {
    /// Normalises the pair so that `a < b`.
    pub fn pair(a: usize, b: usize, value_a: u64, value_b: u64, value_ab: u64) -> Valuation {
        if a <= b {
            Valuation::MultiMindedPair {
                a,
                b,
                value_a,
                value_b,
                value_ab,
            }
        } else {
            Valuation::MultiMindedPair {
                a: b,
                b: a,
                value_a: value_b,
                value_b: value_a,
                value_ab,
            }
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            Valuation::UnitDemand(_) => "unit-demand",
            Valuation::Additive(_) => "additive",
            Valuation::BudgetAdditive { .. } => "budget-additive",
            Valuation::SingleMinded { .. } => "single-minded",
            Valuation::MultiMindedPair { .. } => "pair",
            Valuation::KDemandTable { .. } => "k-demand",
            Valuation::Xos { .. } => "xos",
        }
    }

    /// Value of `bundle`, which must lie inside the market's item range.
    ///
    /// This is the unchecked hot path used by the solvers; see
    /// [`Valuation::eval`] for the checked form.
    pub fn value(&self, bundle: ItemSet) -> u64 {
        match self {
            Valuation::UnitDemand(values) => {
                bundle.iter().map(|j| values[j]).max().unwrap_or(0)
            }
            Valuation::Additive(values) => bundle.iter().map(|j| values[j]).sum(),
            Valuation::BudgetAdditive { values, budget } => {
                let total: u64 = bundle.iter().map(|j| values[j]).sum();
                total.min(*budget)
            }
            Valuation::SingleMinded { bundle: wanted, value } => {
                if wanted.is_subset(bundle) {
                    *value
                } else {
                    0
                }
            }
            Valuation::MultiMindedPair {
                a,
                b,
                value_a,
                value_b,
                value_ab,
            } => match (bundle.contains(*a), bundle.contains(*b)) {
                (true, true) => *value_ab,
                (true, false) => *value_a,
                (false, true) => *value_b,
                (false, false) => 0,
            },
            Valuation::KDemandTable { entries, .. } => entries
                .iter()
                .filter(|(key, _)| key.is_subset(bundle))
                .map(|(_, &v)| v)
                .max()
                .unwrap_or(0),
            Valuation::Xos { rows } => rows
                .iter()
                .map(|row| bundle.iter().map(|j| row[j]).sum::<u64>())
                .max()
                .unwrap_or(0),
        }
    }

    /// Checked evaluation: every item of `bundle` must be below `item_count`.
    pub fn eval(&self, item_count: usize, bundle: ItemSet) -> Result<u64> {
        check_bundle(item_count, bundle)?;
        Ok(self.value(bundle))
    }

    /// `eval(X) - p(X)`, exact.
    pub fn utility(&self, bundle: ItemSet, pricing: &Pricing) -> Result<Value> {
        let value = self.eval(pricing.len(), bundle)?;
        Ok(BigRational::from_integer(BigInt::from(value)) - pricing.bundle_price(bundle))
    }

    /// A `k` for which this valuation is guaranteed to be k-demand.
    ///
    /// Derived from the class: the value of any bundle is realised by its
    /// intersection with the relevant items (the support of the best XOS row,
    /// the nonzero items of an additive valuation, ...), which has at most
    /// this many elements. May be 0 for a valuation that is identically 0.
    pub fn demand_bound(&self, item_count: usize) -> usize {
        let support = |values: &[u64]| values.iter().filter(|&&v| v > 0).count();
        match self {
            Valuation::UnitDemand(values) => usize::from(values.iter().any(|&v| v > 0)),
            Valuation::Additive(values) => support(values),
            Valuation::BudgetAdditive { values, budget } => {
                if *budget == 0 {
                    0
                } else {
                    support(values)
                }
            }
            Valuation::SingleMinded { bundle, value } => {
                if *value == 0 {
                    0
                } else {
                    bundle.len()
                }
            }
            Valuation::MultiMindedPair { .. } => 2,
            Valuation::KDemandTable { k, entries } => {
                if entries.values().all(|&v| v == 0) {
                    0
                } else {
                    *k
                }
            }
            Valuation::Xos { rows } => rows.iter().map(|row| support(row)).max().unwrap_or(0),
        }
        .min(item_count)
    }

    /// Bundles that can matter for this agent's demand at nonnegative prices:
    /// every bundle outside this list is worth no more than some listed
    /// bundle it contains. Always includes the empty bundle. Sorted by size,
    /// then lexicographically, without duplicates.
    pub fn relevant_bundles(&self, item_count: usize, budget: u128) -> Result<Vec<ItemSet>> {
        let support_of = |values: &[u64]| -> ItemSet {
            values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(j, _)| j)
                .collect()
        };
        let mut bundles: Vec<ItemSet> = match self {
            Valuation::UnitDemand(_) => std::iter::once(ItemSet::EMPTY)
                .chain((0..item_count).map(ItemSet::singleton))
                .collect(),
            Valuation::Additive(values) | Valuation::BudgetAdditive { values, .. } => {
                let support = support_of(values);
                ensure_budget("bundle", 1u128 << support.len(), budget)?;
                support.subsets().collect()
            }
            Valuation::SingleMinded { bundle, .. } => vec![ItemSet::EMPTY, *bundle],
            Valuation::MultiMindedPair { a, b, .. } => vec![
                ItemSet::EMPTY,
                ItemSet::singleton(*a),
                ItemSet::singleton(*b),
                ItemSet::from_iter([*a, *b]),
            ],
            Valuation::KDemandTable { entries, .. } => std::iter::once(ItemSet::EMPTY)
                .chain(entries.keys().copied())
                .collect(),
            Valuation::Xos { rows } => {
                let mut out = vec![ItemSet::EMPTY];
                let mut total: u128 = 0;
                for row in rows {
                    let support = support_of(row);
                    total += 1u128 << support.len();
                    ensure_budget("bundle", total, budget)?;
                    out.extend(support.subsets());
                }
                out
            }
        };
        bundles.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        bundles.dedup();
        Ok(bundles)
    }

    fn item_vectors(&self) -> Vec<&Vec<u64>> {
        match self {
            Valuation::UnitDemand(v) | Valuation::Additive(v) => vec![v],
            Valuation::BudgetAdditive { values, .. } => vec![values],
            Valuation::Xos { rows } => rows.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// Every violated invariant of this valuation.
    fn violations(&self, agent: usize, item_count: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let check_item = |item: usize, out: &mut Vec<Violation>| {
            if item >= item_count {
                out.push(Violation::ItemOutOfRange { agent, item });
            }
        };
        let check_value = |value: u64, out: &mut Vec<Violation>| {
            if value > MAX_VALUE {
                out.push(Violation::ValueTooLarge { agent, value });
            }
        };

        for vector in self.item_vectors() {
            if vector.len() != item_count {
                out.push(Violation::WrongLength {
                    agent,
                    expected: item_count,
                    found: vector.len(),
                });
            }
            for &v in vector.iter() {
                check_value(v, &mut out);
            }
        }

        match self {
            Valuation::BudgetAdditive { budget, .. } => check_value(*budget, &mut out),
            Valuation::SingleMinded { bundle, value } => {
                check_value(*value, &mut out);
                if bundle.is_empty() {
                    out.push(Violation::EmptyBundle { agent });
                }
                if let Some(max) = bundle.max_item() {
                    check_item(max, &mut out);
                }
            }
            Valuation::MultiMindedPair {
                a,
                b,
                value_a,
                value_b,
                value_ab,
            } => {
                check_item(*a, &mut out);
                check_item(*b, &mut out);
                for v in [value_a, value_b, value_ab] {
                    check_value(*v, &mut out);
                }
                if a == b {
                    out.push(Violation::PairSameItem { agent, item: *a });
                }
                if *value_ab < (*value_a).max(*value_b) {
                    out.push(Violation::PairNotMonotone { agent });
                }
            }
            Valuation::KDemandTable { k, entries } => {
                if *k == 0 {
                    out.push(Violation::ZeroK { agent });
                }
                for (&bundle, &value) in entries {
                    check_value(value, &mut out);
                    if let Some(max) = bundle.max_item() {
                        check_item(max, &mut out);
                    }
                    if bundle.is_empty() || bundle.len() > *k {
                        out.push(Violation::TableKeySize {
                            agent,
                            bundle,
                            k: *k,
                        });
                    }
                    // The entry may not undercut what its listed subsets
                    // already guarantee.
                    let dominating = entries
                        .iter()
                        .filter(|(sub, _)| **sub != bundle && sub.is_subset(bundle))
                        .max_by_key(|(_, &v)| v);
                    if let Some((&subset, &subset_value)) = dominating {
                        if subset_value > value {
                            out.push(Violation::TableNotMonotone {
                                agent,
                                bundle,
                                value,
                                subset,
                                subset_value,
                            });
                        }
                    }
                }
            }
            _ => {}
        }
        out
    }
}

fn check_bundle(item_count: usize, bundle: ItemSet) -> Result<()> {
    match bundle.max_item() {
        Some(item) if item >= item_count => Err(Error::ItemOutOfRange { item, item_count }),
        _ => Ok(()),
    }
}

/// A broken market invariant, reported by [`Market::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    NoItems,
    TooManyItems { item_count: usize },
    ItemOutOfRange { agent: usize, item: usize },
    WrongLength { agent: usize, expected: usize, found: usize },
    ValueTooLarge { agent: usize, value: u64 },
    EmptyBundle { agent: usize },
    PairSameItem { agent: usize, item: usize },
    PairNotMonotone { agent: usize },
    ZeroK { agent: usize },
    TableKeySize { agent: usize, bundle: ItemSet, k: usize },
    TableNotMonotone {
        agent: usize,
        bundle: ItemSet,
        value: u64,
        subset: ItemSet,
        subset_value: u64,
    },
}

impl Violation {
    pub fn agent(&self) -> Option<usize> {
        match self {
            Violation::NoAgents | Violation::NoItems | Violation::TooManyItems { .. } => None,
            Violation::ItemOutOfRange { agent, .. }
            | Violation::WrongLength { agent, .. }
            | Violation::ValueTooLarge { agent, .. }
            | Violation::EmptyBundle { agent }
            | Violation::PairSameItem { agent, .. }
            | Violation::PairNotMonotone { agent }
            | Violation::ZeroK { agent }
            | Violation::TableKeySize { agent, .. }
            | Violation::TableNotMonotone { agent, .. } => Some(*agent),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "market has no agents"),
            Violation::NoItems => write!(f, "market has no items"),
            Violation::TooManyItems { item_count } => {
                write!(f, "{item_count} items exceeds the limit of {MAX_ITEMS}")
            }
            Violation::ItemOutOfRange { agent, item } => {
                write!(f, "agent {agent}: item {item} out of range")
            }
            Violation::WrongLength {
                agent,
                expected,
                found,
            } => write!(f, "agent {agent}: expected {expected} item values, found {found}"),
            Violation::ValueTooLarge { agent, value } => {
                write!(f, "agent {agent}: value {value} exceeds {MAX_VALUE}")
            }
            Violation::EmptyBundle { agent } => {
                write!(f, "agent {agent}: single-minded bundle is empty")
            }
            Violation::PairSameItem { agent, item } => {
                write!(f, "agent {agent}: pair uses item {item} twice")
            }
            Violation::PairNotMonotone { agent } => {
                write!(f, "agent {agent}: pair value is below a single-item value")
            }
            Violation::ZeroK { agent } => write!(f, "agent {agent}: k must be positive"),
            Violation::TableKeySize { agent, bundle, k } => {
                write!(f, "agent {agent}: bundle {bundle} size outside [1, {k}]")
            }
            Violation::TableNotMonotone {
                agent,
                bundle,
                value,
                subset,
                subset_value,
            } => write!(
                f,
                "agent {agent}: bundle {bundle} has value {value}, below its subset {subset} with value {subset_value}"
            ),
        }
    }
}

/// Agents with valuations over a finite item set. Agent `i` owns
/// `valuations[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    item_count: usize,
    valuations: Vec<Valuation>,
}

impl Market {
    /// Builds and validates a market.
    pub fn new(item_count: usize, valuations: Vec<Valuation>) -> Result<Market> {
        let market = Market {
            item_count,
            valuations,
        };
        market.validate().map_err(Error::InvalidMarket)?;
        Ok(market)
    }

    /// Builds a market without checking its invariants. Solvers assume a
    /// validated market; this exists for inspecting broken inputs.
    pub fn new_unchecked(item_count: usize, valuations: Vec<Valuation>) -> Market {
        Market {
            item_count,
            valuations,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.valuations.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.item_count)
    }

    /// Checks every market invariant and returns all violations.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.valuations.is_empty() {
            out.push(Violation::NoAgents);
        }
        if self.item_count == 0 {
            out.push(Violation::NoItems);
        }
        if self.item_count > MAX_ITEMS {
            out.push(Violation::TooManyItems {
                item_count: self.item_count,
            });
            return Err(out);
        }
        for (agent, valuation) in self.valuations.iter().enumerate() {
            out.extend(valuation.violations(agent, self.item_count));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn eval(&self, agent: usize, bundle: ItemSet) -> Result<u64> {
        self.valuations[agent].eval(self.item_count, bundle)
    }

    /// Largest [`Valuation::demand_bound`] over the agents.
    pub fn demand_bound(&self) -> usize {
        self.valuations
            .iter()
            .map(|v| v.demand_bound(self.item_count))
            .max()
            .unwrap_or(0)
    }

    /// `SW(S) = sum_i v_i(S_i)`.
    pub fn social_welfare(&self, allocation: &Allocation) -> Result<u64> {
        self.check_allocation(allocation)?;
        Ok(self
            .valuations
            .iter()
            .zip(allocation.bundles())
            .map(|(v, &bundle)| v.value(bundle))
            .sum())
    }

    pub fn check_allocation(&self, allocation: &Allocation) -> Result<()> {
        if allocation.item_count() != self.item_count
            || allocation.agent_count() != self.agent_count()
        {
            return Err(Error::InvalidAllocation(format!(
                "allocation covers {} agents and {} items, market has {} and {}",
                allocation.agent_count(),
                allocation.item_count(),
                self.agent_count(),
                self.item_count
            )));
        }
        Ok(())
    }

    pub fn check_pricing(&self, pricing: &Pricing) -> Result<()> {
        if pricing.len() != self.item_count {
            return Err(Error::InvalidPricing(format!(
                "{} prices for {} items",
                pricing.len(),
                self.item_count
            )));
        }
        Ok(())
    }
}

/// Every bundle of size at most `size_cap` that maximises utility among
/// bundles of size at most `size_cap`, in size-then-lexicographic order.
///
/// For a k-demand valuation `size_cap >= k` makes this the exact demand
/// correspondence; for other valuations pass `size_cap = m`.
pub fn demand_correspondence(
    valuation: &Valuation,
    pricing: &Pricing,
    size_cap: usize,
    budget: u128,
) -> Result<Vec<ItemSet>> {
    let item_count = pricing.len();
    ensure_budget("bundle", count_up_to(item_count, size_cap), budget)?;
    let mut best: Option<Value> = None;
    let mut demanded = Vec::new();
    for bundle in subsets_up_to(ItemSet::full(item_count), size_cap) {
        let utility = valuation.utility(bundle, pricing)?;
        match &best {
            Some(b) if utility < *b => {}
            Some(b) if utility == *b => demanded.push(bundle),
            _ => {
                best = Some(utility);
                demanded.clear();
                demanded.push(bundle);
            }
        }
    }
    Ok(demanded)
}

/// A partition of the items into one bundle per agent plus the unallocated
/// remainder `S_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    item_count: usize,
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(item_count: usize, bundles: Vec<ItemSet>) -> Result<Allocation> {
        let mut seen = ItemSet::EMPTY;
        for (agent, &bundle) in bundles.iter().enumerate() {
            check_bundle(item_count, bundle)
                .map_err(|e| Error::InvalidAllocation(format!("agent {agent}: {e}")))?;
            if !bundle.is_disjoint(seen) {
                return Err(Error::InvalidAllocation(format!(
                    "agent {agent} shares items {} with another agent",
                    bundle.intersection(seen)
                )));
            }
            seen = seen.union(bundle);
        }
        Ok(Allocation {
            item_count,
            bundles,
        })
    }

    /// Every item unallocated.
    pub fn empty(agent_count: usize, item_count: usize) -> Allocation {
        Allocation {
            item_count,
            bundles: vec![ItemSet::EMPTY; agent_count],
        }
    }

    /// From an item-to-owner vector (`None` for unallocated).
    pub fn from_owners(agent_count: usize, owners: &[Option<usize>]) -> Result<Allocation> {
        let mut bundles = vec![ItemSet::EMPTY; agent_count];
        for (item, owner) in owners.iter().enumerate() {
            if let Some(agent) = *owner {
                let bundle = bundles.get_mut(agent).ok_or_else(|| {
                    Error::InvalidAllocation(format!("item {item} owned by unknown agent {agent}"))
                })?;
                bundle.insert(item);
            }
        }
        Allocation::new(owners.len(), bundles)
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> ItemSet {
        self.bundles[agent]
    }

    /// `S_0`.
    pub fn unallocated(&self) -> ItemSet {
        let allocated = self
            .bundles
            .iter()
            .fold(ItemSet::EMPTY, |acc, &b| acc.union(b));
        ItemSet::full(self.item_count).difference(allocated)
    }

    pub fn owner(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(item))
    }
}

/// Nonnegative exact price per item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pricing(Vec<Value>);

impl Pricing {
    pub fn new(prices: Vec<Value>) -> Result<Pricing> {
        if let Some(j) = prices.iter().position(|p| p.is_negative()) {
            return Err(Error::InvalidPricing(format!(
                "price of item {j} is negative ({})",
                prices[j]
            )));
        }
        Ok(Pricing(prices))
    }

    pub fn zeros(item_count: usize) -> Pricing {
        Pricing(vec![Value::zero(); item_count])
    }

    pub fn from_integers(prices: &[u64]) -> Pricing {
        Pricing(
            prices
                .iter()
                .map(|&p| Value::from_integer(BigInt::from(p)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn price(&self, item: usize) -> &Value {
        &self.0[item]
    }

    pub fn prices(&self) -> &[Value] {
        &self.0
    }

    /// `p(X)`.
    pub fn bundle_price(&self, bundle: ItemSet) -> Value {
        bundle
            .iter()
            .fold(Value::zero(), |acc, j| acc + &self.0[j])
    }

    /// Every price multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Pricing {
        let factor = Value::from_integer(BigInt::from(factor));
        Pricing(self.0.iter().map(|p| p * &factor).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn q(n: i64, d: i64) -> Value {
        Value::new(BigInt::from(n), BigInt::from(d))
    }

    fn table(k: usize, entries: &[(&[usize], u64)]) -> Valuation {
        Valuation::KDemandTable {
            k,
            entries: entries.iter().map(|(b, v)| (set(b), *v)).collect(),
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Valuation::UnitDemand(vec![3, 5, 2]).eval(3, set(&[0, 2])).unwrap(), 3);
        let kd = table(2, &[(&[0], 1), (&[1], 1), (&[0, 1], 5)]);
        assert_eq!(kd.eval(3, set(&[0, 1, 2])).unwrap(), 5);
        let ba = Valuation::BudgetAdditive {
            values: vec![4, 4, 4],
            budget: 6,
        };
        assert_eq!(ba.eval(3, set(&[0, 1, 2])).unwrap(), 6);
        let xos = Valuation::Xos {
            rows: vec![vec![1, 1, 0], vec![0, 0, 3]],
        };
        assert_eq!(xos.eval(3, set(&[0, 1])).unwrap(), 2);
        assert_eq!(xos.eval(3, set(&[0, 2])).unwrap(), 3);
    }

    #[test]
    fn kdemand_table_matches_subset_enumeration() {
        // Oracle: eval(X) = max over <=k subsets X' of X of the derived value,
        // where derived(X') = max over listed bundles inside X'.
        let kd = table(2, &[(&[0], 1), (&[1], 1), (&[0, 1], 5), (&[2, 3], 4)]);
        let listed = [(set(&[0]), 1), (set(&[1]), 1), (set(&[0, 1]), 5), (set(&[2, 3]), 4)];
        for x in ItemSet::full(4).subsets() {
            let oracle = subsets_up_to(x, 2)
                .map(|sub| {
                    listed
                        .iter()
                        .filter(|(b, _)| b.is_subset(sub))
                        .map(|(_, v)| *v)
                        .max()
                        .unwrap_or(0)
                })
                .max()
                .unwrap_or(0);
            assert_eq!(kd.value(x), oracle, "bundle {x}");
        }
    }

    #[test]
    fn empty_bundle_is_zero() {
        let vals = [
            Valuation::UnitDemand(vec![3, 4]),
            Valuation::Additive(vec![3, 4]),
            Valuation::BudgetAdditive {
                values: vec![3, 4],
                budget: 5,
            },
            Valuation::SingleMinded {
                bundle: set(&[0, 1]),
                value: 9,
            },
            Valuation::pair(0, 1, 1, 2, 3),
            table(1, &[(&[1], 2)]),
            Valuation::Xos {
                rows: vec![vec![1, 2]],
            },
        ];
        for v in &vals {
            assert_eq!(v.eval(2, ItemSet::EMPTY).unwrap(), 0, "{v:?}");
        }
    }

    #[test]
    fn eval_rejects_out_of_range_items() {
        let err = Valuation::UnitDemand(vec![1, 2]).eval(2, set(&[2])).unwrap_err();
        assert!(matches!(err, Error::ItemOutOfRange { item: 2, item_count: 2 }));
    }

    #[test]
    fn utility_examples() {
        let ud = Valuation::UnitDemand(vec![3, 5]);
        let p = Pricing::from_integers(&[0, 2]);
        assert_eq!(ud.utility(set(&[1]), &p).unwrap(), q(3, 1));
        let p = Pricing::new(vec![q(7, 3), q(1, 2)]).unwrap();
        assert_eq!(ud.utility(ItemSet::EMPTY, &p).unwrap(), q(0, 1));
        let sm = Valuation::SingleMinded {
            bundle: set(&[0, 1]),
            value: 3,
        };
        assert_eq!(
            sm.utility(set(&[0, 1]), &Pricing::from_integers(&[2, 2])).unwrap(),
            q(-1, 1)
        );
    }

    #[test]
    fn demand_examples() {
        let ud = Valuation::UnitDemand(vec![3, 5]);
        assert_eq!(
            demand_correspondence(&ud, &Pricing::zeros(2), 1, 1 << 20).unwrap(),
            vec![set(&[1])]
        );
        let ud = Valuation::UnitDemand(vec![3, 3]);
        assert_eq!(
            demand_correspondence(&ud, &Pricing::from_integers(&[3, 3]), 1, 1 << 20).unwrap(),
            vec![ItemSet::EMPTY, set(&[0]), set(&[1])]
        );
        // Utilities: {} 0, {0} 1, {1} 1, {0,1} 3-2 = 1.
        let kd = table(2, &[(&[0], 2), (&[1], 2), (&[0, 1], 3)]);
        assert_eq!(
            demand_correspondence(&kd, &Pricing::from_integers(&[1, 1]), 2, 1 << 20).unwrap(),
            vec![set(&[0]), set(&[1]), set(&[0, 1])]
        );
    }

    #[test]
    fn demand_respects_budget() {
        let ud = Valuation::UnitDemand(vec![1; 30]);
        let err = demand_correspondence(&ud, &Pricing::zeros(30), 30, 1 << 20).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn social_welfare_examples() {
        let mkt = Market::new(
            2,
            vec![Valuation::Additive(vec![1, 2]), Valuation::Additive(vec![3, 1])],
        )
        .unwrap();
        assert_eq!(mkt.social_welfare(&Allocation::empty(2, 2)).unwrap(), 0);
        let s = Allocation::new(2, vec![set(&[1]), set(&[0])]).unwrap();
        assert_eq!(mkt.social_welfare(&s).unwrap(), 5);

        // Oracle: 9 owner vectors; the optimum is 5.
        let mut best = 0;
        for code in 0..9 {
            let owners = [code % 3, code / 3].map(|o| (o > 0).then(|| o - 1));
            let alloc = Allocation::from_owners(2, &owners).unwrap();
            best = best.max(mkt.social_welfare(&alloc).unwrap());
        }
        assert_eq!(best, 5);

        let one = Market::new(1, vec![Valuation::UnitDemand(vec![7])]).unwrap();
        let s = Allocation::new(1, vec![set(&[0])]).unwrap();
        assert_eq!(one.social_welfare(&s).unwrap(), 7);
    }

    #[test]
    fn validate_examples() {
        let bad = Market::new_unchecked(2, vec![table(2, &[(&[0], 5), (&[0, 1], 3)])]);
        let violations = bad.validate().unwrap_err();
        assert_eq!(
            violations,
            vec![Violation::TableNotMonotone {
                agent: 0,
                bundle: set(&[0, 1]),
                value: 3,
                subset: set(&[0]),
                subset_value: 5
            }]
        );

        let bad = Market::new_unchecked(
            2,
            vec![Valuation::MultiMindedPair {
                a: 0,
                b: 1,
                value_a: 2,
                value_b: 2,
                value_ab: 1,
            }],
        );
        assert_eq!(
            bad.validate().unwrap_err(),
            vec![Violation::PairNotMonotone { agent: 0 }]
        );

        let good = Market::new_unchecked(
            2,
            vec![Valuation::UnitDemand(vec![1, 2]), Valuation::UnitDemand(vec![0, 4])],
        );
        assert!(good.validate().is_ok());
    }

    #[test]
    fn validate_reports_every_violation() {
        let bad = Market::new_unchecked(
            2,
            vec![
                Valuation::UnitDemand(vec![1]),
                Valuation::SingleMinded {
                    bundle: ItemSet::EMPTY,
                    value: 1,
                },
                table(1, &[(&[0, 1], 2), (&[5], 1)]),
            ],
        );
        let violations = bad.validate().unwrap_err();
        let agents: Vec<_> = violations.iter().map(Violation::agent).collect();
        assert_eq!(
            agents,
            vec![Some(0), Some(1), Some(2), Some(2)],
            "{violations:?}"
        );
        assert!(Market::new_unchecked(0, vec![]).validate().unwrap_err().len() == 2);
    }

    #[test]
    fn demand_bounds() {
        assert_eq!(Valuation::UnitDemand(vec![0, 0]).demand_bound(2), 0);
        assert_eq!(Valuation::UnitDemand(vec![0, 1]).demand_bound(2), 1);
        assert_eq!(Valuation::Additive(vec![1, 0, 2]).demand_bound(3), 2);
        let xos = Valuation::Xos {
            rows: vec![vec![1, 1, 0, 0], vec![0, 1, 1, 1]],
        };
        assert_eq!(xos.demand_bound(4), 3);
    }

    #[test]
    fn pricing_rejects_negative() {
        assert!(Pricing::new(vec![q(-1, 2)]).is_err());
        let p = Pricing::new(vec![q(1, 2), q(3, 4)]).unwrap();
        assert_eq!(p.bundle_price(set(&[0, 1])), q(5, 4));
        assert_eq!(p.scaled(4).prices(), &[q(2, 1), q(3, 1)]);
    }

    #[test]
    fn allocation_rejects_overlap() {
        assert!(Allocation::new(3, vec![set(&[0, 1]), set(&[1])]).is_err());
        assert!(Allocation::new(3, vec![set(&[3])]).is_err());
        let a = Allocation::new(4, vec![set(&[0, 3]), set(&[1])]).unwrap();
        assert_eq!(a.unallocated(), set(&[2]));
        assert_eq!(a.owner(3), Some(0));
        assert_eq!(a.owner(2), None);
    }
}
