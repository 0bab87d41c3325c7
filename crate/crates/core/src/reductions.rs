//! Hardness reductions as instance generators, and seeded random markets.
//!
//! Random draws use ChaCha8 seeded through `seed_from_u64`, with uniform
//! integers taken by rejection sampling from `next_u64`; the pair is
//! identified in instance files by [`PRNG_TAG`].

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{combinations, count_up_to, subsets_up_to, ItemSet};
use crate::error::{ensure_budget, Error, Result};
use crate::market::{Market, Valuation};

pub const PRNG_TAG: &str = "chacha8-v1";

/// Deterministic random source behind every generator.
pub struct Prng(ChaCha8Rng);

impl Prng {
    pub fn new(seed: u64) -> Prng {
        Prng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Largest multiple of n that fits; draws at or above it are redrawn.
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.0.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Uniform in `[lo, hi]`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        if hi - lo == u64::MAX {
            return self.0.next_u64();
        }
        lo + self.below(hi - lo + 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `size` distinct items out of `item_count`.
    pub fn bundle(&mut self, item_count: usize, size: usize) -> ItemSet {
        let mut items: Vec<usize> = (0..item_count).collect();
        self.shuffle(&mut items);
        items[..size].iter().copied().collect()
    }
}

/// 3-dimensional matching where every element is in at most three triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDm3Instance {
    q: usize,
    triples: Vec<[usize; 3]>,
}

impl ThreeDm3Instance {
    /// Rejects indices outside `[0, q)`, elements in more than three
    /// triples, and pairs of triples sharing more than one element.
    pub fn new(q: usize, triples: Vec<[usize; 3]>) -> Result<ThreeDm3Instance> {
        if q == 0 {
            return Err(Error::InvalidInstance("q must be positive".into()));
        }
        let mut counts = vec![[0usize; 3]; q];
        for (t, triple) in triples.iter().enumerate() {
            for (dim, &e) in triple.iter().enumerate() {
                if e >= q {
                    return Err(Error::InvalidInstance(format!(
                        "triple {} has element {} outside [1, {q}]",
                        t + 1,
                        e + 1
                    )));
                }
                counts[e][dim] += 1;
                if counts[e][dim] > 3 {
                    return Err(Error::InvalidInstance(format!(
                        "element {}{} is in more than three triples",
                        ["x", "y", "z"][dim],
                        e + 1
                    )));
                }
            }
            for (u, other) in triples[..t].iter().enumerate() {
                let shared = (0..3).filter(|&d| other[d] == triple[d]).count();
                if shared > 1 {
                    return Err(Error::InvalidInstance(format!(
                        "triples {} and {} share {shared} elements",
                        u + 1,
                        t + 1
                    )));
                }
            }
        }
        Ok(ThreeDm3Instance { q, triples })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThreeDmReduction {
    Market(Market),
    /// `x_element` is in no triple, so no perfect matching exists.
    TriviallyUnsatisfiable { element: usize },
}

/// One agent per `x`, one item per `y` (index `y`) and `z` (index `q + z`).
/// Agent `x` gets an XOS valuation with a row per triple containing it, in
/// input order, valuing that triple's two items at 1.
///
/// Optimal welfare is `2q` exactly when a perfect matching exists.
pub fn from_3dm3(instance: &ThreeDm3Instance) -> Result<ThreeDmReduction> {
    let q = instance.q;
    let mut rows: Vec<Vec<Vec<u64>>> = vec![Vec::new(); q];
    for &[x, y, z] in &instance.triples {
        let mut row = vec![0u64; 2 * q];
        row[y] = 1;
        row[q + z] = 1;
        rows[x].push(row);
    }
    if let Some(element) = rows.iter().position(Vec::is_empty) {
        return Ok(ThreeDmReduction::TriviallyUnsatisfiable { element });
    }
    let valuations = rows.into_iter().map(|rows| Valuation::Xos { rows }).collect();
    Ok(ThreeDmReduction::Market(Market::new(2 * q, valuations)?))
}

/// `3n` positive integers to be split into `n` triples of equal sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePartitionInstance {
    values: Vec<u64>,
    n: usize,
    strict: bool,
}

impl ThreePartitionInstance {
    /// Requires `3n` positive values summing to a multiple of `n`; with
    /// `strict`, also `B/4 < a_i < B/2`.
    pub fn new(values: Vec<u64>, n: usize, strict: bool) -> Result<ThreePartitionInstance> {
        if n == 0 || values.len() != 3 * n {
            return Err(Error::InvalidInstance(format!(
                "{} values for n = {n}, expected {}",
                values.len(),
                3 * n
            )));
        }
        if let Some(pos) = values.iter().position(|&a| a == 0) {
            return Err(Error::InvalidInstance(format!("value {} is zero", pos + 1)));
        }
        let sum = values
            .iter()
            .try_fold(0u64, |acc, &a| acc.checked_add(a))
            .filter(|&s| s <= crate::market::MAX_VALUE)
            .ok_or_else(|| Error::InvalidInstance("values too large".into()))?;
        if sum % n as u64 != 0 {
            return Err(Error::InvalidInstance(format!(
                "sum {sum} is not divisible by n = {n}"
            )));
        }
        let target = sum / n as u64;
        if strict {
            if let Some(pos) = values
                .iter()
                .position(|&a| 4 * a <= target || 2 * a >= target)
            {
                return Err(Error::InvalidInstance(format!(
                    "value {} = {} is not strictly between B/4 and B/2 for B = {target}",
                    pos + 1,
                    values[pos]
                )));
            }
        }
        Ok(ThreePartitionInstance { values, n, strict })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// `B = sum / n`.
    pub fn target(&self) -> u64 {
        self.values.iter().sum::<u64>() / self.n as u64
    }
}

/// `n` identical agents over `3n` items, each valuing a bundle of at most
/// three items at `min(B, sum of its values)`, as a 3-demand table.
///
/// Optimal welfare is `n * B` exactly when a 3-partition exists.
pub fn from_3partition(instance: &ThreePartitionInstance, table_budget: u128) -> Result<Market> {
    let m = instance.values.len();
    ensure_budget("3-demand table entry", count_up_to(m, 3) - 1, table_budget)?;
    let target = instance.target();
    let entries: BTreeMap<ItemSet, u64> = subsets_up_to(ItemSet::full(m), 3)
        .skip(1)
        .map(|t| {
            let sum: u64 = t.iter().map(|j| instance.values[j]).sum();
            (t, sum.min(target))
        })
        .collect();
    let table = Valuation::KDemandTable { k: 3, entries };
    Market::new(m, vec![table; instance.n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketClass {
    UnitDemand,
    Additive,
    BudgetAdditive,
    /// Target bundles of 1 to `k` items.
    SingleMinded,
    MultiMindedPair,
    /// Each agent unit-demand, single-minded on 1 or 2 items, or a pair.
    PairMixed,
    /// Monotone tables over bundles of at most `k` items.
    KDemandTable,
    /// `k` additive rows.
    Xos,
}

impl MarketClass {
    pub const ALL: [MarketClass; 8] = [
        MarketClass::UnitDemand,
        MarketClass::Additive,
        MarketClass::BudgetAdditive,
        MarketClass::SingleMinded,
        MarketClass::MultiMindedPair,
        MarketClass::PairMixed,
        MarketClass::KDemandTable,
        MarketClass::Xos,
    ];
}

fn random_valuation(
    rng: &mut Prng,
    class: MarketClass,
    m: usize,
    bound: u64,
    k: usize,
) -> Valuation {
    let vector = |rng: &mut Prng| (0..m).map(|_| rng.range(0, bound)).collect::<Vec<u64>>();
    match class {
        MarketClass::UnitDemand => Valuation::UnitDemand(vector(rng)),
        MarketClass::Additive => Valuation::Additive(vector(rng)),
        MarketClass::BudgetAdditive => {
            let values = vector(rng);
            let total: u64 = values.iter().sum();
            let budget = rng.range(0, total);
            Valuation::BudgetAdditive { values, budget }
        }
        MarketClass::SingleMinded => {
            let size = rng.range(1, k.min(m) as u64) as usize;
            let bundle = rng.bundle(m, size);
            Valuation::SingleMinded {
                bundle,
                value: rng.range(0, bound),
            }
        }
        MarketClass::MultiMindedPair => {
            let pair = rng.bundle(m, 2).to_vec();
            let value_a = rng.range(0, bound);
            let value_b = rng.range(0, bound);
            let value_ab = rng.range(value_a.max(value_b), bound);
            Valuation::pair(pair[0], pair[1], value_a, value_b, value_ab)
        }
        MarketClass::PairMixed => {
            let options: &[MarketClass] = if m >= 2 {
                &[
                    MarketClass::UnitDemand,
                    MarketClass::SingleMinded,
                    MarketClass::MultiMindedPair,
                ]
            } else {
                &[MarketClass::UnitDemand, MarketClass::SingleMinded]
            };
            let pick = options[rng.below(options.len() as u64) as usize];
            random_valuation(rng, pick, m, bound, 2)
        }
        MarketClass::KDemandTable => {
            // Draw bundles by size so each value can respect its subsets;
            // keep only entries that add value over them.
            let mut values: BTreeMap<ItemSet, u64> = BTreeMap::new();
            let mut entries = BTreeMap::new();
            for size in 1..=k.min(m) {
                for bundle in combinations(ItemSet::full(m), size) {
                    let floor = bundle
                        .iter()
                        .map(|j| {
                            let mut sub = bundle;
                            sub.remove(j);
                            values.get(&sub).copied().unwrap_or(0)
                        })
                        .max()
                        .unwrap_or(0);
                    let value = rng.range(floor, bound.max(floor));
                    values.insert(bundle, value);
                    if value > floor {
                        entries.insert(bundle, value);
                    }
                }
            }
            Valuation::KDemandTable { k, entries }
        }
        MarketClass::Xos => Valuation::Xos {
            rows: (0..k.max(1)).map(|_| vector(rng)).collect(),
        },
    }
}

/// A seeded random market; the same arguments always give the same market.
///
/// `k` is the maximum target size for single-minded agents, the table size
/// for k-demand tables and the row count for XOS; other classes ignore it.
pub fn random_market(
    class: MarketClass,
    agents: usize,
    items: usize,
    value_bound: u64,
    k: usize,
    seed: u64,
) -> Result<Market> {
    let needs_k = matches!(
        class,
        MarketClass::SingleMinded | MarketClass::KDemandTable | MarketClass::Xos
    );
    if agents == 0 || items == 0 || items > crate::bundle::MAX_ITEMS {
        return Err(Error::InvalidInstance(format!(
            "cannot generate a market with {agents} agents and {items} items"
        )));
    }
    if needs_k && k == 0 {
        return Err(Error::InvalidInstance(format!("{class:?} needs k >= 1")));
    }
    if class == MarketClass::MultiMindedPair && items < 2 {
        return Err(Error::InvalidInstance("pair agents need 2 items".into()));
    }
    if value_bound > crate::market::MAX_VALUE / items as u64 {
        return Err(Error::InvalidInstance(format!(
            "value bound {value_bound} too large"
        )));
    }
    let mut rng = Prng::new(seed);
    let valuations = (0..agents)
        .map(|_| random_valuation(&mut rng, class, items, value_bound, k))
        .collect();
    Market::new(items, valuations)
}

/// A seeded 3DM(3) instance with up to `triple_count` triples. With
/// `planted`, the first `q` triples drawn form a perfect matching. Triples
/// that would break the instance invariants are skipped, so fewer may be
/// returned.
pub fn random_3dm3(
    q: usize,
    triple_count: usize,
    planted: bool,
    seed: u64,
) -> Result<ThreeDm3Instance> {
    if q == 0 {
        return Err(Error::InvalidInstance("q must be positive".into()));
    }
    let mut rng = Prng::new(seed);
    let mut triples: Vec<[usize; 3]> = Vec::new();
    let mut counts = vec![[0usize; 3]; q];
    let fits = |triples: &[[usize; 3]], counts: &[[usize; 3]], t: [usize; 3]| {
        (0..3).all(|d| counts[t[d]][d] < 3)
            && triples
                .iter()
                .all(|o| (0..3).filter(|&d| o[d] == t[d]).count() <= 1)
    };
    if planted {
        let mut ys: Vec<usize> = (0..q).collect();
        let mut zs: Vec<usize> = (0..q).collect();
        rng.shuffle(&mut ys);
        rng.shuffle(&mut zs);
        for x in 0..q.min(triple_count) {
            let t = [x, ys[x], zs[x]];
            for d in 0..3 {
                counts[t[d]][d] += 1;
            }
            triples.push(t);
        }
    }
    let attempts = 32 * triple_count;
    for _ in 0..attempts {
        if triples.len() >= triple_count {
            break;
        }
        let t = [
            rng.below(q as u64) as usize,
            rng.below(q as u64) as usize,
            rng.below(q as u64) as usize,
        ];
        if fits(&triples, &counts, t) {
            for d in 0..3 {
                counts[t[d]][d] += 1;
            }
            triples.push(t);
        }
    }
    rng.shuffle(&mut triples);
    ThreeDm3Instance::new(q, triples)
}

/// A seeded 3-partition instance with `3n` values in `[1, max_value]`.
///
/// Unplanted values are uniform, then the first values below `max_value`
/// are raised by one until the sum is divisible by `n`. Planted instances
/// draw a target and build `n` triples hitting it exactly.
pub fn random_3partition(
    n: usize,
    max_value: u64,
    planted: bool,
    seed: u64,
) -> Result<ThreePartitionInstance> {
    if n == 0 || max_value == 0 {
        return Err(Error::InvalidInstance(
            "n and the value bound must be positive".into(),
        ));
    }
    let mut rng = Prng::new(seed);
    let mut values: Vec<u64>;
    if planted {
        let target = rng.range(3, 3 * max_value);
        values = Vec::with_capacity(3 * n);
        for _ in 0..n {
            loop {
                let a = rng.range(1, max_value);
                let b = rng.range(1, max_value);
                if let Some(c) = target.checked_sub(a + b).filter(|&c| (1..=max_value).contains(&c)) {
                    values.extend([a, b, c]);
                    break;
                }
            }
        }
        rng.shuffle(&mut values);
    } else {
        values = (0..3 * n).map(|_| rng.range(1, max_value)).collect();
        let mut pos = 0;
        while values.iter().sum::<u64>() % n as u64 != 0 {
            // Not every value can be at the maximum: that sum is divisible.
            while values[pos] == max_value {
                pos += 1;
            }
            values[pos] += 1;
        }
    }
    ThreePartitionInstance::new(values, n, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budgets;
    use crate::wd::brute_force;

    fn welfare(m: &Market) -> u64 {
        brute_force(m, &Budgets::default()).unwrap().welfare
    }

    fn reduce(q: usize, triples: &[[usize; 3]]) -> Market {
        match from_3dm3(&ThreeDm3Instance::new(q, triples.to_vec()).unwrap()).unwrap() {
            ThreeDmReduction::Market(m) => m,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn three_dm_examples() {
        let one = reduce(1, &[[0, 0, 0]]);
        assert_eq!((one.agent_count(), one.item_count()), (1, 2));
        assert_eq!(welfare(&one), 2);
        assert_eq!(welfare(&reduce(2, &[[0, 0, 0], [1, 1, 1]])), 4);
        assert_eq!(welfare(&reduce(2, &[[0, 0, 0], [1, 0, 1]])), 3);
    }

    #[test]
    fn three_dm_validation() {
        assert!(ThreeDm3Instance::new(2, vec![[0, 0, 0], [0, 0, 1]]).is_err());
        assert!(ThreeDm3Instance::new(2, vec![[0, 0, 2]]).is_err());
        let crowded = vec![[0, 0, 0], [0, 1, 1], [0, 2, 2], [0, 3, 3]];
        assert!(ThreeDm3Instance::new(4, crowded).is_err());
        let lonely = ThreeDm3Instance::new(2, vec![[0, 0, 0]]).unwrap();
        assert_eq!(
            from_3dm3(&lonely).unwrap(),
            ThreeDmReduction::TriviallyUnsatisfiable { element: 1 }
        );
    }

    #[test]
    fn three_partition_examples() {
        let b = Budgets::default();
        let yes = ThreePartitionInstance::new(vec![1, 2, 3, 1, 2, 3], 2, false).unwrap();
        assert_eq!(yes.target(), 6);
        assert_eq!(welfare(&from_3partition(&yes, b.bundles).unwrap()), 12);
        let no = ThreePartitionInstance::new(vec![1, 1, 1, 1, 1, 5], 2, false).unwrap();
        assert!(welfare(&from_3partition(&no, b.bundles).unwrap()) < 10);
        let single = ThreePartitionInstance::new(vec![1, 2, 3], 1, false).unwrap();
        assert_eq!(welfare(&from_3partition(&single, b.bundles).unwrap()), 6);
    }

    #[test]
    fn three_partition_validation() {
        assert!(ThreePartitionInstance::new(vec![1, 2, 4], 1, false).is_ok());
        assert!(ThreePartitionInstance::new(vec![1, 2, 4, 1, 1, 2], 2, false).is_err());
        assert!(ThreePartitionInstance::new(vec![0, 3, 3], 1, false).is_err());
        assert!(ThreePartitionInstance::new(vec![1, 2, 3], 1, true).is_err());
        assert!(ThreePartitionInstance::new(vec![7, 7, 8], 1, true).is_ok());
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = Prng::new(0);
        for n in 1..50 {
            assert!(rng.below(n) < n);
        }
        assert_eq!(Prng::new(9).below(1 << 40), Prng::new(9).below(1 << 40));
    }

    #[test]
    fn generators_are_deterministic() {
        for class in MarketClass::ALL {
            let a = random_market(class, 3, 4, 10, 2, 1).unwrap();
            let b = random_market(class, 3, 4, 10, 2, 1).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(random_3dm3(3, 6, true, 5).unwrap(), random_3dm3(3, 6, true, 5).unwrap());
        assert_eq!(
            random_3partition(3, 8, false, 5).unwrap(),
            random_3partition(3, 8, false, 5).unwrap()
        );
    }

    #[test]
    fn planted_partition_is_satisfiable_by_construction() {
        for seed in 0..20 {
            let inst = random_3partition(2, 6, true, seed).unwrap();
            let m = from_3partition(&inst, Budgets::default().bundles).unwrap();
            assert_eq!(welfare(&m), 2 * inst.target());
        }
    }
}
