//! Bundles of items as 64-bit sets.

use std::cmp::Ordering;
use std::fmt;

/// Largest number of items a market may have.
pub const MAX_ITEMS: usize = 64;

/// A set of item indices in `[0, 64)`.
///
/// Ordering is lexicographic on the ascending item list, so `{0, 2}` sorts
/// before `{1}` and `{0}` before `{0, 1}`. This is the order used for every
/// deterministic tie-break and for the canonical text format.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(item: usize) -> Self {
        debug_assert!(item < MAX_ITEMS);
        ItemSet(1 << item)
    }

    /// The set `{0, 1, ..., count - 1}`.
    pub fn full(count: usize) -> Self {
        debug_assert!(count <= MAX_ITEMS);
        if count == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << count) - 1)
        }
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1 << item) != 0
    }

    pub fn insert(&mut self, item: usize) {
        debug_assert!(item < MAX_ITEMS);
        self.0 |= 1 << item;
    }

    pub fn remove(&mut self, item: usize) {
        if item < MAX_ITEMS {
            self.0 &= !(1 << item);
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    /// Largest item in the set.
    pub fn max_item(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> Items {
        Items(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing bitmask order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.0,
            next: Some(0),
        }
    }
}

impl Ord for ItemSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for ItemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ItemSet::EMPTY;
        for item in iter {
            set.insert(item);
        }
        set
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Zero-indexed `{0,2}` notation.
impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, item) in self.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

/// Ascending iterator over the items of an [`ItemSet`].
#[derive(Clone)]
pub struct Items(u64);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let item = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

pub struct Subsets {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let current = self.next?;
        self.next = if current == self.universe {
            None
        } else {
            // Next submask in increasing order.
            Some((current.wrapping_sub(self.universe)) & self.universe)
        };
        Some(ItemSet(current))
    }
}

/// All `size`-element subsets of `universe`, in lexicographic order.
pub fn combinations(universe: ItemSet, size: usize) -> Combinations {
    let items = universe.to_vec();
    let positions = if size <= items.len() {
        Some((0..size).collect())
    } else {
        None
    };
    Combinations { items, positions }
}

pub struct Combinations {
    items: Vec<usize>,
    positions: Option<Vec<usize>>,
}

impl Iterator for Combinations {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let positions = self.positions.as_mut()?;
        let current: ItemSet = positions.iter().map(|&p| self.items[p]).collect();

        let n = self.items.len();
        let k = positions.len();
        let mut advanced = false;
        for slot in (0..k).rev() {
            if positions[slot] < n - k + slot {
                positions[slot] += 1;
                for later in slot + 1..k {
                    positions[later] = positions[later - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            self.positions = None;
        }
        Some(current)
    }
}

/// Subsets of `universe` with at most `max_size` items, ordered by size and
/// then lexicographically. The empty set comes first.
pub fn subsets_up_to(universe: ItemSet, max_size: usize) -> impl Iterator<Item = ItemSet> {
    let top = max_size.min(universe.len());
    (0..=top).flat_map(move |size| combinations(universe, size))
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at each step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of subsets of an `n`-set with at most `k` elements.
pub fn count_up_to(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).fold(0u128, |acc, j| acc.saturating_add(binomial(n, j)))
}
