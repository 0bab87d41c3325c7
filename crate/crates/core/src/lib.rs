//! Exact Walrasian equilibria for combinatorial markets with k-demand
//! valuations.
//!
//! The crate is organised around the two halves of the equilibrium problem:
//!
//! * [`wd`] finds a welfare-maximising allocation, using a class-specific
//!   algorithm where one applies (bipartite matching for unit-demand agents,
//!   graph matching for agents that care about at most a pair of items,
//!   subset dynamic programming for few items, hypergraph packing for few
//!   agents) and exhaustive enumeration otherwise.
//! * [`pricing`] decides whether that allocation can be supported by item
//!   prices. Prices are exact rationals; feasibility is decided by an
//!   exact simplex, a shortest-path solver for unit-demand markets, and a
//!   Fourier-Motzkin oracle used to cross-check both.
//!
//! [`reductions`] turns 3-dimensional matching and 3-partition instances into
//! markets, and [`format`] / [`cli`] provide the text instance format and the
//! `kdemand` command-line tool.

pub mod budget;
pub mod bundle;
pub mod cli;
pub mod error;
pub mod format;
pub mod market;
pub mod matching;
pub mod pricing;
pub mod reductions;
pub mod wd;

pub use budget::Budgets;
pub use bundle::ItemSet;
pub use error::{Error, Result};
pub use market::{Allocation, Market, Pricing, Valuation, Value, Violation};
pub use pricing::{solve_walrasian, verify_we, EquilibriumResult, WeVerdict};
pub use wd::{Algorithm, WdResult};
