use thiserror::Error;

use crate::market::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("item {item} is out of range for a market with {item_count} items")]
    ItemOutOfRange { item: usize, item_count: usize },

    #[error("invalid market: {}", join_violations(.0))]
    InvalidMarket(Vec<Violation>),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid pricing: {0}")]
    InvalidPricing(String),

    #[error("{what} budget exceeded: needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("agent {agent} has a {found} valuation, but {solver} requires {expected}")]
    WrongClass {
        agent: usize,
        solver: &'static str,
        expected: &'static str,
        found: &'static str,
    },

    #[error("agent {agent} is not {k}-demand")]
    NotKDemand { agent: usize, k: usize },

    #[error("no exact winner-determination algorithm fits the configured budgets")]
    NoApplicableAlgorithm,

    #[error("invalid linear system: {0}")]
    InvalidSystem(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks `needed <= limit`, reporting a [`Error::BudgetExceeded`] otherwise.
pub(crate) fn ensure_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::BudgetExceeded {
            what,
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}
