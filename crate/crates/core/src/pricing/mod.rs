//! Walrasian pricing: linear systems over item prices, their solvers, and
//! equilibrium verification.

mod difference;
mod equilibrium;
mod fm;
mod simplex;
mod system;

pub use difference::difference_constraint_pricing;
pub use equilibrium::{
    price_allocation, solve_walrasian, verify_we, EquilibriumResult, Rejection, WeVerdict,
};
pub use fm::{fm_eliminate, fm_equivalent, fm_implies, FmVerdict};
pub use simplex::lp_feasibility;
pub use system::{
    build_pricing_system, Constraint, FeasibilityResult, LinearSystem, Origin, Relation,
};
