/// Work limits for every exponential enumeration in the crate.
///
/// Exceeding a limit is reported as [`crate::Error::BudgetExceeded`]; no
/// solver silently degrades to an approximation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets {
    /// Candidate bundles enumerated by demand correspondences, pricing
    /// systems and equilibrium verification.
    pub bundles: u128,
    /// Assignments `(n + 1)^m` the brute-force winner determination may visit.
    pub brute_force_assignments: u128,
    /// Edges a hypergraph may have before set packing refuses it.
    pub packing_edges: usize,
    /// Memoised states for the exhaustive general-graph matching.
    pub matching_states: usize,
    /// Largest item count the subset dynamic program accepts.
    pub dp_max_items: usize,
    /// Upper bound on `3^m * n` for the subset dynamic program.
    pub dp_work: u128,
    /// Upper bound on candidate item sets times hyperedges per set for the
    /// few-agents enumeration.
    pub enumeration_work: u128,
    /// Largest variable count accepted by Fourier-Motzkin elimination.
    pub fm_max_variables: usize,
    /// Largest intermediate constraint count during Fourier-Motzkin.
    pub fm_max_constraints: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            bundles: 1 << 20,
            brute_force_assignments: 1 << 22,
            packing_edges: 64,
            matching_states: 1 << 22,
            dp_max_items: 14,
            dp_work: 3u128.pow(14) * 16,
            enumeration_work: 1 << 22,
            fm_max_variables: 8,
            fm_max_constraints: 200_000,
        }
    }
}
