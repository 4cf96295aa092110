//! Budgets shared by the enumeration and simulation routines.

/// Resource limits for exact enumerations and the tower simulator.
///
/// All fields are plain caps: exceeding one yields a budget error, never a
/// wrong value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Maximum number of residue states (3^K) the exhaustive oracle may visit.
    pub oracle_states: u64,
    /// Maximum cylinder depth, in digits, reachable by refinement.
    pub depth: u32,
    /// Maximum |k| accepted by the simulator's power maps.
    pub max_steps: u64,
    /// Maximum tower index for simulator verification suites.
    pub tower_max: u32,
    /// Grid size for unit-circle checks.
    pub grid: u32,
    /// Maximum number of tuples the convolution-decay enumeration may visit.
    pub tuples: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            oracle_states: 1_594_323, // 3^13
            depth: 24,
            max_steps: 10_000_000,
            tower_max: 8,
            grid: 1024,
            tuples: 1_000_000,
        }
    }
}
