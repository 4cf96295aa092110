//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The exact oracle would need to enumerate more residue states than allowed.
    #[error("oracle budget exceeded: 3^{needed_k} states needed, budget {budget} states")]
    OracleBudgetExceeded { needed_k: u32, budget: u64 },

    /// A simulator power exceeded the configured step budget.
    #[error("step budget exceeded: |k| = {requested} steps, budget {budget}")]
    StepBudgetExceeded { requested: u64, budget: u64 },

    /// Cylinder refinement would exceed the configured digit depth.
    #[error("refinement depth budget exceeded: {needed} digits, budget {budget}")]
    DepthBudgetExceeded { needed: u32, budget: u32 },

    /// A simulator suite needs a deeper tower than allowed.
    #[error("tower budget exceeded: tower {needed} needed, budget {budget}")]
    TowerBudgetExceeded { needed: u32, budget: u32 },

    /// A tuple enumeration is larger than the configured budget.
    #[error("combinatorial budget exceeded for (M={max_m}, R={max_r}): {tuples} tuples, budget {budget}")]
    CombinatorialBudgetExceeded {
        max_m: u64,
        max_r: u32,
        tuples: u64,
        budget: u64,
    },

    #[error("cannot shift empty word")]
    EmptyWordShift,

    /// A digit pattern violated its structural invariants.
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    /// A synthesized sequence index is too small to make the term positive.
    #[error("synthesized k_{{j}} would be nonpositive; increase j")]
    IncreaseJ,

    /// A level-set operand did not satisfy an operation's precondition.
    #[error("invalid level set: {0}")]
    InvalidLevelSet(String),

    /// Integer overflow in an exact computation (input out of supported range).
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// A sampled integer sequence did not stabilize into a classifiable pattern.
    #[error("sequence does not stabilize: {0}")]
    UnstableSequence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a configured budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::OracleBudgetExceeded { .. }
                | Error::StepBudgetExceeded { .. }
                | Error::DepthBudgetExceeded { .. }
                | Error::TowerBudgetExceeded { .. }
                | Error::CombinatorialBudgetExceeded { .. }
        )
    }
}
