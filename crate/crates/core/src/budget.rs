use crate::error::{Error, Result};

/// Environment variable that overrides the default enumeration budget.
pub const BUDGET_ENV: &str = "LINFORM_BUDGET";

/// Upper bound on inner-loop iterations for enumerations and transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(100_000_000)
    }
}

impl Budget {
    pub const fn new(limit: u64) -> Self {
        Budget(limit)
    }

    pub fn unlimited() -> Self {
        Budget(u64::MAX)
    }

    /// The default budget, overridden by `LINFORM_BUDGET` when it parses.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().replace('_', "").parse().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    pub fn limit(self) -> u64 {
        self.0
    }

    pub fn check(self, needed: u128) -> Result<()> {
        if needed > self.0 as u128 {
            Err(Error::BudgetExceeded {
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}
