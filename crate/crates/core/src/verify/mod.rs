//! Brute-force checks of stability, choice-function properties, budget
//! bounds and manipulability, sized for small markets.

mod bounds;
mod properties;
mod search;
mod stability;
mod strategy;

use std::fmt;
use std::str::FromStr;

pub use bounds::{bound_for, check_bounds, BoundReport, BoundRow};
pub use properties::{check_all_properties, check_property, Property, PropertyReport, PropertyWitness};
pub use search::{
    assignment_count, exists_stable_exhaustive, search_stable, search_stable_in_range, SearchOutcome, SearchStats,
};
pub use stability::{
    check_hm_stable, check_stable, find_blocking, implied_budgets, is_blocking, Blocking, HmReport, HmViolation,
    StabilityReport,
};
pub use strategy::{probe_all_doctors, probe_strategyproof, reports_for, Misreport};

use crate::choice::DEFAULT_ORACLE_CAP;
use crate::error::{Error, Result};
use crate::model::{Market, Matching, Rat};

/// Size limits for the exhaustive checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest input for the exact knapsack choice.
    pub oracle: usize,
    /// Largest per-hospital pool scanned for blocking coalitions.
    pub blocking_pool: usize,
    /// Largest `|X_h|` for property enumeration.
    pub property: usize,
    /// Largest number of candidate matchings for existence search.
    pub enumeration: u128,
    /// Largest `|X_d|` for misreport enumeration.
    pub misreport: usize,
    /// Largest per-hospital pool for the fixed-point stability scan.
    pub hm_pool: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            oracle: DEFAULT_ORACLE_CAP,
            blocking_pool: 20,
            property: 12,
            enumeration: 10_000_000,
            misreport: 5,
            hm_pool: 20,
        }
    }
}

/// Which budgets a matching is checked against.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BudgetProfile {
    /// `B'_h = max{B_h, w_h(X')}`.
    #[default]
    Implied,
    /// The market's own budgets.
    Given,
    /// Each budget multiplied by a factor.
    Scaled(Rat),
    Explicit(Vec<Rat>),
}

impl BudgetProfile {
    pub fn resolve(&self, m: &Market, x: &Matching) -> Result<Vec<Rat>> {
        match self {
            BudgetProfile::Implied => Ok(implied_budgets(m, x)),
            BudgetProfile::Given => Ok(m.budgets()),
            BudgetProfile::Scaled(f) => {
                if !f.is_positive() {
                    return Err(Error::InvalidParameters(format!("budget factor {f} must be positive")));
                }
                Ok(m.budgets().into_iter().map(|b| b * *f).collect())
            }
            BudgetProfile::Explicit(v) => {
                if v.len() != m.num_hospitals() {
                    return Err(Error::InvalidParameters(format!(
                        "{} budgets for {} hospitals",
                        v.len(),
                        m.num_hospitals()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

impl fmt::Display for BudgetProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetProfile::Implied => f.write_str("implied"),
            BudgetProfile::Given => f.write_str("given"),
            BudgetProfile::Scaled(r) => write!(f, "x{r}"),
            BudgetProfile::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for BudgetProfile {
    type Err = Error;

    /// `implied`, `given`, `x<factor>`, or a comma-separated list of budgets.
    fn from_str(s: &str) -> Result<BudgetProfile> {
        let s = s.trim();
        match s {
            "implied" => Ok(BudgetProfile::Implied),
            "given" => Ok(BudgetProfile::Given),
            _ => {
                let bad = |_| Error::InvalidParameters(format!("bad budget profile {s:?}"));
                if let Some(f) = s.strip_prefix('x') {
                    return Ok(BudgetProfile::Scaled(f.parse().map_err(bad)?));
                }
                let v = s.split(',').map(|p| p.trim().parse::<Rat>()).collect::<Result<Vec<_>, _>>();
                Ok(BudgetProfile::Explicit(v.map_err(bad)?))
            }
        }
    }
}
