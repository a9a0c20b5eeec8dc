//! Two-sided matching with budget-constrained hospitals: market model,
//! hospital choice rules, deferred acceptance, stability and property checks,
//! and instance generators.

pub mod choice;
pub mod engine;
pub mod error;
pub mod instances;
pub mod model;
pub mod verify;

pub use error::{Error, Result};
