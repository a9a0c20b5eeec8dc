//! Worked examples, adversarial families and random markets.

mod families;
pub mod fixtures;
mod random;

pub use families::{gen_theorem1, gen_theorem4, theorem4_threshold};
pub use fixtures::Fixture;
pub use random::{gen_random, gen_universe, RandomParams, UtilityMode};
