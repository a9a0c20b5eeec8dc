//! Market description: contracts, doctor preferences, hospital utilities and budgets.

mod market;
mod matching;
mod rat;

pub use market::{
    wage_total, Contract, ContractId, DoctorId, HospitalId, HospitalSpec, Market, MarketBuilder, RawContract,
    RawHospital, RawMarket, UtilityKind, Violation,
};
pub use matching::{Matching, RawMatching};
pub use rat::{ParseRatError, Rat};
