use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ContractId, DoctorId, HospitalId, Market, Rat};
use crate::error::{Error, Result};

/// A set of contracts with at most one contract per doctor, plus the
/// exact total wage each hospital pays in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    contracts: Vec<ContractId>,
    by_doctor: Vec<Option<ContractId>>,
    wage_totals: Vec<Rat>,
}

/// Serialized form: sorted contract ids plus per-hospital wage totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMatching {
    pub contracts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wage_totals: Option<BTreeMap<String, Rat>>,
}

impl Matching {
    pub fn new(m: &Market, ids: impl IntoIterator<Item = ContractId>) -> Result<Matching> {
        let mut contracts: Vec<ContractId> = ids.into_iter().collect();
        contracts.sort_unstable();
        contracts.dedup();
        let mut by_doctor = vec![None; m.num_doctors()];
        let mut wage_totals = vec![Rat::ZERO; m.num_hospitals()];
        for &x in &contracts {
            if x.0 >= m.num_contracts() {
                return Err(Error::InvalidMatching(format!("unknown contract {x}")));
            }
            let c = m.contract(x);
            if let Some(prev) = by_doctor[c.doctor.0].replace(x) {
                return Err(Error::InvalidMatching(format!(
                    "doctor {} holds both {} and {}",
                    m.doctor_name(c.doctor),
                    m.label(prev),
                    m.label(x)
                )));
            }
            wage_totals[c.hospital.0] += c.wage;
        }
        Ok(Matching { contracts, by_doctor, wage_totals })
    }

    pub fn empty(m: &Market) -> Matching {
        Matching {
            contracts: Vec::new(),
            by_doctor: vec![None; m.num_doctors()],
            wage_totals: vec![Rat::ZERO; m.num_hospitals()],
        }
    }

    /// Contract ids in ascending order.
    pub fn contracts(&self) -> &[ContractId] {
        &self.contracts
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    pub fn contains(&self, x: ContractId) -> bool {
        self.contracts.binary_search(&x).is_ok()
    }

    pub fn assignment(&self, d: DoctorId) -> Option<ContractId> {
        self.by_doctor[d.0]
    }

    /// `w_h(X')`.
    pub fn wage_total(&self, h: HospitalId) -> Rat {
        self.wage_totals[h.0]
    }

    pub fn wage_totals(&self) -> &[Rat] {
        &self.wage_totals
    }

    /// `X'_h` in ascending id order.
    pub fn at_hospital(&self, m: &Market, h: HospitalId) -> Vec<ContractId> {
        self.contracts.iter().copied().filter(|&x| m.contract(x).hospital == h).collect()
    }

    pub fn to_raw(&self, m: &Market) -> RawMatching {
        RawMatching {
            contracts: self.contracts.iter().map(|c| c.0).collect(),
            wage_totals: Some(m.hospitals().map(|h| (m.hospital_name(h).to_string(), self.wage_totals[h.0])).collect()),
        }
    }

    /// Parses a serialized matching. Stated wage totals, when present, must agree.
    pub fn from_raw(m: &Market, raw: &RawMatching) -> Result<Matching> {
        let matching = Matching::new(m, raw.contracts.iter().map(|&c| ContractId(c)))?;
        if let Some(totals) = &raw.wage_totals {
            for (name, stated) in totals {
                let h = m.hospital_by_name(name).ok_or_else(|| Error::UnknownName(name.clone()))?;
                if matching.wage_total(h) != *stated {
                    return Err(Error::InvalidMatching(format!(
                        "hospital {name}: stated wage total {stated} but contracts sum to {}",
                        matching.wage_total(h)
                    )));
                }
            }
        }
        Ok(matching)
    }

    pub fn from_json(m: &Market, s: &str) -> Result<Matching> {
        Matching::from_raw(m, &serde_json::from_str(s)?)
    }

    pub fn to_json(&self, m: &Market) -> String {
        serde_json::to_string_pretty(&self.to_raw(m)).expect("matching serializes")
    }
}
