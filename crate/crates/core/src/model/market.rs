use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Rat;
use crate::choice::ChoiceKind;
use crate::error::{Error, Result};

/// Index of a contract in input order. This order is the global tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContractId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DoctorId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HospitalId(pub usize);

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityKind {
    General,
    /// `f_h(x) = gamma * wage(x)`.
    Proportional(Rat),
    /// `f_h(x) = gamma` for every contract.
    Uniform(Rat),
}

impl UtilityKind {
    pub fn tag(&self) -> &'static str {
        match self {
            UtilityKind::General => "general",
            UtilityKind::Proportional(_) => "proportional",
            UtilityKind::Uniform(_) => "uniform",
        }
    }

    pub fn gamma(&self) -> Option<Rat> {
        match *self {
            UtilityKind::General => None,
            UtilityKind::Proportional(g) | UtilityKind::Uniform(g) => Some(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub id: ContractId,
    pub doctor: DoctorId,
    pub hospital: HospitalId,
    pub wage: Rat,
    pub utility: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HospitalSpec {
    pub name: String,
    pub budget: Rat,
    pub utility_kind: UtilityKind,
    /// Per-hospital choice function named in the market file, if any.
    pub mechanism: Option<ChoiceKind>,
}

/// A problem found while validating a market description.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("duplicate doctor {0:?}")]
    DuplicateDoctor(String),
    #[error("duplicate hospital {0:?}")]
    DuplicateHospital(String),
    #[error("hospital {hospital:?}: budget {budget} is not positive")]
    NonPositiveBudget { hospital: String, budget: Rat },
    #[error("hospital {hospital:?}: unknown utility kind {kind:?}")]
    UnknownUtilityKind { hospital: String, kind: String },
    #[error("hospital {hospital:?}: utility kind {kind} needs a positive gamma")]
    MissingGamma { hospital: String, kind: &'static str },
    #[error("hospital {hospital:?}: gamma given for general utilities")]
    UnexpectedGamma { hospital: String },
    #[error("hospital {hospital:?}: unknown mechanism {name:?}")]
    UnknownMechanism { hospital: String, name: String },
    #[error("contract {contract}: unknown doctor {name:?}")]
    UnknownDoctor { contract: usize, name: String },
    #[error("contract {contract}: unknown hospital {name:?}")]
    UnknownHospital { contract: usize, name: String },
    #[error("contract {contract}: wage {wage} is not positive")]
    NonPositiveWage { contract: usize, wage: Rat },
    #[error("contract {contract}: wage exceeds budget ({wage} > {budget})")]
    WageExceedsBudget { contract: usize, wage: Rat, budget: Rat },
    #[error("contract {contract}: duplicate of contract {first}")]
    DuplicateContract { contract: usize, first: usize },
    #[error("contract {contract}: utility missing")]
    MissingUtility { contract: usize },
    #[error("contract {contract}: utility {utility} is not positive")]
    NonPositiveUtility { contract: usize, utility: Rat },
    #[error("contract {contract}: utility {actual} inconsistent with {kind} utilities (expected {expected})")]
    InconsistentUtility { contract: usize, kind: &'static str, expected: Rat, actual: Rat },
    #[error("preferences given for unknown doctor {0:?}")]
    UnknownPrefDoctor(String),
    #[error("doctor {doctor:?}: preference over unknown contract {contract}")]
    PrefUnknownContract { doctor: String, contract: usize },
    #[error("doctor {doctor:?}: contract {contract} belongs to another doctor")]
    PrefForeignContract { doctor: String, contract: usize },
    #[error("doctor {doctor:?}: contract {contract} listed twice")]
    PrefDuplicate { doctor: String, contract: usize },
}

/// Serialized market description.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMarket {
    pub doctors: Vec<String>,
    pub hospitals: Vec<RawHospital>,
    pub contracts: Vec<RawContract>,
    #[serde(default)]
    pub prefs: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHospital {
    pub id: String,
    pub budget: Rat,
    #[serde(default = "general")]
    pub utility_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
}

fn general() -> String {
    "general".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawContract {
    pub doctor: String,
    pub hospital: String,
    pub wage: Rat,
    #[serde(default)]
    pub utility: Option<Rat>,
}

/// A validated market. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    doctors: Vec<String>,
    hospitals: Vec<HospitalSpec>,
    contracts: Vec<Contract>,
    prefs: Vec<Vec<ContractId>>,
    // derived views
    pref_rank: Vec<Option<usize>>,
    by_doctor: Vec<Vec<ContractId>>,
    by_hospital: Vec<Vec<ContractId>>,
    wage_bounds: Vec<Option<(Rat, Rat)>>,
}

impl Market {
    /// Validates a parsed description. Contract ids follow input order.
    pub fn validate(raw: &RawMarket) -> Result<Market> {
        let mut v = Vec::new();

        let mut doctor_idx = HashMap::new();
        for (i, name) in raw.doctors.iter().enumerate() {
            if doctor_idx.insert(name.as_str(), i).is_some() {
                v.push(Violation::DuplicateDoctor(name.clone()));
            }
        }

        let mut hospital_idx = HashMap::new();
        let mut hospitals = Vec::with_capacity(raw.hospitals.len());
        for (i, rh) in raw.hospitals.iter().enumerate() {
            if hospital_idx.insert(rh.id.as_str(), i).is_some() {
                v.push(Violation::DuplicateHospital(rh.id.clone()));
            }
            if !rh.budget.is_positive() {
                v.push(Violation::NonPositiveBudget { hospital: rh.id.clone(), budget: rh.budget });
            }
            let utility_kind = match (rh.utility_kind.as_str(), rh.gamma) {
                ("general", None) => UtilityKind::General,
                ("general", Some(_)) => {
                    v.push(Violation::UnexpectedGamma { hospital: rh.id.clone() });
                    UtilityKind::General
                }
                (k @ ("proportional" | "uniform"), g) => match g {
                    Some(g) if g.is_positive() => {
                        if k == "proportional" {
                            UtilityKind::Proportional(g)
                        } else {
                            UtilityKind::Uniform(g)
                        }
                    }
                    _ => {
                        let kind = if k == "proportional" { "proportional" } else { "uniform" };
                        v.push(Violation::MissingGamma { hospital: rh.id.clone(), kind });
                        UtilityKind::General
                    }
                },
                (other, _) => {
                    v.push(Violation::UnknownUtilityKind { hospital: rh.id.clone(), kind: other.to_string() });
                    UtilityKind::General
                }
            };
            let mechanism = match &rh.mechanism {
                None => None,
                Some(name) => match name.parse::<ChoiceKind>() {
                    Ok(k) => Some(k),
                    Err(_) => {
                        v.push(Violation::UnknownMechanism { hospital: rh.id.clone(), name: name.clone() });
                        None
                    }
                },
            };
            hospitals.push(HospitalSpec { name: rh.id.clone(), budget: rh.budget, utility_kind, mechanism });
        }

        let mut contracts = Vec::with_capacity(raw.contracts.len());
        let mut seen: HashMap<(usize, usize, Rat), usize> = HashMap::new();
        for (i, rc) in raw.contracts.iter().enumerate() {
            let d = doctor_idx.get(rc.doctor.as_str()).copied();
            let h = hospital_idx.get(rc.hospital.as_str()).copied();
            if d.is_none() {
                v.push(Violation::UnknownDoctor { contract: i, name: rc.doctor.clone() });
            }
            if h.is_none() {
                v.push(Violation::UnknownHospital { contract: i, name: rc.hospital.clone() });
            }
            if !rc.wage.is_positive() {
                v.push(Violation::NonPositiveWage { contract: i, wage: rc.wage });
            }
            let utility = match rc.utility {
                None => {
                    v.push(Violation::MissingUtility { contract: i });
                    Rat::ONE
                }
                Some(u) if !u.is_positive() => {
                    v.push(Violation::NonPositiveUtility { contract: i, utility: u });
                    u
                }
                Some(u) => u,
            };
            if let (Some(d), Some(h)) = (d, h) {
                let spec = &hospitals[h];
                if rc.wage > spec.budget {
                    v.push(Violation::WageExceedsBudget { contract: i, wage: rc.wage, budget: spec.budget });
                }
                if let Some(&first) = seen.get(&(d, h, rc.wage)) {
                    v.push(Violation::DuplicateContract { contract: i, first });
                } else {
                    seen.insert((d, h, rc.wage), i);
                }
                let expected = match spec.utility_kind {
                    UtilityKind::General => None,
                    UtilityKind::Proportional(g) if rc.wage.is_positive() => Some(g * rc.wage),
                    UtilityKind::Proportional(_) => None,
                    UtilityKind::Uniform(g) => Some(g),
                };
                if let (Some(expected), Some(actual)) = (expected, rc.utility) {
                    if expected != actual {
                        v.push(Violation::InconsistentUtility {
                            contract: i,
                            kind: spec.utility_kind.tag(),
                            expected,
                            actual,
                        });
                    }
                }
                contracts.push(Contract {
                    id: ContractId(i),
                    doctor: DoctorId(d),
                    hospital: HospitalId(h),
                    wage: rc.wage,
                    utility,
                });
            }
        }

        let mut prefs = vec![Vec::new(); raw.doctors.len()];
        for (name, list) in &raw.prefs {
            let Some(&d) = doctor_idx.get(name.as_str()) else {
                v.push(Violation::UnknownPrefDoctor(name.clone()));
                continue;
            };
            let mut listed = HashSet::new();
            for &c in list {
                let Some(rc) = raw.contracts.get(c) else {
                    v.push(Violation::PrefUnknownContract { doctor: name.clone(), contract: c });
                    continue;
                };
                if rc.doctor != *name {
                    v.push(Violation::PrefForeignContract { doctor: name.clone(), contract: c });
                    continue;
                }
                if !listed.insert(c) {
                    v.push(Violation::PrefDuplicate { doctor: name.clone(), contract: c });
                    continue;
                }
                prefs[d].push(ContractId(c));
            }
        }

        if !v.is_empty() {
            return Err(Error::InvalidMarket(v));
        }
        Ok(Market::assemble(raw.doctors.clone(), hospitals, contracts, prefs))
    }

    pub fn from_json(s: &str) -> Result<Market> {
        let raw: RawMarket = serde_json::from_str(s)?;
        Market::validate(&raw)
    }

    fn assemble(
        doctors: Vec<String>,
        hospitals: Vec<HospitalSpec>,
        contracts: Vec<Contract>,
        prefs: Vec<Vec<ContractId>>,
    ) -> Market {
        let mut by_doctor = vec![Vec::new(); doctors.len()];
        let mut by_hospital = vec![Vec::new(); hospitals.len()];
        let mut wage_bounds: Vec<Option<(Rat, Rat)>> = vec![None; hospitals.len()];
        for c in &contracts {
            by_doctor[c.doctor.0].push(c.id);
            by_hospital[c.hospital.0].push(c.id);
            let b = &mut wage_bounds[c.hospital.0];
            *b = Some(match *b {
                None => (c.wage, c.wage),
                Some((lo, hi)) => (lo.min(c.wage), hi.max(c.wage)),
            });
        }
        let mut pref_rank = vec![None; contracts.len()];
        for list in &prefs {
            for (r, c) in list.iter().enumerate() {
                pref_rank[c.0] = Some(r);
            }
        }
        Market { doctors, hospitals, contracts, prefs, pref_rank, by_doctor, by_hospital, wage_bounds }
    }

    pub fn to_raw(&self) -> RawMarket {
        RawMarket {
            doctors: self.doctors.clone(),
            hospitals: self
                .hospitals
                .iter()
                .map(|h| RawHospital {
                    id: h.name.clone(),
                    budget: h.budget,
                    utility_kind: h.utility_kind.tag().to_string(),
                    gamma: h.utility_kind.gamma(),
                    mechanism: h.mechanism.map(|k| k.to_string()),
                })
                .collect(),
            contracts: self
                .contracts
                .iter()
                .map(|c| RawContract {
                    doctor: self.doctors[c.doctor.0].clone(),
                    hospital: self.hospitals[c.hospital.0].name.clone(),
                    wage: c.wage,
                    utility: Some(c.utility),
                })
                .collect(),
            prefs: self
                .prefs
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(|(d, l)| (self.doctors[d].clone(), l.iter().map(|c| c.0).collect()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("market serializes")
    }

    /// Same market with doctor `d` reporting `ranking` instead of the true list.
    pub fn with_prefs(&self, d: DoctorId, ranking: Vec<ContractId>) -> Result<Market> {
        let mut seen = HashSet::new();
        for c in &ranking {
            let ok = self.contracts.get(c.0).is_some_and(|x| x.doctor == d);
            if !ok || !seen.insert(*c) {
                return Err(Error::InvalidParameters(format!(
                    "ranking for {} contains invalid contract {c}",
                    self.doctors[d.0]
                )));
            }
        }
        let mut prefs = self.prefs.clone();
        prefs[d.0] = ranking;
        Ok(Market::assemble(self.doctors.clone(), self.hospitals.clone(), self.contracts.clone(), prefs))
    }

    /// Same market with every budget replaced.
    pub fn with_budgets(&self, budgets: &[Rat]) -> Result<Market> {
        let mut raw = self.to_raw();
        if budgets.len() != raw.hospitals.len() {
            return Err(Error::InvalidParameters("budget profile length mismatch".into()));
        }
        for (h, b) in raw.hospitals.iter_mut().zip(budgets) {
            h.budget = *b;
        }
        Market::validate(&raw)
    }

    pub fn num_doctors(&self) -> usize {
        self.doctors.len()
    }

    pub fn num_hospitals(&self) -> usize {
        self.hospitals.len()
    }

    pub fn num_contracts(&self) -> usize {
        self.contracts.len()
    }

    pub fn doctors(&self) -> impl Iterator<Item = DoctorId> + '_ {
        (0..self.doctors.len()).map(DoctorId)
    }

    pub fn hospitals(&self) -> impl Iterator<Item = HospitalId> + '_ {
        (0..self.hospitals.len()).map(HospitalId)
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn contract(&self, x: ContractId) -> &Contract {
        &self.contracts[x.0]
    }

    pub fn wage(&self, x: ContractId) -> Rat {
        self.contracts[x.0].wage
    }

    pub fn utility(&self, x: ContractId) -> Rat {
        self.contracts[x.0].utility
    }

    pub fn doctor_name(&self, d: DoctorId) -> &str {
        &self.doctors[d.0]
    }

    pub fn hospital_name(&self, h: HospitalId) -> &str {
        &self.hospitals[h.0].name
    }

    pub fn doctor_by_name(&self, name: &str) -> Option<DoctorId> {
        self.doctors.iter().position(|n| n == name).map(DoctorId)
    }

    pub fn hospital_by_name(&self, name: &str) -> Option<HospitalId> {
        self.hospitals.iter().position(|h| h.name == name).map(HospitalId)
    }

    pub fn spec(&self, h: HospitalId) -> &HospitalSpec {
        &self.hospitals[h.0]
    }

    pub fn budget(&self, h: HospitalId) -> Rat {
        self.hospitals[h.0].budget
    }

    pub fn budgets(&self) -> Vec<Rat> {
        self.hospitals.iter().map(|h| h.budget).collect()
    }

    /// The doctor's ranking, most preferred first. Unlisted contracts are unacceptable.
    pub fn prefs(&self, d: DoctorId) -> &[ContractId] {
        &self.prefs[d.0]
    }

    /// Position of `x` in its doctor's ranking, `None` if unacceptable.
    pub fn pref_rank(&self, x: ContractId) -> Option<usize> {
        self.pref_rank[x.0]
    }

    /// True if the doctor of `x` strictly prefers `x` to `current` (`None` = unmatched).
    pub fn doctor_prefers(&self, x: ContractId, current: Option<ContractId>) -> bool {
        match (self.pref_rank(x), current) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(rx), Some(c)) => match self.pref_rank(c) {
                None => true,
                Some(rc) => rx < rc,
            },
        }
    }

    /// `X_d` in contract-id order.
    pub fn doctor_contracts(&self, d: DoctorId) -> &[ContractId] {
        &self.by_doctor[d.0]
    }

    /// `X_h` in contract-id order.
    pub fn hospital_contracts(&self, h: HospitalId) -> &[ContractId] {
        &self.by_hospital[h.0]
    }

    /// Smallest wage offered by `h`, `None` when `X_h` is empty.
    pub fn min_wage(&self, h: HospitalId) -> Option<Rat> {
        self.wage_bounds[h.0].map(|b| b.0)
    }

    /// Largest wage offered by `h`, `None` when `X_h` is empty.
    pub fn max_wage(&self, h: HospitalId) -> Option<Rat> {
        self.wage_bounds[h.0].map(|b| b.1)
    }

    pub fn total_wage<'a>(&self, xs: impl IntoIterator<Item = &'a ContractId>) -> Rat {
        xs.into_iter().map(|x| self.wage(*x)).sum()
    }

    pub fn total_utility<'a>(&self, xs: impl IntoIterator<Item = &'a ContractId>) -> Rat {
        xs.into_iter().map(|x| self.utility(*x)).sum()
    }

    /// Readable `(doctor,hospital,wage)` label.
    pub fn label(&self, x: ContractId) -> String {
        let c = self.contract(x);
        format!("({},{},{})", self.doctors[c.doctor.0], self.hospitals[c.hospital.0].name, c.wage)
    }

    /// Looks up a contract by its triple.
    pub fn find_contract(&self, doctor: &str, hospital: &str, wage: Rat) -> Option<ContractId> {
        let d = self.doctor_by_name(doctor)?;
        let h = self.hospital_by_name(hospital)?;
        self.by_doctor[d.0]
            .iter()
            .copied()
            .find(|&x| self.contracts[x.0].hospital == h && self.contracts[x.0].wage == wage)
    }
}

/// Exact total wage of the contracts in `s` that belong to `h`.
pub fn wage_total<'a>(m: &Market, s: impl IntoIterator<Item = &'a ContractId>, h: HospitalId) -> Rat {
    s.into_iter().filter(|x| m.contract(**x).hospital == h).map(|x| m.wage(*x)).sum()
}

/// Incremental construction of a [`RawMarket`], validated on `build`.
#[derive(Debug, Default, Clone)]
pub struct MarketBuilder {
    raw: RawMarket,
}

impl MarketBuilder {
    pub fn new() -> MarketBuilder {
        MarketBuilder::default()
    }

    pub fn doctor(&mut self, name: impl Into<String>) -> &mut Self {
        self.raw.doctors.push(name.into());
        self
    }

    pub fn hospital(&mut self, name: impl Into<String>, budget: Rat, kind: UtilityKind) -> &mut Self {
        self.raw.hospitals.push(RawHospital {
            id: name.into(),
            budget,
            utility_kind: kind.tag().to_string(),
            gamma: kind.gamma(),
            mechanism: None,
        });
        self
    }

    /// Adds a contract and returns its id.
    pub fn contract(&mut self, doctor: &str, hospital: &str, wage: Rat, utility: Rat) -> ContractId {
        self.raw.contracts.push(RawContract {
            doctor: doctor.to_string(),
            hospital: hospital.to_string(),
            wage,
            utility: Some(utility),
        });
        ContractId(self.raw.contracts.len() - 1)
    }

    pub fn prefs(&mut self, doctor: &str, ranking: &[ContractId]) -> &mut Self {
        self.raw.prefs.insert(doctor.to_string(), ranking.iter().map(|c| c.0).collect());
        self
    }

    pub fn raw(&self) -> &RawMarket {
        &self.raw
    }

    pub fn build(&self) -> Result<Market> {
        Market::validate(&self.raw)
    }
}
