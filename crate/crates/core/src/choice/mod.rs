//! Choice functions.
//!
//! A hospital choice function maps an offered subset of `X_h` to the subset
//! the hospital keeps. Six are provided: the exact knapsack optimum and five
//! greedy rules. Every sort breaks ties by ascending contract id, so nested
//! calls see one consistent total order.

mod exact;
mod greedy;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exact::{ch_exact, knapsack_value, DEFAULT_ORACLE_CAP};
pub use greedy::{
    capped_k, ch_equal_util, ch_greedy_budget, ch_greedy_capped, ch_prop_15, ch_prop_sp, ratio_order, wage_order,
    RankedContract,
};

use crate::error::{Error, Result};
use crate::model::{ContractId, DoctorId, HospitalId, Market, UtilityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChoiceKind {
    /// Utility-maximizing subset within the budget (knapsack optimum).
    Exact,
    /// Top `ceil(B_h / min wage)` contracts by utility per unit wage.
    GreedyCapped,
    /// Utility-per-wage prefix, stopping once the budget is reached.
    GreedyBudget,
    /// Ascending wages kept strictly under budget, plus the highest wage.
    PropSp,
    /// Highest wage first, then ascending wages strictly under 1.5 budgets.
    Prop15,
    /// Ascending wages within budget.
    EqualUtil,
}

impl ChoiceKind {
    pub const ALL: [ChoiceKind; 6] = [
        ChoiceKind::Exact,
        ChoiceKind::GreedyCapped,
        ChoiceKind::GreedyBudget,
        ChoiceKind::PropSp,
        ChoiceKind::Prop15,
        ChoiceKind::EqualUtil,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChoiceKind::Exact => "exact",
            ChoiceKind::GreedyCapped => "sp-greedy",
            ChoiceKind::GreedyBudget => "budget-greedy",
            ChoiceKind::PropSp => "prop-sp",
            ChoiceKind::Prop15 => "prop-15",
            ChoiceKind::EqualUtil => "equal-util",
        }
    }

    /// Whether the kind is defined for a hospital with this utility shape.
    pub fn supports(self, kind: &UtilityKind) -> bool {
        match self {
            ChoiceKind::PropSp | ChoiceKind::Prop15 => matches!(kind, UtilityKind::Proportional(_)),
            ChoiceKind::EqualUtil => matches!(kind, UtilityKind::Uniform(_)),
            _ => true,
        }
    }

    fn needs(self) -> &'static str {
        match self {
            ChoiceKind::PropSp | ChoiceKind::Prop15 => "proportional",
            ChoiceKind::EqualUtil => "uniform",
            _ => "any",
        }
    }
}

impl fmt::Display for ChoiceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChoiceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ChoiceKind> {
        ChoiceKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

impl Serialize for ChoiceKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ChoiceKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn require_kind(m: &Market, h: HospitalId, kind: ChoiceKind) -> Result<()> {
    if kind.supports(&m.spec(h).utility_kind) {
        Ok(())
    } else {
        Err(Error::IncompatibleMechanism { hospital: m.hospital_name(h).to_string(), kind, needs: kind.needs() })
    }
}

/// Doctor `d`'s most preferred acceptable contract accepted by `available`.
pub fn first_available(m: &Market, d: DoctorId, available: impl Fn(ContractId) -> bool) -> Option<ContractId> {
    m.prefs(d).iter().copied().find(|&x| available(x))
}

/// `Ch_d`: the best acceptable contract of `d` in `avail`, if any.
pub fn ch_doctor(m: &Market, d: DoctorId, avail: &BTreeSet<ContractId>) -> Option<ContractId> {
    first_available(m, d, |x| avail.contains(&x))
}

/// `Ch_D`: union of every doctor's choice.
pub fn ch_doctors(m: &Market, avail: &BTreeSet<ContractId>) -> BTreeSet<ContractId> {
    m.doctors().filter_map(|d| ch_doctor(m, d, avail)).collect()
}

/// One choice function per hospital.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    kinds: Vec<ChoiceKind>,
    oracle_cap: usize,
}

impl Mechanism {
    /// The same kind at every hospital.
    pub fn uniform(m: &Market, kind: ChoiceKind) -> Result<Mechanism> {
        Mechanism::per_hospital(m, vec![kind; m.num_hospitals()])
    }

    pub fn per_hospital(m: &Market, kinds: Vec<ChoiceKind>) -> Result<Mechanism> {
        if kinds.len() != m.num_hospitals() {
            return Err(Error::InvalidParameters(format!(
                "{} choice kinds for {} hospitals",
                kinds.len(),
                m.num_hospitals()
            )));
        }
        for h in m.hospitals() {
            require_kind(m, h, kinds[h.0])?;
        }
        Ok(Mechanism { kinds, oracle_cap: DEFAULT_ORACLE_CAP })
    }

    /// `kind` everywhere when given, otherwise each hospital's `mechanism` field.
    pub fn resolve(m: &Market, kind: Option<ChoiceKind>) -> Result<Mechanism> {
        match kind {
            Some(k) => Mechanism::uniform(m, k),
            None => {
                let kinds = m
                    .hospitals()
                    .map(|h| m.spec(h).mechanism.ok_or_else(|| Error::MissingMechanism(m.hospital_name(h).to_string())))
                    .collect::<Result<Vec<_>>>()?;
                Mechanism::per_hospital(m, kinds)
            }
        }
    }

    pub fn with_oracle_cap(mut self, cap: usize) -> Mechanism {
        self.oracle_cap = cap;
        self
    }

    pub fn oracle_cap(&self) -> usize {
        self.oracle_cap
    }

    pub fn kind(&self, h: HospitalId) -> ChoiceKind {
        self.kinds[h.0]
    }

    pub fn kinds(&self) -> &[ChoiceKind] {
        &self.kinds
    }

    /// `Ch_h(xs)` for `xs ⊆ X_h`; the result is in ascending id order.
    pub fn choose(&self, m: &Market, h: HospitalId, xs: &[ContractId]) -> Result<Vec<ContractId>> {
        choose_kind(m, h, self.kinds[h.0], xs, self.oracle_cap)
    }

    /// `Ch_H(ys)`: each hospital chooses from its share of `ys`.
    pub fn choose_all(&self, m: &Market, ys: &BTreeSet<ContractId>) -> Result<BTreeSet<ContractId>> {
        let mut per_h = vec![Vec::new(); m.num_hospitals()];
        for &y in ys {
            per_h[m.contract(y).hospital.0].push(y);
        }
        let mut out = BTreeSet::new();
        for h in m.hospitals() {
            if !per_h[h.0].is_empty() {
                out.extend(self.choose(m, h, &per_h[h.0])?);
            }
        }
        Ok(out)
    }
}

/// `Ch_h(xs)` under `kind`; the result is in ascending id order.
pub fn choose_kind(
    m: &Market,
    h: HospitalId,
    kind: ChoiceKind,
    xs: &[ContractId],
    oracle_cap: usize,
) -> Result<Vec<ContractId>> {
    match kind {
        ChoiceKind::Exact => ch_exact(m, h, xs, oracle_cap),
        ChoiceKind::GreedyCapped => Ok(ch_greedy_capped(m, h, xs)),
        ChoiceKind::GreedyBudget => Ok(ch_greedy_budget(m, h, xs)),
        ChoiceKind::PropSp => ch_prop_sp(m, h, xs),
        ChoiceKind::Prop15 => ch_prop_15(m, h, xs),
        ChoiceKind::EqualUtil => ch_equal_util(m, h, xs),
    }
}

/// `Ch_H` with an explicit kind per hospital.
pub fn ch_hospitals(m: &Market, kinds: &[ChoiceKind], ys: &BTreeSet<ContractId>) -> Result<BTreeSet<ContractId>> {
    Mechanism::per_hospital(m, kinds.to_vec())?.choose_all(m, ys)
}
