use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::choice::{choose_kind, require_kind, ChoiceKind};
use crate::error::{Error, Result};
use crate::model::{ContractId, HospitalId, Market, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    #[serde(rename = "SUB")]
    Sub,
    #[serde(rename = "IRC")]
    Irc,
    #[serde(rename = "LAD")]
    Lad,
    #[serde(rename = "COM")]
    Com,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Sub, Property::Irc, Property::Lad, Property::Com];

    pub fn name(self) -> &'static str {
        match self {
            Property::Sub => "SUB",
            Property::Irc => "IRC",
            Property::Lad => "LAD",
            Property::Com => "COM",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Property> {
        Property::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// A nested pair `smaller ⊆ larger ⊆ X_h` violating the property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyWitness {
    pub smaller: Vec<ContractId>,
    pub larger: Vec<ContractId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<PropertyWitness>,
    /// Nested pairs examined; `3^|X_h|` when the scan completes.
    pub cases_checked: u64,
}

struct Table<'a> {
    xs: &'a [ContractId],
    /// `Ch_h` of every subset, as a bitmask.
    choice: Vec<u32>,
    wage: Vec<Rat>,
    utility: Vec<Rat>,
    budget: Rat,
}

impl Table<'_> {
    fn ids(&self, mask: u32) -> Vec<ContractId> {
        (0..self.xs.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.xs[i]).collect()
    }

    /// True when the pair `small ⊆ large` satisfies the property.
    fn ok(&self, p: Property, small: u32, large: u32) -> bool {
        let (cs, cl) = (self.choice[small as usize], self.choice[large as usize]);
        match p {
            // rejected from small stays rejected in large
            Property::Sub => (small & !cs) & !(large & !cl) == 0,
            // if large's choice avoids large \ small, small chooses the same
            Property::Irc => cl & !small != 0 || cs == cl,
            Property::Lad => cs.count_ones() <= cl.count_ones(),
            Property::Com => {
                let cap = self.budget.max(self.wage[cl as usize]);
                self.wage[small as usize] > cap || self.utility[cl as usize] >= self.utility[small as usize]
            }
        }
    }
}

fn build_table<'a>(
    m: &'a Market,
    h: HospitalId,
    kind: ChoiceKind,
    xs: &'a [ContractId],
    oracle_cap: usize,
) -> Result<Table<'a>> {
    let n = xs.len();
    let full = 1usize << n;
    let mut choice = vec![0u32; full];
    let mut wage = vec![Rat::ZERO; full];
    let mut utility = vec![Rat::ZERO; full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        wage[mask] = wage[rest] + m.wage(xs[low]);
        utility[mask] = utility[rest] + m.utility(xs[low]);
    }
    let index_of = |c: ContractId| xs.iter().position(|&x| x == c).expect("choice is a subset");
    for (mask, slot) in choice.iter_mut().enumerate() {
        let sub: Vec<ContractId> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| xs[i]).collect();
        *slot = choose_kind(m, h, kind, &sub, oracle_cap)?.into_iter().fold(0, |acc, c| acc | 1 << index_of(c));
    }
    Ok(Table { xs, choice, wage, utility, budget: m.budget(h) })
}

fn scan(t: &Table<'_>, p: Property) -> PropertyReport {
    let full = 1u32 << t.xs.len();
    let mut cases = 0u64;
    for large in 0..full {
        // Submasks of `large`, from `large` itself down to the empty set.
        let mut small = large;
        loop {
            cases += 1;
            if !t.ok(p, small, large) {
                return PropertyReport {
                    property: p,
                    holds: false,
                    witness: Some(PropertyWitness { smaller: t.ids(small), larger: t.ids(large) }),
                    cases_checked: cases,
                };
            }
            if small == 0 {
                break;
            }
            small = (small - 1) & large;
        }
    }
    PropertyReport { property: p, holds: true, witness: None, cases_checked: cases }
}

fn universe(m: &Market, h: HospitalId, kind: ChoiceKind, cap: usize) -> Result<&[ContractId]> {
    require_kind(m, h, kind)?;
    let xs = m.hospital_contracts(h);
    if xs.len() > cap.min(31) {
        return Err(Error::cap("property universe", xs.len() as u128, cap.min(31) as u128));
    }
    Ok(xs)
}

/// Checks `property` over every nested pair of subsets of `X_h`.
pub fn check_property(
    m: &Market,
    h: HospitalId,
    kind: ChoiceKind,
    property: Property,
    size_cap: usize,
    oracle_cap: usize,
) -> Result<PropertyReport> {
    let xs = universe(m, h, kind, size_cap)?;
    let t = build_table(m, h, kind, xs, oracle_cap)?;
    Ok(scan(&t, property))
}

/// All four properties, sharing one table of choices.
pub fn check_all_properties(
    m: &Market,
    h: HospitalId,
    kind: ChoiceKind,
    size_cap: usize,
    oracle_cap: usize,
) -> Result<Vec<PropertyReport>> {
    let xs = universe(m, h, kind, size_cap)?;
    let t = build_table(m, h, kind, xs, oracle_cap)?;
    Ok(Property::ALL.into_iter().map(|p| scan(&t, p)).collect())
}
