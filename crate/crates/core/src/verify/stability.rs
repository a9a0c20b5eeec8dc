use serde::Serialize;

use crate::choice::{choose_kind, Mechanism};
use crate::error::{Error, Result};
use crate::model::{ContractId, HospitalId, Market, Matching, Rat};

/// A coalition `X'' ⊆ X_h` that blocks a matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Blocking {
    pub hospital: HospitalId,
    pub coalition: Vec<ContractId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    /// Budgets the matching was checked against.
    pub budgets: Vec<Rat>,
    /// `w_h(X') <= B'_h` per hospital.
    pub feasible: Vec<bool>,
    pub blocking: Option<Blocking>,
    /// `max{B_h, w_h(X')}` per hospital.
    pub implied_budget: Vec<Rat>,
    /// `w_h(X') / B_h` per hospital.
    pub violation_ratio: Vec<Rat>,
}

impl StabilityReport {
    pub fn is_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }

    pub fn is_stable(&self) -> bool {
        self.is_feasible() && self.blocking.is_none()
    }

    pub fn max_violation_ratio(&self) -> Rat {
        self.violation_ratio.iter().copied().fold(Rat::ZERO, Rat::max)
    }
}

pub fn implied_budgets(m: &Market, x: &Matching) -> Vec<Rat> {
    m.hospitals().map(|h| m.budget(h).max(x.wage_total(h))).collect()
}

/// Replays the three blocking conditions from scratch.
pub fn is_blocking(m: &Market, x: &Matching, h: HospitalId, coalition: &[ContractId], budget: Rat) -> bool {
    let mut seen = vec![false; m.num_doctors()];
    for &c in coalition {
        let con = m.contract(c);
        if con.hospital != h || std::mem::replace(&mut seen[con.doctor.0], true) {
            return false;
        }
        if !x.contains(c) && !m.doctor_prefers(c, x.assignment(con.doctor)) {
            return false;
        }
    }
    let held = x.at_hospital(m, h);
    m.total_utility(coalition) > m.total_utility(&held) && m.total_wage(coalition) <= budget
}

/// Contracts of `h` a coalition may use: those already held, plus those whose
/// doctor strictly prefers them to her current assignment.
pub(crate) fn willing_pool(m: &Market, h: HospitalId, assign: &[Option<ContractId>]) -> Vec<ContractId> {
    m.hospital_contracts(h)
        .iter()
        .copied()
        .filter(|&c| {
            let d = m.contract(c).doctor.0;
            assign[d] == Some(c) || m.doctor_prefers(c, assign[d])
        })
        .collect()
}

struct CoalitionSearch<'a> {
    m: &'a Market,
    pool: &'a [ContractId],
    /// `suffix_utility[i]` = total utility of `pool[i..]`.
    suffix_utility: Vec<Rat>,
    budget: Rat,
    target: Rat,
    used: Vec<bool>,
    chosen: Vec<ContractId>,
}

impl CoalitionSearch<'_> {
    /// Visits coalitions in lexicographic order of their sorted id sequences;
    /// returns at the first one beating `target`.
    fn dfs(&mut self, start: usize, wage: Rat, utility: Rat) -> bool {
        if utility + self.suffix_utility[start] <= self.target {
            return false;
        }
        for i in start..self.pool.len() {
            let c = self.pool[i];
            let con = self.m.contract(c);
            let w = wage + con.wage;
            if self.used[con.doctor.0] || w > self.budget {
                continue;
            }
            let u = utility + con.utility;
            self.chosen.push(c);
            if u > self.target {
                return true;
            }
            self.used[con.doctor.0] = true;
            if self.dfs(i + 1, w, u) {
                return true;
            }
            self.used[con.doctor.0] = false;
            self.chosen.pop();
        }
        false
    }
}

/// The lexicographically first blocking coalition at `h`, given each doctor's
/// current assignment and the utility `h` currently gets.
pub(crate) fn blocking_at(
    m: &Market,
    h: HospitalId,
    assign: &[Option<ContractId>],
    current_utility: Rat,
    budget: Rat,
    pool_cap: usize,
) -> Result<Option<Vec<ContractId>>> {
    let pool = willing_pool(m, h, assign);
    if pool.len() > pool_cap {
        return Err(Error::cap("blocking pool", pool.len() as u128, pool_cap as u128));
    }
    let mut suffix_utility = vec![Rat::ZERO; pool.len() + 1];
    for i in (0..pool.len()).rev() {
        suffix_utility[i] = suffix_utility[i + 1] + m.utility(pool[i]);
    }
    let mut s = CoalitionSearch {
        m,
        pool: &pool,
        suffix_utility,
        budget,
        target: current_utility,
        used: vec![false; m.num_doctors()],
        chosen: Vec::new(),
    };
    Ok(s.dfs(0, Rat::ZERO, Rat::ZERO).then_some(s.chosen))
}

fn assignments(m: &Market, x: &Matching) -> Vec<Option<ContractId>> {
    m.doctors().map(|d| x.assignment(d)).collect()
}

fn check_budget_len(m: &Market, budgets: &[Rat]) -> Result<()> {
    if budgets.len() != m.num_hospitals() {
        return Err(Error::InvalidParameters(format!("{} budgets for {} hospitals", budgets.len(), m.num_hospitals())));
    }
    Ok(())
}

/// First blocking coalition by hospital order, then lexicographic coalition order.
pub fn find_blocking(m: &Market, x: &Matching, budgets: &[Rat], pool_cap: usize) -> Result<Option<Blocking>> {
    check_budget_len(m, budgets)?;
    let assign = assignments(m, x);
    for h in m.hospitals() {
        let held = x.at_hospital(m, h);
        let found = blocking_at(m, h, &assign, m.total_utility(&held), budgets[h.0], pool_cap)?;
        if let Some(coalition) = found {
            return Ok(Some(Blocking { hospital: h, coalition }));
        }
    }
    Ok(None)
}

/// Feasibility against `budgets` plus an exhaustive blocking scan.
pub fn check_stable(m: &Market, x: &Matching, budgets: &[Rat], pool_cap: usize) -> Result<StabilityReport> {
    check_budget_len(m, budgets)?;
    let feasible = m.hospitals().map(|h| x.wage_total(h) <= budgets[h.0]).collect();
    Ok(StabilityReport {
        budgets: budgets.to_vec(),
        feasible,
        blocking: find_blocking(m, x, budgets, pool_cap)?,
        implied_budget: implied_budgets(m, x),
        violation_ratio: m.hospitals().map(|h| x.wage_total(h) / m.budget(h)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum HmViolation {
    /// A doctor holds a contract she finds unacceptable.
    DoctorRejects { contract: ContractId },
    /// A hospital would not choose its own assigned set.
    HospitalRejects { hospital: HospitalId, chosen: Vec<ContractId> },
    /// Some `X'' ≠ Ch_h(X'_h)` with `X'' = Ch_h(X'_h ∪ X'') ⊆ Ch_D(X' ∪ X'')`.
    Blocking { hospital: HospitalId, coalition: Vec<ContractId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HmReport {
    pub witness: Option<HmViolation>,
}

impl HmReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Fixed-point stability with respect to the mechanism's own choice functions.
pub fn check_hm_stable(m: &Market, mech: &Mechanism, x: &Matching, pool_cap: usize) -> Result<HmReport> {
    // (i) X' = Ch_D(X'): every held contract is acceptable.
    for &c in x.contracts() {
        if m.pref_rank(c).is_none() {
            return Ok(HmReport { witness: Some(HmViolation::DoctorRejects { contract: c }) });
        }
    }
    // (i) X' = Ch_H(X').
    for h in m.hospitals() {
        let held = x.at_hospital(m, h);
        let chosen = mech.choose(m, h, &held)?;
        if chosen != held {
            return Ok(HmReport { witness: Some(HmViolation::HospitalRejects { hospital: h, chosen }) });
        }
    }
    // (ii) X'' ⊆ Ch_D(X' ∪ X'') forces X'' to be a matching drawn from the
    // willing pool, so only those subsets are enumerated.
    let assign = assignments(m, x);
    for h in m.hospitals() {
        let pool = willing_pool(m, h, &assign);
        if pool.len() > pool_cap {
            return Err(Error::cap("fixed-point pool", pool.len() as u128, pool_cap as u128));
        }
        let held = x.at_hospital(m, h);
        let kind = mech.kind(h);
        for mask in 1u64..(1u64 << pool.len()) {
            let cand: Vec<ContractId> = (0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| pool[i]).collect();
            if cand == held || !distinct_doctors(m, &cand) {
                continue;
            }
            let mut union = held.clone();
            union.extend(&cand);
            union.sort_unstable();
            union.dedup();
            if choose_kind(m, h, kind, &union, mech.oracle_cap())? == cand {
                return Ok(HmReport { witness: Some(HmViolation::Blocking { hospital: h, coalition: cand }) });
            }
        }
    }
    Ok(HmReport { witness: None })
}

fn distinct_doctors(m: &Market, xs: &[ContractId]) -> bool {
    let mut ds: Vec<usize> = xs.iter().map(|&c| m.contract(c).doctor.0).collect();
    ds.sort_unstable();
    ds.windows(2).all(|w| w[0] != w[1])
}
