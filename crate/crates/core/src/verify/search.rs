use std::time::Instant;

use super::stability::blocking_at;
use crate::error::{Error, Result};
use crate::model::{ContractId, DoctorId, HospitalId, Market, Matching, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Matching),
    /// Every assignment was ruled out: no stable matching at these budgets.
    NoneExists,
    /// The deadline passed before the search closed.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Partial assignments visited.
    pub nodes: u64,
    pub elapsed_ms: u128,
}

struct Search<'a> {
    m: &'a Market,
    /// Wage caps; blocking is checked against these unless `floor` is set.
    budgets: &'a [Rat],
    /// When set, blocking at `h` uses `max{floor_h, w_h}`.
    floor: Option<Vec<Rat>>,
    pool_cap: usize,
    deadline: Option<Instant>,
    /// Doctors in assignment order.
    order: Vec<DoctorId>,
    /// Hospitals whose doctors are all assigned once `order[..=i]` is fixed.
    closes_after: Vec<Vec<HospitalId>>,
    assign: Vec<Option<ContractId>>,
    wage: Vec<Rat>,
    utility: Vec<Rat>,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn closed_ok(&self, h: HospitalId) -> Result<bool> {
        let budget = match &self.floor {
            Some(f) => f[h.0].max(self.wage[h.0]),
            None => self.budgets[h.0],
        };
        let found = blocking_at(self.m, h, &self.assign, self.utility[h.0], budget, self.pool_cap)?;
        Ok(found.is_none())
    }

    fn dfs(&mut self, depth: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if let Some(t) = self.deadline {
                if Instant::now() >= t {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return Ok(false);
        }
        if depth == self.order.len() {
            return Ok(true);
        }
        let d = self.order[depth];
        // Unmatched first, then the doctor's ranking.
        let options: Vec<Option<ContractId>> =
            std::iter::once(None).chain(self.m.prefs(d).iter().copied().map(Some)).collect();
        for opt in options {
            if let Some(c) = opt {
                let con = self.m.contract(c);
                let h = con.hospital.0;
                if self.wage[h] + con.wage > self.budgets[h] {
                    continue;
                }
                self.wage[h] += con.wage;
                self.utility[h] += con.utility;
            }
            self.assign[d.0] = opt;
            let mut ok = true;
            for i in 0..self.closes_after[depth].len() {
                let h = self.closes_after[depth][i];
                if !self.closed_ok(h)? {
                    ok = false;
                    break;
                }
            }
            if ok && self.dfs(depth + 1)? {
                return Ok(true);
            }
            self.assign[d.0] = None;
            if let Some(c) = opt {
                let con = self.m.contract(c);
                self.wage[con.hospital.0] -= con.wage;
                self.utility[con.hospital.0] -= con.utility;
            }
            if self.timed_out {
                return Ok(false);
            }
        }
        Ok(false)
    }
}

/// Doctor order that closes hospitals early: repeatedly take the open hospital
/// with the fewest unassigned doctors and assign all of them.
fn closing_order(m: &Market) -> (Vec<DoctorId>, Vec<Vec<HospitalId>>) {
    let doctors_of = |h: HospitalId| {
        let mut ds: Vec<usize> = m.hospital_contracts(h).iter().map(|&c| m.contract(c).doctor.0).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    };
    let hosp_doctors: Vec<Vec<usize>> = m.hospitals().map(doctors_of).collect();
    let mut placed = vec![false; m.num_doctors()];
    let mut open: Vec<HospitalId> = m.hospitals().collect();
    let mut order = Vec::new();
    while let Some(pos) =
        (0..open.len()).min_by_key(|&i| (hosp_doctors[open[i].0].iter().filter(|&&d| !placed[d]).count(), open[i]))
    {
        let h = open.remove(pos);
        for &d in &hosp_doctors[h.0] {
            if !placed[d] {
                placed[d] = true;
                order.push(DoctorId(d));
            }
        }
    }
    for d in m.doctors() {
        if !placed[d.0] {
            order.push(d);
        }
    }
    // A hospital closes at the position of its last doctor in the order.
    let mut pos_of = vec![0usize; m.num_doctors()];
    for (i, d) in order.iter().enumerate() {
        pos_of[d.0] = i;
    }
    let mut closes_after = vec![Vec::new(); order.len()];
    for h in m.hospitals() {
        if let Some(last) = hosp_doctors[h.0].iter().map(|&d| pos_of[d]).max() {
            closes_after[last].push(h);
        }
    }
    (order, closes_after)
}

/// Branch-and-bound search for a stable matching at `budgets`. Assignments
/// exceeding a budget are cut immediately; each hospital is checked for
/// blocking coalitions as soon as all of its doctors are assigned.
pub fn search_stable(
    m: &Market,
    budgets: &[Rat],
    pool_cap: usize,
    deadline: Option<Instant>,
) -> Result<(SearchOutcome, SearchStats)> {
    run_search(m, budgets, None, pool_cap, deadline)
}

/// Searches for a matching that is stable under some budget profile between
/// the market's budgets and `upper`. Such a matching is exactly one with
/// `w_h <= upper_h` that is stable at `max{B_h, w_h}`, so `NoneExists`
/// certifies the whole range.
pub fn search_stable_in_range(
    m: &Market,
    upper: &[Rat],
    pool_cap: usize,
    deadline: Option<Instant>,
) -> Result<(SearchOutcome, SearchStats)> {
    if upper.len() == m.num_hospitals() && m.hospitals().any(|h| upper[h.0] < m.budget(h)) {
        return Err(Error::InvalidParameters("upper budgets below the market's budgets".into()));
    }
    run_search(m, upper, Some(m.budgets()), pool_cap, deadline)
}

fn run_search(
    m: &Market,
    budgets: &[Rat],
    floor: Option<Vec<Rat>>,
    pool_cap: usize,
    deadline: Option<Instant>,
) -> Result<(SearchOutcome, SearchStats)> {
    if budgets.len() != m.num_hospitals() {
        return Err(Error::InvalidParameters(format!("{} budgets for {} hospitals", budgets.len(), m.num_hospitals())));
    }
    let start = Instant::now();
    let (order, closes_after) = closing_order(m);
    let mut s = Search {
        m,
        budgets,
        floor,
        pool_cap,
        deadline,
        order,
        closes_after,
        assign: vec![None; m.num_doctors()],
        wage: vec![Rat::ZERO; m.num_hospitals()],
        utility: vec![Rat::ZERO; m.num_hospitals()],
        nodes: 0,
        timed_out: false,
    };
    // Hospitals without contracts are never blocked; an empty market is checked here.
    let found = s.dfs(0)?;
    let stats = SearchStats { nodes: s.nodes, elapsed_ms: start.elapsed().as_millis() };
    let outcome = if found {
        SearchOutcome::Found(Matching::new(m, s.assign.iter().flatten().copied())?)
    } else if s.timed_out {
        SearchOutcome::Inconclusive
    } else {
        SearchOutcome::NoneExists
    };
    Ok((outcome, stats))
}

/// Candidate matchings: each doctor takes one acceptable contract or none.
pub fn assignment_count(m: &Market) -> u128 {
    m.doctors().fold(1u128, |n, d| n.saturating_mul(m.prefs(d).len() as u128 + 1))
}

/// A stable matching at `budgets`, or `None` as a certificate that none exists.
/// Refuses markets with more than `enum_cap` candidate assignments.
pub fn exists_stable_exhaustive(
    m: &Market,
    budgets: &[Rat],
    enum_cap: u128,
    pool_cap: usize,
) -> Result<Option<Matching>> {
    let size = assignment_count(m);
    if size > enum_cap {
        return Err(Error::cap("matching enumeration", size, enum_cap));
    }
    match search_stable(m, budgets, pool_cap, None)?.0 {
        SearchOutcome::Found(x) => Ok(Some(x)),
        SearchOutcome::NoneExists => Ok(None),
        SearchOutcome::Inconclusive => unreachable!("no deadline"),
    }
}
