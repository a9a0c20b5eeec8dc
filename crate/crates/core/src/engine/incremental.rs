use std::cmp::{Ordering, Reverse};

use super::heap::{CountingHeap, Entry};
use super::{DaOptions, DaTrace, Round};
use crate::choice::{capped_k, ChoiceKind, Mechanism};
use crate::error::{Error, Result};
use crate::model::{ContractId, HospitalId, Market, Matching, Rat};

/// Per-hospital state: held contracts keyed so the heap top is the first to drop.
struct Desk {
    kind: ChoiceKind,
    heap: CountingHeap,
    total: Rat,
    budget: Rat,
    k: usize,
}

impl Desk {
    fn insert(&mut self, m: &Market, e: Entry, cmps: &mut u64) {
        self.total += m.wage(e.id);
        self.heap.push(e, cmps);
    }

    fn pop(&mut self, m: &Market, cmps: &mut u64) -> ContractId {
        let e = self.heap.pop(cmps).expect("non-empty heap");
        self.total -= m.wage(e.id);
        e.id
    }

    /// Drops contracts until the held set equals the choice over it.
    fn settle(&mut self, m: &Market, cmps: &mut u64, out: &mut Vec<ContractId>) {
        match self.kind {
            ChoiceKind::GreedyCapped => {
                while self.heap.len() > self.k {
                    out.push(self.pop(m, cmps));
                }
            }
            ChoiceKind::GreedyBudget => {
                // Keep the shortest ratio prefix reaching the budget.
                while let Some(top) = self.heap.peek() {
                    if self.total - m.wage(top.id) >= self.budget {
                        out.push(self.pop(m, cmps));
                    } else {
                        break;
                    }
                }
            }
            ChoiceKind::EqualUtil => {
                while self.total > self.budget {
                    out.push(self.pop(m, cmps));
                }
            }
            ChoiceKind::PropSp | ChoiceKind::Prop15 => {
                let Some(top) = self.heap.pop(cmps) else { return };
                let top_wage = m.wage(top.id);
                let limit =
                    if self.kind == ChoiceKind::PropSp { self.budget + top_wage } else { self.budget * Rat::new(3, 2) };
                // `total` still includes the highest wage.
                while self.heap.len() > 0 && self.total >= limit {
                    out.push(self.pop(m, cmps));
                }
                self.heap.push(top, cmps);
            }
            ChoiceKind::Exact => unreachable!("rejected before the run"),
        }
    }
}

/// Heap-based deferred acceptance. Each contract enters its hospital's heap at
/// most once and leaves it at most once.
pub fn run_da_incremental(m: &Market, mech: &Mechanism, opts: DaOptions) -> Result<(Matching, DaTrace)> {
    let mut cmps = 0u64;
    let mut rank = vec![0usize; m.num_contracts()];
    let mut desks = Vec::with_capacity(m.num_hospitals());
    for h in m.hospitals() {
        let kind = mech.kind(h);
        if kind == ChoiceKind::Exact {
            return Err(Error::UnsupportedKind(kind));
        }
        rank_hospital(m, h, kind, &mut rank, &mut cmps);
        desks.push(Desk {
            kind,
            heap: CountingHeap::default(),
            total: Rat::ZERO,
            budget: m.budget(h),
            k: capped_k(m, h),
        });
    }

    let limit = m.num_contracts() + 1;
    let mut next_pref = vec![0usize; m.num_doctors()];
    let mut proposal: Vec<Option<ContractId>> = vec![None; m.num_doctors()];
    let mut rejected_all: Vec<ContractId> = Vec::new();
    let mut proposers: Vec<usize> = (0..m.num_doctors()).collect();
    let mut rounds = Vec::new();
    let mut touched = vec![false; m.num_hospitals()];
    let mut round = 0;
    loop {
        round += 1;
        if round > limit {
            return Err(Error::NonTermination(limit));
        }
        let mut touched_list = Vec::new();
        for &d in &proposers {
            let prefs = m.prefs(crate::model::DoctorId(d));
            proposal[d] = prefs.get(next_pref[d]).copied();
            if let Some(x) = proposal[d] {
                let h = m.contract(x).hospital.0;
                desks[h].insert(m, Entry { rank: rank[x.0], id: x }, &mut cmps);
                if !touched[h] {
                    touched[h] = true;
                    touched_list.push(h);
                }
            }
        }
        touched_list.sort_unstable();
        let mut rejected_now = Vec::new();
        for &h in &touched_list {
            touched[h] = false;
            desks[h].settle(m, &mut cmps, &mut rejected_now);
        }

        if opts.keep_trace {
            let mut proposed: Vec<ContractId> = proposal.iter().flatten().copied().collect();
            proposed.sort_unstable();
            let mut now = rejected_now.clone();
            now.sort_unstable();
            let accepted = proposed.iter().copied().filter(|x| now.binary_search(x).is_err()).collect();
            let mut after = rejected_all.clone();
            after.extend_from_slice(&now);
            after.sort_unstable();
            rounds.push(Round { proposed, accepted, rejected_after: after });
        }

        if rejected_now.is_empty() {
            break;
        }
        proposers.clear();
        for &x in &rejected_now {
            let d = m.contract(x).doctor.0;
            next_pref[d] += 1;
            proposers.push(d);
        }
        proposers.sort_unstable();
        rejected_all.extend(rejected_now);
    }

    let held: Vec<ContractId> = desks.iter().flat_map(|d| d.heap.iter().map(|e| e.id)).collect();
    let matching = Matching::new(m, held)?;
    let trace = DaTrace { rounds, final_matching: matching.clone(), round_count: round, comparisons: cmps };
    Ok((matching, trace))
}

/// Ranks `X_h` so that a larger rank is dropped first.
fn rank_hospital(m: &Market, h: HospitalId, kind: ChoiceKind, rank: &mut [usize], cmps: &mut u64) {
    let mut xs = m.hospital_contracts(h).to_vec();
    let by_ratio = matches!(kind, ChoiceKind::GreedyCapped | ChoiceKind::GreedyBudget);
    let key = |x: ContractId| {
        if by_ratio {
            (Reverse(m.utility(x) / m.wage(x)), Rat::ZERO, x)
        } else {
            (Reverse(Rat::ZERO), m.wage(x), x)
        }
    };
    xs.sort_by(|&a, &b| -> Ordering {
        *cmps += 1;
        key(a).cmp(&key(b))
    });
    for (i, x) in xs.into_iter().enumerate() {
        rank[x.0] = i;
    }
}
