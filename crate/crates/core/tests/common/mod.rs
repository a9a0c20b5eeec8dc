//! Naive reference implementations used as oracles. Each one enumerates
//! subsets directly and shares no code with the library's search routines.

#![allow(dead_code)]

use budget_match::choice::ChoiceKind;
use budget_match::model::{ContractId, HospitalId, Market, Matching, Rat};

pub fn subsets(xs: &[ContractId]) -> impl Iterator<Item = Vec<ContractId>> + '_ {
    (0u64..1 << xs.len()).map(move |mask| (0..xs.len()).filter(|i| mask >> i & 1 == 1).map(|i| xs[i]).collect())
}

fn one_per_doctor(m: &Market, s: &[ContractId]) -> bool {
    let mut ds: Vec<_> = s.iter().map(|&c| m.contract(c).doctor).collect();
    ds.sort();
    ds.windows(2).all(|w| w[0] != w[1])
}

/// Does any `X'' ⊆ X_h` block `x` at `budget`? Scans all `2^|X_h|` subsets.
pub fn naive_blocking_at(m: &Market, x: &Matching, h: HospitalId, budget: Rat) -> Option<Vec<ContractId>> {
    let held: Vec<ContractId> = x.contracts().iter().copied().filter(|&c| m.contract(c).hospital == h).collect();
    let f_held: Rat = held.iter().map(|&c| m.utility(c)).sum();
    for s in subsets(m.hospital_contracts(h)) {
        if !one_per_doctor(m, &s) {
            continue;
        }
        let wage: Rat = s.iter().map(|&c| m.wage(c)).sum();
        let util: Rat = s.iter().map(|&c| m.utility(c)).sum();
        if wage > budget || util <= f_held {
            continue;
        }
        let willing = s.iter().all(|&c| {
            if x.contains(c) {
                return true;
            }
            let d = m.contract(c).doctor;
            let prefs = m.prefs(d);
            let Some(rc) = prefs.iter().position(|&p| p == c) else { return false };
            match x.assignment(d) {
                None => true,
                Some(cur) => prefs.iter().position(|&p| p == cur).is_none_or(|rcur| rc < rcur),
            }
        });
        if willing {
            return Some(s);
        }
    }
    None
}

pub fn naive_stable(m: &Market, x: &Matching, budgets: &[Rat]) -> bool {
    m.hospitals().all(|h| {
        let w: Rat = x.contracts().iter().filter(|&&c| m.contract(c).hospital == h).map(|&c| m.wage(c)).sum();
        w <= budgets[h.0] && naive_blocking_at(m, x, h, budgets[h.0]).is_none()
    })
}

/// Every matching built from each doctor's acceptable contracts or nothing.
pub fn all_matchings(m: &Market) -> Vec<Matching> {
    let mut out = vec![Vec::new()];
    for d in m.doctors() {
        let mut next = Vec::new();
        for partial in &out {
            next.push(partial.clone());
            for &c in m.prefs(d) {
                let mut p = partial.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(|v| Matching::new(m, v).unwrap()).collect()
}

/// Maximum-utility subset within budget; ties go to the lexicographically
/// smallest ascending id sequence.
pub fn naive_exact(m: &Market, h: HospitalId, xs: &[ContractId]) -> Vec<ContractId> {
    let mut sorted = xs.to_vec();
    sorted.sort();
    let mut best: Option<(Rat, Vec<ContractId>)> = None;
    for s in subsets(&sorted) {
        let wage: Rat = s.iter().map(|&c| m.wage(c)).sum();
        if wage > m.budget(h) {
            continue;
        }
        let util: Rat = s.iter().map(|&c| m.utility(c)).sum();
        let better = match &best {
            None => true,
            Some((bu, bs)) => util > *bu || (util == *bu && s < *bs),
        };
        if better {
            best = Some((util, s));
        }
    }
    best.map(|b| b.1).unwrap_or_default()
}

/// Budget-violation bound restated from the mechanism definitions.
pub fn bound_holds(m: &Market, h: HospitalId, kind: ChoiceKind, wage: Rat) -> bool {
    let b = m.budget(h);
    let ws: Vec<Rat> = m.hospital_contracts(h).iter().map(|&c| m.wage(c)).collect();
    let Some(&hi) = ws.iter().max() else { return wage == Rat::ZERO };
    let lo = *ws.iter().min().unwrap();
    match kind {
        ChoiceKind::GreedyCapped => wage <= hi * Rat::int((b / lo).ceil()),
        ChoiceKind::GreedyBudget | ChoiceKind::PropSp => wage < b + hi,
        ChoiceKind::Prop15 => wage <= b * Rat::new(3, 2),
        ChoiceKind::EqualUtil | ChoiceKind::Exact => wage <= b,
    }
}

/// Kinds other than the exact oracle that accept this market's utilities everywhere.
pub fn greedy_kinds(m: &Market) -> Vec<ChoiceKind> {
    ChoiceKind::ALL
        .into_iter()
        .filter(|&k| k != ChoiceKind::Exact && m.hospitals().all(|h| k.supports(&m.spec(h).utility_kind)))
        .collect()
}

pub fn labels(m: &Market, xs: &[ContractId]) -> Vec<String> {
    let mut v: Vec<String> = xs.iter().map(|&c| m.label(c)).collect();
    v.sort();
    v
}

pub fn sorted_labels(v: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}
