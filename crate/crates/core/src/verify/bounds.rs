use serde::Serialize;

use crate::choice::{capped_k, ChoiceKind, Mechanism};
use crate::model::{HospitalId, Market, Matching, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub hospital: HospitalId,
    pub kind: ChoiceKind,
    pub wage: Rat,
    pub bound: Rat,
    /// Whether the bound is strict (`<`) rather than `<=`.
    pub strict: bool,
    pub holds: bool,
    /// `bound - wage`.
    pub slack: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// The budget overshoot each mechanism guarantees:
///
/// | kind            | bound                     |
/// |-----------------|---------------------------|
/// | `sp-greedy`     | `w <= w̄_h · ⌈B_h/w̲_h⌉`    |
/// | `budget-greedy` | `w < B_h + w̄_h`           |
/// | `prop-sp`       | `w < B_h + w̄_h`           |
/// | `prop-15`       | `w <= 1.5 · B_h`          |
/// | `equal-util`    | `w <= B_h`                |
/// | `exact`         | `w <= B_h`                |
pub fn bound_for(m: &Market, h: HospitalId, kind: ChoiceKind) -> (Rat, bool) {
    let b = m.budget(h);
    let top = m.max_wage(h).unwrap_or(Rat::ZERO);
    match kind {
        ChoiceKind::GreedyCapped => (top * Rat::int(capped_k(m, h) as i128), false),
        ChoiceKind::GreedyBudget | ChoiceKind::PropSp => (b + top, true),
        ChoiceKind::Prop15 => (b * Rat::new(3, 2), false),
        ChoiceKind::EqualUtil | ChoiceKind::Exact => (b, false),
    }
}

pub fn check_bounds(m: &Market, mech: &Mechanism, x: &Matching) -> BoundReport {
    let rows = m
        .hospitals()
        .map(|h| {
            let kind = mech.kind(h);
            let wage = x.wage_total(h);
            let (bound, strict) = bound_for(m, h, kind);
            // An empty X_h pays nothing; the strict bound is vacuous there.
            let holds = if strict && m.hospital_contracts(h).is_empty() {
                wage.is_zero()
            } else if strict {
                wage < bound
            } else {
                wage <= bound
            };
            BoundRow { hospital: h, kind, wage, bound, strict, holds, slack: bound - wage }
        })
        .collect();
    BoundReport { rows }
}
