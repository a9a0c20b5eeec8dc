use std::cmp::Reverse;

use super::{require_kind, ChoiceKind};
use crate::error::Result;
use crate::model::{ContractId, HospitalId, Market, Rat};

/// A contract with its sort key. Ordering is by key, then ascending id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedContract {
    pub id: ContractId,
    pub key: Rat,
}

/// `xs` by descending utility per unit wage, ties by ascending id.
pub fn ratio_order(m: &Market, xs: &[ContractId]) -> Vec<RankedContract> {
    let mut v: Vec<_> = xs.iter().map(|&id| RankedContract { id, key: m.utility(id) / m.wage(id) }).collect();
    v.sort_by_key(|r| (Reverse(r.key), r.id));
    v
}

/// `xs` by ascending wage, ties by ascending id.
pub fn wage_order(m: &Market, xs: &[ContractId]) -> Vec<RankedContract> {
    let mut v: Vec<_> = xs.iter().map(|&id| RankedContract { id, key: m.wage(id) }).collect();
    v.sort_by_key(|r| (r.key, r.id));
    v
}

/// `k_h = ceil(B_h / min wage over all of X_h)`; zero when `X_h` is empty.
pub fn capped_k(m: &Market, h: HospitalId) -> usize {
    match m.min_wage(h) {
        None => 0,
        Some(w) => (m.budget(h) / w).ceil() as usize,
    }
}

fn sorted(mut v: Vec<ContractId>) -> Vec<ContractId> {
    v.sort_unstable();
    v
}

/// Top `min(k_h, |xs|)` contracts by utility per unit wage.
pub fn ch_greedy_capped(m: &Market, h: HospitalId, xs: &[ContractId]) -> Vec<ContractId> {
    let k = capped_k(m, h);
    sorted(ratio_order(m, xs).into_iter().take(k).map(|r| r.id).collect())
}

/// Utility-per-wage scan that keeps adding while the running wage is below `B_h`.
pub fn ch_greedy_budget(m: &Market, h: HospitalId, xs: &[ContractId]) -> Vec<ContractId> {
    let budget = m.budget(h);
    let mut total = Rat::ZERO;
    let mut out = Vec::new();
    for r in ratio_order(m, xs) {
        if total >= budget {
            break;
        }
        total += m.wage(r.id);
        out.push(r.id);
    }
    sorted(out)
}

/// All but the highest-wage contract in ascending wage order, each kept if the
/// running total stays strictly below `B_h`; the highest-wage contract is always kept.
pub fn ch_prop_sp(m: &Market, h: HospitalId, xs: &[ContractId]) -> Result<Vec<ContractId>> {
    require_kind(m, h, ChoiceKind::PropSp)?;
    let order = wage_order(m, xs);
    let Some((top, rest)) = order.split_last() else {
        return Ok(Vec::new());
    };
    let budget = m.budget(h);
    let mut total = Rat::ZERO;
    let mut out = Vec::with_capacity(order.len());
    for r in rest {
        if total + r.key < budget {
            total += r.key;
            out.push(r.id);
        }
    }
    out.push(top.id);
    Ok(sorted(out))
}

/// Highest-wage contract first, then ascending wages kept while the total
/// stays strictly below `1.5 * B_h`.
pub fn ch_prop_15(m: &Market, h: HospitalId, xs: &[ContractId]) -> Result<Vec<ContractId>> {
    require_kind(m, h, ChoiceKind::Prop15)?;
    let order = wage_order(m, xs);
    let Some((top, rest)) = order.split_last() else {
        return Ok(Vec::new());
    };
    let limit = m.budget(h) * Rat::new(3, 2);
    let mut total = top.key;
    let mut out = vec![top.id];
    for r in rest {
        if total + r.key < limit {
            total += r.key;
            out.push(r.id);
        }
    }
    Ok(sorted(out))
}

/// Ascending wages, each kept if the total stays within `B_h`.
pub fn ch_equal_util(m: &Market, h: HospitalId, xs: &[ContractId]) -> Result<Vec<ContractId>> {
    require_kind(m, h, ChoiceKind::EqualUtil)?;
    let budget = m.budget(h);
    let mut total = Rat::ZERO;
    let mut out = Vec::new();
    for r in wage_order(m, xs) {
        if total + r.key <= budget {
            total += r.key;
            out.push(r.id);
        }
    }
    Ok(sorted(out))
}
