use serde::Serialize;

use crate::choice::Mechanism;
use crate::engine::{run_da, DaOptions};
use crate::error::{Error, Result};
use crate::model::{ContractId, DoctorId, Market};

/// A ranking that earns the doctor a contract she truly prefers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Misreport {
    pub doctor: DoctorId,
    pub report: Vec<ContractId>,
    pub truthful: Vec<ContractId>,
    pub manipulated: Vec<ContractId>,
}

/// Every strict ranking of every subset of `xs`: longer lists first, then in
/// lexicographic order of the id sequence.
pub fn reports_for(xs: &[ContractId]) -> Vec<Vec<ContractId>> {
    fn extend(
        xs: &[ContractId],
        len: usize,
        cur: &mut Vec<ContractId>,
        used: &mut [bool],
        out: &mut Vec<Vec<ContractId>>,
    ) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..xs.len() {
            if !used[i] {
                used[i] = true;
                cur.push(xs[i]);
                extend(xs, len, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for len in (0..=sorted.len()).rev() {
        extend(&sorted, len, &mut Vec::new(), &mut vec![false; sorted.len()], &mut out);
    }
    out
}

/// Searches all rankings over `X_d` for one that improves `d`'s outcome
/// under her true preferences, all other reports held fixed.
pub fn probe_strategyproof(m: &Market, mech: &Mechanism, d: DoctorId, cap: usize) -> Result<Option<Misreport>> {
    let xd = m.doctor_contracts(d);
    if xd.len() > cap {
        return Err(Error::cap("misreport contracts", xd.len() as u128, cap as u128));
    }
    let (truthful, _) = run_da(m, mech, DaOptions::default())?;
    let current = truthful.assignment(d);
    for report in reports_for(xd) {
        if report == m.prefs(d) {
            continue;
        }
        let lied = m.with_prefs(d, report.clone())?;
        let (outcome, _) = run_da(&lied, mech, DaOptions::default())?;
        if let Some(got) = outcome.assignment(d) {
            if m.doctor_prefers(got, current) {
                return Ok(Some(Misreport {
                    doctor: d,
                    report,
                    truthful: truthful.contracts().to_vec(),
                    manipulated: outcome.contracts().to_vec(),
                }));
            }
        }
    }
    Ok(None)
}

/// The first profitable misreport over all doctors, in doctor order.
pub fn probe_all_doctors(m: &Market, mech: &Mechanism, cap: usize) -> Result<Option<Misreport>> {
    for d in m.doctors() {
        if let Some(mr) = probe_strategyproof(m, mech, d, cap)? {
            return Ok(Some(mr));
        }
    }
    Ok(None)
}
