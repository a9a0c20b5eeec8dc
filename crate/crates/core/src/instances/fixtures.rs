//! Worked example markets with their published outcomes stored as data.

use crate::choice::ChoiceKind;
use crate::error::{Error, Result};
use crate::model::{ContractId, Market, MarketBuilder, Rat, UtilityKind};

pub const NAMES: [&str; 6] =
    ["example1-nonexistence", "example2-mech1", "example3-mech2", "nonsp-5.2", "doctoropt-5.3", "lad-failure-5.2"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expected {
    /// Final matching of the fixture's mechanism.
    pub matching: Option<Vec<ContractId>>,
    /// Hospital choice in the first round.
    pub round1_accepted: Option<Vec<ContractId>>,
    /// A matching and a coalition that blocks it.
    pub blocked: Option<(Vec<ContractId>, Vec<ContractId>)>,
    /// Property witness `(smaller, larger)` with smaller ⊆ larger.
    pub witness: Option<(Vec<ContractId>, Vec<ContractId>)>,
    /// Doctor name, misreported ranking, outcome under the misreport.
    pub misreport: Option<(String, Vec<ContractId>, Vec<ContractId>)>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub market: Market,
    pub mechanism: Option<ChoiceKind>,
    pub expected: Expected,
}

fn r(n: i128) -> Rat {
    Rat::int(n)
}

fn ids(v: &[usize]) -> Vec<ContractId> {
    v.iter().map(|&i| ContractId(i)).collect()
}

pub fn by_name(name: &str) -> Result<Fixture> {
    match name {
        "example1-nonexistence" => Ok(example1()),
        "example2-mech1" => Ok(example2()),
        "example3-mech2" => Ok(example3()),
        "nonsp-5.2" => Ok(nonsp()),
        "doctoropt-5.3" => Ok(doctoropt()),
        "lad-failure-5.2" => Ok(lad_failure()),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().map(|n| by_name(n).expect("known fixture")).collect()
}

/// Three doctors, two hospitals, no stable matching at budgets (10, 6).
pub fn example1() -> Fixture {
    let mut b = MarketBuilder::new();
    b.doctor("d1").doctor("d2").doctor("d3");
    b.hospital("h1", r(10), UtilityKind::General);
    b.hospital("h2", r(6), UtilityKind::General);
    let x0 = b.contract("d1", "h1", r(9), r(9));
    let x1 = b.contract("d2", "h1", r(6), r(6));
    let x2 = b.contract("d3", "h1", r(4), r(4));
    let x3 = b.contract("d2", "h2", r(6), r(6));
    let x4 = b.contract("d3", "h2", r(4), r(4));
    b.prefs("d1", &[x0]).prefs("d2", &[x1, x3]).prefs("d3", &[x4, x2]);
    Fixture {
        name: "example1-nonexistence",
        market: b.build().expect("fixture validates"),
        mechanism: None,
        expected: Expected { blocked: Some((ids(&[0, 3]), ids(&[1, 2]))), ..Expected::default() },
    }
}

fn example2_market() -> Market {
    let mut b = MarketBuilder::new();
    for d in ["d1", "d2", "d3", "d4", "d5"] {
        b.doctor(d);
    }
    b.hospital("h1", r(100), UtilityKind::General);
    b.hospital("h2", r(100), UtilityKind::General);
    let h1 = [(57, 111), (50, 98), (42, 83), (55, 110), (50, 101)];
    let h2 = [50, 30, 20, 10, 40];
    let mut at_h1 = Vec::new();
    for (i, (w, u)) in h1.into_iter().enumerate() {
        at_h1.push(b.contract(&format!("d{}", i + 1), "h1", r(w), r(u)));
    }
    let mut at_h2 = Vec::new();
    for (i, u) in h2.into_iter().enumerate() {
        at_h2.push(b.contract(&format!("d{}", i + 1), "h2", r(100), r(u)));
    }
    for i in 0..4 {
        b.prefs(&format!("d{}", i + 1), &[at_h1[i], at_h2[i]]);
    }
    b.prefs("d5", &[at_h2[4], at_h1[4]]);
    b.build().expect("fixture validates")
}

/// Five doctors, two hospitals with budget 100, utility-per-wage greedy with a count cap.
pub fn example2() -> Fixture {
    // ids: 0..5 = (d1..d5, h1), 5..10 = (d1..d5, h2)
    Fixture {
        name: "example2-mech1",
        market: example2_market(),
        mechanism: Some(ChoiceKind::GreedyCapped),
        expected: Expected {
            matching: Some(ids(&[2, 3, 4, 5])),
            round1_accepted: Some(ids(&[1, 2, 3, 9])),
            ..Expected::default()
        },
    }
}

/// Same market under the budget-stopping greedy rule.
pub fn example3() -> Fixture {
    Fixture {
        name: "example3-mech2",
        market: example2_market(),
        mechanism: Some(ChoiceKind::GreedyBudget),
        expected: Expected { matching: Some(ids(&[3, 4, 5])), ..Expected::default() },
    }
}

/// Market where the budget-stopping greedy rule rewards a misreport by d3.
///
/// The sixth contract is `(d3,h2,1)`; it is the contract the listed
/// preferences and utilities refer to.
pub fn nonsp() -> Fixture {
    let mut b = MarketBuilder::new();
    b.doctor("d1").doctor("d2").doctor("d3");
    b.hospital("h1", r(2), UtilityKind::General);
    b.hospital("h2", r(1), UtilityKind::General);
    let x0 = b.contract("d1", "h1", r(1), r(1));
    let x1 = b.contract("d1", "h2", r(1), r(3));
    let x2 = b.contract("d2", "h1", r(2), r(10));
    let x3 = b.contract("d2", "h2", r(1), r(1));
    let x4 = b.contract("d3", "h1", r(1), r(1));
    let x5 = b.contract("d3", "h2", r(1), r(2));
    b.prefs("d1", &[x0, x1]).prefs("d2", &[x3, x2]).prefs("d3", &[x5, x4]);
    Fixture {
        name: "nonsp-5.2",
        market: b.build().expect("fixture validates"),
        mechanism: Some(ChoiceKind::GreedyBudget),
        expected: Expected {
            matching: Some(vec![x1, x2]),
            misreport: Some(("d3".to_string(), vec![x4, x5], vec![x0, x3, x4])),
            ..Expected::default()
        },
    }
}

/// Market whose mechanism outcome is stable but not doctor-optimal.
pub fn doctoropt() -> Fixture {
    let mut b = MarketBuilder::new();
    b.doctor("d1").doctor("d2").doctor("d3").doctor("d4");
    b.hospital("h1", r(2), UtilityKind::General);
    b.hospital("h2", r(1), UtilityKind::General);
    let x0 = b.contract("d1", "h1", r(1), r(7));
    let x1 = b.contract("d2", "h1", r(2), r(6));
    let x2 = b.contract("d3", "h1", r(1), r(1));
    let x3 = b.contract("d4", "h1", r(1), r(4));
    let x4 = b.contract("d3", "h2", r(1), r(2));
    let x5 = b.contract("d4", "h2", r(1), r(1));
    b.prefs("d1", &[x0]).prefs("d2", &[x1]).prefs("d3", &[x2, x4]).prefs("d4", &[x5, x3]);
    Fixture {
        name: "doctoropt-5.3",
        market: b.build().expect("fixture validates"),
        mechanism: Some(ChoiceKind::GreedyCapped),
        expected: Expected { matching: Some(vec![x0, x3, x4]), ..Expected::default() },
    }
}

/// One hospital offering wages 57, 50, 42, 55 to d1..d4 under budget 100.
///
/// Utilities make utility per unit wage strictly decrease from d1 to d4, so the
/// budget-stopping greedy rule keeps all of {d2,d3,d4} but only {d1,d2} once
/// d1's contract is added.
pub fn lad_failure() -> Fixture {
    let mut b = MarketBuilder::new();
    b.hospital("h1", r(100), UtilityKind::General);
    let rows = [(57, 115), (50, 100), (42, 83), (55, 107)];
    let mut xs = Vec::new();
    for (i, (w, u)) in rows.into_iter().enumerate() {
        let d = format!("d{}", i + 1);
        b.doctor(d.clone());
        let x = b.contract(&d, "h1", r(w), r(u));
        b.prefs(&d, &[x]);
        xs.push(x);
    }
    Fixture {
        name: "lad-failure-5.2",
        market: b.build().expect("fixture validates"),
        mechanism: Some(ChoiceKind::GreedyBudget),
        expected: Expected { witness: Some((vec![xs[1], xs[2], xs[3]], xs.clone())), ..Expected::default() },
    }
}
