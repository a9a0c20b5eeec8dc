//! Generalized deferred acceptance.
//!
//! Two implementations of the same synchronous loop: [`run_da`] recomputes
//! every doctor's and hospital's choice each round, and
//! [`run_da_incremental`] keeps each hospital's held contracts in a heap and
//! only processes new proposals. Both return the same matching and trace.

mod heap;
mod incremental;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

pub use incremental::run_da_incremental;

use crate::choice::{ch_doctors, Mechanism};
use crate::error::{Error, Result};
use crate::model::{ContractId, Market, Matching};

/// One round: doctors' proposals `Y`, hospitals' choice `Z`, and the
/// cumulative rejected set `R` after the round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub proposed: Vec<ContractId>,
    pub accepted: Vec<ContractId>,
    pub rejected_after: Vec<ContractId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaTrace {
    /// Empty unless trace retention was requested.
    pub rounds: Vec<Round>,
    pub final_matching: Matching,
    pub round_count: usize,
    /// Key comparisons spent by the incremental engine (0 for the reference loop).
    pub comparisons: u64,
}

impl DaTrace {
    pub fn to_json(&self, m: &Market) -> Value {
        let ids = |v: &[ContractId]| v.iter().map(|c| c.0).collect::<Vec<_>>();
        json!({
            "rounds": self.rounds.iter().map(|r| json!({
                "y": ids(&r.proposed),
                "z": ids(&r.accepted),
                "r_after": ids(&r.rejected_after),
            })).collect::<Vec<_>>(),
            "final": self.final_matching.to_raw(m),
            "round_count": self.round_count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DaOptions {
    pub keep_trace: bool,
}

impl DaOptions {
    pub fn traced() -> DaOptions {
        DaOptions { keep_trace: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Naive,
    Heap,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Naive => "naive",
            Engine::Heap => "heap",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "naive" => Ok(Engine::Naive),
            "heap" => Ok(Engine::Heap),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

impl Engine {
    pub fn run(self, m: &Market, mech: &Mechanism, opts: DaOptions) -> Result<(Matching, DaTrace)> {
        match self {
            Engine::Naive => run_da(m, mech, opts),
            Engine::Heap => run_da_incremental(m, mech, opts),
        }
    }
}

/// Reference loop: `Y = Ch_D(X \ R)`, `Z = Ch_H(Y)`, `R ← R ∪ (Y \ Z)` until `Y = Z`.
pub fn run_da(m: &Market, mech: &Mechanism, opts: DaOptions) -> Result<(Matching, DaTrace)> {
    let all: BTreeSet<ContractId> = m.contracts().iter().map(|c| c.id).collect();
    let limit = m.num_contracts() + 1;
    let mut rejected = BTreeSet::new();
    let mut rounds = Vec::new();
    for round in 1.. {
        if round > limit {
            return Err(Error::NonTermination(limit));
        }
        let avail: BTreeSet<ContractId> = all.difference(&rejected).copied().collect();
        let ys = ch_doctors(m, &avail);
        let zs = mech.choose_all(m, &ys)?;
        rejected.extend(ys.difference(&zs).copied());
        if opts.keep_trace {
            rounds.push(Round {
                proposed: ys.iter().copied().collect(),
                accepted: zs.iter().copied().collect(),
                rejected_after: rejected.iter().copied().collect(),
            });
        }
        if ys == zs {
            let matching = Matching::new(m, ys)?;
            let trace = DaTrace { rounds, final_matching: matching.clone(), round_count: round, comparisons: 0 };
            return Ok((matching, trace));
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::ChoiceKind;
    use crate::instances::fixtures;
    use crate::model::{MarketBuilder, Rat, UtilityKind};

    fn solve(f: &fixtures::Fixture, kind: ChoiceKind, engine: Engine) -> (Matching, DaTrace) {
        let mech = Mechanism::uniform(&f.market, kind).unwrap();
        engine.run(&f.market, &mech, DaOptions::traced()).unwrap()
    }

    #[test]
    fn example2_golden() {
        let f = fixtures::example2();
        for engine in [Engine::Naive, Engine::Heap] {
            let (x, trace) = solve(&f, ChoiceKind::GreedyCapped, engine);
            assert_eq!(Some(x.contracts().to_vec()), f.expected.matching);
            assert_eq!(Some(trace.rounds[0].accepted.clone()), f.expected.round1_accepted);
        }
    }

    #[test]
    fn example3_golden() {
        let f = fixtures::example3();
        for engine in [Engine::Naive, Engine::Heap] {
            let (x, _) = solve(&f, ChoiceKind::GreedyBudget, engine);
            assert_eq!(Some(x.contracts().to_vec()), f.expected.matching);
        }
    }

    #[test]
    fn doctoropt_both_greedy_rules() {
        let f = fixtures::doctoropt();
        for kind in [ChoiceKind::GreedyCapped, ChoiceKind::GreedyBudget] {
            let (x, _) = solve(&f, kind, Engine::Naive);
            assert_eq!(Some(x.contracts().to_vec()), f.expected.matching, "{kind}");
        }
    }

    #[test]
    fn empty_market_one_round() {
        let mut b = MarketBuilder::new();
        b.doctor("d").hospital("h", Rat::ONE, UtilityKind::General);
        let m = b.build().unwrap();
        let mech = Mechanism::uniform(&m, ChoiceKind::GreedyBudget).unwrap();
        for engine in [Engine::Naive, Engine::Heap] {
            let (x, t) = engine.run(&m, &mech, DaOptions::traced()).unwrap();
            assert!(x.is_empty());
            assert_eq!(t.round_count, 1);
        }
    }

    #[test]
    fn trace_invariants_example2() {
        let f = fixtures::example2();
        let (_, t) = solve(&f, ChoiceKind::GreedyCapped, Engine::Naive);
        assert!(t.round_count <= f.market.num_contracts() + 1);
        let last = t.rounds.last().unwrap();
        assert_eq!(last.proposed, last.accepted);
        for w in t.rounds.windows(2) {
            let prev: BTreeSet<_> = w[0].rejected_after.iter().collect();
            let next: BTreeSet<_> = w[1].rejected_after.iter().collect();
            assert!(prev.is_subset(&next));
        }
    }

    #[test]
    fn engine_names() {
        assert_eq!("heap".parse::<Engine>().unwrap(), Engine::Heap);
        assert_eq!(Engine::Naive.to_string(), "naive");
        assert!("fast".parse::<Engine>().is_err());
    }

    #[test]
    fn exact_kind_rejected_by_incremental_engine() {
        let f = fixtures::example1();
        let mech = Mechanism::uniform(&f.market, ChoiceKind::Exact).unwrap();
        assert!(matches!(
            run_da_incremental(&f.market, &mech, DaOptions::default()),
            Err(Error::UnsupportedKind(ChoiceKind::Exact))
        ));
        assert!(run_da(&f.market, &mech, DaOptions::default()).is_ok());
    }
}
