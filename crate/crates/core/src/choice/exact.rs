//! Exact knapsack choice: the utility-maximizing subset within budget,
//! found by depth-first branch and bound with a fractional upper bound.

use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::model::{ContractId, HospitalId, Market, Rat};

pub const DEFAULT_ORACLE_CAP: usize = 22;

#[derive(Clone, Copy)]
struct Item {
    wage: Rat,
    utility: Rat,
}

struct Search<'a> {
    items: &'a [Item],
    best: Rat,
}

impl Search<'_> {
    /// Dantzig bound: fill greedily by ratio, take a fraction of the first misfit.
    fn bound(&self, from: usize, mut room: Rat) -> Rat {
        let mut value = Rat::ZERO;
        for it in &self.items[from..] {
            if it.wage <= room {
                room -= it.wage;
                value += it.utility;
            } else {
                return value + it.utility * room / it.wage;
            }
        }
        value
    }

    fn dfs(&mut self, i: usize, room: Rat, value: Rat) {
        if value > self.best {
            self.best = value;
        }
        if i == self.items.len() || value + self.bound(i, room) <= self.best {
            return;
        }
        let it = self.items[i];
        if it.wage <= room {
            self.dfs(i + 1, room - it.wage, value + it.utility);
        }
        self.dfs(i + 1, room, value);
    }
}

/// Maximum total utility of a subset of `xs` with total wage at most `capacity`.
pub fn knapsack_value(m: &Market, xs: &[ContractId], capacity: Rat) -> Rat {
    let mut items: Vec<Item> = xs.iter().map(|&x| Item { wage: m.wage(x), utility: m.utility(x) }).collect();
    items.sort_by_key(|it| Reverse(it.utility / it.wage));
    let mut s = Search { items: &items, best: Rat::ZERO };
    if capacity >= Rat::ZERO {
        s.dfs(0, capacity, Rat::ZERO);
    }
    s.best
}

/// `Ch*_h(xs)`: a maximum-utility subset with total wage `<= B_h`. Among
/// optima, the lexicographically smallest ascending id sequence.
pub fn ch_exact(m: &Market, h: HospitalId, xs: &[ContractId], cap: usize) -> Result<Vec<ContractId>> {
    if xs.len() > cap {
        return Err(Error::cap("exact choice", xs.len() as u128, cap as u128));
    }
    let mut pool = xs.to_vec();
    pool.sort_unstable();
    pool.dedup();

    let mut room = m.budget(h);
    let mut needed = knapsack_value(m, &pool, room);
    let mut out = Vec::new();
    let mut start = 0;
    // Fix elements one by one: the smallest id that still admits an optimal completion.
    while needed > Rat::ZERO {
        let pick = (start..pool.len()).find(|&i| {
            let x = pool[i];
            m.wage(x) <= room && m.utility(x) + knapsack_value(m, &pool[i + 1..], room - m.wage(x)) == needed
        });
        let i = pick.expect("optimum must be reconstructible");
        let x = pool[i];
        out.push(x);
        needed -= m.utility(x);
        room -= m.wage(x);
        start = i + 1;
    }
    Ok(out)
}
