//! Adversarial market families.

use crate::error::{Error, Result};
use crate::model::{ContractId, Market, MarketBuilder, Rat, UtilityKind};

/// The market with `m²` doctors and `m` unit-budget hospitals that has no
/// stable matching under any budgets between `B_h` and `(1+α)·B_h`, while
/// every wage is at most `β·B_h`.
///
/// Requires `0 < α < β < 1` and `m > 1/(β−α) + 1/(1−β)`.
pub fn gen_theorem1(m: usize, alpha: Rat, beta: Rat) -> Result<Market> {
    if !(Rat::ZERO < alpha && alpha < beta && beta < Rat::ONE) {
        return Err(Error::InvalidParameters(format!("need 0 < alpha < beta < 1, got alpha={alpha}, beta={beta}")));
    }
    let threshold = Rat::ONE / (beta - alpha) + Rat::ONE / (Rat::ONE - beta);
    if m < 2 || Rat::int(m as i128) <= threshold {
        return Err(Error::InvalidParameters(format!("need m > {threshold}, got m={m}")));
    }
    let mi = m as i128;
    let small = Rat::new(1, mi);
    let mid = (Rat::ONE - beta) / Rat::int(mi - 1);
    let hm = format!("h{m}");

    let mut b = MarketBuilder::new();
    b.doctor("d*");
    for i in 1..m {
        for j in 0..=m {
            b.doctor(format!("d{i}^{j}"));
        }
    }
    for i in 1..=m {
        b.hospital(format!("h{i}"), Rat::ONE, UtilityKind::General);
    }

    let star = b.contract("d*", &hm, beta, Rat::ONE);
    b.prefs("d*", &[star]);
    for i in 1..m {
        let hi = format!("h{i}");
        let ii = i as i32;
        let d0 = format!("d{i}^0");
        let a = b.contract(&d0, &hm, small, Rat::pow2(-ii));
        let c = b.contract(&d0, &hi, beta, Rat::pow2(m as i32));
        b.prefs(&d0, &[a, c]);
        for j in 1..m {
            let dj = format!("d{i}^{j}");
            let x = b.contract(&dj, &hi, mid, Rat::pow2((m - j) as i32));
            b.prefs(&dj, &[x]);
        }
        let dm = format!("d{i}^{m}");
        let p = b.contract(&dm, &hi, beta, Rat::ONE);
        let q = b.contract(&dm, &hm, small, Rat::pow2((m - i) as i32));
        b.prefs(&dm, &[p, q]);
    }
    b.build()
}

/// One hospital with `k = ⌊B/w̲⌋` contracts at wage `w̲` (utility `w̲`)
/// followed by `k` at wage `w̄` (utility `2·w̄`), one doctor per contract.
pub fn gen_theorem4(w_low: Rat, w_high: Rat, budget: Rat) -> Result<Market> {
    if !(Rat::ZERO < w_low && w_low <= w_high && w_high <= budget) {
        return Err(Error::InvalidParameters(format!(
            "need 0 < w_low <= w_high <= budget, got {w_low}, {w_high}, {budget}"
        )));
    }
    let k = (budget / w_low).floor() as usize;
    let mut b = MarketBuilder::new();
    b.hospital("h", budget, UtilityKind::General);
    for i in 1..=2 * k {
        let d = format!("d{i}");
        b.doctor(d.clone());
        let (w, u) = if i <= k { (w_low, w_low) } else { (w_high, w_high * Rat::int(2)) };
        let x: ContractId = b.contract(&d, "h", w, u);
        b.prefs(&d, &[x]);
    }
    b.build()
}

/// `w̄·(B−w̄)/w̲`, the wage any LAD and COM choice must exceed on the
/// [`gen_theorem4`] universe.
pub fn theorem4_threshold(w_low: Rat, w_high: Rat, budget: Rat) -> Rat {
    w_high * (budget - w_high) / w_low
}
