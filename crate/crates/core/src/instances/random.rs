//! Seeded random markets.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Market, MarketBuilder, Rat, UtilityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityMode {
    #[default]
    General,
    Proportional,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomParams {
    pub seed: u64,
    pub doctors: usize,
    pub hospitals: usize,
    /// Inclusive range of contracts per doctor.
    pub min_contracts_per_doctor: usize,
    pub max_contracts_per_doctor: usize,
    /// No hospital receives more contracts than this.
    pub max_contracts_per_hospital: Option<usize>,
    pub wage_min: Rat,
    pub wage_max: Rat,
    /// Budgets are drawn from `[wage_max, budget_max]`.
    pub budget_max: Rat,
    /// Largest denominator of drawn wages, budgets and utilities.
    pub max_denominator: i128,
    pub utility: UtilityMode,
    /// Make ranking keys pairwise distinct within each hospital: utility per
    /// wage for general utilities, wages otherwise.
    pub distinct_keys: bool,
    /// Chance that a doctor's list is cut short, leaving some contracts unacceptable.
    pub truncate_prob: f64,
}

impl Default for RandomParams {
    fn default() -> RandomParams {
        RandomParams {
            seed: 0,
            doctors: 6,
            hospitals: 2,
            min_contracts_per_doctor: 1,
            max_contracts_per_doctor: 3,
            max_contracts_per_hospital: None,
            wage_min: Rat::ONE,
            wage_max: Rat::int(10),
            budget_max: Rat::int(25),
            max_denominator: 4,
            utility: UtilityMode::General,
            distinct_keys: true,
            truncate_prob: 0.0,
        }
    }
}

const RETRIES: usize = 1000;

fn draw(rng: &mut ChaCha8Rng, lo: Rat, hi: Rat, max_den: i128) -> Rat {
    loop {
        let q = rng.gen_range(1..=max_den);
        let a = (lo * Rat::int(q)).ceil();
        let b = (hi * Rat::int(q)).floor();
        if a <= b {
            return Rat::new(rng.gen_range(a..=b), q);
        }
    }
}

impl RandomParams {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameters(msg.to_string()));
        if self.doctors == 0 || self.hospitals == 0 {
            return bad("need at least one doctor and one hospital");
        }
        if self.min_contracts_per_doctor > self.max_contracts_per_doctor {
            return bad("min contracts per doctor exceeds max");
        }
        if !(Rat::ZERO < self.wage_min && self.wage_min <= self.wage_max && self.wage_max <= self.budget_max) {
            return bad("need 0 < wage_min <= wage_max <= budget_max");
        }
        if self.max_denominator < 1 {
            return bad("max_denominator must be positive");
        }
        if !(0.0..=1.0).contains(&self.truncate_prob) {
            return bad("truncate_prob must lie in [0, 1]");
        }
        Ok(())
    }
}

struct Slot {
    doctor: usize,
    hospital: usize,
    wage: Rat,
    utility: Rat,
}

/// A reproducible market drawn from `p`.
pub fn gen_random(p: &RandomParams) -> Result<Market> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let den = p.max_denominator;

    let mut kinds = Vec::with_capacity(p.hospitals);
    let mut budgets = Vec::with_capacity(p.hospitals);
    for _ in 0..p.hospitals {
        budgets.push(draw(&mut rng, p.wage_max, p.budget_max, den));
        let gamma = draw(&mut rng, Rat::ONE, Rat::int(5), den);
        kinds.push(match p.utility {
            UtilityMode::General => UtilityKind::General,
            UtilityMode::Proportional => UtilityKind::Proportional(gamma),
            UtilityMode::Uniform => UtilityKind::Uniform(gamma),
        });
    }

    let mut load = vec![0usize; p.hospitals];
    let mut keys: Vec<BTreeSet<Rat>> = vec![BTreeSet::new(); p.hospitals];
    let mut triples: BTreeSet<(usize, usize, Rat)> = BTreeSet::new();
    let mut slots = Vec::new();
    for d in 0..p.doctors {
        let n = rng.gen_range(p.min_contracts_per_doctor..=p.max_contracts_per_doctor);
        for _ in 0..n {
            let open: Vec<usize> =
                (0..p.hospitals).filter(|&h| p.max_contracts_per_hospital.is_none_or(|c| load[h] < c)).collect();
            let Some(&h) = open.choose(&mut rng) else { break };
            let mut placed = false;
            for _ in 0..RETRIES {
                let wage = draw(&mut rng, p.wage_min, p.wage_max, den);
                let utility = match kinds[h] {
                    UtilityKind::General => draw(&mut rng, Rat::ONE, Rat::int(20), den),
                    UtilityKind::Proportional(g) => g * wage,
                    UtilityKind::Uniform(g) => g,
                };
                let key = match kinds[h] {
                    UtilityKind::General => utility / wage,
                    _ => wage,
                };
                if triples.contains(&(d, h, wage)) || (p.distinct_keys && keys[h].contains(&key)) {
                    continue;
                }
                triples.insert((d, h, wage));
                keys[h].insert(key);
                slots.push(Slot { doctor: d, hospital: h, wage, utility });
                load[h] += 1;
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::InvalidParameters(format!(
                    "could not draw a distinct contract for hospital h{} after {RETRIES} tries",
                    h + 1
                )));
            }
        }
    }
    // Contract ids should not follow doctor order.
    slots.shuffle(&mut rng);

    let mut b = MarketBuilder::new();
    for d in 0..p.doctors {
        b.doctor(format!("d{}", d + 1));
    }
    for h in 0..p.hospitals {
        b.hospital(format!("h{}", h + 1), budgets[h], kinds[h]);
    }
    let mut by_doctor = vec![Vec::new(); p.doctors];
    for s in &slots {
        let id = b.contract(&format!("d{}", s.doctor + 1), &format!("h{}", s.hospital + 1), s.wage, s.utility);
        by_doctor[s.doctor].push(id);
    }
    for (d, mut list) in by_doctor.into_iter().enumerate() {
        list.shuffle(&mut rng);
        if !list.is_empty() && rng.gen_bool(p.truncate_prob) {
            let keep = rng.gen_range(0..list.len());
            list.truncate(keep);
        }
        b.prefs(&format!("d{}", d + 1), &list);
    }
    b.build()
}

/// A single hospital with `n` doctors holding one contract each.
pub fn gen_universe(seed: u64, n: usize, utility: UtilityMode) -> Result<Market> {
    gen_random(&RandomParams {
        seed,
        doctors: n,
        hospitals: 1,
        min_contracts_per_doctor: 1,
        max_contracts_per_doctor: 1,
        utility,
        ..RandomParams::default()
    })
}
