use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

use budget_match::choice::{ChoiceKind, Mechanism};
use budget_match::engine::{DaOptions, Engine};
use budget_match::instances::gen_random;
use budget_match::model::Market;
use budget_match::verify::{check_bounds, check_stable, implied_budgets};
use budget_match::Error;

use crate::commands::random_params;
use crate::config::Settings;
use crate::exit;
use crate::output::{write_text, Fmt};
use crate::RandomArgs;

const HEADER: [&str; 11] = [
    "seed",
    "mechanism",
    "status",
    "doctors",
    "hospitals",
    "contracts",
    "rounds",
    "max_violation_ratio",
    "stable",
    "bound_holds",
    "wall_ms",
];

struct Row {
    seed: u64,
    kind: String,
    status: String,
    size: (usize, usize, usize),
    rounds: Option<usize>,
    ratio: Option<String>,
    stable: Option<bool>,
    bound: Option<bool>,
    wall_ms: u128,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.seed.to_string(),
            self.kind.clone(),
            self.status.clone(),
            self.size.0.to_string(),
            self.size.1.to_string(),
            self.size.2.to_string(),
            opt(self.rounds.map(|r| r.to_string())),
            opt(self.ratio.clone()),
            opt(self.stable.map(|b| b.to_string())),
            opt(self.bound.map(|b| b.to_string())),
            self.wall_ms.to_string(),
        ]
    }

    fn failed(&self) -> bool {
        self.stable == Some(false) || self.bound == Some(false)
    }
}

fn status_of(e: &Error) -> String {
    match e {
        Error::CapExceeded { .. } => "cap-exceeded".into(),
        Error::NonTermination(_) => "guard".into(),
        Error::IncompatibleMechanism { .. } => "incompatible".into(),
        _ => format!("error: {e}"),
    }
}

fn one(s: &Settings, m: &Market, seed: u64, kind: ChoiceKind, engine: Engine, f: Fmt) -> Row {
    let start = Instant::now();
    let mut row = Row {
        seed,
        kind: kind.name().into(),
        status: "ok".into(),
        size: (m.num_doctors(), m.num_hospitals(), m.num_contracts()),
        rounds: None,
        ratio: None,
        stable: None,
        bound: None,
        wall_ms: 0,
    };
    let result = (|| -> Result<(), Error> {
        let mech = Mechanism::uniform(m, kind)?.with_oracle_cap(s.oracle_cap);
        let (x, trace) = engine.run(m, &mech, DaOptions::default())?;
        row.rounds = Some(trace.round_count);
        row.bound = Some(check_bounds(m, &mech, &x).holds());
        let st = check_stable(m, &x, &implied_budgets(m, &x), s.pool_cap)?;
        row.ratio = Some(f.rat_str(st.max_violation_ratio()));
        row.stable = Some(st.is_stable());
        Ok(())
    })();
    if let Err(e) = result {
        row.status = status_of(&e);
    }
    row.wall_ms = start.elapsed().as_millis();
    row
}

pub fn run(
    s: &Settings,
    seeds: u64,
    kinds: &[ChoiceKind],
    engine: Option<Engine>,
    threads: Option<usize>,
    random: &RandomArgs,
    out: Option<&Path>,
) -> Result<u8> {
    let engine = s.engine.or(engine).unwrap_or_default();
    let f = Fmt { decimal: s.decimal };
    let params: Vec<_> = (0..seeds).map(|i| random_params(s, random, s.seed + i)).collect::<Result<_>>()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let per_seed: Vec<Result<Vec<Row>>> = pool.install(|| {
        params
            .par_iter()
            .map(|p| {
                let m = gen_random(p)?;
                let chosen: Vec<ChoiceKind> = if kinds.is_empty() {
                    ChoiceKind::ALL
                        .into_iter()
                        .filter(|&k| {
                            k != ChoiceKind::Exact && m.hospitals().all(|h| k.supports(&m.spec(h).utility_kind))
                        })
                        .collect()
                } else {
                    kinds.to_vec()
                };
                Ok(chosen.into_iter().map(|k| one(s, &m, p.seed, k, engine, f)).collect())
            })
            .collect()
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    let (mut failed, mut partial) = (false, false);
    for rows in per_seed {
        for r in rows? {
            failed |= r.failed();
            partial |= r.status != "ok";
            w.write_record(r.record())?;
        }
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    write_text(out, &String::from_utf8(bytes)?)?;
    Ok(if failed {
        exit::WITNESS
    } else if partial {
        exit::INPUT
    } else {
        exit::OK
    })
}
