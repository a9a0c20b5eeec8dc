use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use budget_match::choice::{ChoiceKind, Mechanism};
use budget_match::engine::{DaOptions, Engine};
use budget_match::instances::{fixtures, gen_random, gen_theorem1, gen_theorem4, RandomParams, UtilityMode};
use budget_match::model::{Market, Matching, RawMatching};
use budget_match::verify::{
    assignment_count, check_bounds, check_hm_stable, check_property, check_stable, probe_all_doctors,
    probe_strategyproof, search_stable, search_stable_in_range, BudgetProfile, HmViolation, Misreport, Property,
    SearchOutcome, StabilityReport,
};

use crate::config::Settings;
use crate::exit;
use crate::output::{contracts, write_json, Fmt};
use crate::{Family, FamilyArgs, Input, RandomArgs, Utility};

pub struct Loaded {
    pub market: Market,
    /// Mechanism a fixture was published with.
    fixture_kind: Option<ChoiceKind>,
}

pub fn load(s: &Settings, input: &Input) -> Result<Loaded> {
    let (market_path, fixture) = if s.market.is_some() || s.fixture.is_some() {
        (s.market.as_deref(), s.fixture.as_deref())
    } else {
        (input.market.as_deref(), input.fixture.as_deref())
    };
    match (market_path, fixture) {
        (Some(p), None) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading market {}", p.display()))?;
            let market = Market::from_json(&text).with_context(|| format!("loading market {}", p.display()))?;
            Ok(Loaded { market, fixture_kind: None })
        }
        (None, Some(name)) => {
            let f =
                fixtures::by_name(name).with_context(|| format!("known fixtures: {}", fixtures::NAMES.join(", ")))?;
            Ok(Loaded { market: f.market, fixture_kind: f.mechanism })
        }
        (Some(_), Some(_)) => bail!("give either a market file or a fixture, not both"),
        (None, None) => bail!("need --market <file> or --fixture <name>"),
    }
}

/// Explicit choice (config, then flag), then the fixture's own, then per-hospital fields.
pub fn mechanism(s: &Settings, input: &Input, l: &Loaded) -> Result<Mechanism> {
    let kind = s.mechanism.or(input.mechanism).or(l.fixture_kind);
    Ok(Mechanism::resolve(&l.market, kind)?.with_oracle_cap(s.oracle_cap))
}

fn engine(s: &Settings, input: &Input) -> Engine {
    s.engine.or(input.engine).unwrap_or_default()
}

fn kinds_json(m: &Market, mech: &Mechanism) -> Value {
    m.hospitals()
        .map(|h| (m.hospital_name(h).to_string(), json!(mech.kind(h).name())))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn solve(s: &Settings, input: &Input, out: Option<&Path>) -> Result<u8> {
    let l = load(s, input)?;
    let m = &l.market;
    let mech = mechanism(s, input, &l)?;
    let eng = engine(s, input);
    let opts = DaOptions { keep_trace: s.trace };
    let (x, trace) = eng.run(m, &mech, opts)?;
    let f = Fmt { decimal: s.decimal };
    let bounds = check_bounds(m, &mech, &x);
    let hospitals: Vec<Value> = bounds
        .rows
        .iter()
        .map(|r| {
            let h = r.hospital;
            let b = m.budget(h);
            json!({
                "hospital": m.hospital_name(h),
                "mechanism": r.kind.name(),
                "budget": f.rat(b),
                "wage": f.rat(r.wage),
                "implied_budget": f.rat(b.max(r.wage)),
                "violation_ratio": f.rat(r.wage / b),
                "bound": f.rat(r.bound),
                "bound_strict": r.strict,
                "bound_holds": r.holds,
            })
        })
        .collect();
    let mut report = json!({
        "engine": eng.to_string(),
        "mechanism": kinds_json(m, &mech),
        "matching": serde_json::to_value(x.to_raw(m))?,
        "contracts": contracts(m, x.contracts()),
        "rounds": trace.round_count,
        "hospitals": hospitals,
        "bounds_hold": bounds.holds(),
    });
    if eng == Engine::Heap {
        report["comparisons"] = json!(trace.comparisons);
    }
    if s.trace {
        report["trace"] = trace.to_json(m);
    }
    write_json(out, &report)?;
    Ok(exit::OK)
}

fn read_matching(m: &Market, path: &Path) -> Result<Matching> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading matching {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // A `solve` report carries the matching under this key.
    if let Some(inner) = v.get_mut("matching") {
        v = inner.take();
    }
    let raw: RawMatching = serde_json::from_value(v).with_context(|| format!("matching in {}", path.display()))?;
    Ok(Matching::from_raw(m, &raw)?)
}

fn stability_json(m: &Market, r: &StabilityReport, f: Fmt) -> Value {
    json!({
        "budgets": f.rats(&r.budgets),
        "feasible": r.feasible,
        "stable": r.is_stable(),
        "blocking": r.blocking.as_ref().map(|b| json!({
            "hospital": m.hospital_name(b.hospital),
            "coalition": contracts(m, &b.coalition),
        })),
        "implied_budgets": f.rats(&r.implied_budget),
        "violation_ratios": f.rats(&r.violation_ratio),
        "max_violation_ratio": f.rat(r.max_violation_ratio()),
    })
}

fn hm_json(m: &Market, w: &HmViolation) -> Value {
    match w {
        HmViolation::DoctorRejects { contract } => {
            json!({"condition": "doctor-rejects", "contract": contracts(m, &[*contract])})
        }
        HmViolation::HospitalRejects { hospital, chosen } => json!({
            "condition": "hospital-rejects",
            "hospital": m.hospital_name(*hospital),
            "chosen": contracts(m, chosen),
        }),
        HmViolation::Blocking { hospital, coalition } => json!({
            "condition": "blocking",
            "hospital": m.hospital_name(*hospital),
            "coalition": contracts(m, coalition),
        }),
    }
}

pub fn verify(
    s: &Settings,
    input: &Input,
    matching: Option<&Path>,
    budgets: &BudgetProfile,
    out: Option<&Path>,
) -> Result<u8> {
    let l = load(s, input)?;
    let m = &l.market;
    let mech = mechanism(s, input, &l);
    let x = match matching {
        Some(p) => read_matching(m, p)?,
        None => {
            let mech = mech.as_ref().map_err(|e| anyhow!("no matching given and no mechanism to solve with: {e}"))?;
            engine(s, input).run(m, mech, DaOptions::default())?.0
        }
    };
    let f = Fmt { decimal: s.decimal };
    let b = budgets.resolve(m, &x)?;
    let st = check_stable(m, &x, &b, s.pool_cap)?;
    let mut report = json!({
        "matching": serde_json::to_value(x.to_raw(m))?,
        "contracts": contracts(m, x.contracts()),
        "profile": budgets.to_string(),
        "stability": stability_json(m, &st, f),
    });
    let mut ok = st.is_stable();
    if let Ok(mech) = &mech {
        let hm = check_hm_stable(m, mech, &x, s.pool_cap)?;
        report["fixed_point"] = json!({
            "mechanism": kinds_json(m, mech),
            "holds": hm.holds(),
            "witness": hm.witness.as_ref().map(|w| hm_json(m, w)),
        });
        ok &= hm.holds();
    }
    write_json(out, &report)?;
    Ok(if ok { exit::OK } else { exit::WITNESS })
}

pub fn props(
    s: &Settings,
    input: &Input,
    hospital: Option<&str>,
    properties: &[Property],
    out: Option<&Path>,
) -> Result<u8> {
    let l = load(s, input)?;
    let m = &l.market;
    let mech = mechanism(s, input, &l)?;
    let hospitals: Vec<_> = match hospital {
        Some(name) => vec![m.hospital_by_name(name).ok_or_else(|| anyhow!("unknown hospital {name:?}"))?],
        None => m.hospitals().collect(),
    };
    let props: &[Property] = if properties.is_empty() { &Property::ALL } else { properties };
    let mut all_hold = true;
    let mut rows = Vec::new();
    for h in hospitals {
        let kind = mech.kind(h);
        let mut results = Vec::new();
        for &p in props {
            let r = check_property(m, h, kind, p, s.property_cap, s.oracle_cap)?;
            all_hold &= r.holds;
            results.push(json!({
                "property": p.name(),
                "holds": r.holds,
                "cases_checked": r.cases_checked,
                "witness": r.witness.as_ref().map(|w| json!({
                    "smaller": contracts(m, &w.smaller),
                    "larger": contracts(m, &w.larger),
                })),
            }));
        }
        rows.push(json!({
            "hospital": m.hospital_name(h),
            "mechanism": kind.name(),
            "contracts": m.hospital_contracts(h).len(),
            "results": results,
        }));
    }
    write_json(out, &json!({ "hospitals": rows, "all_hold": all_hold }))?;
    Ok(if all_hold { exit::OK } else { exit::WITNESS })
}

fn misreport_json(m: &Market, r: &Misreport) -> Value {
    json!({
        "doctor": m.doctor_name(r.doctor),
        "report": contracts(m, &r.report),
        "truthful_outcome": contracts(m, &r.truthful),
        "manipulated_outcome": contracts(m, &r.manipulated),
    })
}

pub fn probe_sp(s: &Settings, input: &Input, doctor: Option<&str>, out: Option<&Path>) -> Result<u8> {
    let l = load(s, input)?;
    let m = &l.market;
    let mech = mechanism(s, input, &l)?;
    let found = match doctor {
        Some(name) => {
            let d = m.doctor_by_name(name).ok_or_else(|| anyhow!("unknown doctor {name:?}"))?;
            probe_strategyproof(m, &mech, d, s.misreport_cap)?
        }
        None => probe_all_doctors(m, &mech, s.misreport_cap)?,
    };
    write_json(
        out,
        &json!({
            "mechanism": kinds_json(m, &mech),
            "manipulable": found.is_some(),
            "misreport": found.as_ref().map(|r| misreport_json(m, r)),
        }),
    )?;
    Ok(if found.is_some() { exit::WITNESS } else { exit::OK })
}

pub fn exists(
    s: &Settings,
    input: &Input,
    budgets: &BudgetProfile,
    inflate: Option<&BudgetProfile>,
    deadline_secs: Option<u64>,
    out: Option<&Path>,
) -> Result<u8> {
    let l = load(s, input)?;
    let m = &l.market;
    if *budgets == BudgetProfile::Implied {
        bail!("implied budgets depend on a matching; use given, x<factor>, or a list");
    }
    let empty = Matching::empty(m);
    let b = budgets.resolve(m, &empty)?;
    let candidates = assignment_count(m);
    let deadline = deadline_secs.map(|t| Instant::now() + Duration::from_secs(t));
    if deadline.is_none() && candidates > s.enum_cap {
        return Err(budget_match::Error::CapExceeded {
            what: "matching enumeration",
            size: candidates,
            cap: s.enum_cap,
        }
        .into());
    }
    let f = Fmt { decimal: s.decimal };
    let (mode, upper, (outcome, stats)) = match inflate {
        Some(up) => {
            let upper = up.resolve(m, &empty)?;
            // The lower end of the range is the market's own budgets.
            let lower = m.with_budgets(&b)?;
            let r = search_stable_in_range(&lower, &upper, s.pool_cap, deadline)?;
            ("range", Some(upper), r)
        }
        None => ("fixed", None, search_stable(m, &b, s.pool_cap, deadline)?),
    };
    let (verdict, matching, code) = match &outcome {
        SearchOutcome::Found(x) => ("found", Some(x), exit::OK),
        SearchOutcome::NoneExists => ("none", None, exit::WITNESS),
        SearchOutcome::Inconclusive => ("inconclusive", None, exit::INPUT),
    };
    write_json(
        out,
        &json!({
            "mode": mode,
            "budgets": f.rats(&b),
            "upper_budgets": upper.as_ref().map(|u| f.rats(u)),
            "verdict": verdict,
            "matching": matching.map(|x| serde_json::to_value(x.to_raw(m))).transpose()?,
            "contracts": matching.map(|x| contracts(m, x.contracts())),
            "candidates": candidates.to_string(),
            "nodes": stats.nodes,
            "elapsed_ms": stats.elapsed_ms as u64,
        }),
    )?;
    if code == exit::INPUT {
        eprintln!("error: search did not finish before the deadline");
    }
    Ok(code)
}

pub fn random_params(s: &Settings, a: &RandomArgs, seed: u64) -> Result<RandomParams> {
    let mut p = RandomParams { seed, ..RandomParams::default() };
    macro_rules! set {
        ($($arg:ident => $field:ident),*) => { $(if let Some(v) = a.$arg { p.$field = v; })* };
    }
    set!(doctors => doctors, hospitals => hospitals, min_contracts => min_contracts_per_doctor,
         max_contracts => max_contracts_per_doctor, wage_min => wage_min, wage_max => wage_max,
         budget_max => budget_max, max_denominator => max_denominator, truncate => truncate_prob);
    if a.max_per_hospital.is_some() {
        p.max_contracts_per_hospital = a.max_per_hospital;
    }
    if let Some(u) = a.utility {
        p.utility = match u {
            Utility::General => UtilityMode::General,
            Utility::Proportional => UtilityMode::Proportional,
            Utility::Uniform => UtilityMode::Uniform,
        };
    }
    if a.allow_ties {
        p.distinct_keys = false;
    }
    let mut p = s.overlay_random(p)?;
    p.seed = seed;
    Ok(p)
}

pub fn gen(s: &Settings, family: Family, a: &FamilyArgs, out: Option<&Path>) -> Result<u8> {
    let m = match family {
        Family::Theorem1 => gen_theorem1(a.m, a.alpha, a.beta)?,
        Family::Theorem4 => gen_theorem4(a.w_low, a.w_high, a.budget)?,
        Family::Random => gen_random(&random_params(s, &a.random, s.seed)?)?,
    };
    crate::output::write_text(out, &m.to_json())?;
    Ok(exit::OK)
}
