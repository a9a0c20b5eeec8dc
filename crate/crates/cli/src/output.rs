use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use budget_match::model::{ContractId, Market, Rat};

const DECIMAL_PLACES: u32 = 6;

/// Renders numbers for reports: exact `p/q` strings unless `--decimal` is set.
#[derive(Debug, Clone, Copy)]
pub struct Fmt {
    pub decimal: bool,
}

impl Fmt {
    pub fn rat(&self, r: Rat) -> Value {
        Value::String(self.rat_str(r))
    }

    pub fn rat_str(&self, r: Rat) -> String {
        if self.decimal {
            r.to_decimal_string(DECIMAL_PLACES)
        } else {
            r.to_string()
        }
    }

    pub fn rats(&self, v: &[Rat]) -> Value {
        v.iter().map(|&r| self.rat(r)).collect()
    }
}

/// Contract ids alongside readable `(d,h,w)` labels.
pub fn contracts(m: &Market, xs: &[ContractId]) -> Value {
    json!({
        "ids": xs.iter().map(|c| c.0).collect::<Vec<_>>(),
        "labels": xs.iter().map(|&c| m.label(c)).collect::<Vec<_>>(),
    })
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let r = out.write_all(text.as_bytes()).and_then(|_| match text.ends_with('\n') {
                true => Ok(()),
                false => out.write_all(b"\n"),
            });
            match r {
                // A reader such as `head` closing early is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

pub fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(v)?)
}
