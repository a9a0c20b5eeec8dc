//! Global settings: command-line flags, then a TOML config file on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use budget_match::choice::ChoiceKind;
use budget_match::engine::Engine;
use budget_match::instances::RandomParams;

use crate::GlobalOpts;

/// Keys accepted in a `--config` file. Any key present wins over the flag.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    oracle_cap: Option<usize>,
    enum_cap: Option<u64>,
    misreport_cap: Option<usize>,
    pool_cap: Option<usize>,
    property_cap: Option<usize>,
    seed: Option<u64>,
    decimal: Option<bool>,
    trace: Option<bool>,
    mechanism: Option<String>,
    engine: Option<String>,
    market: Option<PathBuf>,
    fixture: Option<String>,
    /// Random-family parameters, same keys as the generator's.
    random: Option<toml::Table>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub oracle_cap: usize,
    pub enum_cap: u128,
    pub misreport_cap: usize,
    pub pool_cap: usize,
    pub property_cap: usize,
    pub seed: u64,
    pub decimal: bool,
    pub trace: bool,
    pub mechanism: Option<ChoiceKind>,
    pub engine: Option<Engine>,
    pub market: Option<PathBuf>,
    pub fixture: Option<String>,
    random: Option<toml::Table>,
}

impl Settings {
    pub fn load(g: &GlobalOpts) -> Result<Settings> {
        let mut s = Settings {
            oracle_cap: g.oracle_cap,
            enum_cap: g.enum_cap,
            misreport_cap: g.misreport_cap,
            pool_cap: g.pool_cap,
            property_cap: g.property_cap,
            seed: g.seed,
            decimal: g.decimal,
            trace: g.trace,
            mechanism: None,
            engine: None,
            market: None,
            fixture: None,
            random: None,
        };
        if let Some(path) = &g.config {
            s.apply(path)?;
        }
        s.validate()?;
        Ok(s)
    }

    fn apply(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let c: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = c.$f { self.$f = v; })* };
        }
        take!(oracle_cap, misreport_cap, pool_cap, property_cap, seed, decimal, trace);
        if let Some(v) = c.enum_cap {
            self.enum_cap = v.into();
        }
        if let Some(k) = c.mechanism {
            self.mechanism = Some(k.parse()?);
        }
        if let Some(e) = c.engine {
            self.engine = Some(e.parse()?);
        }
        // Relative market paths are taken from the config file's directory.
        self.market = c.market.map(|p| dir.join(p));
        self.fixture = c.fixture;
        self.random = c.random;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.oracle_cap == 0
            || self.enum_cap == 0
            || self.misreport_cap == 0
            || self.pool_cap == 0
            || self.property_cap == 0
        {
            bail!("caps must be positive");
        }
        Ok(())
    }

    /// Overlays the config file's `[random]` table on `p`.
    pub fn overlay_random(&self, p: RandomParams) -> Result<RandomParams> {
        let Some(extra) = &self.random else { return Ok(p) };
        let mut v = serde_json::to_value(&p).context("encoding random parameters")?;
        let fields = v.as_object_mut().expect("parameters encode as an object");
        for (k, val) in extra {
            fields.insert(k.clone(), serde_json::to_value(val)?);
        }
        serde_json::from_value(v).context("config [random] table")
    }
}
