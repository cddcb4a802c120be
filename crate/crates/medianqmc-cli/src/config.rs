//! Flat TOML config for the experiment subcommand. Every key is optional;
//! command-line flags override file values, and both override the built-in
//! default grid.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use toml::{Table, Value};

use crate::experiment::{ExperimentGrid, ExperimentScheme};

/// One layer of grid settings; `None` means "defer to the layer below".
#[derive(Clone, Debug, Default)]
pub struct GridOverrides {
    pub master_seed: Option<u64>,
    pub s_list: Option<Vec<u32>>,
    pub gamma_list: Option<Vec<f64>>,
    pub alpha_list: Option<Vec<u32>>,
    pub m_min: Option<u32>,
    pub m_max: Option<u32>,
    pub r: Option<u32>,
    pub schemes: Option<Vec<ExperimentScheme>>,
    pub budget: Option<u128>,
    pub include_extended: Option<bool>,
    pub threads: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

impl GridOverrides {
    /// Layer `self` on top of `base`: any setting present here wins.
    pub fn over(self, base: GridOverrides) -> GridOverrides {
        GridOverrides {
            master_seed: self.master_seed.or(base.master_seed),
            s_list: self.s_list.or(base.s_list),
            gamma_list: self.gamma_list.or(base.gamma_list),
            alpha_list: self.alpha_list.or(base.alpha_list),
            m_min: self.m_min.or(base.m_min),
            m_max: self.m_max.or(base.m_max),
            r: self.r.or(base.r),
            schemes: self.schemes.or(base.schemes),
            budget: self.budget.or(base.budget),
            include_extended: self.include_extended.or(base.include_extended),
            threads: self.threads.or(base.threads),
            out_csv: self.out_csv.or(base.out_csv),
            out_svg: self.out_svg.or(base.out_svg),
        }
    }

    pub fn apply(&self, grid: &mut ExperimentGrid) {
        if let Some(v) = self.master_seed {
            grid.master_seed = v;
        }
        if let Some(v) = &self.s_list {
            grid.s_list = v.clone();
        }
        if let Some(v) = &self.gamma_list {
            grid.gamma_list = v.clone();
        }
        if let Some(v) = &self.alpha_list {
            grid.alpha_list = v.clone();
        }
        if let Some(v) = self.m_min {
            grid.m_min = v;
        }
        if let Some(v) = self.m_max {
            grid.m_max = v;
        }
        if let Some(v) = self.r {
            grid.r = v;
        }
        if let Some(v) = &self.schemes {
            grid.schemes = v.clone();
        }
        if let Some(v) = self.budget {
            grid.budget = v;
        }
        if let Some(v) = self.include_extended {
            grid.include_extended = v;
        }
    }
}

fn expect_u64(key: &str, value: &Value) -> Result<u64> {
    match value.as_integer() {
        Some(i) if i >= 0 => Ok(i as u64),
        _ => bail!("key {key:?}: expected a nonnegative integer, found {value}"),
    }
}

fn expect_u32(key: &str, value: &Value) -> Result<u32> {
    let v = expect_u64(key, value)?;
    u32::try_from(v).with_context(|| format!("key {key:?}: {v} is out of range"))
}

fn expect_f64(key: &str, value: &Value) -> Result<f64> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => bail!("key {key:?}: expected a number, found {other}"),
    }
}

fn expect_array<'v>(key: &str, value: &'v Value) -> Result<&'v Vec<Value>> {
    match value.as_array() {
        Some(items) if !items.is_empty() => Ok(items),
        Some(_) => bail!("key {key:?}: list must not be empty"),
        None => bail!("key {key:?}: expected a list, found {value}"),
    }
}

pub fn parse_config(text: &str) -> Result<GridOverrides> {
    let table: Table = text.parse().context("not valid TOML")?;
    let mut out = GridOverrides::default();
    for (key, value) in &table {
        match key.as_str() {
            "seed" | "master_seed" => out.master_seed = Some(expect_u64(key, value)?),
            "s" => {
                out.s_list = Some(
                    expect_array(key, value)?
                        .iter()
                        .map(|v| expect_u32(key, v))
                        .collect::<Result<_>>()?,
                )
            }
            "gamma" => {
                out.gamma_list = Some(
                    expect_array(key, value)?
                        .iter()
                        .map(|v| expect_f64(key, v))
                        .collect::<Result<_>>()?,
                )
            }
            "alpha" => {
                out.alpha_list = Some(
                    expect_array(key, value)?
                        .iter()
                        .map(|v| expect_u32(key, v))
                        .collect::<Result<_>>()?,
                )
            }
            "m_min" => out.m_min = Some(expect_u32(key, value)?),
            "m_max" => out.m_max = Some(expect_u32(key, value)?),
            "r" => out.r = Some(expect_u32(key, value)?),
            "schemes" => {
                out.schemes = Some(
                    expect_array(key, value)?
                        .iter()
                        .map(|v| match v.as_str() {
                            Some(name) => ExperimentScheme::parse(name),
                            None => bail!("key \"schemes\": expected strings, found {v}"),
                        })
                        .collect::<Result<_>>()?,
                )
            }
            "budget" => out.budget = Some(expect_u64(key, value)? as u128),
            "full" => match value.as_bool() {
                Some(b) => out.include_extended = Some(b),
                None => bail!("key \"full\": expected a boolean, found {value}"),
            },
            "threads" => out.threads = Some(expect_u64(key, value)? as usize),
            "out_csv" => match value.as_str() {
                Some(p) => out.out_csv = Some(PathBuf::from(p)),
                None => bail!("key \"out_csv\": expected a path string, found {value}"),
            },
            "out_svg" => match value.as_str() {
                Some(p) => out.out_svg = Some(PathBuf::from(p)),
                None => bail!("key \"out_svg\": expected a path string, found {value}"),
            },
            other => bail!(
                "unknown config key {other:?} (known: seed, s, gamma, alpha, m_min, m_max, \
                 r, schemes, budget, full, threads, out_csv, out_svg)"
            ),
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<GridOverrides> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}
