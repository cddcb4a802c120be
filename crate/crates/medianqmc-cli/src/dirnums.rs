//! Direction-number table selection: the embedded Joe–Kuo table unless
//! MEDIANQMC_DIRNUMS names a file in the same format.

use std::sync::OnceLock;

use anyhow::{anyhow, Result};
use medianqmc::netgen::{parse_direction_numbers, DirectionNumbers};

pub const ENV_VAR: &str = "MEDIANQMC_DIRNUMS";

static OVERRIDE: OnceLock<Result<DirectionNumbers, String>> = OnceLock::new();

/// The table every subcommand uses. An override file is read once per
/// process; parse failures surface on every call rather than panicking.
pub fn direction_numbers() -> Result<&'static DirectionNumbers> {
    let Some(path) = std::env::var_os(ENV_VAR) else {
        return Ok(DirectionNumbers::embedded());
    };
    let loaded = OVERRIDE.get_or_init(|| {
        let display = path.to_string_lossy().into_owned();
        std::fs::read_to_string(&path)
            .map_err(|e| format!("reading {display}: {e}"))
            .and_then(|text| {
                parse_direction_numbers(&text).map_err(|e| format!("parsing {display}: {e}"))
            })
    });
    loaded
        .as_ref()
        .map_err(|msg| anyhow!("{ENV_VAR}: {msg}"))
}
