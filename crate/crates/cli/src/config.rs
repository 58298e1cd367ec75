//! `key = value` overrides of the integrator configuration.

use std::fs;
use std::path::Path;

use sepsol::odeint::IntegratorConfig;

use crate::error::CliError;

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str, line: usize) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Input(format!("config line {line}: cannot parse {key} = {raw:?}")))
}

/// Applies the overrides in `text`. Blank lines and lines starting with `#`
/// are ignored.
pub fn apply_overrides(cfg: &mut IntegratorConfig, text: &str) -> Result<(), CliError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = i + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {n}: expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "rel_tol" => cfg.rel_tol = parse_value(key, value, n)?,
            "abs_tol" => cfg.abs_tol = parse_value(key, value, n)?,
            "max_step" => cfg.max_step = parse_value(key, value, n)?,
            "max_steps" => cfg.max_steps = parse_value(key, value, n)?,
            "event_tol" => cfg.event_tol = parse_value(key, value, n)?,
            "radial_norm" => cfg.radial_norm = parse_value(key, value, n)?,
            _ => {
                return Err(CliError::Input(format!(
                    "config line {n}: unknown key {key:?} (known: rel_tol, abs_tol, max_step, max_steps, event_tol, radial_norm)"
                )))
            }
        }
    }
    Ok(())
}

/// Defaults, then the config file, then explicit tolerance flags.
pub fn integrator_config(
    file: Option<&Path>,
    tol_rel: Option<f64>,
    tol_abs: Option<f64>,
) -> Result<IntegratorConfig, CliError> {
    let mut cfg = IntegratorConfig::default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        apply_overrides(&mut cfg, &text)?;
    }
    if let Some(r) = tol_rel {
        cfg.rel_tol = r;
    }
    if let Some(a) = tol_abs {
        cfg.abs_tol = a;
    }
    cfg.validate().map_err(crate::error::input)?;
    Ok(cfg)
}
