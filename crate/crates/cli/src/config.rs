//! Run configuration: parameter file, `CRG_` environment overrides and the record embedded in outputs.

use std::path::Path;

use collective_rg::{Error, LiouvParams, Result, SectorLabel};
use serde::Serialize;

use crate::cli::Method;

/// Parameter keys that can be overridden from the environment, e.g. `CRG_N_ATOMS=10`.
pub const PARAM_ENV: [&str; 6] = ["N_LEVELS", "N_ATOMS", "EPS", "GAMMA", "GAMMA0", "P"];

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: LiouvParams<f64>,
    pub method: Method,
    pub tol: Option<f64>,
    pub jobs: usize,
    /// Subcommand options as given.
    pub options: serde_json::Value,
}

fn parse_env<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::domain(format!("CRG_{key}: cannot parse {raw:?}")))
}

/// Parameters from `--config` (a JSON object with keys `n_levels, n_atoms, eps, gamma, gamma0, p`)
/// with any `CRG_<KEY>` environment variable applied on top.
pub fn load_params(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<LiouvParams<f64>> {
    let mut value: serde_json::Value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::domain(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::domain(format!("{}: {e}", p.display())))?
        }
        None => serde_json::json!({}),
    };
    let obj = value.as_object_mut().ok_or_else(|| Error::domain("config must be a JSON object"))?;
    for key in PARAM_ENV {
        let Some(raw) = env(&format!("CRG_{key}")) else { continue };
        let field = key.to_ascii_lowercase();
        let v = match key {
            "N_LEVELS" | "N_ATOMS" => serde_json::json!(parse_env::<usize>(key, &raw)?),
            "EPS" => {
                let xs: Result<Vec<f64>> = raw.split(',').map(|x| parse_env::<f64>(key, x)).collect();
                serde_json::json!(xs?)
            }
            _ => serde_json::json!(parse_env::<f64>(key, &raw)?),
        };
        obj.insert(field, v);
    }
    let missing: Vec<&str> =
        ["n_levels", "n_atoms", "eps", "gamma", "gamma0", "p"].into_iter().filter(|k| !obj.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::domain(format!(
            "missing parameters {missing:?}; pass --config <json> or set CRG_{{N_LEVELS,N_ATOMS,EPS,GAMMA,GAMMA0,P}}"
        )));
    }
    LiouvParams::from_json_str(&value.to_string())
}

/// `"1,-1,0"` → sector label; validated against the parameters.
pub fn parse_sector(raw: &str, params: &LiouvParams<f64>) -> Result<SectorLabel> {
    let v: Result<Vec<i64>> = raw
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| Error::domain(format!("bad sector component {x:?}"))))
        .collect();
    let s = SectorLabel(v?);
    s.validate(params.n_levels, params.n_atoms)?;
    Ok(s)
}

pub fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::domain(format!("bad {what} entry {x:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"n_levels":3,"n_atoms":4,"eps":[-1,0,1],"gamma":1,"gamma0":1,"p":0.5}"#).unwrap();
        let params = load_params(Some(&p), |k| match k {
            "CRG_N_ATOMS" => Some("7".into()),
            "CRG_EPS" => Some("0.1,0.2,0.3".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(params.n_atoms, 7);
        assert_eq!(params.eps, vec![0.1, 0.2, 0.3]);
        assert_eq!(params.p, 0.5);
    }

    #[test]
    fn missing_keys_are_validation_errors() {
        let e = load_params(None, |_| None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
