//! Config files. Every file is optional; missing fields take the built-in
//! defaults, which are also shipped under `configs/`.

use std::path::Path;

use mesofrac::geometry::GeometryConfig;
use mesofrac::raster::{GridSpec, MaterialTable};
use mesofrac::solver::SolverConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{read_text, CliError, CliResult};
use crate::manifest::sha256_hex;

fn parse<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    path.map_or_else(|| Ok(T::default()), parse)
}

pub fn geometry(path: Option<&Path>) -> CliResult<GeometryConfig> {
    load(path)
}

pub fn solver(path: Option<&Path>) -> CliResult<SolverConfig> {
    load(path)
}

pub fn grid(path: Option<&Path>) -> CliResult<GridSpec> {
    load(path)
}

pub fn materials(path: Option<&Path>) -> CliResult<MaterialTable> {
    match path {
        None => Ok(MaterialTable::reference()),
        Some(p) => MaterialTable::from_json(&read_text(p)?).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
    }
}

/// Canonical JSON of an effective config, after flag overrides.
pub fn canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config serializes");
    s.push('\n');
    s
}

pub fn digest<T: Serialize>(value: &T) -> String {
    sha256_hex(canonical(value).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn shipped(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
    }

    #[test]
    fn shipped_files_match_defaults() {
        assert_eq!(geometry(Some(&shipped("geometry.json"))).unwrap(), GeometryConfig::default());
        assert_eq!(solver(Some(&shipped("solver.json"))).unwrap(), SolverConfig::default());
        assert_eq!(grid(Some(&shipped("grid.json"))).unwrap(), GridSpec::default());
        assert_eq!(materials(Some(&shipped("materials.json"))).unwrap(), MaterialTable::reference());
    }

    #[test]
    fn shipped_files_are_canonical() {
        let read = |n: &str| std::fs::read_to_string(shipped(n)).unwrap();
        assert_eq!(read("geometry.json"), canonical(&GeometryConfig::default()));
        assert_eq!(read("solver.json"), canonical(&SolverConfig::default()));
        assert_eq!(read("grid.json"), canonical(&GridSpec::default()));
        assert_eq!(read("materials.json"), MaterialTable::reference().to_json());
    }

    #[test]
    fn partial_files_fill_defaults_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        std::fs::write(&p, r#"{"n_load_steps": 10}"#).unwrap();
        let cfg = solver(Some(&p)).unwrap();
        assert_eq!(cfg.n_load_steps, 10);
        assert_eq!(cfg.u_max, SolverConfig::default().u_max);
        std::fs::write(&p, r#"{"n_load_step": 10}"#).unwrap();
        assert_eq!(solver(Some(&p)).unwrap_err().kind, crate::error::Kind::Config);
        assert_eq!(solver(Some(&dir.path().join("none.json"))).unwrap_err().kind, crate::error::Kind::Io);
    }
}
