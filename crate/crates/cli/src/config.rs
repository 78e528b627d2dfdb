//! Run configuration shared by every subcommand.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use privstate_core::Family;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BellBasis,
    Bnot,
    Reversible,
    Twisting,
    Blockform,
    EntropicIdentities,
    Families,
    Distill2m,
    Bounds,
    Ppt,
    OptSandwich,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::BellBasis,
        Suite::Bnot,
        Suite::Reversible,
        Suite::Twisting,
        Suite::Blockform,
        Suite::EntropicIdentities,
        Suite::Families,
        Suite::Distill2m,
        Suite::Bounds,
        Suite::Ppt,
        Suite::OptSandwich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BellBasis => "bell-basis",
            Suite::Bnot => "bnot",
            Suite::Reversible => "reversible",
            Suite::Twisting => "twisting",
            Suite::Blockform => "blockform",
            Suite::EntropicIdentities => "entropic-identities",
            Suite::Families => "families",
            Suite::Distill2m => "distill-2m",
            Suite::Bounds => "bounds",
            Suite::Ppt => "ppt",
            Suite::OptSandwich => "opt-sandwich",
        }
    }

    /// Parses a comma-separated list; `all` selects every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>, CliError> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            if item == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(CliError::Usage("no suite selected".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            CliError::Usage(format!("unknown suite `{s}` (expected all or one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Usage(format!("unknown format `{s}` (expected json or csv)"))),
        }
    }
}

/// Inclusive dimension range written `A..B`, `A-B` or `A:B`.
pub fn parse_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad dimension range `{s}` (expected e.g. 2..8)"));
    let (a, b) = ["..=", "..", "-", ":"].iter().find_map(|sep| s.split_once(sep)).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn family_name<S: serde::Serializer>(f: &Option<Family>, s: S) -> Result<S::Ok, S::Error> {
    match f {
        Some(f) => s.serialize_some(f.name()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub suites: Vec<Suite>,
    #[serde(serialize_with = "family_name")]
    pub family: Option<Family>,
    /// Explicit dimensions from `--d` or `--d-range`; suites use their own defaults when empty.
    pub dims: Vec<usize>,
    pub m: u32,
    pub copies: usize,
    pub seed: u64,
    pub restarts: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            family: None,
            dims: Vec::new(),
            m: 1,
            copies: 1,
            seed: 42,
            restarts: 16,
            out: None,
            format: Format::Json,
            tol: None,
        }
    }
}

impl RunConfig {
    /// Rejects dimensions that would exceed the configured budget for any family.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(CliError::Usage(format!("dimension {d} is below 2")));
        }
        let budget = privstate_core::layout::dim_budget();
        if let Some(&d) = self.dims.iter().find(|&&d| 4 * d * d > budget) {
            return Err(CliError::Usage(format!(
                "d = {d} gives total dimension {} above the budget {budget}",
                4 * d * d
            )));
        }
        if self.restarts == 0 {
            return Err(CliError::Usage("--restarts must be at least 1".into()));
        }
        if self.copies == 0 || self.copies > 2 {
            return Err(CliError::Usage("--copies must be 1 or 2".into()));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding (the output path is excluded).
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// `dims` if given, otherwise `default`.
    pub fn dims_or(&self, default: &[usize]) -> Vec<usize> {
        if self.dims.is_empty() {
            default.to_vec()
        } else {
            self.dims.clone()
        }
    }

    /// Tolerance override, or the check's own tolerance.
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("2-3").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("5:5").unwrap(), vec![5]);
        assert!(parse_range("4..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn suites_parse() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 11);
        assert_eq!(Suite::parse_list("ppt,bnot").unwrap(), vec![Suite::Bnot, Suite::Ppt]);
        assert!(matches!(Suite::parse_list("nope"), Err(CliError::Usage(_))));
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn formats() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!(matches!("xml".parse::<Format>(), Err(CliError::Usage(_))));
    }

    #[test]
    fn digest_ignores_output_path() {
        let a = RunConfig::default();
        let b = RunConfig { out: Some("x.json".into()), ..RunConfig::default() };
        assert_eq!(a.digest(), b.digest());
        let c = RunConfig { seed: 7, ..RunConfig::default() };
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn validation() {
        assert!(RunConfig { dims: vec![40], ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { dims: vec![1], ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { dims: vec![2, 8], ..RunConfig::default() }.validate().is_ok());
    }
}
