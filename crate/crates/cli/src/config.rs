//! Experiment configuration.
//!
//! A config is a TOML document with the sections below; every key has a
//! default except the group source, which needs either `group.lengths`
//! (funnel builder) or `group.disks` (explicit data).
//!
//! ```toml
//! [group]
//! lengths = [7.0, 8.0]          # builder: one length per generator
//! # disks = [[-3.0, 1.0], ...]  # explicit: 2r disks as [center, radius]
//! # generators = [[a, b, c, d], ...]  # optional, all 2r letters
//!
//! [numerics]
//! degree = 16
//! tau = 0.75
//! n_max = 12
//! delta_tol = 1e-13
//! locate_eps = 1e-6
//! word_cap = 10000000
//!
//! [zeros]
//! modulus = 1
//! a = [0, 0]
//! radius = 0.8                  # box centred at δ unless `box` is given
//! # box = [re_min, re_max, im_min, im_max]
//!
//! [scan]
//! n_list = [1, 2, 3, 4, 6, 8]
//! epsilon = 0.1
//! search_radius = 0.8
//!
//! [factor_check]
//! n_list = [2, 3]
//! s_offset = [0.5, 0.0]         # s = δ + s_offset
//! n_max = 6
//! tolerance = 1e-9
//!
//! [expander]
//! n_list = [8, 16, 32, 64, 128]
//! rank = 2
//!
//! [output]
//! dir = "out"
//! # cache_dir = "cache"
//! ```
//!
//! `--set key=value` overrides a dotted key before validation; the value is
//! read as a TOML value, or as a string when it does not parse as one.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub zeros: ZerosConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub factor_check: FactorCheckConfig,
    #[serde(default)]
    pub expander: ExpanderConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disks: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<[f64; 4]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub degree: usize,
    pub tau: f64,
    pub n_max: usize,
    pub delta_tol: f64,
    pub locate_eps: f64,
    pub word_cap: u64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            degree: 16,
            tau: 0.75,
            n_max: 12,
            delta_tol: 1e-13,
            locate_eps: 1e-6,
            word_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZerosConfig {
    pub modulus: i64,
    pub a: Vec<i64>,
    pub radius: f64,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub rect: Option<[f64; 4]>,
}

impl Default for ZerosConfig {
    fn default() -> Self {
        ZerosConfig {
            modulus: 1,
            a: Vec::new(),
            radius: 0.8,
            rect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub n_list: Vec<i64>,
    pub epsilon: f64,
    pub search_radius: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            n_list: vec![1, 2, 3, 4, 6, 8],
            epsilon: 0.1,
            search_radius: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorCheckConfig {
    pub n_list: Vec<i64>,
    pub s_offset: [f64; 2],
    pub n_max: usize,
    pub tolerance: f64,
}

impl Default for FactorCheckConfig {
    fn default() -> Self {
        FactorCheckConfig {
            n_list: vec![2, 3],
            s_offset: [0.5, 0.0],
            n_max: 6,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpanderConfig {
    pub n_list: Vec<i64>,
    /// defaults to the group rank
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// defaults to `±e_j`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<i64>>>,
}

impl Default for ExpanderConfig {
    fn default() -> Self {
        ExpanderConfig {
            n_list: vec![8, 16, 32, 64, 128],
            rank: None,
            generators: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn parse_error(text: &str, e: toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
    CliError::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Semantic {
            field: key.into(),
            message: "empty key segment".into(),
        });
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| CliError::Semantic {
            field: key.into(),
            message: format!("`{p}` is not a table"),
        })?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_override(item: &str) -> Result<(String, toml::Value), CliError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| CliError::Semantic {
        field: item.into(),
        message: "override must have the form key=value".into(),
    })?;
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key.trim().to_string(), value))
}

/// Parses, applies overrides, fills defaults and validates.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e| parse_error(text, e))?;
    for item in overrides {
        let (key, value) = parse_override(item)?;
        set_dotted(&mut table, &key, value)?;
    }
    let config: ExperimentConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        CliError::Semantic {
            field: "config".into(),
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    parse_config_with_overrides(text, &[])
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_with_overrides(&text, overrides)
}

fn semantic(field: &str, message: impl Into<String>) -> CliError {
    CliError::Semantic {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(semantic(field, format!("must be positive, got {x}")))
    }
}

fn moduli(field: &str, list: &[i64]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(semantic(field, "must be nonempty"));
    }
    if let Some(n) = list.iter().find(|&&n| n < 1) {
        return Err(semantic(field, format!("entries must be positive, got {n}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Rank of the configured group.
    pub fn rank(&self) -> usize {
        match (&self.group.lengths, &self.group.disks) {
            (Some(l), _) => l.len(),
            (None, Some(d)) => d.len() / 2,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.group;
        match (&g.lengths, &g.disks) {
            (Some(_), Some(_)) => return Err(semantic("group", "give either `lengths` or `disks`, not both")),
            (None, None) => return Err(semantic("group", "missing `lengths` or `disks`")),
            (Some(l), None) => {
                if l.len() < 2 {
                    return Err(semantic("group.lengths", "need at least two generators"));
                }
                for x in l {
                    positive("group.lengths", *x)?;
                }
                if g.generators.is_some() {
                    return Err(semantic("group.generators", "only allowed with explicit `disks`"));
                }
            }
            (None, Some(d)) => {
                if d.len() < 4 || d.len() % 2 != 0 {
                    return Err(semantic("group.disks", format!("need 2r >= 4 disks, got {}", d.len())));
                }
                for [c, r] in d {
                    if !c.is_finite() {
                        return Err(semantic("group.disks", format!("center must be finite, got {c}")));
                    }
                    positive("group.disks.radius", *r)?;
                }
                if let Some(gens) = &g.generators {
                    if gens.len() != d.len() {
                        return Err(semantic(
                            "group.generators",
                            format!("need {} generators, got {}", d.len(), gens.len()),
                        ));
                    }
                }
            }
        }
        let n = &self.numerics;
        if n.degree < 4 {
            return Err(semantic("numerics.degree", format!("must be at least 4, got {}", n.degree)));
        }
        if !(n.tau > 0.0 && n.tau < 1.0) {
            return Err(semantic("numerics.tau", format!("must lie in (0, 1), got {}", n.tau)));
        }
        if n.n_max == 0 {
            return Err(semantic("numerics.n_max", "must be positive"));
        }
        positive("numerics.delta_tol", n.delta_tol)?;
        positive("numerics.locate_eps", n.locate_eps)?;
        if n.word_cap == 0 {
            return Err(semantic("numerics.word_cap", "must be positive"));
        }
        let z = &self.zeros;
        if z.modulus < 1 {
            return Err(semantic("zeros.modulus", format!("must be positive, got {}", z.modulus)));
        }
        if !z.a.is_empty() && z.a.len() != self.rank() {
            return Err(semantic("zeros.a", format!("need {} entries, got {}", self.rank(), z.a.len())));
        }
        positive("zeros.radius", z.radius)?;
        if let Some([a, b, c, d]) = z.rect {
            if !(a < b && c < d) {
                return Err(semantic("zeros.box", "need re_min < re_max and im_min < im_max"));
            }
        }
        moduli("scan.n_list", &self.scan.n_list)?;
        positive("scan.epsilon", self.scan.epsilon)?;
        positive("scan.search_radius", self.scan.search_radius)?;
        let f = &self.factor_check;
        moduli("factor_check.n_list", &f.n_list)?;
        if f.n_max == 0 {
            return Err(semantic("factor_check.n_max", "must be positive"));
        }
        positive("factor_check.tolerance", f.tolerance)?;
        if !(f.s_offset[0] > 0.0) {
            return Err(semantic("factor_check.s_offset", "real part must be positive (Re s > δ)"));
        }
        let e = &self.expander;
        moduli("expander.n_list", &e.n_list)?;
        if let Some(n) = e.n_list.iter().find(|&&n| n < 2) {
            return Err(semantic("expander.n_list", format!("entries must be at least 2, got {n}")));
        }
        if e.rank == Some(0) {
            return Err(semantic("expander.rank", "must be positive"));
        }
        Ok(())
    }

    /// Canonical TOML with all defaults filled in.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical TOML, hex encoded. The `output` section only
    /// says where results go, so it is left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        hex::encode(Sha256::digest(c.emit().as_bytes()))
    }

    /// Prefix of [`Self::hash`] used in file names.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[group]\nlengths = [4.0, 4.0]\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.numerics.degree, 16);
        assert_eq!(c.numerics.tau, 0.75);
        assert_eq!(c.rank(), 2);
    }

    #[test]
    fn emitted_config_round_trips() {
        let c = parse_config_with_overrides(MINIMAL, &["numerics.tau=0.6".into(), "zeros.a=[1, 0]".into()]).unwrap();
        let back = parse_config(&c.emit()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn negative_radius_is_semantic_error() {
        let text = "[group]\ndisks = [[-5.0, 1.0], [-10.0, -1.0], [5.0, 1.0], [10.0, 1.0]]\n";
        match parse_config(text) {
            Err(CliError::Semantic { field, .. }) => assert_eq!(field, "group.disks.radius"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "[group]\nlengths = [4.0, 4.0]\n[numerics]\ndegree = = 3\n";
        match parse_config(text) {
            Err(CliError::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert!(column > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(parse_config("[group]\nlengths = [4.0, 4.0]\nbogus = 1\n").is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let c = parse_config_with_overrides(MINIMAL, &["scan.n_list=[1, 2]".into(), "output.dir=elsewhere".into()]).unwrap();
        assert_eq!(c.scan.n_list, vec![1, 2]);
        assert_eq!(c.output.dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn small_degree_is_rejected() {
        assert!(parse_config_with_overrides(MINIMAL, &["numerics.degree=3".into()]).is_err());
    }

    #[test]
    fn hash_depends_on_content() {
        let a = parse_config(MINIMAL).unwrap();
        let b = parse_config_with_overrides(MINIMAL, &["numerics.degree=20".into()]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.short_hash().len(), 16);
        let c = parse_config_with_overrides(MINIMAL, &["output.dir=elsewhere".into()]).unwrap();
        assert_eq!(a.hash(), c.hash());
    }
}
