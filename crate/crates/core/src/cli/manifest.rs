//! Run manifests: the config echo plus checksums of every output.
//!
//! A manifest is itself a valid config file once its `manifest.*` and
//! `checksum.*` lines are set aside, so `--config manifest.txt` reruns it.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::config::{ConfigError, ExperimentConfig};
use super::output::Outputs;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const FORMAT_VERSION: &str = "1";
pub const X0_ASSUMPTION: &str = "x0 defaults to 0: the reference figures start every path at the origin";

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub master_seed: u64,
    pub assumption: String,
    /// Output file name to lowercase hex SHA-256.
    pub checksums: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_meta_key(key: &str) -> bool {
    key.starts_with("manifest.") || key.starts_with("checksum.")
}

/// True if `text` carries manifest metadata.
pub fn is_manifest(text: &str) -> bool {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .any(|(k, _)| k.trim() == "manifest.format")
}

/// The config part of a manifest. Metadata lines become blank so line
/// numbers in config errors still match the file.
pub fn config_section(text: &str) -> String {
    text.lines()
        .map(|line| match line.split('#').next().and_then(|l| l.split_once('=')) {
            Some((k, _)) if is_meta_key(k.trim()) => "",
            _ => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, outputs: &Outputs) -> Self {
        Self {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            assumption: X0_ASSUMPTION.to_string(),
            checksums: outputs
                .files()
                .iter()
                .map(|(name, bytes)| (name.clone(), sha256_hex(bytes)))
                .collect(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# bgc run manifest\n");
        out.push_str(&format!("manifest.format = {FORMAT_VERSION}\n"));
        out.push_str(&format!("manifest.code_version = {}\n", self.code_version));
        out.push_str(&format!("manifest.master_seed = {}\n", self.master_seed));
        out.push_str(&format!("manifest.assumption = {}\n", self.assumption));
        out.push_str(&self.config.render());
        for (name, sum) in &self.checksums {
            out.push_str(&format!("checksum.{name} = {sum}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config = ExperimentConfig::parse(&config_section(text))?;
        let mut code_version = None;
        let mut master_seed = None;
        let mut assumption = String::new();
        let mut checksums = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let err = |message: String| ConfigError {
                line: Some(idx + 1),
                message,
            };
            let Some((key, value)) = raw.split('#').next().and_then(|l| l.split_once('=')) else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "manifest.format" if value != FORMAT_VERSION => {
                    return Err(err(format!("unsupported manifest format `{value}`")))
                }
                "manifest.format" => {}
                "manifest.code_version" => code_version = Some(value.to_string()),
                "manifest.master_seed" => {
                    master_seed = Some(
                        value
                            .parse()
                            .map_err(|_| err(format!("invalid master seed `{value}`")))?,
                    )
                }
                "manifest.assumption" => assumption = value.to_string(),
                k if k.starts_with("manifest.") => return Err(err(format!("unknown manifest key `{k}`"))),
                k => {
                    if let Some(name) = k.strip_prefix("checksum.") {
                        checksums.insert(name.to_string(), value.to_string());
                    }
                }
            }
        }
        let missing = |what: &str| ConfigError {
            line: None,
            message: format!("manifest is missing `{what}`"),
        };
        Ok(Self {
            config,
            code_version: code_version.ok_or_else(|| missing("manifest.code_version"))?,
            master_seed: master_seed.ok_or_else(|| missing("manifest.master_seed"))?,
            assumption,
            checksums,
        })
    }
}
