//! Run configuration: a `cbpv-quant.toml` file overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cbpv_quant_core::logic::{space_for, Logic};
use cbpv_quant_core::quant::{StoreConfig, Truth};
use cbpv_quant_core::{EffectSignature, Name};
use serde::Deserialize;

pub const CONFIG_FILE: &str = "cbpv-quant.toml";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("configuration: {0}")]
    Invalid(String),
}

/// The file's contents. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub signature: Option<String>,
    pub locations: Option<Vec<String>>,
    pub value_bound: Option<u64>,
    pub errors: Option<Vec<String>>,
    /// `auto` or `bool`.
    pub truth_space: Option<String>,
    /// Modality name, then error label, then a truth literal.
    pub error_valuation: Option<BTreeMap<String, BTreeMap<String, String>>>,
    pub fuel: Option<u64>,
    pub suite_size: Option<usize>,
    pub max_size: Option<usize>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub explore_width: Option<usize>,
    /// Extra numerals for formula suites.
    pub numerals: Option<Vec<u64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml { path: path.into(), source })
    }

    /// Looks for the file next to `input`, then in the working directory.
    pub fn discover(input: Option<&Path>) -> Result<Self, ConfigError> {
        let mut dirs = Vec::new();
        if let Some(dir) = input.and_then(Path::parent) {
            dirs.push(if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir.to_path_buf() });
        }
        dirs.push(PathBuf::from("."));
        for d in dirs {
            let p = d.join(CONFIG_FILE);
            if p.is_file() {
                return Self::load(&p);
            }
        }
        Ok(FileConfig::default())
    }

    /// `other`'s keys win.
    pub fn overlay(mut self, other: FileConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            signature, locations, value_bound, errors, truth_space, error_valuation, fuel, suite_size, max_size,
            depth, samples, seed, tolerance, explore_width, numerals
        );
        self
    }
}

/// A resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub logic: Logic,
    pub value_bound: u64,
    pub fuel: u64,
    pub suite_size: usize,
    pub max_size: usize,
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub numerals: Vec<u64>,
}

impl RunConfig {
    pub fn resolve(f: &FileConfig) -> Result<Self, ConfigError> {
        let bad = |m: String| ConfigError::Invalid(m);
        let spec = f.signature.clone().unwrap_or_else(|| "pure".into());
        let mut sig = EffectSignature::from_components(&spec).map_err(|e| bad(e.to_string()))?;
        let names = |xs: &Option<Vec<String>>| -> Vec<Name> {
            xs.iter().flatten().map(|s| Name::new(s.trim())).collect()
        };
        match (sig.locations.is_some(), &f.locations) {
            (true, Some(_)) => sig = sig.with_store(names(&f.locations)).map_err(|e| bad(e.to_string()))?,
            (true, None) => return Err(bad("a store signature needs `locations`".into())),
            (false, Some(_)) => return Err(bad("`locations` given but the signature has no store".into())),
            (false, None) => {}
        }
        match (sig.errors.is_some(), &f.errors) {
            (true, _) => sig = sig.with_errors(names(&f.errors)).map_err(|e| bad(e.to_string()))?,
            (false, Some(_)) => return Err(bad("`errors` given but the signature has no error component".into())),
            (false, None) => {}
        }
        let value_bound = f.value_bound.unwrap_or(2);
        let boolean = match f.truth_space.as_deref().unwrap_or("auto") {
            "auto" => false,
            "bool" => true,
            other => return Err(bad(format!("unknown truth_space `{}` (use `auto` or `bool`)", other))),
        };
        let space = space_for(&sig, value_bound, boolean).map_err(|e| bad(e.to_string()))?;
        let mut errors: BTreeMap<String, BTreeMap<Name, Truth>> = BTreeMap::new();
        for (q, vals) in f.error_valuation.iter().flatten() {
            let mut m = BTreeMap::new();
            for (e, text) in vals {
                if !sig.error_labels().iter().any(|l| l.as_str() == e) {
                    return Err(bad(format!("error_valuation.{}: unknown error label `{}`", q, e)));
                }
                let a = space.parse(text).map_err(|err| bad(format!("error_valuation.{}.{}: {}", q, e, err)))?;
                m.insert(Name::new(e), a);
            }
            errors.insert(q.clone(), m);
        }
        let width = match f.explore_width {
            Some(w) => w.max(value_bound as usize),
            None if sig.has_store() => value_bound as usize,
            None => 4,
        };
        let logic = Logic::standard(&sig, space, &errors, width).map_err(|e| bad(e.to_string()))?;
        let fuel = f.fuel.unwrap_or(16);
        if fuel == 0 {
            return Err(bad("fuel must be positive".into()));
        }
        Ok(RunConfig {
            logic,
            value_bound,
            fuel,
            suite_size: f.suite_size.unwrap_or(3),
            max_size: f.max_size.unwrap_or(6),
            depth: f.depth.unwrap_or(4),
            samples: f.samples.unwrap_or(1000),
            seed: f.seed.unwrap_or(0),
            tolerance: f.tolerance.unwrap_or(1e-9),
            numerals: f.numerals.clone().unwrap_or_default(),
        })
    }

    /// The store of the truth space, or a two-location default for laws.
    pub fn store(&self) -> std::sync::Arc<StoreConfig> {
        match self.logic.space().store() {
            Some(s) => s.clone(),
            None => std::sync::Arc::new(
                StoreConfig::new(vec![Name::new("l"), Name::new("r")], self.value_bound.max(1)).expect("small store"),
            ),
        }
    }
}
