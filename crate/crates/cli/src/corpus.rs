//! The example corpus: one directory per example holding a configuration,
//! programs, formulas and an `expected.toml` listing invocations and their
//! expected output.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Report;

/// One expected invocation. Arguments naming files of the example directory
/// are resolved against it.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub args: Vec<String>,
    pub exit: i32,
    /// Exact standard output.
    pub stdout: Option<String>,
    /// Substrings of standard output.
    #[serde(default)]
    pub contains: Vec<String>,
    /// Substrings of standard error.
    #[serde(default)]
    pub stderr: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Expected {
    run: Vec<Run>,
}

#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub dir: PathBuf,
    pub runs: Vec<Run>,
}

/// The corpus shipped with this crate.
pub fn default_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Every example under `root`, by name.
pub fn load(root: &Path) -> Result<Vec<Example>, String> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(root).map_err(|e| format!("{}: {}", root.display(), e))?;
    for entry in entries {
        let dir = entry.map_err(|e| e.to_string())?.path();
        let file = dir.join("expected.toml");
        if !file.is_file() {
            continue;
        }
        let text = std::fs::read_to_string(&file).map_err(|e| format!("{}: {}", file.display(), e))?;
        let exp: Expected = toml::from_str(&text).map_err(|e| format!("{}: {}", file.display(), e))?;
        let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        out.push(Example { name, dir, runs: exp.run });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

impl Run {
    pub fn argv(&self, dir: &Path) -> Vec<String> {
        let mut argv = vec!["cbpv-quant".to_string()];
        for a in &self.args {
            let p = dir.join(a);
            argv.push(if !a.starts_with('-') && p.is_file() { p.to_string_lossy().into_owned() } else { a.clone() });
        }
        argv
    }

    pub fn execute(&self, dir: &Path) -> Report {
        crate::run(self.argv(dir), &mut std::io::empty())
    }

    /// Compares a report with the expectation.
    pub fn check(&self, r: &Report) -> Result<(), String> {
        let what = self.args.join(" ");
        if r.code != self.exit {
            return Err(format!("{}: exit {} instead of {}\n{}{}", what, r.code, self.exit, r.stdout, r.stderr));
        }
        if let Some(s) = &self.stdout {
            if &r.stdout != s {
                return Err(format!("{}: stdout\n{}\ninstead of\n{}", what, r.stdout, s));
            }
        }
        for s in &self.contains {
            if !r.stdout.contains(s.as_str()) {
                return Err(format!("{}: stdout lacks `{}`:\n{}", what, s, r.stdout));
            }
        }
        for s in &self.stderr {
            if !r.stderr.contains(s.as_str()) {
                return Err(format!("{}: stderr lacks `{}`:\n{}", what, s, r.stderr));
            }
        }
        Ok(())
    }
}
