use std::fs;
use std::path::{Path, PathBuf};

use lojax_core::exponent::ShellConfig;
use lojax_core::fibres::FibreConfig;
use lojax_core::{Error, Result};
use serde::Serialize;

/// Everything that influences a result; echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub degree_cap: u32,
    pub method: Option<&'static str>,
    pub fibre: Option<FibreConfig>,
    pub shells: Option<ShellConfig>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
pub struct Report<'a, I: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub input: I,
    pub result: R,
    pub warnings: Vec<String>,
}

impl<'a, I: Serialize, R: Serialize> Report<'a, I, R> {
    pub fn new(command: &'static str, config: &'a RunConfig, input: I, result: R, warnings: Vec<String>) -> Self {
        Self { tool: "lojax", version: env!("CARGO_PKG_VERSION"), command, config, input, result, warnings }
    }
}

/// Side files written next to `report.json` when `--out` is given.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

pub fn emit<T: Serialize>(report: &T, compact: bool, out: Option<&Path>, side: Outputs) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("cannot write output: {e}"));
    let pretty = serde_json::to_string_pretty(report).map_err(|e| Error::Internal(e.to_string()))?;
    if compact {
        let one_line = serde_json::to_string(report).map_err(|e| Error::Internal(e.to_string()))?;
        println!("{one_line}");
    } else {
        println!("{pretty}");
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.json"), pretty + "\n").map_err(io)?;
        for (name, contents) in side.files {
            fs::write(dir.join(name), contents).map_err(io)?;
        }
    } else if !side.is_empty() {
        eprintln!("warning: CSV/SVG outputs need --out; skipped");
    }
    Ok(())
}
