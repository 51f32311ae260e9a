//! Run reports: one JSON document per invocation.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Indices in `parameters` and `results` are 1-based; rationals are `"num/den"`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: Value,
    pub mode: String,
    pub seed: u64,
    pub verified: bool,
    pub results: Value,
    pub timings: Timings,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub threads: usize,
}

impl RunReport {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only JSON-safe values")
    }

    /// Writes to stdout, and also to `out` when given.
    pub fn emit(&self, out: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        if let Some(path) = out {
            std::fs::write(path, format!("{text}\n"))?;
        }
        println!("{text}");
        Ok(())
    }
}
