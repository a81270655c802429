//! Provenance block written into every output file.
//!
//! The block holds the tool version, the subcommand and the fully resolved
//! config as flat TOML text. Thread counts and wall-clock times are left out
//! so that reruns are byte-identical.

use serde::{Deserialize, Serialize};

pub const TOOL: &str = "urnsim";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved config, one `key = value` per line.
    pub config: String,
}

#[derive(Serialize, Deserialize)]
struct Wrapped {
    provenance: Provenance,
}

impl Provenance {
    pub fn new(command: &str, config: String) -> Self {
        Provenance { tool: TOOL.into(), version: env!("CARGO_PKG_VERSION").into(), command: command.into(), config }
    }

    /// `# urnsim <version>`, `# command = <cmd>`, then `# <line>` per config line.
    pub fn csv_block(&self) -> String {
        let mut out = format!("# {} {}\n# command = {}\n", self.tool, self.version, self.command);
        for line in self.config.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// A single `{"provenance": {...}}` line.
    pub fn jsonl_record(&self) -> String {
        serde_json::to_string(&Wrapped { provenance: self.clone() }).expect("provenance serializes") + "\n"
    }

    /// Finds the block in a CSV, JSON or JSON-lines output.
    pub fn extract(text: &str) -> Option<Provenance> {
        let header = format!("# {TOOL} ");
        if let Some(rest) = text.strip_prefix(&header) {
            let mut lines = rest.lines();
            let version = lines.next()?.to_string();
            let command = lines.next()?.strip_prefix("# command = ")?.to_string();
            let mut config = String::new();
            for line in lines.map_while(|l| l.strip_prefix("# ")) {
                config.push_str(line);
                config.push('\n');
            }
            return Some(Provenance { tool: TOOL.into(), version, command, config });
        }
        if let Ok(w) = serde_json::from_str::<serde_json::Value>(text) {
            return w.get("provenance").and_then(|p| serde_json::from_value(p.clone()).ok());
        }
        let first = text.lines().next()?;
        serde_json::from_str::<Wrapped>(first).ok().map(|w| w.provenance)
    }
}
