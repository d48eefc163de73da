//! Verdict reports, as text or as JSON following `report.schema.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dkbv_core::tasks::{TaskVerdict, Witness};

pub const SCHEMA: &str = include_str!("../report.schema.json");
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub tool: Tool,
    pub input: Input,
    pub options: RunOptions,
    /// True iff every verdict holds.
    pub holds: bool,
    pub verdicts: Vec<VerdictRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub no_ontology: bool,
    pub closure_limit: usize,
    pub today: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub task: String,
    /// What the task was asked about, e.g. the table or the template.
    pub subject: BTreeMap<String, String>,
    pub holds: bool,
    pub witnesses: Vec<WitnessRecord>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub reasoner_calls: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessRecord {
    Overlap { table: String, rules: [usize; 2], sample: BTreeMap<String, String>, text: String },
    Masked { table: String, rule: usize, by: usize, text: String },
    Covered { table: String, attribute: String, sample: BTreeMap<String, String>, text: String },
    Uncovered {
        table: String,
        attribute: String,
        region: BTreeMap<String, String>,
        sample: BTreeMap<String, String>,
        text: String,
    },
}

fn strings<V: ToString>(m: &BTreeMap<String, V>) -> BTreeMap<String, String> {
    m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

impl From<&Witness> for WitnessRecord {
    fn from(w: &Witness) -> Self {
        let text = w.to_string();
        match w {
            Witness::Overlap { table, first, second, sample } => {
                WitnessRecord::Overlap { table: table.clone(), rules: [first + 1, second + 1], sample: strings(sample), text }
            }
            Witness::Masked { table, rule, by } => WitnessRecord::Masked { table: table.clone(), rule: rule + 1, by: by + 1, text },
            Witness::Covered { table, attr, sample } => {
                WitnessRecord::Covered { table: table.clone(), attribute: attr.clone(), sample: strings(sample), text }
            }
            Witness::Uncovered { table, attr, region } => WitnessRecord::Uncovered {
                table: table.clone(),
                attribute: attr.clone(),
                region: region.bounds.keys().map(|k| (k.clone(), region.describe(k).unwrap_or_default())).collect(),
                sample: strings(&region.sample),
                text,
            },
        }
    }
}

impl VerdictRecord {
    pub fn new(v: &TaskVerdict, subject: BTreeMap<String, String>, elapsed: Duration) -> Self {
        VerdictRecord {
            task: v.task.name().into(),
            subject,
            holds: v.holds,
            witnesses: v.witnesses.iter().map(WitnessRecord::from).collect(),
            stats: Stats { reasoner_calls: v.stats.reasoner_calls, elapsed_ms: elapsed.as_secs_f64() * 1000.0 },
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ReportDocument {
    pub fn new(path: &str, input: &[u8], options: RunOptions, verdicts: Vec<VerdictRecord>) -> Self {
        ReportDocument {
            format_version: FORMAT_VERSION,
            tool: Tool { name: "dkbv".into(), version: env!("CARGO_PKG_VERSION").into() },
            input: Input { path: path.into(), sha256: digest(input) },
            options,
            holds: verdicts.iter().all(|v| v.holds),
            verdicts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} on {} (sha256 {})", self.tool.name, self.tool.version, self.input.path, &self.input.sha256[..12]).unwrap();
        for v in &self.verdicts {
            let subject: Vec<String> = v.subject.iter().map(|(k, x)| format!("{k}={x}")).collect();
            writeln!(
                out,
                "{:<16} {:<40} {:<5} ({} reasoner calls, {:.1} ms)",
                v.task,
                subject.join(" "),
                if v.holds { "holds" } else { "FAILS" },
                v.stats.reasoner_calls,
                v.stats.elapsed_ms
            )
            .unwrap();
            for w in &v.witnesses {
                let text = match w {
                    WitnessRecord::Overlap { text, .. }
                    | WitnessRecord::Masked { text, .. }
                    | WitnessRecord::Covered { text, .. }
                    | WitnessRecord::Uncovered { text, .. } => text,
                };
                writeln!(out, "    {text}").unwrap();
            }
        }
        writeln!(out, "{}", if self.holds { "all verdicts hold" } else { "some verdicts fail" }).unwrap();
        out
    }
}
