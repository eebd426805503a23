//! Command output with provenance, rendered as text, CSV or JSON.

use serde::Serialize;
use serde_json::{json, Value};
use xlindley::tables::{Format, Precision, Table};

pub const REPORT_SCHEMA: &str = "xlindley-report";
pub const REPORT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Inputs a result depends on. `reps` and `seed` are set only when
/// simulated quantities were used.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub psi: Vec<f64>,
    pub n: Vec<usize>,
    pub m: Option<usize>,
    pub q: Option<usize>,
    #[serde(rename = "N")]
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub level: Option<f64>,
    pub input: Option<String>,
    pub quantile_table: Option<String>,
    pub tool_version: &'static str,
}

impl Provenance {
    pub fn new() -> Self {
        Self { tool_version: TOOL_VERSION, ..Default::default() }
    }

    fn lines(&self) -> Vec<String> {
        let list = |xs: Vec<String>| if xs.is_empty() { "-".to_string() } else { xs.join(",") };
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        vec![
            format!("psi={}", list(self.psi.iter().map(|p| p.to_string()).collect())),
            format!("n={}", list(self.n.iter().map(|p| p.to_string()).collect())),
            format!("m={}", opt(self.m.map(|x| x.to_string()))),
            format!("q={}", opt(self.q.map(|x| x.to_string()))),
            format!("N={}", opt(self.reps.map(|x| x.to_string()))),
            format!("seed={}", opt(self.seed.map(|x| x.to_string()))),
            format!("level={}", opt(self.level.map(|x| x.to_string()))),
            format!("input={}", opt(self.input.clone())),
            format!("quantile_table={}", opt(self.quantile_table.clone())),
            format!("version={}", self.tool_version),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub provenance: Provenance,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &'static str, provenance: Provenance) -> Self {
        Self { command, provenance, tables: Vec::new() }
    }

    pub fn with(mut self, table: Table) -> Self {
        self.tables.push(table);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": REPORT_SCHEMA,
            "schema_version": REPORT_VERSION,
            "command": self.command,
            "provenance": self.provenance,
            "tables": self.tables.iter().map(Table::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format, precision: Precision) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("json value serializes") + "\n",
            Format::Csv => {
                let mut out: String = self.provenance.lines().iter().map(|l| format!("# {l}\n")).collect();
                for (i, t) in self.tables.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                    }
                    if self.tables.len() > 1 {
                        out.push_str(&format!("# {}\n", t.title));
                    }
                    out.push_str(&t.to_csv(precision));
                }
                out
            }
            Format::Text => {
                let mut out = format!("xlindley {} ({})\n", self.command, self.provenance.lines().join(" "));
                for t in &self.tables {
                    out.push('\n');
                    out.push_str(&t.to_text(precision));
                }
                out
            }
        }
    }
}
