use crate::config::{Format, RunConfig};
use crate::error::CliError;
use serde::Serialize;
use std::io::Write;

pub const TOOL: &str = "dyck";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a numeric value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Mesh,
    Quadrature,
    Fem,
    Enumeration,
    Grid,
}

/// A numeric result with its tolerance and, when it is compared against a
/// target, the outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "relation", content = "value", rename_all = "snake_case")]
pub enum Target {
    /// `|value − t| ≤ tolerance`
    Equals(f64),
    /// `value ≥ t − tolerance`
    AtLeast(f64),
    /// `value ≤ t + tolerance`
    AtMost(f64),
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::Mesh => "mesh",
            Self::Quadrature => "quadrature",
            Self::Fem => "fem",
            Self::Enumeration => "enumeration",
            Self::Grid => "grid",
        }
    }
}

impl Entry {
    /// Value reported without comparison.
    pub fn info(name: &str, value: f64, provenance: Provenance, tolerance: f64) -> Self {
        Self { name: name.into(), value, provenance, tolerance, target: None, passed: value.is_finite() }
    }

    pub fn check(name: &str, value: f64, provenance: Provenance, target: Target, tolerance: f64) -> Self {
        let passed = match target {
            Target::Equals(t) => (value - t).abs() <= tolerance,
            Target::AtLeast(t) => value >= t - tolerance,
            Target::AtMost(t) => value <= t + tolerance,
        };
        Self { name: name.into(), value, provenance, tolerance, target: Some(target), passed }
    }

    pub fn flag(name: &str, ok: bool, provenance: Provenance) -> Self {
        Self::check(name, if ok { 1.0 } else { 0.0 }, provenance, Target::Equals(1.0), 0.0)
    }
}

/// Header shared by every JSON document.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub config_digest: String,
}

impl Header {
    pub fn new(cfg: &RunConfig) -> Self {
        Self { tool: TOOL, version: VERSION, config: cfg.clone(), config_digest: cfg.digest() }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON of `body` preceded by the header fields.
pub fn json_document<T: Serialize>(cfg: &RunConfig, body: &T) -> String {
    let doc = Document { header: Header::new(cfg), body };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Rendered command output in each supported format.
pub struct Rendered {
    pub text: String,
    pub json: String,
    pub csv: Option<String>,
}

impl Rendered {
    pub fn select(self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text),
            Format::Json => Ok(self.json),
            Format::Csv => self.csv.ok_or_else(|| CliError::BadInput("this command has no csv output".into())),
        }
    }
}

/// Writes to `--out` when given, otherwise to stdout.
pub fn emit(cfg: &RunConfig, content: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io { path: "stdout".into(), message: e.to_string() })
        }
    }
}

fn tol(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else {
        format!("{t:.0e}")
    }
}

pub fn text_entries(entries: &[Entry]) -> String {
    let mut s = String::new();
    for e in entries {
        let target = match e.target {
            Some(Target::Equals(t)) => format!(" (target {t} ± {})", tol(e.tolerance)),
            Some(Target::AtLeast(t)) => format!(" (target ≥ {t} − {})", tol(e.tolerance)),
            Some(Target::AtMost(t)) => format!(" (target ≤ {t} + {})", tol(e.tolerance)),
            None => format!(" (± {})", tol(e.tolerance)),
        };
        let value = if e.value != 0.0 && e.value.abs() < 1e-4 { format!("{:e}", e.value) } else { e.value.to_string() };
        let mark = if e.passed { "ok  " } else { "FAIL" };
        s.push_str(&format!("    {mark} {:<38} {:<24} [{}]{target}\n", e.name, value, e.provenance.label()));
    }
    s
}
