//! Findings and report rendering.
//!
//! A validation run produces a list of [`Finding`]s in the order they were
//! discovered. Rendering is deterministic: the same report always produces
//! byte-identical text and JSON.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

/// What kind of problem a finding describes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Severity {
    /// Schema (structure / simple type) violation.
    Structural,
    /// A rule failed and was not (or could not be) corrected.
    Error,
    /// A rule failed and the document was corrected in place.
    Corrected,
}

impl Severity {
    fn json_name(self) -> &'static str {
        match self {
            Severity::Structural => "structural",
            Severity::Error => "error",
            Severity::Corrected => "corrected",
        }
    }

    fn text_label(self) -> &'static str {
        match self {
            Severity::Structural => "Structural Error",
            Severity::Error => "Validation Error",
            Severity::Corrected => "Corrected",
        }
    }
}

/// One validation finding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    /// The rule's message, or a description of the structural violation.
    pub message: String,
    /// Canonical slash path of the target, e.g. `/cart/book[2]/tax`.
    pub location: String,
    /// The value actually present (empty for a missing target).
    pub found: String,
    /// The expected value (or constraint, for structural findings).
    pub expected: String,
    /// 1-based index of the rule instance that produced the finding;
    /// 0 for structural findings.
    pub instance_index: u32,
}

/// The outcome of a validation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    /// `true` when no structural or error finding remains (corrected
    /// findings do not make a document invalid).
    pub valid: bool,
    pub corrections_applied: usize,
}

impl ValidationReport {
    pub fn from_findings(findings: Vec<Finding>) -> ValidationReport {
        let valid = !findings
            .iter()
            .any(|f| matches!(f.severity, Severity::Error | Severity::Structural));
        let corrections_applied = findings
            .iter()
            .filter(|f| f.severity == Severity::Corrected)
            .count();
        ValidationReport {
            findings,
            valid,
            corrections_applied,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Renders a report. Text reports carry one
/// `Label. Message=[..]. Found=[..]. Expecting=[..].` line per finding with
/// the location indented on the following line; an empty report renders as
/// `OK`. JSON reports are an array of objects with the keys `severity`,
/// `message`, `location`, `found`, `expected`, `instanceIndex`.
pub fn render_report(report: &ValidationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Json => render_json(report),
    }
}

fn render_text(report: &ValidationReport) -> String {
    if report.findings.is_empty() {
        return String::from("OK\n");
    }
    let mut out = String::new();
    for finding in &report.findings {
        let _ = writeln!(
            out,
            "{}. Message=[{}]. Found=[{}]. Expecting=[{}].",
            finding.severity.text_label(),
            finding.message,
            finding.found,
            finding.expected
        );
        let _ = writeln!(out, "    at {}", finding.location);
    }
    out
}

fn render_json(report: &ValidationReport) -> String {
    let mut out = String::from("[");
    for (i, finding) in report.findings.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        let mut field = |key: &str, value: &str, trailing: bool| {
            out.push('"');
            out.push_str(key);
            out.push_str("\":");
            out.push('"');
            json_escape_into(value, &mut out);
            out.push('"');
            if trailing {
                out.push(',');
            }
        };
        field("severity", finding.severity.json_name(), true);
        field("message", &finding.message, true);
        field("location", &finding.location, true);
        field("found", &finding.found, true);
        field("expected", &finding.expected, true);
        let _ = write!(out, "\"instanceIndex\":{}}}", finding.instance_index);
    }
    if !report.findings.is_empty() {
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

fn json_escape_into(raw: &str, out: &mut String) {
    for c in raw.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
}
