use std::fmt::Write;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::xmlfmt::XmlWriter;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportField {
    pub path: String,
    pub label: String,
    pub value: String,
}

/// Summary of a completed application, sent on to the clerk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub service_name: String,
    pub citizen_id: String,
    pub fields: Vec<ReportField>,
    /// Kept as metadata; the rendered forms omit it so that identical
    /// answers always render to identical bytes.
    pub completed_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Xml,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xml" => Ok(ReportFormat::Xml),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!(
                "unknown report format '{other}' (expected xml or text)"
            )),
        }
    }
}

impl ReportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ReportFormat::Xml => "application/xml; charset=utf-8",
            ReportFormat::Text => "text/plain; charset=utf-8",
        }
    }
}

pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Xml => {
            let mut w = XmlWriter::new();
            w.declaration();
            let head = [
                ("service", report.service_name.as_str()),
                ("citizen", report.citizen_id.as_str()),
            ];
            if report.fields.is_empty() {
                w.empty("Report", &head);
            } else {
                w.open("Report", &head);
                for f in &report.fields {
                    w.empty(
                        "Field",
                        &[("path", &f.path), ("label", &f.label), ("value", &f.value)],
                    );
                }
                w.close("Report");
            }
            w.finish()
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for f in &report.fields {
                let _ = writeln!(out, "{}: {}", f.label, f.value);
            }
            out
        }
    }
}
