//! Condition/action transformation rules between application models, UI
//! pages and reports.
//!
//! Each direction has an ordered [`RuleSet`]; for every element the first
//! rule whose condition holds fires, and the firing is recorded in a
//! [`TransformationTrace`].

mod answers;
mod report;
mod rules;
mod to_cui;
mod to_fm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::feature_model::InstancePath;

pub use answers::{Answer, Answers};
pub use report::{fm_to_report, report_rules, ReportContext, ReportError, ReportRules};
pub use rules::{registry, registry_json, Direction, Rule, RuleInfo, RuleSet};
pub use to_cui::{
    auto_resolve, cui_rules, fm_to_cui, fm_to_cui_with, CuiOutput, CuiRules, Emission, ItemContext,
    LabelContext, PageOptions, TransformError,
};
pub use to_fm::{
    cui_to_fm, cui_to_fm_with, fm_rules, AnswerContext, FmRules, SubmitError, WidgetError,
};

/// How widget names are derived from instance paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Naming {
    /// `Root.Child[2].Leaf`; injective.
    #[default]
    Dotted,
    /// Ancestor names concatenated without separator. Not injective; kept
    /// for comparison with the original stylesheet output.
    Concatenated,
}

/// Name of the widget bound to `path`.
pub fn widget_name(path: &InstancePath) -> String {
    widget_name_with(path, Naming::Dotted)
}

pub fn widget_name_with(path: &InstancePath, naming: Naming) -> String {
    match naming {
        Naming::Dotted => path.to_string(),
        Naming::Concatenated => path.concatenated(),
    }
}

/// One rule firing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEntry {
    pub path: String,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_rule: Option<String>,
    pub output: String,
    /// Position of the scope item this entry handles, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope_index: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationTrace {
    pub entries: Vec<TraceEntry>,
}

impl TransformationTrace {
    pub(crate) fn push(
        &mut self,
        path: impl fmt::Display,
        rule: &str,
        output: impl Into<String>,
    ) -> &mut TraceEntry {
        self.entries.push(TraceEntry {
            path: path.to_string(),
            rule: rule.to_string(),
            label_rule: None,
            output: output.into(),
            scope_index: None,
        });
        self.entries.last_mut().unwrap()
    }
}

/// Label shown for a node instance: the description (or name), with clone
/// positions appended, e.g. `Name (FamilyMember 2)`.
pub(crate) fn instance_label(base: &str, path: &InstancePath) -> String {
    let positions: Vec<String> = path
        .segments()
        .iter()
        .filter_map(|s| s.index.map(|i| format!("{} {i}", s.name)))
        .collect();
    if positions.is_empty() {
        base.to_string()
    } else {
        format!("{base} ({})", positions.join(", "))
    }
}
