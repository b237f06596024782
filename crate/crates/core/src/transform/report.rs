//! Completed application model to report.

use thiserror::Error;

use super::rules::{Direction, Rule, RuleSet};
use super::to_cui::{cui_rules, label_for};
use crate::configuration::{ApplicationFeatureModel, DecisionState};
use crate::cui::{Report, ReportField};
use crate::feature_model::{IndexedNode, InstancePath};
use crate::value::Value;

pub struct ReportContext {
    pub path: InstancePath,
    pub node: IndexedNode,
    pub state: DecisionState,
    pub label: String,
    pub value: Option<Value>,
    pub selected_members: Vec<String>,
}

impl ReportContext {
    fn field(&self, value: String) -> ReportField {
        ReportField {
            path: self.path.to_string(),
            label: self.label.clone(),
            value,
        }
    }
}

pub type ReportRules = RuleSet<ReportContext, ReportField>;

pub fn report_rules() -> ReportRules {
    RuleSet {
        direction: Direction::FmToReport,
        rules: vec![
            Rule {
                id: "RP-VALUE",
                condition: "selected node with an attribute value",
                extension: false,
                matches: |c| c.state == DecisionState::Selected && c.value.is_some(),
                action: |c| c.field(c.value.as_ref().unwrap().to_lexical()),
            },
            Rule {
                id: "RP-GROUP",
                condition: "selected feature group with chosen members",
                extension: false,
                matches: |c| {
                    c.state == DecisionState::Selected
                        && c.node.is_group()
                        && !c.selected_members.is_empty()
                },
                action: |c| c.field(c.selected_members.join(", ")),
            },
            Rule {
                id: "RP-OPT",
                condition: "selected optional feature without attribute",
                extension: true,
                matches: |c| {
                    c.state == DecisionState::Selected
                        && c.node.is_optional()
                        && c.node.attribute.is_none()
                },
                action: |c| c.field("yes".into()),
            },
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("the application is not complete; open: {}", open.join(", "))]
pub struct ReportError {
    pub open: Vec<String>,
}

/// One field per reported node, in document order. `completed_at` is left
/// to the caller.
pub fn fm_to_report(
    app: &ApplicationFeatureModel,
    citizen_id: &str,
) -> Result<Report, ReportError> {
    if !app.is_complete() {
        let mut open: Vec<String> = app
            .open_items()
            .into_iter()
            .map(|i| i.path.to_string())
            .collect();
        open.extend(app.check_constraints().into_iter().map(|v| v.message));
        return Err(ReportError { open });
    }
    let labels = cui_rules();
    let rules = report_rules();
    let index = app.index();
    let mut fields = Vec::new();
    for (path, id) in app.existing_paths() {
        let node = index.node(id);
        let selected_members = if node.is_group() {
            node.children
                .iter()
                .map(|&c| index.node(c).name.clone())
                .filter(|n| app.state(&path.child(n)) == Some(DecisionState::Selected))
                .collect()
        } else {
            Vec::new()
        };
        let ctx = ReportContext {
            label: label_for(&labels, node, &path).0,
            state: app.state(&path).unwrap_or(DecisionState::Undecided),
            value: app.value(&path).cloned(),
            node: node.clone(),
            selected_members,
            path,
        };
        if let Some(rule) = rules.first_match(&ctx) {
            fields.push((rule.action)(&ctx));
        }
    }
    Ok(Report {
        service_name: app.family().name.clone(),
        citizen_id: citizen_id.to_string(),
        fields,
        completed_at: None,
    })
}
