//! Structural validation of feature models.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::index::ModelIndex;
use super::types::{FeatureModel, Node, NodeKind};

/// Identifier of a violated model rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    InvalidName,
    RootName,
    RootKind,
    DuplicatePath,
    NameRepeatedOnPath,
    MinGtMax,
    MaxZero,
    GroupEmpty,
    GroupMinGtMax,
    GroupCardinalityExceedsSize,
    GroupChildNotGrouped,
    GroupedOutsideGroup,
    GroupAttribute,
    DanglingConstraint,
    SelfConstraint,
    ConstraintOnGroup,
    ConstraintInClone,
    ExtensionValueType,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::InvalidName => "invalid-name",
            RuleId::RootName => "root-name",
            RuleId::RootKind => "root-kind",
            RuleId::DuplicatePath => "duplicate-path",
            RuleId::NameRepeatedOnPath => "name-repeated-on-path",
            RuleId::MinGtMax => "min-gt-max",
            RuleId::MaxZero => "max-zero",
            RuleId::GroupEmpty => "group-empty",
            RuleId::GroupMinGtMax => "group-min-gt-max",
            RuleId::GroupCardinalityExceedsSize => "group-cardinality-exceeds-size",
            RuleId::GroupChildNotGrouped => "group-child-not-grouped",
            RuleId::GroupedOutsideGroup => "grouped-outside-group",
            RuleId::GroupAttribute => "group-attribute",
            RuleId::DanglingConstraint => "dangling-constraint",
            RuleId::SelfConstraint => "self-constraint",
            RuleId::ConstraintOnGroup => "constraint-on-group",
            RuleId::ConstraintInClone => "constraint-in-clone",
            RuleId::ExtensionValueType => "extension-value-type",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub rule: RuleId,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.rule, self.message)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Reject the `boolean` and `date` attribute types.
    pub base_types_only: bool,
}

pub fn validate_model(model: &FeatureModel) -> Vec<Diagnostic> {
    validate_model_with(model, ValidationOptions::default())
}

pub fn validate_model_with(model: &FeatureModel, options: ValidationOptions) -> Vec<Diagnostic> {
    let mut v = Validator {
        out: Vec::new(),
        seen: HashMap::new(),
        options,
    };
    if model.root.name != model.name {
        v.push(
            &model.root.name,
            RuleId::RootName,
            format!(
                "root feature '{}' does not match model name '{}'",
                model.root.name, model.name
            ),
        );
    }
    if !matches!(model.root.kind, NodeKind::Solitary(c) if c.is_mandatory()) {
        v.push(
            &model.root.name,
            RuleId::RootKind,
            "root must be a [1..1] solitary feature",
        );
    }
    let mut ancestors = Vec::new();
    v.node(&model.root, None, "", &mut ancestors);
    v.constraints(model);
    v.out
}

struct Validator {
    out: Vec<Diagnostic>,
    seen: HashMap<String, usize>,
    options: ValidationOptions,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c == '.' || c == '[' || c == ']' || c.is_whitespace() || c.is_control())
}

impl Validator {
    fn push(&mut self, path: &str, rule: RuleId, message: impl Into<String>) {
        self.out.push(Diagnostic {
            path: path.to_string(),
            rule,
            message: message.into(),
        });
    }

    fn node<'a>(
        &mut self,
        node: &'a Node,
        parent: Option<&Node>,
        prefix: &str,
        ancestors: &mut Vec<&'a str>,
    ) {
        let path = if prefix.is_empty() {
            node.name.clone()
        } else {
            format!("{prefix}.{}", node.name)
        };
        if !valid_name(&node.name) {
            self.push(
                &path,
                RuleId::InvalidName,
                format!("'{}' is not a valid feature name", node.name),
            );
        }
        let count = self.seen.entry(path.clone()).or_insert(0);
        *count += 1;
        if *count == 2 {
            self.push(&path, RuleId::DuplicatePath, "two nodes share this path");
        }
        if ancestors.contains(&node.name.as_str()) {
            self.push(
                &path,
                RuleId::NameRepeatedOnPath,
                format!("name '{}' already used by an ancestor", node.name),
            );
        }

        let parent_is_group = parent.is_some_and(Node::is_group);
        match node.kind {
            NodeKind::Solitary(card) => {
                if parent_is_group {
                    self.push(
                        &path,
                        RuleId::GroupChildNotGrouped,
                        "feature group children must be grouped features",
                    );
                }
                if card.max == Some(0) {
                    self.push(
                        &path,
                        RuleId::MaxZero,
                        "maximum cardinality must be positive",
                    );
                }
                if card.max.is_some_and(|max| card.min > max) {
                    self.push(
                        &path,
                        RuleId::MinGtMax,
                        format!("min>max in cardinality {card}"),
                    );
                }
            }
            NodeKind::Group(card) => {
                if parent_is_group {
                    self.push(
                        &path,
                        RuleId::GroupChildNotGrouped,
                        "feature group children must be grouped features",
                    );
                }
                if node.children.is_empty() {
                    self.push(
                        &path,
                        RuleId::GroupEmpty,
                        "feature group without grouped features",
                    );
                }
                if card.min > card.max {
                    self.push(
                        &path,
                        RuleId::GroupMinGtMax,
                        format!("min>max in group cardinality {card}"),
                    );
                }
                if card.max as usize > node.children.len() {
                    self.push(
                        &path,
                        RuleId::GroupCardinalityExceedsSize,
                        format!(
                            "group cardinality exceeds size: {card} with {} member(s)",
                            node.children.len()
                        ),
                    );
                }
                if node.attribute.is_some() {
                    self.push(
                        &path,
                        RuleId::GroupAttribute,
                        "feature groups cannot carry attributes",
                    );
                }
            }
            NodeKind::Grouped => {
                if !parent_is_group {
                    self.push(
                        &path,
                        RuleId::GroupedOutsideGroup,
                        "grouped feature outside a feature group",
                    );
                }
            }
        }
        if let Some(attr) = node.attribute {
            if self.options.base_types_only && attr.value_type.is_extension() {
                self.push(
                    &path,
                    RuleId::ExtensionValueType,
                    format!("attribute type '{}' is an extension", attr.value_type),
                );
            }
        }

        ancestors.push(&node.name);
        for child in &node.children {
            self.node(child, Some(node), &path, ancestors);
        }
        ancestors.pop();
    }

    fn constraints(&mut self, model: &FeatureModel) {
        let index = ModelIndex::new(model);
        for c in &model.constraints {
            let label = format!("{} {} {}", c.from, c.kind, c.to);
            if c.from == c.to {
                self.push(
                    &c.from,
                    RuleId::SelfConstraint,
                    format!("constraint '{label}' relates a feature to itself"),
                );
            }
            for end in [&c.from, &c.to] {
                match index.lookup(end) {
                    None => self.push(
                        end,
                        RuleId::DanglingConstraint,
                        format!("constraint '{label}' names a missing node"),
                    ),
                    Some(n) if n.is_group() => self.push(
                        end,
                        RuleId::ConstraintOnGroup,
                        format!("constraint '{label}' must relate features, not groups"),
                    ),
                    Some(n) if n.in_clone => self.push(
                        end,
                        RuleId::ConstraintInClone,
                        format!("constraint '{label}' reaches into a cloneable subtree"),
                    ),
                    Some(_) => {}
                }
            }
        }
    }
}

/// Rule ids present in a diagnostic list, deduplicated.
pub fn rules_of(diagnostics: &[Diagnostic]) -> HashSet<RuleId> {
    diagnostics.iter().map(|d| d.rule).collect()
}
