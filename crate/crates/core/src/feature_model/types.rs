use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::ValueType;

/// A cardinality-based feature model: a tree rooted at a feature named after
/// the model, plus requires/excludes constraints between feature paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureModel {
    pub name: String,
    pub root: Node,
    pub constraints: Vec<CrossTreeConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub description: Option<String>,
    pub kind: NodeKind,
    pub attribute: Option<AttributeSpec>,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Solitary(FeatureCardinality),
    Group(GroupCardinality),
    Grouped,
}

/// `[min..max]` clone cardinality of a solitary feature; `max == None` is `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl FeatureCardinality {
    pub const MANDATORY: FeatureCardinality = FeatureCardinality {
        min: 1,
        max: Some(1),
    };
    pub const OPTIONAL: FeatureCardinality = FeatureCardinality {
        min: 0,
        max: Some(1),
    };

    pub fn new(min: u32, max: Option<u32>) -> Self {
        Self { min, max }
    }

    /// A feature whose instances are cloned (`max > 1` or unbounded).
    pub fn is_cloneable(&self) -> bool {
        self.max.is_none_or(|m| m > 1)
    }

    pub fn is_mandatory(&self) -> bool {
        self.min >= 1 && self.max == Some(1)
    }

    pub fn admits(&self, count: u32) -> bool {
        count >= self.min && self.max.is_none_or(|m| count <= m)
    }
}

impl fmt::Display for FeatureCardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "[{}..{}]", self.min, max),
            None => write!(f, "[{}..*]", self.min),
        }
    }
}

/// `<min..max>` number of selected members of a feature group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCardinality {
    pub min: u32,
    pub max: u32,
}

impl GroupCardinality {
    pub const XOR: GroupCardinality = GroupCardinality { min: 1, max: 1 };

    pub fn new(min: u32, max: u32) -> Self {
        Self { min, max }
    }
}

impl Default for GroupCardinality {
    fn default() -> Self {
        Self::XOR
    }
}

impl fmt::Display for GroupCardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}..{}>", self.min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub value_type: ValueType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Requires,
    Excludes,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Requires => "requires",
            ConstraintKind::Excludes => "excludes",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `from requires to` / `from excludes to`, endpoints as dot-joined paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTreeConstraint {
    pub kind: ConstraintKind,
    pub from: String,
    pub to: String,
}

impl Node {
    pub fn solitary(name: impl Into<String>, card: FeatureCardinality) -> Self {
        Self {
            name: name.into(),
            description: None,
            kind: NodeKind::Solitary(card),
            attribute: None,
            children: Vec::new(),
        }
    }

    pub fn mandatory(name: impl Into<String>) -> Self {
        Self::solitary(name, FeatureCardinality::MANDATORY)
    }

    pub fn optional(name: impl Into<String>) -> Self {
        Self::solitary(name, FeatureCardinality::OPTIONAL)
    }

    pub fn group(name: impl Into<String>, card: GroupCardinality, members: Vec<Node>) -> Self {
        Self {
            name: name.into(),
            description: None,
            kind: NodeKind::Group(card),
            attribute: None,
            children: members,
        }
    }

    pub fn grouped(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: None,
            kind: NodeKind::Grouped,
            attribute: None,
            children: Vec::new(),
        }
    }

    pub fn described(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn with_attribute(mut self, value_type: ValueType) -> Self {
        self.attribute = Some(AttributeSpec { value_type });
        self
    }

    pub fn with_children(mut self, children: Vec<Node>) -> Self {
        self.children = children;
        self
    }

    pub fn is_group(&self) -> bool {
        matches!(self.kind, NodeKind::Group(_))
    }

    /// Label text: the description when present, otherwise the name.
    pub fn label(&self) -> &str {
        self.description.as_deref().unwrap_or(&self.name)
    }

    /// Number of nodes in this subtree, this node included.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }
}

impl FeatureModel {
    /// A model whose root carries the model name.
    pub fn new(name: impl Into<String>, children: Vec<Node>) -> Self {
        let name = name.into();
        Self {
            root: Node::mandatory(name.clone()).with_children(children),
            name,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(
        mut self,
        kind: ConstraintKind,
        from: impl Into<String>,
        to: impl Into<String>,
    ) -> Self {
        self.constraints.push(CrossTreeConstraint {
            kind,
            from: from.into(),
            to: to.into(),
        });
        self
    }

    /// Title used for generated pages and service listings.
    pub fn title(&self) -> &str {
        self.root.label()
    }

    pub fn node_count(&self) -> usize {
        self.root.size()
    }
}
