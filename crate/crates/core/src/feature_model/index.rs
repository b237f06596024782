use std::collections::HashMap;

use super::path::InstancePath;
use super::types::{
    AttributeSpec, FeatureCardinality, FeatureModel, GroupCardinality, Node, NodeKind,
};

pub type NodeId = usize;

/// Flattened, preorder view of a feature model with parent/child links and
/// a path lookup table. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct ModelIndex {
    nodes: Vec<IndexedNode>,
    by_path: HashMap<String, NodeId>,
}

#[derive(Debug, Clone)]
pub struct IndexedNode {
    pub id: NodeId,
    pub name: String,
    pub path: String,
    pub description: Option<String>,
    pub kind: NodeKind,
    pub attribute: Option<AttributeSpec>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Set when this node or one of its ancestors is cloneable.
    pub in_clone: bool,
}

impl IndexedNode {
    pub fn label(&self) -> &str {
        self.description.as_deref().unwrap_or(&self.name)
    }

    pub fn is_group(&self) -> bool {
        matches!(self.kind, NodeKind::Group(_))
    }

    pub fn is_grouped(&self) -> bool {
        matches!(self.kind, NodeKind::Grouped)
    }

    pub fn feature_cardinality(&self) -> Option<FeatureCardinality> {
        match self.kind {
            NodeKind::Solitary(c) => Some(c),
            _ => None,
        }
    }

    pub fn group_cardinality(&self) -> Option<GroupCardinality> {
        match self.kind {
            NodeKind::Group(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_cloneable(&self) -> bool {
        self.feature_cardinality().is_some_and(|c| c.is_cloneable())
    }

    pub fn is_mandatory(&self) -> bool {
        self.feature_cardinality().is_some_and(|c| c.is_mandatory())
    }

    /// Solitary `[0..1]`: a plain select/eliminate decision.
    pub fn is_optional(&self) -> bool {
        self.feature_cardinality()
            .is_some_and(|c| c.min == 0 && c.max == Some(1))
    }
}

impl ModelIndex {
    pub fn new(model: &FeatureModel) -> Self {
        let mut index = ModelIndex {
            nodes: Vec::new(),
            by_path: HashMap::new(),
        };
        index.add(&model.root, None, String::new(), false);
        index
    }

    fn add(
        &mut self,
        node: &Node,
        parent: Option<NodeId>,
        prefix: String,
        in_clone: bool,
    ) -> NodeId {
        let id = self.nodes.len();
        let path = if prefix.is_empty() {
            node.name.clone()
        } else {
            format!("{prefix}.{}", node.name)
        };
        let in_clone = in_clone
            || matches!(node.kind, NodeKind::Solitary(c) if c.is_cloneable() && parent.is_some());
        self.nodes.push(IndexedNode {
            id,
            name: node.name.clone(),
            path: path.clone(),
            description: node.description.clone(),
            kind: node.kind,
            attribute: node.attribute,
            parent,
            children: Vec::new(),
            in_clone,
        });
        self.by_path.entry(path.clone()).or_insert(id);
        for child in &node.children {
            let cid = self.add(child, Some(id), path.clone(), in_clone);
            self.nodes[id].children.push(cid);
        }
        id
    }

    pub fn root(&self) -> &IndexedNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &IndexedNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[IndexedNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lookup(&self, plain_path: &str) -> Option<&IndexedNode> {
        self.by_path.get(plain_path).map(|&id| &self.nodes[id])
    }

    /// Model node an instance path refers to (clone indices ignored).
    pub fn resolve(&self, path: &InstancePath) -> Option<&IndexedNode> {
        self.lookup(&path.plain())
    }

    pub fn parent(&self, id: NodeId) -> Option<&IndexedNode> {
        self.nodes[id].parent.map(|p| &self.nodes[p])
    }
}
