//! Staged specialization of a family feature model into an application
//! feature model.
//!
//! Every decision is followed by eager propagation to a fixpoint:
//!
//! - a selected node selects its parent; a selected feature selects its
//!   `[1..1]` children and its groups
//! - an eliminated node eliminates its subtree; an eliminated mandatory
//!   child (or unsatisfiable group) eliminates its parent
//! - a group whose selected count reaches its maximum eliminates the
//!   remaining members; a group that can no longer reach its minimum is
//!   unsatisfiable
//! - `A requires B`: A selected selects B, B eliminated eliminates A
//! - `A excludes B`: either side selected eliminates the other
//! - a `[k..k]` cloneable feature with a selected parent gets `k` clones
//!
//! A propagation step that would flip a decided node is a conflict and fails
//! the decision that triggered it.

mod xml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature_model::{ConstraintKind, FeatureModel, InstancePath, ModelIndex, NodeId};
use crate::value::{Value, ValueType};

pub use xml::{parse_application_model, serialize_application_model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionState {
    Undecided,
    Selected,
    Eliminated,
}

impl DecisionState {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionState::Undecided => "undecided",
            DecisionState::Selected => "selected",
            DecisionState::Eliminated => "eliminated",
        }
    }
}

impl fmt::Display for DecisionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One configuration step.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Select(InstancePath),
    Eliminate(InstancePath),
    SetValue(InstancePath, Value),
    /// Selects the chosen members (by name) and eliminates the other
    /// undecided members of the group.
    ResolveGroup(InstancePath, Vec<String>),
    Clone(InstancePath, u32),
}

impl Decision {
    pub fn path(&self) -> &InstancePath {
        match self {
            Decision::Select(p)
            | Decision::Eliminate(p)
            | Decision::SetValue(p, _)
            | Decision::ResolveGroup(p, _)
            | Decision::Clone(p, _) => p,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Select(p) => write!(f, "select {p}"),
            Decision::Eliminate(p) => write!(f, "eliminate {p}"),
            Decision::SetValue(p, v) => write!(f, "set {p} = {v}"),
            Decision::ResolveGroup(p, chosen) => write!(f, "resolve {p} {{{}}}", chosen.join(", ")),
            Decision::Clone(p, k) => write!(f, "clone {p} x{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown path '{0}'")]
    UnknownPath(String),
    #[error("'{path}' is already {state}")]
    AlreadyDecided { path: String, state: DecisionState },
    #[error("decision on '{trigger}' conflicts at '{path}': {reason}")]
    Conflict {
        trigger: String,
        path: String,
        reason: String,
    },
    #[error("value for '{path}' must be {expected}, got {found}")]
    TypeMismatch {
        path: String,
        expected: ValueType,
        found: ValueType,
    },
    #[error("clone count {count} for '{path}' is outside {cardinality}")]
    CloneOutOfBounds {
        path: String,
        count: u32,
        cardinality: String,
    },
    #[error("'{path}' cannot take this decision: {reason}")]
    Inapplicable { path: String, reason: String },
}

/// Family model plus per-instance decision state, clone counts and values.
#[derive(Debug, Clone)]
pub struct ApplicationFeatureModel {
    family: Arc<FeatureModel>,
    index: Arc<ModelIndex>,
    states: BTreeMap<InstancePath, DecisionState>,
    clones: BTreeMap<InstancePath, u32>,
    values: BTreeMap<InstancePath, Value>,
}

impl PartialEq for ApplicationFeatureModel {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.family, &other.family) || self.family == other.family)
            && self.states == other.states
            && self.clones == other.clones
            && self.values == other.values
    }
}

/// Necessity tag of an open item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Necessity {
    Mandatory,
    Optional,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OpenItemKind {
    /// Unset attribute on a selected node.
    Value { value_type: ValueType },
    /// Undecided `[0..1]` feature under a selected parent.
    Optional,
    /// Selected group with undecided members.
    Group,
    /// Undecided clone count under a selected parent.
    Clone,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenItem {
    pub path: InstancePath,
    pub kind: OpenItemKind,
    pub necessity: Necessity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Cardinality,
    GroupCardinality,
    Requires,
    Excludes,
    Orphan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub paths: Vec<String>,
    pub message: String,
}

/// Counts for a group instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStatus {
    pub selected: Vec<InstancePath>,
    pub undecided: Vec<InstancePath>,
    pub min: u32,
    pub max: u32,
}

impl GroupStatus {
    /// Members that still have to be selected to reach the minimum.
    pub fn need(&self) -> u32 {
        self.min.saturating_sub(self.selected.len() as u32)
    }

    /// Members that may still be selected without passing the maximum.
    pub fn room(&self) -> u32 {
        self.max.saturating_sub(self.selected.len() as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartsError {
    #[error("unknown path '{0}'")]
    UnknownPath(String),
    #[error("path '{0}' has no state")]
    MissingState(String),
    #[error("value on '{0}' is not allowed: {1}")]
    BadValue(String, String),
    #[error("clone count on '{0}' is not allowed: {1}")]
    BadClones(String, String),
}

impl ApplicationFeatureModel {
    /// Fresh configuration: root selected, mandatory chains propagated,
    /// everything else undecided. Fails only when the family model is void
    /// (propagation from the root alone already conflicts).
    pub fn new(family: Arc<FeatureModel>) -> Result<Self, ConfigError> {
        let index = Arc::new(ModelIndex::new(&family));
        let mut app = Self {
            family,
            index,
            states: BTreeMap::new(),
            clones: BTreeMap::new(),
            values: BTreeMap::new(),
        };
        let root = InstancePath::root(app.index.root().name.clone());
        app.materialize(0, &root);
        app.states.insert(root.clone(), DecisionState::Selected);
        app.propagate(&root)?;
        Ok(app)
    }

    /// Model with the given clone counts and no states yet.
    pub(crate) fn with_clones(
        family: Arc<FeatureModel>,
        clones: BTreeMap<InstancePath, u32>,
    ) -> Result<Self, PartsError> {
        let index = Arc::new(ModelIndex::new(&family));
        let app = Self {
            family,
            index,
            states: BTreeMap::new(),
            clones,
            values: BTreeMap::new(),
        };
        for (path, k) in &app.clones {
            let node = app
                .index
                .resolve(path)
                .ok_or_else(|| PartsError::UnknownPath(path.to_string()))?;
            if !node.is_cloneable() || path.last_index().is_some() || node.id == 0 {
                return Err(PartsError::BadClones(
                    path.to_string(),
                    "not a cloneable feature".into(),
                ));
            }
            if *k != 0 && !node.feature_cardinality().unwrap().admits(*k) {
                return Err(PartsError::BadClones(
                    path.to_string(),
                    format!("{k} outside cardinality"),
                ));
            }
        }
        Ok(app)
    }

    /// Assembles a model from raw maps, checking only that every path
    /// exists and that values and clone counts sit on suitable nodes.
    /// Constraint satisfaction is not checked; see [`check_constraints`].
    ///
    /// [`check_constraints`]: ApplicationFeatureModel::check_constraints
    pub fn from_parts(
        family: Arc<FeatureModel>,
        states: BTreeMap<InstancePath, DecisionState>,
        clones: BTreeMap<InstancePath, u32>,
        values: BTreeMap<InstancePath, Value>,
    ) -> Result<Self, PartsError> {
        let mut app = Self::with_clones(family, clones)?;
        let existing = app.existing_paths();
        let known: BTreeSet<&InstancePath> = existing.iter().map(|(p, _)| p).collect();
        for p in states.keys() {
            if !known.contains(p) {
                return Err(PartsError::UnknownPath(p.to_string()));
            }
        }
        for (p, _) in &existing {
            if !states.contains_key(p) {
                return Err(PartsError::MissingState(p.to_string()));
            }
        }
        app.states = states;
        for (p, v) in values {
            let node = app
                .index
                .resolve(&p)
                .ok_or_else(|| PartsError::UnknownPath(p.to_string()))?;
            let Some(attr) = node.attribute else {
                return Err(PartsError::BadValue(
                    p.to_string(),
                    "node has no attribute".into(),
                ));
            };
            if attr.value_type != v.value_type() {
                return Err(PartsError::BadValue(
                    p.to_string(),
                    format!("expected {}", attr.value_type),
                ));
            }
            if app.states.get(&p) != Some(&DecisionState::Selected) {
                return Err(PartsError::BadValue(
                    p.to_string(),
                    "node is not selected".into(),
                ));
            }
            app.values.insert(p, v);
        }
        Ok(app)
    }

    pub fn family(&self) -> &Arc<FeatureModel> {
        &self.family
    }

    pub fn index(&self) -> &ModelIndex {
        &self.index
    }

    pub fn states(&self) -> &BTreeMap<InstancePath, DecisionState> {
        &self.states
    }

    pub fn clones(&self) -> &BTreeMap<InstancePath, u32> {
        &self.clones
    }

    pub fn values(&self) -> &BTreeMap<InstancePath, Value> {
        &self.values
    }

    pub fn state(&self, path: &InstancePath) -> Option<DecisionState> {
        self.states.get(path).copied()
    }

    pub fn value(&self, path: &InstancePath) -> Option<&Value> {
        self.values.get(path)
    }

    pub fn root_path(&self) -> InstancePath {
        InstancePath::root(self.index.root().name.clone())
    }

    /// Structural parent: `…P[i]` belongs to its collection `…P`.
    pub fn parent_of(path: &InstancePath) -> Option<InstancePath> {
        path.collection().or_else(|| path.parent())
    }

    fn is_collection(&self, path: &InstancePath, id: NodeId) -> bool {
        id != 0 && self.index.node(id).is_cloneable() && path.last_index().is_none()
    }

    /// Every existing instance path with its model node, in document order.
    pub fn existing_paths(&self) -> Vec<(InstancePath, NodeId)> {
        let mut out = Vec::new();
        self.walk(0, self.root_path(), &mut out);
        out
    }

    fn walk(&self, id: NodeId, path: InstancePath, out: &mut Vec<(InstancePath, NodeId)>) {
        let node = self.index.node(id);
        let collection = self.is_collection(&path, id);
        out.push((path.clone(), id));
        if collection {
            for i in 1..=self.clones.get(&path).copied().unwrap_or(0) {
                self.walk(id, path.instance(i), out);
            }
            return;
        }
        for &child in &node.children {
            self.walk(child, path.child(&self.index.node(child).name), out);
        }
    }

    /// Inserts undecided states for `path` and the non-cloned part of its
    /// subtree (instances of nested collections are created by cloning).
    fn materialize(&mut self, id: NodeId, path: &InstancePath) {
        self.states
            .entry(path.clone())
            .or_insert(DecisionState::Undecided);
        if self.is_collection(path, id) {
            return;
        }
        let children = self.index.node(id).children.clone();
        for child in children {
            let cp = path.child(&self.index.node(child).name);
            self.materialize(child, &cp);
        }
    }

    fn node_of(&self, path: &InstancePath) -> Result<NodeId, ConfigError> {
        if !self.states.contains_key(path) {
            return Err(ConfigError::UnknownPath(path.to_string()));
        }
        self.index
            .resolve(path)
            .map(|n| n.id)
            .ok_or_else(|| ConfigError::UnknownPath(path.to_string()))
    }

    fn require_undecided(&self, path: &InstancePath) -> Result<(), ConfigError> {
        match self.state(path) {
            Some(DecisionState::Undecided) => Ok(()),
            Some(state) => Err(ConfigError::AlreadyDecided {
                path: path.to_string(),
                state,
            }),
            None => Err(ConfigError::UnknownPath(path.to_string())),
        }
    }

    /// Applies `decision` and propagates its consequences. The receiver is
    /// left untouched; a new model is returned.
    pub fn specialize(&self, decision: &Decision) -> Result<Self, ConfigError> {
        let mut next = self.clone();
        let trigger = decision.path().clone();
        let inapplicable = |reason: &str| ConfigError::Inapplicable {
            path: trigger.to_string(),
            reason: reason.to_string(),
        };
        match decision {
            Decision::Select(path) => {
                let id = next.node_of(path)?;
                let node = next.index.node(id);
                if node.is_group() {
                    return Err(inapplicable(
                        "groups follow their parent; resolve the group instead",
                    ));
                }
                if next.is_collection(path, id) {
                    return Err(inapplicable(
                        "cloneable features are decided by a clone count",
                    ));
                }
                next.require_undecided(path)?;
                next.states.insert(path.clone(), DecisionState::Selected);
            }
            Decision::Eliminate(path) => {
                let id = next.node_of(path)?;
                let node = next.index.node(id);
                if node.is_group() {
                    return Err(inapplicable(
                        "groups follow their parent; resolve the group instead",
                    ));
                }
                if path.last_index().is_some() {
                    return Err(inapplicable(
                        "clone instances cannot be eliminated individually",
                    ));
                }
                next.require_undecided(path)?;
                next.states.insert(path.clone(), DecisionState::Eliminated);
                if next.is_collection(path, id) {
                    next.clones.insert(path.clone(), 0);
                }
            }
            Decision::SetValue(path, value) => {
                let id = next.node_of(path)?;
                let Some(attr) = next.index.node(id).attribute else {
                    return Err(inapplicable("node has no attribute"));
                };
                if attr.value_type != value.value_type() {
                    return Err(ConfigError::TypeMismatch {
                        path: path.to_string(),
                        expected: attr.value_type,
                        found: value.value_type(),
                    });
                }
                if next.state(path) != Some(DecisionState::Selected) {
                    return Err(inapplicable("values can only be set on selected nodes"));
                }
                if next.values.contains_key(path) {
                    return Err(inapplicable("value already set"));
                }
                next.values.insert(path.clone(), value.clone());
                return Ok(next);
            }
            Decision::ResolveGroup(path, chosen) => {
                let id = next.node_of(path)?;
                if !next.index.node(id).is_group() {
                    return Err(inapplicable("not a feature group"));
                }
                if next.state(path) == Some(DecisionState::Eliminated) {
                    return Err(ConfigError::AlreadyDecided {
                        path: path.to_string(),
                        state: DecisionState::Eliminated,
                    });
                }
                let status = next.group_status(path);
                if status.undecided.is_empty() {
                    return Err(inapplicable("group already resolved"));
                }
                let members: Vec<InstancePath> = next
                    .index
                    .node(id)
                    .children
                    .iter()
                    .map(|&c| path.child(&next.index.node(c).name))
                    .collect();
                for name in chosen {
                    if !members.iter().any(|m| m.name() == name) {
                        return Err(inapplicable(&format!("'{name}' is not a member")));
                    }
                }
                for member in &members {
                    let pick = chosen.iter().any(|c| c == member.name());
                    let target = if pick {
                        DecisionState::Selected
                    } else {
                        DecisionState::Eliminated
                    };
                    match next.state(member) {
                        Some(DecisionState::Undecided) => {
                            next.states.insert(member.clone(), target);
                        }
                        Some(DecisionState::Eliminated) if pick => {
                            return Err(ConfigError::Conflict {
                                trigger: path.to_string(),
                                path: member.to_string(),
                                reason: "chosen member is already eliminated".into(),
                            })
                        }
                        _ => {}
                    }
                }
            }
            Decision::Clone(path, count) => {
                let id = next.node_of(path)?;
                if !next.is_collection(path, id) {
                    return Err(inapplicable("not a cloneable feature"));
                }
                next.require_undecided(path)?;
                let card = next.index.node(id).feature_cardinality().unwrap();
                if !card.admits(*count) {
                    return Err(ConfigError::CloneOutOfBounds {
                        path: path.to_string(),
                        count: *count,
                        cardinality: card.to_string(),
                    });
                }
                next.apply_clones(id, path, *count);
            }
        }
        next.propagate(&trigger)?;
        Ok(next)
    }

    fn apply_clones(&mut self, id: NodeId, path: &InstancePath, count: u32) {
        self.clones.insert(path.clone(), count);
        if count == 0 {
            self.states.insert(path.clone(), DecisionState::Eliminated);
            return;
        }
        self.states.insert(path.clone(), DecisionState::Selected);
        for i in 1..=count {
            let inst = path.instance(i);
            self.materialize_instance(id, &inst);
            self.states.insert(inst, DecisionState::Selected);
        }
    }

    fn materialize_instance(&mut self, id: NodeId, inst: &InstancePath) {
        self.states.insert(inst.clone(), DecisionState::Undecided);
        let children = self.index.node(id).children.clone();
        for child in children {
            let cp = inst.child(&self.index.node(child).name);
            self.materialize(child, &cp);
        }
    }

    /// Selected and undecided members of a group instance.
    pub fn group_status(&self, group: &InstancePath) -> GroupStatus {
        let node = self.index.resolve(group).expect("group path resolves");
        let card = node.group_cardinality().expect("path names a group");
        let mut status = GroupStatus {
            selected: Vec::new(),
            undecided: Vec::new(),
            min: card.min,
            max: card.max,
        };
        for &c in &node.children {
            let mp = group.child(&self.index.node(c).name);
            match self.state(&mp) {
                Some(DecisionState::Selected) => status.selected.push(mp),
                Some(DecisionState::Undecided) => status.undecided.push(mp),
                _ => {}
            }
        }
        status
    }

    fn force(
        &mut self,
        trigger: &InstancePath,
        path: &InstancePath,
        target: DecisionState,
        reason: &str,
    ) -> Result<bool, ConfigError> {
        match self.state(path) {
            Some(s) if s == target => Ok(false),
            Some(DecisionState::Undecided) => {
                self.states.insert(path.clone(), target);
                if target == DecisionState::Eliminated {
                    if let Some(id) = self.index.resolve(path).map(|n| n.id) {
                        if self.is_collection(path, id) {
                            self.clones.insert(path.clone(), 0);
                        }
                    }
                }
                Ok(true)
            }
            Some(s) => Err(ConfigError::Conflict {
                trigger: trigger.to_string(),
                path: path.to_string(),
                reason: format!("{reason}, but it is already {s}"),
            }),
            None => Err(ConfigError::UnknownPath(path.to_string())),
        }
    }

    /// Runs every propagation rule until nothing changes.
    fn propagate(&mut self, trigger: &InstancePath) -> Result<(), ConfigError> {
        use DecisionState::{Eliminated as E, Selected as S, Undecided as U};
        loop {
            let mut changed = false;
            for (path, id) in self.existing_paths() {
                let Some(state) = self.state(&path) else {
                    continue;
                };
                let node = self.index.node(id).clone();
                let parent = Self::parent_of(&path);
                let parent_state = parent.as_ref().and_then(|p| self.state(p));
                let collection = self.is_collection(&path, id);

                if state == S {
                    if let Some(p) = &parent {
                        changed |= self.force(trigger, p, S, &format!("{path} is selected"))?;
                    }
                }
                if parent_state == Some(E) {
                    changed |= self.force(trigger, &path, E, "its parent is eliminated")?;
                }
                if parent_state == Some(S) && state == U {
                    if node.is_group() {
                        changed |= self.force(trigger, &path, S, "its parent is selected")?;
                    } else if node.is_mandatory() && !collection {
                        changed |= self.force(
                            trigger,
                            &path,
                            S,
                            "it is mandatory under a selected parent",
                        )?;
                    } else if collection {
                        let card = node.feature_cardinality().unwrap();
                        if card.max == Some(card.min) {
                            self.apply_clones(id, &path, card.min);
                            changed = true;
                            continue;
                        }
                    }
                }
                if state == E {
                    let forces_parent = node.is_group()
                        || (node.is_mandatory() && !collection)
                        || (collection && node.feature_cardinality().unwrap().min >= 1);
                    if forces_parent {
                        if let Some(p) = &parent {
                            changed |= self.force(
                                trigger,
                                p,
                                E,
                                &format!("required child {path} is eliminated"),
                            )?;
                        }
                    }
                }
                if node.is_group() && self.state(&path) != Some(E) {
                    let status = self.group_status(&path);
                    let count = status.selected.len() as u32;
                    let open = status.undecided.len() as u32;
                    if count > status.max || count + open < status.min {
                        let reason = format!(
                            "group cardinality <{}..{}> cannot be met",
                            status.min, status.max
                        );
                        changed |= self.force(trigger, &path, E, &reason)?;
                    } else if self.state(&path) == Some(S) && count == status.max {
                        for m in status.undecided {
                            changed |= self.force(trigger, &m, E, "group maximum reached")?;
                        }
                    }
                }
            }
            for c in self.family.constraints.clone() {
                let a: InstancePath = c
                    .from
                    .parse()
                    .map_err(|_| ConfigError::UnknownPath(c.from.clone()))?;
                let b: InstancePath =
                    c.to.parse()
                        .map_err(|_| ConfigError::UnknownPath(c.to.clone()))?;
                let (sa, sb) = (self.state(&a), self.state(&b));
                match c.kind {
                    ConstraintKind::Requires => {
                        if sa == Some(S) {
                            changed |= self.force(trigger, &b, S, &format!("{a} requires it"))?;
                        }
                        if sb == Some(E) {
                            changed |= self.force(
                                trigger,
                                &a,
                                E,
                                &format!("it requires {b}, which is eliminated"),
                            )?;
                        }
                    }
                    ConstraintKind::Excludes => {
                        if sa == Some(S) {
                            changed |= self.force(trigger, &b, E, &format!("{a} excludes it"))?;
                        }
                        if sb == Some(S) {
                            changed |= self.force(
                                trigger,
                                &a,
                                E,
                                &format!("it excludes {b}, which is selected"),
                            )?;
                        }
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Runs propagation on a copy; `true` when it changes nothing.
    pub fn is_propagation_fixpoint(&self) -> bool {
        let mut copy = self.clone();
        let root = self.root_path();
        copy.propagate(&root).is_ok() && copy == *self
    }

    /// Undecided variability points and unset values, in document order.
    pub fn open_items(&self) -> Vec<OpenItem> {
        use DecisionState::{Selected as S, Undecided as U};
        let mut items = Vec::new();
        for (path, id) in self.existing_paths() {
            let node = self.index.node(id);
            let state = self.state(&path);
            let parent_selected = Self::parent_of(&path).is_some_and(|p| self.state(&p) == Some(S));
            let collection = self.is_collection(&path, id);
            if state == Some(S) && !collection {
                if let Some(attr) = node.attribute {
                    if !self.values.contains_key(&path) {
                        items.push(OpenItem {
                            path: path.clone(),
                            kind: OpenItemKind::Value {
                                value_type: attr.value_type,
                            },
                            necessity: Necessity::Mandatory,
                        });
                    }
                }
                if node.is_group() && !self.group_status(&path).undecided.is_empty() {
                    items.push(OpenItem {
                        path: path.clone(),
                        kind: OpenItemKind::Group,
                        necessity: Necessity::Group,
                    });
                }
            }
            if state == Some(U) && parent_selected {
                if collection {
                    let min = node.feature_cardinality().unwrap().min;
                    items.push(OpenItem {
                        path: path.clone(),
                        kind: OpenItemKind::Clone,
                        necessity: if min >= 1 {
                            Necessity::Mandatory
                        } else {
                            Necessity::Optional
                        },
                    });
                } else if !node.is_grouped() && !node.is_group() {
                    items.push(OpenItem {
                        path: path.clone(),
                        kind: OpenItemKind::Optional,
                        necessity: Necessity::Optional,
                    });
                }
            }
        }
        items
    }

    /// Breached cardinalities and constraints in the current state.
    pub fn check_constraints(&self) -> Vec<Violation> {
        use DecisionState::{Eliminated as E, Selected as S};
        let mut out = Vec::new();
        for (path, id) in self.existing_paths() {
            let node = self.index.node(id);
            let state = self.state(&path);
            let parent = Self::parent_of(&path);
            let parent_state = parent.as_ref().and_then(|p| self.state(p));
            let collection = self.is_collection(&path, id);
            if state == Some(S) {
                if let Some(p) = &parent {
                    if parent_state != Some(S) {
                        out.push(Violation {
                            kind: ViolationKind::Orphan,
                            paths: vec![path.to_string(), p.to_string()],
                            message: format!("{path} is selected but its parent is not"),
                        });
                    }
                }
            }
            if parent_state == Some(S) && state == Some(E) && node.is_mandatory() && !collection {
                out.push(Violation {
                    kind: ViolationKind::Cardinality,
                    paths: vec![path.to_string()],
                    message: format!("mandatory feature {path} is eliminated"),
                });
            }
            if collection {
                let card = node.feature_cardinality().unwrap();
                let count = self.clones.get(&path).copied();
                let breached = match (state, count) {
                    (Some(S), Some(k)) => !card.admits(k) || k == 0,
                    (Some(S), None) => true,
                    (Some(E), _) => parent_state == Some(S) && card.min > 0,
                    _ => false,
                };
                if breached {
                    out.push(Violation {
                        kind: ViolationKind::Cardinality,
                        paths: vec![path.to_string()],
                        message: format!("clone count of {path} violates {card}"),
                    });
                }
            }
            if node.is_group() && state == Some(S) {
                let status = self.group_status(&path);
                let count = status.selected.len() as u32;
                let open = status.undecided.len() as u32;
                if count > status.max || count + open < status.min {
                    out.push(Violation {
                        kind: ViolationKind::GroupCardinality,
                        paths: std::iter::once(path.to_string())
                            .chain(status.selected.iter().map(|p| p.to_string()))
                            .collect(),
                        message: format!(
                            "{count} member(s) of {path} selected, cardinality <{}..{}>",
                            status.min, status.max
                        ),
                    });
                }
            }
        }
        for c in &self.family.constraints {
            let (Ok(a), Ok(b)) = (c.from.parse::<InstancePath>(), c.to.parse::<InstancePath>())
            else {
                continue;
            };
            let (sa, sb) = (self.state(&a), self.state(&b));
            let breached = match c.kind {
                ConstraintKind::Requires => sa == Some(S) && sb == Some(E),
                ConstraintKind::Excludes => sa == Some(S) && sb == Some(S),
            };
            if breached {
                out.push(Violation {
                    kind: match c.kind {
                        ConstraintKind::Requires => ViolationKind::Requires,
                        ConstraintKind::Excludes => ViolationKind::Excludes,
                    },
                    paths: vec![c.from.clone(), c.to.clone()],
                    message: format!("{} {} {} is violated", c.from, c.kind, c.to),
                });
            }
        }
        out
    }

    /// No undecided node, every selected attribute set, no violation.
    pub fn is_complete(&self) -> bool {
        self.structure_complete()
            && self.open_values_count() == 0
            && self.check_constraints().is_empty()
    }

    /// Every existing node decided (values ignored).
    pub fn structure_complete(&self) -> bool {
        self.states.values().all(|s| *s != DecisionState::Undecided)
    }

    fn open_values_count(&self) -> usize {
        self.existing_paths()
            .into_iter()
            .filter(|(p, id)| {
                self.index.node(*id).attribute.is_some()
                    && !self.is_collection(p, *id)
                    && self.state(p) == Some(DecisionState::Selected)
                    && !self.values.contains_key(p)
            })
            .count()
    }

    /// Same structure (states and clone counts), values ignored.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.states == other.states && self.clones == other.clones
    }

    /// Whether `completion` agrees with every decision taken here.
    pub fn admits_completion(&self, completion: &Self) -> bool {
        self.states
            .iter()
            .all(|(p, s)| *s == DecisionState::Undecided || completion.states.get(p) == Some(s))
            && self
                .clones
                .iter()
                .all(|(p, k)| completion.clones.get(p) == Some(k))
    }

    /// Whether `path` names a cloneable collection (not an instance).
    pub fn is_collection_path(&self, path: &InstancePath) -> bool {
        self.index
            .resolve(path)
            .is_some_and(|n| self.is_collection(path, n.id))
    }
}

/// Free-function form of [`ApplicationFeatureModel::new`].
pub fn new_configuration(
    family: Arc<FeatureModel>,
) -> Result<ApplicationFeatureModel, ConfigError> {
    ApplicationFeatureModel::new(family)
}

#[cfg(test)]
mod tests;
