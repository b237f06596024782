//! Brute-force enumeration of every complete configuration of a model.
//!
//! This deliberately shares nothing with the propagation code in
//! [`configuration`](crate::configuration): it builds the cartesian product
//! of all structural choices and then filters by cross-tree constraints.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::index::{ModelIndex, NodeId};
use super::path::InstancePath;
use super::types::{ConstraintKind, FeatureModel};
use crate::configuration::{ApplicationFeatureModel, DecisionState};

pub const DEFAULT_CEILING: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{count} structural configurations exceed the ceiling of {ceiling}")]
    CeilingExceeded { count: u64, ceiling: u64 },
    #[error("clone bound must be positive")]
    ZeroBound,
}

#[derive(Debug, Clone, Default)]
struct Assignment {
    states: BTreeMap<InstancePath, DecisionState>,
    clones: BTreeMap<InstancePath, u32>,
}

impl Assignment {
    fn merge(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.states
            .extend(other.states.iter().map(|(k, v)| (k.clone(), *v)));
        out.clones
            .extend(other.clones.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }
}

fn product(parts: Vec<Vec<Assignment>>) -> Vec<Assignment> {
    parts
        .into_iter()
        .fold(vec![Assignment::default()], |acc, options| {
            acc.iter()
                .flat_map(|a| options.iter().map(move |o| a.merge(o)))
                .collect()
        })
}

struct Enumerator<'a> {
    index: &'a ModelIndex,
    bound: u32,
}

impl Enumerator<'_> {
    fn clone_range(&self, id: NodeId) -> std::ops::RangeInclusive<u32> {
        let card = self
            .index
            .node(id)
            .feature_cardinality()
            .expect("cloneable solitary");
        let cap = card.max.map_or(self.bound, |m| m.min(self.bound));
        card.min..=cap.max(card.min)
    }

    /// Structural count, saturating, without materializing anything.
    fn count_selected(&self, id: NodeId) -> u64 {
        self.index
            .node(id)
            .children
            .iter()
            .fold(1u64, |acc, &c| acc.saturating_mul(self.count_child(c)))
    }

    fn count_child(&self, id: NodeId) -> u64 {
        let node = self.index.node(id);
        if let Some(g) = node.group_cardinality() {
            let members = &node.children;
            let mut total = 0u64;
            for mask in 0u64..(1u64 << members.len()) {
                let size = mask.count_ones();
                if size < g.min || size > g.max {
                    continue;
                }
                let mut ways = 1u64;
                for (i, &m) in members.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        ways = ways.saturating_mul(self.count_selected(m));
                    }
                }
                total = total.saturating_add(ways);
            }
            return total;
        }
        if node.is_cloneable() {
            let one = self.count_selected(id);
            return self
                .clone_range(id)
                .map(|k| one.saturating_pow(k))
                .fold(0u64, u64::saturating_add);
        }
        let card = node.feature_cardinality().expect("solitary");
        let selected = self.count_selected(id);
        if card.min == 0 {
            selected.saturating_add(1)
        } else {
            selected
        }
    }

    fn selected(&self, id: NodeId, path: &InstancePath) -> Vec<Assignment> {
        let mut own = Assignment::default();
        own.states.insert(path.clone(), DecisionState::Selected);
        let mut parts = vec![vec![own]];
        for &c in &self.index.node(id).children {
            parts.push(self.child(c, &path.child(&self.index.node(c).name)));
        }
        product(parts)
    }

    fn eliminated(&self, id: NodeId, path: &InstancePath, out: &mut Assignment) {
        out.states.insert(path.clone(), DecisionState::Eliminated);
        let node = self.index.node(id);
        if node.is_cloneable() {
            out.clones.insert(path.clone(), 0);
            return;
        }
        for &c in &node.children {
            self.eliminated(c, &path.child(&self.index.node(c).name), out);
        }
    }

    fn eliminated_one(&self, id: NodeId, path: &InstancePath) -> Assignment {
        let mut a = Assignment::default();
        self.eliminated(id, path, &mut a);
        a
    }

    fn child(&self, id: NodeId, path: &InstancePath) -> Vec<Assignment> {
        let node = self.index.node(id);
        if let Some(g) = node.group_cardinality() {
            let members = &node.children;
            let mut out = Vec::new();
            for mask in 0u64..(1u64 << members.len()) {
                let size = mask.count_ones();
                if size < g.min || size > g.max {
                    continue;
                }
                let mut own = Assignment::default();
                own.states.insert(path.clone(), DecisionState::Selected);
                let mut parts = vec![vec![own]];
                for (i, &m) in members.iter().enumerate() {
                    let mp = path.child(&self.index.node(m).name);
                    if mask & (1 << i) != 0 {
                        parts.push(self.selected(m, &mp));
                    } else {
                        parts.push(vec![self.eliminated_one(m, &mp)]);
                    }
                }
                out.extend(product(parts));
            }
            return out;
        }
        if node.is_cloneable() {
            let mut out = Vec::new();
            for k in self.clone_range(id) {
                if k == 0 {
                    out.push(self.eliminated_one(id, path));
                    continue;
                }
                let mut own = Assignment::default();
                own.states.insert(path.clone(), DecisionState::Selected);
                own.clones.insert(path.clone(), k);
                let mut parts = vec![vec![own]];
                for i in 1..=k {
                    parts.push(self.selected(id, &path.instance(i)));
                }
                out.extend(product(parts));
            }
            return out;
        }
        let mut out = self.selected(id, path);
        if node.feature_cardinality().is_some_and(|c| c.min == 0) {
            out.push(self.eliminated_one(id, path));
        }
        out
    }
}

/// Number of configurations before cross-tree constraints are applied.
pub fn structural_count(model: &FeatureModel, clone_bound: u32) -> u64 {
    let index = ModelIndex::new(model);
    Enumerator {
        index: &index,
        bound: clone_bound,
    }
    .count_selected(0)
}

pub fn enumerate_configurations(
    model: &FeatureModel,
    clone_bound: u32,
) -> Result<Vec<ApplicationFeatureModel>, EnumerationError> {
    enumerate_with_ceiling(model, clone_bound, DEFAULT_CEILING)
}

/// Every complete configuration, in a fixed order. Fails before doing any
/// work when the structural count passes `ceiling`.
pub fn enumerate_with_ceiling(
    model: &FeatureModel,
    clone_bound: u32,
    ceiling: u64,
) -> Result<Vec<ApplicationFeatureModel>, EnumerationError> {
    if clone_bound == 0 {
        return Err(EnumerationError::ZeroBound);
    }
    let index = ModelIndex::new(model);
    let e = Enumerator {
        index: &index,
        bound: clone_bound,
    };
    let count = e.count_selected(0);
    if count > ceiling {
        return Err(EnumerationError::CeilingExceeded { count, ceiling });
    }
    let root = InstancePath::root(model.name.clone());
    let family = Arc::new(model.clone());
    let holds = |a: &Assignment| {
        model.constraints.iter().all(|c| {
            let state = |p: &str| {
                p.parse::<InstancePath>()
                    .ok()
                    .and_then(|p| a.states.get(&p).copied())
            };
            let (from, to) = (state(&c.from), state(&c.to));
            match c.kind {
                ConstraintKind::Requires => {
                    from != Some(DecisionState::Selected) || to == Some(DecisionState::Selected)
                }
                ConstraintKind::Excludes => {
                    !(from == Some(DecisionState::Selected) && to == Some(DecisionState::Selected))
                }
            }
        })
    };
    Ok(e.selected(0, &root)
        .into_iter()
        .filter(holds)
        .map(|a| {
            ApplicationFeatureModel::from_parts(family.clone(), a.states, a.clones, BTreeMap::new())
                .expect("enumerated assignment covers every existing path")
        })
        .collect())
}

/// Selected instance paths joined by commas.
pub fn canonical_line(app: &ApplicationFeatureModel) -> String {
    app.existing_paths()
        .into_iter()
        .filter(|(p, _)| app.state(p) == Some(DecisionState::Selected))
        .map(|(p, _)| p.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
