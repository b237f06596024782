//! Application models in the canonical XML vocabulary, annotated with
//! `state`, `clones` and attribute values.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ApplicationFeatureModel, DecisionState};
use crate::feature_model::xml::{parse_annotated, write_document, Decorations};
use crate::feature_model::{InstancePath, ParseError};
use crate::value::Value;

struct AppDecorations<'a>(&'a ApplicationFeatureModel);

impl Decorations for AppDecorations<'_> {
    fn state(&self, path: &InstancePath) -> Option<DecisionState> {
        self.0.state(path)
    }

    fn clones(&self, path: &InstancePath) -> Option<u32> {
        if self.0.is_collection_path(path) {
            Some(self.0.clones.get(path).copied().unwrap_or(0))
        } else {
            None
        }
    }

    fn value(&self, path: &InstancePath) -> Option<String> {
        self.0.value(path).map(Value::to_lexical)
    }
}

pub fn serialize_application_model(app: &ApplicationFeatureModel) -> String {
    write_document(&app.family, &AppDecorations(app))
}

/// Reads an application document back. Paths without a `state` attribute
/// are undecided, except clone instances, which always exist selected.
pub fn parse_application_model(text: &str) -> Result<ApplicationFeatureModel, ParseError> {
    let (model, ann) = parse_annotated(text)?;
    let structure = |line: u32, message: String| ParseError::Structure { line, message };
    let mut clones = BTreeMap::new();
    for (path, k, line) in ann.clones {
        if clones.insert(path.clone(), k).is_some() {
            return Err(structure(
                line,
                format!("clone count for {path} given twice"),
            ));
        }
    }
    let mut given = BTreeMap::new();
    let mut lines = BTreeMap::new();
    for (path, state, line) in ann.states {
        lines.insert(path.clone(), line);
        given.insert(path, state);
    }
    let mut values = BTreeMap::new();
    for (path, ty, text, line) in ann.values {
        let v = Value::parse(ty, &text).map_err(|e| structure(line, format!("{path}: {e}")))?;
        values.insert(path, v);
    }
    let family = Arc::new(model);
    let existing = ApplicationFeatureModel::with_clones(family.clone(), clones.clone())
        .map_err(|e| structure(0, e.to_string()))?
        .existing_paths();
    let mut states = BTreeMap::new();
    for (p, _) in existing {
        let default = if p.last_index().is_some() {
            DecisionState::Selected
        } else {
            DecisionState::Undecided
        };
        let s = given.remove(&p).unwrap_or(default);
        states.insert(p, s);
    }
    if let Some((p, _)) = given.into_iter().next() {
        let line = lines.get(&p).copied().unwrap_or(0);
        return Err(structure(
            line,
            format!("{p} does not exist in this configuration"),
        ));
    }
    ApplicationFeatureModel::from_parts(family, states, clones, values)
        .map_err(|e| structure(0, e.to_string()))
}
