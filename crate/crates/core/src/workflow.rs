//! Decides the next step of a session: ask the user, call a data
//! administration function, or finish.
//!
//! The fixed strategy, in order:
//!
//! 1. ask mandatory items that no viable function can fill
//! 2. call the invocable function filling the most open fields
//!    (ties: smallest name)
//! 3. ask the remaining optional items and group choices
//! 4. finish when the application is complete
//!
//! A function is *viable* when it has not been invoked and each of its
//! inputs is either known or still to be asked; it is *invocable* when all
//! its inputs are known. If none of the steps applies (inputs that can only
//! come from each other), every open item is asked.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::configuration::{
    ApplicationFeatureModel, ConfigError, Decision, DecisionState, Necessity, OpenItem,
    OpenItemKind,
};
use crate::feature_model::{FeatureModel, InstancePath, ModelIndex};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFunction {
    pub name: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub provides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionCatalog {
    pub service: String,
    #[serde(default)]
    pub functions: Vec<DataFunction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("cannot read catalog: {0}")]
    Io(String),
    #[error("catalog is not valid JSON: {0}")]
    Json(String),
    #[error("catalog is for service '{found}', expected '{expected}'")]
    WrongService { expected: String, found: String },
    #[error("function '{0}' is declared twice")]
    DuplicateFunction(String),
    #[error("function '{function}': {path}: {reason}")]
    BadPath {
        function: String,
        path: String,
        reason: &'static str,
    },
}

impl FunctionCatalog {
    pub fn empty(service: impl Into<String>) -> Self {
        FunctionCatalog {
            service: service.into(),
            functions: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatalogError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn function(&self, name: &str) -> Option<&DataFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Checks the catalog against the model it serves: unique names, every
    /// path naming an attributed node outside cloneable subtrees, inputs
    /// disjoint from provides.
    pub fn validate(&self, model: &FeatureModel) -> Result<(), CatalogError> {
        if self.service != model.name {
            return Err(CatalogError::WrongService {
                expected: model.name.clone(),
                found: self.service.clone(),
            });
        }
        let index = ModelIndex::new(model);
        let mut names = BTreeSet::new();
        for f in &self.functions {
            if !names.insert(f.name.as_str()) {
                return Err(CatalogError::DuplicateFunction(f.name.clone()));
            }
            let bad = |path: &str, reason| CatalogError::BadPath {
                function: f.name.clone(),
                path: path.to_string(),
                reason,
            };
            for path in f.inputs.iter().chain(&f.provides) {
                match index.lookup(path) {
                    None => return Err(bad(path, "no such node")),
                    Some(n) if n.attribute.is_none() => {
                        return Err(bad(path, "node has no attribute"))
                    }
                    Some(n) if n.in_clone => {
                        return Err(bad(path, "node lies inside a cloneable feature"))
                    }
                    Some(_) => {}
                }
            }
            if let Some(p) = f.inputs.iter().find(|p| f.provides.contains(p)) {
                return Err(bad(p, "path is both input and provided"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum WorkflowStep {
    AskUser { items: Vec<OpenItem> },
    CallFunction { function: String },
    Finish,
}

/// Pluggable planning policy.
pub trait WorkflowStrategy: Send + Sync {
    fn plan(
        &self,
        app: &ApplicationFeatureModel,
        catalog: &FunctionCatalog,
        history: &BTreeSet<String>,
    ) -> WorkflowStep;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FixedStrategy;

impl WorkflowStrategy for FixedStrategy {
    fn plan(
        &self,
        app: &ApplicationFeatureModel,
        catalog: &FunctionCatalog,
        history: &BTreeSet<String>,
    ) -> WorkflowStep {
        plan_next(app, catalog, history)
    }
}

fn open_value_paths(items: &[OpenItem]) -> BTreeSet<String> {
    items
        .iter()
        .filter(|i| matches!(i.kind, OpenItemKind::Value { .. }))
        .map(|i| i.path.to_string())
        .collect()
}

fn is_set(app: &ApplicationFeatureModel, path: &str) -> bool {
    path.parse::<InstancePath>()
        .is_ok_and(|p| app.value(&p).is_some())
}

fn inputs_satisfied(app: &ApplicationFeatureModel, f: &DataFunction) -> bool {
    f.inputs.iter().all(|p| is_set(app, p))
}

/// Number of currently open attribute values `f` would fill; 0 when `f`
/// was already invoked or cannot be called yet.
pub fn yield_of(
    app: &ApplicationFeatureModel,
    f: &DataFunction,
    history: &BTreeSet<String>,
) -> usize {
    if history.contains(&f.name) || !inputs_satisfied(app, f) {
        return 0;
    }
    let open = open_value_paths(&app.open_items());
    f.provides.iter().filter(|p| open.contains(*p)).count()
}

/// The fixed strategy (see the module documentation).
pub fn plan_next(
    app: &ApplicationFeatureModel,
    catalog: &FunctionCatalog,
    history: &BTreeSet<String>,
) -> WorkflowStep {
    let items = app.open_items();
    let open_values = open_value_paths(&items);
    let viable: Vec<&DataFunction> = catalog
        .functions
        .iter()
        .filter(|f| !history.contains(&f.name))
        .filter(|f| {
            f.inputs
                .iter()
                .all(|p| is_set(app, p) || open_values.contains(p))
        })
        .collect();
    let coverable = |item: &OpenItem| {
        matches!(item.kind, OpenItemKind::Value { .. }) && {
            let p = item.path.to_string();
            viable.iter().any(|f| f.provides.contains(&p))
        }
    };

    let uncovered: Vec<OpenItem> = items
        .iter()
        .filter(|i| i.necessity == Necessity::Mandatory && !coverable(i))
        .cloned()
        .collect();
    if !uncovered.is_empty() {
        return WorkflowStep::AskUser { items: uncovered };
    }

    let best = catalog
        .functions
        .iter()
        .map(|f| (yield_of(app, f, history), f))
        .filter(|(y, _)| *y >= 1)
        .max_by(|(ya, fa), (yb, fb)| ya.cmp(yb).then_with(|| fb.name.cmp(&fa.name)));
    if let Some((_, f)) = best {
        return WorkflowStep::CallFunction {
            function: f.name.clone(),
        };
    }

    let rest: Vec<OpenItem> = items
        .iter()
        .filter(|i| i.necessity != Necessity::Mandatory)
        .cloned()
        .collect();
    if !rest.is_empty() {
        return WorkflowStep::AskUser { items: rest };
    }
    if app.is_complete() {
        return WorkflowStep::Finish;
    }
    WorkflowStep::AskUser { items }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkflowError {
    #[error("function '{function}' returned '{path}', which it does not provide")]
    NotProvided { function: String, path: String },
    #[error("function '{function}' returned '{text}' for {path}: {reason}")]
    TypeMismatch {
        function: String,
        path: String,
        text: String,
        reason: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// What happened to each returned value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FunctionApplication {
    pub applied: Vec<String>,
    pub skipped: Vec<String>,
}

/// Sets every returned value whose node is selected and still unset.
/// Values for other nodes are skipped with a logged notice. Type errors
/// reject the whole result.
pub fn apply_function_result(
    app: &ApplicationFeatureModel,
    f: &DataFunction,
    result: &BTreeMap<String, String>,
) -> Result<(ApplicationFeatureModel, FunctionApplication), WorkflowError> {
    let mut typed = Vec::new();
    for (path, text) in result {
        if !f.provides.contains(path) {
            return Err(WorkflowError::NotProvided {
                function: f.name.clone(),
                path: path.clone(),
            });
        }
        let ip: InstancePath = path.parse().map_err(|_| WorkflowError::NotProvided {
            function: f.name.clone(),
            path: path.clone(),
        })?;
        let attr = app
            .index()
            .resolve(&ip)
            .and_then(|n| n.attribute)
            .ok_or_else(|| WorkflowError::NotProvided {
                function: f.name.clone(),
                path: path.clone(),
            })?;
        let v = Value::parse(attr.value_type, text).map_err(|e| WorkflowError::TypeMismatch {
            function: f.name.clone(),
            path: path.clone(),
            text: text.clone(),
            reason: e.to_string(),
        })?;
        typed.push((ip, v));
    }
    let mut app = app.clone();
    let mut report = FunctionApplication::default();
    for (path, v) in typed {
        let why = match app.state(&path) {
            Some(DecisionState::Selected) if app.value(&path).is_none() => None,
            Some(DecisionState::Selected) => Some("value already set"),
            Some(DecisionState::Eliminated) => Some("node is eliminated"),
            _ => Some("node is not selected"),
        };
        match why {
            None => {
                app = app.specialize(&Decision::SetValue(path.clone(), v))?;
                report.applied.push(path.to_string());
            }
            Some(reason) => {
                log::info!("{}: skipping {path}: {reason}", f.name);
                report.skipped.push(format!("{path}: {reason}"));
            }
        }
    }
    Ok((app, report))
}
