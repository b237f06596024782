//! Mock data administration backend and the client seam a real backend
//! would plug into.
//!
//! Fixture file:
//!
//! ```json
//! {"citizens": {"C1": {"getPersonDetails": {"Move.Applicant.Name": "Jansen"}}}}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature_model::FeatureModel;
use crate::value::{json_scalar_to_text, Value};
use crate::workflow::{DataFunction, FunctionCatalog};

/// Path to lexical value.
pub type Values = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "kebab-case")]
pub enum DataAdminError {
    #[error("unknown citizen '{0}'")]
    UnknownCitizen(String),
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("function '{0}' is unavailable")]
    Unavailable(String),
    #[error("function '{function}' needs input {path}")]
    MissingInput { function: String, path: String },
    #[error("data administration unreachable: {0}")]
    Unreachable(String),
}

/// Invocation seam: `(function, citizen, inputs) -> values`.
pub trait DataAdminClient: Send + Sync {
    fn call(
        &self,
        function: &DataFunction,
        citizen_id: &str,
        inputs: &Values,
    ) -> Result<Values, DataAdminError>;
}

/// Looks the function up in `catalog`, checks the inputs, calls the client
/// and drops anything outside the function's `provides`.
pub fn invoke(
    client: &dyn DataAdminClient,
    catalog: &FunctionCatalog,
    name: &str,
    citizen_id: &str,
    inputs: &Values,
) -> Result<Values, DataAdminError> {
    let function = catalog
        .function(name)
        .ok_or_else(|| DataAdminError::UnknownFunction(name.to_string()))?;
    if let Some(missing) = function.inputs.iter().find(|p| !inputs.contains_key(*p)) {
        return Err(DataAdminError::MissingInput {
            function: name.to_string(),
            path: missing.clone(),
        });
    }
    let mut values = client.call(function, citizen_id, inputs)?;
    values.retain(|path, _| {
        let keep = function.provides.contains(path);
        if !keep {
            log::warn!("{name}: dropping {path}, which the function does not provide");
        }
        keep
    });
    Ok(values)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FixtureStore {
    pub citizens: BTreeMap<String, BTreeMap<String, Values>>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixtures: {0}")]
    Io(String),
    #[error("fixtures are not valid JSON: {0}")]
    Json(String),
    #[error("citizen {citizen}, {function}: {path}: {reason}")]
    Invalid {
        citizen: String,
        function: String,
        path: String,
        reason: String,
    },
}

#[derive(Deserialize)]
struct FixtureFile {
    #[serde(default)]
    citizens: BTreeMap<String, BTreeMap<String, BTreeMap<String, serde_json::Value>>>,
}

impl FixtureStore {
    /// Parses without validating. Blank text is an empty store.
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        if text.trim().is_empty() {
            return Ok(FixtureStore::default());
        }
        let file: FixtureFile =
            serde_json::from_str(text).map_err(|e| FixtureError::Json(e.to_string()))?;
        let mut citizens = BTreeMap::new();
        for (citizen, functions) in file.citizens {
            let mut by_fn = BTreeMap::new();
            for (function, values) in functions {
                let mut out = Values::new();
                for (path, v) in values {
                    let text = json_scalar_to_text(&v).ok_or_else(|| FixtureError::Invalid {
                        citizen: citizen.clone(),
                        function: function.clone(),
                        path: path.clone(),
                        reason: "value must be a string, number or boolean".into(),
                    })?;
                    out.insert(path, text);
                }
                by_fn.insert(function, out);
            }
            citizens.insert(citizen, by_fn);
        }
        Ok(FixtureStore { citizens })
    }

    /// Every path must be provided by a function of that name in some
    /// catalog and parse as the attribute type of its node.
    pub fn validate(
        &self,
        services: &[(&FeatureModel, &FunctionCatalog)],
    ) -> Result<(), FixtureError> {
        for (citizen, functions) in &self.citizens {
            for (function, values) in functions {
                for (path, text) in values {
                    let invalid = |reason: String| FixtureError::Invalid {
                        citizen: citizen.clone(),
                        function: function.clone(),
                        path: path.clone(),
                        reason,
                    };
                    let owner = services.iter().find(|(_, c)| {
                        c.function(function)
                            .is_some_and(|f| f.provides.contains(path))
                    });
                    let Some((model, _)) = owner else {
                        return Err(invalid(
                            "not provided by this function in any catalog".into(),
                        ));
                    };
                    let ty = crate::feature_model::ModelIndex::new(model)
                        .lookup(path)
                        .and_then(|n| n.attribute)
                        .map(|a| a.value_type)
                        .ok_or_else(|| invalid("no attribute at this path".into()))?;
                    Value::parse(ty, text).map_err(|e| invalid(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    pub fn citizen_count(&self) -> usize {
        self.citizens.len()
    }

    /// Values for `(citizen, function)`; a known citizen without an entry
    /// for the function yields an empty result.
    pub fn lookup(&self, citizen_id: &str, function: &str) -> Result<Values, DataAdminError> {
        let functions = self
            .citizens
            .get(citizen_id)
            .ok_or_else(|| DataAdminError::UnknownCitizen(citizen_id.to_string()))?;
        Ok(functions.get(function).cloned().unwrap_or_default())
    }
}

/// Reads and validates a fixture file.
pub fn load_fixtures(
    path: &Path,
    services: &[(&FeatureModel, &FunctionCatalog)],
) -> Result<FixtureStore, FixtureError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FixtureError::Io(format!("{}: {e}", path.display())))?;
    let store = FixtureStore::from_json(&text)?;
    store.validate(services)?;
    Ok(store)
}

/// Fixture-backed client. Functions listed in `unavailable` fail, for
/// resilience tests.
#[derive(Debug, Clone, Default)]
pub struct MockDataAdmin {
    store: FixtureStore,
    unavailable: BTreeSet<String>,
}

impl MockDataAdmin {
    pub fn new(store: FixtureStore) -> Self {
        MockDataAdmin {
            store,
            unavailable: BTreeSet::new(),
        }
    }

    pub fn with_unavailable(mut self, function: impl Into<String>) -> Self {
        self.unavailable.insert(function.into());
        self
    }

    pub fn store(&self) -> &FixtureStore {
        &self.store
    }
}

impl DataAdminClient for MockDataAdmin {
    fn call(
        &self,
        function: &DataFunction,
        citizen_id: &str,
        _inputs: &Values,
    ) -> Result<Values, DataAdminError> {
        if self.unavailable.contains(&function.name) {
            return Err(DataAdminError::Unavailable(function.name.clone()));
        }
        // A fixture file serves several services; keep this service's paths.
        let mut values = self.store.lookup(citizen_id, &function.name)?;
        values.retain(|path, _| function.provides.contains(path));
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FunctionRequest {
    pub citizen_id: String,
    #[serde(default)]
    pub inputs: Values,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionResponse {
    pub values: BTreeMap<String, serde_json::Value>,
}

/// Client for a backend answering `POST {base}/functions/{name}`.
pub struct RemoteDataAdmin {
    base_url: String,
    agent: ureq::Agent,
}

impl RemoteDataAdmin {
    pub fn new(base_url: impl Into<String>) -> Self {
        RemoteDataAdmin {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(10))
                .build(),
        }
    }
}

impl DataAdminClient for RemoteDataAdmin {
    fn call(
        &self,
        function: &DataFunction,
        citizen_id: &str,
        inputs: &Values,
    ) -> Result<Values, DataAdminError> {
        let url = format!("{}/functions/{}", self.base_url, function.name);
        let body = FunctionRequest {
            citizen_id: citizen_id.to_string(),
            inputs: inputs.clone(),
        };
        match self.agent.post(&url).send_json(&body) {
            Ok(resp) => {
                let parsed: FunctionResponse = resp
                    .into_json()
                    .map_err(|e| DataAdminError::Unreachable(format!("bad response: {e}")))?;
                Ok(parsed
                    .values
                    .iter()
                    .filter_map(|(k, v)| json_scalar_to_text(v).map(|t| (k.clone(), t)))
                    .collect())
            }
            Err(ureq::Error::Status(code, resp)) => Err(resp
                .into_json::<DataAdminError>()
                .unwrap_or_else(|_| DataAdminError::Unreachable(format!("{url}: status {code}")))),
            Err(e) => Err(DataAdminError::Unreachable(e.to_string())),
        }
    }
}
