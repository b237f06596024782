//! Scripted interaction source: a fixed answer set consulted page by page.
//!
//! ```json
//! {"citizenId": "C1", "answersByName": {"Felling.Trees.Count": "3"}}
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::{GeneratorMode, Session, SessionError};
use crate::cui::{Page, Report};
use crate::data_admin::DataAdminClient;
use crate::service::Service;
use crate::transform::{Answer, Answers};

/// Version of the trace file layout.
pub const TRACE_VERSION: u32 = 1;

const MAX_PAGES: usize = 4096;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScriptedAnswers {
    #[serde(default)]
    pub answers_by_name: BTreeMap<String, Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citizen_id: Option<String>,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("cannot read answers: {0}")]
    Io(String),
    #[error("answers file is not valid: {0}")]
    Json(String),
    #[error("{page}: no answer for {}", names.join(", "))]
    Missing { page: String, names: Vec<String> },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("session did not finish within {0} pages")]
    Runaway(usize),
}

impl ScriptedAnswers {
    pub fn from_json(text: &str) -> Result<Self, ScriptError> {
        serde_json::from_str(text).map_err(|e| ScriptError::Json(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScriptError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Answers for every input of `page`. Prefilled inputs may be left out;
    /// any other input without a scripted answer is missing.
    pub fn answers_for(&self, page: &Page) -> Result<Answers, ScriptError> {
        let mut answers = Answers::new();
        let mut missing = Vec::new();
        for input in page.inputs() {
            match self.answers_by_name.get(&input.name) {
                Some(a) => {
                    answers.insert(input.name.clone(), a.clone());
                }
                None if input.prefill.is_some() => {}
                None => missing.push(input.name.clone()),
            }
        }
        if missing.is_empty() {
            Ok(answers)
        } else {
            Err(ScriptError::Missing {
                page: page.id.clone(),
                names: missing,
            })
        }
    }
}

#[derive(Debug)]
pub struct SimulationOutcome {
    pub session: Session,
    pub report: Report,
}

impl SimulationOutcome {
    /// Pages issued, rule firings and function calls, in order.
    pub fn trace_json(&self) -> serde_json::Value {
        let s = &self.session;
        json!({
            "traceVersion": TRACE_VERSION,
            "service": s.service().name,
            "citizenId": s.citizen_id(),
            "mode": s.mode(),
            "pages": s.history().iter().map(|h| h.page.id.clone()).collect::<Vec<_>>(),
            "invoked": s.invoked(),
            "warnings": s.warnings(),
            "events": s.events(),
        })
    }
}

/// Drives a session to its report with scripted answers. The citizen is
/// `citizen_id` if given, else the script's, else empty.
pub fn run_scripted(
    service: Arc<Service>,
    mode: GeneratorMode,
    client: &dyn DataAdminClient,
    script: &ScriptedAnswers,
    citizen_id: Option<&str>,
) -> Result<SimulationOutcome, ScriptError> {
    let citizen = citizen_id.or(script.citizen_id.as_deref()).unwrap_or("");
    let mut session = Session::start(service, citizen, mode, client)?;
    let mut pages = 0;
    while let Ok(page) = session.page() {
        pages += 1;
        if pages > MAX_PAGES {
            return Err(ScriptError::Runaway(MAX_PAGES));
        }
        let answers = script.answers_for(page)?;
        session.submit(&answers, client)?;
    }
    let report = session.report()?.clone();
    Ok(SimulationOutcome { session, report })
}
