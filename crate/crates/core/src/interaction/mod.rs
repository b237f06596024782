//! Sessions: the generator loop that alternates page generation, user
//! answers and data administration calls until the application model is
//! complete.
//!
//! * offline: one page with every open item; no function is called
//! * initial-interaction: as offline, after one call of the best function
//!   whose results become prefills
//! * runtime-interaction: the workflow planner decides each step; every
//!   page covers one `AskUser` step and functions run eagerly between pages
//!
//! In the two form modes a submitted page can open new items (an optional
//! feature with mandatory children, a clone count); those are issued on a
//! further page.

mod script;
#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::Utc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::configuration::{
    parse_application_model, serialize_application_model, ApplicationFeatureModel, ConfigError,
    OpenItem,
};
use crate::cui::{Page, Report, WebApplication};
use crate::data_admin::{invoke, DataAdminClient, DataAdminError, MockDataAdmin, Values};
use crate::feature_model::{FeatureModel, InstancePath};
use crate::service::Service;
use crate::transform::{
    auto_resolve, cui_rules, cui_to_fm, fm_to_cui_with, fm_to_report, Answers, PageOptions,
    TraceEntry, TransformError, WidgetError,
};
use crate::workflow::{apply_function_result, plan_next, yield_of, FunctionCatalog, WorkflowStep};

pub use script::{run_scripted, ScriptError, ScriptedAnswers, SimulationOutcome, TRACE_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorMode {
    #[serde(rename = "offline")]
    Offline,
    #[serde(rename = "initial-interaction")]
    Initial,
    #[serde(rename = "runtime-interaction")]
    Runtime,
}

impl GeneratorMode {
    pub const ALL: [GeneratorMode; 3] = [
        GeneratorMode::Offline,
        GeneratorMode::Initial,
        GeneratorMode::Runtime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorMode::Offline => "offline",
            GeneratorMode::Initial => "initial-interaction",
            GeneratorMode::Runtime => "runtime-interaction",
        }
    }
}

impl fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode '{0}' (expected offline, initial or runtime)")]
pub struct UnknownMode(pub String);

impl FromStr for GeneratorMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "offline" => Ok(GeneratorMode::Offline),
            "initial" | "initial-interaction" => Ok(GeneratorMode::Initial),
            "runtime" | "runtime-interaction" => Ok(GeneratorMode::Runtime),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Collecting,
    Complete,
    Reported,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Collecting => "collecting",
            Phase::Complete => "complete",
            Phase::Reported => "reported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub page: Page,
    pub answers: Answers,
}

/// One step of a session, in the order it happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    tag = "event",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase"
)]
pub enum SessionEvent {
    PageIssued {
        page_id: String,
        widgets: Vec<String>,
        rules: Vec<TraceEntry>,
    },
    AnswersApplied {
        page_id: String,
        decisions: Vec<TraceEntry>,
    },
    AutoResolved {
        decision: String,
    },
    FunctionInvoked {
        function: String,
        applied: Vec<String>,
        skipped: Vec<String>,
    },
    Prefilled {
        function: String,
        paths: Vec<String>,
    },
    FunctionFailed {
        function: String,
        error: String,
    },
    Completed,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("session is {0}, not collecting")]
    NotCollecting(Phase),
    #[error("invalid answers: {}", errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid {
        errors: Vec<WidgetError>,
        page: Page,
    },
    #[error("the application is not complete; open: {}", open.join(", "))]
    Premature { open: Vec<String> },
    #[error(transparent)]
    DataAdmin(#[from] DataAdminError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("no step applies although the application is incomplete")]
    Stuck,
    #[error("cannot restore session: {0}")]
    Restore(String),
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    service: Arc<Service>,
    citizen_id: String,
    mode: GeneratorMode,
    app: ApplicationFeatureModel,
    history: Vec<HistoryEntry>,
    invoked: BTreeSet<String>,
    phase: Phase,
    current: Option<Page>,
    prefills: BTreeMap<InstancePath, String>,
    warnings: Vec<String>,
    events: Vec<SessionEvent>,
    report: Option<Report>,
    pages_issued: usize,
}

fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl Session {
    /// Creates a fresh configuration and runs up to the first page (or to
    /// completion). In runtime mode a data administration failure here is
    /// an error; later ones only add warnings.
    pub fn start(
        service: Arc<Service>,
        citizen_id: &str,
        mode: GeneratorMode,
        client: &dyn DataAdminClient,
    ) -> Result<Session, SessionError> {
        let app = ApplicationFeatureModel::new(service.model.clone())?;
        let mut s = Session {
            id: new_session_id(),
            service,
            citizen_id: citizen_id.to_string(),
            mode,
            app,
            history: Vec::new(),
            invoked: BTreeSet::new(),
            phase: Phase::Collecting,
            current: None,
            prefills: BTreeMap::new(),
            warnings: Vec::new(),
            events: Vec::new(),
            report: None,
            pages_issued: 0,
        };
        s.resolve_forced()?;
        if mode == GeneratorMode::Initial {
            s.initial_call(client);
        }
        s.advance(client, true)?;
        Ok(s)
    }

    pub fn service(&self) -> &Arc<Service> {
        &self.service
    }

    pub fn citizen_id(&self) -> &str {
        &self.citizen_id
    }

    pub fn mode(&self) -> GeneratorMode {
        self.mode
    }

    pub fn app(&self) -> &ApplicationFeatureModel {
        &self.app
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn invoked(&self) -> &BTreeSet<String> {
        &self.invoked
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    /// The page awaiting answers. Stable until answers are accepted.
    pub fn page(&self) -> Result<&Page, SessionError> {
        match (&self.current, self.phase) {
            (Some(p), Phase::Collecting) => Ok(p),
            _ => Err(SessionError::NotCollecting(self.phase)),
        }
    }

    /// Applies answers to the current page. On failure the session is left
    /// untouched and the error carries the page annotated with messages.
    pub fn submit(
        &mut self,
        answers: &Answers,
        client: &dyn DataAdminClient,
    ) -> Result<(), SessionError> {
        let page = self.page()?.clone();
        let (app, trace) =
            cui_to_fm(&self.app, &page, answers).map_err(|e| invalid(&page, e.widget_errors()))?;
        let mut next = self.clone();
        next.app = app;
        next.current = None;
        next.events.push(SessionEvent::AnswersApplied {
            page_id: page.id.clone(),
            decisions: trace.entries,
        });
        next.history.push(HistoryEntry {
            page: page.clone(),
            answers: answers.clone(),
        });
        let settled = next
            .resolve_forced()
            .and_then(|_| next.advance(client, false));
        match settled {
            Ok(()) => {
                *self = next;
                Ok(())
            }
            Err(SessionError::Config(e @ ConfigError::Conflict { .. })) => {
                Err(invalid(&page, conflict_errors(&page, &e)))
            }
            Err(e) => Err(e),
        }
    }

    /// The report of the completed application; later calls return the same
    /// report.
    pub fn report(&mut self) -> Result<&Report, SessionError> {
        if self.phase == Phase::Collecting {
            return Err(SessionError::Premature {
                open: self
                    .app
                    .open_items()
                    .iter()
                    .map(|i| i.path.to_string())
                    .collect(),
            });
        }
        if self.report.is_none() {
            let mut report = fm_to_report(&self.app, &self.citizen_id)
                .map_err(|e| SessionError::Premature { open: e.open })?;
            report.completed_at = Some(Utc::now());
            self.report = Some(report);
            self.phase = Phase::Reported;
        }
        Ok(self.report.as_ref().unwrap())
    }

    fn resolve_forced(&mut self) -> Result<(), SessionError> {
        let (app, applied) = auto_resolve(&self.app)?;
        self.app = app;
        for d in applied {
            self.events.push(SessionEvent::AutoResolved {
                decision: d.to_string(),
            });
        }
        Ok(())
    }

    fn catalog(&self) -> &FunctionCatalog {
        &self.service.catalog
    }

    fn inputs_of(&self, name: &str) -> Values {
        let Some(f) = self.catalog().function(name) else {
            return Values::new();
        };
        f.inputs
            .iter()
            .filter_map(|p| {
                let ip: InstancePath = p.parse().ok()?;
                self.app.value(&ip).map(|v| (p.clone(), v.to_lexical()))
            })
            .collect()
    }

    fn fail(&mut self, function: &str, error: String) {
        log::warn!("{function}: {error}");
        self.warnings.push(format!("{function}: {error}"));
        self.events.push(SessionEvent::FunctionFailed {
            function: function.to_string(),
            error,
        });
    }

    /// Initial-interaction pre-pass: the best invocable function, once, its
    /// results kept as prefills.
    fn initial_call(&mut self, client: &dyn DataAdminClient) {
        let best = self
            .catalog()
            .functions
            .iter()
            .map(|f| (yield_of(&self.app, f, &self.invoked), f.name.clone()))
            .filter(|(y, _)| *y >= 1)
            .max_by(|(ya, na), (yb, nb)| ya.cmp(yb).then_with(|| nb.cmp(na)));
        let Some((_, name)) = best else { return };
        self.invoked.insert(name.clone());
        let inputs = self.inputs_of(&name);
        match invoke(
            client,
            &self.service.catalog,
            &name,
            &self.citizen_id,
            &inputs,
        ) {
            Ok(values) => {
                let mut paths = Vec::new();
                for (path, text) in values {
                    if let Ok(ip) = path.parse::<InstancePath>() {
                        self.prefills.insert(ip, text);
                        paths.push(path);
                    }
                }
                self.events.push(SessionEvent::Prefilled {
                    function: name,
                    paths,
                });
            }
            Err(e) => self.fail(&name, e.to_string()),
        }
    }

    fn call(
        &mut self,
        name: &str,
        client: &dyn DataAdminClient,
        strict: bool,
    ) -> Result<(), SessionError> {
        self.invoked.insert(name.to_string());
        let inputs = self.inputs_of(name);
        let values = match invoke(
            client,
            &self.service.catalog,
            name,
            &self.citizen_id,
            &inputs,
        ) {
            Ok(v) => v,
            Err(e) if strict => return Err(e.into()),
            Err(e) => {
                self.fail(name, e.to_string());
                return Ok(());
            }
        };
        let function = self
            .catalog()
            .function(name)
            .expect("invoked function is in the catalog")
            .clone();
        match apply_function_result(&self.app, &function, &values) {
            Ok((app, notes)) => {
                self.app = app;
                self.events.push(SessionEvent::FunctionInvoked {
                    function: name.to_string(),
                    applied: notes.applied,
                    skipped: notes.skipped,
                });
            }
            Err(e) => self.fail(name, e.to_string()),
        }
        Ok(())
    }

    fn issue(&mut self, items: &[OpenItem]) -> Result<bool, SessionError> {
        let options = PageOptions {
            page_id: format!("page-{:03}", self.pages_issued + 1),
            prefills: self.prefills.clone(),
            ..PageOptions::default()
        };
        let out = fm_to_cui_with(&self.app, items, &cui_rules(), &options)?;
        if !out.forced.is_empty() {
            for d in &out.forced {
                self.app = self.app.specialize(d)?;
                self.events.push(SessionEvent::AutoResolved {
                    decision: d.to_string(),
                });
            }
            return Ok(false);
        }
        self.pages_issued += 1;
        self.events.push(SessionEvent::PageIssued {
            page_id: out.page.id.clone(),
            widgets: out.page.inputs().map(|i| i.name.clone()).collect(),
            rules: out.trace.entries,
        });
        self.current = Some(out.page);
        Ok(true)
    }

    fn complete(&mut self) {
        self.phase = Phase::Complete;
        self.current = None;
        self.events.push(SessionEvent::Completed);
    }

    /// Runs until a page is issued or the application is complete.
    fn advance(
        &mut self,
        client: &dyn DataAdminClient,
        at_start: bool,
    ) -> Result<(), SessionError> {
        loop {
            match self.mode {
                GeneratorMode::Offline | GeneratorMode::Initial => {
                    let items = self.app.open_items();
                    if items.is_empty() {
                        if !self.app.is_complete() {
                            return Err(SessionError::Stuck);
                        }
                        self.complete();
                        return Ok(());
                    }
                    if self.issue(&items)? {
                        return Ok(());
                    }
                }
                GeneratorMode::Runtime => {
                    match plan_next(&self.app, &self.service.catalog, &self.invoked) {
                        WorkflowStep::CallFunction { function } => {
                            self.call(&function, client, at_start)?;
                            self.resolve_forced()?;
                        }
                        WorkflowStep::AskUser { items } => {
                            if items.is_empty() {
                                return Err(SessionError::Stuck);
                            }
                            if self.issue(&items)? {
                                return Ok(());
                            }
                        }
                        WorkflowStep::Finish => {
                            self.complete();
                            return Ok(());
                        }
                    }
                }
            }
        }
    }

    /// Starts a fresh session and feeds it the recorded answers.
    pub fn replay(&self, client: &dyn DataAdminClient) -> Result<Session, SessionError> {
        let mut s = Session::start(self.service.clone(), &self.citizen_id, self.mode, client)?;
        for h in &self.history {
            s.submit(&h.answers, client)?;
        }
        Ok(s)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            service: self.service.name.clone(),
            citizen_id: self.citizen_id.clone(),
            mode: self.mode,
            app: serialize_application_model(&self.app),
            history: self.history.clone(),
            invoked: self.invoked.clone(),
            phase: self.phase,
            current: self.current.clone(),
            prefills: self
                .prefills
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            warnings: self.warnings.clone(),
            events: self.events.clone(),
            report: self.report.clone(),
            pages_issued: self.pages_issued,
        }
    }

    pub fn restore(
        snapshot: SessionSnapshot,
        service: Arc<Service>,
    ) -> Result<Session, SessionError> {
        let restore = |m: String| SessionError::Restore(m);
        if snapshot.service != service.name {
            return Err(restore(format!(
                "snapshot is for service '{}'",
                snapshot.service
            )));
        }
        let app = parse_application_model(&snapshot.app).map_err(|e| restore(e.to_string()))?;
        if app.family().as_ref() != service.model.as_ref() {
            return Err(restore(
                "the service model changed since the snapshot".into(),
            ));
        }
        let app = ApplicationFeatureModel::from_parts(
            service.model.clone(),
            app.states().clone(),
            app.clones().clone(),
            app.values().clone(),
        )
        .map_err(|e| restore(e.to_string()))?;
        let prefills = snapshot
            .prefills
            .into_iter()
            .map(|(k, v)| {
                k.parse()
                    .map(|p| (p, v))
                    .map_err(|_| restore(format!("bad prefill path {k}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Session {
            id: snapshot.id,
            service,
            citizen_id: snapshot.citizen_id,
            mode: snapshot.mode,
            app,
            history: snapshot.history,
            invoked: snapshot.invoked,
            phase: snapshot.phase,
            current: snapshot.current,
            prefills,
            warnings: snapshot.warnings,
            events: snapshot.events,
            report: snapshot.report,
            pages_issued: snapshot.pages_issued,
        })
    }
}

/// Serializable form of a session; the application model is kept as an
/// annotated model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSnapshot {
    pub id: String,
    pub service: String,
    pub citizen_id: String,
    pub mode: GeneratorMode,
    pub app: String,
    pub history: Vec<HistoryEntry>,
    pub invoked: BTreeSet<String>,
    pub phase: Phase,
    pub current: Option<Page>,
    pub prefills: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub events: Vec<SessionEvent>,
    pub report: Option<Report>,
    pub pages_issued: usize,
}

fn ad_hoc_service(family: Arc<FeatureModel>, catalog: FunctionCatalog) -> Arc<Service> {
    Arc::new(Service {
        name: family.name.clone(),
        model: family,
        catalog,
        model_file: Default::default(),
    })
}

fn invalid(page: &Page, errors: Vec<WidgetError>) -> SessionError {
    let mut annotated = page.clone();
    for err in &errors {
        if let Some(input) = annotated.input_mut(&err.name) {
            input.error = Some(err.message.clone());
        }
    }
    SessionError::Invalid {
        errors,
        page: annotated,
    }
}

/// Answers whose consequences conflict are rejected like malformed ones, on
/// the inputs whose subtree holds the conflict, or on every input if none does.
fn conflict_errors(page: &Page, conflict: &ConfigError) -> Vec<WidgetError> {
    let ConfigError::Conflict { trigger, path, .. } = conflict else {
        return Vec::new();
    };
    let within = |name: &str, p: &str| {
        p.strip_prefix(name)
            .is_some_and(|rest| rest.is_empty() || rest.starts_with('.') || rest.starts_with('['))
    };
    let message = format!("this answer cannot be completed: {conflict}");
    let error = |name: &str| WidgetError {
        name: name.to_string(),
        message: message.clone(),
    };
    let hit: Vec<WidgetError> = page
        .inputs()
        .filter(|i| within(&i.name, trigger) || within(&i.name, path))
        .map(|i| error(&i.name))
        .collect();
    if hit.is_empty() {
        page.inputs().map(|i| error(&i.name)).collect()
    } else {
        hit
    }
}

/// The complete form for a fresh configuration, without any data calls.
pub fn generate_offline(family: Arc<FeatureModel>) -> Result<WebApplication, SessionError> {
    let service = ad_hoc_service(family, FunctionCatalog::empty(""));
    let s = Session::start(
        service,
        "",
        GeneratorMode::Offline,
        &MockDataAdmin::default(),
    )?;
    Ok(web_application(&s))
}

/// The complete form after one call of the best function. Data
/// administration failures only produce warnings.
pub fn generate_initial(
    family: Arc<FeatureModel>,
    catalog: FunctionCatalog,
    citizen_id: &str,
    client: &dyn DataAdminClient,
) -> Result<(WebApplication, Vec<String>), SessionError> {
    let service = ad_hoc_service(family, catalog);
    let s = Session::start(service, citizen_id, GeneratorMode::Initial, client)?;
    Ok((web_application(&s), s.warnings.clone()))
}

fn web_application(s: &Session) -> WebApplication {
    WebApplication {
        service_name: s.service.name.clone(),
        pages: s.current.iter().cloned().collect(),
    }
}
