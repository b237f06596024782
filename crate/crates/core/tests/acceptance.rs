//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use formweave::configuration::{
    new_configuration, parse_application_model, serialize_application_model, Decision, Necessity,
    OpenItemKind,
};
use formweave::cui::{render_html, render_report, Page, ReportFormat};
use formweave::data_admin::{FixtureStore, MockDataAdmin};
use formweave::feature_model::{
    canonical_line, enumerate_configurations, parse_document, parse_feature_model,
    serialize_feature_model, DirectorySource, FeatureModel, Node,
};
use formweave::interaction::{
    generate_offline, run_scripted, GeneratorMode, ScriptedAnswers, SessionEvent,
};
use formweave::server::{BackgroundServer, ServerState};
use formweave::service::Service;
use formweave::value::{Value, ValueType};
use formweave::workflow::{plan_next, DataFunction, FunctionCatalog, WorkflowStep};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const RANDOM_MODELS: u64 = 200;
const MAX_NODES: usize = 12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(limit: Duration, started: Instant) -> Result<String, String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn page_rule_conformance() -> Check {
    let started = Instant::now();
    let file = testdata("golden-parking.fm.xml");
    let text = std::fs::read_to_string(&file).map_err(|e| e.to_string())?;
    let model =
        parse_document(&text, &DirectorySource::for_file(&file)).map_err(|e| e.to_string())?;
    let app = generate_offline(Arc::new(model)).map_err(|e| e.to_string())?;
    let html = render_html(&app.pages[0]);
    let golden =
        std::fs::read_to_string(testdata("golden-parking.html")).map_err(|e| e.to_string())?;
    ensure(html == golden, || {
        "output differs from golden-parking.html".into()
    })?;
    for needle in [
        "<html>",
        "<head>",
        "<title>Parking permit</title>",
        "<form ",
    ] {
        ensure(html.contains(needle), || format!("skeleton lacks {needle}"))?;
    }
    for label in [
        "Permit holder",
        "Number of vehicles",
        "Vehicle length (m)",
        "Parking zone",
    ] {
        ensure(html.contains(&format!(">{label}</label>")), || {
            format!("no label {label}")
        })?;
    }
    for name in ["Parking.Holder", "Parking.Vehicles", "Parking.Length"] {
        let tag = format!(r#"<input type="text" id="{name}" name="{name}" value="""#);
        ensure(html.contains(&tag), || format!("no text input {name}"))?;
    }
    let radios = html
        .matches(r#"<input type="radio" name="Parking.Zone""#)
        .count();
    ensure(radios == 3, || format!("{radios} zone radios"))?;
    ensure(!html.contains("Parking.Duration"), || {
        "singleton group has a widget".into()
    })?;
    within(Duration::from_secs(1), started)
}

fn oracle_round_trip() -> Check {
    let started = Instant::now();
    let mut rejected = 0;
    for seed in 0..RANDOM_MODELS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, MAX_NODES);
        let all = selected_lines(
            &enumerate_configurations(&model, CLONE_BOUND).map_err(|e| e.to_string())?,
        );
        let run = random_session(&mut rng, model).map_err(|e| format!("seed {seed}: {e}"))?;
        rejected += run.rejected;
        let app = run.session.app();
        ensure(app.is_complete(), || {
            format!("seed {seed}: session ended incomplete")
        })?;
        let line = canonical_line(app);
        ensure(all.contains(&line), || {
            format!("seed {seed}: {line} is not an enumerated configuration")
        })?;
        let held: BTreeSet<(String, String)> = app
            .values()
            .iter()
            .map(|(p, v)| (p.to_string(), v.to_lexical()))
            .collect();
        ensure(held == run.submitted, || {
            format!(
                "seed {seed}: values {held:?} differ from submitted {:?}",
                run.submitted
            )
        })?;
    }
    Ok(format!(
        "{RANDOM_MODELS} models, {rejected} rejected pages retried, {}",
        within(Duration::from_secs(60), started)?
    ))
}

fn random_decision(
    rng: &mut ChaCha8Rng,
    app: &formweave::configuration::ApplicationFeatureModel,
) -> Option<Decision> {
    let items = app.open_items();
    let item = items.choose(rng)?;
    let path = item.path.clone();
    Some(match item.kind {
        OpenItemKind::Value { value_type } => Decision::SetValue(
            path,
            Value::parse(value_type, &random_value(rng, value_type)).unwrap(),
        ),
        OpenItemKind::Optional if rng.gen_bool(0.5) => Decision::Select(path),
        OpenItemKind::Optional => Decision::Eliminate(path),
        OpenItemKind::Clone => Decision::Clone(path, rng.gen_range(0..=CLONE_BOUND)),
        OpenItemKind::Group => {
            let undecided = app.group_status(&path).undecided;
            match rng.gen_range(0..3) {
                0 => Decision::Select(undecided.choose(rng).unwrap().clone()),
                1 => Decision::Eliminate(undecided.choose(rng).unwrap().clone()),
                _ => Decision::ResolveGroup(
                    path,
                    undecided
                        .iter()
                        .filter(|_| rng.gen_bool(0.5))
                        .map(|p| p.name().to_string())
                        .collect(),
                ),
            }
        }
    })
}

fn monotonicity() -> Check {
    let mut steps = 0;
    for seed in 0..RANDOM_MODELS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, MAX_NODES);
        let all = enumerate_configurations(&model, CLONE_BOUND).map_err(|e| e.to_string())?;
        let mut app = new_configuration(Arc::new(model)).map_err(|e| e.to_string())?;
        let mut previous = compatible_set(&app, &all);
        for _ in 0..200 {
            let Some(decision) = random_decision(&mut rng, &app) else {
                break;
            };
            let Ok(next) = app.specialize(&decision) else {
                continue;
            };
            let current = compatible_set(&next, &all);
            ensure(current.is_subset(&previous), || {
                format!(
                    "seed {seed}: {decision:?} admitted {:?}",
                    current.difference(&previous).collect::<Vec<_>>()
                )
            })?;
            steps += 1;
            app = next;
            previous = current;
        }
    }
    Ok(format!("{RANDOM_MODELS} models, {steps} specialize steps"))
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn workflow_service(functions: Vec<DataFunction>) -> Arc<Service> {
    let model = FeatureModel::new(
        "W",
        vec![
            Node::mandatory("Person").with_children(vec![
                Node::mandatory("Name").with_attribute(ValueType::String),
                Node::mandatory("Street").with_attribute(ValueType::String),
                Node::mandatory("City").with_attribute(ValueType::String),
            ]),
            Node::mandatory("Plot").with_attribute(ValueType::String),
        ],
    );
    let catalog = FunctionCatalog {
        service: "W".into(),
        functions,
    };
    catalog.validate(&model).unwrap();
    Arc::new(Service {
        name: "W".into(),
        model: Arc::new(model),
        catalog,
        model_file: Default::default(),
    })
}

fn function(name: &str, inputs: &[&str], provides: &[&str]) -> DataFunction {
    DataFunction {
        name: name.into(),
        inputs: strings(inputs),
        provides: strings(provides),
    }
}

fn invocations(events: &[SessionEvent]) -> Vec<(String, Vec<String>)> {
    events
        .iter()
        .filter_map(|e| match e {
            SessionEvent::FunctionInvoked {
                function, applied, ..
            } => Some((function.clone(), applied.clone())),
            _ => None,
        })
        .collect()
}

/// No function twice, and no page asks for a field a function filled.
fn check_session_discipline(
    label: &str,
    session: &formweave::interaction::Session,
) -> Result<(), String> {
    let calls = invocations(session.events());
    let mut seen = BTreeSet::new();
    for (f, _) in &calls {
        ensure(seen.insert(f.clone()), || {
            format!("{label}: {f} invoked twice")
        })?;
    }
    let filled: BTreeSet<&String> = calls.iter().flat_map(|(_, a)| a).collect();
    for h in session.history() {
        for input in h.page.inputs() {
            ensure(!filled.contains(&input.name), || {
                format!("{label}: {} asks filled {}", h.page.id, input.name)
            })?;
        }
    }
    Ok(())
}

fn workflow_conformance() -> Check {
    let started = Instant::now();
    let greedy = workflow_service(vec![
        function("aPlot", &[], &["W.Plot"]),
        function(
            "zPerson",
            &[],
            &["W.Person.Name", "W.Person.Street", "W.Person.City"],
        ),
    ]);
    let app = new_configuration(greedy.model.clone()).map_err(|e| e.to_string())?;
    let first = plan_next(&app, &greedy.catalog, &BTreeSet::new());
    ensure(
        first
            == WorkflowStep::CallFunction {
                function: "zPerson".into(),
            },
        || format!("greedy first step {first:?}"),
    )?;

    let fixtures = FixtureStore::from_json(
        r#"{"citizens": {"C1": {
            "aPlot": {"W.Plot": "Lot 7"},
            "zPerson": {"W.Person.Name": "Jansen", "W.Person.Street": "Dorpstraat 1", "W.Person.City": "Enschede"}
        }}}"#,
    )
    .map_err(|e| e.to_string())?;
    let client = MockDataAdmin::new(fixtures);
    let script = ScriptedAnswers::default();
    let out = run_scripted(greedy, GeneratorMode::Runtime, &client, &script, Some("C1"))
        .map_err(|e| e.to_string())?;
    let order: Vec<String> = invocations(out.session.events())
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    ensure(order == ["zPerson", "aPlot"], || {
        format!("invocation order {order:?}")
    })?;
    check_session_discipline("greedy", &out.session)?;

    let uncovered = workflow_service(vec![function("getName", &[], &["W.Person.Name"])]);
    let app = new_configuration(uncovered.model.clone()).map_err(|e| e.to_string())?;
    match plan_next(&app, &uncovered.catalog, &BTreeSet::new()) {
        WorkflowStep::AskUser { items } => {
            let paths: Vec<String> = items.iter().map(|i| i.path.to_string()).collect();
            ensure(
                items.iter().all(|i| i.necessity == Necessity::Mandatory),
                || format!("asked {paths:?}"),
            )?;
            ensure(
                paths == ["W.Person.Street", "W.Person.City", "W.Plot"],
                || format!("asked {paths:?}"),
            )?;
        }
        other => {
            return Err(format!(
                "uncoverable mandatory fields, first step {other:?}"
            ))
        }
    }

    let dir = bundled();
    let client = MockDataAdmin::new(bundled_fixtures(&dir));
    for service in dir.iter() {
        let script = scenario(service)?;
        let out = run_scripted(
            service.clone(),
            GeneratorMode::Runtime,
            &client,
            &script,
            None,
        )
        .map_err(|e| e.to_string())?;
        ensure(!out.session.invoked().is_empty(), || {
            format!("{}: no function invoked", service.name)
        })?;
        check_session_discipline(&service.name, &out.session)?;
    }
    within(Duration::from_secs(1), started)
}

fn scenario(service: &Service) -> Result<ScriptedAnswers, String> {
    let stem = service
        .model_file
        .file_name()
        .unwrap()
        .to_string_lossy()
        .replace(".fm.xml", ".json");
    ScriptedAnswers::load(&services_dir().join("scenarios").join(stem)).map_err(|e| e.to_string())
}

fn mode_equivalence() -> Check {
    let started = Instant::now();
    let dir = bundled();
    ensure(dir.len() == 2, || format!("{} bundled services", dir.len()))?;
    let client = MockDataAdmin::new(bundled_fixtures(&dir));
    for service in dir.iter() {
        let script = scenario(service)?;
        let mut reports = BTreeMap::new();
        for mode in GeneratorMode::ALL {
            let out = run_scripted(service.clone(), mode, &client, &script, None)
                .map_err(|e| format!("{}: {mode}: {e}", service.name))?;
            let rendered =
                [ReportFormat::Xml, ReportFormat::Text].map(|f| render_report(&out.report, f));
            reports.insert(mode.as_str(), rendered);
        }
        let first = reports.values().next().unwrap();
        ensure(reports.values().all(|r| r == first), || {
            format!("{}: reports differ between modes", service.name)
        })?;
    }
    within(Duration::from_secs(5), started)
}

fn http_report(base: &str, service: &str, script: &ScriptedAnswers) -> Result<String, String> {
    let created: serde_json::Value = ureq::post(&format!("{base}/sessions"))
        .send_json(json!({"service": service, "citizenId": script.citizen_id, "mode": "runtime"}))
        .map_err(|e| e.to_string())?
        .into_json()
        .map_err(|e| e.to_string())?;
    let id = created["sessionId"]
        .as_str()
        .ok_or("no session id")?
        .to_string();
    let mut body: serde_json::Value = ureq::get(&format!("{base}/sessions/{id}/page"))
        .call()
        .map_err(|e| e.to_string())?
        .into_json()
        .map_err(|e| e.to_string())?;
    while body.get("pageId").is_some() {
        let page: Page = serde_json::from_value(body).map_err(|e| e.to_string())?;
        let answers = script.answers_for(&page).map_err(|e| e.to_string())?;
        body = ureq::post(&format!("{base}/sessions/{id}/answers"))
            .send_json(json!({ "answers": answers }))
            .map_err(|e| e.to_string())?
            .into_json()
            .map_err(|e| e.to_string())?;
    }
    ureq::get(&format!("{base}/sessions/{id}/report?format=text"))
        .call()
        .map_err(|e| e.to_string())?
        .into_string()
        .map_err(|e| e.to_string())
}

fn cli_http_equivalence() -> Check {
    let model = services_dir().join("felling-permit.fm.xml");
    let answers = services_dir().join("scenarios/felling-permit.json");
    let fixtures = services_dir().join("fixtures.json");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let trace = tmp.path().join("trace.json");
    let arg = |p: &Path| p.to_string_lossy().into_owned();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = [
        "formweave",
        "simulate",
        &arg(&model),
        "--answers",
        &arg(&answers),
        "--fixtures",
        &arg(&fixtures),
        "--trace",
        &arg(&trace),
    ];
    let code = formweave::cli::run(args, &mut out, &mut err);
    ensure(code == 0, || {
        format!("simulate exited {code}: {}", String::from_utf8_lossy(&err))
    })?;

    let dir = bundled();
    let fixtures = bundled_fixtures(&dir);
    let server = BackgroundServer::start(
        Arc::new(ServerState::with_fixtures(dir, fixtures, None)),
        None,
    )
    .map_err(|e| e.to_string())?;
    let script = ScriptedAnswers::load(&answers).map_err(|e| e.to_string())?;
    let http = http_report(&server.url(), "FellingPermit", &script)?;
    ensure(out == http.as_bytes(), || {
        format!("CLI:\n{}\nHTTP:\n{http}", String::from_utf8_lossy(&out))
    })?;
    Ok(format!("{} report bytes", out.len()))
}

fn model_files() -> Vec<std::path::PathBuf> {
    let mut files = vec![testdata("golden-parking.fm.xml")];
    for dir in [services_dir(), services_dir().join("shared")] {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.to_string_lossy().ends_with(".fm.xml") {
                files.push(path);
            }
        }
    }
    files.sort();
    files
}

fn serialization_stability() -> Check {
    let files = model_files();
    for file in &files {
        let text = std::fs::read_to_string(file).map_err(|e| e.to_string())?;
        let model = parse_document(&text, &DirectorySource::for_file(file))
            .map_err(|e| format!("{}: {e}", file.display()))?;
        let once = serialize_feature_model(&model);
        let reparsed =
            parse_feature_model(&once).map_err(|e| format!("{}: {e}", file.display()))?;
        ensure(reparsed == model, || {
            format!("{}: parse(serialize(m)) != m", file.display())
        })?;
        ensure(serialize_feature_model(&reparsed) == once, || {
            format!("{}: serialization not stable", file.display())
        })?;
        ensure(serialize_feature_model(&model) == once, || {
            format!("{}: two runs differ", file.display())
        })?;
    }
    let dir = bundled();
    let client = MockDataAdmin::new(bundled_fixtures(&dir));
    for service in dir.iter() {
        let out = run_scripted(
            service.clone(),
            GeneratorMode::Runtime,
            &client,
            &scenario(service)?,
            None,
        )
        .map_err(|e| e.to_string())?;
        let once = serialize_application_model(out.session.app());
        let reparsed =
            parse_application_model(&once).map_err(|e| format!("{}: {e}", service.name))?;
        ensure(&reparsed == out.session.app(), || {
            format!("{}: application model round trip", service.name)
        })?;
        ensure(serialize_application_model(&reparsed) == once, || {
            format!("{}: application model bytes", service.name)
        })?;
    }
    Ok(format!(
        "{} family models, {} application models",
        files.len(),
        dir.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 page rule conformance", page_rule_conformance),
        ("2 oracle round-trip", oracle_round_trip),
        ("3 specialization monotonicity", monotonicity),
        ("4 workflow fixed strategy", workflow_conformance),
        ("5 mode equivalence", mode_equivalence),
        ("6 CLI/HTTP equivalence", cli_http_equivalence),
        ("7 serialization stability", serialization_stability),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
