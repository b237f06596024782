//! Starts the session service on a local port and walks one runtime
//! session over HTTP.
//!
//! For a long-running server use `formweave serve --services-dir services
//! --fixtures services/fixtures.json --ui-dir ui`.

use std::path::Path;
use std::sync::Arc;

use formweave::cui::page_from_wire;
use formweave::data_admin::load_fixtures;
use formweave::interaction::ScriptedAnswers;
use formweave::server::{BackgroundServer, ServerState};
use formweave::service::ServiceDirectory;
use serde_json::{json, Value};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("services");
    let services = ServiceDirectory::load(&dir).expect("services directory");
    let fixtures =
        load_fixtures(&dir.join("fixtures.json"), &services.catalogs()).expect("fixtures");
    let server = BackgroundServer::start(
        Arc::new(ServerState::with_fixtures(services, fixtures, None)),
        None,
    )
    .expect("local port");
    let base = server.url();
    println!("listening on {base}");

    let created: Value = ureq::post(&format!("{base}/sessions"))
        .send_json(json!({"service": "FellingPermit", "citizenId": "C1", "mode": "runtime"}))
        .expect("session created")
        .into_json()
        .expect("json body");
    let id = created["sessionId"].as_str().unwrap().to_string();
    let script =
        ScriptedAnswers::load(&dir.join("scenarios/felling-permit.json")).expect("scenario");

    let mut body: Value = ureq::get(&format!("{base}/sessions/{id}/page"))
        .call()
        .unwrap()
        .into_json()
        .unwrap();
    while body.get("pageId").is_some() {
        let page = page_from_wire(&body.to_string()).unwrap();
        let names: Vec<&str> = page.inputs().map(|i| i.name.as_str()).collect();
        println!("{}: {names:?}", page.id);
        let answers = script.answers_for(&page).unwrap();
        body = ureq::post(&format!("{base}/sessions/{id}/answers"))
            .send_json(json!({ "answers": answers }))
            .unwrap()
            .into_json()
            .unwrap();
    }
    let report = ureq::get(&format!("{base}/sessions/{id}/report?format=text"))
        .call()
        .unwrap()
        .into_string()
        .unwrap();
    print!("{report}");
}
