//! Runs the felling permit scenario in each generator mode and shows that
//! the reports agree.

use std::path::Path;
use std::sync::Arc;

use formweave::cui::{render_report, ReportFormat};
use formweave::data_admin::{load_fixtures, MockDataAdmin};
use formweave::interaction::{run_scripted, GeneratorMode, ScriptedAnswers};
use formweave::service::ServiceDirectory;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("services");
    let services = ServiceDirectory::load(&dir).expect("services directory");
    let fixtures =
        load_fixtures(&dir.join("fixtures.json"), &services.catalogs()).expect("fixtures");
    let client = MockDataAdmin::new(fixtures);
    let script =
        ScriptedAnswers::load(&dir.join("scenarios/felling-permit.json")).expect("scenario");
    let service = services.get("FellingPermit").expect("bundled");

    let mut reports = Vec::new();
    for mode in GeneratorMode::ALL {
        let out = run_scripted(Arc::clone(&service), mode, &client, &script, None)
            .expect("scenario completes");
        println!(
            "{mode}: {} pages, functions {:?}",
            out.session.history().len(),
            out.session.invoked()
        );
        reports.push(render_report(&out.report, ReportFormat::Text));
    }
    println!(
        "reports identical: {}",
        reports.windows(2).all(|w| w[0] == w[1])
    );
    print!("{}", reports[0]);
}
