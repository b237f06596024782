//! Steps the fixed workflow strategy by hand: function calls first where
//! they fill the most fields, questions otherwise.

use std::collections::BTreeSet;
use std::path::Path;

use formweave::configuration::{new_configuration, Decision, OpenItemKind};
use formweave::data_admin::{invoke, load_fixtures, MockDataAdmin, Values};
use formweave::service::ServiceDirectory;
use formweave::value::Value;
use formweave::workflow::{apply_function_result, plan_next, WorkflowStep};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("services");
    let services = ServiceDirectory::load(&dir).expect("services directory");
    let client = MockDataAdmin::new(
        load_fixtures(&dir.join("fixtures.json"), &services.catalogs()).expect("fixtures"),
    );
    let service = services.get("ExcerptRequest").expect("bundled");

    let mut app = new_configuration(service.model.clone()).expect("fresh configuration");
    let mut history = BTreeSet::new();
    loop {
        match plan_next(&app, &service.catalog, &history) {
            WorkflowStep::CallFunction { function } => {
                history.insert(function.clone());
                let f = service.catalog.function(&function).unwrap();
                let inputs: Values = f
                    .inputs
                    .iter()
                    .filter_map(|p| {
                        app.value(&p.parse().ok()?)
                            .map(|v| (p.clone(), v.to_lexical()))
                    })
                    .collect();
                let values =
                    invoke(&client, &service.catalog, &function, "C1", &inputs).expect("fixture");
                let (next, notes) =
                    apply_function_result(&app, f, &values).expect("well-typed fixture");
                println!("call {function}: filled {:?}", notes.applied);
                app = next;
            }
            WorkflowStep::AskUser { items } => {
                let paths: Vec<String> = items.iter().map(|i| i.path.to_string()).collect();
                println!("ask user: {paths:?}");
                // A stand-in user: first option, no extras, a plausible value.
                for item in items {
                    let decision = match item.kind {
                        OpenItemKind::Value { value_type } => {
                            let text = if value_type.as_str() == "integer" {
                                "1"
                            } else {
                                "x"
                            };
                            Decision::SetValue(
                                item.path.clone(),
                                Value::parse(value_type, text).unwrap(),
                            )
                        }
                        OpenItemKind::Group => {
                            let first =
                                app.group_status(&item.path).undecided[0].name().to_string();
                            Decision::ResolveGroup(item.path.clone(), vec![first])
                        }
                        OpenItemKind::Optional => Decision::Eliminate(item.path.clone()),
                        OpenItemKind::Clone => Decision::Clone(item.path.clone(), 1),
                    };
                    if let Ok(next) = app.specialize(&decision) {
                        app = next;
                    }
                }
            }
            WorkflowStep::Finish => {
                println!("finished");
                break;
            }
        }
    }
}
