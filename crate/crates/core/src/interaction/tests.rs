use std::sync::Arc;

use super::*;
use crate::cui::{render_report, ReportFormat};
use crate::data_admin::FixtureStore;
use crate::feature_model::{FeatureCardinality, GroupCardinality, Node};
use crate::transform::Answer;
use crate::value::ValueType;
use crate::workflow::DataFunction;

fn service() -> Arc<Service> {
    let model = FeatureModel::new(
        "Move",
        vec![
            Node::mandatory("Applicant").with_children(vec![
                Node::mandatory("Name").with_attribute(ValueType::String),
                Node::mandatory("Address").with_attribute(ValueType::String),
                Node::mandatory("Age").with_attribute(ValueType::Integer),
            ]),
            Node::group(
                "Reason",
                GroupCardinality::XOR,
                vec![Node::grouped("Work"), Node::grouped("Study")],
            ),
            Node::optional("Remarks").with_children(vec![
                Node::mandatory("Text").with_attribute(ValueType::String)
            ]),
            Node::solitary("Child", FeatureCardinality::new(0, Some(2))).with_children(vec![
                Node::mandatory("ChildName").with_attribute(ValueType::String),
            ]),
        ],
    );
    let f = |name: &str, inputs: &[&str], provides: &[&str]| DataFunction {
        name: name.into(),
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        provides: provides.iter().map(|s| s.to_string()).collect(),
    };
    let catalog = FunctionCatalog {
        service: "Move".into(),
        functions: vec![
            f(
                "getPersonDetails",
                &[],
                &["Move.Applicant.Name", "Move.Applicant.Address"],
            ),
            f("getAge", &["Move.Applicant.Name"], &["Move.Applicant.Age"]),
        ],
    };
    catalog.validate(&model).unwrap();
    Arc::new(Service {
        name: "Move".into(),
        model: Arc::new(model),
        catalog,
        model_file: Default::default(),
    })
}

fn client() -> MockDataAdmin {
    let store = FixtureStore::from_json(
        r#"{"citizens": {"C1": {
            "getPersonDetails": {"Move.Applicant.Name": "Jansen", "Move.Applicant.Address": "Dorpstraat 1"},
            "getAge": {"Move.Applicant.Age": 40}
        }}}"#,
    )
    .unwrap();
    MockDataAdmin::new(store)
}

fn script() -> ScriptedAnswers {
    ScriptedAnswers::from_json(
        r#"{"citizenId": "C1", "answersByName": {
            "Move.Applicant.Name": "Jansen",
            "Move.Applicant.Address": "Dorpstraat 1",
            "Move.Applicant.Age": "40",
            "Move.Reason": "Study",
            "Move.Remarks": true,
            "Move.Remarks.Text": "none",
            "Move.Child": "1",
            "Move.Child[1].ChildName": "Piet"
        }}"#,
    )
    .unwrap()
}

fn page_names(s: &Session) -> Vec<String> {
    s.page().unwrap().inputs().map(|i| i.name.clone()).collect()
}

#[test]
fn mode_names() {
    assert_eq!(
        "runtime".parse::<GeneratorMode>(),
        Ok(GeneratorMode::Runtime)
    );
    assert_eq!(
        "initial-interaction".parse::<GeneratorMode>(),
        Ok(GeneratorMode::Initial)
    );
    assert!("turbo".parse::<GeneratorMode>().is_err());
    assert_eq!(
        serde_json::to_string(&GeneratorMode::Runtime).unwrap(),
        "\"runtime-interaction\""
    );
}

#[test]
fn offline_asks_everything_and_calls_nothing() {
    let s = Session::start(service(), "C1", GeneratorMode::Offline, &client()).unwrap();
    assert!(s.invoked().is_empty());
    assert_eq!(
        page_names(&s),
        [
            "Move.Applicant.Name",
            "Move.Applicant.Address",
            "Move.Applicant.Age",
            "Move.Reason",
            "Move.Remarks",
            "Move.Child"
        ]
    );
}

#[test]
fn runtime_calls_functions_before_first_page() {
    let s = Session::start(service(), "C1", GeneratorMode::Runtime, &client()).unwrap();
    assert_eq!(
        s.invoked().iter().collect::<Vec<_>>(),
        ["getAge", "getPersonDetails"]
    );
    assert_eq!(
        page_names(&s),
        ["Move.Reason", "Move.Remarks", "Move.Child"]
    );
}

#[test]
fn runtime_never_asks_filled_fields() {
    let out = run_scripted(
        service(),
        GeneratorMode::Runtime,
        &client(),
        &script(),
        None,
    )
    .unwrap();
    for h in out.session.history() {
        assert!(
            h.page
                .inputs()
                .all(|i| !i.name.starts_with("Move.Applicant")),
            "{}",
            h.page.id
        );
    }
}

#[test]
fn initial_prefills_best_function() {
    let s = Session::start(service(), "C1", GeneratorMode::Initial, &client()).unwrap();
    assert_eq!(s.invoked().iter().collect::<Vec<_>>(), ["getPersonDetails"]);
    let page = s.page().unwrap();
    assert_eq!(
        page.input("Move.Applicant.Name")
            .unwrap()
            .prefill
            .as_deref(),
        Some("Jansen")
    );
    assert_eq!(page.input("Move.Applicant.Age").unwrap().prefill, None);
}

#[test]
fn initial_with_unknown_citizen_degrades_to_offline() {
    let s = Session::start(service(), "C9", GeneratorMode::Initial, &client()).unwrap();
    let offline = Session::start(service(), "C9", GeneratorMode::Offline, &client()).unwrap();
    assert_eq!(s.page().unwrap(), offline.page().unwrap());
    assert_eq!(s.warnings().len(), 1);
}

#[test]
fn runtime_with_unknown_citizen_fails_at_start() {
    let err = Session::start(service(), "C9", GeneratorMode::Runtime, &client()).unwrap_err();
    assert!(matches!(
        err,
        SessionError::DataAdmin(DataAdminError::UnknownCitizen(_))
    ));
}

#[test]
fn unavailable_function_at_start_is_an_error() {
    let s = Session::start(
        service(),
        "C1",
        GeneratorMode::Runtime,
        &client().with_unavailable("getAge"),
    );
    assert!(matches!(
        s,
        Err(SessionError::DataAdmin(DataAdminError::Unavailable(_)))
    ));
}

fn age_only() -> Arc<Service> {
    let mut catalog = service().catalog.clone();
    catalog.functions.retain(|f| f.name == "getAge");
    Arc::new(Service {
        name: "Move".into(),
        model: service().model.clone(),
        catalog,
        model_file: Default::default(),
    })
}

#[test]
fn unavailable_function_later_in_session_is_a_warning() {
    let down = client().with_unavailable("getAge");
    let mut s = Session::start(age_only(), "C1", GeneratorMode::Runtime, &down).unwrap();
    let answers = script().answers_for(s.page().unwrap()).unwrap();
    s.submit(&answers, &down).unwrap();
    assert_eq!(s.warnings().len(), 1);
    assert_eq!(page_names(&s), ["Move.Applicant.Age"]);
}

#[test]
fn modes_agree_on_report() {
    let reports: Vec<String> = GeneratorMode::ALL
        .iter()
        .map(|&m| {
            let out = run_scripted(service(), m, &client(), &script(), None).unwrap();
            render_report(&out.report, ReportFormat::Xml)
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}

#[test]
fn invalid_answer_leaves_session_unchanged() {
    let mut s = Session::start(service(), "C1", GeneratorMode::Offline, &client()).unwrap();
    let before = s.snapshot();
    let mut answers = script().answers_for(s.page().unwrap()).unwrap();
    answers.insert("Move.Applicant.Age".into(), Answer::from("12.5"));
    let err = s.submit(&answers, &client()).unwrap_err();
    let SessionError::Invalid { errors, page } = err else {
        panic!("{err:?}")
    };
    assert_eq!(errors[0].name, "Move.Applicant.Age");
    assert!(page.input("Move.Applicant.Age").unwrap().error.is_some());
    assert_eq!(s.snapshot(), before);
}

#[test]
fn page_is_stable_and_phase_guarded() {
    let mut s = Session::start(service(), "C1", GeneratorMode::Offline, &client()).unwrap();
    assert_eq!(s.page().unwrap().clone(), s.page().unwrap().clone());
    assert!(matches!(s.report(), Err(SessionError::Premature { open }) if !open.is_empty()));
    while s.phase() == Phase::Collecting {
        let answers = script().answers_for(s.page().unwrap()).unwrap();
        s.submit(&answers, &client()).unwrap();
    }
    assert_eq!(
        s.history().len(),
        2,
        "second page asks for the child's name"
    );
    assert!(matches!(
        s.page(),
        Err(SessionError::NotCollecting(Phase::Complete))
    ));
    let first = s.report().unwrap().clone();
    assert_eq!(s.phase(), Phase::Reported);
    assert_eq!(s.report().unwrap(), &first);
}

#[test]
fn answer_unlocks_function() {
    let mut s = Session::start(age_only(), "C1", GeneratorMode::Runtime, &client()).unwrap();
    assert!(s.invoked().is_empty());
    assert_eq!(
        page_names(&s),
        ["Move.Applicant.Name", "Move.Applicant.Address"]
    );
    let answers = script().answers_for(s.page().unwrap()).unwrap();
    s.submit(&answers, &client()).unwrap();
    assert!(s.invoked().contains("getAge"));
    assert!(!page_names(&s).contains(&"Move.Applicant.Age".to_string()));
}

#[test]
fn snapshot_restore_resumes() {
    let mut s = Session::start(service(), "C1", GeneratorMode::Runtime, &client()).unwrap();
    let answers = script().answers_for(s.page().unwrap()).unwrap();
    s.submit(&answers, &client()).unwrap();
    let json = serde_json::to_string(&s.snapshot()).unwrap();
    let mut restored = Session::restore(serde_json::from_str(&json).unwrap(), service()).unwrap();
    assert_eq!(restored.page().unwrap(), s.page().unwrap());
    for session in [&mut s, &mut restored] {
        while session.phase() == Phase::Collecting {
            let answers = script().answers_for(session.page().unwrap()).unwrap();
            session.submit(&answers, &client()).unwrap();
        }
    }
    let a = render_report(s.report().unwrap(), ReportFormat::Text);
    let b = render_report(restored.report().unwrap(), ReportFormat::Text);
    assert_eq!(a, b);
}

#[test]
fn replay_reproduces_model() {
    let out = run_scripted(
        service(),
        GeneratorMode::Runtime,
        &client(),
        &script(),
        None,
    )
    .unwrap();
    let again = out.session.replay(&client()).unwrap();
    assert_eq!(again.app(), out.session.app());
}

#[test]
fn trace_is_versioned() {
    let out = run_scripted(
        service(),
        GeneratorMode::Runtime,
        &client(),
        &script(),
        None,
    )
    .unwrap();
    let trace = out.trace_json();
    assert_eq!(trace["traceVersion"], 1);
    assert!(trace["events"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["event"] == "function-invoked"));
}

#[test]
fn missing_scripted_answer_names_widget() {
    let mut sc = script();
    sc.answers_by_name.remove("Move.Applicant.Age");
    let err = run_scripted(service(), GeneratorMode::Offline, &client(), &sc, None).unwrap_err();
    assert!(matches!(err, ScriptError::Missing { names, .. } if names == ["Move.Applicant.Age"]));
}

#[test]
fn generate_offline_single_page() {
    let app = generate_offline(service().model.clone()).unwrap();
    assert_eq!(app.pages.len(), 1);
    assert_eq!(app.pages[0].inputs().count(), 6);
}

#[test]
fn answer_without_completion_is_rejected() {
    use crate::feature_model::ConstraintKind;
    let model = FeatureModel::new(
        "R",
        vec![Node::optional("Extra").with_children(vec![
            Node::group(
                "Pick",
                GroupCardinality::new(1, 2),
                vec![Node::grouped("A"), Node::grouped("B")],
            ),
            Node::group("Only", GroupCardinality::XOR, vec![Node::grouped("C")]),
        ])],
    )
    .with_constraint(ConstraintKind::Excludes, "R.Extra", "R.Extra.Pick.B")
    .with_constraint(ConstraintKind::Excludes, "R.Extra.Only.C", "R.Extra.Pick.A");
    let service = Arc::new(Service {
        name: "R".into(),
        catalog: FunctionCatalog::empty("R"),
        model: Arc::new(model),
        model_file: Default::default(),
    });
    let mut s = Session::start(service, "", GeneratorMode::Offline, &client()).unwrap();
    let before = s.snapshot();
    let yes = Answers::from([("R.Extra".to_string(), Answer::Flag(true))]);
    let err = s.submit(&yes, &client()).unwrap_err();
    let SessionError::Invalid { errors, page } = err else {
        panic!("{err:?}")
    };
    assert_eq!(errors[0].name, "R.Extra");
    assert!(page.input("R.Extra").unwrap().error.is_some());
    assert_eq!(s.snapshot(), before);
    let no = Answers::from([("R.Extra".to_string(), Answer::Flag(false))]);
    s.submit(&no, &client()).unwrap();
    assert_eq!(s.phase(), Phase::Complete);
}
