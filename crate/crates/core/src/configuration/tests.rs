use super::*;
use crate::feature_model::{FeatureCardinality, GroupCardinality, Node};

fn p(s: &str) -> InstancePath {
    s.parse().unwrap()
}

fn fresh(m: FeatureModel) -> ApplicationFeatureModel {
    ApplicationFeatureModel::new(Arc::new(m)).unwrap()
}

fn housing() -> FeatureModel {
    FeatureModel::new(
        "Move",
        vec![
            Node::mandatory("A")
                .with_children(vec![Node::mandatory("B").with_attribute(ValueType::String)]),
            Node::optional("C"),
            Node::group(
                "G",
                GroupCardinality::XOR,
                vec![Node::grouped("Owner"), Node::grouped("Tenant")],
            ),
        ],
    )
}

#[test]
fn mandatory_chain_is_selected() {
    let app = fresh(housing());
    assert_eq!(app.state(&p("Move.A")), Some(DecisionState::Selected));
    assert_eq!(app.state(&p("Move.A.B")), Some(DecisionState::Selected));
    assert_eq!(app.state(&p("Move.C")), Some(DecisionState::Undecided));
    assert_eq!(
        app.state(&p("Move.G.Owner")),
        Some(DecisionState::Undecided)
    );
    assert_eq!(
        app.state(&p("Move.G.Tenant")),
        Some(DecisionState::Undecided)
    );
    assert!(app.values().is_empty());
}

#[test]
fn resolve_xor_group() {
    let app = fresh(housing());
    let next = app
        .specialize(&Decision::ResolveGroup(p("Move.G"), vec!["Owner".into()]))
        .unwrap();
    assert_eq!(
        next.state(&p("Move.G.Owner")),
        Some(DecisionState::Selected)
    );
    assert_eq!(
        next.state(&p("Move.G.Tenant")),
        Some(DecisionState::Eliminated)
    );
    // the input is unchanged
    assert_eq!(
        app.state(&p("Move.G.Owner")),
        Some(DecisionState::Undecided)
    );
}

#[test]
fn excludes_conflict_names_both_paths() {
    let m = FeatureModel::new("R", vec![Node::optional("A"), Node::optional("B")]).with_constraint(
        ConstraintKind::Excludes,
        "R.A",
        "R.B",
    );
    let app = fresh(m).specialize(&Decision::Select(p("R.B"))).unwrap();
    assert_eq!(app.state(&p("R.A")), Some(DecisionState::Eliminated));
    let err = app.specialize(&Decision::Select(p("R.A"))).unwrap_err();
    assert!(matches!(err, ConfigError::AlreadyDecided { .. }));

    // Conflict surfaced through propagation rather than the target itself.
    let m = FeatureModel::new(
        "R",
        vec![
            Node::optional("A"),
            Node::optional("B"),
            Node::optional("C"),
        ],
    )
    .with_constraint(ConstraintKind::Requires, "R.A", "R.C")
    .with_constraint(ConstraintKind::Excludes, "R.B", "R.C");
    let app = fresh(m).specialize(&Decision::Select(p("R.B"))).unwrap();
    assert_eq!(app.state(&p("R.A")), Some(DecisionState::Eliminated));
    let m2 = FeatureModel::new("R", vec![Node::optional("A"), Node::optional("B")])
        .with_constraint(ConstraintKind::Requires, "R.A", "R.B");
    let app = fresh(m2)
        .specialize(&Decision::Eliminate(p("R.B")))
        .unwrap();
    assert_eq!(app.state(&p("R.A")), Some(DecisionState::Eliminated));
}

#[test]
fn propagation_conflict_reports_trigger_and_target() {
    // A requires X and A excludes X: selecting A has no consistent outcome.
    let m = FeatureModel::new(
        "R",
        vec![
            Node::optional("A"),
            Node::optional("X"),
            Node::optional("Y"),
        ],
    )
    .with_constraint(ConstraintKind::Requires, "R.A", "R.Y")
    .with_constraint(ConstraintKind::Requires, "R.Y", "R.X")
    .with_constraint(ConstraintKind::Excludes, "R.A", "R.X");
    let err = fresh(m)
        .specialize(&Decision::Select(p("R.A")))
        .unwrap_err();
    match err {
        ConfigError::Conflict { trigger, path, .. } => {
            assert_eq!(trigger, "R.A");
            assert!(path == "R.X" || path == "R.A" || path == "R.Y", "{path}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn clone_instances_have_independent_slots() {
    let m = FeatureModel::new(
        "Move",
        vec![
            Node::solitary("FamilyMember", FeatureCardinality::new(0, Some(5))).with_children(
                vec![
                    Node::mandatory("Name").with_attribute(ValueType::String),
                    Node::optional("Pet"),
                ],
            ),
        ],
    );
    let app = fresh(m)
        .specialize(&Decision::Clone(p("Move.FamilyMember"), 3))
        .unwrap();
    for i in 1..=3 {
        assert_eq!(
            app.state(&p(&format!("Move.FamilyMember[{i}]"))),
            Some(DecisionState::Selected)
        );
        assert_eq!(
            app.state(&p(&format!("Move.FamilyMember[{i}].Name"))),
            Some(DecisionState::Selected)
        );
        assert_eq!(
            app.state(&p(&format!("Move.FamilyMember[{i}].Pet"))),
            Some(DecisionState::Undecided)
        );
    }
    assert_eq!(app.state(&p("Move.FamilyMember[4]")), None);
    let app = app
        .specialize(&Decision::SetValue(
            p("Move.FamilyMember[2].Name"),
            Value::String("Ada".into()),
        ))
        .unwrap();
    assert_eq!(
        app.value(&p("Move.FamilyMember[2].Name")),
        Some(&Value::String("Ada".into()))
    );
    assert_eq!(app.value(&p("Move.FamilyMember[1].Name")), None);

    let err = app
        .specialize(&Decision::Clone(p("Move.FamilyMember"), 6))
        .unwrap_err();
    assert!(matches!(err, ConfigError::AlreadyDecided { .. }));
}

#[test]
fn clone_out_of_bounds() {
    let m = FeatureModel::new(
        "R",
        vec![Node::solitary("P", FeatureCardinality::new(1, Some(2)))],
    );
    let err = fresh(m)
        .specialize(&Decision::Clone(p("R.P"), 3))
        .unwrap_err();
    assert!(matches!(
        err,
        ConfigError::CloneOutOfBounds { count: 3, .. }
    ));
}

#[test]
fn fixed_clone_count_is_automatic() {
    let m = FeatureModel::new(
        "R",
        vec![Node::solitary("P", FeatureCardinality::new(2, Some(2)))],
    );
    let app = fresh(m);
    assert_eq!(app.clones().get(&p("R.P")), Some(&2));
    assert!(app.is_complete());
}

#[test]
fn value_type_mismatch() {
    let app = fresh(housing());
    let err = app
        .specialize(&Decision::SetValue(p("Move.A.B"), Value::Integer(3)))
        .unwrap_err();
    assert!(matches!(err, ConfigError::TypeMismatch { .. }));
}

#[test]
fn completeness() {
    let app = fresh(housing());
    assert!(!app.is_complete());
    let app = app
        .specialize(&Decision::Eliminate(p("Move.C")))
        .and_then(|a| a.specialize(&Decision::ResolveGroup(p("Move.G"), vec!["Tenant".into()])))
        .unwrap();
    assert!(app.structure_complete());
    assert!(!app.is_complete());
    assert_eq!(app.open_items().len(), 1);
    let app = app
        .specialize(&Decision::SetValue(
            p("Move.A.B"),
            Value::String("x".into()),
        ))
        .unwrap();
    assert!(app.is_complete());
    assert!(app.open_items().is_empty());
    assert!(app.check_constraints().is_empty());
}

#[test]
fn open_items_in_document_order() {
    let app = fresh(housing());
    let items = app.open_items();
    let summary: Vec<(String, Necessity)> = items
        .iter()
        .map(|i| (i.path.to_string(), i.necessity))
        .collect();
    assert_eq!(
        summary,
        vec![
            ("Move.A.B".to_string(), Necessity::Mandatory),
            ("Move.C".to_string(), Necessity::Optional),
            ("Move.G".to_string(), Necessity::Group),
        ]
    );
    let xor_only = fresh(FeatureModel::new(
        "R",
        vec![Node::group(
            "G",
            GroupCardinality::XOR,
            vec![Node::grouped("A"), Node::grouped("B")],
        )],
    ));
    assert_eq!(xor_only.open_items().len(), 1);
    assert_eq!(xor_only.open_items()[0].kind, OpenItemKind::Group);
}

#[test]
fn violations_are_counted_per_breach() {
    let m = Arc::new(
        FeatureModel::new(
            "R",
            vec![
                Node::optional("A"),
                Node::optional("B"),
                Node::group(
                    "G",
                    GroupCardinality::XOR,
                    vec![Node::grouped("X"), Node::grouped("Y")],
                ),
            ],
        )
        .with_constraint(ConstraintKind::Requires, "R.A", "R.B"),
    );
    use DecisionState::*;
    let states = |b: DecisionState, y: DecisionState| {
        [
            ("R", Selected),
            ("R.A", Selected),
            ("R.B", b),
            ("R.G", Selected),
            ("R.G.X", Selected),
            ("R.G.Y", y),
        ]
        .into_iter()
        .map(|(k, v)| (p(k), v))
        .collect::<BTreeMap<_, _>>()
    };
    let app = ApplicationFeatureModel::from_parts(
        m.clone(),
        states(Eliminated, Eliminated),
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .unwrap();
    let v = app.check_constraints();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::Requires);
    assert_eq!(v[0].paths, vec!["R.A".to_string(), "R.B".to_string()]);

    let app = ApplicationFeatureModel::from_parts(
        m,
        states(Selected, Selected),
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .unwrap();
    let v = app.check_constraints();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::GroupCardinality);
}

#[test]
fn singleton_or_group_counting_is_left_open() {
    let m = FeatureModel::new(
        "R",
        vec![Node::group(
            "G",
            GroupCardinality::new(1, 2),
            vec![Node::grouped("A"), Node::grouped("B")],
        )],
    );
    let app = fresh(m)
        .specialize(&Decision::ResolveGroup(
            p("R.G"),
            vec!["A".into(), "B".into()],
        ))
        .unwrap();
    assert!(app.is_complete());
}

#[test]
fn application_xml_round_trip() {
    let m = FeatureModel::new(
        "Move",
        vec![
            Node::mandatory("Name")
                .with_attribute(ValueType::String)
                .described("Full name"),
            Node::solitary("Child", FeatureCardinality::new(0, Some(3)))
                .with_children(vec![Node::mandatory("Born").with_attribute(ValueType::Date)]),
            Node::group(
                "G",
                GroupCardinality::XOR,
                vec![Node::grouped("Owner"), Node::grouped("Tenant")],
            ),
        ],
    );
    let app = fresh(m)
        .specialize(&Decision::SetValue(
            p("Move.Name"),
            Value::String("A & \"B\"".into()),
        ))
        .and_then(|a| a.specialize(&Decision::Clone(p("Move.Child"), 2)))
        .and_then(|a| {
            a.specialize(&Decision::SetValue(
                p("Move.Child[2].Born"),
                Value::parse(ValueType::Date, "2020-02-29").unwrap(),
            ))
        })
        .unwrap();
    let text = serialize_application_model(&app);
    assert!(text.contains("state=\"undecided\""));
    assert!(text.contains("clones=\"2\""));
    assert!(text.contains("<fm:DateValue fm:value=\"2020-02-29\"/>"));
    let back = parse_application_model(&text).unwrap();
    assert_eq!(back, app);
    assert_eq!(serialize_application_model(&back), text);
}
