//! Staged configuration: decisions propagate, conflicts are reported.

use std::sync::Arc;

use formweave::configuration::{new_configuration, Decision};
use formweave::feature_model::{
    ConstraintKind, FeatureCardinality, FeatureModel, GroupCardinality, Node,
};
use formweave::value::{Value, ValueType};

fn main() {
    let model = FeatureModel::new(
        "Housing",
        vec![
            Node::mandatory("Income").with_attribute(ValueType::Integer),
            Node::group(
                "Tenure",
                GroupCardinality::XOR,
                vec![Node::grouped("Rent"), Node::grouped("Own")],
            ),
            Node::optional("Allowance"),
            Node::solitary("Resident", FeatureCardinality::new(1, Some(4))).with_children(vec![
                Node::mandatory("Name").with_attribute(ValueType::String),
            ]),
        ],
    )
    .with_constraint(
        ConstraintKind::Requires,
        "Housing.Allowance",
        "Housing.Tenure.Rent",
    );

    let app = new_configuration(Arc::new(model)).expect("root propagates");
    let show = |label: &str, app: &formweave::configuration::ApplicationFeatureModel| {
        println!("{label}:");
        for item in app.open_items() {
            println!("  open {} ({:?})", item.path, item.kind);
        }
    };
    show("fresh", &app);

    let app = app
        .specialize(&Decision::Select("Housing.Allowance".parse().unwrap()))
        .unwrap();
    println!(
        "Allowance selected, so Rent is {:?}",
        app.state(&"Housing.Tenure.Rent".parse().unwrap())
    );

    let err = app
        .specialize(&Decision::Select("Housing.Tenure.Own".parse().unwrap()))
        .unwrap_err();
    println!("selecting Own: {err}");

    let app = app
        .specialize(&Decision::Clone("Housing.Resident".parse().unwrap(), 2))
        .and_then(|a| {
            a.specialize(&Decision::SetValue(
                "Housing.Income".parse().unwrap(),
                Value::Integer(24_000),
            ))
        })
        .unwrap();
    show("after two residents and an income", &app);
}
