#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use formweave::configuration::{ApplicationFeatureModel, DecisionState};
use formweave::cui::{InputKind, Page};
use formweave::data_admin::{load_fixtures, FixtureStore, MockDataAdmin};
use formweave::feature_model::{
    canonical_line, enumerate_configurations, structural_count, validate_model, ConstraintKind,
    FeatureCardinality, FeatureModel, GroupCardinality, Node,
};
use formweave::interaction::{GeneratorMode, Phase, Session, SessionError};
use formweave::service::{Service, ServiceDirectory};
use formweave::transform::{Answer, Answers};
use formweave::value::{Value, ValueType};
use formweave::workflow::FunctionCatalog;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CLONE_BOUND: u32 = 2;

pub fn services_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/services"))
}

pub fn testdata(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/testdata")).join(name)
}

pub fn bundled() -> ServiceDirectory {
    let dir = ServiceDirectory::load(&services_dir()).unwrap();
    assert!(dir.failures.is_empty(), "{:?}", dir.failures);
    dir
}

pub fn bundled_fixtures(dir: &ServiceDirectory) -> FixtureStore {
    load_fixtures(&services_dir().join("fixtures.json"), &dir.catalogs()).unwrap()
}

pub fn bare_service(model: FeatureModel) -> Arc<Service> {
    Arc::new(Service {
        name: model.name.clone(),
        catalog: FunctionCatalog::empty(model.name.clone()),
        model: Arc::new(model),
        model_file: PathBuf::new(),
    })
}

/// Random model generator: at most `max_nodes` nodes, at most three
/// constraints, clone upper bounds within [`CLONE_BOUND`].
pub struct ModelGen<'a> {
    rng: &'a mut ChaCha8Rng,
    budget: usize,
    next: usize,
}

impl<'a> ModelGen<'a> {
    fn name(&mut self) -> String {
        self.next += 1;
        format!("F{}", self.next)
    }

    fn attribute(&mut self, node: Node) -> Node {
        if self.rng.gen_bool(0.4) {
            let t = *ValueType::ALL.choose(self.rng).unwrap();
            node.with_attribute(t)
        } else {
            node
        }
    }

    fn children(&mut self, depth: usize, in_clone: bool) -> Vec<Node> {
        let mut out = Vec::new();
        let keep_going = if depth == 1 { 1.0 } else { 0.5 };
        while self.budget > 0
            && out.len() < 5
            && self
                .rng
                .gen_bool(if out.is_empty() { 0.7 } else { keep_going })
        {
            out.push(self.node(depth, in_clone));
        }
        out
    }

    fn node(&mut self, depth: usize, in_clone: bool) -> Node {
        self.budget -= 1;
        let name = self.name();
        let roll = self.rng.gen_range(0..100);
        if roll < 25 && self.budget >= 2 {
            let size = self.rng.gen_range(1..=self.budget.min(3));
            let members: Vec<Node> = (0..size)
                .map(|_| {
                    self.budget -= 1;
                    let n = Node::grouped(self.name());
                    self.attribute(n)
                })
                .collect();
            let size = size as u32;
            let card = match self.rng.gen_range(0..4) {
                0 => GroupCardinality::new(1, 1),
                1 => GroupCardinality::new(1, size),
                2 => GroupCardinality::new(0, 1),
                _ => GroupCardinality::new(0, size),
            };
            return Node::group(name, card, members);
        }
        let card = match roll {
            0..=44 => FeatureCardinality::MANDATORY,
            45..=79 => FeatureCardinality::OPTIONAL,
            _ if in_clone => FeatureCardinality::OPTIONAL,
            _ => FeatureCardinality::new(self.rng.gen_range(0..=1), Some(CLONE_BOUND)),
        };
        let cloned = in_clone || card.is_cloneable();
        let node = Node::solitary(name, card);
        let node = if depth < 3 {
            let kids = self.children(depth + 1, cloned);
            node.with_children(kids)
        } else {
            node
        };
        if node.children.is_empty() {
            self.attribute(node)
        } else {
            node
        }
    }
}

fn constraint_targets(node: &Node, path: &str, out: &mut Vec<String>) {
    for c in &node.children {
        let p = format!("{path}.{}", c.name);
        let cloned = matches!(c.kind, formweave::feature_model::NodeKind::Solitary(card) if card.is_cloneable());
        if cloned {
            continue;
        }
        if !c.is_group() {
            out.push(p.clone());
        }
        constraint_targets(c, &p, out);
    }
}

/// A random model that validates cleanly, has at least one configuration
/// and a structural count small enough to enumerate quickly.
pub fn random_model(rng: &mut ChaCha8Rng, max_nodes: usize) -> FeatureModel {
    loop {
        let total = rng.gen_range(4..=max_nodes);
        let mut gen = ModelGen {
            rng,
            budget: total - 1,
            next: 0,
        };
        let children = gen.children(1, false);
        let mut model = FeatureModel::new("R", children);
        let mut targets = Vec::new();
        constraint_targets(&model.root, "R", &mut targets);
        if targets.len() >= 2 {
            for _ in 0..rng.gen_range(0..=3) {
                let pair: Vec<&String> = targets.choose_multiple(rng, 2).collect();
                let kind = if rng.gen_bool(0.5) {
                    ConstraintKind::Requires
                } else {
                    ConstraintKind::Excludes
                };
                model = model.with_constraint(kind, pair[0].clone(), pair[1].clone());
            }
        }
        if model.node_count() < 4
            || model.node_count() > max_nodes
            || !validate_model(&model).is_empty()
        {
            continue;
        }
        if structural_count(&model, CLONE_BOUND) > 5_000 {
            continue;
        }
        if enumerate_configurations(&model, CLONE_BOUND)
            .unwrap()
            .is_empty()
        {
            continue;
        }
        return model;
    }
}

pub fn random_value(rng: &mut impl Rng, t: ValueType) -> String {
    match t {
        ValueType::String => format!("s{}", rng.gen_range(0..1000)),
        ValueType::Integer => rng.gen_range(-500i64..500).to_string(),
        ValueType::Float => format!("{}.{}", rng.gen_range(-99i32..99), rng.gen_range(0..100)),
        ValueType::Boolean => rng.gen_bool(0.5).to_string(),
        ValueType::Date => format!(
            "{:04}-{:02}-{:02}",
            rng.gen_range(1900..2100),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28)
        ),
    }
}

/// Random answers of the right shape for every input on `page`.
pub fn random_answers(rng: &mut impl Rng, page: &Page) -> Answers {
    let mut answers = Answers::new();
    for input in page.inputs() {
        let answer = match input.kind {
            InputKind::Text => Answer::Text(random_value(
                rng,
                input.value_type.unwrap_or(ValueType::Integer),
            )),
            InputKind::Radio | InputKind::Select => {
                Answer::Text(input.options.choose(rng).unwrap().value.clone())
            }
            InputKind::Checkbox if input.options.len() == 1 && input.options[0].value == "true" => {
                Answer::Flag(rng.gen_bool(0.5))
            }
            InputKind::Checkbox => Answer::Many(
                input
                    .options
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|o| o.value.clone())
                    .collect(),
            ),
        };
        answers.insert(input.name.clone(), answer);
    }
    answers
}

/// Attribute values a page's answers assign, as (widget name, canonical text).
pub fn submitted_values(page: &Page, answers: &Answers) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for input in page.inputs() {
        let Some(t) = input.value_type else { continue };
        let Some(answer) = answers.get(&input.name) else {
            continue;
        };
        let text = match (input.kind, answer) {
            (InputKind::Text, a) => a.text().unwrap().to_string(),
            (InputKind::Checkbox, a) if t == ValueType::Boolean => a.checked().to_string(),
            _ => continue,
        };
        out.push((
            input.name.clone(),
            Value::parse(t, &text).unwrap().to_lexical(),
        ));
    }
    out
}

pub struct RandomRun {
    pub session: Session,
    pub submitted: BTreeSet<(String, String)>,
    pub rejected: usize,
}

/// Plays an offline session with random answers; rejected pages are
/// answered again with fresh random answers.
pub fn random_session(rng: &mut ChaCha8Rng, model: FeatureModel) -> Result<RandomRun, String> {
    let client = MockDataAdmin::default();
    let mut session = Session::start(bare_service(model), "", GeneratorMode::Offline, &client)
        .map_err(|e| e.to_string())?;
    let mut submitted = BTreeSet::new();
    let mut rejected = 0;
    let mut pages = 0;
    while session.phase() == Phase::Collecting {
        pages += 1;
        if pages > 64 {
            return Err("too many pages".into());
        }
        let page = session.page().unwrap().clone();
        let mut accepted = false;
        for _ in 0..200 {
            let answers = random_answers(rng, &page);
            match session.submit(&answers, &client) {
                Ok(()) => {
                    submitted.extend(submitted_values(&page, &answers));
                    accepted = true;
                    break;
                }
                Err(SessionError::Invalid { .. }) => rejected += 1,
                Err(e) => return Err(format!("{}: {e}", page.id)),
            }
        }
        if !accepted {
            return Err(format!("{}: no random answer accepted", page.id));
        }
    }
    Ok(RandomRun {
        session,
        submitted,
        rejected,
    })
}

pub fn selected_lines(configs: &[ApplicationFeatureModel]) -> BTreeSet<String> {
    configs.iter().map(canonical_line).collect()
}

/// Oracle form of compatibility: every decided state and clone count of
/// `partial` is repeated in `complete`.
pub fn compatible(partial: &ApplicationFeatureModel, complete: &ApplicationFeatureModel) -> bool {
    partial
        .states()
        .iter()
        .filter(|(_, s)| **s != DecisionState::Undecided)
        .all(|(p, s)| complete.states().get(p) == Some(s))
        && partial
            .clones()
            .iter()
            .all(|(p, k)| complete.clones().get(p) == Some(k))
}

pub fn compatible_set(
    partial: &ApplicationFeatureModel,
    all: &[ApplicationFeatureModel],
) -> BTreeSet<String> {
    all.iter()
        .filter(|c| compatible(partial, c))
        .map(canonical_line)
        .collect()
}
