//! Submitted answers back to decisions on the application model.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rules::{Direction, Rule, RuleSet};
use super::{widget_name_with, Answer, Answers, Naming, TransformationTrace};
use crate::configuration::{
    ApplicationFeatureModel, ConfigError, Decision, DecisionState, GroupStatus,
};
use crate::cui::{Input, Page};
use crate::feature_model::{IndexedNode, InstancePath};
use crate::value::{Value, ValueType};

pub struct AnswerContext {
    pub input: Input,
    pub path: InstancePath,
    pub node: IndexedNode,
    pub is_collection: bool,
    pub group: Option<GroupStatus>,
    pub answer: Option<Answer>,
}

impl AnswerContext {
    /// Submitted text, falling back to the prefill when nothing was sent.
    fn text(&self) -> Option<String> {
        match &self.answer {
            Some(a) => a.text().map(str::to_string),
            None => self.input.prefill.clone(),
        }
    }

    fn checked(&self) -> bool {
        match &self.answer {
            Some(a) => a.checked(),
            None => self.input.prefill.as_deref() == Some("true"),
        }
    }

    fn required_text(&self) -> Result<String, String> {
        match self.text() {
            Some(t) if !t.is_empty() => Ok(t),
            _ => Err("a value is required".into()),
        }
    }
}

pub type FmRules = RuleSet<AnswerContext, Result<Decision, String>>;

pub fn fm_rules() -> FmRules {
    RuleSet {
        direction: Direction::CuiToFm,
        rules: vec![
            Rule {
                id: "UF-CLONE",
                condition: "widget bound to a cloneable feature",
                extension: true,
                matches: |c| c.is_collection,
                action: |c| {
                    let text = c.required_text()?;
                    let count: u32 = text
                        .parse()
                        .map_err(|_| format!("'{text}' is not a valid number of entries"))?;
                    if !c.input.options.is_empty()
                        && !c.input.options.iter().any(|o| o.value == text)
                    {
                        return Err(format!("'{text}' is not one of the offered options"));
                    }
                    if let Some(card) = c
                        .node
                        .feature_cardinality()
                        .filter(|card| !card.admits(count))
                    {
                        return Err(format!("{count} entries is outside {card}"));
                    }
                    Ok(Decision::Clone(c.path.clone(), count))
                },
            },
            Rule {
                id: "UF-GROUP",
                condition: "widget bound to a feature group (radio, select or checkbox set)",
                extension: false,
                matches: |c| c.node.is_group(),
                action: |c| {
                    let values = match &c.answer {
                        Some(a) => a.values(),
                        None => c.input.prefill.iter().cloned().collect(),
                    };
                    let mut chosen = Vec::new();
                    for v in values {
                        if v.is_empty() {
                            continue;
                        }
                        if !c.input.options.iter().any(|o| o.value == v) {
                            return Err(format!("'{v}' is not one of the offered options"));
                        }
                        if !chosen.contains(&v) {
                            chosen.push(v);
                        }
                    }
                    let status = c.group.as_ref().expect("group status");
                    let n = chosen.len() as u32;
                    if n < status.need() || n > status.room() {
                        return Err(if status.need() == status.room() {
                            format!("choose exactly {}", status.need())
                        } else {
                            format!("choose between {} and {}", status.need(), status.room())
                        });
                    }
                    Ok(Decision::ResolveGroup(c.path.clone(), chosen))
                },
            },
            Rule {
                id: "UF-BOOL",
                condition: "checkbox bound to a boolean attribute",
                extension: true,
                matches: |c| c.input.value_type == Some(ValueType::Boolean),
                action: |c| {
                    Ok(Decision::SetValue(
                        c.path.clone(),
                        Value::Boolean(c.checked()),
                    ))
                },
            },
            Rule {
                id: "UF-VALUE",
                condition: "text input bound to an attribute",
                extension: false,
                matches: |c| c.input.value_type.is_some(),
                action: |c| {
                    let ty = c.input.value_type.unwrap();
                    let text = c.required_text()?;
                    let v = Value::parse(ty, &text).map_err(|e| e.to_string())?;
                    Ok(Decision::SetValue(c.path.clone(), v))
                },
            },
            Rule {
                id: "UF-OPT",
                condition: "checkbox bound to an optional feature",
                extension: true,
                matches: |_| true,
                action: |c| {
                    Ok(if c.checked() {
                        Decision::Select(c.path.clone())
                    } else {
                        Decision::Eliminate(c.path.clone())
                    })
                },
            },
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetError {
    pub name: String,
    pub message: String,
}

impl fmt::Display for WidgetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubmitError {
    #[error("invalid answers: {}", list(.0))]
    Invalid(Vec<WidgetError>),
    #[error("answer for '{widget}' conflicts: {error}")]
    Conflict { widget: String, error: ConfigError },
}

fn list(errors: &[WidgetError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl SubmitError {
    /// Per-widget messages, for annotating a re-issued page.
    pub fn widget_errors(&self) -> Vec<WidgetError> {
        match self {
            SubmitError::Invalid(e) => e.clone(),
            SubmitError::Conflict { widget, error } => vec![WidgetError {
                name: widget.clone(),
                message: error.to_string(),
            }],
        }
    }
}

pub fn cui_to_fm(
    app: &ApplicationFeatureModel,
    page: &Page,
    answers: &Answers,
) -> Result<(ApplicationFeatureModel, TransformationTrace), SubmitError> {
    cui_to_fm_with(app, page, answers, &fm_rules(), Naming::Dotted)
}

fn decode(
    app: &ApplicationFeatureModel,
    name: &str,
    naming: Naming,
    cache: &mut Option<HashMap<String, Vec<InstancePath>>>,
) -> Result<InstancePath, String> {
    match naming {
        Naming::Dotted => name
            .parse()
            .map_err(|_| "widget name is not a path".to_string()),
        Naming::Concatenated => {
            let map = cache.get_or_insert_with(|| {
                let mut m: HashMap<String, Vec<InstancePath>> = HashMap::new();
                for (p, _) in app.existing_paths() {
                    m.entry(widget_name_with(&p, naming)).or_default().push(p);
                }
                m
            });
            match map.get(name).map(Vec::as_slice) {
                Some([p]) => Ok(p.clone()),
                Some(_) => Err("widget name is ambiguous".into()),
                None => Err("widget name matches no node".into()),
            }
        }
    }
}

/// Turns answers into decisions (validated up front, applied in widget
/// order). Answers that agree with what earlier answers in the same batch
/// already forced are skipped.
pub fn cui_to_fm_with(
    app: &ApplicationFeatureModel,
    page: &Page,
    answers: &Answers,
    rules: &FmRules,
    naming: Naming,
) -> Result<(ApplicationFeatureModel, TransformationTrace), SubmitError> {
    let mut errors = Vec::new();
    let names: BTreeSet<&str> = page.inputs().map(|i| i.name.as_str()).collect();
    for key in answers.keys() {
        if !names.contains(key.as_str()) {
            errors.push(WidgetError {
                name: key.clone(),
                message: "no such widget on this page".into(),
            });
        }
    }
    let mut cache = None;
    let mut planned: Vec<(String, &'static str, Decision)> = Vec::new();
    for input in page.inputs() {
        let fail = |message: String| WidgetError {
            name: input.name.clone(),
            message,
        };
        let path = match decode(app, &input.name, naming, &mut cache) {
            Ok(p) => p,
            Err(m) => {
                errors.push(fail(m));
                continue;
            }
        };
        let Some(node) = app
            .index()
            .resolve(&path)
            .filter(|_| app.state(&path).is_some())
        else {
            errors.push(fail("widget names no node of this configuration".into()));
            continue;
        };
        let is_collection = app.is_collection_path(&path);
        let state = app.state(&path).unwrap();
        let group = node.is_group().then(|| app.group_status(&path));
        let open = if let Some(g) = &group {
            !g.undecided.is_empty() && state == DecisionState::Selected
        } else if input.value_type.is_some() && !is_collection {
            state == DecisionState::Selected && app.value(&path).is_none()
        } else {
            state == DecisionState::Undecided
        };
        if !open {
            errors.push(fail("this item was already decided".into()));
            continue;
        }
        let ctx = AnswerContext {
            input: input.clone(),
            path,
            node: node.clone(),
            is_collection,
            group,
            answer: answers.get(&input.name).cloned(),
        };
        let Some(rule) = rules.first_match(&ctx) else {
            errors.push(fail("no rule handles this widget".into()));
            continue;
        };
        match (rule.action)(&ctx) {
            Ok(d) => planned.push((input.name.clone(), rule.id, d)),
            Err(m) => errors.push(fail(m)),
        }
    }
    if !errors.is_empty() {
        return Err(SubmitError::Invalid(errors));
    }

    let mut current = app.clone();
    let mut trace = TransformationTrace::default();
    for (widget, rule, decision) in planned {
        let conflict = |error: ConfigError| SubmitError::Conflict {
            widget: widget.clone(),
            error,
        };
        let disagree = |path: &InstancePath, reason: &str| {
            conflict(ConfigError::Conflict {
                trigger: path.to_string(),
                path: path.to_string(),
                reason: reason.to_string(),
            })
        };
        let path = decision.path().clone();
        let state = current.state(&path);
        let skip = match &decision {
            Decision::Select(_) => match state {
                Some(DecisionState::Selected) => true,
                Some(DecisionState::Eliminated) => {
                    return Err(disagree(&path, "already eliminated by an earlier answer"))
                }
                _ => false,
            },
            Decision::Eliminate(_) => match state {
                Some(DecisionState::Eliminated) => true,
                Some(DecisionState::Selected) => {
                    return Err(disagree(&path, "already selected by an earlier answer"))
                }
                _ => false,
            },
            Decision::Clone(_, k) => match state {
                Some(DecisionState::Eliminated) if *k == 0 => true,
                Some(DecisionState::Undecided) => false,
                _ => {
                    return Err(disagree(
                        &path,
                        "number of entries already fixed by an earlier answer",
                    ))
                }
            },
            Decision::ResolveGroup(_, chosen) => {
                if state == Some(DecisionState::Eliminated) {
                    return Err(disagree(&path, "group eliminated by an earlier answer"));
                }
                let status = current.group_status(&path);
                if status.undecided.is_empty() {
                    let all_selected = chosen
                        .iter()
                        .all(|c| status.selected.iter().any(|s| s.name() == c));
                    if !all_selected {
                        return Err(disagree(
                            &path,
                            "group already resolved differently by an earlier answer",
                        ));
                    }
                    true
                } else {
                    false
                }
            }
            Decision::SetValue(..) => false,
        };
        if skip {
            trace.push(&path, rule, format!("skipped: {decision} already holds"));
            continue;
        }
        current = current.specialize(&decision).map_err(conflict)?;
        trace.push(&path, rule, decision.to_string());
    }
    Ok((current, trace))
}
