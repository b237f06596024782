//! Application model to UI page.

use std::collections::BTreeMap;

use thiserror::Error;

use super::rules::{Direction, Rule, RuleSet};
use super::{instance_label, widget_name_with, Naming, TransformationTrace};
use crate::configuration::{
    ApplicationFeatureModel, ConfigError, Decision, GroupStatus, OpenItem, OpenItemKind,
};
use crate::cui::{Input, InputKind, LayoutKind, NavigationKind, Page, Widget, WidgetOption};
use crate::feature_model::{IndexedNode, InstancePath};
use crate::value::ValueType;

pub struct LabelContext {
    pub node: IndexedNode,
    pub path: InstancePath,
}

/// Everything an item rule may look at.
pub struct ItemContext {
    pub item: OpenItem,
    pub node: IndexedNode,
    /// Member labels by name, for group items.
    pub members: Vec<(String, String)>,
    pub group: Option<GroupStatus>,
    pub name: String,
    pub label: String,
    pub prefill: Option<String>,
}

impl ItemContext {
    fn value_type(&self) -> Option<ValueType> {
        match self.item.kind {
            OpenItemKind::Value { value_type } => Some(value_type),
            _ => None,
        }
    }

    fn undecided(&self) -> u32 {
        self.group.as_ref().map_or(0, |g| g.undecided.len() as u32)
    }

    fn need(&self) -> u32 {
        self.group.as_ref().map_or(0, GroupStatus::need)
    }

    fn room(&self) -> u32 {
        self.group.as_ref().map_or(0, GroupStatus::room)
    }

    fn undecided_options(&self) -> Vec<WidgetOption> {
        let Some(g) = &self.group else {
            return Vec::new();
        };
        g.undecided
            .iter()
            .map(|p| {
                let name = p.name();
                let label = self
                    .members
                    .iter()
                    .find(|(n, _)| n == name)
                    .map_or(name, |(_, l)| l.as_str());
                WidgetOption::new(name, label)
            })
            .collect()
    }

    fn input(&self, kind: InputKind) -> Input {
        let mut i = Input::new(kind, self.name.clone(), self.label.clone());
        i.value_type = self.value_type();
        i.prefill = self.prefill.clone();
        i
    }
}

/// Result of one item rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Emission {
    Widgets(Vec<Widget>),
    /// No widget; the decision is taken on the user's behalf.
    Forced(Decision),
}

#[derive(Clone)]
pub struct CuiRules {
    pub labels: RuleSet<LabelContext, String>,
    pub items: RuleSet<ItemContext, Emission>,
}

#[derive(Debug, Clone)]
pub struct PageOptions {
    pub page_id: String,
    /// Values proposed by data administration, shown but still editable.
    pub prefills: BTreeMap<InstancePath, String>,
    pub naming: Naming,
}

impl Default for PageOptions {
    fn default() -> Self {
        PageOptions {
            page_id: "page-001".into(),
            prefills: BTreeMap::new(),
            naming: Naming::Dotted,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuiOutput {
    pub page: Page,
    pub trace: TransformationTrace,
    pub forced: Vec<Decision>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("'{0}' is not an open item of this configuration")]
    NotOpen(String),
    #[error("no rule matches '{0}' (rule coverage gap)")]
    NoRule(String),
}

fn choice_break(mut widgets: Vec<Widget>) -> Emission {
    widgets.push(Widget::Layout(LayoutKind::LineBreak));
    Emission::Widgets(widgets)
}

fn is_value(c: &ItemContext, types: &[ValueType]) -> bool {
    c.value_type().is_some_and(|t| types.contains(&t))
}

fn is_group(c: &ItemContext) -> bool {
    c.item.kind == OpenItemKind::Group
}

fn text_input(c: &ItemContext) -> Emission {
    let mut i = c.input(InputKind::Text);
    i.required = true;
    Emission::Widgets(vec![Widget::Input(i)])
}

fn single_checkbox(c: &ItemContext) -> Emission {
    let mut i = c.input(InputKind::Checkbox);
    i.options = vec![WidgetOption::new("true", c.label.clone())];
    choice_break(vec![Widget::Input(i)])
}

pub fn cui_rules() -> CuiRules {
    let labels = RuleSet {
        direction: Direction::FmToCui,
        rules: vec![
            Rule {
                id: "TR2",
                condition: "node has a description",
                extension: false,
                matches: |c: &LabelContext| c.node.description.is_some(),
                action: |c: &LabelContext| {
                    instance_label(c.node.description.as_deref().unwrap(), &c.path)
                },
            },
            Rule {
                id: "EXT-LABEL",
                condition: "node without description",
                extension: true,
                matches: |_: &LabelContext| true,
                action: |c: &LabelContext| instance_label(&c.node.name, &c.path),
            },
        ],
    };
    let items = RuleSet {
        direction: Direction::FmToCui,
        rules: vec![
            Rule {
                id: "TR3",
                condition: "selected node with unset string, integer or float attribute",
                extension: false,
                matches: |c| {
                    is_value(
                        c,
                        &[ValueType::String, ValueType::Integer, ValueType::Float],
                    )
                },
                action: text_input,
            },
            Rule {
                id: "EXT-DATE",
                condition: "selected node with unset date attribute",
                extension: true,
                matches: |c| is_value(c, &[ValueType::Date]),
                action: text_input,
            },
            Rule {
                id: "EXT-BOOL",
                condition: "selected node with unset boolean attribute",
                extension: true,
                matches: |c| is_value(c, &[ValueType::Boolean]),
                action: single_checkbox,
            },
            Rule {
                id: "EXT-AUTO",
                condition: "feature group whose undecided members must all be selected",
                extension: true,
                matches: |c| is_group(c) && c.need() == c.undecided(),
                action: |c| {
                    let chosen = c
                        .group
                        .as_ref()
                        .unwrap()
                        .undecided
                        .iter()
                        .map(|p| p.name().to_string())
                        .collect();
                    Emission::Forced(Decision::ResolveGroup(c.item.path.clone(), chosen))
                },
            },
            Rule {
                id: "TR4",
                condition: "feature group needing exactly one of more than one undecided members",
                extension: false,
                matches: |c| is_group(c) && c.room() == 1 && c.need() == 1 && c.undecided() > 1,
                action: |c| {
                    let mut i = c.input(InputKind::Radio);
                    i.required = true;
                    i.options = c.undecided_options();
                    choice_break(vec![Widget::Input(i)])
                },
            },
            Rule {
                id: "EXT-CHOICE-OPT",
                condition: "feature group allowing at most one more member and needing none",
                extension: true,
                matches: |c| is_group(c) && c.room() == 1 && c.need() == 0,
                action: |c| {
                    let mut i = c.input(InputKind::Select);
                    i.options = std::iter::once(WidgetOption::new("", "(none)"))
                        .chain(c.undecided_options())
                        .collect();
                    choice_break(vec![Widget::Input(i)])
                },
            },
            Rule {
                id: "EXT-OR",
                condition: "feature group allowing several more members",
                extension: true,
                matches: |c| is_group(c) && c.room() >= 2 && c.need() < c.undecided(),
                action: |c| {
                    let mut i = c.input(InputKind::Checkbox);
                    i.required = c.need() > 0;
                    i.options = c.undecided_options();
                    choice_break(vec![Widget::Input(i)])
                },
            },
            Rule {
                id: "EXT-OPT",
                condition: "undecided optional feature under a selected parent",
                extension: true,
                matches: |c| c.item.kind == OpenItemKind::Optional,
                action: single_checkbox,
            },
            Rule {
                id: "EXT-CLONE",
                condition: "undecided clone count under a selected parent",
                extension: true,
                matches: |c| c.item.kind == OpenItemKind::Clone,
                action: |c| {
                    let card = c.node.feature_cardinality().expect("cloneable solitary");
                    match card.max {
                        Some(max) => {
                            let mut i = c.input(InputKind::Select);
                            i.required = true;
                            i.value_type = Some(ValueType::Integer);
                            i.options = (card.min..=max)
                                .map(|k| WidgetOption::new(k.to_string(), k.to_string()))
                                .collect();
                            choice_break(vec![Widget::Input(i)])
                        }
                        None => {
                            let mut i = c.input(InputKind::Text);
                            i.required = true;
                            i.value_type = Some(ValueType::Integer);
                            Emission::Widgets(vec![Widget::Input(i)])
                        }
                    }
                },
            },
        ],
    };
    CuiRules { labels, items }
}

/// Label for a node instance via the label rules.
pub(crate) fn label_for(
    rules: &CuiRules,
    node: &IndexedNode,
    path: &InstancePath,
) -> (String, &'static str) {
    let ctx = LabelContext {
        node: node.clone(),
        path: path.clone(),
    };
    let rule = rules.labels.first_match(&ctx).expect("fallback label rule");
    ((rule.action)(&ctx), rule.id)
}

pub fn fm_to_cui(
    app: &ApplicationFeatureModel,
    scope: &[OpenItem],
    rules: &CuiRules,
) -> Result<CuiOutput, TransformError> {
    fm_to_cui_with(app, scope, rules, &PageOptions::default())
}

/// Builds one page covering `scope`, visiting items in document order.
pub fn fm_to_cui_with(
    app: &ApplicationFeatureModel,
    scope: &[OpenItem],
    rules: &CuiRules,
    options: &PageOptions,
) -> Result<CuiOutput, TransformError> {
    let open = app.open_items();
    let mut ordered = Vec::with_capacity(scope.len());
    for (i, item) in scope.iter().enumerate() {
        let pos = open
            .iter()
            .position(|o| o == item)
            .ok_or_else(|| TransformError::NotOpen(item.path.to_string()))?;
        ordered.push((pos, i, item));
    }
    ordered.sort_by_key(|(pos, i, _)| (*pos, *i));

    let index = app.index();
    let root = index.root();
    let (title, _) = label_for(rules, root, &app.root_path());
    let mut page = Page::new(options.page_id.clone(), title);
    let mut trace = TransformationTrace::default();
    let mut forced = Vec::new();
    trace.push(app.root_path(), "TR1", format!("page {}", page.id));

    for (_, scope_index, item) in ordered {
        let node = index
            .resolve(&item.path)
            .expect("open item resolves")
            .clone();
        let (label, label_rule) = label_for(rules, &node, &item.path);
        let group = node.is_group().then(|| app.group_status(&item.path));
        let members = node
            .children
            .iter()
            .map(|&c| {
                let m = index.node(c);
                (
                    m.name.clone(),
                    label_for(rules, m, &item.path.child(&m.name)).0,
                )
            })
            .collect();
        let ctx = ItemContext {
            item: item.clone(),
            name: widget_name_with(&item.path, options.naming),
            label,
            prefill: options.prefills.get(&item.path).cloned(),
            node,
            members,
            group,
        };
        let rule = rules
            .items
            .first_match(&ctx)
            .ok_or_else(|| TransformError::NoRule(item.path.to_string()))?;
        let output = match (rule.action)(&ctx) {
            Emission::Widgets(widgets) => {
                page.widgets.extend(widgets);
                ctx.name.clone()
            }
            Emission::Forced(d) => {
                let text = format!("forced: {d}");
                forced.push(d);
                text
            }
        };
        let entry = trace.push(&item.path, rule.id, output);
        entry.label_rule = Some(label_rule.to_string());
        entry.scope_index = Some(scope_index);
    }

    page.widgets
        .push(Widget::Navigation(NavigationKind::Submit));
    trace.push(app.root_path(), "EXT-SUBMIT", "submit");
    Ok(CuiOutput {
        page,
        trace,
        forced,
    })
}

/// Applies every forced group resolution until none is left.
pub fn auto_resolve(
    app: &ApplicationFeatureModel,
) -> Result<(ApplicationFeatureModel, Vec<Decision>), ConfigError> {
    let mut app = app.clone();
    let mut applied = Vec::new();
    loop {
        let next = app.open_items().into_iter().find_map(|item| {
            if item.kind != OpenItemKind::Group {
                return None;
            }
            let status = app.group_status(&item.path);
            (status.need() == status.undecided.len() as u32).then(|| {
                let chosen = status
                    .undecided
                    .iter()
                    .map(|p| p.name().to_string())
                    .collect();
                Decision::ResolveGroup(item.path.clone(), chosen)
            })
        });
        match next {
            Some(d) => {
                app = app.specialize(&d)?;
                applied.push(d);
            }
            None => return Ok((app, applied)),
        }
    }
}
