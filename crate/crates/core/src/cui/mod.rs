//! Concrete UI model: pages of input, output, navigation and layout widgets.
//!
//! Pages have two external forms: an HTML document ([`render_html`]) and a
//! JSON page model for clients ([`page_to_wire`]).

mod html;
mod report;

use serde::{Deserialize, Serialize};

use crate::value::ValueType;

pub use html::render_html;
pub use report::{render_report, Report, ReportField, ReportFormat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WebApplication {
    pub service_name: String,
    pub pages: Vec<Page>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Page {
    #[serde(rename = "pageId")]
    pub id: String,
    pub title: String,
    pub widgets: Vec<Widget>,
}

impl Page {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Page {
            id: id.into(),
            title: title.into(),
            widgets: Vec::new(),
        }
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Input> {
        self.widgets.iter().filter_map(|w| match w {
            Widget::Input(i) => Some(i),
            _ => None,
        })
    }

    pub fn input(&self, name: &str) -> Option<&Input> {
        self.inputs().find(|i| i.name == name)
    }

    pub fn input_mut(&mut self, name: &str) -> Option<&mut Input> {
        self.widgets.iter_mut().find_map(|w| match w {
            Widget::Input(i) if i.name == name => Some(i),
            _ => None,
        })
    }

    /// Checks the page invariants: unique non-empty input names, enough
    /// options on choice widgets, balanced layout groups.
    pub fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        let mut depth = 0i32;
        for w in &self.widgets {
            match w {
                Widget::Input(i) => {
                    if i.name.is_empty() {
                        return Err("input with empty name".into());
                    }
                    if !seen.insert(i.name.as_str()) {
                        return Err(format!("duplicate input name '{}'", i.name));
                    }
                    let min = match i.kind {
                        InputKind::Radio | InputKind::Select => 2,
                        InputKind::Checkbox => 1,
                        InputKind::Text => 0,
                    };
                    if i.options.len() < min {
                        return Err(format!("'{}' needs at least {min} options", i.name));
                    }
                }
                Widget::Layout(LayoutKind::GroupStart { .. }) => depth += 1,
                Widget::Layout(LayoutKind::GroupEnd) => {
                    depth -= 1;
                    if depth < 0 {
                        return Err("group-end without group-start".into());
                    }
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err("unclosed layout group".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "WireWidget", into = "WireWidget")]
pub enum Widget {
    Input(Input),
    Output { text: String },
    Navigation(NavigationKind),
    Layout(LayoutKind),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    #[default]
    Text,
    Radio,
    Checkbox,
    Select,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavigationKind {
    Submit,
    Next,
    Back,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutKind {
    GroupStart { legend: Option<String> },
    GroupEnd,
    LineBreak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetOption {
    pub value: String,
    pub label: String,
}

impl WidgetOption {
    pub fn new(value: impl Into<String>, label: impl Into<String>) -> Self {
        WidgetOption {
            value: value.into(),
            label: label.into(),
        }
    }
}

/// A form control bound to one widget name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Input {
    #[serde(skip)]
    pub kind: InputKind,
    pub name: String,
    pub label: String,
    pub value_type: Option<ValueType>,
    pub required: bool,
    pub prefill: Option<String>,
    pub options: Vec<WidgetOption>,
    pub error: Option<String>,
}

impl Input {
    pub fn new(kind: InputKind, name: impl Into<String>, label: impl Into<String>) -> Self {
        Input {
            kind,
            name: name.into(),
            label: label.into(),
            value_type: None,
            required: false,
            prefill: None,
            options: Vec::new(),
            error: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum WireWidget {
    Text(Input),
    Radio(Input),
    Checkbox(Input),
    Select(Input),
    Output { text: String },
    Submit,
    Next,
    Back,
    GroupStart { legend: Option<String> },
    GroupEnd,
    LineBreak,
}

impl From<WireWidget> for Widget {
    fn from(w: WireWidget) -> Self {
        let input = |kind, mut i: Input| {
            i.kind = kind;
            Widget::Input(i)
        };
        match w {
            WireWidget::Text(i) => input(InputKind::Text, i),
            WireWidget::Radio(i) => input(InputKind::Radio, i),
            WireWidget::Checkbox(i) => input(InputKind::Checkbox, i),
            WireWidget::Select(i) => input(InputKind::Select, i),
            WireWidget::Output { text } => Widget::Output { text },
            WireWidget::Submit => Widget::Navigation(NavigationKind::Submit),
            WireWidget::Next => Widget::Navigation(NavigationKind::Next),
            WireWidget::Back => Widget::Navigation(NavigationKind::Back),
            WireWidget::GroupStart { legend } => Widget::Layout(LayoutKind::GroupStart { legend }),
            WireWidget::GroupEnd => Widget::Layout(LayoutKind::GroupEnd),
            WireWidget::LineBreak => Widget::Layout(LayoutKind::LineBreak),
        }
    }
}

impl From<Widget> for WireWidget {
    fn from(w: Widget) -> Self {
        match w {
            Widget::Input(i) => match i.kind {
                InputKind::Text => WireWidget::Text(i),
                InputKind::Radio => WireWidget::Radio(i),
                InputKind::Checkbox => WireWidget::Checkbox(i),
                InputKind::Select => WireWidget::Select(i),
            },
            Widget::Output { text } => WireWidget::Output { text },
            Widget::Navigation(NavigationKind::Submit) => WireWidget::Submit,
            Widget::Navigation(NavigationKind::Next) => WireWidget::Next,
            Widget::Navigation(NavigationKind::Back) => WireWidget::Back,
            Widget::Layout(LayoutKind::GroupStart { legend }) => WireWidget::GroupStart { legend },
            Widget::Layout(LayoutKind::GroupEnd) => WireWidget::GroupEnd,
            Widget::Layout(LayoutKind::LineBreak) => WireWidget::LineBreak,
        }
    }
}

/// JSON page model: `{"pageId", "title", "widgets"}`, keys in fixed order.
pub fn page_to_wire(page: &Page) -> String {
    serde_json::to_string_pretty(page).expect("page model serializes")
}

pub fn page_from_wire(text: &str) -> Result<Page, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Page {
        let mut name = Input::new(InputKind::Text, "Felling.Applicant.Name", "Name");
        name.value_type = Some(ValueType::String);
        name.required = true;
        name.prefill = Some("Jansen".into());
        let mut kind = Input::new(InputKind::Radio, "Felling.Kind", "Kind");
        kind.required = true;
        kind.options = vec![
            WidgetOption::new("Public", "Public"),
            WidgetOption::new("Private", "Private"),
        ];
        let mut page = Page::new("page-001", "Felling permit");
        page.widgets = vec![
            Widget::Output {
                text: "Please fill in".into(),
            },
            Widget::Input(name),
            Widget::Input(kind),
            Widget::Layout(LayoutKind::LineBreak),
            Widget::Navigation(NavigationKind::Submit),
        ];
        page
    }

    #[test]
    fn text_input_wire_fields() {
        let wire: serde_json::Value = serde_json::from_str(&page_to_wire(&sample())).unwrap();
        let w = &wire["widgets"][1];
        assert_eq!(w["kind"], "text");
        assert_eq!(w["name"], "Felling.Applicant.Name");
        assert_eq!(w["required"], true);
        assert_eq!(w["valueType"], "string");
        assert_eq!(wire["widgets"][4], serde_json::json!({"kind": "submit"}));
        assert_eq!(wire["pageId"], "page-001");
    }

    #[test]
    fn wire_round_trip_is_lossless() {
        let page = sample();
        let text = page_to_wire(&page);
        let back = page_from_wire(&text).unwrap();
        assert_eq!(back, page);
        assert_eq!(page_to_wire(&back), text);
        assert_eq!(render_html(&back), render_html(&page));
    }

    #[test]
    fn key_order_is_stable() {
        let text = page_to_wire(&sample());
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"pageId\"") < pos("\"title\"") && pos("\"title\"") < pos("\"widgets\""));
    }

    #[test]
    fn page_check() {
        assert!(sample().check().is_ok());
        let mut bad = sample();
        bad.widgets.push(bad.widgets[1].clone());
        assert!(bad.check().unwrap_err().contains("duplicate"));
    }
}
