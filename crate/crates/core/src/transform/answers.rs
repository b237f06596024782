use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A submitted form value. JSON numbers are accepted and kept as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, try_from = "serde_json::Value")]
pub enum Answer {
    Flag(bool),
    Text(String),
    Many(Vec<String>),
}

/// Answers keyed by widget name.
pub type Answers = BTreeMap<String, Answer>;

impl TryFrom<serde_json::Value> for Answer {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, Self::Error> {
        use serde_json::Value as J;
        match v {
            J::Bool(b) => Ok(Answer::Flag(b)),
            J::String(s) => Ok(Answer::Text(s)),
            J::Number(n) => Ok(Answer::Text(n.to_string())),
            J::Array(items) => items
                .into_iter()
                .map(|i| match i {
                    J::String(s) => Ok(s),
                    J::Number(n) => Ok(n.to_string()),
                    other => Err(format!("unsupported list item {other}")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Answer::Many),
            other => Err(format!("unsupported answer {other}")),
        }
    }
}

impl From<&str> for Answer {
    fn from(s: &str) -> Self {
        Answer::Text(s.to_string())
    }
}

impl From<bool> for Answer {
    fn from(b: bool) -> Self {
        Answer::Flag(b)
    }
}

impl From<Vec<String>> for Answer {
    fn from(v: Vec<String>) -> Self {
        Answer::Many(v)
    }
}

impl Answer {
    /// Checkbox reading: unchecked is `false`, an explicit "false" too.
    pub fn checked(&self) -> bool {
        match self {
            Answer::Flag(b) => *b,
            Answer::Text(s) => !s.is_empty() && s != "false",
            Answer::Many(v) => !v.is_empty(),
        }
    }

    /// Single text value; lists must have exactly one element.
    pub fn text(&self) -> Option<&str> {
        match self {
            Answer::Text(s) => Some(s),
            Answer::Many(v) if v.len() == 1 => Some(&v[0]),
            Answer::Flag(true) => Some("true"),
            Answer::Flag(false) => Some("false"),
            Answer::Many(_) => None,
        }
    }

    /// All values, for multi-choice widgets.
    pub fn values(&self) -> Vec<String> {
        match self {
            Answer::Text(s) if s.is_empty() => Vec::new(),
            Answer::Text(s) => vec![s.clone()],
            Answer::Many(v) => v.clone(),
            Answer::Flag(_) => Vec::new(),
        }
    }
}
