use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// One step of an [`InstancePath`]: a feature name plus, for cloned
/// features, the 1-based clone index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub name: String,
    pub index: Option<u32>,
}

/// Path to a node instance, e.g. `Move.FamilyMember[2].Name`.
///
/// For features without clones the instance path equals the plain model
/// path. A cloneable feature `P` has a collection path `…P` (no index) that
/// carries the clone decision, and instance paths `…P[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InstancePath {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed path '{0}'")]
pub struct PathSyntaxError(pub String);

impl InstancePath {
    pub fn root(name: impl Into<String>) -> Self {
        Self {
            segments: vec![Segment {
                name: name.into(),
                index: None,
            }],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn child(&self, name: &str) -> Self {
        let mut segments = self.segments.clone();
        segments.push(Segment {
            name: name.to_string(),
            index: None,
        });
        Self { segments }
    }

    /// The `i`-th instance of the collection this path names.
    pub fn instance(&self, index: u32) -> Self {
        let mut segments = self.segments.clone();
        if let Some(last) = segments.last_mut() {
            last.index = Some(index);
        }
        Self { segments }
    }

    /// For `…P[i]` returns `…P`; for any other path returns `None`.
    pub fn collection(&self) -> Option<Self> {
        let last = self.segments.last()?;
        last.index?;
        let mut segments = self.segments.clone();
        segments.last_mut().unwrap().index = None;
        Some(Self { segments })
    }

    pub fn last_index(&self) -> Option<u32> {
        self.segments.last().and_then(|s| s.index)
    }

    /// Parent instance; the parent of `P[i]` is the parent of `P`.
    pub fn parent(&self) -> Option<Self> {
        if self.segments.len() <= 1 {
            return None;
        }
        Some(Self {
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }

    pub fn name(&self) -> &str {
        self.segments.last().map_or("", |s| s.name.as_str())
    }

    /// Model path with every clone index dropped.
    pub fn plain(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.name.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn has_indices(&self) -> bool {
        self.segments.iter().any(|s| s.index.is_some())
    }

    pub fn starts_with(&self, prefix: &InstancePath) -> bool {
        self.segments.starts_with(&prefix.segments)
    }

    /// Names concatenated without separator, indices kept. Not injective.
    pub fn concatenated(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            out.push_str(&s.name);
            if let Some(i) = s.index {
                out.push_str(&format!("[{i}]"));
            }
        }
        out
    }
}

impl fmt::Display for InstancePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&s.name)?;
            if let Some(idx) = s.index {
                write!(f, "[{idx}]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for InstancePath {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PathSyntaxError(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        let mut segments = Vec::new();
        for part in s.split('.') {
            let (name, index) = match part.split_once('[') {
                Some((name, rest)) => {
                    let digits = rest.strip_suffix(']').ok_or_else(bad)?;
                    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(bad());
                    }
                    let idx: u32 = digits.parse().map_err(|_| bad())?;
                    if idx == 0 {
                        return Err(bad());
                    }
                    (name, Some(idx))
                }
                None => (part, None),
            };
            if name.is_empty() || name.contains(']') {
                return Err(bad());
            }
            segments.push(Segment {
                name: name.to_string(),
                index,
            });
        }
        Ok(Self { segments })
    }
}

impl Serialize for InstancePath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InstancePath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
