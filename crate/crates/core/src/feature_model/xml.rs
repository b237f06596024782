//! Canonical feature-model XML.
//!
//! Vocabulary (prefix `fm`): `FeatureModel`, `SolitaryFeature` (`min`,
//! `max`), `FeatureGroup` (`gmin`, `gmax`), `GroupedFeature`,
//! `Annotation/Description`, `Attribute/String|Integer|Float|Boolean|Date`
//! with values as `StringProperties/StringValue` (and analogues),
//! `Constraint` and `ModelReference`. Application documents add `state` and
//! `clones` attributes plus `Clone index="i"` instance elements.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use roxmltree::{Document, Node as XmlNode};
use thiserror::Error;

use super::path::InstancePath;
use super::types::{
    AttributeSpec, ConstraintKind, CrossTreeConstraint, FeatureCardinality, FeatureModel,
    GroupCardinality, Node, NodeKind,
};
use super::validate::{validate_model_with, Diagnostic, ValidationOptions};
use crate::configuration::DecisionState;
use crate::value::ValueType;
use crate::xmlfmt::XmlWriter;

pub const FM_NAMESPACE: &str = "urn:formweave:feature-model";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("line {line}: {message}")]
    Structure { line: u32, message: String },
    #[error("line {line}: unresolvable model reference '{target}'")]
    UnresolvedReference { line: u32, target: String },
    #[error("line {line}: cyclic model reference '{target}'")]
    CyclicReference { line: u32, target: String },
    #[error("invalid model:\n{}", format_located(.0))]
    Invalid(Vec<LocatedDiagnostic>),
}

/// A validation diagnostic with the source line of the offending element.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedDiagnostic {
    pub line: Option<u32>,
    pub diagnostic: Diagnostic,
}

impl fmt::Display for LocatedDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.diagnostic),
            None => write!(f, "{}", self.diagnostic),
        }
    }
}

fn format_located(ds: &[LocatedDiagnostic]) -> String {
    ds.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Supplies the text of referenced models by model name.
pub trait ModelSource {
    fn load(&self, name: &str) -> Option<String>;
}

/// A source that knows no models; any `ModelReference` fails to resolve.
pub struct NoModels;

impl ModelSource for NoModels {
    fn load(&self, _name: &str) -> Option<String> {
        None
    }
}

impl ModelSource for HashMap<String, String> {
    fn load(&self, name: &str) -> Option<String> {
        self.get(name).cloned()
    }
}

/// Resolves references against `*.fm.xml` files in a set of directories,
/// keyed by the `fm:value` of their root element.
#[derive(Debug, Default)]
pub struct DirectorySource {
    files: HashMap<String, PathBuf>,
}

impl DirectorySource {
    pub fn new<P: AsRef<Path>>(dirs: &[P]) -> Self {
        let mut files = HashMap::new();
        for dir in dirs {
            let Ok(entries) = std::fs::read_dir(dir.as_ref()) else {
                continue;
            };
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.to_string_lossy().ends_with(".fm.xml"))
                .collect();
            paths.sort();
            for path in paths {
                if let Some(name) = std::fs::read_to_string(&path)
                    .ok()
                    .and_then(|t| root_name(&t))
                {
                    files.entry(name).or_insert(path);
                }
            }
        }
        Self { files }
    }

    /// Source for a model file: its own directory plus a `shared/` subdirectory.
    pub fn for_file(path: &Path) -> Self {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(&[dir.clone(), dir.join("shared")])
    }
}

impl ModelSource for DirectorySource {
    fn load(&self, name: &str) -> Option<String> {
        self.files
            .get(name)
            .and_then(|p| std::fs::read_to_string(p).ok())
    }
}

/// `fm:value` of the root element, if the text parses.
pub fn root_name(text: &str) -> Option<String> {
    let doc = Document::parse(text).ok()?;
    attr(doc.root_element(), "value").map(str::to_string)
}

/// Decision annotations read from an application document.
#[derive(Debug, Default)]
pub(crate) struct Annotations {
    pub states: Vec<(InstancePath, DecisionState, u32)>,
    pub clones: Vec<(InstancePath, u32, u32)>,
    pub values: Vec<(InstancePath, ValueType, String, u32)>,
}

/// Parses a family model and validates it.
pub fn parse_feature_model(text: &str) -> Result<FeatureModel, ParseError> {
    parse_feature_model_with(text, &NoModels, ValidationOptions::default())
}

/// Parses a family model, inlining references from `source`, and validates it.
pub fn parse_feature_model_with(
    text: &str,
    source: &dyn ModelSource,
    options: ValidationOptions,
) -> Result<FeatureModel, ParseError> {
    let (model, lines) = parse_document_located(text, source)?;
    check(&model, &lines, options)?;
    Ok(model)
}

/// Parses without validating; semantic problems are left to
/// [`validate_model`](super::validate_model). Only syntax, vocabulary and
/// reference errors fail here.
pub fn parse_document(text: &str, source: &dyn ModelSource) -> Result<FeatureModel, ParseError> {
    parse_document_located(text, source).map(|(m, _)| m)
}

fn parse_document_located(
    text: &str,
    source: &dyn ModelSource,
) -> Result<(FeatureModel, HashMap<String, u32>), ParseError> {
    let doc = Document::parse(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let mut parser = Parser::new(&doc, source, None);
    let model = parser.model(doc.root_element())?;
    Ok((model, parser.lines))
}

pub(crate) fn parse_annotated(text: &str) -> Result<(FeatureModel, Annotations), ParseError> {
    let doc = Document::parse(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let mut parser = Parser::new(&doc, &NoModels, Some(Annotations::default()));
    let model = parser.model(doc.root_element())?;
    check(&model, &parser.lines, ValidationOptions::default())?;
    Ok((model, parser.annotations.unwrap_or_default()))
}

fn check(
    model: &FeatureModel,
    lines: &HashMap<String, u32>,
    options: ValidationOptions,
) -> Result<(), ParseError> {
    let diagnostics = validate_model_with(model, options);
    if diagnostics.is_empty() {
        return Ok(());
    }
    Err(ParseError::Invalid(
        diagnostics
            .into_iter()
            .map(|d| LocatedDiagnostic {
                line: lines.get(&d.path).copied(),
                diagnostic: d,
            })
            .collect(),
    ))
}

fn attr<'a>(node: XmlNode<'a, 'a>, local: &str) -> Option<&'a str> {
    node.attributes()
        .find(|a| a.name() == local)
        .map(|a| a.value())
}

struct Parser<'a, 'input> {
    doc: &'a Document<'input>,
    source: &'a dyn ModelSource,
    annotations: Option<Annotations>,
    constraints: Vec<CrossTreeConstraint>,
    lines: HashMap<String, u32>,
    reference_stack: Vec<String>,
}

struct Content {
    description: Option<String>,
    attribute: Option<AttributeSpec>,
    children: Vec<Node>,
}

impl<'a, 'input> Parser<'a, 'input> {
    fn new(
        doc: &'a Document<'input>,
        source: &'a dyn ModelSource,
        annotations: Option<Annotations>,
    ) -> Self {
        Self {
            doc,
            source,
            annotations,
            constraints: Vec::new(),
            lines: HashMap::new(),
            reference_stack: Vec::new(),
        }
    }

    fn line(&self, n: XmlNode) -> u32 {
        self.doc.text_pos_at(n.range().start).row
    }

    fn err(&self, n: XmlNode, message: impl Into<String>) -> ParseError {
        ParseError::Structure {
            line: self.line(n),
            message: message.into(),
        }
    }

    fn allow_attrs(&self, n: XmlNode, allowed: &[&str]) -> Result<(), ParseError> {
        for a in n.attributes() {
            if !allowed.contains(&a.name()) {
                return Err(self.err(
                    n,
                    format!(
                        "unknown attribute '{}' on {}",
                        a.name(),
                        n.tag_name().name()
                    ),
                ));
            }
        }
        Ok(())
    }

    fn required<'n>(&self, n: XmlNode<'n, 'n>, name: &str) -> Result<&'n str, ParseError> {
        attr(n, name).ok_or_else(|| {
            self.err(
                n,
                format!("{} lacks attribute '{name}'", n.tag_name().name()),
            )
        })
    }

    fn number(&self, n: XmlNode, name: &str) -> Result<Option<u32>, ParseError> {
        match attr(n, name) {
            None => Ok(None),
            Some(v) => v.parse::<u32>().map(Some).map_err(|_| {
                self.err(
                    n,
                    format!("attribute '{name}' must be a non-negative integer, got '{v}'"),
                )
            }),
        }
    }

    fn elements<'n>(n: XmlNode<'n, 'n>) -> Result<Vec<XmlNode<'n, 'n>>, XmlNode<'n, 'n>> {
        let mut out = Vec::new();
        for c in n.children() {
            if c.is_element() {
                out.push(c);
            } else if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
                return Err(c);
            }
        }
        Ok(out)
    }

    fn child_elements<'n>(&self, n: XmlNode<'n, 'n>) -> Result<Vec<XmlNode<'n, 'n>>, ParseError> {
        Self::elements(n)
            .map_err(|t| self.err(t, format!("unexpected text inside {}", n.tag_name().name())))
    }

    fn model(&mut self, root: XmlNode) -> Result<FeatureModel, ParseError> {
        if root.tag_name().name() != "FeatureModel" {
            return Err(self.err(
                root,
                format!(
                    "unknown element '{}', expected FeatureModel",
                    root.tag_name().name()
                ),
            ));
        }
        let app = self.annotations.is_some();
        self.allow_attrs(root, if app { &["value", "state"] } else { &["value"] })?;
        let name = self.required(root, "value")?.to_string();
        if self.reference_stack.is_empty() {
            self.reference_stack.push(name.clone());
        }
        let path = InstancePath::root(&name);
        self.lines.insert(name.clone(), self.line(root));
        self.state_of(root, &path)?;
        let content = self.content(root, &path, true, true)?;
        let mut constraints = std::mem::take(&mut self.constraints);
        // Constraints declared by the document itself follow those of inlined references.
        let mut own = Vec::new();
        for c in self.child_elements(root)? {
            if c.tag_name().name() == "Constraint" {
                own.push(self.constraint(c)?);
            }
        }
        constraints.splice(0..0, own);
        Ok(FeatureModel {
            root: Node {
                name: name.clone(),
                description: content.description,
                kind: NodeKind::Solitary(FeatureCardinality::MANDATORY),
                attribute: content.attribute,
                children: content.children,
            },
            name,
            constraints,
        })
    }

    fn constraint(&self, c: XmlNode) -> Result<CrossTreeConstraint, ParseError> {
        self.allow_attrs(c, &["kind", "from", "to"])?;
        let kind = match self.required(c, "kind")? {
            "requires" => ConstraintKind::Requires,
            "excludes" => ConstraintKind::Excludes,
            other => {
                return Err(self.err(
                    c,
                    format!("constraint kind must be requires|excludes, got '{other}'"),
                ))
            }
        };
        Ok(CrossTreeConstraint {
            kind,
            from: self.required(c, "from")?.to_string(),
            to: self.required(c, "to")?.to_string(),
        })
    }

    fn state_of(&mut self, n: XmlNode, path: &InstancePath) -> Result<(), ParseError> {
        let Some(ann) = self.annotations.as_mut() else {
            return Ok(());
        };
        let line = self.doc.text_pos_at(n.range().start).row;
        if let Some(s) = attr(n, "state") {
            let state = match s {
                "selected" => DecisionState::Selected,
                "eliminated" => DecisionState::Eliminated,
                "undecided" => DecisionState::Undecided,
                other => {
                    return Err(ParseError::Structure {
                        line,
                        message: format!(
                            "state must be selected|eliminated|undecided, got '{other}'"
                        ),
                    })
                }
            };
            ann.states.push((path.clone(), state, line));
        }
        Ok(())
    }

    /// Reads annotation, attribute and feature children of `n`. `record`
    /// is false when re-reading clone instance content, whose structure
    /// must repeat the template but whose constraints were already taken.
    fn content(
        &mut self,
        n: XmlNode,
        path: &InstancePath,
        allow_annotation: bool,
        record: bool,
    ) -> Result<Content, ParseError> {
        let mut out = Content {
            description: None,
            attribute: None,
            children: Vec::new(),
        };
        let mut seen_feature = false;
        for c in self.child_elements(n)? {
            let local = c.tag_name().name();
            match local {
                "Annotation" if allow_annotation => {
                    if seen_feature || out.attribute.is_some() || out.description.is_some() {
                        return Err(self.err(c, "Annotation must come first"));
                    }
                    out.description = Some(self.annotation(c)?);
                }
                "Attribute" => {
                    if seen_feature || out.attribute.is_some() {
                        return Err(self.err(c, "at most one Attribute, before child features"));
                    }
                    out.attribute = Some(self.attribute(c, path)?);
                }
                "SolitaryFeature" | "FeatureGroup" | "GroupedFeature" => {
                    seen_feature = true;
                    out.children.push(self.node(c, path, record)?);
                }
                "ModelReference" => {
                    seen_feature = true;
                    let nodes = self.reference(c, path, record)?;
                    out.children.extend(nodes);
                }
                "Constraint" if n.tag_name().name() == "FeatureModel" => {}
                "Clone"
                    if self.annotations.is_some() && n.tag_name().name() == "SolitaryFeature" => {}
                other => {
                    return Err(self.err(
                        c,
                        format!("unknown element '{other}' inside {}", n.tag_name().name()),
                    ))
                }
            }
        }
        Ok(out)
    }

    fn annotation(&self, a: XmlNode) -> Result<String, ParseError> {
        self.allow_attrs(a, &[])?;
        let kids = self.child_elements(a)?;
        match kids.as_slice() {
            [d] if d.tag_name().name() == "Description" => {
                self.allow_attrs(*d, &["value"])?;
                Ok(self.required(*d, "value")?.to_string())
            }
            _ => Err(self.err(a, "Annotation must contain exactly one Description")),
        }
    }

    fn attribute(&mut self, a: XmlNode, path: &InstancePath) -> Result<AttributeSpec, ParseError> {
        self.allow_attrs(a, &[])?;
        let kids = self.child_elements(a)?;
        let [t] = kids.as_slice() else {
            return Err(self.err(a, "Attribute must contain exactly one type element"));
        };
        let value_type = ValueType::from_element_name(t.tag_name().name()).ok_or_else(|| {
            self.err(
                *t,
                format!(
                    "unknown element '{}', expected an attribute type",
                    t.tag_name().name()
                ),
            )
        })?;
        self.allow_attrs(*t, &[])?;
        let props = self.child_elements(*t)?;
        match props.as_slice() {
            [] => {}
            [p] if p.tag_name().name() == format!("{}Properties", value_type.element_name())
                && self.annotations.is_some() =>
            {
                self.allow_attrs(*p, &[])?;
                let vals = self.child_elements(*p)?;
                let [v] = vals.as_slice() else {
                    return Err(self.err(*p, "Properties must contain exactly one value element"));
                };
                if v.tag_name().name() != format!("{}Value", value_type.element_name()) {
                    return Err(self.err(*v, format!("unknown element '{}'", v.tag_name().name())));
                }
                self.allow_attrs(*v, &["value"])?;
                let text = self.required(*v, "value")?.to_string();
                let line = self.line(*v);
                if let Some(ann) = self.annotations.as_mut() {
                    ann.values.push((path.clone(), value_type, text, line));
                }
            }
            [p, ..] => {
                return Err(self.err(
                    *p,
                    format!(
                        "unknown element '{}' inside attribute type",
                        p.tag_name().name()
                    ),
                ))
            }
        }
        Ok(AttributeSpec { value_type })
    }

    fn node(
        &mut self,
        n: XmlNode,
        parent: &InstancePath,
        record: bool,
    ) -> Result<Node, ParseError> {
        let local = n.tag_name().name();
        let app = self.annotations.is_some();
        let name = self.required(n, "value")?.to_string();
        let path = parent.child(&name);
        if record && !path.has_indices() {
            let line = self.line(n);
            self.lines.entry(path.plain()).or_insert(line);
        }
        let kind = match local {
            "SolitaryFeature" => {
                self.allow_attrs(
                    n,
                    if app {
                        &["value", "min", "max", "state", "clones"]
                    } else {
                        &["value", "min", "max"]
                    },
                )?;
                let min = self.number(n, "min")?.unwrap_or(1);
                let max = match attr(n, "max") {
                    None => Some(1),
                    Some("*") => None,
                    Some(_) => self.number(n, "max")?,
                };
                NodeKind::Solitary(FeatureCardinality { min, max })
            }
            "FeatureGroup" => {
                self.allow_attrs(
                    n,
                    if app {
                        &["value", "gmin", "gmax", "state"]
                    } else {
                        &["value", "gmin", "gmax"]
                    },
                )?;
                let default = GroupCardinality::default();
                NodeKind::Group(GroupCardinality {
                    min: self.number(n, "gmin")?.unwrap_or(default.min),
                    max: self.number(n, "gmax")?.unwrap_or(default.max),
                })
            }
            _ => {
                self.allow_attrs(n, if app { &["value", "state"] } else { &["value"] })?;
                NodeKind::Grouped
            }
        };
        self.state_of(n, &path)?;
        let cloneable = matches!(kind, NodeKind::Solitary(c) if c.is_cloneable());
        let content = self.content(n, &path, true, record)?;
        if app && cloneable {
            let line = self.line(n);
            if let Some(k) = self.number(n, "clones")? {
                if let Some(ann) = self.annotations.as_mut() {
                    ann.clones.push((path.clone(), k, line));
                }
            }
            for (pos, c) in self
                .child_elements(n)?
                .into_iter()
                .filter(|c| c.tag_name().name() == "Clone")
                .enumerate()
            {
                self.allow_attrs(c, &["index"])?;
                let index = self
                    .number(c, "index")?
                    .ok_or_else(|| self.err(c, "Clone lacks attribute 'index'"))?;
                if index as usize != pos + 1 {
                    return Err(self.err(c, format!("Clone index {index} out of sequence")));
                }
                let inst = path.instance(index);
                let again = self.content(c, &inst, false, false)?;
                if again.attribute != content.attribute || again.children != content.children {
                    return Err(self.err(c, "Clone content does not repeat the feature structure"));
                }
            }
        } else if app && attr(n, "clones").is_some() {
            return Err(self.err(n, "'clones' is only allowed on cloneable features"));
        }
        Ok(Node {
            name,
            description: content.description,
            kind,
            attribute: content.attribute,
            children: content.children,
        })
    }

    fn reference(
        &mut self,
        r: XmlNode,
        parent: &InstancePath,
        record: bool,
    ) -> Result<Vec<Node>, ParseError> {
        self.allow_attrs(r, &["target"])?;
        let target = self.required(r, "target")?.to_string();
        let line = self.line(r);
        if self.reference_stack.contains(&target) {
            return Err(ParseError::CyclicReference { line, target });
        }
        let text = self
            .source
            .load(&target)
            .ok_or_else(|| ParseError::UnresolvedReference {
                line,
                target: target.clone(),
            })?;
        let doc = Document::parse(&text)
            .map_err(|e| ParseError::Malformed(format!("in referenced model '{target}': {e}")))?;
        let mut inner = Parser::new(&doc, self.source, None);
        inner.reference_stack = self.reference_stack.clone();
        inner.reference_stack.push(target.clone());
        let referenced = inner.model(doc.root_element()).map_err(|e| match e {
            ParseError::Structure { line: l, message } => ParseError::Structure {
                line,
                message: format!("in referenced model '{target}' (line {l}): {message}"),
            },
            other => other,
        })?;
        let prefix = parent.plain();
        let rebase = |p: &str| match p.strip_prefix(referenced.name.as_str()) {
            Some(rest) => format!("{prefix}{rest}"),
            None => p.to_string(),
        };
        if record {
            for c in &referenced.constraints {
                self.constraints.push(CrossTreeConstraint {
                    kind: c.kind,
                    from: rebase(&c.from),
                    to: rebase(&c.to),
                });
            }
            for p in inner.lines.into_keys() {
                self.lines.entry(rebase(&p)).or_insert(line);
            }
        }
        Ok(referenced.root.children)
    }
}

/// Writes `model` in canonical form.
pub fn serialize_feature_model(model: &FeatureModel) -> String {
    write_document(model, &NoDecorations)
}

/// Per-node extras written by the application-model serializer.
pub(crate) trait Decorations {
    fn state(&self, _path: &InstancePath) -> Option<DecisionState> {
        None
    }
    fn clones(&self, _path: &InstancePath) -> Option<u32> {
        None
    }
    fn value(&self, _path: &InstancePath) -> Option<String> {
        None
    }
}

struct NoDecorations;
impl Decorations for NoDecorations {}

pub(crate) fn write_document(model: &FeatureModel, deco: &dyn Decorations) -> String {
    let mut w = XmlWriter::new();
    w.declaration();
    let path = InstancePath::root(&model.name);
    let state = deco.state(&path).map(DecisionState::as_str);
    let mut attrs = vec![
        ("xmlns:fm", FM_NAMESPACE),
        ("fm:value", model.name.as_str()),
    ];
    if let Some(s) = state {
        attrs.push(("state", s));
    }
    let has_body = model.root.description.is_some()
        || model.root.attribute.is_some()
        || !model.root.children.is_empty()
        || !model.constraints.is_empty();
    if !has_body {
        w.empty("fm:FeatureModel", &attrs);
        return w.finish();
    }
    w.open("fm:FeatureModel", &attrs);
    write_content(&mut w, &model.root, &path, deco, true);
    for c in &model.constraints {
        w.empty(
            "fm:Constraint",
            &[("kind", c.kind.as_str()), ("from", &c.from), ("to", &c.to)],
        );
    }
    w.close("fm:FeatureModel");
    w.finish()
}

fn write_content(
    w: &mut XmlWriter,
    node: &Node,
    path: &InstancePath,
    deco: &dyn Decorations,
    annotation: bool,
) {
    if annotation {
        if let Some(d) = &node.description {
            w.open("fm:Annotation", &[]);
            w.empty("fm:Description", &[("fm:value", d)]);
            w.close("fm:Annotation");
        }
    }
    if let Some(a) = node.attribute {
        let ty = format!("fm:{}", a.value_type.element_name());
        w.open("fm:Attribute", &[]);
        match deco.value(path) {
            Some(v) => {
                let props = format!("fm:{}Properties", a.value_type.element_name());
                let val = format!("fm:{}Value", a.value_type.element_name());
                w.open(&ty, &[]);
                w.open(&props, &[]);
                w.empty(&val, &[("fm:value", &v)]);
                w.close(&props);
                w.close(&ty);
            }
            None => w.empty(&ty, &[]),
        }
        w.close("fm:Attribute");
    }
    for child in &node.children {
        write_node(w, child, &path.child(&child.name), deco);
    }
}

fn write_node(w: &mut XmlWriter, node: &Node, path: &InstancePath, deco: &dyn Decorations) {
    let (tag, mut attrs): (&str, Vec<(&str, String)>) = match node.kind {
        NodeKind::Solitary(c) => (
            "fm:SolitaryFeature",
            vec![
                ("fm:value", node.name.clone()),
                ("min", c.min.to_string()),
                ("max", c.max.map_or("*".to_string(), |m| m.to_string())),
            ],
        ),
        NodeKind::Group(g) => (
            "fm:FeatureGroup",
            vec![
                ("fm:value", node.name.clone()),
                ("gmin", g.min.to_string()),
                ("gmax", g.max.to_string()),
            ],
        ),
        NodeKind::Grouped => ("fm:GroupedFeature", vec![("fm:value", node.name.clone())]),
    };
    if let Some(s) = deco.state(path) {
        attrs.push(("state", s.as_str().to_string()));
    }
    let clones = deco.clones(path);
    if let Some(k) = clones {
        attrs.push(("clones", k.to_string()));
    }
    let attrs: Vec<(&str, &str)> = attrs.iter().map(|(k, v)| (*k, v.as_str())).collect();
    let has_body = node.description.is_some()
        || node.attribute.is_some()
        || !node.children.is_empty()
        || clones.unwrap_or(0) > 0;
    if !has_body {
        w.empty(tag, &attrs);
        return;
    }
    w.open(tag, &attrs);
    write_content(w, node, path, deco, true);
    for i in 1..=clones.unwrap_or(0) {
        let inst = path.instance(i);
        let index = i.to_string();
        if node.attribute.is_none() && node.children.is_empty() {
            w.empty("fm:Clone", &[("index", &index)]);
        } else {
            w.open("fm:Clone", &[("index", &index)]);
            write_content(w, node, &inst, deco, false);
            w.close("fm:Clone");
        }
    }
    w.close(tag);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_model::validate::RuleId;

    const SMALL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:SolitaryFeature fm:value="A" min="1" max="1"/>
</fm:FeatureModel>
"#;

    #[test]
    fn smallest_legal_model() {
        let m = parse_feature_model(SMALL).unwrap();
        assert_eq!(m.name, "M");
        assert_eq!(m.root.children.len(), 1);
        assert_eq!(
            m.root.children[0].kind,
            NodeKind::Solitary(FeatureCardinality::MANDATORY)
        );
        assert_eq!(serialize_feature_model(&m), SMALL);
    }

    #[test]
    fn xor_group_of_two() {
        let text = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:FeatureGroup fm:value="G" gmin="1" gmax="1">
    <fm:GroupedFeature fm:value="Public"/>
    <fm:GroupedFeature fm:value="Private"/>
  </fm:FeatureGroup>
</fm:FeatureModel>"#;
        let m = parse_feature_model(text).unwrap();
        let g = &m.root.children[0];
        assert_eq!(g.kind, NodeKind::Group(GroupCardinality::XOR));
        assert_eq!(g.children.len(), 2);
        assert!(g.children.iter().all(|c| c.kind == NodeKind::Grouped));
    }

    #[test]
    fn missing_group_cardinality_defaults_to_xor() {
        let text = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:FeatureGroup fm:value="G"><fm:GroupedFeature fm:value="X"/></fm:FeatureGroup>
</fm:FeatureModel>"#;
        let m = parse_feature_model(text).unwrap();
        assert_eq!(
            m.root.children[0].kind,
            NodeKind::Group(GroupCardinality::XOR)
        );
    }

    #[test]
    fn dangling_constraint_is_reported_with_line() {
        let text = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:SolitaryFeature fm:value="A" min="0" max="1"/>
  <fm:Constraint kind="requires" from="M.A.X" to="M.A"/>
</fm:FeatureModel>"#;
        match parse_feature_model(text) {
            Err(ParseError::Invalid(ds)) => {
                assert_eq!(ds.len(), 1);
                assert_eq!(ds[0].diagnostic.rule, RuleId::DanglingConstraint);
                assert_eq!(ds[0].diagnostic.path, "M.A.X");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_and_vocabulary_errors() {
        assert!(matches!(
            parse_feature_model("<fm:FeatureModel"),
            Err(ParseError::Malformed(_))
        ));
        let unknown = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:Widget fm:value="A"/>
</fm:FeatureModel>"#;
        match parse_feature_model(unknown) {
            Err(ParseError::Structure { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("unknown element 'Widget'"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_path_and_min_gt_max() {
        let text = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="M">
  <fm:SolitaryFeature fm:value="A" min="0" max="1"/>
  <fm:SolitaryFeature fm:value="A" min="3" max="2"/>
</fm:FeatureModel>"#;
        let Err(ParseError::Invalid(ds)) = parse_feature_model(text) else {
            panic!("expected invalid");
        };
        let rules: Vec<_> = ds.iter().map(|d| d.diagnostic.rule).collect();
        assert!(rules.contains(&RuleId::DuplicatePath));
        assert!(rules.contains(&RuleId::MinGtMax));
        assert!(ds.iter().all(|d| d.line == Some(2)));
    }

    #[test]
    fn references_are_inlined_and_constraints_rebased() {
        let person = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="Person">
  <fm:SolitaryFeature fm:value="Name" min="1" max="1"><fm:Attribute><fm:String/></fm:Attribute></fm:SolitaryFeature>
  <fm:SolitaryFeature fm:value="Phone" min="0" max="1"/>
  <fm:SolitaryFeature fm:value="Email" min="0" max="1"/>
  <fm:Constraint kind="requires" from="Person.Phone" to="Person.Email"/>
</fm:FeatureModel>"#;
        let service = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="Svc">
  <fm:SolitaryFeature fm:value="Applicant" min="1" max="1">
    <fm:ModelReference target="Person"/>
  </fm:SolitaryFeature>
</fm:FeatureModel>"#;
        let source: HashMap<String, String> = [("Person".to_string(), person.to_string())].into();
        let m = parse_feature_model_with(service, &source, ValidationOptions::default()).unwrap();
        let applicant = &m.root.children[0];
        assert_eq!(
            applicant
                .children
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>(),
            ["Name", "Phone", "Email"]
        );
        assert_eq!(m.constraints[0].from, "Svc.Applicant.Phone");
        assert_eq!(m.constraints[0].to, "Svc.Applicant.Email");

        assert!(matches!(
            parse_feature_model(service),
            Err(ParseError::UnresolvedReference { line: 3, .. })
        ));
    }

    #[test]
    fn reference_cycles_fail() {
        let a = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="A"><fm:ModelReference target="B"/></fm:FeatureModel>"#;
        let b = r#"<fm:FeatureModel xmlns:fm="urn:formweave:feature-model" fm:value="B"><fm:ModelReference target="A"/></fm:FeatureModel>"#;
        let source: HashMap<String, String> = [
            ("A".to_string(), a.to_string()),
            ("B".to_string(), b.to_string()),
        ]
        .into();
        let r = parse_feature_model_with(a, &source, ValidationOptions::default());
        assert!(
            matches!(r, Err(ParseError::CyclicReference { .. })),
            "{r:?}"
        );
    }
}
