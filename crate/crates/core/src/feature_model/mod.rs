//! Cardinality-based feature models: types, canonical XML, validation and
//! an exhaustive configuration enumerator.

pub mod enumerate;
mod index;
mod path;
mod types;
mod validate;
pub mod xml;

pub use enumerate::{
    canonical_line, enumerate_configurations, enumerate_with_ceiling, structural_count,
    EnumerationError, DEFAULT_CEILING,
};
pub use index::{IndexedNode, ModelIndex, NodeId};
pub use path::{InstancePath, PathSyntaxError, Segment};
pub use types::{
    AttributeSpec, ConstraintKind, CrossTreeConstraint, FeatureCardinality, FeatureModel,
    GroupCardinality, Node, NodeKind,
};
pub use validate::{
    rules_of, validate_model, validate_model_with, Diagnostic, RuleId, ValidationOptions,
};
pub use xml::{
    parse_document, parse_feature_model, parse_feature_model_with, root_name,
    serialize_feature_model, DirectorySource, LocatedDiagnostic, ModelSource, NoModels, ParseError,
    FM_NAMESPACE,
};
