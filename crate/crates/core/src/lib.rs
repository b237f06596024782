//! Generates interactive e-forms from cardinality-based feature models.
//!
//! A service is described by a family [`FeatureModel`]. Citizens fill in a
//! form that is generated page by page from the open variability of an
//! [`ApplicationFeatureModel`]; answers flow back as decisions until the
//! model is complete, at which point a [`Report`] is produced. Data
//! administration functions can fill values on the citizen's behalf, in an
//! order chosen by a [`workflow`] strategy.
//!
//! [`FeatureModel`]: feature_model::FeatureModel
//! [`ApplicationFeatureModel`]: configuration::ApplicationFeatureModel
//! [`Report`]: cui::Report

pub mod cli;
pub mod configuration;
pub mod cui;
pub mod data_admin;
pub mod feature_model;
pub mod interaction;
pub mod server;
pub mod service;
pub mod transform;
pub mod value;
pub mod workflow;
mod xmlfmt;
