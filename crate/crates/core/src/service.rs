//! Product services: a family model plus its function catalog, loaded from
//! a directory of `<stem>.fm.xml` / `<stem>.catalog.json` pairs. Referenced
//! models are looked up in the same directory and its `shared/`
//! subdirectory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::feature_model::{
    parse_feature_model_with, DirectorySource, FeatureModel, ParseError, ValidationOptions,
};
use crate::workflow::{CatalogError, FunctionCatalog};

#[derive(Debug)]
pub struct Service {
    pub name: String,
    pub model: Arc<FeatureModel>,
    pub catalog: FunctionCatalog,
    pub model_file: PathBuf,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Catalog { path: PathBuf, source: CatalogError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ServiceSummary {
    pub service_name: String,
    pub title: String,
}

/// `foo.fm.xml` -> `foo.catalog.json` next to it.
pub fn catalog_path_for(model_file: &Path) -> PathBuf {
    let name = model_file
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".fm.xml").unwrap_or(&name);
    model_file.with_file_name(format!("{stem}.catalog.json"))
}

/// Loads a model and its catalog. Without an explicit catalog the sibling
/// `.catalog.json` is used if present, else the catalog is empty.
pub fn load_service(
    model_file: &Path,
    catalog_file: Option<&Path>,
) -> Result<Service, ServiceError> {
    let text = std::fs::read_to_string(model_file).map_err(|source| ServiceError::Io {
        path: model_file.to_path_buf(),
        source,
    })?;
    let source = DirectorySource::for_file(model_file);
    let model = parse_feature_model_with(&text, &source, ValidationOptions::default()).map_err(
        |source| ServiceError::Model {
            path: model_file.to_path_buf(),
            source,
        },
    )?;
    let sibling = catalog_path_for(model_file);
    let catalog_file = catalog_file
        .map(Path::to_path_buf)
        .or_else(|| sibling.exists().then_some(sibling));
    let catalog = match &catalog_file {
        Some(path) => {
            let c = FunctionCatalog::load(path).map_err(|source| ServiceError::Catalog {
                path: path.clone(),
                source,
            })?;
            c.validate(&model).map_err(|source| ServiceError::Catalog {
                path: path.clone(),
                source,
            })?;
            c
        }
        None => FunctionCatalog::empty(model.name.clone()),
    };
    Ok(Service {
        name: model.name.clone(),
        model: Arc::new(model),
        catalog,
        model_file: model_file.to_path_buf(),
    })
}

/// All loadable services of a directory. Files that fail to load are
/// logged and left out.
#[derive(Debug, Default)]
pub struct ServiceDirectory {
    services: BTreeMap<String, Arc<Service>>,
    pub failures: Vec<String>,
}

impl ServiceDirectory {
    pub fn load(dir: &Path) -> Result<Self, std::io::Error> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".fm.xml"))
            .collect();
        files.sort();
        let mut out = ServiceDirectory::default();
        for file in files {
            match load_service(&file, None) {
                Ok(s) if out.services.contains_key(&s.name) => {
                    let msg = format!("{}: service '{}' already loaded", file.display(), s.name);
                    log::warn!("{msg}");
                    out.failures.push(msg);
                }
                Ok(s) => {
                    out.services.insert(s.name.clone(), Arc::new(s));
                }
                Err(e) => {
                    log::warn!("skipping service: {e}");
                    out.failures.push(e.to_string());
                }
            }
        }
        Ok(out)
    }

    pub fn from_services(services: impl IntoIterator<Item = Service>) -> Self {
        ServiceDirectory {
            services: services
                .into_iter()
                .map(|s| (s.name.clone(), Arc::new(s)))
                .collect(),
            failures: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<Service>> {
        self.services.get(name).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Service>> {
        self.services.values()
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    pub fn summaries(&self) -> Vec<ServiceSummary> {
        self.services
            .values()
            .map(|s| ServiceSummary {
                service_name: s.name.clone(),
                title: s.model.title().to_string(),
            })
            .collect()
    }

    /// `(model, catalog)` pairs, the shape fixture validation expects.
    pub fn catalogs(&self) -> Vec<(&FeatureModel, &FunctionCatalog)> {
        self.services
            .values()
            .map(|s| (s.model.as_ref(), &s.catalog))
            .collect()
    }
}
