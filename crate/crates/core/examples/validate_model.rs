//! Parses a family model, reports diagnostics and prints its canonical XML.
//!
//! cargo run --example validate_model -- services/felling-permit.fm.xml

use std::path::PathBuf;

use formweave::feature_model::{
    parse_document, serialize_feature_model, validate_model, DirectorySource,
};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/services/felling-permit.fm.xml"
            ))
        });
    let text = std::fs::read_to_string(&path).expect("readable model");
    let model = match parse_document(&text, &DirectorySource::for_file(&path)) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(2);
        }
    };
    let diagnostics = validate_model(&model);
    for d in &diagnostics {
        eprintln!("{d}");
    }
    println!(
        "{} nodes, {} constraints, {} diagnostics",
        model.node_count(),
        model.constraints.len(),
        diagnostics.len()
    );
    print!("{}", serialize_feature_model(&model));
}
