//! Lists every complete configuration of the excerpt request service.

use formweave::feature_model::{canonical_line, enumerate_configurations, structural_count};
use formweave::service::load_service;

fn main() {
    let file = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/services/excerpt-request.fm.xml"
    );
    let service = load_service(file.as_ref(), None).expect("bundled service loads");
    let structural = structural_count(&service.model, 2);
    let configs = enumerate_configurations(&service.model, 2).expect("small model");
    println!(
        "{structural} structural configurations, {} satisfy the constraints",
        configs.len()
    );
    for c in &configs {
        println!("{}", canonical_line(c));
    }
}
