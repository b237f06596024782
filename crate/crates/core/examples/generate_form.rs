//! Renders the complete offline form of the felling permit as HTML.

use formweave::cui::render_html;
use formweave::interaction::generate_offline;
use formweave::service::load_service;

fn main() {
    let file = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/services/felling-permit.fm.xml"
    );
    let service = load_service(file.as_ref(), None).expect("bundled service loads");
    let app = generate_offline(service.model.clone()).expect("form generates");
    print!("{}", render_html(&app.pages[0]));
}
