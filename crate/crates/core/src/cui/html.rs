use std::fmt::Write;

use super::{Input, InputKind, LayoutKind, NavigationKind, Page, Widget};
use crate::xmlfmt::{escape_attr as attr, escape_text as text};

const LABEL_STYLE: &str = "width: 150px";

/// Renders a page as a self-contained, well-formed HTML document.
pub fn render_html(page: &Page) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n");
    out.push_str("<html>\n");
    out.push_str("  <head>\n");
    out.push_str("    <meta charset=\"utf-8\"/>\n");
    let _ = writeln!(out, "    <title>{}</title>", text(&page.title));
    out.push_str("  </head>\n");
    out.push_str("  <body>\n");
    let _ = writeln!(out, "    <form id=\"{}\" method=\"post\">", attr(&page.id));
    let mut depth = 3;
    for widget in &page.widgets {
        match widget {
            Widget::Input(input) => render_input(&mut out, depth, input),
            Widget::Output { text: t } => line(&mut out, depth, &format!("<p>{}</p>", text(t))),
            Widget::Navigation(kind) => {
                let (value, caption) = match kind {
                    NavigationKind::Submit => ("submit", "Submit"),
                    NavigationKind::Next => ("next", "Next"),
                    NavigationKind::Back => ("back", "Back"),
                };
                line(
                    &mut out,
                    depth,
                    &format!("<button type=\"submit\" name=\"_action\" value=\"{value}\">{caption}</button>"),
                );
            }
            Widget::Layout(LayoutKind::GroupStart { legend }) => {
                line(&mut out, depth, "<fieldset>");
                depth += 1;
                if let Some(l) = legend {
                    line(&mut out, depth, &format!("<legend>{}</legend>", text(l)));
                }
            }
            Widget::Layout(LayoutKind::GroupEnd) => {
                depth -= 1;
                line(&mut out, depth, "</fieldset>");
            }
            Widget::Layout(LayoutKind::LineBreak) => line(&mut out, depth, "<br/>"),
        }
    }
    out.push_str("    </form>\n");
    out.push_str("  </body>\n");
    out.push_str("</html>\n");
    out
}

fn line(out: &mut String, depth: usize, s: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(s);
    out.push('\n');
}

fn render_input(out: &mut String, depth: usize, input: &Input) {
    let name = attr(&input.name);
    let required = if input.required {
        " required=\"required\""
    } else {
        ""
    };
    match input.kind {
        InputKind::Text => {
            line(
                out,
                depth,
                &format!(
                    "<label for=\"{name}\" style=\"{LABEL_STYLE}\">{}</label>",
                    text(&input.label)
                ),
            );
            let value = attr(input.prefill.as_deref().unwrap_or(""));
            line(
                out,
                depth,
                &format!("<input type=\"text\" id=\"{name}\" name=\"{name}\" value=\"{value}\"{required}/>"),
            );
        }
        InputKind::Radio | InputKind::Checkbox => {
            line(
                out,
                depth,
                &format!(
                    "<label style=\"{LABEL_STYLE}\">{}</label>",
                    text(&input.label)
                ),
            );
            let ty = if input.kind == InputKind::Radio {
                "radio"
            } else {
                "checkbox"
            };
            let checked: Vec<&str> = input
                .prefill
                .as_deref()
                .map(|p| vec![p])
                .unwrap_or_default();
            for (i, opt) in input.options.iter().enumerate() {
                let mark = if checked.contains(&opt.value.as_str()) {
                    " checked=\"checked\""
                } else {
                    ""
                };
                let req = if i == 0 && input.kind == InputKind::Radio {
                    required
                } else {
                    ""
                };
                line(
                    out,
                    depth,
                    &format!(
                        "<input type=\"{ty}\" name=\"{name}\" value=\"{}\"{mark}{req}/>{}",
                        attr(&opt.value),
                        text(&opt.label)
                    ),
                );
            }
        }
        InputKind::Select => {
            line(
                out,
                depth,
                &format!(
                    "<label for=\"{name}\" style=\"{LABEL_STYLE}\">{}</label>",
                    text(&input.label)
                ),
            );
            line(
                out,
                depth,
                &format!("<select id=\"{name}\" name=\"{name}\"{required}>"),
            );
            for opt in &input.options {
                let mark = if input.prefill.as_deref() == Some(opt.value.as_str()) {
                    " selected=\"selected\""
                } else {
                    ""
                };
                line(
                    out,
                    depth + 1,
                    &format!(
                        "<option value=\"{}\"{mark}>{}</option>",
                        attr(&opt.value),
                        text(&opt.label)
                    ),
                );
            }
            line(out, depth, "</select>");
        }
    }
    if let Some(e) = &input.error {
        line(
            out,
            depth,
            &format!("<span class=\"error\">{}</span>", text(e)),
        );
    }
}
