//! Small helpers shared by the XML readers and writers.

use roxmltree::Node;

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders `<name a="v" .../>` or the opening tag when `close` is false.
pub(crate) fn tag(name: &str, attrs: &[(&str, &str)], close: bool) -> String {
    let mut s = format!("<{name}");
    for (k, v) in attrs {
        s.push(' ');
        s.push_str(k);
        s.push_str("=\"");
        s.push_str(&escape(v));
        s.push('"');
    }
    s.push_str(if close { "/>" } else { ">" });
    s
}

/// Element children, skipping whitespace text and comments.
pub(crate) fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

/// Non-whitespace text directly under `node`, if any.
pub(crate) fn stray_text(node: Node<'_, '_>) -> Option<String> {
    node.children()
        .filter(|c| c.is_text())
        .filter_map(|c| c.text())
        .map(str::trim)
        .find(|t| !t.is_empty())
        .map(str::to_string)
}

/// Path step for an element, keyed by its identifying attribute when present.
pub(crate) fn step(node: Node<'_, '_>, key_attrs: &[&str]) -> String {
    let name = node.tag_name().name();
    for k in key_attrs {
        if let Some(v) = node.attribute(*k) {
            return format!("{name}[@{k}='{v}']");
        }
    }
    let pos = node
        .prev_siblings()
        .filter(|s| s.is_element() && s.tag_name().name() == name)
        .count()
        + 1;
    format!("{name}[{pos}]")
}

/// Identifiers may not be empty, contain whitespace, or use the reserved `*`.
pub(crate) fn identifier_problem(id: &str) -> Option<&'static str> {
    if id.is_empty() {
        Some("identifier is empty")
    } else if id.chars().any(char::is_whitespace) {
        Some("identifier contains whitespace")
    } else if id.contains('*') {
        Some("identifier contains the reserved character '*'")
    } else {
        None
    }
}
