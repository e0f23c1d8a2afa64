//! Internal-link and category extraction from raw wikitext.
//!
//! Only the `[[Target]]`, `[[Target|label]]` and `[[Category:Name]]` forms
//! are recognised. Templates are not expanded.

/// Normalizes a page title the way MediaWiki does for the main namespace:
/// underscores become spaces, whitespace runs collapse, and the first
/// character is upper-cased. Returns `None` for titles that are empty after
/// normalization.
pub fn normalize_title(raw: &str) -> Option<String> {
    let mut out = String::with_capacity(raw.len());
    for word in raw
        .split(|c: char| c == '_' || c.is_whitespace())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    let mut chars = out.chars();
    let first = chars.next()?;
    let mut normalized: String = first.to_uppercase().collect();
    normalized.push_str(chars.as_str());
    Some(normalized)
}

/// Links and categories found in one page's text, in source order.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub wikilinks: Vec<String>,
    pub categories: Vec<String>,
}

/// Scans `text` for `[[...]]` constructs.
///
/// An unterminated `[[` ends the scan. When another `[[` opens before the
/// current one closes (image captions), the outer construct is abandoned and
/// scanning resumes at the inner one.
pub fn extract(text: &str) -> Extracted {
    let mut out = Extracted::default();
    let mut rest = text;
    while let Some(open) = rest.find("[[") {
        let body = &rest[open + 2..];
        let Some(close) = body.find("]]") else {
            break;
        };
        if let Some(nested) = body[..close].find("[[") {
            rest = &body[nested..];
            continue;
        }
        classify(&body[..close], &mut out);
        rest = &body[close + 2..];
    }
    out
}

fn classify(inner: &str, out: &mut Extracted) {
    let target = inner.split('|').next().unwrap_or_default().trim();
    if let Some(escaped) = target.strip_prefix(':') {
        push_link(escaped, out);
        return;
    }
    if let Some((prefix, name)) = target.split_once(':') {
        if prefix.trim().eq_ignore_ascii_case("category") {
            if let Some(name) = normalize_title(name) {
                out.categories.push(name);
            }
            return;
        }
    }
    push_link(target, out);
}

fn push_link(target: &str, out: &mut Extracted) {
    let target = target.split('#').next().unwrap_or_default();
    if let Some(title) = normalize_title(target) {
        out.wikilinks.push(title);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_piped_links() {
        let e = extract("[[Hadrian]] fought [[Nero|the emperor]]");
        assert_eq!(e.wikilinks, ["Hadrian", "Nero"]);
        assert!(e.categories.is_empty());
    }

    #[test]
    fn categories_are_not_links() {
        let e = extract("[[Category:46 births]][[Category:120 deaths]]");
        assert_eq!(e.categories, ["46 births", "120 deaths"]);
        assert!(e.wikilinks.is_empty());
    }

    #[test]
    fn anchors_and_case() {
        let e = extract("[[plutarch#Life|P]] [[#Section]] [[ marcus_aurelius ]]");
        assert_eq!(e.wikilinks, ["Plutarch", "Marcus aurelius"]);
    }

    #[test]
    fn category_sort_key_and_escaped_category() {
        let e = extract("[[category: 100 BC births|Caesar]] [[:Category:Romans]]");
        assert_eq!(e.categories, ["100 BC births"]);
        assert_eq!(e.wikilinks, ["Category:Romans"]);
    }

    #[test]
    fn nested_caption_links() {
        let e = extract("[[File:Bust.jpg|thumb|Bust of [[Nero]]]] and [[Seneca");
        assert_eq!(e.wikilinks, ["Nero"]);
    }

    #[test]
    fn normalize_rejects_blank() {
        assert_eq!(normalize_title("  _ "), None);
        assert_eq!(
            normalize_title("élise_reclus").as_deref(),
            Some("Élise reclus")
        );
    }
}
