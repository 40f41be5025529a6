//! Property normalization used for structural equality and template plurals.
//!
//! Entity, attribute and unit values are lowercased, whitespace-collapsed and
//! have their last word naively singularized. Labels are lowercased and
//! whitespace-collapsed only, so `friends` and `friend` stay distinct.

/// Pluggable normalization applied before properties are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Normalizer {
    pub lowercase: bool,
    pub singularize: bool,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer {
            lowercase: true,
            singularize: true,
        }
    }
}

impl Normalizer {
    /// Exact comparison: whitespace collapse only.
    pub const EXACT: Normalizer = Normalizer {
        lowercase: false,
        singularize: false,
    };

    pub fn label(&self, text: &str) -> String {
        let collapsed = collapse_whitespace(text);
        if self.lowercase {
            collapsed.to_lowercase()
        } else {
            collapsed
        }
    }

    /// Normalizes an entity, attribute or unit.
    pub fn term(&self, text: &str) -> String {
        let base = self.label(text);
        if self.singularize {
            map_last_word(&base, singularize_word)
        } else {
            base
        }
    }
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn map_last_word(text: &str, f: impl Fn(&str) -> String) -> String {
    match text.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", f(last)),
        None => f(text),
    }
}

/// Naive English singularization of one word.
pub fn singularize_word(word: &str) -> String {
    let lower = word.to_ascii_lowercase();
    if lower.len() < 2 {
        return word.to_string();
    }
    if lower.len() > 3 && lower.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    for suffix in ["sses", "shes", "ches", "xes", "zes"] {
        if lower.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if lower.ends_with("ss") || lower.ends_with("us") || lower.ends_with("is") {
        return word.to_string();
    }
    match lower.strip_suffix('s') {
        Some(_) => word[..word.len() - 1].to_string(),
        None => word.to_string(),
    }
}

fn is_plural_word(word: &str) -> bool {
    singularize_word(word) != word
}

/// Pluralizes the last word of a phrase; already-plural words are kept.
pub fn pluralize(text: &str) -> String {
    map_last_word(&collapse_whitespace(text), |w| {
        if is_plural_word(w) {
            return w.to_string();
        }
        let lower = w.to_ascii_lowercase();
        let consonant_y = lower.len() > 1
            && lower.ends_with('y')
            && !matches!(lower.as_bytes()[lower.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u');
        if consonant_y {
            format!("{}ies", &w[..w.len() - 1])
        } else if ["s", "x", "z", "ch", "sh", "u", "i"].iter().any(|s| lower.ends_with(s)) {
            format!("{w}es")
        } else {
            format!("{w}s")
        }
    })
}
