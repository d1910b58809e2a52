use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Reduces an element name to the form used for all comparisons.
///
/// Lowercases, rewrites `&` as the word `and`, collapses runs of whitespace
/// and strips punctuation from both ends. The function is idempotent.
///
/// ```
/// use ncai_core::canonical_name;
/// assert_eq!(canonical_name("Documenting & Sharing"), "documenting and sharing");
/// assert_eq!(canonical_name("  Rule of   Thumb. "), "rule of thumb");
/// ```
pub fn canonical_name(raw: &str) -> String {
    let lowered = raw.to_lowercase().replace('&', " and ");
    let mut out = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let trimmed = out
            .trim_matches(|c: char| c.is_whitespace() || is_edge_punctuation(c))
            .to_string();
        if trimmed == out {
            return out;
        }
        out = trimmed;
    }
}

fn is_edge_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// An element name: the surface form as written plus its canonical key.
///
/// Equality, ordering and hashing use the canonical key only, so
/// `Documenting & Sharing` and `documenting and sharing` are the same name.
#[derive(Clone, Serialize, Deserialize)]
pub struct Name {
    #[serde(rename = "surface_name")]
    surface: String,
    #[serde(rename = "canonical_name")]
    canonical: String,
}

impl Name {
    pub fn new(surface: &str) -> Self {
        let surface = surface.split_whitespace().collect::<Vec<_>>().join(" ");
        let canonical = canonical_name(&surface);
        Self { surface, canonical }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn matches(&self, raw: &str) -> bool {
        self.canonical == canonical_name(raw)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state);
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.surface)
    }
}
