use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// The built-in English stopword list (127 words).
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into", "through",
    "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
    "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how",
    "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "should",
    "now",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemmatizer {
    /// Suffix rules for plurals, -ing, -ed and -ation, with silent-e
    /// restoration after consonant-vowel-consonant stems.
    #[default]
    SuffixRules,
    /// Plural stripping only.
    Plurals,
    None,
}

impl Lemmatizer {
    pub fn apply(self, token: &str) -> String {
        match self {
            Lemmatizer::SuffixRules => suffix_lemma(token),
            Lemmatizer::Plurals => plural_lemma(token),
            Lemmatizer::None => token.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub stopwords: BTreeSet<String>,
    pub lemmatizer: Lemmatizer,
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            lemmatizer: Lemmatizer::SuffixRules,
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

impl NormalizationConfig {
    /// Lowercasing and punctuation stripping only.
    pub fn minimal() -> Self {
        Self { stopwords: BTreeSet::new(), lemmatizer: Lemmatizer::None, ..Self::default() }
    }

    /// Replaces the stopword list with the words of `text`, one per line
    /// (blank lines and `#` comments ignored).
    pub fn with_stopword_file(mut self, text: &str) -> Self {
        self.stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        self
    }
}

/// Splits text into lowercase word tokens: `&` becomes `and`, every other
/// non-alphanumeric character separates words.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace('&', " and ")
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Lowercase, strip punctuation (`&` read as "and"), split on whitespace,
/// drop stopwords, lemmatize.
pub fn normalize_tokens(text: &str, config: &NormalizationConfig) -> Vec<String> {
    word_tokens(text)
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .map(|t| config.lemmatizer.apply(&t))
        .collect()
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(is_vowel)
}

// Undoubles a final consonant ("plann" -> "plan") or restores a silent e
// after endings English words do not end in ("evolv", "emerg") or after a
// consonant-vowel-consonant ending ("refin" -> "refine").
fn restore(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if n >= 2 && (matches!(b[n - 1], b'v' | b'c' | b'u' | b'z') || (b[n - 1] == b'g' && matches!(b[n - 2], b'r' | b'd' | b'l'))) {
        return format!("{stem}e");
    }
    if n >= 3 && !is_vowel(b[n - 3]) && is_vowel(b[n - 2]) && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'w' | b'x' | b'y')
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn plural_lemma(token: &str) -> String {
    if token.len() <= 3 || !token.bytes().all(|c| c.is_ascii_lowercase()) {
        return token.to_string();
    }
    let mut w = token.to_string();

    if w.ends_with("sses") {
        w.truncate(w.len() - 2);
    } else if w.ends_with("ies") && w.len() > 4 {
        w.truncate(w.len() - 3);
        w.push('y');
    } else if w.ends_with("es")
        && w.len() > 4
        && ["s", "x", "z", "ch", "sh"].iter().any(|s| w[..w.len() - 2].ends_with(s))
    {
        w.truncate(w.len() - 2);
    } else if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
        w.truncate(w.len() - 1);
    }
    w
}

fn suffix_lemma(token: &str) -> String {
    if token.len() <= 3 || !token.bytes().all(|c| c.is_ascii_lowercase()) {
        return token.to_string();
    }
    let w = plural_lemma(token);

    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return restore(stem);
        }
    } else if let Some(stem) = w.strip_suffix("ied") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    } else if w.ends_with("eed") {
        return w;
    } else if let Some(stem) = w.strip_suffix("ed") {
        if stem.len() >= 3 && has_vowel(stem) {
            return restore(stem);
        }
    } else if let Some(stem) = w.strip_suffix("ization") {
        return format!("{stem}ize");
    } else if let Some(stem) = w.strip_suffix("ation") {
        if stem.len() >= 3 {
            return format!("{stem}ate");
        }
    }
    w
}
