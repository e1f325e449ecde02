//! Small text utilities: normalization, tokenization and n-grams.
//!
//! Every matching/filtering decision in the engine that compares free text
//! goes through the same normalization (lowercase, punctuation stripped,
//! whitespace collapsed) so that results are reproducible.

use std::collections::BTreeSet;

/// Lowercase, strip punctuation, collapse whitespace.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for low in ch.to_lowercase() {
                out.push(low);
            }
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Collapse runs of whitespace into single spaces and trim.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// Distinct word n-grams of the normalized text, joined by single spaces.
pub fn word_ngrams(text: &str, n: usize) -> BTreeSet<String> {
    let tokens = tokenize(text);
    if n == 0 || tokens.len() < n {
        return BTreeSet::new();
    }
    tokens.windows(n).map(|w| w.join(" ")).collect()
}

/// Character trigrams of the normalized text. Texts shorter than three
/// characters contribute themselves as a single gram.
pub fn char_trigrams(text: &str) -> Vec<String> {
    let norm = normalize(text);
    let chars: Vec<char> = norm.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    if chars.len() < 3 {
        return vec![norm];
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Distinct lowercased tokens, for overlap scoring.
pub fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_normalize_strips_punctuation_and_case() {
        assert_eq!(normalize("The PI, must—obtain   consent!"), "the pi must obtain consent");
    }

    #[test]
    fn test_word_ngrams_short_text_is_empty() {
        assert!(word_ngrams("one two three", 8).is_empty());
    }

    #[test]
    fn test_word_ngrams_counts() {
        let grams = word_ngrams("a b c d", 2);
        assert_eq!(grams.len(), 3);
        assert!(grams.contains("b c"));
    }

    #[test]
    fn test_char_trigrams_short_input() {
        assert_eq!(char_trigrams("ab"), vec!["ab".to_string()]);
        assert!(char_trigrams("   ").is_empty());
    }
}
