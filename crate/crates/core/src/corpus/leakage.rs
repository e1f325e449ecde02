//! Answer-leakage detection for generated reasoning traces.

use crate::error::{Error, Result};
use crate::text;

/// Default n for the word-n-gram overlap branch.
pub const LEAKAGE_NGRAM: usize = 8;

/// True iff the rationale leaks the answer: the normalized answer appears as
/// a substring of the normalized rationale, or the two share at least one
/// word-8-gram. Normalization is lowercase, punctuation stripped, whitespace
/// collapsed.
pub fn detect_leakage(cot: &str, answer: &str) -> Result<bool> {
    detect_leakage_with(cot, answer, LEAKAGE_NGRAM)
}

/// [`detect_leakage`] with a configurable n-gram length.
pub fn detect_leakage_with(cot: &str, answer: &str, ngram: usize) -> Result<bool> {
    if cot.trim().is_empty() {
        return Err(Error::BlankInput("leakage check: empty rationale".into()));
    }
    if answer.trim().is_empty() {
        return Err(Error::BlankInput("leakage check: empty answer".into()));
    }
    let cot_norm = text::normalize(cot);
    let answer_norm = text::normalize(answer);
    if cot_norm.contains(&answer_norm) {
        return Ok(true);
    }
    let cot_grams = text::word_ngrams(cot, ngram);
    let answer_grams = text::word_ngrams(answer, ngram);
    Ok(cot_grams.intersection(&answer_grams).next().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_verbatim_answer_leaks() {
        let answer = "The committee must reapprove the protocol annually.";
        let cot = format!("First consider the rules. {answer} Therefore the study continues.");
        assert!(detect_leakage(&cot, answer).unwrap());
    }

    #[test]
    fn test_short_answer_embedded_leaks_via_substring() {
        // 3 words: too short for the 8-gram branch, caught by containment.
        assert!(detect_leakage("the investigator must obtain consent forms first", "must obtain consent").unwrap());
    }

    #[test]
    fn test_disjoint_texts_do_not_leak() {
        // Zero shared 8-grams, verified by the independent builder below.
        let cot = "reason step by step about beneficence";
        let answer = "the committee must reapprove annually";
        assert_eq!(shared_ngrams(cot, answer, 8), 0);
        assert!(!detect_leakage(cot, answer).unwrap());
    }

    #[test]
    fn test_punctuation_and_case_ignored() {
        assert!(detect_leakage(
            "Consent -- WRITTEN consent! -- is required.",
            "written consent"
        )
        .unwrap());
    }

    #[test]
    fn test_empty_inputs_error() {
        assert!(detect_leakage("", "answer").is_err());
        assert!(detect_leakage("cot", "  ").is_err());
    }

    // Independent n-gram overlap counter: splits on ASCII non-alphanumerics
    // by hand rather than reusing the crate's text helpers.
    fn shared_ngrams(a: &str, b: &str, n: usize) -> usize {
        fn grams(s: &str, n: usize) -> std::collections::HashSet<Vec<String>> {
            let tokens: Vec<String> = s
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
                .map(|t| t.to_lowercase())
                .collect();
            if tokens.len() < n {
                return Default::default();
            }
            tokens.windows(n).map(|w| w.to_vec()).collect()
        }
        grams(a, n).intersection(&grams(b, n)).count()
    }

    #[test]
    fn test_long_shared_run_leaks_via_ngrams() {
        let run = "participants must be informed of every foreseeable risk before enrollment begins";
        let cot = format!("Reasoning: {run} and more discussion follows");
        let answer = format!("In short, {run}.");
        assert!(shared_ngrams(&cot, &answer, 8) > 0);
        assert!(detect_leakage(&cot, &answer).unwrap());
    }
}
