//! Regulatory-subject normalization vocabulary.
//!
//! Rule subjects and the subjects identified in a submission are mapped onto
//! a small shared label set so that graph matching is exact. Unknown
//! subjects keep their (normalized) raw text as the label.

use crate::text;

/// The normalized subject labels the matcher operates on.
pub const SUBJECT_VOCABULARY: [&str; 6] = [
    "investigator",
    "institution",
    "participant",
    "data_controller",
    "sponsor",
    "committee",
];

/// Map a raw subject phrase to its normalized label.
pub fn normalize_subject(raw: &str) -> String {
    let norm = text::normalize(raw);
    let label = match norm.as_str() {
        "investigator" | "investigators" | "researcher" | "researchers"
        | "principal investigator" | "principal investigators" | "pi" | "study team"
        | "research team" => "investigator",
        "institution" | "institutions" | "organization" | "organizations"
        | "research institution" | "research institutions" | "host institution" => "institution",
        "participant" | "participants" | "subject" | "subjects" | "research participant"
        | "research participants" | "human subject" | "human subjects" | "volunteer"
        | "volunteers" => "participant",
        "data controller" | "data controllers" | "data processor" | "data processors"
        | "data custodian" | "data custodians" | "data manager" | "data managers" => {
            "data_controller"
        }
        "sponsor" | "sponsors" | "funder" | "funders" | "funding agency" => "sponsor",
        "committee" | "committees" | "ethics committee" | "ethics committees"
        | "review board" | "institutional review board" | "irb" | "ethics review committee"
        | "review committee" => "committee",
        other => other,
    };
    label.replace(' ', "_")
}

/// Whether the label is one of the six vocabulary entries.
pub fn is_vocabulary_label(label: &str) -> bool {
    SUBJECT_VOCABULARY.contains(&label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_synonyms_collapse() {
        assert_eq!(normalize_subject("Principal Investigator"), "investigator");
        assert_eq!(normalize_subject("IRB"), "committee");
        assert_eq!(normalize_subject("Data Controller"), "data_controller");
    }

    #[test]
    fn test_unknown_subject_keeps_raw_text() {
        assert_eq!(normalize_subject("Community Advisory Board"), "community_advisory_board");
        assert!(!is_vocabulary_label("community_advisory_board"));
    }
}
