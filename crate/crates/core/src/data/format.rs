use super::QAPair;

/// Separator token of the bundled tokenizer; encoders may substitute their own.
pub const DEFAULT_SEPARATOR: &str = "[SEP]";

/// Trim and collapse internal whitespace runs to a single space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Render a record as `Question: {q} {separator} Answer: {a}`.
///
/// Only whitespace is normalized; case and punctuation pass through, as does
/// any separator-like text inside the question or answer.
pub fn format_input(p: &QAPair, separator: &str) -> String {
    format!(
        "Question: {} {} Answer: {}",
        normalize_whitespace(&p.question),
        separator.trim(),
        normalize_whitespace(&p.answer)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(q: &str, a: &str) -> QAPair {
        QAPair::new("x", q, a).unwrap()
    }

    #[test]
    fn formats_reference_example() {
        let p = pair(
            "Will you increase funding for education?",
            "I cannot comment on budget discussions at this time.",
        );
        assert_eq!(
            format_input(&p, DEFAULT_SEPARATOR),
            "Question: Will you increase funding for education? [SEP] Answer: I cannot comment on budget discussions at this time."
        );
    }

    #[test]
    fn trims_and_collapses_whitespace() {
        let p = pair("  Will   you\tact? ", "\nYes.  ");
        assert_eq!(format_input(&p, "[SEP]"), "Question: Will you act? [SEP] Answer: Yes.");
    }

    #[test]
    fn literal_separator_in_question_is_kept() {
        let p = pair("What does [SEP] mean?", "A token.");
        let expected = format!("Question: {} {} Answer: {}", "What does [SEP] mean?", "[SEP]", "A token.");
        assert_eq!(format_input(&p, "[SEP]"), expected);
    }

    #[test]
    fn substitutes_encoder_separator() {
        let p = pair("Q?", "A.");
        assert_eq!(format_input(&p, "</s>"), "Question: Q? </s> Answer: A.");
    }

    proptest! {
        #[test]
        fn idempotent_normalization(q in "[a-zA-Z?]{1,8}( {1,3}[a-zA-Z?]{1,8}){0,4}", a in "[a-zA-Z.]{1,8}( {1,3}[a-zA-Z.]{1,8}){0,4}") {
            let once = pair(&q, &a);
            let twice = pair(&normalize_whitespace(&q), &normalize_whitespace(&a));
            prop_assert_eq!(format_input(&once, "[SEP]"), format_input(&twice, "[SEP]"));
        }

        #[test]
        fn injective_on_distinct_pairs(
            q1 in "[a-z?]{1,6}( [a-z?]{1,6}){0,3}", a1 in "[a-z.]{1,6}( [a-z.]{1,6}){0,3}",
            q2 in "[a-z?]{1,6}( [a-z?]{1,6}){0,3}", a2 in "[a-z.]{1,6}( [a-z.]{1,6}){0,3}",
        ) {
            prop_assume!((q1.as_str(), a1.as_str()) != (q2.as_str(), a2.as_str()));
            prop_assert_ne!(format_input(&pair(&q1, &a1), "[SEP]"), format_input(&pair(&q2, &a2), "[SEP]"));
        }
    }
}
