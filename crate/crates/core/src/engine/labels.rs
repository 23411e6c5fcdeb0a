//! Reading labels, numbers and confidences out of free-text replies.

use regex::Regex;

/// Labels ordered longest first, so that `NF` is tried before `F`.
fn by_length(labels: &[String]) -> Vec<&String> {
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort_by_key(|l| std::cmp::Reverse(l.len()));
    sorted
}

fn alternation(labels: &[String]) -> String {
    by_length(labels)
        .into_iter()
        .map(|l| regex::escape(l))
        .collect::<Vec<_>>()
        .join("|")
}

fn canonical<'a>(labels: &'a [String], found: &str) -> Option<&'a String> {
    labels.iter().find(|l| l.eq_ignore_ascii_case(found))
}

/// Label following the last case-insensitive `marker` (e.g. `CLASSIFICATION:`).
pub fn marked_label<'a>(text: &str, marker: &str, labels: &'a [String]) -> Option<&'a String> {
    if labels.is_empty() {
        return None;
    }
    let pattern = format!(r"(?i){}[\s*_]*\(?({})\b", regex::escape(marker), alternation(labels));
    let re = Regex::new(&pattern).expect("escaped label pattern");
    re.captures_iter(text)
        .last()
        .and_then(|c| canonical(labels, c.get(1)?.as_str()))
}

/// Standalone, case-sensitive label token. Longer labels are checked first
/// and win outright, so a reply mentioning only `NF` never yields `F`.
pub fn standalone_label<'a>(text: &str, labels: &'a [String]) -> Option<&'a String> {
    by_length(labels).into_iter().find(|label| {
        let re = Regex::new(&format!(r"\b{}\b", regex::escape(label))).expect("escaped label");
        re.is_match(text)
    })
}

/// Marker first, then the standalone-token fallback.
pub fn find_label<'a>(text: &str, marker: &str, labels: &'a [String]) -> Option<&'a String> {
    marked_label(text, marker, labels).or_else(|| standalone_label(text, labels))
}

fn marked_number(text: &str, marker: &str) -> Option<f64> {
    let re = Regex::new(&format!(
        r"(?i){}[\s*_]*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)",
        regex::escape(marker)
    ))
    .expect("number pattern");
    re.captures_iter(text)
        .last()
        .and_then(|c| c.get(1)?.as_str().parse().ok())
        .filter(|v: &f64| v.is_finite())
}

/// Number after the last `ANSWER:` marker.
pub fn answer_number(text: &str) -> Option<f64> {
    marked_number(text, ANSWER_MARKER)
}

/// Value after the last `CONFIDENCE:` marker, clamped to `[0, 1]`.
pub fn confidence(text: &str) -> Option<f64> {
    marked_number(text, CONFIDENCE_MARKER).map(|c| c.clamp(0.0, 1.0))
}

pub const ANSWER_MARKER: &str = "ANSWER:";
pub const CONFIDENCE_MARKER: &str = "CONFIDENCE:";
pub const CLASSIFICATION_MARKER: &str = "CLASSIFICATION:";

#[cfg(test)]
mod tests {
    use super::*;

    fn fnf() -> Vec<String> {
        vec!["F".into(), "NF".into()]
    }

    #[test]
    fn marker_is_case_insensitive_and_last_wins() {
        let l = fnf();
        assert_eq!(
            marked_label("CLASSIFICATION: F ... CLASSIFICATION: NF", "CLASSIFICATION:", &l).unwrap(),
            "NF"
        );
        assert_eq!(marked_label("classification: f", "CLASSIFICATION:", &l).unwrap(), "F");
        assert_eq!(
            marked_label("**CLASSIFICATION:** (NF)", "CLASSIFICATION:", &l).unwrap(),
            "NF"
        );
        assert_eq!(marked_label("CLASSIFICATION: FOO", "CLASSIFICATION:", &l), None);
    }

    #[test]
    fn standalone_prefers_longer_labels() {
        let l = fnf();
        assert_eq!(standalone_label("non-functional (NF).", &l).unwrap(), "NF");
        assert_eq!(standalone_label("It is F, not NF", &l).unwrap(), "NF");
        assert_eq!(standalone_label("It is F.", &l).unwrap(), "F");
        assert_eq!(standalone_label("NFR and FOO", &l), None);
        assert_eq!(standalone_label("nf", &l), None);
    }

    #[test]
    fn numbers_and_confidence() {
        assert_eq!(answer_number("I think... ANSWER: 4.5"), Some(4.5));
        assert_eq!(answer_number("answer: -3"), Some(-3.0));
        assert_eq!(answer_number("no number"), None);
        assert_eq!(confidence("CONFIDENCE: 0.85"), Some(0.85));
        assert_eq!(confidence("confidence: 1.7"), Some(1.0));
        assert_eq!(confidence("CONFIDENCE: .5\nANSWER: F"), Some(0.5));
    }
}
