use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Label, TaskFraming, TokenLogprob};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerdictError {
    #[error("no JSON object in reply")]
    NoObject,
    #[error("missing or mistyped field {0:?}")]
    MissingField(&'static str),
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("label {0:?} is not a class of this task")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedVerdict {
    pub label: Label,
    pub confidence: f64,
    pub reasoning: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    Logprob,
    ConfidenceFallback,
}

/// Outcome of one protocol run on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// `None` when the reply could not be parsed even after the repair turn.
    pub label: Option<Label>,
    pub confidence: Option<f64>,
    pub reasoning: Option<String>,
    pub score_danger: f64,
    pub score_source: ScoreSource,
    pub latency_s: f64,
    pub raw_response: String,
    pub parse_error: Option<String>,
}

/// Byte ranges of balanced `{...}` spans, in order of their opening brace.
fn balanced_objects(text: &str) -> impl Iterator<Item = &str> {
    let bytes = text.as_bytes();
    (0..bytes.len()).filter(move |&i| bytes[i] == b'{').filter_map(move |start| {
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (j, &b) in bytes.iter().enumerate().skip(start) {
            if in_str {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(&text[start..=j]);
                    }
                }
                _ => {}
            }
        }
        None
    })
}

fn normalise_label(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c == '<' || c == '>' || c == '"' || c == '\'' || c.is_whitespace())
        .to_ascii_lowercase()
}

/// Pull `{label, confidence, reasoning}` out of a reply, tolerating prose
/// or code fences around the first JSON object.
pub fn extract_verdict(text: &str, framing: TaskFraming) -> Result<ParsedVerdict, VerdictError> {
    let obj = balanced_objects(text)
        .find_map(|s| match serde_json::from_str::<Value>(s) {
            Ok(Value::Object(m)) => Some(m),
            _ => None,
        })
        .ok_or(VerdictError::NoObject)?;
    let raw_label = obj
        .get("label")
        .and_then(Value::as_str)
        .ok_or(VerdictError::MissingField("label"))?;
    let norm = normalise_label(raw_label);
    let label = framing
        .classes()
        .iter()
        .copied()
        .find(|c| c.as_str() == norm)
        .ok_or_else(|| VerdictError::UnknownLabel(raw_label.to_string()))?;
    let confidence = match obj.get("confidence") {
        Some(Value::Number(n)) => n.as_f64(),
        Some(Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    }
    .ok_or(VerdictError::MissingField("confidence"))?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(VerdictError::ConfidenceOutOfRange(confidence));
    }
    let reasoning = obj
        .get("reasoning")
        .and_then(Value::as_str)
        .ok_or(VerdictError::MissingField("reasoning"))?
        .to_string();
    Ok(ParsedVerdict {
        label,
        confidence,
        reasoning,
    })
}

/// Position in the reconstructed completion where the label value starts.
fn label_value_offset(text: &str) -> Option<usize> {
    let key = text.find("\"label\"")?;
    let rest = &text[key + 7..];
    let colon = rest.find(':')?;
    let after = &rest[colon + 1..];
    let skipped = after.len() - after.trim_start_matches([' ', '\t', '\n', '\r', '"']).len();
    Some(key + 7 + colon + 1 + skipped)
}

/// Probability of the positive (non-nominal) classes read from the token
/// alternatives at the label position, renormalised over the task's classes.
fn logprob_score(tokens: &[TokenLogprob], framing: TaskFraming) -> Option<f64> {
    let text: String = tokens.iter().map(|t| t.token.as_str()).collect();
    let target = label_value_offset(&text)?;
    let mut pos = 0;
    let tok = tokens.iter().find(|t| {
        let end = pos + t.token.len();
        let hit = target >= pos && target < end;
        pos = end;
        hit
    })?;
    let mut mass = vec![0.0; framing.classes().len()];
    let mut seen = std::collections::HashSet::new();
    let own = (tok.token.clone(), tok.logprob);
    let alts = tok.top.iter().chain(std::iter::once(&own));
    for (alt, lp) in alts {
        let norm = normalise_label(alt);
        if norm.is_empty() || !seen.insert(alt.clone()) {
            continue;
        }
        for (k, c) in framing.classes().iter().enumerate() {
            if c.as_str().starts_with(&norm) {
                mass[k] += lp.exp();
                break;
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let danger: f64 = framing
        .classes()
        .iter()
        .zip(&mass)
        .filter(|(c, _)| c.is_danger())
        .map(|(_, m)| m)
        .sum();
    Some((danger / total).clamp(0.0, 1.0))
}

/// Danger score for ranking metrics. Uses token log-probabilities when
/// available and usable, otherwise the stated confidence: `confidence`
/// for a positive label and `1 - confidence` for nominal.
pub fn capture_score(
    verdict: &ParsedVerdict,
    logprobs: Option<&[TokenLogprob]>,
    framing: TaskFraming,
) -> (f64, ScoreSource) {
    if let Some(s) = logprobs.and_then(|t| logprob_score(t, framing)) {
        return (s, ScoreSource::Logprob);
    }
    let c = verdict.confidence.clamp(0.0, 1.0);
    let s = if verdict.label.is_danger() { c } else { 1.0 - c };
    (s, ScoreSource::ConfidenceFallback)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(label: Label, confidence: f64) -> ParsedVerdict {
        ParsedVerdict { label, confidence, reasoning: String::new() }
    }

    #[test]
    fn plain_object() {
        let v = extract_verdict(r#"{"label":"danger","confidence":0.92,"reasoning":"two on final"}"#, TaskFraming::Binary).unwrap();
        assert_eq!(v.label, Label::Danger);
        assert_eq!(v.confidence, 0.92);
    }

    #[test]
    fn prose_and_fences_around_object() {
        let text = "Sure! Here is my answer:\n```json\n{\"label\": \"Nominal\", \"confidence\": 0.8, \"reasoning\": \"all {calls} present\"}\n```";
        let v = extract_verdict(text, TaskFraming::Binary).unwrap();
        assert_eq!(v.label, Label::Nominal);
        assert_eq!(v.reasoning, "all {calls} present");
    }

    #[test]
    fn failures() {
        let f = TaskFraming::Binary;
        assert_eq!(extract_verdict("no json here", f), Err(VerdictError::NoObject));
        assert!(matches!(
            extract_verdict(r#"{"label":"maybe","confidence":0.5,"reasoning":"x"}"#, f),
            Err(VerdictError::UnknownLabel(_))
        ));
        assert!(matches!(
            extract_verdict(r#"{"label":"hazard","confidence":0.5,"reasoning":"x"}"#, f),
            Err(VerdictError::UnknownLabel(_))
        ));
        assert_eq!(
            extract_verdict(r#"{"label":"danger","confidence":1.5,"reasoning":"x"}"#, f),
            Err(VerdictError::ConfidenceOutOfRange(1.5))
        );
        assert_eq!(
            extract_verdict(r#"{"label":"danger","reasoning":"x"}"#, f),
            Err(VerdictError::MissingField("confidence"))
        );
    }

    #[test]
    fn fallback_scores() {
        let f = TaskFraming::Binary;
        assert!((capture_score(&pv(Label::Nominal, 0.9), None, f).0 - 0.1).abs() < 1e-12);
        assert_eq!(capture_score(&pv(Label::Danger, 0.9), None, f), (0.9, ScoreSource::ConfidenceFallback));
    }

    fn tok(t: &str, top: &[(&str, f64)]) -> TokenLogprob {
        TokenLogprob {
            token: t.into(),
            logprob: top.first().map_or(0.0, |x| x.1),
            top: top.iter().map(|(a, b)| (a.to_string(), *b)).collect(),
        }
    }

    #[test]
    fn logprob_mass_is_renormalised() {
        let toks = vec![
            tok("{\"label\": \"", &[]),
            tok("danger", &[("danger", 0.8f64.ln()), ("nominal", 0.15f64.ln()), ("{", 0.05f64.ln())]),
            tok("\", \"confidence\": 0.9}", &[]),
        ];
        let (s, src) = capture_score(&pv(Label::Danger, 0.9), Some(&toks), TaskFraming::Binary);
        assert_eq!(src, ScoreSource::Logprob);
        assert!((s - 0.8 / 0.95).abs() < 1e-12, "{s}");
        // Split tokens: "d" + "anger" counts by prefix.
        let toks = vec![
            tok("{\"label\":\"", &[]),
            tok("d", &[("d", 0.8f64.ln()), ("nom", 0.2f64.ln())]),
            tok("anger\"}", &[]),
        ];
        let (s, _) = capture_score(&pv(Label::Danger, 0.5), Some(&toks), TaskFraming::Binary);
        assert!((s - 0.8).abs() < 1e-12);
    }

    #[test]
    fn three_class_danger_mass_sums_positive_classes() {
        let toks = vec![
            tok("{\"label\": \"", &[]),
            tok("warning", &[("warning", 0.5f64.ln()), ("hazard", 0.3f64.ln()), ("nominal", 0.2f64.ln())]),
        ];
        let (s, _) = capture_score(&pv(Label::Warning, 0.5), Some(&toks), TaskFraming::ThreeClass);
        assert!((s - 0.8).abs() < 1e-12);
    }
}
