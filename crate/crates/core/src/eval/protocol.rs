use serde::{Deserialize, Serialize};

use super::prompts::{COT_ELICITATION, COT_EXTRACTION, REPAIR_PROMPT};
use super::{
    assemble_prompt, capture_score, complete, extract_verdict, ChatBackend, ChatMessage,
    ChatRequest, Completion, EvalError, Protocol, Purpose, RequestMeta, RetryPolicy, ScoreSource,
    Strategy, TaskFraming, Verdict,
};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub temperature: f32,
    pub direct_max_tokens: u32,
    pub cot_max_tokens: u32,
    /// One extra turn asking for bare JSON when the reply does not parse.
    pub repair: bool,
    #[serde(skip)]
    pub retry: RetryPolicy,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            temperature: 0.0,
            direct_max_tokens: 512,
            cot_max_tokens: 1024,
            repair: true,
            retry: RetryPolicy::default(),
        }
    }
}

struct Session<'a> {
    backend: &'a dyn ChatBackend,
    settings: &'a EvalSettings,
    scenario_id: String,
    framing: TaskFraming,
    latency_s: f64,
}

impl Session<'_> {
    fn ask(&mut self, messages: &[ChatMessage], max_tokens: u32, purpose: Purpose) -> Result<Completion, EvalError> {
        let req = ChatRequest {
            messages: messages.to_vec(),
            temperature: self.settings.temperature,
            max_tokens,
            want_logprobs: self.backend.supports_logprobs() && purpose != Purpose::CotReasoning,
            meta: RequestMeta {
                scenario_id: Some(self.scenario_id.clone()),
                framing: Some(self.framing),
                purpose,
            },
        };
        let c = complete(self.backend, &req, &self.settings.retry)?;
        self.latency_s += c.latency_s;
        Ok(c)
    }
}

/// Query one scenario under one condition. Transport and endpoint errors
/// propagate; an unparseable reply yields a verdict with no label and a
/// neutral 0.5 score.
pub fn run_protocol(
    backend: &dyn ChatBackend,
    framing: TaskFraming,
    strategy: Strategy,
    protocol: Protocol,
    scenario: &Scenario,
    icl_pool: &[Scenario],
    settings: &EvalSettings,
) -> Result<Verdict, EvalError> {
    let mut messages = assemble_prompt(framing, strategy, scenario, icl_pool)?;
    let mut s = Session {
        backend,
        settings,
        scenario_id: scenario.id.clone(),
        framing,
        latency_s: 0.0,
    };
    let mut reply = match protocol {
        Protocol::Direct => s.ask(&messages, settings.direct_max_tokens, Purpose::Verdict)?,
        Protocol::Cot => {
            let last = messages.last_mut().expect("prompt ends with the target");
            last.content = format!("{}\n\n{COT_ELICITATION}", last.content);
            let reasoning = s.ask(&messages, settings.cot_max_tokens, Purpose::CotReasoning)?;
            messages.push(ChatMessage::assistant(reasoning.text));
            messages.push(ChatMessage::user(COT_EXTRACTION));
            s.ask(&messages, settings.direct_max_tokens, Purpose::CotExtraction)?
        }
    };
    let mut parsed = extract_verdict(&reply.text, framing);
    if parsed.is_err() && settings.repair {
        messages.push(ChatMessage::assistant(reply.text.clone()));
        messages.push(ChatMessage::user(REPAIR_PROMPT));
        let second = s.ask(&messages, settings.direct_max_tokens, Purpose::Repair)?;
        let again = extract_verdict(&second.text, framing);
        if again.is_ok() {
            parsed = again;
        }
        // Keep both replies for auditing; logprobs come from the repair turn.
        reply = Completion {
            text: format!("{}\n\n{}", reply.text, second.text),
            ..second
        };
    }
    Ok(match parsed {
        Ok(v) => {
            let lp = reply.logprobs.as_deref().filter(|_| backend.supports_logprobs());
            let (score, source) = capture_score(&v, lp, framing);
            Verdict {
                label: Some(v.label),
                confidence: Some(v.confidence),
                reasoning: Some(v.reasoning),
                score_danger: score,
                score_source: source,
                latency_s: s.latency_s,
                raw_response: reply.text,
                parse_error: None,
            }
        }
        Err(e) => Verdict {
            label: None,
            confidence: None,
            reasoning: None,
            score_danger: 0.5,
            score_source: ScoreSource::ConfidenceFallback,
            latency_s: s.latency_s,
            raw_response: reply.text,
            parse_error: Some(e.to_string()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Label, RawCompletion, ScriptedMock};
    use crate::scenario::{build_dataset, ClassTargets, GenConfig, Split, SynthBackend};

    fn data() -> (Vec<Scenario>, Scenario) {
        let cfg = GenConfig {
            targets: ClassTargets { nominal: 3, warning: 3, hazard: 3 },
            ..GenConfig::default()
        };
        let all = build_dataset(&cfg, &SynthBackend::Template).unwrap().scenarios;
        let pool = all.iter().filter(|s| s.split == Split::Icl).cloned().collect();
        let target = all.into_iter().find(|s| s.split == Split::Test).unwrap();
        (pool, target)
    }

    fn timed(text: &str, latency: f64) -> Result<RawCompletion, crate::eval::BackendError> {
        Ok(RawCompletion { text: text.into(), logprobs: None, reported_latency_s: Some(latency) })
    }

    #[test]
    fn direct_single_turn() {
        let (pool, target) = data();
        let m = ScriptedMock::new(vec![Ok(r#"{"label":"danger","confidence":0.8,"reasoning":"x"}"#.into())]);
        let v = run_protocol(&m, TaskFraming::Binary, Strategy::OneShot, Protocol::Direct, &target, &pool, &EvalSettings::default()).unwrap();
        assert_eq!(v.label, Some(Label::Danger));
        assert_eq!(v.score_source, ScoreSource::ConfidenceFallback);
        assert_eq!(m.calls(), 1);
        assert_eq!(m.requests()[0].max_tokens, 512);
        assert_eq!(m.requests()[0].temperature, 0.0);
    }

    #[test]
    fn cot_sums_turn_latencies() {
        let (pool, target) = data();
        let m = ScriptedMock::with_completions(vec![
            timed("Two aircraft on final, one overtaking.", 2.25),
            timed("Here you go: {\"label\": \"danger\", \"confidence\": 0.9, \"reasoning\": \"overtake\"} thanks", 0.5),
        ]);
        let v = run_protocol(&m, TaskFraming::Binary, Strategy::ZeroShot, Protocol::Cot, &target, &pool, &EvalSettings::default()).unwrap();
        assert_eq!(v.latency_s, 2.75);
        assert_eq!(v.label, Some(Label::Danger));
        let reqs = m.requests();
        assert_eq!(reqs[0].max_tokens, 1024);
        assert!(reqs[0].messages.last().unwrap().content.ends_with(COT_ELICITATION));
        assert_eq!(reqs[1].messages.len(), 4);
        assert_eq!(reqs[1].messages[2].content, "Two aircraft on final, one overtaking.");
    }

    #[test]
    fn repair_then_parse_failure() {
        let (pool, target) = data();
        let m = ScriptedMock::with_completions(vec![timed("I think it is fine.", 1.0), timed("nominal", 1.0)]);
        let v = run_protocol(&m, TaskFraming::Binary, Strategy::ZeroShot, Protocol::Direct, &target, &pool, &EvalSettings::default()).unwrap();
        assert_eq!(v.label, None);
        assert_eq!(v.score_danger, 0.5);
        assert_eq!(v.latency_s, 2.0);
        assert!(v.parse_error.is_some());
        assert_eq!(m.calls(), 2);

        let m = ScriptedMock::new(vec![Ok("hmm".into()), Ok(r#"{"label":"nominal","confidence":0.7,"reasoning":"ok"}"#.into())]);
        let v = run_protocol(&m, TaskFraming::Binary, Strategy::ZeroShot, Protocol::Direct, &target, &pool, &EvalSettings::default()).unwrap();
        assert_eq!(v.label, Some(Label::Nominal));
        assert!((v.score_danger - 0.3).abs() < 1e-12);
    }

    #[test]
    fn logprobs_ignored_without_capability() {
        let (pool, target) = data();
        let lp = vec![crate::eval::TokenLogprob { token: "{\"label\": \"danger\"}".into(), logprob: 0.0, top: vec![("danger".into(), 0.0)] }];
        let m = ScriptedMock::with_completions(vec![Ok(RawCompletion {
            text: r#"{"label": "danger", "confidence": 0.6, "reasoning": "x"}"#.into(),
            logprobs: Some(lp),
            reported_latency_s: None,
        })]);
        let v = run_protocol(&m, TaskFraming::Binary, Strategy::ZeroShot, Protocol::Direct, &target, &pool, &EvalSettings::default()).unwrap();
        assert_eq!(v.score_source, ScoreSource::ConfidenceFallback);
        assert!(!m.requests()[0].want_logprobs);
    }
}
