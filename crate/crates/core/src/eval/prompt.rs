use std::fmt::Write as _;

use super::{ChatMessage, EvalError, ImageAttachment, Strategy, TaskFraming};
use crate::airspace::SafetyLabel3;
use crate::scenario::{Scenario, Split};

/// The per-scenario user content for quantitative runs: METAR raw and
/// decoded, then the SRT transcript. ADS-B stays out.
pub fn render_scenario_input(s: &Scenario) -> String {
    format!(
        "METAR (raw): {}\nMETAR (decoded): {}\n\nCTAF transcript (SRT):\n{}",
        s.metar_raw,
        s.metar_decoded,
        s.transcript.trim_end()
    )
}

/// Gold assistant turn for an exemplar: the gold label with full
/// confidence and the advisory's first sentence as reasoning.
pub fn exemplar_reply(s: &Scenario, framing: TaskFraming) -> String {
    let first = s
        .advisory
        .split_inclusive(". ")
        .next()
        .unwrap_or(&s.advisory)
        .trim();
    format!(
        "{{\"label\": \"{}\", \"confidence\": 1.0, \"reasoning\": {}}}",
        framing.gold(s.label3).as_str(),
        serde_json::Value::String(first.to_string())
    )
}

/// Exemplars for a strategy, interleaved by class (n, w, h, n, w, h) and
/// taken in id order within a class.
fn select_exemplars(strategy: Strategy, pool: &[Scenario]) -> Result<Vec<&Scenario>, EvalError> {
    let k = strategy.exemplars_per_class();
    let mut by_class: Vec<Vec<&Scenario>> = SafetyLabel3::ALL
        .iter()
        .map(|l| pool.iter().filter(|s| s.label3 == *l).collect())
        .collect();
    for (class, members) in SafetyLabel3::ALL.iter().zip(&mut by_class) {
        members.sort_by(|a, b| a.id.cmp(&b.id));
        if members.len() < k {
            return Err(EvalError::Prompt(format!(
                "{strategy:?} needs {k} {class} exemplars, pool has {}",
                members.len()
            )));
        }
    }
    Ok((0..k).flat_map(|i| by_class.iter().map(move |m| m[i])).collect())
}

/// Messages for one quantitative query: system prompt, exemplar pairs, then
/// the target scenario.
pub fn assemble_prompt(
    framing: TaskFraming,
    strategy: Strategy,
    scenario: &Scenario,
    icl_pool: &[Scenario],
) -> Result<Vec<ChatMessage>, EvalError> {
    if scenario.split != Split::Test {
        return Err(EvalError::Prompt(format!("{} is not a test scenario", scenario.id)));
    }
    let exemplars = select_exemplars(strategy, icl_pool)?;
    let mut messages = vec![ChatMessage::system(framing.system_prompt())];
    for ex in exemplars {
        if ex.id == scenario.id {
            return Err(EvalError::Prompt(format!("{} would be its own exemplar", scenario.id)));
        }
        if ex.split != Split::Icl {
            return Err(EvalError::Prompt(format!("exemplar {} is outside the ICL pool", ex.id)));
        }
        messages.push(ChatMessage::user(render_scenario_input(ex)));
        messages.push(ChatMessage::assistant(exemplar_reply(ex, framing)));
    }
    messages.push(ChatMessage::user(render_scenario_input(scenario)));
    Ok(messages)
}

/// Qualitative variant: adds the ADS-B snapshot and an optional chart or
/// map image. Never used by the evaluation matrix.
pub fn assemble_qualitative_prompt(
    framing: TaskFraming,
    scenario: &Scenario,
    image: Option<ImageAttachment>,
) -> Vec<ChatMessage> {
    let mut user = render_scenario_input(scenario);
    user.push_str("\n\nADS-B (t=0):\n");
    for a in &scenario.adsb {
        let _ = writeln!(
            user,
            "  {}  {:.4}{} {:.4}{}  {:.0} ft MSL  heading {:03.0}  {:.0} kt",
            a.callsign,
            a.lat.abs(),
            if a.lat >= 0.0 { 'N' } else { 'S' },
            a.lon.abs(),
            if a.lon >= 0.0 { 'E' } else { 'W' },
            a.alt_msl_ft,
            a.heading_deg,
            a.speed_kt
        );
    }
    let mut msg = ChatMessage::user(user.trim_end());
    msg.image = image;
    vec![ChatMessage::system(framing.system_prompt()), msg]
}
