//! Turning position events into radio calls, advisories and the generator
//! prompt.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Scenario, ScenarioError};
use crate::airspace::{
    Aircraft, Airfield, Finding, PatternPhase, PatternSide, PositionEvent, RadioStatus, RuleKind,
    Runway,
};
use crate::metar::{flight_category, FlightCategory};
use crate::transcript::{
    emit_srt, nato_spell, parse_radio_call, runway_words, Intention, Transcript,
};

pub const TRANSCRIPT_SYSTEM_PROMPT: &str = "\
You generate realistic CTAF radio transcripts for Half Moon Bay Airport (KHAF), runway 30, right-traffic pattern.

Given exact aircraft positions, write an SRT-format transcript of pilot radio calls.

FORMAT (strict):
{index}
{HH:MM:SS,mmm} --> {HH:MM:SS,mmm}
{text}

RULES:
- Use NATO phonetic alphabet for letters (Alpha, Bravo...) and \"niner\" for 9.
- Each self-announced call: \"Half Moon Bay traffic, [callsign], [position], [runway 30], [intention], Half Moon Bay.\"
- NORDO aircraft: only mentioned by other pilots.
- Timing: each utterance 3-6 s; gap between calls 3-8 s. Timestamps start at 00:00:00,000.
- CRITICAL: total scenario duration MUST be under 90 s; if the last timestamp would exceed 90 s, stop writing calls early.
- CRITICAL: write at most 10 lines total; stop at 10 even if not all events are covered.
- Return ONLY raw SRT - no markdown fences, no triple-backtick blocks.
- Cover the KEY position events only - not every single distance update.
- Pilots call position at major phase changes: entering downwind, turning base, turning final, short final, going around, clear of runway.
- Do NOT have pilots repeat the same position multiple times unless there is a conflict.
- For IMC / disoriented pilots: write hesitant, confused speech (\"uh\", \"I got...\", corrections).
- Return ONLY the SRT content.";

pub const ADVISORY_SYSTEM_PROMPT: &str = "\
You are an AI aviation safety advisor monitoring CTAF at KHAF (Half Moon Bay Airport).
Write a concise ground-truth safety advisory (2-4 sentences, ~100-200 words) based on the scenario.
Identify aircraft by callsign and type, state their positions precisely, assess the safety situation, and give recommended actions if needed.
Return ONLY the advisory text.";

/// How far apart (seconds) a call and the event it announces may be.
const CALL_WINDOW_S: f64 = 10.0;

/// Structured scenario description sent with both generator prompts.
pub fn build_generator_user_message(s: &Scenario) -> Result<String, ScenarioError> {
    if s.aircraft.is_empty() {
        return Err(ScenarioError::Inconsistent {
            id: s.id.clone(),
            message: "no aircraft".into(),
        });
    }
    let mut out = String::new();
    let _ = writeln!(out, "SCENARIO: {} ({})", s.hazard_type, s.label3);
    let _ = writeln!(out, "METAR: {}", s.metar_raw);
    let _ = writeln!(out, "DURATION: ~{}s", s.duration_s);
    out.push_str("\nAIRCRAFT:\n");
    for ac in &s.aircraft {
        let _ = writeln!(out, "  {} ({}) - {}", ac.callsign, ac.type_name, ac.radio.word());
    }
    out.push_str("\nPOSITION EVENTS:\n");
    for e in &s.events {
        let _ = writeln!(
            out,
            "  t={:.1}s  {}  {}  {:.2}NM  {:.0}ft  {}",
            e.t,
            e.callsign,
            e.phase,
            e.dist_nm,
            e.alt_ft,
            e.radio.word()
        );
    }
    out.push_str("\nWrite the SRT transcript.");
    Ok(out)
}

const NUMBER_WORDS: [&str; 10] =
    ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];

/// 1.4 → "one-and-a-half-mile", 0.5 → "half-mile".
fn miles_words(dist_nm: f64) -> String {
    let halves = (dist_nm * 2.0).round().max(1.0) as usize;
    let (whole, half) = (halves / 2, halves % 2 == 1);
    match (whole, half) {
        (0, _) => "half-mile".to_string(),
        (w, false) => format!("{}-mile", NUMBER_WORDS[w.min(9)]),
        (w, true) => format!("{}-and-a-half-mile", NUMBER_WORDS[w.min(9)]),
    }
}

fn runway_phrase(rw: Runway) -> String {
    format!("runway {}", runway_words(rw))
}

fn title_case(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next()
                .map(|f| f.to_uppercase().chain(c).collect())
                .unwrap_or_default()
        })
        .collect::<Vec<String>>()
        .join(" ")
}

fn side_word(side: PatternSide) -> &'static str {
    side.word()
}

/// The position clause of a call, without the runway.
fn position_words(e: &PositionEvent, prev: Option<&PositionEvent>, instrument: bool) -> String {
    let side = side_word(e.pattern_side);
    match e.phase {
        PatternPhase::Crosswind => format!("{side} crosswind"),
        PatternPhase::Downwind if prev.is_none() => format!("entering {side} downwind"),
        PatternPhase::Downwind => format!("{side} downwind"),
        PatternPhase::Base => format!("{side} base"),
        PatternPhase::Final if prev.is_some_and(|p| p.phase == PatternPhase::Base) => {
            format!("turning {side} final")
        }
        PatternPhase::Final => format!("{} final", miles_words(e.dist_nm)),
        PatternPhase::StraightInFinal if instrument => {
            format!("{} straight-in RNAV final", miles_words(e.dist_nm))
        }
        PatternPhase::StraightInFinal => format!("{} straight-in final", miles_words(e.dist_nm)),
        PatternPhase::ShortFinal => "short final".into(),
        PatternPhase::GoAround => "going around".into(),
        PatternPhase::OnRunway => "back taxi".into(),
        PatternPhase::ClearOfRunway => "clear of".into(),
        PatternPhase::Departure => "departing".into(),
    }
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Landing intention an aircraft states on its calls, if any.
fn intention_of(s: &Scenario, ac: &Aircraft) -> Option<Intention> {
    let mine: Vec<&PositionEvent> = s.events.iter().filter(|e| e.callsign == ac.callsign).collect();
    let first = mine.first()?;
    if matches!(first.phase, PatternPhase::Departure | PatternPhase::OnRunway) {
        return None;
    }
    if mine.iter().any(|e| e.phase == PatternPhase::ClearOfRunway) {
        return Some(Intention::FullStop);
    }
    if fnv1a(&[&s.id, ac.callsign.as_str()]).is_multiple_of(2) {
        Some(Intention::FullStop)
    } else {
        Some(Intention::TouchAndGo)
    }
}

fn states_intention(phase: PatternPhase) -> bool {
    matches!(
        phase,
        PatternPhase::Downwind
            | PatternPhase::Base
            | PatternPhase::Final
            | PatternPhase::StraightInFinal
            | PatternPhase::ShortFinal
    )
}

fn short_type(type_name: &str) -> &str {
    super::AIRCRAFT_TYPES
        .iter()
        .find(|t| t.name == type_name)
        .map_or(type_name, |t| t.short)
}

/// The body of one self-announce call (without the frame).
fn call_body(s: &Scenario, e: &PositionEvent, prev: Option<&PositionEvent>, hesitant: bool, nordo_note: Option<&str>) -> String {
    let ac = s.aircraft(e.callsign.as_str());
    let instrument = s.hazard_type == crate::airspace::HazardType::NominalInstrumentApproach;
    let mut parts = Vec::new();
    let mut position = position_words(e, prev, instrument);
    if hesitant {
        position = format!("uh, {position}");
    }
    let rw = runway_phrase(e.runway);
    match e.phase {
        PatternPhase::Departure => parts.push(format!("departing {rw}, straight out")),
        PatternPhase::ClearOfRunway => parts.push(format!("clear of {rw}")),
        PatternPhase::OnRunway => parts.push(format!("back taxi {rw}")),
        _ => parts.push(format!("{position} {rw}")),
    }
    if hesitant {
        parts.push("I got, uh, clouds coming down pretty low out here".into());
    }
    if let Some(note) = nordo_note {
        parts.push(note.to_string());
    }
    if states_intention(e.phase) {
        if let Some(i) = ac.and_then(|a| intention_of(s, a)) {
            parts.push(i.words().to_string());
        }
    }
    parts.join(", ")
}

fn cue_duration_ms(text: &str) -> u64 {
    let words = text.split_whitespace().count() as f64;
    let ms = (words * 350.0).clamp(3000.0, 6000.0);
    ((ms / 100.0).round() * 100.0) as u64
}

/// Deterministic SRT transcript: one framed call per announced event.
pub fn template_transcript(s: &Scenario, airfield: &Airfield) -> Result<String, ScenarioError> {
    let metar = s.metar()?;
    let hesitant = matches!(flight_category(&metar), FlightCategory::Ifr | FlightCategory::Lifr);
    let mut nordo_pending: BTreeSet<&str> = BTreeSet::new();
    let mut nordo_noted: BTreeSet<&str> = BTreeSet::new();
    let mut cues = Vec::new();
    for (i, e) in s.events.iter().enumerate() {
        let nordo_ac = s
            .aircraft(e.callsign.as_str())
            .is_some_and(|a| a.radio == RadioStatus::Nordo);
        if nordo_ac {
            if !nordo_noted.contains(e.callsign.as_str()) {
                nordo_pending.insert(e.callsign.as_str());
            }
            continue;
        }
        if !e.radio.is_radio() {
            continue;
        }
        let prev = s.events[..i].iter().rev().find(|p| p.callsign == e.callsign);
        // The first pilot to speak after NORDO traffic shows up mentions it.
        let note = nordo_pending.pop_first().map(|cs| {
            nordo_noted.insert(cs);
            let ty = s.aircraft(cs).map_or("aircraft", |a| short_type(&a.type_name));
            format!("looking for a {ty} in the pattern, no radio")
        });
        let callsign = nato_spell(e.callsign.as_str())?;
        let body = call_body(s, e, prev, hesitant && (cues.is_empty() || i + 1 == s.events.len()), note.as_deref());
        let text = format!("{} traffic, {callsign}, {body}, {}.", airfield.name, airfield.name);
        let start = (e.t * 1000.0).round() as u64;
        cues.push((start, start + cue_duration_ms(&text), text));
    }
    Ok(emit_srt(&Transcript::from_cues(cues)))
}

fn advisory_position(e: &PositionEvent, airfield: &Airfield) -> String {
    let side = side_word(e.pattern_side);
    let rw = format!("Runway {}", title_case(&runway_words(e.runway)));
    match e.phase {
        PatternPhase::Crosswind => format!("{side} crosswind {rw}"),
        PatternPhase::Downwind => format!("{side} downwind {rw}"),
        PatternPhase::Base => format!("{side} base {rw}"),
        PatternPhase::Final => format!("{} final {rw}", miles_words(e.dist_nm)),
        PatternPhase::StraightInFinal => format!("{} straight-in final {rw}", miles_words(e.dist_nm)),
        PatternPhase::ShortFinal => format!("short final {rw}"),
        PatternPhase::GoAround => format!("going around {rw}"),
        PatternPhase::OnRunway => format!("on {rw}"),
        PatternPhase::ClearOfRunway => format!("clear of {rw}"),
        PatternPhase::Departure => format!("departing {rw}"),
    }
    .replace("  ", " ")
    .trim()
    .to_string()
        + if e.runway != airfield.runway { " (not the active runway)" } else { "" }
}

fn last_at<'a>(s: &'a Scenario, cs: &str, t: f64) -> Option<&'a PositionEvent> {
    s.events
        .iter().rfind(|e| e.callsign.as_str() == cs && e.t <= t + 1e-9)
        .or_else(|| s.events.iter().find(|e| e.callsign.as_str() == cs))
}

fn who(s: &Scenario, cs: &str) -> String {
    match s.aircraft(cs) {
        Some(a) => format!("{cs}, {}", short_type(&a.type_name)),
        None => cs.to_string(),
    }
}

fn finding_sentences(s: &Scenario, f: &Finding, airfield: &Airfield) -> Vec<String> {
    let cs: Vec<&str> = f.callsigns.iter().map(|c| c.as_str()).collect();
    let pos = |c: &str| last_at(s, c, f.t).map(|e| advisory_position(e, airfield)).unwrap_or_default();
    let active = format!("Runway {}", title_case(&runway_words(airfield.runway)));
    let pair = || (cs[0], *cs.get(1).unwrap_or(&cs[0]));
    match f.rule {
        RuleKind::SimultaneousFinal => {
            let (a, b) = pair();
            let dist = |c: &str| last_at(s, c, f.t).map_or(0.0, |e| e.dist_nm);
            let (trail, lead) = if dist(a) >= dist(b) { (a, b) } else { (b, a) };
            vec![
                format!(
                    "Traffic alert: {}, {}, and {}, {}, converging on the same runway.",
                    who(s, trail), pos(trail), who(s, lead), pos(lead)
                ),
                format!(
                    "{trail}, go around immediately; {lead}, continue landing or clear the runway without delay; both aircraft maintain visual separation."
                ),
            ]
        }
        RuleKind::RunwayOccupied => {
            let (a, b) = pair();
            let on_rwy = |c: &str| last_at(s, c, f.t).is_some_and(|e| e.phase == PatternPhase::OnRunway);
            let (ground, air) = if on_rwy(a) { (a, b) } else { (b, a) };
            vec![
                format!(
                    "Traffic alert: {}, on {active}, while {}, {}.",
                    who(s, ground), who(s, air), pos(air)
                ),
                format!("{air}, go around; {ground}, vacate the runway without delay and announce when clear."),
            ]
        }
        RuleKind::WrongRunway => {
            let (a, b) = pair();
            let wrong = |c: &str| last_at(s, c, f.t).is_some_and(|e| e.runway != airfield.runway);
            let (bad, other) = if wrong(a) { (a, b) } else { (b, a) };
            vec![
                format!(
                    "Traffic alert: {}, reports {} while {active} is active and {}, is on {}, setting up an opposite-direction conflict.",
                    who(s, bad), pos(bad), who(s, other), pos(other)
                ),
                format!("{bad}, break off the approach and re-enter the pattern for {active}; {other}, be prepared to go around."),
            ]
        }
        RuleKind::MidairConverging => {
            let (a, b) = pair();
            vec![
                format!(
                    "Traffic alert: {}, {}, and {}, {}, are converging at nearly the same altitude.",
                    who(s, a), pos(a), who(s, b), pos(b)
                ),
                "Both aircraft turn away and change altitude immediately, then report traffic in sight.".into(),
            ]
        }
        RuleKind::WrongPatternDirection => {
            let a = cs[0];
            vec![format!(
                "Caution: {}, is flying {} to {active}, which uses {} traffic; {a}, re-enter the pattern with {} turns and announce your position.",
                who(s, a), pos(a), side_word(airfield.pattern_side), side_word(airfield.pattern_side)
            )]
        }
        RuleKind::ConvergingFinal => {
            let (a, b) = pair();
            vec![format!(
                "Caution: {}, {}, and {}, {}, are both inbound on final with spacing that is still adequate; the trailing aircraft should adjust speed and be ready to go around.",
                who(s, a), pos(a), who(s, b), pos(b)
            )]
        }
        RuleKind::NordoTraffic => {
            let a = cs[0];
            vec![format!(
                "Caution: {}, is operating {} without radio; all traffic keep a close lookout and make complete position reports.",
                who(s, a), pos(a)
            )]
        }
        RuleKind::MissedPositionCall => {
            let a = cs[0];
            let missed = s
                .events
                .iter()
                .find(|e| e.callsign.as_str() == a && (e.t - f.t).abs() < 1e-9)
                .map_or_else(|| "a position".to_string(), |e| advisory_position(e, airfield));
            vec![format!(
                "Caution: {}, did not announce {missed}; {a}, make every standard position call so other traffic can sequence.",
                who(s, a)
            )]
        }
        RuleKind::VfrPatternInImc => {
            let a = cs[0];
            let cat = s.metar().map(|m| flight_category(&m).to_string()).unwrap_or_default();
            vec![format!(
                "Caution: {}, is flying the VFR pattern at {} in {cat} conditions; {a}, land as soon as practical or obtain an IFR clearance.",
                who(s, a), pos(a)
            )]
        }
    }
}

/// Advisory text derived from the rule findings: the two most severe rules,
/// or a normal-operations statement.
pub fn template_advisory(s: &Scenario, airfield: &Airfield) -> Result<String, ScenarioError> {
    let findings = s.findings(airfield)?;
    let mut seen = BTreeSet::new();
    let mut sentences = Vec::new();
    for f in findings.iter().filter(|f| seen.insert(f.rule)).take(2) {
        sentences.extend(finding_sentences(s, f, airfield));
    }
    if sentences.is_empty() {
        let ac: Vec<String> = s
            .aircraft
            .iter()
            .map(|a| {
                let last = s.events.iter().rfind(|e| e.callsign == a.callsign);
                match last {
                    Some(e) => format!("{}, {}", who(s, a.callsign.as_str()), advisory_position(e, airfield)),
                    None => who(s, a.callsign.as_str()),
                }
            })
            .collect();
        sentences.push(format!("Normal operations: {} with all position calls made.", ac.join("; ")));
        sentences.push("No conflicts identified; continue standard self-announce procedures.".into());
    }
    Ok(sentences.join(" "))
}

/// Announced events the transcript does not cover within the call window.
pub fn missing_calls<'a>(s: &'a Scenario, transcript: &Transcript) -> Vec<&'a PositionEvent> {
    let calls: Vec<(f64, crate::transcript::RadioCall)> = transcript
        .cues
        .iter()
        .map(|c| (c.start_ms as f64 / 1000.0, parse_radio_call(&c.text)))
        .collect();
    s.events
        .iter()
        .filter(|e| e.radio.is_radio())
        .filter(|e| {
            !calls.iter().any(|(t, c)| {
                (t - e.t).abs() <= CALL_WINDOW_S
                    && c.callsign.as_ref() == Some(&e.callsign)
                    && c.phase == Some(e.phase)
            })
        })
        .collect()
}

/// Problems with a transcript relative to its scenario; empty when
/// consistent.
pub fn cross_check(s: &Scenario, transcript: &Transcript) -> Vec<String> {
    let mut problems: Vec<String> = missing_calls(s, transcript)
        .into_iter()
        .map(|e| format!("no call for {} {} at t={:.1}s", e.callsign, e.phase, e.t))
        .collect();
    for cue in &transcript.cues {
        let Some(cs) = parse_radio_call(&cue.text).callsign else {
            continue;
        };
        match s.aircraft(cs.as_str()) {
            None => problems.push(format!("cue {} is attributed to unknown {cs}", cue.index)),
            Some(a) if a.radio == RadioStatus::Nordo => {
                problems.push(format!("cue {} is spoken by NORDO {cs}", cue.index))
            }
            Some(_) => {}
        }
    }
    problems
}
