//! FAA self-announce phraseology: phonetic callsigns, runway words and
//! call parsing.

use serde::{Deserialize, Serialize};

use super::TranscriptError;
use crate::airspace::{Callsign, PatternPhase, Runway};

const LETTERS: [&str; 26] = [
    "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel", "India", "Juliet",
    "Kilo", "Lima", "Mike", "November", "Oscar", "Papa", "Quebec", "Romeo", "Sierra", "Tango",
    "Uniform", "Victor", "Whiskey", "Xray", "Yankee", "Zulu",
];

/// Digits as spoken on frequency: only 9 differs from plain English.
const DIGITS: [&str; 10] = [
    "Zero", "One", "Two", "Three", "Four", "Five", "Six", "Seven", "Eight", "Niner",
];

fn letter_of(word: &str) -> Option<char> {
    let w = word.to_ascii_lowercase();
    let w = match w.as_str() {
        "alfa" => "alpha",
        "juliett" => "juliet",
        "x-ray" => "xray",
        "whisky" => "whiskey",
        other => other,
    }
    .to_string();
    LETTERS
        .iter()
        .position(|l| l.eq_ignore_ascii_case(&w))
        .map(|i| (b'A' + i as u8) as char)
}

fn digit_of(word: &str) -> Option<u8> {
    let w = word.to_ascii_lowercase();
    if w == "nine" {
        return Some(9);
    }
    DIGITS
        .iter()
        .position(|d| d.eq_ignore_ascii_case(&w))
        .map(|i| i as u8)
}

fn char_of(word: &str) -> Option<char> {
    letter_of(word).or_else(|| digit_of(word).map(|d| (b'0' + d) as char))
}

pub fn spell_char(c: char) -> Option<&'static str> {
    match c.to_ascii_uppercase() {
        d @ '0'..='9' => Some(DIGITS[(d as u8 - b'0') as usize]),
        l @ 'A'..='Z' => Some(LETTERS[(l as u8 - b'A') as usize]),
        _ => None,
    }
}

/// "N910YZ" → "November Niner One Zero Yankee Zulu".
pub fn nato_spell(callsign: &str) -> Result<String, TranscriptError> {
    let cs = Callsign::new(callsign)?;
    Ok(cs
        .as_str()
        .chars()
        .map(|c| spell_char(c).expect("callsigns are alphanumeric"))
        .collect::<Vec<_>>()
        .join(" "))
}

/// Inverse of [`nato_spell`]; also accepts "Nine", "Alfa", "Juliett".
pub fn nato_decode(spoken: &str) -> Result<Callsign, TranscriptError> {
    let mut out = String::new();
    for word in spoken.split_whitespace() {
        let c = char_of(word).ok_or_else(|| TranscriptError::UnknownWord(word.to_string()))?;
        out.push(c);
    }
    Ok(Callsign::new(&out)?)
}

/// Runway as spoken: 30 → "three zero".
pub fn runway_words(runway: Runway) -> String {
    format!(
        "{} {}",
        DIGITS[usize::from(runway.0 / 10)].to_ascii_lowercase(),
        DIGITS[usize::from(runway.0 % 10)].to_ascii_lowercase()
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intention {
    FullStop,
    TouchAndGo,
    GoAround,
    Departure,
    Other(String),
}

impl Intention {
    pub fn words(&self) -> &str {
        match self {
            Intention::FullStop => "full stop",
            Intention::TouchAndGo => "touch and go",
            Intention::GoAround => "going around",
            Intention::Departure => "departing the pattern",
            Intention::Other(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadioCall {
    /// `None` when no callsign is spoken: a third-party or unattributed call.
    pub callsign: Option<Callsign>,
    pub phase: Option<PatternPhase>,
    /// The clause carrying the position, as spoken.
    pub position_text: String,
    pub runway: Option<Runway>,
    pub intention: Intention,
    pub mentions_nordo: bool,
    pub raw_text: String,
}

fn normalise(s: &str) -> String {
    let lower = s.to_lowercase().replace("x-ray", "xray");
    lower
        .chars()
        .map(|c| match c {
            '-' => ' ',
            c if c.is_alphanumeric() || c == ',' || c == ' ' || c == '\'' => c,
            _ => ' ',
        })
        .collect()
}

/// Phase keywords, most specific first.
const PHASE_KEYWORDS: [(&str, PatternPhase); 15] = [
    ("going around", PatternPhase::GoAround),
    ("go around", PatternPhase::GoAround),
    ("short final", PatternPhase::ShortFinal),
    ("straight in", PatternPhase::StraightInFinal),
    ("clear of", PatternPhase::ClearOfRunway),
    ("clearing", PatternPhase::ClearOfRunway),
    ("final", PatternPhase::Final),
    ("base", PatternPhase::Base),
    ("downwind", PatternPhase::Downwind),
    ("crosswind", PatternPhase::Crosswind),
    ("departing", PatternPhase::Departure),
    ("departure", PatternPhase::Departure),
    ("taking off", PatternPhase::OnRunway),
    ("back taxi", PatternPhase::OnRunway),
    ("on the runway", PatternPhase::OnRunway),
];

fn contains_phrase(words: &[&str], phrase: &str) -> bool {
    let p: Vec<&str> = phrase.split(' ').collect();
    words.windows(p.len()).any(|w| w == p.as_slice())
}

fn find_phase(words: &[&str]) -> Option<PatternPhase> {
    PHASE_KEYWORDS
        .iter()
        .find(|(k, _)| contains_phrase(words, k))
        .map(|(_, p)| *p)
}

/// Spoken callsign run: "november" then phonetic letters/digits, or a
/// literal N-number token. Returns the callsign and the word span.
fn find_callsign(words: &[&str]) -> Option<(Callsign, usize, usize)> {
    for (i, w) in words.iter().enumerate() {
        if w.len() >= 2 && w.starts_with('n') && w[1..].bytes().all(|b| b.is_ascii_alphanumeric())
            && w.as_bytes()[1].is_ascii_digit()
        {
            if let Ok(cs) = Callsign::new(w) {
                return Some((cs, i, i + 1));
            }
        }
        if *w == "november" {
            let mut s = String::from("N");
            let mut j = i + 1;
            while j < words.len() && s.len() < 6 {
                match char_of(words[j]) {
                    Some(c) => s.push(c),
                    None => break,
                }
                j += 1;
            }
            if let Ok(cs) = Callsign::new(&s) {
                return Some((cs, i, j));
            }
        }
    }
    None
}

fn find_runway(words: &[&str]) -> Option<Runway> {
    let pair = |k: usize| -> Option<Runway> {
        let a = digit_of(words.get(k)?)?;
        let b = digit_of(words.get(k + 1)?)?;
        let n = a * 10 + b;
        (1..=36).contains(&n).then_some(Runway(n))
    };
    if let Some(k) = words.iter().position(|w| *w == "runway") {
        if let Some(r) = pair(k + 1) {
            return Some(r);
        }
    }
    (0..words.len()).find_map(pair)
}

fn find_intention(words: &[&str]) -> Option<Intention> {
    if contains_phrase(words, "full stop") {
        Some(Intention::FullStop)
    } else if contains_phrase(words, "touch and go") {
        Some(Intention::TouchAndGo)
    } else if contains_phrase(words, "going around") || contains_phrase(words, "go around") {
        Some(Intention::GoAround)
    } else if words.iter().any(|w| *w == "departing" || *w == "departure") {
        Some(Intention::Departure)
    } else {
        None
    }
}

fn mentions_nordo(words: &[&str]) -> bool {
    words.contains(&"nordo")
        || contains_phrase(words, "no radio")
        || contains_phrase(words, "without radio")
        || contains_phrase(words, "not on frequency")
}

/// Parse one utterance. The "<Field> traffic, … , <Field>" frame is
/// optional; a call with no recognisable callsign is returned unattributed.
pub fn parse_radio_call(utterance: &str) -> RadioCall {
    let norm = normalise(utterance);
    let mut segments: Vec<&str> = norm.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if let Some(first) = segments.first() {
        if let Some(field) = first.strip_suffix(" traffic") {
            let field = field.trim();
            if segments.len() > 1 && segments.last().is_some_and(|l| *l == field) {
                segments.pop();
            }
            segments.remove(0);
        }
    }

    let seg_words: Vec<Vec<&str>> = segments.iter().map(|s| s.split_whitespace().collect()).collect();
    let mut callsign = None;
    let mut cs_span = None;
    for (si, words) in seg_words.iter().enumerate() {
        if let Some((cs, a, b)) = find_callsign(words) {
            callsign = Some(cs);
            cs_span = Some((si, a, b));
            break;
        }
    }
    // Words with the callsign removed, so its digits are not read as a runway.
    let content: Vec<Vec<&str>> = seg_words
        .iter()
        .enumerate()
        .map(|(si, ws)| {
            ws.iter()
                .enumerate()
                .filter(|(wi, _)| !matches!(cs_span, Some((s, a, b)) if s == si && (a..b).contains(wi)))
                .map(|(_, w)| *w)
                .collect()
        })
        .collect();
    let all: Vec<&str> = content.iter().flatten().copied().collect();

    let phase = find_phase(&all);
    let position_idx = phase.and_then(|_| content.iter().position(|ws| find_phase(ws).is_some()));
    let position_text = position_idx
        .map(|i| content[i].join(" "))
        .or_else(|| content.iter().find(|ws| !ws.is_empty()).map(|ws| ws.join(" ")))
        .unwrap_or_default();

    let intention = find_intention(&all).unwrap_or_else(|| {
        let last = content.iter().rposition(|ws| !ws.is_empty());
        match last {
            Some(i) if Some(i) != position_idx => Intention::Other(content[i].join(" ")),
            _ => Intention::Other(String::new()),
        }
    });

    RadioCall {
        callsign,
        phase,
        position_text,
        runway: find_runway(&all),
        intention,
        mentions_nordo: mentions_nordo(&all),
        raw_text: utterance.to_string(),
    }
}
