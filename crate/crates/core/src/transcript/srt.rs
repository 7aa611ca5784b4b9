use super::{SrtCue, Transcript, TranscriptError};

fn srt_error(block: usize, message: impl Into<String>) -> TranscriptError {
    TranscriptError::Srt {
        block,
        message: message.into(),
    }
}

/// `HH:MM:SS,mmm`; a `.` millisecond separator is accepted on input.
pub fn parse_timestamp(s: &str) -> Option<u64> {
    let (hms, ms) = s.split_once([',', '.'])?;
    let mut parts = hms.split(':');
    let (h, m, sec) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || ms.len() != 3 {
        return None;
    }
    let field = |x: &str, max: u64| -> Option<u64> {
        if x.is_empty() || x.len() > 2 || !x.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        x.parse().ok().filter(|v| *v <= max)
    };
    let h: u64 = if h.len() == 2 && h.bytes().all(|b| b.is_ascii_digit()) {
        h.parse().ok()?
    } else {
        return None;
    };
    let (m, sec) = (field(m, 59)?, field(sec, 59)?);
    if !ms.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let ms: u64 = ms.parse().ok()?;
    Some(((h * 60 + m) * 60 + sec) * 1000 + ms)
}

pub fn format_timestamp(ms: u64) -> String {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, milli) = (rem / 1000, rem % 1000);
    format!("{h:02}:{m:02}:{s:02},{milli:03}")
}

/// Parse SubRip text. Blocks are separated by blank lines; each holds an
/// index line, a `start --> end` line and one or more text lines. Errors
/// carry the 1-based block number.
pub fn parse_srt(text: &str) -> Result<Transcript, TranscriptError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }

    let mut cues: Vec<SrtCue> = Vec::with_capacity(blocks.len());
    for (i, lines) in blocks.iter().enumerate() {
        let block = i + 1;
        let index: u32 = lines[0]
            .trim()
            .parse()
            .map_err(|_| srt_error(block, format!("bad index line {:?}", lines[0])))?;
        if index == 0 {
            return Err(srt_error(block, "index must be positive"));
        }
        let timing = lines
            .get(1)
            .ok_or_else(|| srt_error(block, "missing timestamp line"))?;
        let (a, b) = timing
            .split_once("-->")
            .ok_or_else(|| srt_error(block, format!("bad timestamp line {timing:?}")))?;
        let start_ms = parse_timestamp(a.trim())
            .ok_or_else(|| srt_error(block, format!("bad start timestamp {:?}", a.trim())))?;
        let end_ms = parse_timestamp(b.trim())
            .ok_or_else(|| srt_error(block, format!("bad end timestamp {:?}", b.trim())))?;
        if start_ms >= end_ms {
            return Err(srt_error(block, "cue ends before it starts"));
        }
        if lines.len() < 3 {
            return Err(srt_error(block, "cue has no text"));
        }
        if let Some(prev) = cues.last() {
            if index <= prev.index {
                return Err(srt_error(
                    block,
                    format!("index {index} does not follow {}", prev.index),
                ));
            }
            if start_ms < prev.end_ms {
                return Err(srt_error(block, "cue overlaps the previous one"));
            }
        }
        let text = lines[2..]
            .iter()
            .map(|l| l.trim())
            .collect::<Vec<_>>()
            .join("\n");
        cues.push(SrtCue {
            index,
            start_ms,
            end_ms,
            text,
        });
    }
    Ok(Transcript { cues })
}

pub fn emit_srt(t: &Transcript) -> String {
    let mut out = String::new();
    for (i, c) in t.cues.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "{}\n{} --> {}\n{}\n",
            c.index,
            format_timestamp(c.start_ms),
            format_timestamp(c.end_ms),
            c.text
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        assert_eq!(parse_srt("").unwrap(), Transcript::default());
        assert_eq!(emit_srt(&Transcript::default()), "");
    }

    #[test]
    fn one_block() {
        let t = parse_srt("1\n00:00:00,000 --> 00:00:04,000\nHalf Moon Bay traffic\n").unwrap();
        assert_eq!(t.cues.len(), 1);
        assert_eq!(t.cues[0].duration_ms(), 4000);
        assert_eq!(emit_srt(&t), "1\n00:00:00,000 --> 00:00:04,000\nHalf Moon Bay traffic\n");
    }

    #[test]
    fn crlf_and_multiline_text() {
        let raw = "1\r\n00:00:00,000 --> 00:00:04,500\r\nline one\r\nline two\r\n\r\n2\r\n00:00:08,000 --> 00:00:12,000\r\nthree\r\n";
        let t = parse_srt(raw).unwrap();
        assert_eq!(t.cues[0].text, "line one\nline two");
        assert_eq!(t.cues[1].start_ms, 8000);
        assert_eq!(parse_srt(&emit_srt(&t)).unwrap(), t);
    }

    #[test]
    fn errors_name_the_block() {
        let bad_ts = "1\n00:00:00,000 --> 00:00:04,000\na\n\n2\n00:00:0x,000 --> 00:00:09,000\nb\n";
        match parse_srt(bad_ts) {
            Err(TranscriptError::Srt { block, .. }) => assert_eq!(block, 2),
            other => panic!("{other:?}"),
        }
        let non_monotone = "2\n00:00:00,000 --> 00:00:04,000\na\n\n1\n00:00:08,000 --> 00:00:09,000\nb\n";
        match parse_srt(non_monotone) {
            Err(TranscriptError::Srt { block, message }) => {
                assert_eq!(block, 2);
                assert!(message.contains("index"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_srt("1\n00:00:05,000 --> 00:00:04,000\na\n").is_err());
        assert!(parse_srt("1\n00:00:00,000 --> 00:00:04,000\n").is_err());
    }

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("01:02:03,004"), Some(3_723_004));
        assert_eq!(parse_timestamp("00:00:57.100"), Some(57_100));
        assert_eq!(parse_timestamp("00:61:00,000"), None);
        assert_eq!(format_timestamp(3_723_004), "01:02:03,004");
    }
}
