//! Build a two-call CTAF transcript, emit it as SRT, check the timing rules
//! and parse it back. Also spells a callsign phonetically.

use ctaf::transcript::{emit_srt, nato_decode, nato_spell, parse_srt, validate_timing, Transcript};

fn main() -> anyhow::Result<()> {
    let callsign = nato_spell("N123AB")?;
    let t = Transcript::from_cues([
        (0, 4_500, format!("Half Moon Bay traffic, Cessna {callsign}, left downwind runway three zero, Half Moon Bay")),
        (9_000, 13_500, "Half Moon Bay traffic, Skyhawk niner one zero Yankee Zulu, five mile final runway three zero".into()),
    ]);
    let srt = emit_srt(&t);
    print!("{srt}");

    let violations = validate_timing(&t);
    println!("timing violations: {violations:?}");
    assert_eq!(parse_srt(&srt)?, t);
    println!("{} -> {}", callsign, nato_decode(&callsign)?);
    Ok(())
}
