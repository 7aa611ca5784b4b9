//! Two aircraft on final for the same runway, 0.3 NM apart along the
//! approach. The rules flag a simultaneous-final hazard.

use ctaf::airspace::{
    evaluate_rules, label_scenario, Aircraft, Airfield, Callsign, PatternPhase, PositionEvent, RadioStatus,
};
use ctaf::metar::parse_metar;

fn on_final(af: &Airfield, cs: &Callsign, t: f64, dist_nm: f64) -> PositionEvent {
    let pattern = af.pattern();
    let fix = pattern.final_fix(af.runway, dist_nm);
    let p = af.to_latlon(fix.point);
    PositionEvent {
        t,
        callsign: cs.clone(),
        phase: if dist_nm <= 1.0 { PatternPhase::ShortFinal } else { PatternPhase::Final },
        dist_nm,
        alt_ft: 300.0 * dist_nm,
        radio: RadioStatus::Radio,
        runway: af.runway,
        pattern_side: af.pattern_side,
        lat: p.lat,
        lon: p.lon,
        heading_deg: fix.heading_deg,
        speed_kt: 70.0,
    }
}

fn main() -> anyhow::Result<()> {
    let af = Airfield::khaf();
    let a = Callsign::new("N123AB")?;
    let b = Callsign::new("N910YZ")?;
    let aircraft: Vec<Aircraft> = [&a, &b]
        .into_iter()
        .map(|cs| Aircraft { callsign: cs.clone(), type_name: "Cessna 172".into(), radio: RadioStatus::Radio })
        .collect();
    let events = vec![on_final(&af, &a, 0.0, 2.0), on_final(&af, &b, 5.0, 1.7)];
    let metar = parse_metar("KHAF 142135Z 30008KT 10SM CLR 15/05 A3001")?;

    for f in evaluate_rules(&af, &events, &aircraft, &metar)? {
        println!("{:?} at t={} ({:?})", f.rule, f.t, f.callsigns);
    }
    println!("label: {}", label_scenario(&af, &events, &aircraft, &metar)?);
    Ok(())
}
