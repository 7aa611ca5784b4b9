//! Per-hazard traffic scripts.
//!
//! A script is an ordered list of steps, each a position report of one
//! aircraft at a pattern fix. Announced steps become radio calls and are
//! spaced roughly ten seconds apart (one call every 9.5 to 10.5 s starting
//! at t=0); silent steps are spread evenly between the calls around them.
//! That cadence keeps the template transcript inside the generator's
//! timing rules.

use rand::seq::SliceRandom;
use rand::Rng;

use super::weather::{sample_metar, WeatherFamily};
use super::{ScenarioError, Scenario, Split};
use crate::airspace::{
    collapse_to_binary, label_scenario, round_to, AdsbState, Aircraft, Airfield, Callsign, Fix,
    HazardType, LocalPoint, PatternGeometry, PatternPhase, PatternSide, PositionEvent, RadioStatus, Runway,
};
use crate::metar::{decode_metar, parse_metar};

pub const MAX_ATTEMPTS: usize = 20;
const MAX_CALLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AircraftType {
    pub name: &'static str,
    /// How other pilots and advisories refer to it.
    pub short: &'static str,
    pub speed_kt: (u32, u32),
}

pub const AIRCRAFT_TYPES: [AircraftType; 8] = [
    AircraftType { name: "Cessna 172", short: "Cessna", speed_kt: (80, 95) },
    AircraftType { name: "Cessna 152", short: "Cessna", speed_kt: (65, 80) },
    AircraftType { name: "Piper Cherokee", short: "Cherokee", speed_kt: (75, 95) },
    AircraftType { name: "Piper Seneca", short: "Seneca", speed_kt: (90, 110) },
    AircraftType { name: "Cirrus SR22", short: "Cirrus", speed_kt: (90, 110) },
    AircraftType { name: "Diamond DA40", short: "Diamond", speed_kt: (75, 95) },
    AircraftType { name: "Beechcraft Bonanza", short: "Bonanza", speed_kt: (95, 110) },
    AircraftType { name: "Piper Cub", short: "Cub", speed_kt: (60, 75) },
];

const TAIL_LETTERS: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZ";

fn callsign<R: Rng>(rng: &mut R, taken: &[Callsign]) -> Callsign {
    loop {
        let mut s = format!("N{}", rng.gen_range(1..=9));
        let (digits, letters) = if rng.gen_bool(0.7) { (2, 2) } else { (3, 1) };
        for _ in 0..digits {
            s.push(char::from(b'0' + rng.gen_range(0..10u8)));
        }
        for _ in 0..letters {
            s.push(char::from(*TAIL_LETTERS.choose(rng).expect("non-empty")));
        }
        let cs = Callsign::new(&s).expect("generated callsigns are well formed");
        if !taken.contains(&cs) {
            return cs;
        }
    }
}

struct Pilot {
    aircraft: Aircraft,
    speed_kt: f64,
}

struct Step {
    pilot: usize,
    phase: PatternPhase,
    fix: Fix,
    alt_ft: f64,
    announced: bool,
    runway: Runway,
    side: PatternSide,
}

struct Plan<'g> {
    g: &'g PatternGeometry,
    pilots: Vec<Pilot>,
    steps: Vec<Step>,
}

impl<'g> Plan<'g> {
    fn new(g: &'g PatternGeometry) -> Self {
        Plan { g, pilots: Vec::new(), steps: Vec::new() }
    }

    fn pilot<R: Rng>(&mut self, rng: &mut R, radio: RadioStatus) -> usize {
        let taken: Vec<Callsign> = self.pilots.iter().map(|p| p.aircraft.callsign.clone()).collect();
        let ty = AIRCRAFT_TYPES.choose(rng).expect("non-empty");
        self.pilots.push(Pilot {
            aircraft: Aircraft {
                callsign: callsign(rng, &taken),
                type_name: ty.name.to_string(),
                radio,
            },
            speed_kt: f64::from(rng.gen_range(ty.speed_kt.0..=ty.speed_kt.1)),
        });
        self.pilots.len() - 1
    }

    fn runway(&self) -> Runway {
        self.g.airfield().runway
    }

    fn side(&self) -> PatternSide {
        self.g.airfield().pattern_side
    }

    #[allow(clippy::too_many_arguments)]
    fn push_on(&mut self, pilot: usize, phase: PatternPhase, fix: Fix, alt_ft: f64, announced: bool, runway: Runway, side: PatternSide) {
        self.steps.push(Step { pilot, phase, fix, alt_ft, announced, runway, side });
    }

    fn push(&mut self, pilot: usize, phase: PatternPhase, fix: Fix, alt_ft: f64, announced: bool) {
        let (rw, side) = (self.runway(), self.side());
        self.push_on(pilot, phase, fix, alt_ft, announced, rw, side);
    }

    fn leg(&mut self, rng: &mut impl Rng, pilot: usize, phase: PatternPhase, side: PatternSide, announced: bool) {
        let (g, rw, pa) = (self.g, self.runway(), self.g.pattern_alt_ft());
        let (fix, alt) = match phase {
            PatternPhase::Crosswind => (g.crosswind_fix(rw, side, rng.gen_range(0.3..0.7)), pa - rng.gen_range(100.0..200.0)),
            PatternPhase::Downwind => (g.downwind_fix(rw, side, rng.gen_range(0.25..0.55)), pa + rng.gen_range(-30.0..30.0)),
            PatternPhase::Base => (g.base_fix(rw, side, rng.gen_range(0.3..0.7)), pa - rng.gen_range(200.0..300.0)),
            other => unreachable!("{other} is not a pattern leg"),
        };
        self.push_on(pilot, phase, fix, alt, announced, rw, side);
    }

    fn final_at(&mut self, pilot: usize, phase: PatternPhase, dist_nm: f64, alt_extra: f64, announced: bool) {
        let rw = self.runway();
        let fix = self.g.final_fix(rw, dist_nm);
        let alt = self.g.glide_alt_ft(dist_nm) + alt_extra;
        self.push(pilot, phase, fix, alt, announced);
    }

    fn on_runway(&mut self, pilot: usize, phase: PatternPhase, fraction: f64, announced: bool) {
        let (g, rw) = (self.g, self.runway());
        let mut fix = match phase {
            PatternPhase::ClearOfRunway => g.clear_fix(rw, self.side()),
            _ => g.runway_fix(rw, fraction),
        };
        if phase == PatternPhase::OnRunway {
            // Back-taxiing against the landing direction.
            fix.heading_deg = (fix.heading_deg + 180.0) % 360.0;
        }
        let elev = g.airfield().field_elev_ft;
        self.push(pilot, phase, fix, elev, announced);
    }
}

fn glide_extra(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.0..60.0)
}

fn plan<'g, R: Rng>(rng: &mut R, h: HazardType, g: &'g PatternGeometry) -> Plan<'g> {
    use PatternPhase::*;
    let mut p = Plan::new(g);
    let right = g.airfield().pattern_side;
    match h {
        HazardType::NominalSingleAircraft => {
            let a = p.pilot(rng, RadioStatus::Radio);
            for leg in [Crosswind, Downwind, Base] {
                p.leg(rng, a, leg, right, true);
            }
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            if rng.gen_bool(0.6) {
                let e = glide_extra(rng);
                p.final_at(a, ShortFinal, rng.gen_range(0.5..0.9), e, true);
                if rng.gen_bool(0.5) {
                    p.on_runway(a, ClearOfRunway, 0.6, true);
                }
            }
        }
        HazardType::NominalInstrumentApproach => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let departing = rng.gen_bool(0.5).then(|| p.pilot(rng, RadioStatus::Radio));
            let elev = g.airfield().field_elev_ft;
            let rw = p.runway();
            if let Some(b) = departing {
                let fix = g.upwind_fix(rw, rng.gen_range(1.0..1.5));
                p.push(b, Departure, fix, elev + rng.gen_range(500.0..700.0), true);
            }
            let e = glide_extra(rng);
            p.final_at(a, StraightInFinal, rng.gen_range(4.8..5.2), e, true);
            if let Some(b) = departing {
                let fix = g.upwind_fix(rw, rng.gen_range(2.8..3.4));
                p.push(b, Departure, fix, elev + rng.gen_range(900.0..1200.0), true);
            }
            let e = glide_extra(rng);
            p.final_at(a, StraightInFinal, rng.gen_range(2.9..3.1), e, true);
            if departing.is_none() && rng.gen_bool(0.5) {
                let e = glide_extra(rng);
                p.final_at(a, StraightInFinal, rng.gen_range(1.9..2.1), e, true);
            }
            let e = glide_extra(rng);
            p.final_at(a, ShortFinal, rng.gen_range(0.6..0.9), e, true);
            p.on_runway(a, ClearOfRunway, 0.6, true);
        }
        HazardType::SilentTraffic => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Nordo);
            let pa = g.pattern_alt_ft();
            let rw = p.runway();
            p.leg(rng, a, Downwind, right, true);
            let fix = g.crosswind_fix(rw, right, rng.gen_range(0.3..0.7));
            p.push(b, Crosswind, fix, pa + rng.gen_range(300.0..500.0), false);
            p.leg(rng, a, Base, right, true);
            let fix = g.downwind_fix(rw, right, rng.gen_range(0.2..0.5));
            p.push(b, Downwind, fix, pa + rng.gen_range(300.0..500.0), false);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            let e = glide_extra(rng);
            p.final_at(a, ShortFinal, rng.gen_range(0.5..0.9), e, true);
        }
        HazardType::MissingPositionCalls => {
            let a = p.pilot(rng, RadioStatus::Radio);
            p.leg(rng, a, Crosswind, right, true);
            p.leg(rng, a, Downwind, right, false);
            let base_called = rng.gen_bool(0.5);
            p.leg(rng, a, Base, right, base_called);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            if rng.gen_bool(0.7) {
                let e = glide_extra(rng);
                p.final_at(a, ShortFinal, rng.gen_range(0.5..0.9), e, true);
            }
        }
        HazardType::WrongPatternDirection => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let wrong = match right {
                PatternSide::Right => PatternSide::Left,
                PatternSide::Left => PatternSide::Right,
            };
            for leg in [Crosswind, Downwind, Base] {
                p.leg(rng, a, leg, wrong, true);
            }
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            if rng.gen_bool(0.5) {
                let e = glide_extra(rng);
                p.final_at(a, ShortFinal, rng.gen_range(0.5..0.9), e, true);
            }
        }
        HazardType::ConvergingFinalSeparated => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            p.leg(rng, a, Base, right, true);
            let e = glide_extra(rng);
            p.final_at(b, StraightInFinal, rng.gen_range(3.6..4.2), e, true);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.3..1.5), e, true);
            let e = glide_extra(rng);
            p.final_at(b, StraightInFinal, rng.gen_range(2.8..3.2), e, true);
            let e = glide_extra(rng);
            p.final_at(a, ShortFinal, rng.gen_range(0.7..0.9), e, true);
            let e = glide_extra(rng);
            p.final_at(b, Final, rng.gen_range(1.9..2.2), e, true);
        }
        HazardType::VfrIntoImc => {
            let a = p.pilot(rng, RadioStatus::Radio);
            if rng.gen_bool(0.5) {
                p.leg(rng, a, Crosswind, right, true);
            }
            p.leg(rng, a, Downwind, right, true);
            p.leg(rng, a, Base, right, true);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            if rng.gen_bool(0.5) {
                let e = glide_extra(rng);
                p.final_at(a, ShortFinal, rng.gen_range(0.5..0.9), e, true);
            }
        }
        HazardType::SimultaneousFinal => {
            // Straight-in traffic overtakes a pattern aircraft on final.
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            p.leg(rng, b, Base, right, true);
            let hi = rng.gen_range(50.0..150.0);
            p.final_at(a, StraightInFinal, rng.gen_range(1.9..2.1), hi, true);
            let e = glide_extra(rng);
            p.final_at(b, Final, rng.gen_range(1.3..1.5), e, true);
            p.final_at(a, Final, rng.gen_range(1.4..1.6), hi, true);
            let e = glide_extra(rng);
            p.final_at(b, ShortFinal, rng.gen_range(0.8..0.95), e, true);
            p.final_at(a, Final, rng.gen_range(0.95..1.05), hi, true);
            let e = glide_extra(rng);
            p.final_at(b, ShortFinal, rng.gen_range(0.5..0.65), e, true);
            p.final_at(a, GoAround, rng.gen_range(0.3..0.4), hi + 100.0, true);
        }
        HazardType::RunwayIncursionRisk => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            p.leg(rng, a, Base, right, true);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.3..1.5), e, true);
            p.on_runway(b, OnRunway, rng.gen_range(0.2..0.6), true);
            let e = glide_extra(rng);
            p.final_at(a, ShortFinal, rng.gen_range(0.6..0.9), e, true);
            if rng.gen_bool(0.5) {
                p.final_at(a, GoAround, rng.gen_range(0.2..0.35), 150.0, true);
            }
        }
        HazardType::GoAroundConflict => {
            // The landing aircraft never reports clearing; the follower's
            // go-around may go unannounced too.
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            let e = glide_extra(rng);
            p.final_at(b, Final, rng.gen_range(1.0..1.3), e, true);
            p.leg(rng, a, Base, right, true);
            p.on_runway(b, OnRunway, rng.gen_range(0.3..0.6), false);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
            let e = glide_extra(rng);
            p.final_at(a, ShortFinal, rng.gen_range(0.6..0.9), e, true);
            let announced = rng.gen_bool(0.5);
            p.final_at(a, GoAround, rng.gen_range(0.2..0.35), 150.0, announced);
        }
        HazardType::WrongRunwayCall => {
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            let wrong = p.runway().reciprocal();
            if rng.gen_bool(0.5) {
                p.leg(rng, b, Base, right, true);
            }
            let e = glide_extra(rng);
            p.final_at(b, Final, rng.gen_range(1.3..1.6), e, true);
            for (k, d) in [rng.gen_range(3.5..4.5), rng.gen_range(2.5..3.0)].into_iter().enumerate() {
                let fix = g.final_fix(wrong, d);
                let alt = g.glide_alt_ft(d) + glide_extra(rng);
                p.push_on(a, StraightInFinal, fix, alt, true, wrong, right);
                if k == 0 {
                    let e = glide_extra(rng);
                    p.final_at(b, ShortFinal, rng.gen_range(0.7..0.9), e, true);
                }
            }
        }
        HazardType::MidairConvergingAltitude => {
            // B joins downwind on a converging track; A is reported at the
            // moment both are heading for the same point.
            let a = p.pilot(rng, RadioStatus::Radio);
            let b = p.pilot(rng, RadioStatus::Radio);
            let rw = p.runway();
            let a_fix = g.downwind_fix(rw, right, rng.gen_range(0.2..0.45));
            let a_alt = g.pattern_alt_ft() + rng.gen_range(-30.0..30.0);
            let (va, vb) = (p.pilots[a].speed_kt / 3600.0, p.pilots[b].speed_kt / 3600.0);
            let tau = rng.gen_range(25.0..40.0);
            let meet = a_fix.point.add(LocalPoint::heading(a_fix.heading_deg).scale(va * tau));
            let b_heading = (a_fix.heading_deg + if rng.gen_bool(0.5) { 45.0 } else { 315.0 }) % 360.0;
            let tau_b = tau + rng.gen_range(-3.0..3.0);
            let b_point = meet.sub(LocalPoint::heading(b_heading).scale(vb * tau_b));
            let b_alt = a_alt + rng.gen_range(-120.0..120.0);
            p.push(b, Downwind, Fix { point: b_point, heading_deg: b_heading }, b_alt, true);
            p.push(a, Downwind, a_fix, a_alt, true);
            p.leg(rng, a, Base, right, true);
            let e = glide_extra(rng);
            p.final_at(a, Final, rng.gen_range(1.2..1.5), e, true);
        }
    }
    p
}

/// Report times: calls on a ~10 s cadence from t=0, silent reports spread
/// between them.
fn schedule<R: Rng>(rng: &mut R, steps: &[Step]) -> Result<Vec<f64>, String> {
    let beats: Vec<usize> = (0..steps.len()).filter(|&i| steps[i].announced).collect();
    if beats.first() != Some(&0) {
        return Err("a script must open with a radio call".into());
    }
    if beats.len() > MAX_CALLS {
        return Err(format!("{} calls exceed the {MAX_CALLS}-call budget", beats.len()));
    }
    let mut beat_t = vec![0.0];
    for _ in 1..beats.len() {
        let prev = *beat_t.last().expect("non-empty");
        beat_t.push(round_to(prev + rng.gen_range(9.5..=10.5), 0.1));
    }
    let mut times = vec![0.0; steps.len()];
    for (k, &b) in beats.iter().enumerate() {
        times[b] = beat_t[k];
        let end = beats.get(k + 1).copied().unwrap_or(steps.len());
        let silent = end - b - 1;
        for j in 1..=silent {
            times[b + j] = match beat_t.get(k + 1) {
                Some(next) => round_to(beat_t[k] + (next - beat_t[k]) * j as f64 / (silent + 1) as f64, 0.1),
                None => round_to(beat_t[k] + 5.0 * j as f64, 0.1),
            };
        }
    }
    Ok(times)
}

fn ground_speed(phase: PatternPhase, cruise: f64) -> f64 {
    match phase {
        PatternPhase::OnRunway | PatternPhase::ClearOfRunway => 10.0,
        _ => cruise,
    }
}

/// Where each aircraft was at t=0, dead-reckoned back from its first report.
fn adsb_snapshots(airfield: &Airfield, aircraft: &[Aircraft], events: &[PositionEvent]) -> Vec<AdsbState> {
    aircraft
        .iter()
        .filter_map(|ac| {
            let first = events.iter().find(|e| e.callsign == ac.callsign)?;
            let here = airfield.to_local(first.position());
            let back = LocalPoint::heading(first.heading_deg).scale(first.speed_kt / 3600.0 * first.t);
            let ll = airfield.to_latlon(here.sub(back));
            Some(AdsbState {
                callsign: ac.callsign.clone(),
                t: 0.0,
                lat: round_to(ll.lat, 1e-4),
                lon: round_to(ll.lon, 1e-4),
                alt_msl_ft: round_to(first.alt_ft, 10.0).max(airfield.field_elev_ft),
                heading_deg: first.heading_deg,
                speed_kt: first.speed_kt,
            })
        })
        .collect()
}

/// Draw one scenario (without transcript or advisory) whose rule-engine
/// label matches the hazard type's class, retrying up to [`MAX_ATTEMPTS`].
pub fn sample_scenario<R: Rng>(
    rng: &mut R,
    hazard_type: HazardType,
    airfield: &Airfield,
    id: &str,
) -> Result<Scenario, ScenarioError> {
    let g = airfield.pattern();
    let target = hazard_type.label();
    for _ in 0..MAX_ATTEMPTS {
        let metar_raw = sample_metar(rng, WeatherFamily::for_hazard(hazard_type));
        let metar = parse_metar(&metar_raw)?;
        let plan = plan(rng, hazard_type, &g);
        let times = schedule(rng, &plan.steps).map_err(|message| ScenarioError::Inconsistent {
            id: id.to_string(),
            message,
        })?;
        let events: Vec<PositionEvent> = plan
            .steps
            .iter()
            .zip(&times)
            .map(|(s, &t)| {
                let pilot = &plan.pilots[s.pilot];
                let radio = if s.announced { RadioStatus::Radio } else { RadioStatus::Nordo };
                g.event(
                    t,
                    &pilot.aircraft.callsign,
                    s.phase,
                    s.fix,
                    s.alt_ft,
                    ground_speed(s.phase, pilot.speed_kt),
                    radio,
                    s.runway,
                    s.side,
                )
            })
            .collect();
        let aircraft: Vec<Aircraft> = plan.pilots.iter().map(|p| p.aircraft.clone()).collect();
        let label = label_scenario(airfield, &events, &aircraft, &metar)?;
        if label != target {
            tracing::debug!(%hazard_type, %label, "resampling");
            continue;
        }
        let last_t = times.iter().copied().fold(0.0, f64::max);
        let duration_s = (((last_t + 8.0) / 5.0).ceil() * 5.0) as u32;
        return Ok(Scenario {
            id: id.to_string(),
            hazard_type,
            label3: label,
            label_binary: collapse_to_binary(label),
            metar_decoded: decode_metar(&metar),
            metar_raw,
            duration_s,
            adsb: adsb_snapshots(airfield, &aircraft, &events),
            aircraft,
            events,
            transcript: String::new(),
            advisory: String::new(),
            split: Split::Test,
        });
    }
    Err(ScenarioError::Unrealisable {
        hazard_type,
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_type_realises_its_label() {
        let af = Airfield::khaf();
        for h in HazardType::ALL {
            for seed in 0..25 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = sample_scenario(&mut rng, h, &af, "S999")
                    .unwrap_or_else(|e| panic!("{h} seed {seed}: {e}"));
                assert_eq!(s.label3, h.label());
                assert!(!s.events.is_empty() && s.events[0].t == 0.0);
                assert!(s.adsb.len() == s.aircraft.len());
            }
        }
    }

    #[test]
    fn simultaneous_final_has_two_aircraft_on_final() {
        let af = Airfield::khaf();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_scenario(&mut rng, HazardType::SimultaneousFinal, &af, "S003").unwrap();
        assert_eq!(s.aircraft.len(), 2);
        for ac in &s.aircraft {
            assert!(s.events.iter().any(|e| e.callsign == ac.callsign && e.phase.is_final()));
        }
    }

    #[test]
    fn same_seed_same_scenario() {
        let af = Airfield::khaf();
        let a = sample_scenario(&mut ChaCha8Rng::seed_from_u64(11), HazardType::WrongRunwayCall, &af, "S1").unwrap();
        let b = sample_scenario(&mut ChaCha8Rng::seed_from_u64(11), HazardType::WrongRunwayCall, &af, "S1").unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn cadence_keeps_calls_apart() {
        let af = Airfield::khaf();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = sample_scenario(&mut rng, HazardType::GoAroundConflict, &af, "S1").unwrap();
        let calls: Vec<f64> = s.events.iter().filter(|e| e.radio.is_radio()).map(|e| e.t).collect();
        for w in calls.windows(2) {
            let d = w[1] - w[0];
            assert!((9.45..=10.55).contains(&d), "{d}");
        }
    }
}
