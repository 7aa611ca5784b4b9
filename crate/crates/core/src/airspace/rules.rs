//! Ground-truth labelling rules.
//!
//! Each aircraft's reports form a track: the phase, runway and velocity are
//! those of the latest report at or before an instant, while distance,
//! altitude and position are interpolated linearly towards the next report
//! (and held after the last one). An aircraft is absent before its first
//! report. Rules are checked at every report instant; the simultaneous-final
//! separation is additionally minimised over the whole interval between
//! instants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geo::LocalPoint;
use super::{
    Aircraft, Airfield, AirspaceError, Callsign, PatternPhase, PositionEvent, RadioStatus, Runway, SafetyLabel3, SHORT_FINAL_NM,
};
use crate::metar::{flight_category, FlightCategory, Metar};

/// Two aircraft on final closer than this are an imminent conflict.
pub const SIMULTANEOUS_FINAL_NM: f64 = 0.5;
/// Altitude band treated as "same altitude".
pub const SAME_ALTITUDE_FT: f64 = 200.0;
/// Look-ahead for track intersection.
pub const CONVERGE_HORIZON_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    SimultaneousFinal,
    RunwayOccupied,
    WrongRunway,
    MidairConverging,
    WrongPatternDirection,
    ConvergingFinal,
    NordoTraffic,
    MissedPositionCall,
    VfrPatternInImc,
}

impl RuleKind {
    pub fn severity(self) -> SafetyLabel3 {
        match self {
            RuleKind::SimultaneousFinal
            | RuleKind::RunwayOccupied
            | RuleKind::WrongRunway
            | RuleKind::MidairConverging => SafetyLabel3::Hazard,
            _ => SafetyLabel3::Warning,
        }
    }
}

/// One fired rule: the first instant it fired for a given set of aircraft.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: RuleKind,
    pub t: f64,
    pub callsigns: Vec<Callsign>,
}

impl Finding {
    pub fn severity(&self) -> SafetyLabel3 {
        self.rule.severity()
    }
}

pub fn label_scenario(
    airfield: &Airfield,
    events: &[PositionEvent],
    aircraft: &[Aircraft],
    metar: &Metar,
) -> Result<SafetyLabel3, AirspaceError> {
    let findings = evaluate_rules(airfield, events, aircraft, metar)?;
    Ok(findings
        .iter()
        .map(Finding::severity)
        .max()
        .unwrap_or(SafetyLabel3::Nominal))
}

/// "Would an advisory flag this for any reason?"
pub fn any_flag(
    airfield: &Airfield,
    events: &[PositionEvent],
    aircraft: &[Aircraft],
    metar: &Metar,
) -> Result<bool, AirspaceError> {
    Ok(!evaluate_rules(airfield, events, aircraft, metar)?.is_empty())
}

#[derive(Debug, Clone, Copy)]
struct State {
    phase: PatternPhase,
    runway: Runway,
    alt_ft: f64,
    point: LocalPoint,
    velocity: LocalPoint,
}

struct Track<'a> {
    callsign: &'a Callsign,
    reports: Vec<&'a PositionEvent>,
}

impl Track<'_> {
    /// Latest report at or before `t` and the first report after it.
    fn bracket(&self, t: f64) -> Option<(&PositionEvent, Option<&PositionEvent>)> {
        let idx = self.reports.partition_point(|e| e.t <= t);
        if idx == 0 {
            return None;
        }
        Some((self.reports[idx - 1], self.reports.get(idx).copied()))
    }

    fn state(&self, airfield: &Airfield, t: f64) -> Option<State> {
        let (cur, next) = self.bracket(t)?;
        let frac = match next {
            Some(n) if n.t > cur.t => (t - cur.t) / (n.t - cur.t),
            _ => 0.0,
        };
        let lerp = |a: f64, b: f64| a + (b - a) * frac;
        let (alt, lat, lon) = match next {
            Some(n) => (
                lerp(cur.alt_ft, n.alt_ft),
                lerp(cur.lat, n.lat),
                lerp(cur.lon, n.lon),
            ),
            None => (cur.alt_ft, cur.lat, cur.lon),
        };
        Some(State {
            phase: cur.phase,
            runway: cur.runway,
            alt_ft: alt,
            point: airfield.to_local(super::LatLon::new(lat, lon)),
            velocity: LocalPoint::heading(cur.heading_deg).scale(cur.speed_kt / 3600.0),
        })
    }
}

fn validate<'a>(
    events: &'a [PositionEvent],
    aircraft: &'a [Aircraft],
) -> Result<BTreeMap<&'a Callsign, (&'a Aircraft, Track<'a>)>, AirspaceError> {
    if aircraft.is_empty() {
        return Err(AirspaceError::InvalidScenario("no aircraft".into()));
    }
    if events.is_empty() {
        return Err(AirspaceError::InvalidScenario("no position events".into()));
    }
    let mut tracks: BTreeMap<&Callsign, (&Aircraft, Track)> = BTreeMap::new();
    for ac in aircraft {
        if tracks
            .insert(
                &ac.callsign,
                (
                    ac,
                    Track {
                        callsign: &ac.callsign,
                        reports: Vec::new(),
                    },
                ),
            )
            .is_some()
        {
            return Err(AirspaceError::InvalidScenario(format!(
                "duplicate aircraft {}",
                ac.callsign
            )));
        }
    }
    for ev in events {
        let finite = [ev.t, ev.dist_nm, ev.alt_ft, ev.lat, ev.lon, ev.heading_deg, ev.speed_kt]
            .iter()
            .all(|v| v.is_finite());
        if !finite || ev.dist_nm < 0.0 || ev.speed_kt < 0.0 {
            return Err(AirspaceError::InvalidScenario(format!(
                "bad numeric field in report for {} at t={}",
                ev.callsign, ev.t
            )));
        }
        if ev.phase == PatternPhase::ShortFinal && ev.dist_nm > SHORT_FINAL_NM + 1e-9 {
            return Err(AirspaceError::InvalidScenario(format!(
                "{} reported short final at {} NM",
                ev.callsign, ev.dist_nm
            )));
        }
        let (ac, track) = tracks.get_mut(&ev.callsign).ok_or_else(|| {
            AirspaceError::InvalidScenario(format!("report for unknown aircraft {}", ev.callsign))
        })?;
        if ac.radio == RadioStatus::Nordo && ev.radio == RadioStatus::Radio {
            return Err(AirspaceError::InvalidScenario(format!(
                "NORDO aircraft {} cannot announce a position",
                ev.callsign
            )));
        }
        if track.reports.last().is_some_and(|prev| prev.t > ev.t) {
            return Err(AirspaceError::InvalidScenario(format!(
                "reports for {} are not time-ordered",
                ev.callsign
            )));
        }
        track.reports.push(ev);
    }
    Ok(tracks)
}

struct Collector {
    findings: Vec<Finding>,
}

impl Collector {
    fn add(&mut self, rule: RuleKind, t: f64, mut callsigns: Vec<Callsign>) {
        callsigns.sort();
        callsigns.dedup();
        if let Some(f) = self
            .findings
            .iter_mut()
            .find(|f| f.rule == rule && f.callsigns == callsigns)
        {
            if t < f.t {
                f.t = t;
            }
            return;
        }
        self.findings.push(Finding {
            rule,
            t,
            callsigns,
        });
    }
}

/// Every rule that fires, ordered by severity (hazards first), then time.
pub fn evaluate_rules(
    airfield: &Airfield,
    events: &[PositionEvent],
    aircraft: &[Aircraft],
    metar: &Metar,
) -> Result<Vec<Finding>, AirspaceError> {
    let tracks = validate(events, aircraft)?;
    let mut out = Collector {
        findings: Vec::new(),
    };

    let mut instants: Vec<f64> = events.iter().map(|e| e.t).collect();
    instants.sort_by(f64::total_cmp);
    instants.dedup();

    let list: Vec<&(&Aircraft, Track)> = tracks.values().collect();
    for (k, &t) in instants.iter().enumerate() {
        let states: Vec<Option<State>> = list.iter().map(|(_, tr)| tr.state(airfield, t)).collect();
        let next_t = instants.get(k + 1).copied();
        for i in 0..list.len() {
            let Some(a) = states[i] else { continue };
            for j in 0..list.len() {
                if i == j {
                    continue;
                }
                let Some(b) = states[j] else { continue };
                let pair = || vec![list[i].1.callsign.clone(), list[j].1.callsign.clone()];
                if a.phase == PatternPhase::OnRunway && b.phase == PatternPhase::ShortFinal {
                    out.add(RuleKind::RunwayOccupied, t, pair());
                }
                if j < i {
                    continue;
                }
                if a.phase.is_final() && b.phase.is_final() && a.runway == b.runway {
                    out.add(RuleKind::ConvergingFinal, t, pair());
                    if min_final_separation(&list[i].1, &list[j].1, t, next_t)
                        < SIMULTANEOUS_FINAL_NM
                    {
                        out.add(RuleKind::SimultaneousFinal, t, pair());
                    }
                }
                if a.phase.is_airborne()
                    && b.phase.is_airborne()
                    && (a.alt_ft - b.alt_ft).abs() <= SAME_ALTITUDE_FT
                    && converging(&a, &b)
                {
                    out.add(RuleKind::MidairConverging, t, pair());
                }
            }
        }
    }

    // Wrong-runway announcements while someone else is on an approach.
    for ev in events {
        if ev.radio != RadioStatus::Radio || ev.runway == airfield.runway {
            continue;
        }
        for (_, other) in tracks.values() {
            if other.callsign == &ev.callsign {
                continue;
            }
            if let Some(s) = other.state(airfield, ev.t) {
                if s.phase.is_final() {
                    out.add(
                        RuleKind::WrongRunway,
                        ev.t,
                        vec![ev.callsign.clone(), other.callsign.clone()],
                    );
                }
            }
        }
    }

    let imc = matches!(
        flight_category(metar),
        FlightCategory::Ifr | FlightCategory::Lifr
    );
    for (ac, track) in tracks.values() {
        let Some(first) = track.reports.first() else {
            continue;
        };
        if ac.radio == RadioStatus::Nordo {
            out.add(RuleKind::NordoTraffic, first.t, vec![ac.callsign.clone()]);
        }
        for ev in &track.reports {
            if ac.radio == RadioStatus::Radio && ev.radio == RadioStatus::Nordo {
                out.add(RuleKind::MissedPositionCall, ev.t, vec![ac.callsign.clone()]);
            }
            if ev.phase.is_pattern_leg() {
                if ev.pattern_side != airfield.pattern_side {
                    out.add(RuleKind::WrongPatternDirection, ev.t, vec![ac.callsign.clone()]);
                }
                if imc {
                    out.add(RuleKind::VfrPatternInImc, ev.t, vec![ac.callsign.clone()]);
                }
            }
        }
    }

    let mut findings = out.findings;
    findings.sort_by(|a, b| {
        b.severity()
            .cmp(&a.severity())
            .then(a.t.total_cmp(&b.t))
            .then(a.rule.cmp(&b.rule))
            .then(a.callsigns.cmp(&b.callsigns))
    });
    Ok(findings)
}

/// Minimum along-course separation on `[t, next_t]`, over which both
/// distance profiles are linear.
fn min_final_separation(
    a: &Track,
    b: &Track,
    t: f64,
    next_t: Option<f64>,
) -> f64 {
    let diff = |at: f64, left_of: Option<f64>| -> Option<f64> {
        let da = dist_left(a, at, left_of)?;
        let db = dist_left(b, at, left_of)?;
        Some(da - db)
    };
    let Some(d0) = diff(t, None) else {
        return f64::INFINITY;
    };
    match next_t.and_then(|n| diff(n, Some(t))) {
        Some(d1) if d0 * d1 <= 0.0 => 0.0,
        Some(d1) => d0.abs().min(d1.abs()),
        None => d0.abs(),
    }
}

/// Distance at `at`, evaluated on the interpolation segment that starts at
/// or before `seg_start` (the left limit when `at` is a later report time).
fn dist_left(track: &Track, at: f64, seg_start: Option<f64>) -> Option<f64> {
    let anchor = seg_start.unwrap_or(at);
    let (cur, next) = track.bracket(anchor)?;
    Some(match next {
        Some(n) if n.t > cur.t => {
            let frac = ((at - cur.t) / (n.t - cur.t)).min(1.0);
            cur.dist_nm + (n.dist_nm - cur.dist_nm) * frac
        }
        _ => cur.dist_nm,
    })
}

/// Range closing and the 60-second track segments cross.
fn converging(a: &State, b: &State) -> bool {
    let rel_p = a.point.sub(b.point);
    let rel_v = a.velocity.sub(b.velocity);
    if rel_p.dot(rel_v) >= 0.0 {
        return false;
    }
    let da = a.velocity.scale(CONVERGE_HORIZON_S);
    let db = b.velocity.scale(CONVERGE_HORIZON_S);
    let w = b.point.sub(a.point);
    let den = da.cross(db);
    if den.abs() > 1e-12 {
        let sa = w.cross(db) / den;
        let sb = w.cross(da) / den;
        return (0.0..=1.0).contains(&sa) && (0.0..=1.0).contains(&sb);
    }
    // Parallel tracks: they meet only if collinear with overlapping spans.
    let dir = if da.norm() > 0.0 { da } else { db };
    let len = dir.norm();
    if len == 0.0 || w.cross(dir).abs() / len > 1e-9 {
        return false;
    }
    let u = dir.scale(1.0 / len);
    let (a0, a1): (f64, f64) = (0.0, da.dot(u));
    let (b0, b1) = (w.dot(u), w.dot(u) + db.dot(u));
    a0.min(a1) <= b0.max(b1) && b0.min(b1) <= a0.max(a1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airspace::{PatternGeometry, PatternSide};
    use crate::metar::parse_metar;

    fn vfr() -> Metar {
        parse_metar("KHAF 010000Z 30008KT 10SM CLR 15/05 A3001").unwrap()
    }

    fn ac(cs: &str, radio: RadioStatus) -> Aircraft {
        Aircraft {
            callsign: Callsign::new(cs).unwrap(),
            type_name: "Cessna 172".into(),
            radio,
        }
    }

    struct Builder {
        g: PatternGeometry,
        events: Vec<PositionEvent>,
    }

    impl Builder {
        fn new() -> Self {
            Builder {
                g: Airfield::khaf().pattern(),
                events: Vec::new(),
            }
        }

        fn final_at(mut self, t: f64, cs: &str, phase: PatternPhase, d: f64) -> Self {
            let fix = self.g.final_fix(Runway(30), d);
            let alt = self.g.glide_alt_ft(d);
            let ev = self.g.event(t, &Callsign::new(cs).unwrap(), phase, fix, alt, 85.0,
                RadioStatus::Radio, Runway(30), PatternSide::Right);
            self.events.push(ev);
            self
        }

        fn leg(mut self, t: f64, cs: &str, phase: PatternPhase, frac: f64, side: PatternSide) -> Self {
            let rw = Runway(30);
            let fix = match phase {
                PatternPhase::Crosswind => self.g.crosswind_fix(rw, side, frac),
                PatternPhase::Downwind => self.g.downwind_fix(rw, side, frac),
                PatternPhase::Base => self.g.base_fix(rw, side, frac),
                PatternPhase::OnRunway => self.g.runway_fix(rw, frac),
                PatternPhase::ClearOfRunway => self.g.clear_fix(rw, side),
                _ => unreachable!(),
            };
            let alt = if phase.is_airborne() { self.g.pattern_alt_ft() } else { 66.0 };
            let ev = self.g.event(t, &Callsign::new(cs).unwrap(), phase, fix, alt, 80.0,
                RadioStatus::Radio, rw, side);
            self.events.push(ev);
            self
        }

        fn sorted(mut self) -> Vec<PositionEvent> {
            self.events.sort_by(|a, b| a.t.total_cmp(&b.t));
            self.events
        }
    }

    #[test]
    fn empty_events_rejected() {
        let af = Airfield::khaf();
        let err = label_scenario(&af, &[], &[ac("N1A", RadioStatus::Radio)], &vfr()).unwrap_err();
        assert!(matches!(err, AirspaceError::InvalidScenario(_)));
    }

    #[test]
    fn single_aircraft_full_pattern_is_nominal() {
        use PatternPhase::*;
        let ev = Builder::new()
            .leg(0.0, "N1A", Crosswind, 0.5, PatternSide::Right)
            .leg(10.0, "N1A", Downwind, 0.5, PatternSide::Right)
            .leg(20.0, "N1A", Base, 0.5, PatternSide::Right)
            .final_at(30.0, "N1A", Final, 1.4)
            .sorted();
        let af = Airfield::khaf();
        assert_eq!(
            label_scenario(&af, &ev, &[ac("N1A", RadioStatus::Radio)], &vfr()).unwrap(),
            SafetyLabel3::Nominal
        );
    }

    #[test]
    fn separated_finals_are_a_warning() {
        use PatternPhase::*;
        // Leader from 1.4 to 0.9 NM, follower from 2.6 to 2.1 NM: 1.2 NM apart throughout.
        let ev = Builder::new()
            .final_at(0.0, "N1A", Final, 1.4)
            .final_at(0.0, "N2B", StraightInFinal, 2.6)
            .final_at(20.0, "N1A", ShortFinal, 0.9)
            .final_at(20.0, "N2B", StraightInFinal, 2.1)
            .sorted();
        let af = Airfield::khaf();
        let acs = [ac("N1A", RadioStatus::Radio), ac("N2B", RadioStatus::Radio)];
        let findings = evaluate_rules(&af, &ev, &acs, &vfr()).unwrap();
        assert!(findings.iter().any(|f| f.rule == RuleKind::ConvergingFinal));
        assert_eq!(label_scenario(&af, &ev, &acs, &vfr()).unwrap(), SafetyLabel3::Warning);
    }

    #[test]
    fn crossing_between_reports_is_simultaneous_final() {
        use PatternPhase::*;
        // Endpoint separations are 0.6 NM but the profiles cross in between.
        let ev = Builder::new()
            .final_at(0.0, "N1A", StraightInFinal, 2.0)
            .final_at(0.0, "N2B", Final, 1.4)
            .final_at(30.0, "N1A", Final, 0.8)
            .final_at(30.0, "N2B", Final, 1.4)
            .sorted();
        let af = Airfield::khaf();
        let acs = [ac("N1A", RadioStatus::Radio), ac("N2B", RadioStatus::Radio)];
        let f = evaluate_rules(&af, &ev, &acs, &vfr()).unwrap();
        assert!(f.iter().any(|f| f.rule == RuleKind::SimultaneousFinal), "{f:?}");
    }

    #[test]
    fn runway_occupied_while_short_final() {
        use PatternPhase::*;
        let ev = Builder::new()
            .leg(0.0, "N1A", OnRunway, 0.3, PatternSide::Right)
            .final_at(0.0, "N2B", Final, 1.3)
            .final_at(10.0, "N2B", ShortFinal, 0.8)
            .sorted();
        let af = Airfield::khaf();
        let acs = [ac("N1A", RadioStatus::Radio), ac("N2B", RadioStatus::Radio)];
        let f = evaluate_rules(&af, &ev, &acs, &vfr()).unwrap();
        assert_eq!(f[0].rule, RuleKind::RunwayOccupied);
        assert_eq!(f[0].t, 10.0);
    }

    #[test]
    fn left_pattern_is_wrong_direction_warning() {
        use PatternPhase::*;
        let ev = Builder::new()
            .leg(0.0, "N1A", Downwind, 0.5, PatternSide::Left)
            .leg(10.0, "N1A", Base, 0.5, PatternSide::Left)
            .sorted();
        let af = Airfield::khaf();
        let acs = [ac("N1A", RadioStatus::Radio)];
        let f = evaluate_rules(&af, &ev, &acs, &vfr()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].rule, RuleKind::WrongPatternDirection);
    }

    #[test]
    fn nordo_aircraft_may_not_announce() {
        use PatternPhase::*;
        let ev = Builder::new().final_at(0.0, "N1A", Final, 1.2).sorted();
        let af = Airfield::khaf();
        let err = label_scenario(&af, &ev, &[ac("N1A", RadioStatus::Nordo)], &vfr());
        assert!(err.is_err());
    }

    #[test]
    fn unknown_callsign_rejected() {
        use PatternPhase::*;
        let ev = Builder::new().final_at(0.0, "N9Z", Final, 1.2).sorted();
        let af = Airfield::khaf();
        assert!(label_scenario(&af, &ev, &[ac("N1A", RadioStatus::Radio)], &vfr()).is_err());
    }

    #[test]
    fn pattern_work_in_imc_is_warning() {
        use PatternPhase::*;
        let imc = parse_metar("KHAF 010000Z 30005KT 2SM BR OVC006 12/11 A2990").unwrap();
        let ev = Builder::new()
            .leg(0.0, "N1A", Downwind, 0.5, PatternSide::Right)
            .sorted();
        let af = Airfield::khaf();
        let acs = [ac("N1A", RadioStatus::Radio)];
        assert_eq!(label_scenario(&af, &ev, &acs, &imc).unwrap(), SafetyLabel3::Warning);
        assert_eq!(label_scenario(&af, &ev, &acs, &vfr()).unwrap(), SafetyLabel3::Nominal);
    }

    #[test]
    fn crossing_tracks_at_same_altitude_converge() {
        let a = State {
            phase: PatternPhase::Downwind,
            runway: Runway(30),
            alt_ft: 1066.0,
            point: LocalPoint::new(0.0, 0.0),
            velocity: LocalPoint::new(0.025, 0.0),
        };
        let mut b = a;
        b.point = LocalPoint::new(0.75, -0.75);
        b.velocity = LocalPoint::new(0.0, 0.025);
        assert!(converging(&a, &b));
        // Diverging: same geometry flown backwards.
        b.velocity = LocalPoint::new(0.0, -0.025);
        assert!(!converging(&a, &b));
        // Head-on on one line.
        b.point = LocalPoint::new(1.0, 0.0);
        b.velocity = LocalPoint::new(-0.025, 0.0);
        assert!(converging(&a, &b));
    }
}
