//! Traffic-pattern domain model for a single-runway non-towered airfield and
//! the rule engine that assigns ground-truth safety labels.

mod geo;
mod pattern;
mod rules;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geo::{great_circle_nm, LatLon, LocalPoint, EARTH_RADIUS_NM};
pub use pattern::{Fix, PatternGeometry, FINAL_TURN_NM, SHORT_FINAL_NM};
pub(crate) use pattern::round_to;
pub use rules::{
    any_flag, evaluate_rules, label_scenario, Finding, RuleKind, CONVERGE_HORIZON_S,
    SAME_ALTITUDE_FT, SIMULTANEOUS_FINAL_NM,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AirspaceError {
    #[error("invalid callsign {0:?}: expected N followed by 1-5 letters or digits")]
    InvalidCallsign(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown {kind} {value:?}")]
    UnknownName { kind: &'static str, value: String },
}

/// US civil registration mark, e.g. `N910YZ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Callsign(String);

impl Callsign {
    pub fn new(raw: &str) -> Result<Self, AirspaceError> {
        let upper = raw.trim().to_ascii_uppercase();
        let rest = upper
            .strip_prefix('N')
            .ok_or_else(|| AirspaceError::InvalidCallsign(raw.to_string()))?;
        if rest.is_empty() || rest.len() > 5 || !rest.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(AirspaceError::InvalidCallsign(raw.to_string()));
        }
        Ok(Callsign(upper))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Callsign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Callsign {
    type Err = AirspaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Callsign::new(s)
    }
}

impl TryFrom<String> for Callsign {
    type Error = AirspaceError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Callsign::new(&value)
    }
}

impl From<Callsign> for String {
    fn from(c: Callsign) -> String {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSide {
    Left,
    Right,
}

impl PatternSide {
    /// +1 for right traffic (right turns), -1 for left.
    pub fn sign(self) -> f64 {
        match self {
            PatternSide::Right => 1.0,
            PatternSide::Left => -1.0,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            PatternSide::Left => "left",
            PatternSide::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RadioStatus {
    #[serde(alias = "radio", alias = "equipped", alias = "EQUIPPED")]
    Radio,
    #[serde(alias = "nordo")]
    Nordo,
}

impl RadioStatus {
    pub fn is_radio(self) -> bool {
        self == RadioStatus::Radio
    }

    pub fn word(self) -> &'static str {
        match self {
            RadioStatus::Radio => "radio",
            RadioStatus::Nordo => "NORDO",
        }
    }
}

/// Runway end designator, e.g. `30` or `12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Runway(pub u8);

impl Runway {
    pub fn reciprocal(self) -> Runway {
        let r = (self.0 + 18) % 36;
        Runway(if r == 0 { 36 } else { r })
    }

    /// Magnetic-rounded course implied by the designator.
    pub fn course_deg(self) -> f64 {
        (f64::from(self.0) * 10.0) % 360.0
    }
}

impl fmt::Display for Runway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airfield {
    pub icao_id: String,
    pub name: String,
    pub runway: Runway,
    pub runway_heading_deg: f64,
    pub runway_length_nm: f64,
    pub pattern_side: PatternSide,
    pub field_elev_ft: f64,
    /// Landing threshold of the active runway.
    pub lat: f64,
    pub lon: f64,
}

impl Airfield {
    /// Half Moon Bay, runway 30, right traffic.
    pub fn khaf() -> Self {
        Airfield {
            icao_id: "KHAF".to_string(),
            name: "Half Moon Bay".to_string(),
            runway: Runway(30),
            runway_heading_deg: 300.0,
            runway_length_nm: 0.82,
            pattern_side: PatternSide::Right,
            field_elev_ft: 66.0,
            lat: 37.5134,
            lon: -122.5008,
        }
    }

    pub fn threshold(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }

    pub fn pattern(&self) -> PatternGeometry {
        PatternGeometry::new(self)
    }

    pub fn to_local(&self, p: LatLon) -> LocalPoint {
        geo::to_local(self.threshold(), p)
    }

    pub fn to_latlon(&self, p: LocalPoint) -> LatLon {
        geo::from_local(self.threshold(), p)
    }

    pub fn validate(&self) -> Result<(), AirspaceError> {
        if !(0.0..360.0).contains(&self.runway_heading_deg) {
            return Err(AirspaceError::InvalidScenario(format!(
                "runway heading {} outside [0, 360)",
                self.runway_heading_deg
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aircraft {
    pub callsign: Callsign,
    pub type_name: String,
    pub radio: RadioStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdsbState {
    pub callsign: Callsign,
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt_msl_ft: f64,
    pub heading_deg: f64,
    pub speed_kt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternPhase {
    Crosswind,
    Downwind,
    Base,
    Final,
    ShortFinal,
    StraightInFinal,
    GoAround,
    OnRunway,
    ClearOfRunway,
    Departure,
}

impl PatternPhase {
    pub const ALL: [PatternPhase; 10] = [
        PatternPhase::Crosswind,
        PatternPhase::Downwind,
        PatternPhase::Base,
        PatternPhase::Final,
        PatternPhase::ShortFinal,
        PatternPhase::StraightInFinal,
        PatternPhase::GoAround,
        PatternPhase::OnRunway,
        PatternPhase::ClearOfRunway,
        PatternPhase::Departure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternPhase::Crosswind => "crosswind",
            PatternPhase::Downwind => "downwind",
            PatternPhase::Base => "base",
            PatternPhase::Final => "final",
            PatternPhase::ShortFinal => "short_final",
            PatternPhase::StraightInFinal => "straight_in_final",
            PatternPhase::GoAround => "go_around",
            PatternPhase::OnRunway => "on_runway",
            PatternPhase::ClearOfRunway => "clear_of_runway",
            PatternPhase::Departure => "departure",
        }
    }

    /// Final, short final or straight-in final: an active approach.
    pub fn is_final(self) -> bool {
        matches!(
            self,
            PatternPhase::Final | PatternPhase::ShortFinal | PatternPhase::StraightInFinal
        )
    }

    /// Rectangular-pattern legs flown under visual rules.
    pub fn is_pattern_leg(self) -> bool {
        matches!(
            self,
            PatternPhase::Crosswind | PatternPhase::Downwind | PatternPhase::Base
        )
    }

    pub fn is_airborne(self) -> bool {
        !matches!(self, PatternPhase::OnRunway | PatternPhase::ClearOfRunway)
    }
}

impl fmt::Display for PatternPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternPhase {
    type Err = AirspaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternPhase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AirspaceError::UnknownName {
                kind: "phase",
                value: s.to_string(),
            })
    }
}

/// One reported position of one aircraft.
///
/// `radio` records whether the position was announced on frequency; for a
/// radio-equipped aircraft a `Nordo` event is a missed position call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionEvent {
    pub t: f64,
    pub callsign: Callsign,
    pub phase: PatternPhase,
    pub dist_nm: f64,
    pub alt_ft: f64,
    pub radio: RadioStatus,
    pub runway: Runway,
    pub pattern_side: PatternSide,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
    pub speed_kt: f64,
}

impl PositionEvent {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SafetyLabel3 {
    Nominal,
    Warning,
    Hazard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SafetyLabelBinary {
    Nominal,
    Danger,
}

impl SafetyLabel3 {
    pub const ALL: [SafetyLabel3; 3] = [
        SafetyLabel3::Nominal,
        SafetyLabel3::Warning,
        SafetyLabel3::Hazard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SafetyLabel3::Nominal => "nominal",
            SafetyLabel3::Warning => "warning",
            SafetyLabel3::Hazard => "hazard",
        }
    }
}

impl SafetyLabelBinary {
    pub const ALL: [SafetyLabelBinary; 2] = [SafetyLabelBinary::Nominal, SafetyLabelBinary::Danger];

    pub fn as_str(self) -> &'static str {
        match self {
            SafetyLabelBinary::Nominal => "nominal",
            SafetyLabelBinary::Danger => "danger",
        }
    }
}

impl fmt::Display for SafetyLabel3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SafetyLabelBinary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SafetyLabel3 {
    type Err = AirspaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SafetyLabel3::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AirspaceError::UnknownName {
                kind: "label",
                value: s.to_string(),
            })
    }
}

impl FromStr for SafetyLabelBinary {
    type Err = AirspaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SafetyLabelBinary::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AirspaceError::UnknownName {
                kind: "label",
                value: s.to_string(),
            })
    }
}

pub fn collapse_to_binary(label: SafetyLabel3) -> SafetyLabelBinary {
    match label {
        SafetyLabel3::Nominal => SafetyLabelBinary::Nominal,
        SafetyLabel3::Warning | SafetyLabel3::Hazard => SafetyLabelBinary::Danger,
    }
}

impl From<SafetyLabel3> for SafetyLabelBinary {
    fn from(l: SafetyLabel3) -> Self {
        collapse_to_binary(l)
    }
}

/// The twelve scenario categories of the benchmark taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardType {
    NominalSingleAircraft,
    NominalInstrumentApproach,
    SilentTraffic,
    MissingPositionCalls,
    WrongPatternDirection,
    ConvergingFinalSeparated,
    VfrIntoImc,
    SimultaneousFinal,
    RunwayIncursionRisk,
    GoAroundConflict,
    WrongRunwayCall,
    MidairConvergingAltitude,
}

impl HazardType {
    pub const ALL: [HazardType; 12] = [
        HazardType::NominalSingleAircraft,
        HazardType::NominalInstrumentApproach,
        HazardType::SilentTraffic,
        HazardType::MissingPositionCalls,
        HazardType::WrongPatternDirection,
        HazardType::ConvergingFinalSeparated,
        HazardType::VfrIntoImc,
        HazardType::SimultaneousFinal,
        HazardType::RunwayIncursionRisk,
        HazardType::GoAroundConflict,
        HazardType::WrongRunwayCall,
        HazardType::MidairConvergingAltitude,
    ];

    pub fn label(self) -> SafetyLabel3 {
        use HazardType::*;
        match self {
            NominalSingleAircraft | NominalInstrumentApproach => SafetyLabel3::Nominal,
            SilentTraffic | MissingPositionCalls | WrongPatternDirection
            | ConvergingFinalSeparated | VfrIntoImc => SafetyLabel3::Warning,
            SimultaneousFinal | RunwayIncursionRisk | GoAroundConflict | WrongRunwayCall
            | MidairConvergingAltitude => SafetyLabel3::Hazard,
        }
    }

    /// Members of one class, in taxonomy order.
    pub fn of_class(label: SafetyLabel3) -> Vec<HazardType> {
        HazardType::ALL
            .into_iter()
            .filter(|h| h.label() == label)
            .collect()
    }

    /// Categories whose defining feature is absent or silent radio traffic.
    pub fn is_communication_gap(self) -> bool {
        matches!(
            self,
            HazardType::SilentTraffic | HazardType::MissingPositionCalls | HazardType::GoAroundConflict
        )
    }

    pub fn as_str(self) -> &'static str {
        use HazardType::*;
        match self {
            NominalSingleAircraft => "nominal_single_aircraft",
            NominalInstrumentApproach => "nominal_instrument_approach",
            SilentTraffic => "silent_traffic",
            MissingPositionCalls => "missing_position_calls",
            WrongPatternDirection => "wrong_pattern_direction",
            ConvergingFinalSeparated => "converging_final_separated",
            VfrIntoImc => "vfr_into_imc",
            SimultaneousFinal => "simultaneous_final",
            RunwayIncursionRisk => "runway_incursion_risk",
            GoAroundConflict => "go_around_conflict",
            WrongRunwayCall => "wrong_runway_call",
            MidairConvergingAltitude => "midair_converging_altitude",
        }
    }
}

impl fmt::Display for HazardType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HazardType {
    type Err = AirspaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HazardType::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| AirspaceError::UnknownName {
                kind: "hazard type",
                value: s.to_string(),
            })
    }
}
