//! Canonical rectangular-pattern geometry around one runway.
//!
//! Coordinates are local east/north nautical miles with the active-runway
//! landing threshold at the origin. A leg position is addressed by a
//! fraction of the leg flown, and every fix carries the leg's track.

use super::geo::{great_circle_nm, wrap_deg, LocalPoint};
use super::{Airfield, Callsign, PatternPhase, PatternSide, PositionEvent, RadioStatus, Runway};

/// Distance from the threshold at which short final begins.
pub const SHORT_FINAL_NM: f64 = 1.0;
/// Distance from the threshold of the base-to-final turn.
pub const FINAL_TURN_NM: f64 = 1.5;
const DOWNWIND_OFFSET_NM: f64 = 0.7;
const UPWIND_NM: f64 = 1.3;
const GLIDE_FT_PER_NM: f64 = 300.0;
const PATTERN_AGL_FT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fix {
    pub point: LocalPoint,
    pub heading_deg: f64,
}

#[derive(Debug, Clone)]
pub struct PatternGeometry {
    airfield: Airfield,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    threshold: LocalPoint,
    course: f64,
    side: f64,
}

impl Frame {
    fn along(&self) -> LocalPoint {
        LocalPoint::heading(self.course)
    }

    fn lateral(&self) -> LocalPoint {
        LocalPoint::heading(self.course + 90.0 * self.side)
    }

    fn at(&self, along: f64, lateral: f64) -> LocalPoint {
        self.threshold
            .add(self.along().scale(along))
            .add(self.lateral().scale(lateral))
    }
}

impl PatternGeometry {
    pub fn new(airfield: &Airfield) -> Self {
        PatternGeometry {
            airfield: airfield.clone(),
        }
    }

    pub fn airfield(&self) -> &Airfield {
        &self.airfield
    }

    fn frame(&self, runway: Runway, side: PatternSide) -> Frame {
        let active = &self.airfield;
        if runway == active.runway {
            Frame {
                threshold: LocalPoint::default(),
                course: active.runway_heading_deg,
                side: side.sign(),
            }
        } else {
            // Opposite end of the same strip.
            let far = LocalPoint::heading(active.runway_heading_deg).scale(active.runway_length_nm);
            Frame {
                threshold: far,
                course: wrap_deg(active.runway_heading_deg + 180.0),
                side: side.sign(),
            }
        }
    }

    pub fn threshold(&self, runway: Runway) -> LocalPoint {
        self.frame(runway, self.airfield.pattern_side).threshold
    }

    pub fn course(&self, runway: Runway) -> f64 {
        self.frame(runway, self.airfield.pattern_side).course
    }

    /// Point on the extended centreline `dist_nm` before the threshold.
    pub fn final_fix(&self, runway: Runway, dist_nm: f64) -> Fix {
        let f = self.frame(runway, PatternSide::Right);
        Fix {
            point: f.at(-dist_nm, 0.0),
            heading_deg: wrap_deg(f.course),
        }
    }

    /// Climb-out along the runway course, `along_nm` past the threshold.
    pub fn upwind_fix(&self, runway: Runway, along_nm: f64) -> Fix {
        let f = self.frame(runway, PatternSide::Right);
        Fix {
            point: f.at(along_nm, 0.0),
            heading_deg: wrap_deg(f.course),
        }
    }

    pub fn runway_fix(&self, runway: Runway, fraction: f64) -> Fix {
        let f = self.frame(runway, PatternSide::Right);
        Fix {
            point: f.at(fraction.clamp(0.0, 1.0) * self.airfield.runway_length_nm, 0.0),
            heading_deg: wrap_deg(f.course),
        }
    }

    pub fn clear_fix(&self, runway: Runway, side: PatternSide) -> Fix {
        let f = self.frame(runway, side);
        Fix {
            point: f.at(0.6 * self.airfield.runway_length_nm, -0.04),
            heading_deg: wrap_deg(f.course - 90.0 * f.side),
        }
    }

    pub fn crosswind_fix(&self, runway: Runway, side: PatternSide, fraction: f64) -> Fix {
        let f = self.frame(runway, side);
        Fix {
            point: f.at(UPWIND_NM, DOWNWIND_OFFSET_NM * fraction.clamp(0.0, 1.0)),
            heading_deg: wrap_deg(f.course + 90.0 * f.side),
        }
    }

    pub fn downwind_fix(&self, runway: Runway, side: PatternSide, fraction: f64) -> Fix {
        let f = self.frame(runway, side);
        let along = UPWIND_NM - fraction.clamp(0.0, 1.0) * (UPWIND_NM + FINAL_TURN_NM);
        Fix {
            point: f.at(along, DOWNWIND_OFFSET_NM),
            heading_deg: wrap_deg(f.course + 180.0),
        }
    }

    pub fn base_fix(&self, runway: Runway, side: PatternSide, fraction: f64) -> Fix {
        let f = self.frame(runway, side);
        Fix {
            point: f.at(
                -FINAL_TURN_NM,
                DOWNWIND_OFFSET_NM * (1.0 - fraction.clamp(0.0, 1.0)),
            ),
            heading_deg: wrap_deg(f.course + 180.0 + 90.0 * f.side),
        }
    }

    pub fn pattern_alt_ft(&self) -> f64 {
        self.airfield.field_elev_ft + PATTERN_AGL_FT
    }

    /// Altitude on a 3-degree-ish glide path at `dist_nm` from the threshold.
    pub fn glide_alt_ft(&self, dist_nm: f64) -> f64 {
        self.airfield.field_elev_ft + GLIDE_FT_PER_NM * dist_nm.max(0.0)
    }

    pub fn dist_to_threshold(&self, runway: Runway, point: LocalPoint) -> f64 {
        let thr = self.airfield.to_latlon(self.threshold(runway));
        great_circle_nm(thr, self.airfield.to_latlon(point))
    }

    /// Materialise a position report at `fix`.
    #[allow(clippy::too_many_arguments)]
    pub fn event(
        &self,
        t: f64,
        callsign: &Callsign,
        phase: PatternPhase,
        fix: Fix,
        alt_ft: f64,
        speed_kt: f64,
        radio: RadioStatus,
        runway: Runway,
        side: PatternSide,
    ) -> PositionEvent {
        let ll = self.airfield.to_latlon(fix.point);
        let dist = match phase {
            // On the centreline the along-track distance is the reported one.
            p if p.is_final() => (-fix.point.sub(self.threshold(runway)).dot(LocalPoint::heading(
                self.course(runway),
            )))
            .max(0.0),
            _ => self.dist_to_threshold(runway, fix.point),
        };
        PositionEvent {
            t,
            callsign: callsign.clone(),
            phase,
            dist_nm: round_to(dist, 0.01),
            alt_ft: alt_ft.round(),
            radio,
            runway,
            pattern_side: side,
            lat: round_to(ll.lat, 1e-6),
            lon: round_to(ll.lon, 1e-6),
            heading_deg: wrap_deg(fix.heading_deg.round()),
            speed_kt: speed_kt.round(),
        }
    }
}

pub(crate) fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}
