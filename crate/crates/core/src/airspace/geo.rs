use serde::{Deserialize, Serialize};

/// Mean Earth radius in nautical miles.
pub const EARTH_RADIUS_NM: f64 = 3440.065;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }
}

/// Haversine distance in nautical miles.
pub fn great_circle_nm(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_NM * h.sqrt().min(1.0).asin()
}

/// East/north offset in nautical miles from a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
}

impl LocalPoint {
    pub fn new(x: f64, y: f64) -> Self {
        LocalPoint { x, y }
    }

    /// Unit vector along a true course.
    pub fn heading(deg: f64) -> Self {
        let r = deg.to_radians();
        LocalPoint::new(r.sin(), r.cos())
    }

    pub fn add(self, o: LocalPoint) -> LocalPoint {
        LocalPoint::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: LocalPoint) -> LocalPoint {
        LocalPoint::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> LocalPoint {
        LocalPoint::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: LocalPoint) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: LocalPoint) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

const NM_PER_DEG_LAT: f64 = 60.0;

pub(crate) fn to_local(origin: LatLon, p: LatLon) -> LocalPoint {
    let k = NM_PER_DEG_LAT * origin.lat.to_radians().cos();
    LocalPoint::new((p.lon - origin.lon) * k, (p.lat - origin.lat) * NM_PER_DEG_LAT)
}

pub(crate) fn from_local(origin: LatLon, p: LocalPoint) -> LatLon {
    let k = NM_PER_DEG_LAT * origin.lat.to_radians().cos();
    LatLon::new(origin.lat + p.y / NM_PER_DEG_LAT, origin.lon + p.x / k)
}

/// Normalise a heading into [0, 360).
pub(crate) fn wrap_deg(h: f64) -> f64 {
    let w = h.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        let p = LatLon::new(37.4967, -122.4644);
        assert_eq!(great_circle_nm(p, p), 0.0);
    }

    #[test]
    fn sample_pair_separation() {
        // Flat-earth cross-check: 0.018 deg of latitude and 0.0112 deg of
        // longitude scaled by cos(37.5 deg): sqrt(1.080^2 + 0.533^2) = 1.204.
        let a = LatLon::new(37.4967, -122.4644);
        let b = LatLon::new(37.5147, -122.4756);
        let d = great_circle_nm(a, b);
        assert!((d - 1.20).abs() <= 0.02, "{d}");
        assert_eq!(d, great_circle_nm(b, a));
    }

    #[test]
    fn one_degree_of_latitude() {
        let d = great_circle_nm(LatLon::new(37.0, -122.0), LatLon::new(38.0, -122.0));
        assert!((d - 60.0).abs() <= 0.1, "{d}");
    }

    #[test]
    fn local_projection_round_trip() {
        let o = LatLon::new(37.5134, -122.5008);
        let p = LatLon::new(37.4967, -122.4644);
        let q = from_local(o, to_local(o, p));
        assert!((q.lat - p.lat).abs() < 1e-12 && (q.lon - p.lon).abs() < 1e-12);
        let local = to_local(o, p).norm();
        assert!((local - great_circle_nm(o, p)).abs() < 0.005);
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_deg(-60.0), 300.0);
        assert_eq!(wrap_deg(480.0), 120.0);
        assert_eq!(wrap_deg(360.0), 0.0);
    }
}
