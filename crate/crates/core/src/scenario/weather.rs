//! KHAF-flavoured METAR sampling by flight-category family.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::airspace::HazardType;
use crate::metar::{flight_category, parse_metar, FlightCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeatherFamily {
    /// VFR or MVFR, 3:1.
    Visual,
    /// IFR or LIFR, evenly.
    Instrument,
}

impl WeatherFamily {
    pub fn for_hazard(h: HazardType) -> Self {
        if h == HazardType::VfrIntoImc {
            WeatherFamily::Instrument
        } else {
            WeatherFamily::Visual
        }
    }
}

fn wind<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.1) {
        return "00000KT".into();
    }
    // Onshore flow dominates at the coast.
    let dir = rng.gen_range(22..=32) * 10;
    let speed = rng.gen_range(3..=16);
    if speed >= 10 && rng.gen_bool(0.3) {
        format!("{dir:03}{speed:02}G{:02}KT", speed + rng.gen_range(6..=10))
    } else {
        format!("{dir:03}{speed:02}KT")
    }
}

fn temps<R: Rng>(rng: &mut R, saturated: bool) -> String {
    let t: i16 = rng.gen_range(8..=22);
    let spread = if saturated { rng.gen_range(0..=2) } else { rng.gen_range(2..=9) };
    let d = t - spread;
    let fmt = |v: i16| if v < 0 { format!("M{:02}", -v) } else { format!("{v:02}") };
    format!("{}/{}", fmt(t), fmt(d))
}

fn layers<R: Rng>(rng: &mut R, ceiling: Option<u32>, cov: &str) -> String {
    match ceiling {
        None => match rng.gen_range(0..3) {
            0 => "CLR".into(),
            1 => format!("FEW{:03}", rng.gen_range(35..=120)),
            _ => format!("SCT{:03}", rng.gen_range(40..=100)),
        },
        Some(c) => {
            let below = c / 100;
            if below > 4 && rng.gen_bool(0.5) {
                format!("FEW{:03} {cov}{:03}", rng.gen_range(2..below), below)
            } else {
                format!("{cov}{below:03}")
            }
        }
    }
}

fn draw<R: Rng>(rng: &mut R, cat: FlightCategory) -> String {
    let day = rng.gen_range(1..=28);
    let hour = rng.gen_range(14..=23);
    let minute = *[15u8, 35, 55].choose(rng).expect("non-empty");
    let (vis, wx, ceiling, cov): (String, Option<&str>, Option<u32>, &str) = match cat {
        FlightCategory::Vfr => {
            let vis = if rng.gen_bool(0.5) { "10SM" } else { "P6SM" };
            let ceiling = rng.gen_bool(0.3).then(|| rng.gen_range(35..=80) * 100);
            (vis.into(), None, ceiling, "BKN")
        }
        FlightCategory::Mvfr => {
            if rng.gen_bool(0.5) {
                let vis = rng.gen_range(3..=5);
                let wx = *["-BR", "BR", "HZ"].choose(rng).expect("non-empty");
                let ceiling = rng.gen_bool(0.6).then(|| rng.gen_range(10..=30) * 100);
                (format!("{vis}SM"), Some(wx), ceiling, "BKN")
            } else {
                let cov = if rng.gen_bool(0.5) { "BKN" } else { "OVC" };
                ("10SM".into(), None, Some(rng.gen_range(10..=30) * 100), cov)
            }
        }
        FlightCategory::Ifr => {
            let cov = if rng.gen_bool(0.5) { "BKN" } else { "OVC" };
            if rng.gen_bool(0.5) {
                let vis = *["1SM", "1 1/2SM", "2SM", "2 1/2SM"].choose(rng).expect("non-empty");
                (vis.into(), Some("BR"), Some(rng.gen_range(6..=9) * 100), cov)
            } else {
                ("4SM".into(), Some("BR"), Some(rng.gen_range(5..=9) * 100), cov)
            }
        }
        FlightCategory::Lifr => {
            let vis = *["1/4SM", "1/2SM", "3/4SM"].choose(rng).expect("non-empty");
            let cov = if rng.gen_bool(0.3) { "VV" } else { "OVC" };
            (vis.into(), Some("FG"), Some(rng.gen_range(1..=4) * 100), cov)
        }
    };
    let saturated = wx.is_some();
    let mut parts = vec![
        "KHAF".to_string(),
        format!("{day:02}{hour:02}{minute:02}Z"),
        "AUTO".to_string(),
        wind(rng),
        vis,
    ];
    if let Some(w) = wx {
        parts.push(w.to_string());
    }
    parts.push(layers(rng, ceiling, cov));
    parts.push(temps(rng, saturated));
    parts.push(format!("A{}", rng.gen_range(2985..=3030)));
    parts.push("RMK AO2".into());
    parts.join(" ")
}

/// Raw METAR whose flight category belongs to `family`.
pub fn sample_metar<R: Rng>(rng: &mut R, family: WeatherFamily) -> String {
    let cat = match family {
        WeatherFamily::Visual => {
            if rng.gen_bool(0.75) {
                FlightCategory::Vfr
            } else {
                FlightCategory::Mvfr
            }
        }
        WeatherFamily::Instrument => {
            if rng.gen_bool(0.5) {
                FlightCategory::Ifr
            } else {
                FlightCategory::Lifr
            }
        }
    };
    let raw = draw(rng, cat);
    debug_assert_eq!(
        parse_metar(&raw).map(|m| flight_category(&m)),
        Ok(cat),
        "{raw}"
    );
    raw
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn families_land_in_their_categories() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut vfr, mut mvfr) = (0, 0);
        for _ in 0..2000 {
            let raw = sample_metar(&mut rng, WeatherFamily::Visual);
            let m = parse_metar(&raw).unwrap();
            assert_eq!(m.to_string(), raw);
            match flight_category(&m) {
                FlightCategory::Vfr => vfr += 1,
                FlightCategory::Mvfr => mvfr += 1,
                other => panic!("{raw} is {other}"),
            }
            let raw = sample_metar(&mut rng, WeatherFamily::Instrument);
            let cat = flight_category(&parse_metar(&raw).unwrap());
            assert!(matches!(cat, FlightCategory::Ifr | FlightCategory::Lifr), "{raw}");
        }
        let share = f64::from(vfr) / f64::from(vfr + mvfr);
        assert!((share - 0.75).abs() < 0.04, "{share}");
    }
}
