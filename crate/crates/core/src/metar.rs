//! METAR parsing, canonical re-emission, plain-English decoding and flight
//! category.
//!
//! Recognised body groups, in canonical order: station, `DDHHMMZ`, `AUTO` or
//! `COR`, wind, variable-direction range, visibility (statute miles, with
//! `M`/`P` qualifiers and mixed fractions), weather, cloud layers,
//! temperature/dewpoint, altimeter. Unrecognised body groups are kept in
//! order in [`Metar::extra`] and re-emitted after the altimeter; everything
//! after `RMK` is kept verbatim.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetarError {
    #[error("empty METAR")]
    Empty,
    #[error("malformed {group} group {token:?} at byte {offset}")]
    Malformed {
        group: &'static str,
        token: String,
        offset: usize,
    },
    #[error("missing {0} group")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationTime {
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindDirection {
    Degrees(u16),
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wind {
    pub direction: WindDirection,
    pub speed_kt: u16,
    pub gust_kt: Option<u16>,
    /// `dddVddd` range group following the wind.
    pub variable_from_to: Option<(u16, u16)>,
}

impl Wind {
    pub fn is_calm(&self) -> bool {
        self.speed_kt == 0 && self.gust_kt.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VisibilityQualifier {
    Exact,
    LessThan,
    MoreThan,
}

/// Statute-mile visibility kept as a mixed fraction for exact re-emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visibility {
    pub whole: u16,
    pub fraction: Option<(u16, u16)>,
    pub qualifier: VisibilityQualifier,
}

impl Visibility {
    pub fn whole_miles(sm: u16) -> Self {
        Visibility {
            whole: sm,
            fraction: None,
            qualifier: VisibilityQualifier::Exact,
        }
    }

    pub fn statute_miles(&self) -> f64 {
        let frac = self
            .fraction
            .map(|(n, d)| f64::from(n) / f64::from(d))
            .unwrap_or(0.0);
        f64::from(self.whole) + frac
    }

    fn amount_text(&self) -> String {
        match (self.whole, self.fraction) {
            (w, None) => w.to_string(),
            (0, Some((n, d))) => format!("{n}/{d}"),
            (w, Some((n, d))) => format!("{w} {n}/{d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intensity {
    Light,
    Moderate,
    Heavy,
    Vicinity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeatherPhenomenon {
    pub intensity: Intensity,
    /// Descriptor and phenomenon codes, e.g. `BR`, `TSRA`, `SH`.
    pub code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloudCoverage {
    Skc,
    Clr,
    Few,
    Sct,
    Bkn,
    Ovc,
    /// Indefinite ceiling (`VV`); counts as a ceiling.
    VerticalVisibility,
}

impl CloudCoverage {
    fn code(self) -> &'static str {
        match self {
            CloudCoverage::Skc => "SKC",
            CloudCoverage::Clr => "CLR",
            CloudCoverage::Few => "FEW",
            CloudCoverage::Sct => "SCT",
            CloudCoverage::Bkn => "BKN",
            CloudCoverage::Ovc => "OVC",
            CloudCoverage::VerticalVisibility => "VV",
        }
    }

    pub fn is_ceiling(self) -> bool {
        matches!(
            self,
            CloudCoverage::Bkn | CloudCoverage::Ovc | CloudCoverage::VerticalVisibility
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudLayer {
    pub coverage: CloudCoverage,
    pub base_ft_agl: Option<u32>,
    /// `CB` or `TCU` suffix.
    pub convective: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metar {
    pub station: String,
    pub time: ObservationTime,
    pub auto: bool,
    pub corrected: bool,
    pub wind: Option<Wind>,
    pub visibility: Option<Visibility>,
    pub weather: Vec<WeatherPhenomenon>,
    pub clouds: Vec<CloudLayer>,
    pub temp_c: Option<i16>,
    pub dewpoint_c: Option<i16>,
    /// Hundredths of inHg: `A2999` is 2999.
    pub altimeter_hundredths: Option<u16>,
    pub extra: Vec<String>,
    pub remarks: Option<String>,
}

impl Metar {
    pub fn altimeter_inhg(&self) -> Option<f64> {
        self.altimeter_hundredths.map(|a| f64::from(a) / 100.0)
    }

    pub fn visibility_sm(&self) -> Option<f64> {
        self.visibility.map(|v| v.statute_miles())
    }

    /// Lowest broken, overcast or vertical-visibility base.
    pub fn ceiling_ft(&self) -> Option<u32> {
        self.clouds
            .iter()
            .filter(|c| c.coverage.is_ceiling())
            .filter_map(|c| c.base_ft_agl)
            .min()
    }

    fn ceiling_layer(&self) -> Option<&CloudLayer> {
        self.clouds
            .iter()
            .filter(|c| c.coverage.is_ceiling() && c.base_ft_agl.is_some())
            .min_by_key(|c| c.base_ft_agl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlightCategory {
    Lifr,
    Ifr,
    Mvfr,
    Vfr,
}

impl FlightCategory {
    pub fn long_name(self) -> &'static str {
        match self {
            FlightCategory::Vfr => "VFR",
            FlightCategory::Mvfr => "Marginal VFR",
            FlightCategory::Ifr => "IFR",
            FlightCategory::Lifr => "Low IFR",
        }
    }
}

impl fmt::Display for FlightCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlightCategory::Vfr => "VFR",
            FlightCategory::Mvfr => "MVFR",
            FlightCategory::Ifr => "IFR",
            FlightCategory::Lifr => "LIFR",
        })
    }
}

pub fn flight_category(m: &Metar) -> FlightCategory {
    let vis = m.visibility_sm().unwrap_or(f64::INFINITY);
    let ceiling = m.ceiling_ft().map(f64::from).unwrap_or(f64::INFINITY);
    if vis < 1.0 || ceiling < 500.0 {
        FlightCategory::Lifr
    } else if vis < 3.0 || ceiling < 1000.0 {
        FlightCategory::Ifr
    } else if vis <= 5.0 || ceiling <= 3000.0 {
        FlightCategory::Mvfr
    } else {
        FlightCategory::Vfr
    }
}

struct Token<'a> {
    text: &'a str,
    offset: usize,
}

fn tokenize(raw: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in raw.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &raw[s..i],
                    offset: s,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &raw[s..],
            offset: s,
        });
    }
    out
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
    if digits(s) {
        s.parse().ok()
    } else {
        None
    }
}

fn malformed(group: &'static str, tok: &Token) -> MetarError {
    MetarError::Malformed {
        group,
        token: tok.text.to_string(),
        offset: tok.offset,
    }
}

fn parse_time(tok: &Token) -> Result<ObservationTime, MetarError> {
    let t = tok.text;
    let body = t.strip_suffix('Z').filter(|b| b.len() == 6 && digits(b));
    let body = body.ok_or_else(|| malformed("time", tok))?;
    let day: u8 = body[0..2].parse().map_err(|_| malformed("time", tok))?;
    let hour: u8 = body[2..4].parse().map_err(|_| malformed("time", tok))?;
    let minute: u8 = body[4..6].parse().map_err(|_| malformed("time", tok))?;
    if !(1..=31).contains(&day) || hour > 23 || minute > 59 {
        return Err(malformed("time", tok));
    }
    Ok(ObservationTime { day, hour, minute })
}

fn parse_wind(tok: &Token) -> Result<Wind, MetarError> {
    let body = tok.text.strip_suffix("KT").ok_or_else(|| malformed("wind", tok))?;
    if body.len() < 5 || !body.is_ascii() {
        return Err(malformed("wind", tok));
    }
    let (dir_s, rest) = body.split_at(3);
    let direction = if dir_s == "VRB" {
        WindDirection::Variable
    } else {
        let d: u16 = num(dir_s).ok_or_else(|| malformed("wind", tok))?;
        if d > 360 {
            return Err(malformed("wind", tok));
        }
        WindDirection::Degrees(d)
    };
    let (speed_s, gust_s) = match rest.split_once('G') {
        Some((s, g)) => (s, Some(g)),
        None => (rest, None),
    };
    if !(2..=3).contains(&speed_s.len()) {
        return Err(malformed("wind", tok));
    }
    let speed_kt = num(speed_s).ok_or_else(|| malformed("wind", tok))?;
    let gust_kt = match gust_s {
        Some(g) if (2..=3).contains(&g.len()) => Some(num(g).ok_or_else(|| malformed("wind", tok))?),
        Some(_) => return Err(malformed("wind", tok)),
        None => None,
    };
    Ok(Wind {
        direction,
        speed_kt,
        gust_kt,
        variable_from_to: None,
    })
}

fn parse_variable_range(t: &str) -> Option<(u16, u16)> {
    if t.len() != 7 || t.as_bytes().get(3) != Some(&b'V') {
        return None;
    }
    let a = num(&t[0..3])?;
    let b = num(&t[4..7])?;
    Some((a, b))
}

fn parse_fraction(s: &str) -> Option<(u16, u16)> {
    let (n, d) = s.split_once('/')?;
    let n: u16 = num(n)?;
    let d: u16 = num(d)?;
    (d != 0 && n < d).then_some((n, d))
}

/// Visibility ending in `SM`, optionally preceded by a whole-mile token.
fn parse_visibility(tok: &Token, whole_prefix: Option<u16>) -> Result<Visibility, MetarError> {
    let body = tok.text.strip_suffix("SM").ok_or_else(|| malformed("visibility", tok))?;
    let (qualifier, body) = if let Some(b) = body.strip_prefix('M') {
        (VisibilityQualifier::LessThan, b)
    } else if let Some(b) = body.strip_prefix('P') {
        (VisibilityQualifier::MoreThan, b)
    } else {
        (VisibilityQualifier::Exact, body)
    };
    if body.contains('/') {
        let fraction = parse_fraction(body).ok_or_else(|| malformed("visibility", tok))?;
        if whole_prefix.is_some() && qualifier != VisibilityQualifier::Exact {
            return Err(malformed("visibility", tok));
        }
        Ok(Visibility {
            whole: whole_prefix.unwrap_or(0),
            fraction: Some(fraction),
            qualifier,
        })
    } else {
        let whole: u16 = num(body).ok_or_else(|| malformed("visibility", tok))?;
        if whole_prefix.is_some() || body.len() > 2 {
            return Err(malformed("visibility", tok));
        }
        Ok(Visibility {
            whole,
            fraction: None,
            qualifier,
        })
    }
}

const WX_CODES: [&str; 26] = [
    "MI", "PR", "BC", "DR", "BL", "SH", "TS", "FZ", "DZ", "RA", "SN", "SG", "IC", "PL", "GR", "GS",
    "UP", "BR", "FG", "FU", "VA", "DU", "SA", "HZ", "PO", "SQ",
];

fn parse_weather(t: &str) -> Option<WeatherPhenomenon> {
    let (intensity, body) = if let Some(b) = t.strip_prefix('-') {
        (Intensity::Light, b)
    } else if let Some(b) = t.strip_prefix('+') {
        (Intensity::Heavy, b)
    } else if let Some(b) = t.strip_prefix("VC") {
        (Intensity::Vicinity, b)
    } else {
        (Intensity::Moderate, t)
    };
    if body.is_empty() || body.len() % 2 != 0 || !body.is_ascii() {
        return None;
    }
    let ok = (0..body.len())
        .step_by(2)
        .all(|i| WX_CODES.contains(&&body[i..i + 2]));
    ok.then(|| WeatherPhenomenon {
        intensity,
        code: body.to_string(),
    })
}

fn parse_cloud(t: &str) -> Option<CloudLayer> {
    for cov in [CloudCoverage::Skc, CloudCoverage::Clr] {
        if t == cov.code() {
            return Some(CloudLayer {
                coverage: cov,
                base_ft_agl: None,
                convective: None,
            });
        }
    }
    let (coverage, rest) = [
        CloudCoverage::Few,
        CloudCoverage::Sct,
        CloudCoverage::Bkn,
        CloudCoverage::Ovc,
        CloudCoverage::VerticalVisibility,
    ]
    .into_iter()
    .find_map(|c| t.strip_prefix(c.code()).map(|r| (c, r)))?;
    if rest.len() < 3 || !rest.is_ascii() {
        return None;
    }
    let (h, suffix) = rest.split_at(3);
    let hundreds: u32 = num(h)?;
    let convective = match suffix {
        "" => None,
        "CB" | "TCU" => Some(suffix.to_string()),
        _ => return None,
    };
    Some(CloudLayer {
        coverage,
        base_ft_agl: Some(hundreds * 100),
        convective,
    })
}

fn parse_temp_value(s: &str) -> Option<i16> {
    let (neg, d) = match s.strip_prefix('M') {
        Some(d) => (true, d),
        None => (false, s),
    };
    if d.len() != 2 {
        return None;
    }
    let v: i16 = num(d)?;
    Some(if neg { -v } else { v })
}

fn parse_temps(t: &str) -> Option<(Option<i16>, Option<i16>)> {
    let (a, b) = t.split_once('/')?;
    let temp = parse_temp_value(a)?;
    let dew = if b.is_empty() { None } else { Some(parse_temp_value(b)?) };
    Some((Some(temp), dew))
}

pub fn parse_metar(raw: &str) -> Result<Metar, MetarError> {
    let tokens = tokenize(raw);
    let mut it = tokens.iter().peekable();

    let station_tok = it.next().ok_or(MetarError::Empty)?;
    let mut station_tok = station_tok;
    if station_tok.text == "METAR" || station_tok.text == "SPECI" {
        station_tok = it.next().ok_or(MetarError::Missing("station"))?;
    }
    if station_tok.text.len() != 4 || !station_tok.text.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(malformed("station", station_tok));
    }
    let time_tok = it.next().ok_or(MetarError::Missing("time"))?;
    let time = parse_time(time_tok)?;

    let mut m = Metar {
        station: station_tok.text.to_string(),
        time,
        auto: false,
        corrected: false,
        wind: None,
        visibility: None,
        weather: Vec::new(),
        clouds: Vec::new(),
        temp_c: None,
        dewpoint_c: None,
        altimeter_hundredths: None,
        extra: Vec::new(),
        remarks: None,
    };

    while let Some(tok) = it.next() {
        let t = tok.text;
        if t == "RMK" {
            let rest_start = it.peek().map(|n| n.offset);
            m.remarks = Some(match rest_start {
                Some(s) => tokenize(&raw[s..]).iter().map(|x| x.text).collect::<Vec<_>>().join(" "),
                None => String::new(),
            });
            break;
        }
        if t == "AUTO" {
            m.auto = true;
        } else if t == "COR" {
            m.corrected = true;
        } else if t.ends_with("KT") && m.wind.is_none() {
            m.wind = Some(parse_wind(tok)?);
        } else if let (Some(w), Some(range)) = (m.wind.as_mut(), parse_variable_range(t)) {
            if w.variable_from_to.is_some() {
                m.extra.push(t.to_string());
            } else {
                w.variable_from_to = Some(range);
            }
        } else if t.ends_with("SM") && m.visibility.is_none() {
            m.visibility = Some(parse_visibility(tok, None)?);
        } else if digits(t)
            && t.len() <= 2
            && m.visibility.is_none()
            && it.peek().is_some_and(|n| n.text.ends_with("SM") && n.text.contains('/'))
        {
            let whole: u16 = num(t).ok_or_else(|| malformed("visibility", tok))?;
            let frac_tok = it.next().expect("peeked");
            m.visibility = Some(parse_visibility(frac_tok, Some(whole))?);
        } else if let Some(layer) = parse_cloud(t) {
            m.clouds.push(layer);
        } else if let Some(wx) = parse_weather(t) {
            m.weather.push(wx);
        } else if t.starts_with('A') && t.len() == 5 && t[1..].bytes().all(|b| b.is_ascii_digit()) {
            m.altimeter_hundredths = Some(num(&t[1..]).ok_or_else(|| malformed("altimeter", tok))?);
        } else if t.starts_with('A') && t.len() > 1 && t.as_bytes()[1].is_ascii_digit() {
            return Err(malformed("altimeter", tok));
        } else if let Some((temp, dew)) = parse_temps(t).filter(|_| m.temp_c.is_none()) {
            if let (Some(tc), Some(dc)) = (temp, dew) {
                if dc > tc + 1 {
                    return Err(malformed("temperature", tok));
                }
            }
            m.temp_c = temp;
            m.dewpoint_c = dew;
        } else {
            m.extra.push(t.to_string());
        }
    }
    Ok(m)
}

impl fmt::Display for Metar {
    /// Canonical single-space METAR text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ObservationTime { day, hour, minute } = self.time;
        write!(f, "{} {day:02}{hour:02}{minute:02}Z", self.station)?;
        if self.auto {
            f.write_str(" AUTO")?;
        }
        if self.corrected {
            f.write_str(" COR")?;
        }
        if let Some(w) = &self.wind {
            match w.direction {
                WindDirection::Degrees(d) => write!(f, " {d:03}")?,
                WindDirection::Variable => f.write_str(" VRB")?,
            }
            write!(f, "{:02}", w.speed_kt)?;
            if let Some(g) = w.gust_kt {
                write!(f, "G{g:02}")?;
            }
            f.write_str("KT")?;
            if let Some((a, b)) = w.variable_from_to {
                write!(f, " {a:03}V{b:03}")?;
            }
        }
        if let Some(v) = &self.visibility {
            let q = match v.qualifier {
                VisibilityQualifier::Exact => "",
                VisibilityQualifier::LessThan => "M",
                VisibilityQualifier::MoreThan => "P",
            };
            match (v.whole, v.fraction) {
                (w, None) => write!(f, " {q}{w}SM")?,
                (0, Some((n, d))) => write!(f, " {q}{n}/{d}SM")?,
                (w, Some((n, d))) => write!(f, " {w} {q}{n}/{d}SM")?,
            }
        }
        for wx in &self.weather {
            let p = match wx.intensity {
                Intensity::Light => "-",
                Intensity::Moderate => "",
                Intensity::Heavy => "+",
                Intensity::Vicinity => "VC",
            };
            write!(f, " {p}{}", wx.code)?;
        }
        for c in &self.clouds {
            write!(f, " {}", c.coverage.code())?;
            if let Some(b) = c.base_ft_agl {
                write!(f, "{:03}", b / 100)?;
            }
            if let Some(cv) = &c.convective {
                f.write_str(cv)?;
            }
        }
        if let Some(t) = self.temp_c {
            let fmt_t = |v: i16| {
                if v < 0 {
                    format!("M{:02}", -v)
                } else {
                    format!("{v:02}")
                }
            };
            write!(f, " {}/", fmt_t(t))?;
            if let Some(d) = self.dewpoint_c {
                f.write_str(&fmt_t(d))?;
            }
        }
        if let Some(a) = self.altimeter_hundredths {
            write!(f, " A{a:04}")?;
        }
        for x in &self.extra {
            write!(f, " {x}")?;
        }
        if let Some(r) = &self.remarks {
            f.write_str(" RMK")?;
            if !r.is_empty() {
                write!(f, " {r}")?;
            }
        }
        Ok(())
    }
}

/// Re-emit in canonical form.
pub fn emit_metar(m: &Metar) -> String {
    m.to_string()
}

fn weather_words(wx: &WeatherPhenomenon) -> String {
    let mut code = wx.code.as_str();
    let mut parts: Vec<&str> = Vec::new();
    let mut descriptor = None;
    if code.len() > 2 {
        let (d, rest) = code.split_at(2);
        if matches!(d, "TS" | "SH" | "FZ" | "MI" | "BC" | "DR" | "BL" | "PR") {
            descriptor = Some(d);
            code = rest;
        }
    }
    let mut i = 0;
    while i + 2 <= code.len() {
        parts.push(match &code[i..i + 2] {
            "BR" => "mist",
            "FG" => "fog",
            "HZ" => "haze",
            "FU" => "smoke",
            "RA" => "rain",
            "DZ" => "drizzle",
            "SN" => "snow",
            "GR" => "hail",
            "GS" => "small hail",
            "PL" => "ice pellets",
            "UP" => "unknown precipitation",
            "TS" => "thunderstorm",
            "SH" => "showers",
            "DU" => "dust",
            "SA" => "sand",
            "VA" => "volcanic ash",
            "SQ" => "squalls",
            _ => "precipitation",
        });
        i += 2;
    }
    let obscuration = parts.iter().all(|p| matches!(*p, "mist" | "fog" | "haze" | "smoke"));
    let base = parts.join(" and ");
    let mut text = match descriptor {
        Some("TS") if base.is_empty() => "thunderstorm".to_string(),
        Some("TS") => format!("thunderstorm with {base}"),
        Some("SH") => format!("{base} showers"),
        Some("FZ") => format!("freezing {base}"),
        Some("MI") => format!("shallow {base}"),
        Some("BC") => format!("patchy {base}"),
        Some(_) => format!("drifting {base}"),
        None => base,
    };
    if !obscuration {
        text = match wx.intensity {
            Intensity::Light => format!("light {text}"),
            Intensity::Heavy => format!("heavy {text}"),
            _ => text,
        };
    }
    if wx.intensity == Intensity::Vicinity {
        text = format!("{text} in the vicinity");
    }
    text
}

fn thousands(n: u32) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// One-line English decoding: category, visibility, ceiling, wind,
/// temperature and dewpoint.
pub fn decode_metar(m: &Metar) -> String {
    let mut parts = Vec::new();

    let vis = match m.visibility {
        Some(v) => {
            let amount = match v.qualifier {
                VisibilityQualifier::Exact => v.amount_text(),
                VisibilityQualifier::LessThan => format!("less than {}", v.amount_text()),
                VisibilityQualifier::MoreThan => format!("more than {}", v.amount_text()),
            };
            format!("{amount} SM visibility")
        }
        None => "visibility not reported".to_string(),
    };
    let vis = if m.weather.is_empty() {
        vis
    } else {
        let wx: Vec<String> = m.weather.iter().map(weather_words).collect();
        format!("{vis} in {}", wx.join(" and "))
    };
    parts.push(vis);

    parts.push(match m.ceiling_layer() {
        Some(layer) => {
            let kind = match layer.coverage {
                CloudCoverage::Bkn => "broken",
                CloudCoverage::Ovc => "overcast",
                _ => "indefinite",
            };
            format!(
                "{kind} ceiling at {} ft",
                thousands(layer.base_ft_agl.unwrap_or(0))
            )
        }
        None if m
            .clouds
            .iter()
            .all(|c| matches!(c.coverage, CloudCoverage::Clr | CloudCoverage::Skc)) =>
        {
            "sky clear".to_string()
        }
        None => "no ceiling".to_string(),
    });

    parts.push(match &m.wind {
        None => "wind not reported".to_string(),
        Some(w) if w.is_calm() => "wind calm".to_string(),
        Some(w) => {
            let dir = match w.direction {
                WindDirection::Degrees(d) => format!("{d}°"),
                WindDirection::Variable => "variable".to_string(),
            };
            let mut s = format!("wind {dir} at {} kt", w.speed_kt);
            if let Some(g) = w.gust_kt {
                s.push_str(&format!(" gusting {g} kt"));
            }
            s
        }
    });

    if let Some(t) = m.temp_c {
        let mut s = format!("{t}°C");
        if let Some(d) = m.dewpoint_c {
            s.push_str(&format!(" / dewpoint {d}°C"));
        }
        parts.push(s);
    }

    format!("{} — {}", flight_category(m).long_name(), parts.join(", "))
}
