//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

use std::collections::HashMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ctaf::ablation::{inject_noise, mask_utterances, mask_words, rms, MaskSpec, NoiseSpec, MASK_RATES, UTTERANCE_PLACEHOLDER, WORD_MASK};
use ctaf::airspace::{
    collapse_to_binary, label_scenario, Aircraft, Airfield, Callsign, LatLon, PatternPhase, PatternSide, PositionEvent,
    RadioStatus, Runway, SafetyLabel3, SafetyLabelBinary,
};
use ctaf::cli::{cmd_gen, RunConfig};
use ctaf::eval::{
    extract_verdict, load_records, run_matrix, run_protocol, ChatBackend, Condition, EvalSettings, Label, MatrixOptions,
    ModelEndpoint, OracleMock, Protocol, RawCompletion, ScoreSource, ScriptedMock, Strategy, TaskFraming,
};
use ctaf::metar::{decode_metar, emit_metar, flight_category, parse_metar, FlightCategory};
use ctaf::metrics::{auroc, best_run, condition_metrics, pr_curve, report, EvalRecord};
use ctaf::scenario::{Dataset, Split};
use ctaf::transcript::{emit_srt, nato_decode, nato_spell, parse_srt, validate_timing, TimingViolation, Transcript};
use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    check((got - want).abs() <= tol, format!("{what}: got {got:.4}, want {want:.3}"))
}

fn default_dataset(dir: &std::path::Path) -> Dataset {
    let cfg = RunConfig { out_dir: dir.to_path_buf(), ..RunConfig::default() };
    cmd_gen(&cfg).expect("gen")
}

// 1 ---------------------------------------------------------------------

/// Records whose binary confusion is exactly (tn, fp, fn, tp).
fn fixture_records(model: &str, tn: usize, fp: usize, fn_: usize, tp: usize) -> Vec<EvalRecord> {
    let condition = Condition {
        model: model.into(),
        framing: TaskFraming::Binary,
        strategy: Strategy::OneShot,
        protocol: Protocol::Cot,
    };
    let mut out = Vec::new();
    let cells = [
        (Label::Nominal, Label::Nominal, tn),
        (Label::Nominal, Label::Danger, fp),
        (Label::Danger, Label::Nominal, fn_),
        (Label::Danger, Label::Danger, tp),
    ];
    for (gold, pred, n) in cells {
        for _ in 0..n {
            out.push(EvalRecord {
                scenario_id: format!("S{:03}", out.len() + 7),
                condition: condition.clone(),
                variant: None,
                gold,
                pred: Some(pred),
                confidence: Some(0.9),
                score_danger: if pred == Label::Danger { 0.9 } else { 0.1 },
                score_source: ScoreSource::ConfidenceFallback,
                latency_s: 1.0,
                parse_failure: false,
                error: None,
                reasoning: None,
            });
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut records = fixture_records("Qwen 2.5-7B", 29, 2, 1, 62);
    records.extend(fixture_records("GPT-5.4", 21, 10, 0, 63));
    let metrics = condition_metrics(&records).map_err(|e| e.to_string())?;
    // (model, macro, nominal, danger, accuracy) as published.
    for (model, macro_f1, nominal, danger, accuracy) in
        [("Qwen 2.5-7B", 0.964, 0.951, 0.976, 0.968), ("GPT-5.4", 0.867, 0.808, 0.926, 0.894)]
    {
        let m = best_run(&metrics, model, TaskFraming::Binary, None).ok_or("missing condition")?;
        check(m.n == 94, format!("{model}: {} records", m.n))?;
        close(m.macro_f1, macro_f1, 0.001, &format!("{model} macro-F1"))?;
        close(m.f1(Label::Nominal).unwrap(), nominal, 0.001, &format!("{model} nominal F1"))?;
        close(m.f1(Label::Danger).unwrap(), danger, 0.001, &format!("{model} danger F1"))?;
        close(m.accuracy, accuracy, 0.001, &format!("{model} accuracy"))?;
    }
    let dir = tempfile::tempdir().unwrap();
    report(&records, dir.path(), None).map_err(|e| e.to_string())?;
    let t3 = fs::read_to_string(dir.path().join("table3_confusion_binary.csv")).unwrap();
    check(t3.contains("Qwen 2.5-7B,OS+CoT,29,2,1,62,93.5%,6.5%,98.4%,1.6%"), "Qwen confusion row")?;
    check(t3.contains("GPT-5.4,OS+CoT,21,10,0,63,67.7%,32.3%,100.0%,0.0%"), "GPT-5.4 confusion row")?;
    let t1 = fs::read_to_string(dir.path().join("table1_main_binary.csv")).unwrap();
    check(t1.contains("Qwen 2.5-7B,macro_f1,,,,,0.964,"), "main table Qwen cell")?;
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 1.0, format!("took {elapsed:.2}s"))?;
    Ok(format!("Qwen 0.964/0.951/0.976/0.968, GPT-5.4 0.867/0.808/0.926/0.894 in {elapsed:.3}s"))
}

// 2 ---------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ds = default_dataset(a.path());
    let again = default_dataset(b.path());
    let elapsed = start.elapsed().as_secs_f64() / 2.0;
    let count = |l| ds.count(l);
    check(ds.scenarios.len() == 100, "total != 100")?;
    check(
        (count(SafetyLabel3::Nominal), count(SafetyLabel3::Warning), count(SafetyLabel3::Hazard)) == (33, 34, 33),
        "class split",
    )?;
    let icl: Vec<&str> = ds.icl().map(|s| s.id.as_str()).collect();
    check(icl.len() == 6, "icl != 6")?;
    for l in SafetyLabel3::ALL {
        check(ds.icl().filter(|s| s.label3 == l).count() == 2, format!("icl {l} != 2"))?;
    }
    check(ds.test().count() == 94, "test != 94")?;
    let nominal = ds.test().filter(|s| collapse_to_binary(s.label3) == SafetyLabelBinary::Nominal).count();
    check((nominal, 94 - nominal) == (31, 63), format!("binary test {nominal}/{}", 94 - nominal))?;
    let m1 = fs::read(a.path().join("dataset/manifest.csv")).unwrap();
    let m2 = fs::read(b.path().join("dataset/manifest.csv")).unwrap();
    check(m1 == m2 && ds == again, "runs differ")?;
    check(elapsed < 30.0, format!("took {elapsed:.1}s"))?;
    Ok(format!("100 (33/34/33), icl=6, test=94 (31/63), manifests identical, {elapsed:.2}s per run"))
}

// 3 ---------------------------------------------------------------------
//
// Brute-force labeller written from the rule table, not from the library's
// rule code. It walks every report instant, rebuilds each aircraft's state
// from scratch, and scans final-approach intervals on a fine time grid.

struct Oracle<'a> {
    af: &'a Airfield,
    events: &'a [PositionEvent],
    aircraft: &'a [Aircraft],
    imc: bool,
}

#[derive(Clone, Copy)]
struct St {
    phase: PatternPhase,
    runway: Runway,
    alt: f64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

fn is_final(p: PatternPhase) -> bool {
    matches!(p, PatternPhase::Final | PatternPhase::ShortFinal | PatternPhase::StraightInFinal)
}

fn airborne(p: PatternPhase) -> bool {
    !matches!(p, PatternPhase::OnRunway | PatternPhase::ClearOfRunway)
}

fn pattern_leg(p: PatternPhase) -> bool {
    matches!(p, PatternPhase::Crosswind | PatternPhase::Downwind | PatternPhase::Base)
}

fn orient(ax: f64, ay: f64, bx: f64, by: f64, cx: f64, cy: f64) -> f64 {
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

impl Oracle<'_> {
    fn reports(&self, cs: &Callsign) -> Vec<&PositionEvent> {
        self.events.iter().filter(|e| &e.callsign == cs).collect()
    }

    fn state(&self, cs: &Callsign, t: f64) -> Option<St> {
        let r = self.reports(cs);
        let cur = r.iter().rposition(|e| e.t <= t)?;
        let e = r[cur];
        let (alt, lat, lon) = match r.get(cur + 1) {
            Some(n) => {
                let f = (t - e.t) / (n.t - e.t);
                (e.alt_ft + f * (n.alt_ft - e.alt_ft), e.lat + f * (n.lat - e.lat), e.lon + f * (n.lon - e.lon))
            }
            None => (e.alt_ft, e.lat, e.lon),
        };
        let p = self.af.to_local(LatLon::new(lat, lon));
        let h = e.heading_deg.to_radians();
        Some(St {
            phase: e.phase,
            runway: e.runway,
            alt,
            x: p.x,
            y: p.y,
            vx: h.sin() * e.speed_kt / 3600.0,
            vy: h.cos() * e.speed_kt / 3600.0,
        })
    }

    fn dist(&self, cs: &Callsign, t: f64) -> Option<f64> {
        let r = self.reports(cs);
        let cur = r.iter().rposition(|e| e.t <= t)?;
        Some(match r.get(cur + 1) {
            Some(n) => r[cur].dist_nm + (t - r[cur].t) / (n.t - r[cur].t) * (n.dist_nm - r[cur].dist_nm),
            None => r[cur].dist_nm,
        })
    }

    fn converging(a: &St, b: &St) -> bool {
        let range = |dt: f64| ((a.x + a.vx * dt) - (b.x + b.vx * dt)).hypot((a.y + a.vy * dt) - (b.y + b.vy * dt));
        if range(1e-3) >= range(0.0) {
            return false;
        }
        let (a2x, a2y) = (a.x + 60.0 * a.vx, a.y + 60.0 * a.vy);
        let (b2x, b2y) = (b.x + 60.0 * b.vx, b.y + 60.0 * b.vy);
        let d1 = orient(a.x, a.y, a2x, a2y, b.x, b.y);
        let d2 = orient(a.x, a.y, a2x, a2y, b2x, b2y);
        let d3 = orient(b.x, b.y, b2x, b2y, a.x, a.y);
        let d4 = orient(b.x, b.y, b2x, b2y, a2x, a2y);
        d1 * d2 <= 0.0 && d3 * d4 <= 0.0
    }

    fn label(&self) -> SafetyLabel3 {
        let mut hazard = false;
        let mut warning = false;
        let mut instants: Vec<f64> = self.events.iter().map(|e| e.t).collect();
        instants.sort_by(f64::total_cmp);
        instants.dedup();
        for (k, &t) in instants.iter().enumerate() {
            for a in self.aircraft {
                for b in self.aircraft {
                    if a.callsign == b.callsign {
                        continue;
                    }
                    let (Some(sa), Some(sb)) = (self.state(&a.callsign, t), self.state(&b.callsign, t)) else {
                        continue;
                    };
                    if sa.phase == PatternPhase::OnRunway && sb.phase == PatternPhase::ShortFinal {
                        hazard = true;
                    }
                    if is_final(sa.phase) && is_final(sb.phase) && sa.runway == sb.runway {
                        warning = true;
                        let end = instants.get(k + 1).copied().unwrap_or(t);
                        let steps = 2000;
                        for i in 0..=steps {
                            let s = if i == steps { (end - 1e-9).max(t) } else { t + (end - t) * i as f64 / steps as f64 };
                            if let (Some(da), Some(db)) = (self.dist(&a.callsign, s), self.dist(&b.callsign, s)) {
                                if (da - db).abs() < 0.5 {
                                    hazard = true;
                                }
                            }
                        }
                    }
                    if airborne(sa.phase) && airborne(sb.phase) && (sa.alt - sb.alt).abs() <= 200.0 && Self::converging(&sa, &sb) {
                        hazard = true;
                    }
                }
            }
        }
        for e in self.events {
            let ac = self.aircraft.iter().find(|a| a.callsign == e.callsign).unwrap();
            if e.radio == RadioStatus::Radio && e.runway != self.af.runway {
                for other in self.aircraft.iter().filter(|o| o.callsign != e.callsign) {
                    if self.state(&other.callsign, e.t).is_some_and(|s| is_final(s.phase)) {
                        hazard = true;
                    }
                }
            }
            if ac.radio == RadioStatus::Nordo {
                warning = true;
            }
            if ac.radio == RadioStatus::Radio && e.radio == RadioStatus::Nordo {
                warning = true;
            }
            if pattern_leg(e.phase) && (e.pattern_side != self.af.pattern_side || self.imc) {
                warning = true;
            }
        }
        if hazard {
            SafetyLabel3::Hazard
        } else if warning {
            SafetyLabel3::Warning
        } else {
            SafetyLabel3::Nominal
        }
    }
}

const METARS: [&str; 4] = [
    "KHAF 010000Z 30008KT 10SM CLR 15/05 A3001",
    "KHAF 010000Z 18005KT 5SM -BR FEW010 BKN020 18/16 A2999",
    "KHAF 010000Z 27004KT 2SM BR OVC006 12/11 A3002",
    "KHAF 010000Z 00000KT 1/2SM FG VV002 11/11 A3004",
];

fn random_scenario(rng: &mut ChaCha8Rng, af: &Airfield) -> (Vec<Aircraft>, Vec<PositionEvent>) {
    let n = rng.gen_range(1..=3);
    let aircraft: Vec<Aircraft> = (0..n)
        .map(|i| Aircraft {
            callsign: Callsign::new(&format!("N{}{}AB", i + 1, rng.gen_range(10..99))).unwrap(),
            type_name: "Cessna 172".into(),
            radio: if rng.gen_bool(0.15) { RadioStatus::Nordo } else { RadioStatus::Radio },
        })
        .collect();
    let count = rng.gen_range(1..=12);
    let mut t = 0.0;
    let mut events = Vec::new();
    for _ in 0..count {
        t += rng.gen_range(2.0..15.0_f64).round();
        let ac = &aircraft[rng.gen_range(0..aircraft.len())];
        let phase = PatternPhase::ALL[rng.gen_range(0..PatternPhase::ALL.len())];
        let dist = match phase {
            PatternPhase::ShortFinal => rng.gen_range(0.0..1.0),
            _ => rng.gen_range(0.0..3.0),
        };
        let p = af.to_latlon(ctaf::airspace::LocalPoint::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
        events.push(PositionEvent {
            t,
            callsign: ac.callsign.clone(),
            phase,
            dist_nm: dist,
            alt_ft: rng.gen_range(600.0..1300.0_f64).round(),
            radio: if ac.radio == RadioStatus::Nordo || rng.gen_bool(0.1) { RadioStatus::Nordo } else { RadioStatus::Radio },
            runway: if rng.gen_bool(0.85) { Runway(30) } else { Runway(12) },
            pattern_side: if rng.gen_bool(0.85) { PatternSide::Right } else { PatternSide::Left },
            lat: p.lat,
            lon: p.lon,
            heading_deg: rng.gen_range(0..360) as f64,
            speed_kt: rng.gen_range(50.0..130.0_f64).round(),
        });
    }
    (aircraft, events)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let af = Airfield::khaf();
    let metars: Vec<_> = METARS.iter().map(|m| parse_metar(m).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tally: HashMap<SafetyLabel3, usize> = HashMap::new();
    for case in 0..1000 {
        let (aircraft, events) = random_scenario(&mut rng, &af);
        let metar = &metars[rng.gen_range(0..metars.len())];
        let imc = matches!(flight_category(metar), FlightCategory::Ifr | FlightCategory::Lifr);
        let want = Oracle { af: &af, events: &events, aircraft: &aircraft, imc }.label();
        let got = label_scenario(&af, &events, &aircraft, metar).map_err(|e| format!("case {case}: {e}"))?;
        check(got == want, format!("case {case}: library {got}, oracle {want}"))?;
        *tally.entry(got).or_default() += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    for l in SafetyLabel3::ALL {
        check(tally.get(&l).copied().unwrap_or(0) >= 20, format!("too few {l} cases to be meaningful"))?;
    }
    check(elapsed < 10.0, format!("took {elapsed:.1}s"))?;
    Ok(format!(
        "1000/1000 agree (nominal {}, warning {}, hazard {}) in {elapsed:.2}s",
        tally[&SafetyLabel3::Nominal],
        tally[&SafetyLabel3::Warning],
        tally[&SafetyLabel3::Hazard]
    ))
}

// 4 ---------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let ds = default_dataset(dir.path());
    for s in &ds.scenarios {
        let m = parse_metar(&s.metar_raw).map_err(|e| format!("{}: {e}", s.id))?;
        let emitted = emit_metar(&m);
        check(emitted == s.metar_raw, format!("{}: {emitted:?} != {:?}", s.id, s.metar_raw))?;
        check(parse_metar(&emitted).unwrap() == m, format!("{}: reparse differs", s.id))?;
    }
    let s003 = parse_metar("KHAF 142135Z AUTO 18005KT 5SM -BR FEW010 BKN020 18/16 A2999 RMK AO2").unwrap();
    let decoded = decode_metar(&s003);
    // Reference line verbatim, typography included.
    let want = "Marginal VFR — 5 SM visibility in mist, broken ceiling at 2,000 ft, wind 180° at 5 kt, 18°C / dewpoint 16°C";
    check(decoded == want, format!("decoded {decoded:?}"))?;
    check(flight_category(&s003) == FlightCategory::Mvfr, "category")?;
    Ok(format!("{} METARs round-trip; S003 decodes to the reference line", ds.scenarios.len()))
}

// 5 ---------------------------------------------------------------------

fn transcripts() -> impl proptest::strategy::Strategy<Value = Transcript> {
    let word = "[A-Za-z0-9][A-Za-z0-9,.'-]{0,9}";
    let text = prop::collection::vec(prop::collection::vec(word, 1..8).prop_map(|w| w.join(" ")), 1..3)
        .prop_map(|lines| lines.join("\n"));
    prop::collection::vec((0u64..10_000, 1u64..9_000, text), 0..12).prop_map(|cues| {
        let mut t = 0;
        Transcript::from_cues(cues.into_iter().map(|(gap, len, text)| {
            let start = t + gap;
            t = start + len;
            (start, t, text)
        }))
    })
}

fn criterion_5() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    runner
        .run(&transcripts(), |t| {
            let back = parse_srt(&emit_srt(&t)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, t);
            Ok(())
        })
        .map_err(|e| format!("SRT round trip: {e}"))?;

    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&"N[1-9][0-9A-Z]{0,4}", |cs| {
            let spoken = nato_spell(&cs).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let back = nato_decode(&spoken).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back.as_str(), cs.as_str());
            Ok(())
        })
        .map_err(|e| format!("phonetic round trip: {e}"))?;

    let good = |n: usize| Transcript::from_cues((0..n as u64).map(|i| (i * 9_000, i * 9_000 + 4_000, "call")));
    check(validate_timing(&good(5)).is_empty(), "clean fixture flagged")?;
    let short = Transcript::from_cues([(0, 2_000, "a"), (7_000, 11_000, "b")]);
    check(matches!(validate_timing(&short)[..], [TimingViolation::UtteranceLength { index: 1, .. }]), "utterance length")?;
    let gap = Transcript::from_cues([(0, 4_000, "a"), (5_000, 9_000, "b")]);
    check(matches!(validate_timing(&gap)[..], [TimingViolation::Gap { after_index: 1, .. }]), "gap")?;
    let long = Transcript::from_cues((0..10u64).map(|i| (i * 10_000, i * 10_000 + 4_000, "call")));
    check(
        validate_timing(&long).iter().any(|v| matches!(v, TimingViolation::TotalDuration { .. })),
        "total duration",
    )?;
    let many = Transcript::from_cues((0..11u64).map(|i| (i * 7_500, i * 7_500 + 3_000, "call")));
    check(
        validate_timing(&many).iter().any(|v| matches!(v, TimingViolation::TooManyLines { count: 11 })),
        "too many cues",
    )?;
    Ok("500 SRT and 1000 callsign round trips; all four timing rules flagged".into())
}

// 6 ---------------------------------------------------------------------

fn pairwise_auroc(points: &[(f64, bool)]) -> f64 {
    let (mut wins2, mut pairs) = (0u64, 0u64);
    for &(sp, p) in points {
        for &(sn, n) in points {
            if p && !n {
                pairs += 1;
                wins2 += if sp > sn { 2 } else if sp == sn { 1 } else { 0 };
            }
        }
    }
    wins2 as f64 / (2 * pairs) as f64
}

fn sweep_ap(points: &[(f64, bool)]) -> f64 {
    let mut thresholds: Vec<f64> = points.iter().map(|p| p.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let positives = points.iter().filter(|p| p.1).count() as f64;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let flagged: Vec<_> = points.iter().filter(|p| p.0 >= t).collect();
        let tp = flagged.iter().filter(|p| p.1).count() as f64;
        let recall = tp / positives;
        ap += (recall - prev_recall) * tp / flagged.len() as f64;
        prev_recall = recall;
    }
    ap
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(2..25);
        // Coarse scores so ties are common.
        let pts: Vec<(f64, bool)> = (0..n).map(|_| (rng.gen_range(0..8) as f64 / 8.0, rng.gen_bool(0.6))).collect();
        if pts.iter().all(|p| p.1) || pts.iter().all(|p| !p.1) {
            check(auroc(&pts).is_err(), "single-class input accepted")?;
            continue;
        }
        let a = auroc(&pts).unwrap();
        check(a == pairwise_auroc(&pts), format!("set {done}: AUROC {a} vs {}", pairwise_auroc(&pts)))?;
        let (_, ap) = pr_curve(&pts).unwrap();
        check((ap - sweep_ap(&pts)).abs() < 1e-12, format!("set {done}: AP {ap} vs {}", sweep_ap(&pts)))?;
        done += 1;
    }
    let sep = [(0.9, true), (0.7, true), (0.3, false), (0.1, false)];
    check(auroc(&sep).unwrap() == 1.0 && pr_curve(&sep).unwrap().1 == 1.0, "perfect separation")?;
    let tied = [(0.5, true), (0.5, false), (0.5, false)];
    check(auroc(&tied).unwrap() == 0.5, "all tied")?;
    Ok("200 random sets exact; separated 1.0, tied 0.5".into())
}

// 7 ---------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let ds = default_dataset(dir.path());
    let ep = ModelEndpoint::oracle("oracle", 0.0);
    let whole = OracleMock::from_dataset("oracle", &ds, 0.0, 0);
    let opts = MatrixOptions::new(dir.path().join("full.jsonl"));
    let s = run_matrix(&ds, &[(&ep, &whole as &dyn ChatBackend)], &opts).map_err(|e| e.to_string())?;
    check(s.conditions == 6 && s.expected == 6 * 94 && s.finished, format!("{s:?}"))?;
    check(s.leakage_violations == 0 && s.errors == 0, "leakage or errors")?;
    let records = load_records(&opts.records_path).unwrap();
    check(records.len() == 6 * 94, format!("{} records", records.len()))?;
    let metrics = condition_metrics(&records).unwrap();
    check(metrics.len() == 6 && metrics.iter().all(|m| m.macro_f1 == 1.0 && m.n == 94), "macro-F1 not 1.0")?;
    check(records.iter().all(|r| ds.get(&r.scenario_id).unwrap().split == Split::Test), "non-test record")?;

    let staged = OracleMock::from_dataset("oracle", &ds, 0.0, 0);
    let mut opts2 = MatrixOptions::new(dir.path().join("staged.jsonl"));
    opts2.limit = Some(150);
    let first = run_matrix(&ds, &[(&ep, &staged as &dyn ChatBackend)], &opts2).unwrap();
    check(!first.finished, "limit ignored")?;
    opts2.limit = None;
    let second = run_matrix(&ds, &[(&ep, &staged as &dyn ChatBackend)], &opts2).unwrap();
    check(second.finished && second.skipped == 150, format!("{second:?}"))?;
    check(staged.calls() == whole.calls(), format!("calls {} vs {}", staged.calls(), whole.calls()))?;
    check(fs::read(&opts.records_path).unwrap() == fs::read(&opts2.records_path).unwrap(), "tables differ")?;
    Ok(format!("6 x 94 records, macro-F1 1.0, no leakage; resume reused 150 records, {} calls both ways", whole.calls()))
}

// 8 ---------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let ds = default_dataset(dir.path());
    let mut checked = 0;
    for s in &ds.scenarios {
        let t = parse_srt(&s.transcript).unwrap();
        let words = t.word_count();
        for (i, &rate) in MASK_RATES.iter().enumerate() {
            let seed = 1000 * i as u64 + checked as u64;
            let w = mask_words(&t, &MaskSpec::word(rate, seed)).unwrap();
            let masked = w.cues.iter().flat_map(|c| c.text.split_whitespace()).filter(|x| *x == WORD_MASK).count();
            check(masked == (rate * words as f64).round() as usize, format!("{} word rate {rate}: {masked}/{words}", s.id))?;
            let u = mask_utterances(&t, &MaskSpec::utterance(rate, seed)).unwrap();
            let placeholders = u.cues.iter().filter(|c| c.text == UTTERANCE_PLACEHOLDER).count();
            check(
                placeholders == (rate * t.cues.len() as f64).round() as usize,
                format!("{} utterance rate {rate}: {placeholders}/{}", s.id, t.cues.len()),
            )?;
            for m in [&w, &u] {
                let same_timing = m.cues.len() == t.cues.len()
                    && m.cues.iter().zip(&t.cues).all(|(a, b)| (a.index, a.start_ms, a.end_ms) == (b.index, b.start_ms, b.end_ms));
                check(same_timing, format!("{} timing changed", s.id))?;
            }
            let w2 = mask_words(&t, &MaskSpec::word(rate, seed)).unwrap();
            let u2 = mask_utterances(&t, &MaskSpec::utterance(rate, seed)).unwrap();
            check(emit_srt(&w) == emit_srt(&w2) && emit_srt(&u) == emit_srt(&u2), "not deterministic")?;
        }
        checked += 1;
    }
    Ok(format!("{checked} scenarios x 5 rates x 2 schemes exact, timing kept, deterministic"))
}

// 9 ---------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let rate = 16_000;
    let tone: Vec<i16> = (0..5 * rate)
        .map(|i| (12_000.0 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / rate as f64).sin()).round() as i16)
        .collect();
    let noisy = inject_noise(&tone, &NoiseSpec { nsr: 0.25, seed: 9 }).map_err(|e| e.to_string())?;
    let sig: Vec<f64> = tone.iter().map(|&s| f64::from(s)).collect();
    let noise: Vec<f64> = noisy.iter().zip(&tone).map(|(y, x)| f64::from(*y) - f64::from(*x)).collect();
    let ratio = rms(&noise) / rms(&sig);
    check((ratio - 0.25).abs() <= 0.0025, format!("measured NSR {ratio:.5}"))?;
    check(inject_noise(&tone, &NoiseSpec { nsr: 0.0, seed: 9 }).unwrap() == tone, "NSR 0 changed samples")?;
    check(inject_noise(&vec![0; rate], &NoiseSpec { nsr: 0.25, seed: 9 }).is_err(), "silent input accepted")?;
    check(inject_noise(&tone, &NoiseSpec { nsr: 0.25, seed: 9 }).unwrap() == noisy, "not deterministic")?;
    Ok(format!("measured NSR {ratio:.4}; NSR 0 identical; silence rejected"))
}

// 10 --------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let ds = default_dataset(dir.path());
    let pool: Vec<_> = ds.icl().cloned().collect();
    let target = ds.test().next().unwrap();
    let (t1, t2) = (3.25, 0.875);
    let turn = |text: &str, s: f64| Ok(RawCompletion { text: text.into(), logprobs: None, reported_latency_s: Some(s) });
    let mock = ScriptedMock::with_completions(vec![
        turn("N910YZ is on a two-mile final while N123AB reports one mile; they converge.", t1),
        turn("Sure. {\"label\": \"danger\", \"confidence\": 0.82, \"reasoning\": \"two on final\"} Hope that helps.", t2),
    ]);
    let v = run_protocol(&mock, TaskFraming::Binary, Strategy::ZeroShot, Protocol::Cot, target, &pool, &EvalSettings::default())
        .map_err(|e| e.to_string())?;
    check(mock.calls() == 2, format!("{} calls", mock.calls()))?;
    check(v.latency_s == t1 + t2, format!("latency {} != {}", v.latency_s, t1 + t2))?;
    check(v.label == Some(Label::Danger) && v.confidence == Some(0.82), "verdict not recovered")?;
    let p = extract_verdict("Reasoning first.\n```json\n{\"label\": \"nominal\", \"confidence\": 0.6, \"reasoning\": \"ok\"}\n```\nDone.", TaskFraming::Binary)
        .map_err(|e| e.to_string())?;
    check(p.label == Label::Nominal && p.confidence == 0.6, "fenced JSON not recovered")?;
    Ok(format!("latency {t1} + {t2} = {}; JSON recovered from prose", v.latency_s))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("confusion fixtures reproduce the published cells", criterion_1),
        ("dataset composition and determinism", criterion_2),
        ("label rules match brute-force oracle", criterion_3),
        ("METAR round trip and S003 decode", criterion_4),
        ("SRT, phonetic and timing checks", criterion_5),
        ("AUROC/AP match pairwise and sweep oracles", criterion_6),
        ("matrix bookkeeping and resume", criterion_7),
        ("masking exactness", criterion_8),
        ("noise contract", criterion_9),
        ("CoT latency accounting and JSON recovery", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
