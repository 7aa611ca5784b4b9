use std::sync::OnceLock;

use ctaf::ablation::{mask_utterances, mask_words, MaskSpec, UTTERANCE_PLACEHOLDER, WORD_MASK};
use ctaf::airspace::{collapse_to_binary, label_scenario, Airfield, SafetyLabel3, SafetyLabelBinary};
use ctaf::eval::{Label, TaskFraming};
use ctaf::metar::{emit_metar, parse_metar};
use ctaf::metrics::{auroc, average_precision, ConfusionMatrix};
use ctaf::scenario::{sample_metar, Dataset, WeatherFamily};
use ctaf::transcript::{emit_srt, parse_srt, Transcript};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dataset() -> &'static Dataset {
    static DS: OnceLock<(tempfile::TempDir, Dataset)> = OnceLock::new();
    &DS.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ctaf::cli::RunConfig { out_dir: dir.path().to_path_buf(), ..Default::default() };
        let ds = ctaf::cli::cmd_gen(&cfg).unwrap();
        (dir, ds)
    })
    .1
}

fn cells(framing: TaskFraming) -> impl Strategy<Value = Vec<(Label, Option<Label>)>> {
    let classes = framing.classes();
    let label = prop::sample::select(classes.to_vec());
    prop::collection::vec((label.clone(), prop::option::weighted(0.9, label)), 1..200)
}

fn matrix(framing: TaskFraming, cells: &[(Label, Option<Label>)]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(framing);
    for &(g, p) in cells {
        cm.add(g, p).unwrap();
    }
    cm
}

fn scored() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec(((0u32..20).prop_map(|s| s as f64 / 20.0), any::<bool>()), 2..60)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
}

fn transcripts() -> impl Strategy<Value = Transcript> {
    let text = prop::collection::vec("[A-Za-z0-9][a-z0-9,.]{0,7}", 1..10).prop_map(|w| w.join(" "));
    prop::collection::vec((0u64..5_000, 500u64..7_000, text), 1..10).prop_map(|cues| {
        let mut t = 0;
        Transcript::from_cues(cues.into_iter().map(|(gap, len, text)| {
            let start = t + gap;
            t = start + len;
            (start, t, text)
        }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn macro_f1_is_mean_of_class_f1(three in any::<bool>(), tri in cells(TaskFraming::ThreeClass), bin in cells(TaskFraming::Binary)) {
        let cm = if three { matrix(TaskFraming::ThreeClass, &tri) } else { matrix(TaskFraming::Binary, &bin) };
        let per = cm.per_class();
        let mean = per.iter().map(|c| c.f1).sum::<f64>() / per.len() as f64;
        prop_assert!((cm.macro_f1() - mean).abs() < 1e-12);
        for c in &per {
            prop_assert!((0.0..=1.0).contains(&c.f1));
        }
    }

    #[test]
    fn accuracy_is_trace_over_total(c in cells(TaskFraming::ThreeClass)) {
        let cm = matrix(TaskFraming::ThreeClass, &c);
        let hits = c.iter().filter(|(g, p)| Some(*g) == *p).count();
        prop_assert_eq!(cm.trace() as usize, hits);
        prop_assert_eq!(cm.total() as usize, c.len());
        prop_assert!((cm.accuracy() - hits as f64 / c.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn ranking_metrics_ignore_monotone_rescaling(pts in scored()) {
        let warped: Vec<(f64, bool)> = pts.iter().map(|&(s, y)| (3.0 * s.powi(3) + 1.0, y)).collect();
        prop_assert_eq!(auroc(&pts).unwrap(), auroc(&warped).unwrap());
        prop_assert!((average_precision(&pts).unwrap() - average_precision(&warped).unwrap()).abs() < 1e-12);
        let flipped: Vec<(f64, bool)> = pts.iter().map(|&(s, y)| (-s, y)).collect();
        prop_assert!((auroc(&pts).unwrap() + auroc(&flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn srt_round_trips(t in transcripts()) {
        let text = emit_srt(&t);
        prop_assert_eq!(parse_srt(&text).unwrap(), t.clone());
        prop_assert_eq!(emit_srt(&parse_srt(&text).unwrap()), text);
    }

    #[test]
    fn masking_counts_and_timing(t in transcripts(), rate in 0.0f64..=1.0, seed in any::<u64>()) {
        let words = t.word_count();
        let w = mask_words(&t, &MaskSpec::word(rate, seed)).unwrap();
        let masked = w.cues.iter().flat_map(|c| c.text.split_whitespace()).filter(|x| *x == WORD_MASK).count();
        prop_assert_eq!(masked, (rate * words as f64).round() as usize);
        prop_assert_eq!(w.word_count(), words);
        let u = mask_utterances(&t, &MaskSpec::utterance(rate, seed)).unwrap();
        let gone = u.cues.iter().filter(|c| c.text == UTTERANCE_PLACEHOLDER).count();
        prop_assert_eq!(gone, (rate * t.cues.len() as f64).round() as usize);
        for m in [&w, &u] {
            for (a, b) in m.cues.iter().zip(&t.cues) {
                prop_assert_eq!((a.start_ms, a.end_ms), (b.start_ms, b.end_ms));
            }
        }
    }

    #[test]
    fn sampled_metars_round_trip(seed in any::<u64>(), instrument in any::<bool>()) {
        let family = if instrument { WeatherFamily::Instrument } else { WeatherFamily::Visual };
        let raw = sample_metar(&mut ChaCha8Rng::seed_from_u64(seed), family);
        let m = parse_metar(&raw).unwrap();
        prop_assert_eq!(emit_metar(&m), raw);
    }

    #[test]
    fn labels_ignore_aircraft_order(idx in 0usize..100, seed in any::<u64>()) {
        let s = &dataset().scenarios[idx];
        let af = Airfield::khaf();
        let metar = s.metar().unwrap();
        let mut shuffled = s.aircraft.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = label_scenario(&af, &s.events, &s.aircraft, &metar).unwrap();
        let b = label_scenario(&af, &s.events, &shuffled, &metar).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, label_scenario(&af, &s.events, &s.aircraft, &metar).unwrap());
    }
}

#[test]
fn stored_labels_match_the_rules() {
    let af = Airfield::khaf();
    for s in &dataset().scenarios {
        let label = label_scenario(&af, &s.events, &s.aircraft, &s.metar().unwrap()).unwrap();
        assert_eq!(label, s.label3, "{}", s.id);
        assert_eq!(collapse_to_binary(label), s.label_binary, "{}", s.id);
        assert_eq!(s.hazard_type.label(), s.label3, "{}", s.id);
    }
    assert_eq!(collapse_to_binary(SafetyLabel3::Nominal), SafetyLabelBinary::Nominal);
    assert_eq!(collapse_to_binary(SafetyLabel3::Warning), SafetyLabelBinary::Danger);
    assert_eq!(collapse_to_binary(SafetyLabel3::Hazard), SafetyLabelBinary::Danger);
}
