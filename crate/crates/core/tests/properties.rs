mod common;

use abusivetext::bundle::ModelBundle;
use abusivetext::corpus::{parse_dataset, synth_corpus, Label, ParseOptions, SynthProfile};
use abusivetext::encoder::{EncoderConfig, EncoderModel, SubwordTokenizer, TrainConfigEnc, PAD_ID};
use abusivetext::linear::{decide, sigmoid, train_lr, TrainConfigLR};
use abusivetext::metrics::{confusion, macro_f1, ConfusionMatrix};
use abusivetext::pipeline::{train_bundle, RunConfig};
use abusivetext::textprep::{preprocess, CleanPolicy};
use abusivetext::vectorizer::{SparseVector, TfIdfConfig, TfIdfModel};
use abusivetext::ModelKind;
use common::{brute_macro_f1, tfidf_oracle};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Abusive), Just(Label::NonAbusive)]
}

fn comment() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            "[a-zA-Z]{1,8}",
            "[\u{0B85}-\u{0BB9}]{1,5}",
            "[\u{0D05}-\u{0D39}]{1,5}",
            Just("https://x.co/a".to_owned()),
            "[!?.,#@]{1,3}",
            "[ \t\n]{1,3}",
            any::<char>().prop_map(String::from),
        ],
        0..12,
    )
    .prop_map(|parts| parts.concat())
}

proptest! {
    #[test]
    fn preprocess_is_idempotent_and_trimmed(text in comment()) {
        let policy = CleanPolicy::default();
        let once = preprocess(&text, &policy);
        prop_assert_eq!(preprocess(&once, &policy), once.clone());
        prop_assert_eq!(once.trim(), once.as_str());
        prop_assert!(!once.contains("  "));
        prop_assert!(once.chars().all(|c| c == ' ' || !c.is_whitespace()));
    }

    #[test]
    fn sigmoid_is_symmetric_and_bounded(z in -30.0f64..30.0) {
        let p = sigmoid(z);
        prop_assert!(p > 0.0 && p < 1.0);
        prop_assert!((sigmoid(-z) - (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_is_strictly_bounded_everywhere(z in any::<f64>().prop_filter("finite", |z| z.is_finite())) {
        let p = sigmoid(z);
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn decide_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(decide(lo, 0.5).value() <= decide(hi, 0.5).value());
    }

    #[test]
    fn swapping_the_positive_class_preserves_macro_f1(
        pairs in prop::collection::vec((label(), label()), 1..60)
    ) {
        let (gold, pred): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let cm = confusion(&gold, &pred).unwrap();
        let flip = |v: &[Label]| v.iter().map(|l| l.flip()).collect::<Vec<_>>();
        let swapped = confusion(&flip(&gold), &flip(&pred)).unwrap();
        prop_assert_eq!(swapped, ConfusionMatrix::new(cm.tn, cm.fp, cm.fn_, cm.tp));
        prop_assert_eq!(swapped, cm.swapped());
        prop_assert!((macro_f1(&cm) - macro_f1(&swapped)).abs() < 1e-15);
        let f = macro_f1(&cm);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn diagonal_confusion_scores_like_accuracy(tp in 1u64..40, tn in 1u64..40) {
        let cm = ConfusionMatrix::new(tp, 0, 0, tn);
        prop_assert_eq!(macro_f1(&cm), 1.0);
        prop_assert_eq!(cm.accuracy(), 1.0);
    }

    #[test]
    fn sparse_norm_matches_dense(values in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        let dense_norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = SparseVector::from_entries(values.len(), values.iter().copied().enumerate());
        prop_assert!((v.norm() - dense_norm).abs() <= 1e-12 * dense_norm.max(1.0));
        prop_assert_eq!(v.to_dense().len(), values.len());
    }

    #[test]
    fn single_token_document_is_a_unit_one_hot(
        words in prop::collection::vec("[a-z]{1,6}", 1..6),
        pick in 0usize..6,
    ) {
        let model = TfIdfModel::fit(&words, &TfIdfConfig::default()).unwrap();
        let word = &words[pick % words.len()];
        let v = model.transform(word);
        prop_assert_eq!(v.nnz(), 1);
        prop_assert!((v.entries()[0].1 - 1.0).abs() < 1e-15);
        prop_assert_eq!(Some(v.entries()[0].0), model.vocab().index_of(word));
    }

    #[test]
    fn tokenizer_encoding_has_fixed_shape(text in comment()) {
        let corpus = ["vanakkam nanba", "yenna da", "സുഖമാണോ", "வணக்கம்"];
        let tok = SubwordTokenizer::train(&corpus, 60).unwrap();
        let cleaned = preprocess(&text, &CleanPolicy::default());
        let enc = tok.encode(&cleaned, 128);
        prop_assert_eq!(enc.ids.len(), 128);
        prop_assert_eq!(enc.mask.len(), 128);
        let pieces = tok.tokenize(&cleaned).len();
        prop_assert_eq!(enc.real_len(), (1 + pieces).min(128));
        for (id, m) in enc.ids.iter().zip(&enc.mask) {
            prop_assert_eq!(*m == 0, *id == PAD_ID);
        }
    }

    #[test]
    fn rows_survive_parsing_in_order(texts in prop::collection::vec("[a-z][a-z ]{0,10}", 1..30)) {
        let mut tsv = String::from("id\ttext\tlabel\n");
        for (k, t) in texts.iter().enumerate() {
            let label = if k % 2 == 0 { "Abusive" } else { "Non-Abusive" };
            tsv.push_str(&format!("c{k}\t{t}\t{label}\n"));
        }
        let split = parse_dataset(tsv.as_bytes(), &ParseOptions::default()).unwrap();
        prop_assert_eq!(split.len(), texts.len());
        for (k, (ex, t)) in split.examples().iter().zip(&texts).enumerate() {
            prop_assert_eq!(&ex.id, &format!("c{k}"));
            prop_assert_eq!(&ex.text, t);
        }
    }
}

#[test]
fn macro_f1_matches_brute_force_on_random_labelings() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                Label::Abusive
            } else {
                Label::NonAbusive
            }
        };
        let gold: Vec<Label> = (0..n).map(|_| draw(&mut rng)).collect();
        let pred: Vec<Label> = (0..n).map(|_| draw(&mut rng)).collect();
        let cm = confusion(&gold, &pred).unwrap();
        assert!((macro_f1(&cm) - brute_macro_f1(&gold, &pred)).abs() < 1e-12);
    }
}

#[test]
fn tfidf_matches_oracle_on_synthetic_text() {
    let split = synth_corpus(3, 20, &SynthProfile::default());
    let policy = CleanPolicy::default();
    let texts: Vec<String> = split.texts().map(|t| preprocess(t, &policy)).collect();
    let model = TfIdfModel::fit(&texts, &TfIdfConfig::default()).unwrap();
    let docs: Vec<Vec<String>> = texts
        .iter()
        .map(|t| t.split_whitespace().map(str::to_owned).collect())
        .collect();
    let (vocab, rows) = tfidf_oracle(&docs);
    assert_eq!(model.vocab().tokens(), vocab.as_slice());
    for (t, row) in texts.iter().zip(&rows) {
        let got = model.transform(t).to_dense();
        for (a, b) in got.iter().zip(row) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

fn separable_lr_data() -> Vec<(SparseVector, Label)> {
    let split = synth_corpus(9, 30, &SynthProfile::default());
    let policy = CleanPolicy::default();
    let texts: Vec<String> = split.texts().map(|t| preprocess(t, &policy)).collect();
    let model = TfIdfModel::fit(&texts, &TfIdfConfig::default()).unwrap();
    texts
        .iter()
        .map(|t| model.transform(t))
        .zip(split.examples().iter().map(|e| e.label.unwrap()))
        .collect()
}

#[test]
fn lr_training_is_deterministic() {
    let data = separable_lr_data();
    let config = TrainConfigLR {
        seed: 21,
        epochs: 10,
        ..TrainConfigLR::default()
    };
    let a = train_lr(&data, &config).unwrap();
    let b = train_lr(&data, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn full_batch_lr_loss_never_increases() {
    // Unit-norm features bound the curvature by 1/4 + l2, so this step is stable.
    let data = separable_lr_data();
    let config = TrainConfigLR {
        learning_rate: 0.5,
        epochs: 40,
        batch_size: data.len(),
        shuffle: false,
        ..TrainConfigLR::default()
    };
    let (_, report) = train_lr(&data, &config).unwrap();
    for w in report.epoch_losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn encoder_trace_shapes_and_probability_bounds() {
    let config = EncoderConfig {
        d_model: 16,
        n_heads: 4,
        n_layers: 2,
        d_ff: 32,
        max_length: 128,
        dropout: 0.0,
    };
    let corpus = ["nalla padam", "mosamana vaarthai", "സുഖമാണോ"];
    let tok = SubwordTokenizer::train(&corpus, 80).unwrap();
    let model = EncoderModel::init(config, tok.vocab_len(), 3).unwrap();
    for text in ["nalla", "mosamana vaarthai sollathe", "", "zzz qqq"] {
        let input = tok.encode(text, 128);
        let trace = model.forward_trace(&input).unwrap();
        let real = input.real_len();
        assert_eq!(trace.positions.len(), real);
        assert_eq!(trace.embeddings.dim(), (real, 16));
        assert_eq!(trace.layers.len(), 2);
        for layer in &trace.layers {
            assert_eq!(layer.output.dim(), (real, 16));
            assert_eq!(layer.attention.len(), 4);
            for head in &layer.attention {
                assert_eq!(head.dim(), (real, real));
            }
        }
        assert!(trace.probability > 0.0 && trace.probability < 1.0);
        assert_eq!(trace.probability, model.forward(&input).unwrap());
    }
}

fn small_run(kind: ModelKind) -> RunConfig {
    let mut cfg = RunConfig {
        model_kind: kind,
        language_tag: "synthetic".into(),
        subword_vocab_size: 120,
        ..RunConfig::default()
    };
    cfg.lr.epochs = 5;
    cfg.encoder = EncoderConfig {
        d_model: 8,
        n_heads: 2,
        n_layers: 1,
        d_ff: 16,
        max_length: 32,
        dropout: 0.0,
    };
    cfg.encoder_train = TrainConfigEnc {
        learning_rate: 1e-3,
        epochs: 2,
        batch_size: 8,
        ..TrainConfigEnc::default()
    };
    cfg
}

#[test]
fn bundles_round_trip_for_both_arms() {
    let train = synth_corpus(1, 12, &SynthProfile::default());
    let dev = synth_corpus(2, 4, &SynthProfile::default());
    for kind in [ModelKind::TfidfLr, ModelKind::MicroEncoder] {
        let (bundle, _) = train_bundle(&small_run(kind), &train, Some(&dev)).unwrap();
        let json = bundle.to_json();
        let loaded = ModelBundle::from_json(&json).unwrap();
        assert_eq!(loaded, bundle);
        assert_eq!(loaded.to_json(), json);
        let a = bundle.classifier().unwrap();
        let b = loaded.classifier().unwrap();
        for ex in dev.examples() {
            assert_eq!(a.predict_proba(&ex.text).unwrap(), b.predict_proba(&ex.text).unwrap());
        }
    }
}
