//! Independent reference implementations used as test oracles. None of
//! this code calls into the library paths it checks.

#![allow(dead_code)]

use abusivetext::corpus::Label;
use abusivetext::encoder::EncoderModel;
use abusivetext::linear::{gradient, objective, LinearModel};
use abusivetext::vectorizer::SparseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// TF-IDF from first principles: unigram tokens, raw counts, smoothed IDF,
/// L2 normalization. Returns the sorted vocabulary and one dense row per
/// document.
pub fn tfidf_oracle(docs: &[Vec<String>]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut vocab: Vec<String> = Vec::new();
    for doc in docs {
        for t in doc {
            if !vocab.contains(t) {
                vocab.push(t.clone());
            }
        }
    }
    vocab.sort();
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = docs
        .iter()
        .map(|doc| {
            let raw: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| doc.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.iter().map(|v| if norm > 0.0 { v / norm } else { 0.0 }).collect()
        })
        .collect();
    (vocab, rows)
}

/// Macro-F1 straight from label lists, one class at a time.
pub fn brute_macro_f1(gold: &[Label], pred: &[Label]) -> f64 {
    let mut total = 0.0;
    for class in [Label::NonAbusive, Label::Abusive] {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        for (g, p) in gold.iter().zip(pred) {
            match (*g == class, *p == class) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        total += f1;
    }
    total / 2.0
}

/// Gold/pred lists realizing the given confusion counts.
pub fn labels_for_counts(tp: usize, fn_: usize, fp: usize, tn: usize) -> (Vec<Label>, Vec<Label>) {
    use Label::{Abusive as A, NonAbusive as N};
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (n, g, p) in [(tp, A, A), (fn_, A, N), (fp, N, A), (tn, N, N)] {
        gold.extend(std::iter::repeat_n(g, n));
        pred.extend(std::iter::repeat_n(p, n));
    }
    (gold, pred)
}

/// Relative L2 error. The denominator is floored at 1e-6 so a tensor whose
/// true gradient is zero (the key bias, since softmax ignores a per-row
/// shift) is scored by its absolute round-off instead of noise over noise.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let na = analytic.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-6)
}

/// Worst relative error between the analytic logistic-regression gradient
/// and central differences of the objective, over `trials` random
/// instances with at most 8 features and 16 examples.
pub fn lr_gradcheck(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dim = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=16);
        let data: Vec<(SparseVector, Label)> = (0..n)
            .map(|_| {
                let mut entries: Vec<(usize, f64)> = Vec::new();
                for i in 0..dim {
                    if rng.gen_bool(0.6) {
                        entries.push((i, rng.gen_range(-2.0..2.0)));
                    }
                }
                let y = if rng.gen_bool(0.5) {
                    Label::Abusive
                } else {
                    Label::NonAbusive
                };
                (SparseVector::from_entries(dim, entries), y)
            })
            .collect();
        let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let bias = rng.gen_range(-1.0..1.0);
        let l2 = if rng.gen_bool(0.5) {
            rng.gen_range(0.0..0.5)
        } else {
            0.0
        };
        let model = LinearModel::new(weights.clone(), bias).unwrap();
        let batch: Vec<_> = data.iter().collect();
        let (gw, gb) = gradient(&model, &batch, l2).unwrap();

        let loss_at = |w: &[f64], b: f64| objective(&LinearModel::new(w.to_vec(), b).unwrap(), &data, l2).unwrap();
        let mut numeric = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut plus = weights.clone();
            let mut minus = weights.clone();
            plus[i] += h;
            minus[i] -= h;
            numeric.push((loss_at(&plus, bias) - loss_at(&minus, bias)) / (2.0 * h));
        }
        numeric.push((loss_at(&weights, bias + h) - loss_at(&weights, bias - h)) / (2.0 * h));
        let mut analytic = gw;
        analytic.push(gb);
        worst = worst.max(rel_error(&analytic, &numeric));
    }
    worst
}

/// Relative error per parameter tensor between the encoder's analytic
/// gradient and central differences of its loss.
pub fn encoder_gradcheck(
    model: &EncoderModel,
    batch: &[(&abusivetext::encoder::EncodedInput, Label)],
) -> Vec<(String, f64)> {
    let h = 1e-5;
    let (_, grad) = model.loss_and_gradient(batch).unwrap();
    let analytic: Vec<(String, Vec<f64>)> = grad
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.iter().copied().collect()))
        .collect();
    let mut probe = model.clone();
    let mut out = Vec::new();
    for (k, (name, a)) in analytic.iter().enumerate() {
        let mut numeric = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let orig = nth_param(&mut probe, k, i, None);
            nth_param(&mut probe, k, i, Some(orig + h));
            let up = probe.loss(batch).unwrap();
            nth_param(&mut probe, k, i, Some(orig - h));
            let down = probe.loss(batch).unwrap();
            nth_param(&mut probe, k, i, Some(orig));
            numeric.push((up - down) / (2.0 * h));
        }
        out.push((name.clone(), rel_error(a, &numeric)));
    }
    out
}

fn nth_param(model: &mut EncoderModel, tensor: usize, index: usize, set: Option<f64>) -> f64 {
    let mut tensors = model.params_mut().named_tensors_mut();
    let t = &mut tensors[tensor].1;
    let slot = t.iter_mut().nth(index).expect("index in range");
    let old = *slot;
    if let Some(v) = set {
        *slot = v;
    }
    old
}

/// Random Unicode strings mixing ASCII words, punctuation, URLs, assorted
/// whitespace, emoji, Tamil and Malayalam code points, and arbitrary
/// scalar values.
pub fn random_unicode(rng: &mut ChaCha8Rng) -> String {
    let parts = rng.gen_range(0..12);
    let mut s = String::new();
    for _ in 0..parts {
        match rng.gen_range(0..9) {
            0 => s.push_str(["hello", "WORLD", "Straße", "İstanbul", "abc123"][rng.gen_range(0..5)]),
            1 => s.push_str(["!", "??", "...", "#", "@user", "₹", "–", "\"'"][rng.gen_range(0..8)]),
            2 => s.push_str(
                ["https://t.co/x", "http://a.b/c?d=1", "www.site.in/p", "HTTPS://UP.CASE"][rng.gen_range(0..4)],
            ),
            3 => s.push([' ', '\t', '\n', '\u{00A0}', '\u{3000}', '\u{2028}'][rng.gen_range(0..6)]),
            4 => s.push(['😀', '🔥', '\u{200D}', '\u{FE0F}'][rng.gen_range(0..4)]),
            5 => {
                for _ in 0..rng.gen_range(1..6) {
                    s.push(char::from_u32(rng.gen_range(0x0B80..=0x0BFF)).unwrap_or('க'));
                }
            }
            6 => {
                for _ in 0..rng.gen_range(1..6) {
                    s.push(char::from_u32(rng.gen_range(0x0D00..=0x0D7F)).unwrap_or('ക'));
                }
            }
            7 => {
                let c = loop {
                    if let Some(c) = char::from_u32(rng.gen_range(0..0x11_0000)) {
                        break c;
                    }
                };
                s.push(c);
            }
            _ => s.push_str("வணக்கம் നമസ്കാരം"),
        }
    }
    s
}
