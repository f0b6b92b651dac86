//! Post-norm transformer encoder with a single-logit sigmoid head, with
//! hand-written backpropagation.
//!
//! Padded positions never enter the computation: a padded key is excluded
//! from every softmax, and a padded query only feeds other padded
//! positions, so the CLS output depends only on the real positions. The
//! forward pass therefore gathers the real positions up front and works on
//! an `(n_real, d_model)` activation matrix.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenizer::EncodedInput;
use super::{EncoderConfig, EncoderError};
use crate::corpus::Label;
use crate::linear::{bce_with_logit, sigmoid};

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub wq: Array2<f64>,
    pub bq: Array2<f64>,
    pub wk: Array2<f64>,
    pub bk: Array2<f64>,
    pub wv: Array2<f64>,
    pub bv: Array2<f64>,
    pub wo: Array2<f64>,
    pub bo: Array2<f64>,
    pub ln1_gamma: Array2<f64>,
    pub ln1_beta: Array2<f64>,
    pub w1: Array2<f64>,
    pub b1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array2<f64>,
    pub ln2_gamma: Array2<f64>,
    pub ln2_beta: Array2<f64>,
}

impl LayerParams {
    fn zeros(d: usize, d_ff: usize) -> Self {
        let z = Array2::zeros;
        Self {
            wq: z((d, d)),
            bq: z((1, d)),
            wk: z((d, d)),
            bk: z((1, d)),
            wv: z((d, d)),
            bv: z((1, d)),
            wo: z((d, d)),
            bo: z((1, d)),
            ln1_gamma: z((1, d)),
            ln1_beta: z((1, d)),
            w1: z((d, d_ff)),
            b1: z((1, d_ff)),
            w2: z((d_ff, d)),
            b2: z((1, d)),
            ln2_gamma: z((1, d)),
            ln2_beta: z((1, d)),
        }
    }

    fn fields(&self) -> [(&'static str, &Array2<f64>); 16] {
        [
            ("wq", &self.wq),
            ("bq", &self.bq),
            ("wk", &self.wk),
            ("bk", &self.bk),
            ("wv", &self.wv),
            ("bv", &self.bv),
            ("wo", &self.wo),
            ("bo", &self.bo),
            ("ln1_gamma", &self.ln1_gamma),
            ("ln1_beta", &self.ln1_beta),
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
            ("ln2_gamma", &self.ln2_gamma),
            ("ln2_beta", &self.ln2_beta),
        ]
    }

    fn fields_mut(&mut self) -> [(&'static str, &mut Array2<f64>); 16] {
        [
            ("wq", &mut self.wq),
            ("bq", &mut self.bq),
            ("wk", &mut self.wk),
            ("bk", &mut self.bk),
            ("wv", &mut self.wv),
            ("bv", &mut self.bv),
            ("wo", &mut self.wo),
            ("bo", &mut self.bo),
            ("ln1_gamma", &mut self.ln1_gamma),
            ("ln1_beta", &mut self.ln1_beta),
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
            ("ln2_gamma", &mut self.ln2_gamma),
            ("ln2_beta", &mut self.ln2_beta),
        ]
    }
}

/// Every trainable tensor. Biases and gains are stored as `(1, n)` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub token_embedding: Array2<f64>,
    pub position_embedding: Array2<f64>,
    pub layers: Vec<LayerParams>,
    pub head_weight: Array2<f64>,
    pub head_bias: Array2<f64>,
}

impl EncoderParams {
    pub fn zeros(config: &EncoderConfig, vocab_len: usize) -> Self {
        let d = config.d_model;
        Self {
            token_embedding: Array2::zeros((vocab_len, d)),
            position_embedding: Array2::zeros((config.max_length, d)),
            layers: (0..config.n_layers)
                .map(|_| LayerParams::zeros(d, config.d_ff))
                .collect(),
            head_weight: Array2::zeros((d, 1)),
            head_bias: Array2::zeros((1, 1)),
        }
    }

    /// Xavier-uniform weights and embeddings, zero biases, unit gains.
    pub fn init(config: &EncoderConfig, vocab_len: usize, seed: u64) -> Self {
        let mut p = Self::zeros(config, vocab_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, t) in p.named_tensors_mut() {
            let leaf = name.rsplit('.').next().unwrap_or(&name);
            if leaf.ends_with("gamma") {
                t.fill(1.0);
            } else if t.nrows() > 1 {
                let (fan_in, fan_out) = t.dim();
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                t.mapv_inplace(|_| rng.gen_range(-a..a));
            }
        }
        p
    }

    pub fn named_tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out = vec![
            ("token_embedding".to_owned(), &self.token_embedding),
            ("position_embedding".to_owned(), &self.position_embedding),
        ];
        for (l, layer) in self.layers.iter().enumerate() {
            out.extend(layer.fields().into_iter().map(|(n, t)| (format!("layers.{l}.{n}"), t)));
        }
        out.push(("head_weight".to_owned(), &self.head_weight));
        out.push(("head_bias".to_owned(), &self.head_bias));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Array2<f64>)> {
        let mut out = vec![
            ("token_embedding".to_owned(), &mut self.token_embedding),
            ("position_embedding".to_owned(), &mut self.position_embedding),
        ];
        for (l, layer) in self.layers.iter_mut().enumerate() {
            out.extend(
                layer
                    .fields_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("layers.{l}.{n}"), t)),
            );
        }
        out.push(("head_weight".to_owned(), &mut self.head_weight));
        out.push(("head_bias".to_owned(), &mut self.head_bias));
        out
    }

    /// `self -= step * grad`, tensor by tensor.
    pub fn apply_update(&mut self, grad: &EncoderParams, step: f64) {
        for ((_, p), (_, g)) in self.named_tensors_mut().into_iter().zip(grad.named_tensors()) {
            p.scaled_add(-step, g);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    fn scale(&mut self, factor: f64) {
        for (_, t) in self.named_tensors_mut() {
            *t *= factor;
        }
    }
}

/// Per-layer intermediates exposed for inspection.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    /// One `(n_real, n_real)` matrix per head.
    pub attention: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Original positions of the real tokens, in order.
    pub positions: Vec<usize>,
    pub embeddings: Array2<f64>,
    pub layers: Vec<LayerTrace>,
    pub logit: f64,
    pub probability: f64,
}

/// Real positions, embedded input, per-layer caches, logit.
type RunOutput = (Vec<usize>, Array2<f64>, Vec<LayerCache>, f64);

struct LayerCache {
    input: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    attention: Vec<Array2<f64>>,
    context: Array2<f64>,
    drop1: Option<Array2<f64>>,
    norm1: LayerNormCache,
    hidden_pre: Array2<f64>,
    hidden: Array2<f64>,
    drop2: Option<Array2<f64>>,
    norm2: LayerNormCache,
}

struct LayerNormCache {
    normalized: Array2<f64>,
    output: Array2<f64>,
    inv_std: Vec<f64>,
}

fn layer_norm(x: &Array2<f64>, gamma: &Array2<f64>, beta: &Array2<f64>) -> LayerNormCache {
    let d = x.ncols() as f64;
    let mut normalized = x.clone();
    let mut inv_std = Vec::with_capacity(x.nrows());
    for mut row in normalized.rows_mut() {
        let mean = row.sum() / d;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d;
        let r = 1.0 / (var + LN_EPS).sqrt();
        row.mapv_inplace(|v| (v - mean) * r);
        inv_std.push(r);
    }
    let output = &normalized * gamma + beta;
    LayerNormCache {
        normalized,
        output,
        inv_std,
    }
}

/// Returns `d input`, accumulating gain/shift gradients.
fn layer_norm_backward(
    d_out: &Array2<f64>,
    cache: &LayerNormCache,
    gamma: &Array2<f64>,
    d_gamma: &mut Array2<f64>,
    d_beta: &mut Array2<f64>,
) -> Array2<f64> {
    *d_gamma += &(d_out * &cache.normalized).sum_axis(Axis(0)).insert_axis(Axis(0));
    *d_beta += &d_out.sum_axis(Axis(0)).insert_axis(Axis(0));
    let d_norm = d_out * gamma;
    let d = d_out.ncols() as f64;
    let mut d_in = Array2::zeros(d_out.raw_dim());
    for (i, mut row) in d_in.rows_mut().into_iter().enumerate() {
        let g = d_norm.row(i);
        let xhat = cache.normalized.row(i);
        let mean_g = g.sum() / d;
        let mean_gx = g.iter().zip(xhat.iter()).map(|(a, b)| a * b).sum::<f64>() / d;
        for j in 0..row.len() {
            row[j] = cache.inv_std[i] * (g[j] - mean_g - xhat[j] * mean_gx);
        }
    }
    d_in
}

fn softmax_rows(scores: &mut Array2<f64>) {
    for mut row in scores.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

fn affine(x: &Array2<f64>, w: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    x.dot(w) + b
}

fn sum_rows(x: &Array2<f64>) -> Array2<f64> {
    x.sum_axis(Axis(0)).insert_axis(Axis(0))
}

/// Inverted-dropout keep mask, or `None` when dropout is off.
fn dropout_mask(shape: (usize, usize), rate: f64, rng: Option<&mut ChaCha8Rng>) -> Option<Array2<f64>> {
    let rng = rng?;
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(Array2::from_shape_fn(shape, |_| {
        if rng.gen_bool(rate) {
            0.0
        } else {
            keep
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    config: EncoderConfig,
    params: EncoderParams,
}

impl EncoderModel {
    pub fn new(config: EncoderConfig, params: EncoderParams) -> Result<Self, EncoderError> {
        config.validate()?;
        let expected = EncoderParams::zeros(&config, params.token_embedding.nrows());
        let layout_ok = expected.layers.len() == params.layers.len()
            && expected
                .named_tensors()
                .iter()
                .zip(params.named_tensors())
                .all(|((n1, a), (n2, b))| *n1 == n2 && a.dim() == b.dim());
        if !layout_ok {
            return Err(EncoderError::Inconsistent(
                "parameter shapes do not match the config".into(),
            ));
        }
        if !params.all_finite() {
            return Err(EncoderError::Inconsistent("non-finite parameter".into()));
        }
        Ok(Self { config, params })
    }

    pub fn init(config: EncoderConfig, vocab_len: usize, seed: u64) -> Result<Self, EncoderError> {
        config.validate()?;
        let params = EncoderParams::init(&config, vocab_len, seed);
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn params(&self) -> &EncoderParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut EncoderParams {
        &mut self.params
    }

    pub fn vocab_len(&self) -> usize {
        self.params.token_embedding.nrows()
    }

    fn real_positions(&self, input: &EncodedInput) -> Result<Vec<usize>, EncoderError> {
        let len = self.config.max_length;
        if input.ids.len() != len || input.mask.len() != len {
            return Err(EncoderError::DimensionMismatch(format!(
                "expected {len} ids and mask entries, got {} and {}",
                input.ids.len(),
                input.mask.len()
            )));
        }
        if input.mask[0] != 1 {
            return Err(EncoderError::DimensionMismatch(
                "position 0 (CLS) must be unmasked".into(),
            ));
        }
        let mut positions = Vec::new();
        for (p, (&id, &m)) in input.ids.iter().zip(&input.mask).enumerate() {
            match m {
                0 => {}
                1 => {
                    if id as usize >= self.vocab_len() {
                        return Err(EncoderError::DimensionMismatch(format!(
                            "token id {id} outside vocabulary of {}",
                            self.vocab_len()
                        )));
                    }
                    positions.push(p);
                }
                other => {
                    return Err(EncoderError::DimensionMismatch(format!(
                        "mask value {other} is not 0/1"
                    )))
                }
            }
        }
        Ok(positions)
    }

    fn embed(&self, input: &EncodedInput, positions: &[usize]) -> Array2<f64> {
        let d = self.config.d_model;
        let mut x = Array2::zeros((positions.len(), d));
        for (row, &p) in positions.iter().enumerate() {
            let id = input.ids[p] as usize;
            let mut r = x.row_mut(row);
            r += &self.params.token_embedding.row(id);
            r += &self.params.position_embedding.row(p);
        }
        x
    }

    fn layer_forward(&self, layer: &LayerParams, x: Array2<f64>, mut rng: Option<&mut ChaCha8Rng>) -> LayerCache {
        let (n, d) = x.dim();
        let heads = self.config.n_heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();

        let q = affine(&x, &layer.wq, &layer.bq);
        let k = affine(&x, &layer.wk, &layer.bk);
        let v = affine(&x, &layer.wv, &layer.bv);
        let mut context = Array2::zeros((n, d));
        let mut attention = Vec::with_capacity(heads);
        for h in 0..heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let mut scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut scores);
            context.slice_mut(cols).assign(&scores.dot(&v.slice(cols)));
            attention.push(scores);
        }
        let mut attended = affine(&context, &layer.wo, &layer.bo);
        let drop1 = dropout_mask((n, d), self.config.dropout, rng.as_deref_mut());
        if let Some(m) = &drop1 {
            attended *= m;
        }
        let norm1 = layer_norm(&(&x + &attended), &layer.ln1_gamma, &layer.ln1_beta);

        let hidden_pre = affine(&norm1.output, &layer.w1, &layer.b1);
        let hidden = hidden_pre.mapv(|v| v.max(0.0));
        let mut ff = affine(&hidden, &layer.w2, &layer.b2);
        let drop2 = dropout_mask((n, d), self.config.dropout, rng);
        if let Some(m) = &drop2 {
            ff *= m;
        }
        let norm2 = layer_norm(&(&norm1.output + &ff), &layer.ln2_gamma, &layer.ln2_beta);
        debug_assert_eq!(norm2.output.dim(), (n, d));
        LayerCache {
            input: x,
            q,
            k,
            v,
            attention,
            context,
            drop1,
            norm1,
            hidden_pre,
            hidden,
            drop2,
            norm2,
        }
    }

    fn layer_backward(
        &self,
        layer: &LayerParams,
        grad: &mut LayerParams,
        c: &LayerCache,
        d_out: &Array2<f64>,
    ) -> Array2<f64> {
        let d = self.config.d_model;
        let heads = self.config.n_heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();

        let d_res2 = layer_norm_backward(
            d_out,
            &c.norm2,
            &layer.ln2_gamma,
            &mut grad.ln2_gamma,
            &mut grad.ln2_beta,
        );
        let mut d_ff = d_res2.clone();
        if let Some(m) = &c.drop2 {
            d_ff *= m;
        }
        grad.w2 += &c.hidden.t().dot(&d_ff);
        grad.b2 += &sum_rows(&d_ff);
        let mut d_hidden = d_ff.dot(&layer.w2.t());
        d_hidden.zip_mut_with(&c.hidden_pre, |g, pre| {
            if *pre <= 0.0 {
                *g = 0.0;
            }
        });
        grad.w1 += &c.norm1.output.t().dot(&d_hidden);
        grad.b1 += &sum_rows(&d_hidden);
        let d_norm1 = d_res2 + d_hidden.dot(&layer.w1.t());

        let d_res1 = layer_norm_backward(
            &d_norm1,
            &c.norm1,
            &layer.ln1_gamma,
            &mut grad.ln1_gamma,
            &mut grad.ln1_beta,
        );
        let mut d_attended = d_res1.clone();
        if let Some(m) = &c.drop1 {
            d_attended *= m;
        }
        grad.wo += &c.context.t().dot(&d_attended);
        grad.bo += &sum_rows(&d_attended);
        let d_context = d_attended.dot(&layer.wo.t());

        let mut d_q = Array2::zeros(c.q.raw_dim());
        let mut d_k = Array2::zeros(c.k.raw_dim());
        let mut d_v = Array2::zeros(c.v.raw_dim());
        for (h, attn) in c.attention.iter().enumerate() {
            let cols = s![.., h * dh..(h + 1) * dh];
            let d_ctx_h = d_context.slice(cols);
            let d_attn = d_ctx_h.dot(&c.v.slice(cols).t());
            d_v.slice_mut(cols).assign(&attn.t().dot(&d_ctx_h));
            let d_scores = softmax_backward(attn, &d_attn) * scale;
            d_q.slice_mut(cols).assign(&d_scores.dot(&c.k.slice(cols)));
            d_k.slice_mut(cols).assign(&d_scores.t().dot(&c.q.slice(cols)));
        }
        let x = &c.input;
        grad.wq += &x.t().dot(&d_q);
        grad.bq += &sum_rows(&d_q);
        grad.wk += &x.t().dot(&d_k);
        grad.bk += &sum_rows(&d_k);
        grad.wv += &x.t().dot(&d_v);
        grad.bv += &sum_rows(&d_v);
        d_res1 + d_q.dot(&layer.wq.t()) + d_k.dot(&layer.wk.t()) + d_v.dot(&layer.wv.t())
    }

    fn run(&self, input: &EncodedInput, rng: Option<&mut ChaCha8Rng>) -> Result<RunOutput, EncoderError> {
        let positions = self.real_positions(input)?;
        let embedded = self.embed(input, &positions);
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.params.layers.len());
        let mut rng = rng;
        for layer in &self.params.layers {
            let x = caches
                .last()
                .map(|c| c.norm2.output.clone())
                .unwrap_or_else(|| embedded.clone());
            caches.push(self.layer_forward(layer, x, rng.as_deref_mut()));
        }
        let top = caches.last().map(|c| &c.norm2.output).unwrap_or(&embedded);
        debug_assert_eq!(top.dim(), (positions.len(), self.config.d_model));
        let logit = top.row(0).dot(&self.params.head_weight.column(0)) + self.params.head_bias[[0, 0]];
        Ok((positions, embedded, caches, logit))
    }

    pub fn logit(&self, input: &EncodedInput) -> Result<f64, EncoderError> {
        self.run(input, None).map(|r| r.3)
    }

    /// Probability that the input is abusive.
    pub fn forward(&self, input: &EncodedInput) -> Result<f64, EncoderError> {
        self.logit(input).map(sigmoid)
    }

    pub fn forward_trace(&self, input: &EncodedInput) -> Result<ForwardTrace, EncoderError> {
        let (positions, embeddings, caches, logit) = self.run(input, None)?;
        Ok(ForwardTrace {
            positions,
            embeddings,
            layers: caches
                .into_iter()
                .map(|c| LayerTrace {
                    attention: c.attention,
                    output: c.norm2.output,
                })
                .collect(),
            logit,
            probability: sigmoid(logit),
        })
    }

    /// Cross-entropy of one example; gradients (scaled by `weight`) are
    /// accumulated into `grad`.
    fn accumulate(
        &self,
        input: &EncodedInput,
        label: Label,
        weight: f64,
        grad: &mut EncoderParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<f64, EncoderError> {
        let (positions, embedded, caches, logit) = self.run(input, rng)?;
        let target = f64::from(label.value());
        let loss = bce_with_logit(logit, target);
        let d_logit = (sigmoid(logit) - target) * weight;

        let top = caches.last().map(|c| &c.norm2.output).unwrap_or(&embedded);
        let d = self.config.d_model;
        grad.head_bias[[0, 0]] += d_logit;
        grad.head_weight.column_mut(0).scaled_add(d_logit, &top.row(0));
        let mut d_x = Array2::zeros((positions.len(), d));
        d_x.row_mut(0).scaled_add(d_logit, &self.params.head_weight.column(0));

        for (l, cache) in caches.iter().enumerate().rev() {
            d_x = self.layer_backward(&self.params.layers[l], &mut grad.layers[l], cache, &d_x);
        }
        for (row, &p) in positions.iter().enumerate() {
            let id = input.ids[p] as usize;
            let g = d_x.row(row);
            let mut t = grad.token_embedding.row_mut(id);
            t += &g;
            let mut pe = grad.position_embedding.row_mut(p);
            pe += &g;
        }
        Ok(loss)
    }

    /// Mean cross-entropy over `batch`.
    pub fn loss(&self, batch: &[(&EncodedInput, Label)]) -> Result<f64, EncoderError> {
        if batch.is_empty() {
            return Err(EncoderError::EmptyData);
        }
        let mut total = 0.0;
        for (x, y) in batch {
            total += bce_with_logit(self.logit(x)?, f64::from(y.value()));
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean cross-entropy over `batch` and its gradient.
    pub fn loss_and_gradient(&self, batch: &[(&EncodedInput, Label)]) -> Result<(f64, EncoderParams), EncoderError> {
        self.loss_and_gradient_with(batch, None)
    }

    pub(crate) fn loss_and_gradient_with(
        &self,
        batch: &[(&EncodedInput, Label)],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, EncoderParams), EncoderError> {
        if batch.is_empty() {
            return Err(EncoderError::EmptyData);
        }
        let mut grad = EncoderParams::zeros(&self.config, self.vocab_len());
        let mut total = 0.0;
        for (x, y) in batch {
            total += self.accumulate(x, *y, 1.0, &mut grad, rng.as_deref_mut())?;
        }
        let inv = 1.0 / batch.len() as f64;
        grad.scale(inv);
        Ok((total * inv, grad))
    }
}

fn softmax_backward(attn: &Array2<f64>, d_attn: &Array2<f64>) -> Array2<f64> {
    let mut out = attn * d_attn;
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let dot = row.sum();
        let a: ArrayView2<f64> = attn.view();
        for j in 0..row.len() {
            row[j] -= a[[i, j]] * dot;
        }
    }
    out
}

/// Flat on-disk layout of one parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRecord {
    pub name: String,
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

pub(crate) fn params_to_records(params: &EncoderParams) -> Vec<TensorRecord> {
    params
        .named_tensors()
        .into_iter()
        .map(|(name, t)| TensorRecord {
            name,
            shape: [t.nrows(), t.ncols()],
            data: t.iter().copied().collect(),
        })
        .collect()
}

pub(crate) fn params_from_records(
    config: &EncoderConfig,
    records: Vec<TensorRecord>,
) -> Result<EncoderParams, EncoderError> {
    let vocab_len = records
        .iter()
        .find(|r| r.name == "token_embedding")
        .map(|r| r.shape[0])
        .ok_or_else(|| EncoderError::Inconsistent("missing token_embedding".into()))?;
    let mut params = EncoderParams::zeros(config, vocab_len);
    let slots = params.named_tensors_mut();
    if slots.len() != records.len() {
        return Err(EncoderError::Inconsistent(format!(
            "expected {} tensors, found {}",
            slots.len(),
            records.len()
        )));
    }
    for ((name, slot), rec) in slots.into_iter().zip(records) {
        if rec.name != name || [slot.nrows(), slot.ncols()] != rec.shape {
            return Err(EncoderError::Inconsistent(format!(
                "tensor {:?} {:?} does not match expected {name:?} {:?}",
                rec.name,
                rec.shape,
                slot.dim()
            )));
        }
        let t = Array2::from_shape_vec((rec.shape[0], rec.shape[1]), rec.data)
            .map_err(|e| EncoderError::Inconsistent(format!("tensor {name}: {e}")))?;
        *slot = t;
    }
    Ok(params)
}
