//! Decoder-only transformer with hand-written backpropagation.
//!
//! Pre-norm blocks over a residual stream: RMS-normalized multi-head causal
//! attention with a learned per-head relative-distance bias on the logits,
//! then an RMS-normalized GELU MLP. The token embedding is tied to the
//! output projection. No absolute positions: all position information comes
//! from the relative bias.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::ModelConfig;
use crate::error::ModelError;
use crate::scalar::{sc, Scalar};

const RMS_EPS: f64 = 1e-5;

/// One block's weights. Linear layers store [out, in] and compute
/// `y = x @ W^T`.
#[derive(Clone, Debug)]
pub(crate) struct LayerTensors<F> {
    pub wq: Array2<F>,
    pub wk: Array2<F>,
    pub wv: Array2<F>,
    pub wo: Array2<F>,
    pub fc1: Array2<F>,
    pub fc2: Array2<F>,
    /// [heads, max_seq_len] additive attention bias indexed by query-key
    /// distance.
    pub rel_bias: Array2<F>,
}

/// The full parameter (or gradient, or optimizer-moment) set.
#[derive(Clone, Debug)]
pub(crate) struct ParamSet<F> {
    pub wte: Array2<F>,
    pub layers: Vec<LayerTensors<F>>,
}

impl<F: Scalar> ParamSet<F> {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let d = cfg.dim;
        let layers = (0..cfg.depth)
            .map(|_| LayerTensors {
                wq: Array2::zeros((d, d)),
                wk: Array2::zeros((d, d)),
                wv: Array2::zeros((d, d)),
                wo: Array2::zeros((d, d)),
                fc1: Array2::zeros((4 * d, d)),
                fc2: Array2::zeros((d, 4 * d)),
                rel_bias: Array2::zeros((cfg.heads, cfg.max_seq_len)),
            })
            .collect();
        Self {
            wte: Array2::zeros((cfg.vocab_size, d)),
            layers,
        }
    }

    /// Named views over every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Array2<F>)> {
        let mut out: Vec<(String, &Array2<F>)> = vec![("wte".to_string(), &self.wte)];
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{i}.wq"), &l.wq));
            out.push((format!("layer{i}.wk"), &l.wk));
            out.push((format!("layer{i}.wv"), &l.wv));
            out.push((format!("layer{i}.wo"), &l.wo));
            out.push((format!("layer{i}.fc1"), &l.fc1));
            out.push((format!("layer{i}.fc2"), &l.fc2));
            out.push((format!("layer{i}.rel_bias"), &l.rel_bias));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Array2<F>)> {
        let mut out: Vec<(String, &mut Array2<F>)> = vec![("wte".to_string(), &mut self.wte)];
        for (i, l) in self.layers.iter_mut().enumerate() {
            out.push((format!("layer{i}.wq"), &mut l.wq));
            out.push((format!("layer{i}.wk"), &mut l.wk));
            out.push((format!("layer{i}.wv"), &mut l.wv));
            out.push((format!("layer{i}.wo"), &mut l.wo));
            out.push((format!("layer{i}.fc1"), &mut l.fc1));
            out.push((format!("layer{i}.fc2"), &mut l.fc2));
            out.push((format!("layer{i}.rel_bias"), &mut l.rel_bias));
        }
        out
    }

    pub fn add_assign(&mut self, other: &ParamSet<F>) {
        self.wte += &other.wte;
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.wq += &b.wq;
            a.wk += &b.wk;
            a.wv += &b.wv;
            a.wo += &b.wo;
            a.fc1 += &b.fc1;
            a.fc2 += &b.fc2;
            a.rel_bias += &b.rel_bias;
        }
    }

    pub fn scale(&mut self, factor: F) {
        for (_, t) in self.tensors_mut() {
            t.mapv_inplace(|v| v * factor);
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Per-sequence gradients with the same shape as the parameters.
pub struct Gradients<F>(pub(crate) ParamSet<F>);

impl<F: Scalar> Gradients<F> {
    /// Named gradient tensors in the same order as the parameters.
    pub fn named_tensors(&self) -> Vec<(String, &Array2<F>)> {
        self.0.tensors()
    }
}

/// The model: configuration plus parameters, immutable during inference.
#[derive(Clone, Debug)]
pub struct Transformer<F: Scalar> {
    cfg: ModelConfig,
    pub(crate) params: ParamSet<F>,
}

fn randn<F: Scalar>(rows: usize, cols: usize, std: f64, rng: &mut impl Rng) -> Array2<F> {
    let normal = Normal::new(0.0, std).expect("std is finite");
    Array2::from_shape_fn((rows, cols), |_| sc(normal.sample(rng)))
}

impl<F: Scalar> Transformer<F> {
    /// Standard initialization: normal(0, 0.02) embeddings and input
    /// projections, zero output projections and relative bias.
    pub fn init(cfg: ModelConfig, rng: &mut impl Rng) -> Result<Self, ModelError> {
        cfg.validate()?;
        let d = cfg.dim;
        let std = 0.02;
        let mut params = ParamSet::zeros(&cfg);
        params.wte = randn(cfg.vocab_size, d, std, rng);
        for l in &mut params.layers {
            l.wq = randn(d, d, std, rng);
            l.wk = randn(d, d, std, rng);
            l.wv = randn(d, d, std, rng);
            l.fc1 = randn(4 * d, d, std, rng);
            // wo, fc2, rel_bias stay zero: residual branches start inert.
        }
        Ok(Self { cfg, params })
    }

    /// Every tensor drawn from normal(0, std); used by numeric tests that
    /// need nonzero gradients flowing through all paths.
    pub fn init_full_random(cfg: ModelConfig, std: f64, rng: &mut impl Rng) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut model = Self::init(cfg, rng)?;
        for (_, t) in model.params.tensors_mut() {
            let fresh: Array2<F> = randn(t.nrows(), t.ncols(), std, rng);
            t.assign(&fresh);
        }
        Ok(model)
    }

    /// Reassembles a model from deserialized parameters.
    pub(crate) fn from_parts(cfg: ModelConfig, params: ParamSet<F>) -> Result<Self, ModelError> {
        cfg.validate()?;
        Ok(Self { cfg, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn param_count(&self) -> usize {
        self.params.param_count()
    }

    /// Named parameter tensors (read-only), for checkpointing and tests.
    pub fn named_tensors(&self) -> Vec<(String, &Array2<F>)> {
        self.params.tensors()
    }

    /// Mutable access for finite-difference probing in tests.
    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Array2<F>)> {
        self.params.tensors_mut()
    }

    /// Logits for every input position: shape [len, vocab_size].
    pub fn logits(&self, input: &[u8]) -> Result<Array2<F>, ModelError> {
        self.check_len(input.len())?;
        let (cache, _) = self.forward(input, None);
        Ok(cache.logits)
    }

    fn check_len(&self, len: usize) -> Result<(), ModelError> {
        if len > self.cfg.max_seq_len {
            return Err(ModelError::SequenceOverflow {
                len,
                max: self.cfg.max_seq_len,
            });
        }
        if len == 0 {
            return Err(ModelError::Config("empty input sequence".into()));
        }
        Ok(())
    }

    /// Mean cross-entropy of next-token prediction over the weighted
    /// positions (no gradients).
    pub fn loss(&self, input: &[u8], targets: &[u8], weights: &[F]) -> Result<F, ModelError> {
        self.check_len(input.len())?;
        let (cache, _) = self.forward(input, None);
        Ok(cross_entropy(&cache.logits, targets, weights))
    }

    /// Loss plus gradients for one sequence.
    pub fn loss_and_grad(
        &self,
        input: &[u8],
        targets: &[u8],
        weights: &[F],
    ) -> Result<(F, Gradients<F>), ModelError> {
        self.check_len(input.len())?;
        let (cache, layer_caches) = self.forward(input, Some(()));
        let loss = cross_entropy(&cache.logits, targets, weights);
        let grads = self.backward(input, targets, weights, &cache, &layer_caches);
        Ok((loss, Gradients(grads)))
    }

    // ---- full-sequence forward -------------------------------------------

    fn forward(&self, input: &[u8], keep: Option<()>) -> (SeqCache<F>, Vec<LayerCache<F>>) {
        let len = input.len();
        let d = self.cfg.dim;
        let heads = self.cfg.heads;
        let hd = self.cfg.head_dim();
        let inv_scale: F = sc(1.0 / (hd as f64).sqrt());

        let mut x = Array2::<F>::zeros((len, d));
        for (p, &tok) in input.iter().enumerate() {
            x.row_mut(p).assign(&self.params.wte.row(usize::from(tok)));
        }

        let mut layer_caches = Vec::with_capacity(if keep.is_some() { self.cfg.depth } else { 0 });

        for layer in &self.params.layers {
            let x_in = x;
            let (a, inv_a) = rmsnorm_rows(&x_in);

            let q = a.dot(&layer.wq.t());
            let k = a.dot(&layer.wk.t());
            let v = a.dot(&layer.wv.t());

            let mut concat = Array2::<F>::zeros((len, d));
            let mut weights_per_head = Vec::with_capacity(heads);
            for h in 0..heads {
                let cols = s![.., h * hd..(h + 1) * hd];
                let qh = q.slice(cols);
                let kh = k.slice(cols);
                let vh = v.slice(cols);

                let mut scores = qh.dot(&kh.t());
                scores.mapv_inplace(|v| v * inv_scale);
                for i in 0..len {
                    for j in 0..=i {
                        scores[[i, j]] = scores[[i, j]] + layer.rel_bias[[h, i - j]];
                    }
                }
                let w = causal_softmax(&scores);
                let oh = w.dot(&vh);
                concat.slice_mut(cols).assign(&oh);
                weights_per_head.push(w);
            }

            let attn = concat.dot(&layer.wo.t());
            let x_mid = &x_in + &attn;

            let (m, inv_m) = rmsnorm_rows(&x_mid);
            let f1 = m.dot(&layer.fc1.t());
            let g = f1.mapv(gelu);
            let f2 = g.dot(&layer.fc2.t());
            x = &x_mid + &f2;

            if keep.is_some() {
                layer_caches.push(LayerCache {
                    x_in,
                    a,
                    inv_a,
                    q,
                    k,
                    v,
                    weights: weights_per_head,
                    concat,
                    x_mid,
                    m,
                    inv_m,
                    f1,
                    g,
                });
            }
        }

        let (hf, inv_f) = rmsnorm_rows(&x);
        let logits = hf.dot(&self.params.wte.t());
        (
            SeqCache {
                x_final: x,
                hf,
                inv_f,
                logits,
            },
            layer_caches,
        )
    }

    // ---- full-sequence backward ------------------------------------------

    fn backward(
        &self,
        input: &[u8],
        targets: &[u8],
        weights: &[F],
        cache: &SeqCache<F>,
        layer_caches: &[LayerCache<F>],
    ) -> ParamSet<F> {
        let len = input.len();
        let d = self.cfg.dim;
        let heads = self.cfg.heads;
        let hd = self.cfg.head_dim();
        let inv_scale: F = sc(1.0 / (hd as f64).sqrt());
        let one = F::one();

        let mut grads = ParamSet::<F>::zeros(&self.cfg);

        // d loss / d logits = weight * (softmax(logits) - onehot(target))
        let mut d_logits = Array2::<F>::zeros((len, self.cfg.vocab_size));
        for p in 0..len {
            let probs = softmax_row(&cache.logits.row(p).to_owned());
            let w = weights[p];
            if w == F::zero() {
                continue;
            }
            for j in 0..self.cfg.vocab_size {
                let target = if usize::from(targets[p]) == j { one } else { F::zero() };
                d_logits[[p, j]] = w * (probs[j] - target);
            }
        }

        // Tied output head: logits = hf @ wte^T.
        general_mat_mul(one, &d_logits.t(), &cache.hf, one, &mut grads.wte);
        let d_hf = d_logits.dot(&self.params.wte);
        let mut d_x = rmsnorm_rows_backward(&d_hf, &cache.x_final, &cache.inv_f);

        for li in (0..self.cfg.depth).rev() {
            let layer = &self.params.layers[li];
            let lc = &layer_caches[li];
            let g_layer = &mut grads.layers[li];

            // MLP block: x_out = x_mid + fc2(gelu(fc1(m))).
            let d_f2 = &d_x;
            general_mat_mul(one, &d_f2.t(), &lc.g, one, &mut g_layer.fc2);
            let d_g = d_f2.dot(&layer.fc2);
            let mut d_f1 = d_g;
            ndarray::Zip::from(&mut d_f1)
                .and(&lc.f1)
                .for_each(|dv, &x| *dv = *dv * gelu_derivative(x));
            general_mat_mul(one, &d_f1.t(), &lc.m, one, &mut g_layer.fc1);
            let d_m = d_f1.dot(&layer.fc1);
            let d_norm_m = rmsnorm_rows_backward(&d_m, &lc.x_mid, &lc.inv_m);
            let d_x_mid = &d_x + &d_norm_m;

            // Attention block: x_mid = x_in + wo(concat(heads)).
            let d_attn = &d_x_mid;
            general_mat_mul(one, &d_attn.t(), &lc.concat, one, &mut g_layer.wo);
            let d_concat = d_attn.dot(&layer.wo);

            let mut d_q = Array2::<F>::zeros((len, d));
            let mut d_k = Array2::<F>::zeros((len, d));
            let mut d_v = Array2::<F>::zeros((len, d));
            for h in 0..heads {
                let cols = s![.., h * hd..(h + 1) * hd];
                let w = &lc.weights[h];
                let d_oh = d_concat.slice(cols);
                let vh = lc.v.slice(cols);
                let kh = lc.k.slice(cols);
                let qh = lc.q.slice(cols);

                let d_w = d_oh.dot(&vh.t());
                {
                    let mut d_vh = d_v.slice_mut(cols);
                    general_mat_mul(one, &w.t(), &d_oh, one, &mut d_vh);
                }

                // Row-wise softmax backward; masked entries carry w = 0 and
                // contribute nothing.
                let mut d_scores = Array2::<F>::zeros((len, len));
                for i in 0..len {
                    let mut dot = F::zero();
                    for j in 0..=i {
                        dot = dot + w[[i, j]] * d_w[[i, j]];
                    }
                    for j in 0..=i {
                        d_scores[[i, j]] = w[[i, j]] * (d_w[[i, j]] - dot);
                    }
                }

                for i in 0..len {
                    for j in 0..=i {
                        g_layer.rel_bias[[h, i - j]] =
                            g_layer.rel_bias[[h, i - j]] + d_scores[[i, j]];
                    }
                }

                {
                    let mut d_qh = d_q.slice_mut(cols);
                    general_mat_mul(inv_scale, &d_scores, &kh, one, &mut d_qh);
                }
                {
                    let mut d_kh = d_k.slice_mut(cols);
                    general_mat_mul(inv_scale, &d_scores.t(), &qh, one, &mut d_kh);
                }
            }

            general_mat_mul(one, &d_q.t(), &lc.a, one, &mut g_layer.wq);
            general_mat_mul(one, &d_k.t(), &lc.a, one, &mut g_layer.wk);
            general_mat_mul(one, &d_v.t(), &lc.a, one, &mut g_layer.wv);
            let mut d_a = d_q.dot(&layer.wq);
            d_a += &d_k.dot(&layer.wk);
            d_a += &d_v.dot(&layer.wv);
            let d_norm_a = rmsnorm_rows_backward(&d_a, &lc.x_in, &lc.inv_a);
            d_x = &d_x_mid + &d_norm_a;
        }

        for (p, &tok) in input.iter().enumerate() {
            let mut row = grads.wte.row_mut(usize::from(tok));
            row += &d_x.row(p);
        }
        grads
    }

    // ---- incremental decoding --------------------------------------------

    /// Greedy or temperature sampling from a prompt. Temperature 0 means
    /// strict argmax with ties broken by the lowest token id; generation
    /// stops at the EOS token or after `max_new` tokens. The returned
    /// sequence excludes the prompt.
    pub fn generate(
        &self,
        prompt: &[u8],
        max_new: usize,
        temperature: f64,
        rng: &mut impl Rng,
    ) -> Result<Vec<u8>, ModelError> {
        if prompt.is_empty() {
            return Err(ModelError::Config("empty prompt".into()));
        }
        if prompt.len() + max_new > self.cfg.max_seq_len {
            return Err(ModelError::SequenceOverflow {
                len: prompt.len() + max_new,
                max: self.cfg.max_seq_len,
            });
        }

        let mut cache = KvCache::new(&self.cfg);
        let mut logits = Array1::zeros(self.cfg.vocab_size);
        for (pos, &tok) in prompt.iter().enumerate() {
            logits = self.forward_one(tok, pos, &mut cache);
        }

        let mut out = Vec::with_capacity(max_new);
        for step in 0..max_new {
            let next = if temperature == 0.0 {
                argmax_lowest_id(&logits)
            } else {
                sample_with_temperature(&logits, temperature, rng)
            };
            out.push(next);
            if next == self.cfg.eos_id || step + 1 == max_new {
                break;
            }
            logits = self.forward_one(next, prompt.len() + step, &mut cache);
        }
        Ok(out)
    }

    /// Single-token forward using the KV cache; returns the logits row.
    fn forward_one(&self, token: u8, pos: usize, cache: &mut KvCache<F>) -> Array1<F> {
        let d = self.cfg.dim;
        let heads = self.cfg.heads;
        let hd = self.cfg.head_dim();
        let inv_scale: F = sc(1.0 / (hd as f64).sqrt());

        let mut x = self.params.wte.row(usize::from(token)).to_owned();
        for (layer, (ck, cv)) in self.params.layers.iter().zip(cache.layers.iter_mut()) {
            let a = rmsnorm_vec(&x);
            let q = layer.wq.dot(&a);
            let k = layer.wk.dot(&a);
            let v = layer.wv.dot(&a);
            ck.row_mut(pos).assign(&k);
            cv.row_mut(pos).assign(&v);

            let mut concat = Array1::<F>::zeros(d);
            for h in 0..heads {
                let hs = h * hd;
                let qh = q.slice(s![hs..hs + hd]);
                let mut scores = Array1::<F>::zeros(pos + 1);
                for t in 0..=pos {
                    let kt = ck.slice(s![t, hs..hs + hd]);
                    scores[t] = qh.dot(&kt) * inv_scale + layer.rel_bias[[h, pos - t]];
                }
                let w = softmax_row(&scores);
                for i in 0..hd {
                    let mut acc = F::zero();
                    for t in 0..=pos {
                        acc = acc + w[t] * cv[[t, hs + i]];
                    }
                    concat[hs + i] = acc;
                }
            }
            let attn = layer.wo.dot(&concat);
            x += &attn;

            let m = rmsnorm_vec(&x);
            let f1 = layer.fc1.dot(&m);
            let g = f1.mapv(gelu);
            let f2 = layer.fc2.dot(&g);
            x += &f2;
        }
        let hf = rmsnorm_vec(&x);
        self.params.wte.dot(&hf)
    }
}

struct SeqCache<F> {
    x_final: Array2<F>,
    hf: Array2<F>,
    inv_f: Array1<F>,
    logits: Array2<F>,
}

struct LayerCache<F> {
    x_in: Array2<F>,
    a: Array2<F>,
    inv_a: Array1<F>,
    q: Array2<F>,
    k: Array2<F>,
    v: Array2<F>,
    weights: Vec<Array2<F>>,
    concat: Array2<F>,
    x_mid: Array2<F>,
    m: Array2<F>,
    inv_m: Array1<F>,
    f1: Array2<F>,
    g: Array2<F>,
}

struct KvCache<F> {
    layers: Vec<(Array2<F>, Array2<F>)>,
}

impl<F: Scalar> KvCache<F> {
    fn new(cfg: &ModelConfig) -> Self {
        let layers = (0..cfg.depth)
            .map(|_| {
                (
                    Array2::zeros((cfg.max_seq_len, cfg.dim)),
                    Array2::zeros((cfg.max_seq_len, cfg.dim)),
                )
            })
            .collect();
        Self { layers }
    }
}

// ---- numeric primitives ----------------------------------------------------

/// Row-wise RMS normalization; returns the normalized rows and each row's
/// inverse RMS for the backward pass.
fn rmsnorm_rows<F: Scalar>(x: &Array2<F>) -> (Array2<F>, Array1<F>) {
    let n: F = sc(x.ncols() as f64);
    let eps: F = sc(RMS_EPS);
    let mut out = x.clone();
    let mut inv = Array1::zeros(x.nrows());
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let ms = row.iter().fold(F::zero(), |acc, &v| acc + v * v) / n;
        let ri = (ms + eps).sqrt().recip();
        row.mapv_inplace(|v| v * ri);
        inv[i] = ri;
    }
    (out, inv)
}

/// dx = ri * dy - (ri^3 / n) * (dy . x) * x, row by row.
fn rmsnorm_rows_backward<F: Scalar>(dy: &Array2<F>, x: &Array2<F>, inv: &Array1<F>) -> Array2<F> {
    let n: F = sc(x.ncols() as f64);
    let mut dx = Array2::zeros(x.raw_dim());
    for i in 0..x.nrows() {
        let ri = inv[i];
        let xr = x.row(i);
        let dyr = dy.row(i);
        let dot = xr
            .iter()
            .zip(dyr.iter())
            .fold(F::zero(), |acc, (&a, &b)| acc + a * b);
        let coef = ri * ri * ri / n * dot;
        let mut dxr = dx.row_mut(i);
        for j in 0..x.ncols() {
            dxr[j] = ri * dyr[j] - coef * xr[j];
        }
    }
    dx
}

fn rmsnorm_vec<F: Scalar>(x: &Array1<F>) -> Array1<F> {
    let n: F = sc(x.len() as f64);
    let eps: F = sc(RMS_EPS);
    let ms = x.iter().fold(F::zero(), |acc, &v| acc + v * v) / n;
    let ri = (ms + eps).sqrt().recip();
    x.mapv(|v| v * ri)
}

/// Row-wise softmax over the causal prefix `j <= i`; strictly-future entries
/// come out exactly zero.
fn causal_softmax<F: Scalar>(scores: &Array2<F>) -> Array2<F> {
    let len = scores.nrows();
    let mut out = Array2::zeros(scores.raw_dim());
    for i in 0..len {
        let mut max = F::neg_infinity();
        for j in 0..=i {
            if scores[[i, j]] > max {
                max = scores[[i, j]];
            }
        }
        let mut sum = F::zero();
        for j in 0..=i {
            let e = (scores[[i, j]] - max).exp();
            out[[i, j]] = e;
            sum = sum + e;
        }
        let inv = sum.recip();
        for j in 0..=i {
            out[[i, j]] = out[[i, j]] * inv;
        }
    }
    out
}

fn softmax_row<F: Scalar>(row: &Array1<F>) -> Array1<F> {
    let max = row.iter().fold(F::neg_infinity(), |a, &b| if b > a { b } else { a });
    let mut out = row.mapv(|v| (v - max).exp());
    let sum = out.iter().fold(F::zero(), |a, &b| a + b);
    let inv = sum.recip();
    out.mapv_inplace(|v| v * inv);
    out
}

/// Tanh-approximation GELU; smooth everywhere, which keeps central finite
/// differences clean.
fn gelu<F: Scalar>(x: F) -> F {
    let c0: F = sc(0.797_884_560_802_865_4); // sqrt(2/pi)
    let c1: F = sc(0.044_715);
    let half: F = sc(0.5);
    let u = c0 * (x + c1 * x * x * x);
    half * x * (F::one() + u.tanh())
}

fn gelu_derivative<F: Scalar>(x: F) -> F {
    let c0: F = sc(0.797_884_560_802_865_4);
    let c1: F = sc(0.044_715);
    let half: F = sc(0.5);
    let three: F = sc(3.0);
    let u = c0 * (x + c1 * x * x * x);
    let t = u.tanh();
    let sech2 = F::one() - t * t;
    half * (F::one() + t) + half * x * sech2 * c0 * (F::one() + three * c1 * x * x)
}

/// Weighted mean cross-entropy over positions.
fn cross_entropy<F: Scalar>(logits: &Array2<F>, targets: &[u8], weights: &[F]) -> F {
    let mut loss = F::zero();
    for p in 0..logits.nrows() {
        if weights[p] == F::zero() {
            continue;
        }
        let row = logits.row(p).to_owned();
        let probs = softmax_row(&row);
        loss = loss - weights[p] * probs[usize::from(targets[p])].ln();
    }
    loss
}

fn argmax_lowest_id<F: Scalar>(logits: &Array1<F>) -> u8 {
    let mut best = 0usize;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    best as u8
}

fn sample_with_temperature<F: Scalar>(
    logits: &Array1<F>,
    temperature: f64,
    rng: &mut impl Rng,
) -> u8 {
    let t: F = sc(temperature);
    let scaled = logits.mapv(|v| v / t);
    let probs = softmax_row(&scaled);
    let dart: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p.to_f64().unwrap_or(0.0);
        if dart < acc {
            return i as u8;
        }
    }
    (probs.len() - 1) as u8
}

/// Uniform position weights of 1/len; the default all-positions loss.
pub fn uniform_weights<F: Scalar>(len: usize) -> Vec<F> {
    vec![sc(1.0 / len as f64); len]
}

/// Weights covering only positions at or after `start` (suffix-only loss).
pub fn suffix_weights<F: Scalar>(len: usize, start: usize) -> Vec<F> {
    let n = len.saturating_sub(start).max(1);
    let w: F = sc(1.0 / n as f64);
    (0..len).map(|p| if p >= start { w } else { F::zero() }).collect()
}
