//! Hashed character n-gram logistic regression.
//!
//! Documents become L2-normalized count vectors over hashed character
//! n-grams; a linear model is fit by seeded SGD (or full-batch gradient
//! descent) on the logistic loss with an L2 penalty on the weights.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    Sgd,
    FullBatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    /// Number of hash buckets; must be a power of two.
    pub hash_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            ngram_min: 3,
            ngram_max: 5,
            hash_dim: 1 << 18,
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
            mode: TrainMode::Sgd,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(Error::Config(format!(
                "invalid n-gram range ({}, {})",
                self.ngram_min, self.ngram_max
            )));
        }
        if !self.hash_dim.is_power_of_two() || self.hash_dim > u32::MAX as usize {
            return Err(Error::Config(format!(
                "hash_dim must be a power of two below 2^32, got {}",
                self.hash_dim
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }

    fn bit_key(&self) -> Vec<(u32, u64)> {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| (i, v.to_bits()))
            .collect()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Hashed n-gram counts of `text`, normalized to unit L2 norm. Invalid UTF-8
/// is decoded lossily first, so identical bytes always give identical
/// features.
pub fn featurize(text: &[u8], cfg: &ClassifierConfig) -> SparseVector {
    let s = String::from_utf8_lossy(text);
    let mut bounds: Vec<usize> = s.char_indices().map(|(i, _)| i).collect();
    bounds.push(s.len());
    let n_chars = bounds.len() - 1;
    let mask = (cfg.hash_dim - 1) as u64;

    let mut hashed = Vec::new();
    for n in cfg.ngram_min..=cfg.ngram_max {
        if n > n_chars {
            break;
        }
        for start in 0..=n_chars - n {
            let gram = &s.as_bytes()[bounds[start]..bounds[start + n]];
            hashed.push((fnv1a(gram) & mask) as u32);
        }
    }
    hashed.sort_unstable();

    let mut out = SparseVector::default();
    for idx in hashed {
        if out.indices.last() == Some(&idx) {
            *out.values.last_mut().unwrap() += 1.0;
        } else {
            out.indices.push(idx);
            out.values.push(1.0);
        }
    }
    let norm = out.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.values.iter_mut().for_each(|v| *v /= norm);
    }
    out
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic loss of one example plus `l2 / 2 * ||w||^2`.
pub fn example_loss(weights: &[f64], bias: f64, x: &SparseVector, y: f64, l2: f64) -> f64 {
    let z = x.dot(weights) + bias;
    let data = y * softplus(-z) + (1.0 - y) * softplus(z);
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`example_loss`] with respect to `(weights, bias)`.
pub fn example_gradient(
    weights: &[f64],
    bias: f64,
    x: &SparseVector,
    y: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let err = sigmoid(x.dot(weights) + bias) - y;
    let mut g: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    for (i, v) in x.iter() {
        g[i] += err * v;
    }
    (g, err)
}

/// Mean logistic loss over `examples` plus the L2 penalty.
pub fn objective(weights: &[f64], bias: f64, examples: &[(&SparseVector, f64)], l2: f64) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let data: f64 = examples
        .iter()
        .map(|(x, y)| {
            let z = x.dot(weights) + bias;
            y * softplus(-z) + (1.0 - y) * softplus(z)
        })
        .sum();
    data / examples.len() as f64 + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: ClassifierConfig,
    /// Set when the two classes had identical feature multisets.
    pub degenerate: bool,
    /// Training objective after each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainedClassifier {
    pub fn score_features(&self, x: &SparseVector) -> f64 {
        sigmoid(x.dot(&self.weights) + self.bias)
    }

    /// Probability that `doc` is machine-generated.
    pub fn score(&self, doc: &Document) -> f64 {
        self.score_features(&featurize(&doc.text, &self.config))
    }

    pub fn votes_machine(&self, doc: &Document) -> bool {
        self.score(doc) > 0.5
    }
}

fn is_degenerate(pos: &[&SparseVector], neg: &[&SparseVector]) -> bool {
    let mut a: Vec<_> = pos.iter().map(|x| x.bit_key()).collect();
    let mut b: Vec<_> = neg.iter().map(|x| x.bit_key()).collect();
    a.sort();
    b.sort();
    if a == b {
        return true;
    }
    let first = &a[0];
    a.iter().chain(&b).all(|k| k == first)
}

/// Fits the model on pre-computed features. Positives are labeled 1
/// (machine), negatives 0.
pub fn train_features(
    pos: &[&SparseVector],
    neg: &[&SparseVector],
    cfg: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    cfg.validate()?;
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::EmptyClass);
    }
    let degenerate = is_degenerate(pos, neg);
    if degenerate {
        log::warn!(
            "classifier training data is degenerate: positive and negative features are identical"
        );
    }

    let examples: Vec<(&SparseVector, f64)> = pos
        .iter()
        .map(|x| (*x, 1.0))
        .chain(neg.iter().map(|x| (*x, 0.0)))
        .collect();

    let (weights, bias, epoch_losses) = match cfg.mode {
        TrainMode::Sgd => sgd(&examples, cfg),
        TrainMode::FullBatch => full_batch(&examples, cfg),
    };
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Invariant("non-finite classifier weights".into()));
    }
    Ok(TrainedClassifier {
        weights,
        bias,
        config: cfg.clone(),
        degenerate,
        epoch_losses,
    })
}

fn sgd(examples: &[(&SparseVector, f64)], cfg: &ClassifierConfig) -> (Vec<f64>, f64, Vec<f64>) {
    let lr = cfg.learning_rate;
    let decay = 1.0 - lr * cfg.l2;
    let mut rng = rng_for(cfg.seed, Stream::Classifier, 0);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    // weights = scale * v, so the L2 shrink is O(1) per step
    let mut v = vec![0.0f64; cfg.hash_dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &e in &order {
            let (x, y) = examples[e];
            let err = sigmoid(scale * x.dot(&v) + bias) - y;
            scale *= decay;
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
            let step = lr * err / scale;
            for (i, xv) in x.iter() {
                v[i] -= step * xv;
            }
            bias -= lr * err;
        }
        let w: Vec<f64> = v.iter().map(|x| x * scale).collect();
        losses.push(objective(&w, bias, examples, cfg.l2));
    }
    v.iter_mut().for_each(|w| *w *= scale);
    (v, bias, losses)
}

fn full_batch(
    examples: &[(&SparseVector, f64)],
    cfg: &ClassifierConfig,
) -> (Vec<f64>, f64, Vec<f64>) {
    let lr = cfg.learning_rate;
    let n = examples.len() as f64;
    let mut w = vec![0.0f64; cfg.hash_dim];
    let mut bias = 0.0f64;
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut grad = vec![0.0f64; cfg.hash_dim];

    for _ in 0..cfg.epochs {
        grad.iter_mut().zip(&w).for_each(|(g, wi)| *g = cfg.l2 * wi);
        let mut gb = 0.0;
        for (x, y) in examples {
            let err = (sigmoid(x.dot(&w) + bias) - y) / n;
            for (i, xv) in x.iter() {
                grad[i] += err * xv;
            }
            gb += err;
        }
        w.iter_mut().zip(&grad).for_each(|(wi, g)| *wi -= lr * g);
        bias -= lr * gb;
        losses.push(objective(&w, bias, examples, cfg.l2));
    }
    (w, bias, losses)
}

pub fn train(
    pos: &[Document],
    neg: &[Document],
    cfg: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    cfg.validate()?;
    let fp: Vec<SparseVector> = pos.iter().map(|d| featurize(&d.text, cfg)).collect();
    let fneg: Vec<SparseVector> = neg.iter().map(|d| featurize(&d.text, cfg)).collect();
    let rp: Vec<&SparseVector> = fp.iter().collect();
    let rn: Vec<&SparseVector> = fneg.iter().collect();
    train_features(&rp, &rn, cfg)
}

pub fn score(model: &TrainedClassifier, doc: &Document) -> f64 {
    model.score(doc)
}

/// A classifier that can be trained per detection round. The ensemble
/// featurizes every document once and reuses the features across rounds.
pub trait ClassifierBackend: Sync {
    type Features: Send + Sync;
    type Model: Send + Sync;

    fn featurize(&self, doc: &Document) -> Self::Features;

    fn train(
        &self,
        pos: &[&Self::Features],
        neg: &[&Self::Features],
        seed: u64,
    ) -> Result<Self::Model>;

    /// Probability of the machine class.
    fn score(&self, model: &Self::Model, features: &Self::Features) -> f64;
}

#[derive(Debug, Clone, Default)]
pub struct HashedNgramBackend {
    pub config: ClassifierConfig,
}

impl HashedNgramBackend {
    pub fn new(config: ClassifierConfig) -> Self {
        HashedNgramBackend { config }
    }
}

impl ClassifierBackend for HashedNgramBackend {
    type Features = SparseVector;
    type Model = TrainedClassifier;

    fn featurize(&self, doc: &Document) -> SparseVector {
        featurize(&doc.text, &self.config)
    }

    fn train(
        &self,
        pos: &[&SparseVector],
        neg: &[&SparseVector],
        seed: u64,
    ) -> Result<TrainedClassifier> {
        let cfg = ClassifierConfig {
            seed,
            ..self.config.clone()
        };
        train_features(pos, neg, &cfg)
    }

    fn score(&self, model: &TrainedClassifier, features: &SparseVector) -> f64 {
        model.score_features(features)
    }
}

pub const MODEL_MAGIC: &[u8; 8] = b"RDCLF\0\0\0";
pub const MODEL_VERSION: u8 = 1;

/// Binary layout, little-endian: `magic[8] | version u8 | ngram_min u32 |
/// ngram_max u32 | hash_dim u64 | epochs u32 | learning_rate f64 | l2 f64 |
/// seed u64 | mode u8 | bias f64 | weights f64 * hash_dim`.
pub fn save_model(model: &TrainedClassifier, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let c = &model.config;
    let mut header = Vec::with_capacity(64);
    header.extend_from_slice(MODEL_MAGIC);
    header.push(MODEL_VERSION);
    header.extend_from_slice(&(c.ngram_min as u32).to_le_bytes());
    header.extend_from_slice(&(c.ngram_max as u32).to_le_bytes());
    header.extend_from_slice(&(c.hash_dim as u64).to_le_bytes());
    header.extend_from_slice(&(c.epochs as u32).to_le_bytes());
    header.extend_from_slice(&c.learning_rate.to_le_bytes());
    header.extend_from_slice(&c.l2.to_le_bytes());
    header.extend_from_slice(&c.seed.to_le_bytes());
    header.push(match c.mode {
        TrainMode::Sgd => 0,
        TrainMode::FullBatch => 1,
    });
    header.extend_from_slice(&model.bias.to_le_bytes());
    w.write_all(&header).map_err(|e| Error::io(path, e))?;
    for x in &model.weights {
        w.write_all(&x.to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedClassifier> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        Ok(buf)
    };
    if take(8)? != MODEL_MAGIC {
        return Err(Error::Format("not a classifier model (bad magic)".into()));
    }
    let version = take(1)?[0];
    if version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "unsupported model version {version}"
        )));
    }
    let u32_of = |b: Vec<u8>| u32::from_le_bytes(b.try_into().unwrap());
    let u64_of = |b: Vec<u8>| u64::from_le_bytes(b.try_into().unwrap());
    let f64_of = |b: Vec<u8>| f64::from_le_bytes(b.try_into().unwrap());
    let ngram_min = u32_of(take(4)?) as usize;
    let ngram_max = u32_of(take(4)?) as usize;
    let hash_dim = u64_of(take(8)?) as usize;
    let epochs = u32_of(take(4)?) as usize;
    let learning_rate = f64_of(take(8)?);
    let l2 = f64_of(take(8)?);
    let seed = u64_of(take(8)?);
    let mode = match take(1)?[0] {
        0 => TrainMode::Sgd,
        1 => TrainMode::FullBatch,
        m => return Err(Error::Format(format!("unknown training mode {m}"))),
    };
    let config = ClassifierConfig {
        ngram_min,
        ngram_max,
        hash_dim,
        epochs,
        learning_rate,
        l2,
        seed,
        mode,
    };
    config
        .validate()
        .map_err(|e| Error::Format(e.to_string()))?;
    let bias = f64_of(take(8)?);
    let raw = take(hash_dim * 8)?;
    let weights = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(TrainedClassifier {
        weights,
        bias,
        config,
        degenerate: false,
        epoch_losses: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(text: &str, n: usize, prefix: &str) -> Vec<Document> {
        (0..n)
            .map(|i| Document::new(format!("{prefix}{i}"), text))
            .collect()
    }

    fn small_cfg() -> ClassifierConfig {
        ClassifierConfig {
            hash_dim: 1 << 12,
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn features_are_unit_norm_and_stable() {
        let cfg = small_cfg();
        let a = featurize(b"the quick brown fox", &cfg);
        let b = featurize(b"the quick brown fox", &cfg);
        assert_eq!(a, b);
        let norm: f64 = a.values.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(featurize(b"ab", &cfg).nnz(), 0);
    }

    #[test]
    fn hashing_is_pinned() {
        // FNV-1a of "abc"; fixed so features never drift across platforms.
        assert_eq!(fnv1a(b"abc"), 0xe71fa2190541574b);
    }

    #[test]
    fn separable_classes() {
        let pos = docs(&"x".repeat(40), 30, "p");
        let neg = docs(&"y".repeat(40), 30, "n");
        let model = train(&pos, &neg, &small_cfg()).unwrap();
        assert!(pos.iter().all(|d| model.score(d) > 0.9));
        assert!(neg.iter().all(|d| model.score(d) < 0.5));
        assert!(!model.degenerate);
    }

    #[test]
    fn training_is_deterministic() {
        let pos = docs("machine text repeated phrase", 10, "p");
        let neg = docs("some human words here", 10, "n");
        let a = train(&pos, &neg, &small_cfg()).unwrap();
        let b = train(&pos, &neg, &small_cfg()).unwrap();
        assert_eq!(a.weights.len(), b.weights.len());
        assert!(a
            .weights
            .iter()
            .zip(&b.weights)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    }

    #[test]
    fn identical_classes_score_near_half() {
        let mut pool = docs("alpha beta gamma", 10, "a");
        pool.extend(docs("delta epsilon zeta", 10, "b"));
        let model = train(&pool, &pool, &small_cfg()).unwrap();
        assert!(model.degenerate);
        for d in &pool {
            assert!((model.score(d) - 0.5).abs() < 0.1, "{}", model.score(d));
        }
    }

    #[test]
    fn empty_document_scores_bias() {
        let pos = docs("xxxxxxxx", 5, "p");
        let neg = docs("yyyyyyyy", 5, "n");
        let model = train(&pos, &neg, &small_cfg()).unwrap();
        let empty = Document::new("e", "");
        assert_eq!(model.score(&empty), sigmoid(model.bias));
        let s = model.score(&pos[0]);
        assert_eq!(s + (1.0 - s), 1.0);
    }

    #[test]
    fn empty_class_rejected() {
        assert!(matches!(
            train(&docs("abc", 2, "p"), &[], &small_cfg()),
            Err(Error::EmptyClass)
        ));
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = ClassifierConfig {
            hash_dim: 1000,
            ..ClassifierConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ClassifierConfig {
            ngram_min: 5,
            ngram_max: 3,
            ..ClassifierConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn model_round_trip() {
        let pos = docs("xxxxxxxx", 5, "p");
        let neg = docs("yyyyyyyy", 5, "n");
        let model = train(&pos, &neg, &small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.weights, model.weights);
        assert_eq!(back.bias, model.bias);
        assert_eq!(back.config, model.config);
        assert_eq!(back.score(&pos[0]), model.score(&pos[0]));
    }
}
