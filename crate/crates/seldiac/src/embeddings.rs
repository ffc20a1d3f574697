//! Skip-gram word embeddings with negative sampling.
//!
//! A deliberately small trainer in the word2vec mold: fixed context window,
//! unigram^0.75 noise distribution, sigmoid objective, linearly decaying
//! learning rate, and optional subsampling of frequent words. Both the word
//! and context matrices are kept — sense induction builds its graphs in
//! word space, but the context space is sometimes the better probe.
//!
//! With `threads = 1` training is bit-for-bit deterministic for a given
//! seed. With more threads the updates run lock-free on shared matrices
//! (racy by design, word2vec style), which trades determinism for speed.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{Corpus, Scheme};

/// Errors from embedding training and lookup.
#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no vocabulary type survives min_count={0}")]
    EmptyVocabulary(usize),
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct SgnsParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: usize,
    /// Frequent-word subsampling threshold; `<= 0` disables subsampling.
    pub subsample: f64,
    pub learning_rate: f64,
    pub seed: u64,
    /// `1` trains deterministically; more threads run lock-free shared
    /// updates.
    pub threads: usize,
}

impl Default for SgnsParams {
    fn default() -> Self {
        SgnsParams {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 2,
            subsample: 1e-4,
            learning_rate: 0.025,
            seed: 1,
            threads: 1,
        }
    }
}

/// Which vector space to measure similarity in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Word,
    Context,
    /// Word and context vectors concatenated.
    Combined,
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "word" => Ok(Space::Word),
            "context" => Ok(Space::Context),
            "combined" => Ok(Space::Combined),
            _ => Err(format!("unknown space {s:?} (expected word, context, or combined)")),
        }
    }
}

/// Trained embeddings: vocabulary in frequency order plus the word and
/// context matrices.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    word: Vec<f32>,
    ctx: Vec<f32>,
    /// Scheme of the corpus the table was trained on.
    pub trained_on: Scheme,
    /// Probe-set loss after each epoch (empty for loaded/handmade tables).
    pub epoch_probe_loss: Vec<f64>,
}

/// f32 matrix stored as atomic bits so multiple threads can update it
/// without locks. Single-threaded use is exact; concurrent use accepts
/// lost updates, word2vec style.
struct AtomicMatrix {
    cells: Vec<AtomicU32>,
    dim: usize,
}

impl AtomicMatrix {
    fn init<R: Rng>(rows: usize, dim: usize, rng: &mut R, half_range: f32) -> Self {
        let cells = (0..rows * dim)
            .map(|_| {
                let v: f32 = rng.gen_range(-half_range..half_range);
                AtomicU32::new(v.to_bits())
            })
            .collect();
        AtomicMatrix { cells, dim }
    }

    #[inline]
    fn get(&self, row: usize, j: usize) -> f32 {
        f32::from_bits(self.cells[row * self.dim + j].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, row: usize, j: usize, delta: f32) {
        let cell = &self.cells[row * self.dim + j];
        let v = f32::from_bits(cell.load(Ordering::Relaxed)) + delta;
        cell.store(v.to_bits(), Ordering::Relaxed);
    }

    fn load_row(&self, row: usize, buf: &mut [f32]) {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = self.get(row, j);
        }
    }

    fn to_vec(&self) -> Vec<f32> {
        self.cells
            .iter()
            .map(|c| f32::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln σ(x)`, stable for large negative `x`.
fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// A probe pair with pre-drawn negatives; evaluated after every epoch with
/// no subsampling so the loss trace is comparable across epochs.
struct ProbePair {
    center: usize,
    context: usize,
    negatives: Vec<usize>,
}

const PROBE_PAIRS: usize = 2000;

fn derive_rng(seed: u64, epoch: usize, thread: usize) -> ChaCha8Rng {
    let mix = (epoch as u64 + 1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((thread as u64 + 1).wrapping_mul(0x85EB_CA6B_1656_67B1));
    ChaCha8Rng::seed_from_u64(seed ^ mix)
}

/// Trains skip-gram embeddings on `c`. Vocabulary is every type occurring
/// at least `min_count` times, most frequent first (ties by spelling).
pub fn train_sgns(c: &Corpus, params: &SgnsParams) -> Result<EmbeddingTable, EmbedError> {
    assert!(params.dim >= 2, "embedding dimension must be at least 2");
    assert!(params.epochs >= 1, "need at least one epoch");
    let threads = params.threads.max(1);

    // Vocabulary in (frequency desc, word asc) order.
    let mut freqs: HashMap<&str, u64> = HashMap::new();
    for sentence in &c.sentences {
        for token in sentence {
            *freqs.entry(token).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = freqs
        .iter()
        .filter(|&(_, &n)| n as usize >= params.min_count)
        .map(|(&w, &n)| (w, n))
        .collect();
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary(params.min_count));
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: HashMap<String, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, &(w, _))| (w.to_string(), i))
        .collect();

    // Corpus as vocabulary ids; out-of-vocabulary tokens are dropped, so
    // windows close over the surviving tokens.
    let encoded: Vec<Vec<usize>> = c
        .sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    let total_tokens: u64 = encoded.iter().map(|s| s.len() as u64).sum();

    // Noise distribution: unigram^0.75, sampled by binary search on the CDF.
    let mut noise_cdf: Vec<f64> = Vec::with_capacity(vocab.len());
    let mut acc = 0.0;
    for &(_, n) in &vocab {
        acc += (n as f64).powf(0.75);
        noise_cdf.push(acc);
    }
    let noise_total = acc;

    // Per-word keep probability for subsampling (word2vec formula).
    let keep_prob: Option<Vec<f64>> = if params.subsample > 0.0 {
        let t = params.subsample;
        Some(
            vocab
                .iter()
                .map(|&(_, n)| {
                    let f = n as f64 / total_tokens as f64;
                    ((f / t).sqrt() + 1.0) * (t / f)
                })
                .collect(),
        )
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let half_range = 0.5 / params.dim as f32;
    let word = AtomicMatrix::init(vocab.len(), params.dim, &mut rng, half_range);
    let ctx = AtomicMatrix::init(vocab.len(), params.dim, &mut rng, half_range);

    // Fixed probe set: the first pairs of the corpus in reading order, with
    // negatives drawn once.
    let mut probe_rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(0xA5A5_A5A5));
    let mut probe: Vec<ProbePair> = Vec::new();
    'outer: for sentence in &encoded {
        for i in 0..sentence.len() {
            let lo = i.saturating_sub(params.window);
            let hi = (i + params.window + 1).min(sentence.len());
            for j in lo..hi {
                if j == i {
                    continue;
                }
                let negatives = (0..params.negatives)
                    .map(|_| sample_noise(&noise_cdf, noise_total, &mut probe_rng))
                    .collect();
                probe.push(ProbePair {
                    center: sentence[i],
                    context: sentence[j],
                    negatives,
                });
                if probe.len() >= PROBE_PAIRS {
                    break 'outer;
                }
            }
        }
    }

    let processed = AtomicU64::new(0);
    let expected_total = total_tokens.saturating_mul(params.epochs as u64).max(1);
    let mut epoch_probe_loss = Vec::with_capacity(params.epochs);

    for epoch in 0..params.epochs {
        if threads == 1 {
            let mut rng = derive_rng(params.seed, epoch, 0);
            train_sentences(
                encoded.iter(),
                params,
                &word,
                &ctx,
                &noise_cdf,
                noise_total,
                keep_prob.as_deref(),
                &processed,
                expected_total,
                &mut rng,
            );
        } else {
            std::thread::scope(|scope| {
                for t in 0..threads {
                    let sentences = encoded
                        .iter()
                        .enumerate()
                        .filter(move |(i, _)| i % threads == t)
                        .map(|(_, s)| s);
                    let (word, ctx, processed) = (&word, &ctx, &processed);
                    let (noise_cdf, keep_prob) = (&noise_cdf, keep_prob.as_deref());
                    scope.spawn(move || {
                        let mut rng = derive_rng(params.seed, epoch, t);
                        train_sentences(
                            sentences,
                            params,
                            word,
                            ctx,
                            noise_cdf,
                            noise_total,
                            keep_prob,
                            processed,
                            expected_total,
                            &mut rng,
                        );
                    });
                }
            });
        }
        epoch_probe_loss.push(probe_loss(&probe, &word, &ctx, params.dim));
    }

    Ok(EmbeddingTable {
        dim: params.dim,
        vocab: vocab.iter().map(|&(w, _)| w.to_string()).collect(),
        index,
        word: word.to_vec(),
        ctx: ctx.to_vec(),
        trained_on: c.scheme.clone(),
        epoch_probe_loss,
    })
}

fn sample_noise(cdf: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let r = rng.gen::<f64>() * total;
    cdf.partition_point(|&c| c <= r).min(cdf.len() - 1)
}

#[allow(clippy::too_many_arguments)]
fn train_sentences<'a, I: Iterator<Item = &'a Vec<usize>>>(
    sentences: I,
    params: &SgnsParams,
    word: &AtomicMatrix,
    ctx: &AtomicMatrix,
    noise_cdf: &[f64],
    noise_total: f64,
    keep_prob: Option<&[f64]>,
    processed: &AtomicU64,
    expected_total: u64,
    rng: &mut ChaCha8Rng,
) {
    let dim = params.dim;
    let mut cbuf = vec![0f32; dim];
    let mut tbuf = vec![0f32; dim];
    let mut cerr = vec![0f32; dim];
    let mut kept: Vec<usize> = Vec::new();

    for sentence in sentences {
        let done = processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
        let progress = done as f64 / expected_total as f64;
        let alpha = (params.learning_rate * (1.0 - progress)).max(params.learning_rate * 1e-4)
            as f32;

        kept.clear();
        match keep_prob {
            Some(kp) => {
                for &w in sentence {
                    if kp[w] >= 1.0 || rng.gen::<f64>() < kp[w] {
                        kept.push(w);
                    }
                }
            }
            None => kept.extend_from_slice(sentence),
        }

        for i in 0..kept.len() {
            let center = kept[i];
            word.load_row(center, &mut cbuf);
            cerr.fill(0.0);
            let mut touched = false;
            let lo = i.saturating_sub(params.window);
            let hi = (i + params.window + 1).min(kept.len());
            for j in lo..hi {
                if j == i {
                    continue;
                }
                touched = true;
                let positive = kept[j];
                for neg in 0..=params.negatives {
                    let (target, label) = if neg == 0 {
                        (positive, 1.0f32)
                    } else {
                        let t = sample_noise(noise_cdf, noise_total, rng);
                        if t == positive {
                            continue;
                        }
                        (t, 0.0f32)
                    };
                    ctx.load_row(target, &mut tbuf);
                    let mut f = 0f32;
                    for k in 0..dim {
                        f += cbuf[k] * tbuf[k];
                    }
                    let g = (label - sigmoid(f)) * alpha;
                    for k in 0..dim {
                        cerr[k] += g * tbuf[k];
                        ctx.add(target, k, g * cbuf[k]);
                    }
                }
            }
            if touched {
                for k in 0..dim {
                    word.add(center, k, cerr[k]);
                    cbuf[k] += cerr[k];
                }
            }
        }
    }
}

fn probe_loss(probe: &[ProbePair], word: &AtomicMatrix, ctx: &AtomicMatrix, dim: usize) -> f64 {
    if probe.is_empty() {
        return 0.0;
    }
    let mut total = 0.0f64;
    for pair in probe {
        let dot = |a: usize, b: usize| -> f64 {
            (0..dim)
                .map(|k| word.get(a, k) as f64 * ctx.get(b, k) as f64)
                .sum()
        };
        total -= ln_sigmoid(dot(pair.center, pair.context));
        for &n in &pair.negatives {
            total -= ln_sigmoid(-dot(pair.center, n));
        }
    }
    total / probe.len() as f64
}

impl EmbeddingTable {
    /// Builds a table from explicit word vectors (context vectors default to
    /// copies). Mostly useful for constructing known geometries in tests and
    /// for adapting externally trained vectors.
    pub fn from_vectors(entries: Vec<(String, Vec<f32>)>, trained_on: Scheme) -> Self {
        assert!(!entries.is_empty(), "a table needs at least one vector");
        let dim = entries[0].1.len();
        assert!(dim >= 2, "embedding dimension must be at least 2");
        let mut vocab = Vec::with_capacity(entries.len());
        let mut word = Vec::with_capacity(entries.len() * dim);
        for (w, v) in entries {
            assert_eq!(v.len(), dim, "inconsistent vector length for {w:?}");
            vocab.push(w);
            word.extend_from_slice(&v);
        }
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let ctx = word.clone();
        EmbeddingTable {
            dim,
            vocab,
            index,
            word,
            ctx,
            trained_on,
            epoch_probe_loss: Vec::new(),
        }
    }

    /// Replaces the context matrix (same vocabulary order and dimension).
    pub fn with_context(mut self, ctx_rows: Vec<Vec<f32>>) -> Self {
        assert_eq!(ctx_rows.len(), self.vocab.len());
        let mut ctx = Vec::with_capacity(self.word.len());
        for row in ctx_rows {
            assert_eq!(row.len(), self.dim);
            ctx.extend_from_slice(&row);
        }
        self.ctx = ctx;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// Vocabulary in training order (most frequent first).
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn contains(&self, w: &str) -> bool {
        self.index.contains_key(w)
    }

    pub fn index_of(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn word_vec(&self, i: usize) -> &[f32] {
        &self.word[i * self.dim..(i + 1) * self.dim]
    }

    pub fn ctx_vec(&self, i: usize) -> &[f32] {
        &self.ctx[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity between two vocabulary words in the given space.
    pub fn cosine(&self, a: &str, b: &str, space: Space) -> Result<f64, EmbedError> {
        let ia = self
            .index_of(a)
            .ok_or_else(|| EmbedError::UnknownWord(a.to_string()))?;
        let ib = self
            .index_of(b)
            .ok_or_else(|| EmbedError::UnknownWord(b.to_string()))?;
        Ok(self.cosine_idx(ia, ib, space))
    }

    fn cosine_idx(&self, a: usize, b: usize, space: Space) -> f64 {
        let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
        let mut accumulate = |va: &[f32], vb: &[f32]| {
            for k in 0..self.dim {
                let (x, y) = (va[k] as f64, vb[k] as f64);
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
        };
        match space {
            Space::Word => accumulate(self.word_vec(a), self.word_vec(b)),
            Space::Context => accumulate(self.ctx_vec(a), self.ctx_vec(b)),
            Space::Combined => {
                accumulate(self.word_vec(a), self.word_vec(b));
                accumulate(self.ctx_vec(a), self.ctx_vec(b));
            }
        }
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        dot / (na.sqrt() * nb.sqrt())
    }

    /// The `n` nearest neighbors of `w` by cosine, excluding `w` itself.
    /// Ties break toward the earlier vocabulary entry, so the result is a
    /// pure function of the table.
    pub fn nearest_neighbors(
        &self,
        w: &str,
        n: usize,
        space: Space,
    ) -> Result<Vec<(String, f64)>, EmbedError> {
        let iw = self
            .index_of(w)
            .ok_or_else(|| EmbedError::UnknownWord(w.to_string()))?;
        let mut scored: Vec<(usize, f64)> = (0..self.vocab.len())
            .filter(|&i| i != iw)
            .map(|i| (i, self.cosine_idx(iw, i, space)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        scored.truncate(n);
        Ok(scored
            .into_iter()
            .map(|(i, cos)| (self.vocab[i].clone(), cos))
            .collect())
    }

    /// Writes `<vocab> <dim>` then one `<word> <components…>` line per
    /// entry, and the context matrix to `<path>.ctx` in the same format.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        self.save_matrix(path, &self.word)?;
        self.save_matrix(&ctx_path(path), &self.ctx)
    }

    fn save_matrix(&self, path: &Path, data: &[f32]) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{} {}", self.vocab.len(), self.dim)?;
        for (i, wrd) in self.vocab.iter().enumerate() {
            write!(w, "{wrd}")?;
            for k in 0..self.dim {
                write!(w, " {:.6}", data[i * self.dim + k])?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    /// Loads a table saved by [`save`](Self::save), or any file in the same
    /// `<vocab> <dim>` header format. A missing `.ctx` sidecar (external
    /// vectors, say) falls back to context = word.
    pub fn load(path: &Path, trained_on: Scheme) -> Result<Self, EmbedError> {
        let (vocab, dim, word) = load_matrix(path, None)?;
        let cp = ctx_path(path);
        let ctx = if cp.exists() {
            let (cv, cd, ctx) = load_matrix(&cp, Some((&vocab, dim)))?;
            debug_assert_eq!((cv, cd), (vocab.clone(), dim));
            ctx
        } else {
            word.clone()
        };
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(EmbeddingTable {
            dim,
            vocab,
            index,
            word,
            ctx,
            trained_on,
            epoch_probe_loss: Vec::new(),
        })
    }
}

fn ctx_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".ctx");
    PathBuf::from(os)
}

type Matrix = (Vec<String>, usize, Vec<f32>);

fn load_matrix(path: &Path, expect: Option<(&[String], usize)>) -> Result<Matrix, EmbedError> {
    let perr = |line: usize, msg: String| EmbedError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| perr(1, "empty file".into()))??;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(1, format!("bad header {header:?}")))?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(1, format!("bad header {header:?}")))?;
    if let Some((_, want_dim)) = expect {
        if dim != want_dim {
            return Err(perr(1, format!("dimension {dim} does not match {want_dim}")));
        }
    }
    let mut vocab = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    let mut seen: HashMap<String, ()> = HashMap::with_capacity(count);
    for (no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let w = parts
            .next()
            .ok_or_else(|| perr(no + 2, "missing word".into()))?
            .to_string();
        if seen.insert(w.clone(), ()).is_some() {
            return Err(perr(no + 2, format!("duplicate word {w:?}")));
        }
        let mut row = 0usize;
        for comp in parts {
            let v: f32 = comp
                .parse()
                .map_err(|_| perr(no + 2, format!("bad component {comp:?}")))?;
            data.push(v);
            row += 1;
        }
        if row != dim {
            return Err(perr(no + 2, format!("expected {dim} components, found {row}")));
        }
        vocab.push(w);
    }
    if vocab.len() != count {
        return Err(perr(
            1,
            format!("header says {count} entries, file has {}", vocab.len()),
        ));
    }
    if let Some((want_vocab, _)) = expect {
        if vocab != want_vocab {
            return Err(perr(1, "vocabulary does not match the word matrix".into()));
        }
    }
    Ok((vocab, dim, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_params() -> SgnsParams {
        SgnsParams {
            dim: 16,
            window: 2,
            negatives: 3,
            epochs: 3,
            min_count: 1,
            subsample: 0.0,
            learning_rate: 0.05,
            seed: 7,
            threads: 1,
        }
    }

    /// A corpus where `a` and `b` share contexts and `x`/`y` live apart.
    fn two_topic_corpus() -> Corpus {
        let mut sentences = Vec::new();
        for i in 0..300 {
            let mid = if i % 2 == 0 { "a" } else { "b" };
            sentences.push(vec!["l".into(), mid.into(), "r".into()]);
            sentences.push(vec!["p".into(), "x".into(), "q".into()]);
            sentences.push(vec!["p".into(), "y".into(), "q".into()]);
        }
        Corpus::new(sentences, Scheme::None)
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let c = Corpus::new(vec![vec!["once".into()]], Scheme::None);
        let params = SgnsParams {
            min_count: 2,
            ..tiny_params()
        };
        match train_sgns(&c, &params) {
            Err(EmbedError::EmptyVocabulary(2)) => {}
            other => panic!("expected EmptyVocabulary, got {other:?}"),
        }
    }

    #[test]
    fn vocabulary_is_frequency_ordered() {
        let c = Corpus::new(
            vec![vec!["b".into(), "a".into(), "b".into(), "c".into(), "a".into()]],
            Scheme::None,
        );
        let t = train_sgns(&c, &SgnsParams { epochs: 1, ..tiny_params() }).unwrap();
        // a and b tie at 2, a first by spelling; c last
        assert_eq!(t.vocab(), ["a", "b", "c"]);
    }

    #[test]
    fn training_is_deterministic_for_a_seed() {
        let c = two_topic_corpus();
        let a = train_sgns(&c, &tiny_params()).unwrap();
        let b = train_sgns(&c, &tiny_params()).unwrap();
        assert_eq!(a.word, b.word);
        assert_eq!(a.ctx, b.ctx);
        assert_eq!(a.epoch_probe_loss, b.epoch_probe_loss);
        let other = train_sgns(&c, &SgnsParams { seed: 8, ..tiny_params() }).unwrap();
        assert_ne!(a.word, other.word);
    }

    #[test]
    fn probe_loss_decreases_over_training() {
        let t = train_sgns(&two_topic_corpus(), &SgnsParams { epochs: 5, ..tiny_params() }).unwrap();
        let losses = &t.epoch_probe_loss;
        assert_eq!(losses.len(), 5);
        assert!(
            losses[4] < losses[0],
            "probe loss should drop: {losses:?}"
        );
    }

    #[test]
    fn norms_stay_bounded_on_degenerate_corpora() {
        let c = Corpus::new(
            vec![vec!["the".into(); 50]; 200],
            Scheme::None,
        );
        let t = train_sgns(&c, &tiny_params()).unwrap();
        let norm: f64 = t
            .word_vec(0)
            .iter()
            .map(|&v| (v as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(norm.is_finite());
        assert!(norm < 100.0, "norm blew up: {norm}");
    }

    #[test]
    fn shared_contexts_beat_disjoint_ones() {
        let t = train_sgns(&two_topic_corpus(), &tiny_params()).unwrap();
        let ab = t.cosine("a", "b", Space::Word).unwrap();
        let ax = t.cosine("a", "x", Space::Word).unwrap();
        assert!(ab > ax, "cos(a,b)={ab} should exceed cos(a,x)={ax}");
    }

    #[test]
    fn nearest_neighbors_match_brute_force() {
        let entries = vec![
            ("w".to_string(), vec![1.0, 0.0, 0.0]),
            ("n1".to_string(), vec![0.9, 0.1, 0.0]),
            ("n2".to_string(), vec![0.5, 0.5, 0.0]),
            ("n3".to_string(), vec![0.0, 1.0, 0.0]),
            ("n4".to_string(), vec![-1.0, 0.0, 0.0]),
        ];
        let t = EmbeddingTable::from_vectors(entries, Scheme::None);
        let nn = t.nearest_neighbors("w", 3, Space::Word).unwrap();
        let names: Vec<&str> = nn.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(names, ["n1", "n2", "n3"]);
        assert!(nn[0].1 > nn[1].1 && nn[1].1 > nn[2].1);
        // requesting more neighbors than exist returns everything
        assert_eq!(t.nearest_neighbors("w", 10, Space::Word).unwrap().len(), 4);
        assert!(t.nearest_neighbors("w", 0, Space::Word).unwrap().is_empty());
    }

    #[test]
    fn nearest_neighbor_ties_follow_vocabulary_order() {
        let entries = vec![
            ("w".to_string(), vec![1.0, 0.0]),
            ("t2".to_string(), vec![2.0, 0.0]),
            ("t1".to_string(), vec![3.0, 0.0]),
        ];
        let t = EmbeddingTable::from_vectors(entries, Scheme::None);
        // both neighbors have cosine exactly 1; earlier vocab entry wins
        let nn = t.nearest_neighbors("w", 2, Space::Word).unwrap();
        assert_eq!(nn[0].0, "t2");
        assert_eq!(nn[1].0, "t1");
    }

    #[test]
    fn unknown_word_is_an_error() {
        let t = EmbeddingTable::from_vectors(
            vec![("a".to_string(), vec![1.0, 0.0])],
            Scheme::None,
        );
        match t.nearest_neighbors("zzz", 1, Space::Word) {
            Err(EmbedError::UnknownWord(w)) => assert_eq!(w, "zzz"),
            other => panic!("expected UnknownWord, got {other:?}"),
        }
    }

    #[test]
    fn save_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        let t = train_sgns(&two_topic_corpus(), &SgnsParams { epochs: 1, ..tiny_params() }).unwrap();
        t.save(&path).unwrap();
        assert!(dir.path().join("vecs.txt.ctx").exists());
        let back = EmbeddingTable::load(&path, Scheme::None).unwrap();
        assert_eq!(back.vocab(), t.vocab());
        assert_eq!(back.dim(), t.dim());
        // written at 6 decimals, so compare at that precision
        for i in 0..t.len() {
            for k in 0..t.dim() {
                assert!((back.word_vec(i)[k] - t.word_vec(i)[k]).abs() < 1e-5);
                assert!((back.ctx_vec(i)[k] - t.ctx_vec(i)[k]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn load_without_ctx_falls_back_to_word_vectors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("external.txt");
        std::fs::write(&path, "2 3\nkatab 1.0 0.0 0.0\nkutub 0.0 1.0 0.0\n").unwrap();
        let t = EmbeddingTable::load(&path, Scheme::FullCm).unwrap();
        assert_eq!(t.trained_on, Scheme::FullCm);
        assert_eq!(t.word_vec(0), t.ctx_vec(0));
        assert_eq!(t.vocab(), ["katab", "kutub"]);
    }

    #[test]
    fn load_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        for contents in [
            "not a header\n",
            "2 3\na 1 2 3\n",              // count mismatch
            "1 3\na 1 2\n",                // wrong component count
            "1 2\na 1 x\n",                // bad float
            "2 2\na 1 2\na 3 4\n",         // duplicate word
        ] {
            std::fs::write(&path, contents).unwrap();
            assert!(
                EmbeddingTable::load(&path, Scheme::None).is_err(),
                "accepted {contents:?}"
            );
        }
    }

    #[test]
    fn combined_space_concatenates() {
        let t = EmbeddingTable::from_vectors(
            vec![
                ("a".to_string(), vec![1.0, 0.0]),
                ("b".to_string(), vec![0.0, 1.0]),
            ],
            Scheme::None,
        )
        .with_context(vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
        // word-space cosine is 0, context-space cosine is 1; combined mixes
        let w = t.cosine("a", "b", Space::Word).unwrap();
        let c = t.cosine("a", "b", Space::Context).unwrap();
        let m = t.cosine("a", "b", Space::Combined).unwrap();
        assert!(w.abs() < 1e-12);
        assert!((c - 1.0).abs() < 1e-12);
        assert!(m > w && m < c);
    }
}
