//! Word alignment: IBM Model 2 with a log-linear diagonal prior.
//!
//! Instead of a free distortion table, the alignment prior is a softmax
//! over `h(i, j, m, n) = -|i/m - j/n|` (1-based positions), sharpened by a
//! single tension parameter λ — alignments near the diagonal are preferred,
//! and λ = 0 recovers a uniform prior exactly. A fixed probability mass
//! `p_null` is reserved for the null (unaligned) hypothesis. Training is
//! plain EM on the translation table, with optional gradient ascent on λ
//! between iterations.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::ParallelCorpus;

/// The reserved source token representing "aligned to nothing".
pub const NULL_WORD: &str = "<NULL>";

/// Probability used for translation pairs the model never saw.
pub const UNKNOWN_FLOOR: f64 = 1e-9;

/// Errors from alignment training and table I/O.
#[derive(Debug, Error)]
pub enum AlignError {
    #[error("cannot train an alignment model on an empty parallel corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// How many translations to keep per source word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopN {
    N(usize),
    All,
}

impl FromStr for TopN {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(TopN::All);
        }
        s.parse::<usize>()
            .map(TopN::N)
            .map_err(|_| format!("expected a count or \"all\", found {s:?}"))
    }
}

impl std::fmt::Display for TopN {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopN::N(n) => write!(f, "{n}"),
            TopN::All => f.write_str("all"),
        }
    }
}

/// The diagonal feature `h(i, j, m, n) = -|i/m - j/n|` with 1-based `i`,`j`.
fn feature(i: usize, j: usize, m: usize, n: usize) -> f64 {
    -(((i + 1) as f64 / m as f64) - ((j + 1) as f64 / n as f64)).abs()
}

/// Prior over source positions `i` for target position `j`:
/// `softmax_i(lambda * h(i, j, m, n))`. At `lambda = 0` this is exactly
/// uniform. The null hypothesis is handled outside (it takes `p_null`, the
/// softmax shares `1 - p_null`).
pub fn diagonal_prior(lambda: f64, m: usize, n: usize, j: usize) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..m).map(|i| lambda * feature(i, j, m, n)).collect();
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for r in raw.iter_mut() {
        *r = (*r - max).exp();
        z += *r;
    }
    for r in raw.iter_mut() {
        *r /= z;
    }
    raw
}

/// A trained alignment model.
#[derive(Debug, Clone)]
pub struct AlignmentModel {
    src_vocab: Vec<String>,
    src_index: HashMap<String, usize>,
    tgt_vocab: Vec<String>,
    tgt_index: HashMap<String, usize>,
    /// Row-stochastic translation table, one row per source word
    /// (row 0 is the null word when `p_null > 0`).
    ttable: Vec<HashMap<usize, f64>>,
    pub lambda: f64,
    pub p_null: f64,
    /// Corpus log-likelihood at each EM iteration, computed with the
    /// parameters that iteration started from.
    pub log_likelihoods: Vec<f64>,
}

/// Trains IBM Model 2 (log-linear parameterization) on `p`.
///
/// `iterations` EM sweeps starting from a uniform co-occurrence table;
/// `lambda0` is the initial diagonal tension; `p_null` the reserved null
/// mass; with `optimize_tension` the tension is updated by gradient ascent
/// on the expected feature value after each sweep (λ stays non-negative).
/// With `optimize_tension = false` the sweeps are pure EM, so the reported
/// log-likelihoods are non-decreasing.
pub fn train_ibm2(
    p: &ParallelCorpus,
    iterations: usize,
    lambda0: f64,
    p_null: f64,
    optimize_tension: bool,
) -> Result<AlignmentModel, AlignError> {
    if p.pairs.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    assert!((0.0..1.0).contains(&p_null), "p_null must be in [0, 1)");
    assert!(lambda0 >= 0.0, "tension must be non-negative");

    // Intern vocabularies. Source id 0 is the null word.
    let mut src_vocab: Vec<String> = vec![NULL_WORD.to_string()];
    let mut src_index: HashMap<String, usize> = HashMap::new();
    src_index.insert(NULL_WORD.to_string(), 0);
    let mut tgt_vocab: Vec<String> = Vec::new();
    let mut tgt_index: HashMap<String, usize> = HashMap::new();
    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(p.pairs.len());
    for (src, tgt) in &p.pairs {
        let s: Vec<usize> = src
            .iter()
            .map(|w| intern(w, &mut src_vocab, &mut src_index))
            .collect();
        let t: Vec<usize> = tgt
            .iter()
            .map(|w| intern(w, &mut tgt_vocab, &mut tgt_index))
            .collect();
        pairs.push((s, t));
    }

    // Uniform initialization over co-occurring targets; the null word
    // co-occurs with everything.
    let mut cooc: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); src_vocab.len()];
    for (s, t) in &pairs {
        for &tj in t {
            cooc[0].insert(tj);
            for &si in s {
                cooc[si].insert(tj);
            }
        }
    }
    let mut ttable: Vec<HashMap<usize, f64>> = cooc
        .iter()
        .map(|row| {
            let u = 1.0 / row.len().max(1) as f64;
            row.iter().map(|&t| (t, u)).collect()
        })
        .collect();

    let mut lambda = lambda0;
    let mut log_likelihoods = Vec::with_capacity(iterations);
    let total_target_tokens: f64 = pairs.iter().map(|(_, t)| t.len() as f64).sum();
    // distinct sentence shapes, for the tension update
    let mut shapes: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (s, t) in &pairs {
        *shapes.entry((s.len(), t.len())).or_insert(0.0) += 1.0;
    }

    for _ in 0..iterations {
        let mut counts: Vec<HashMap<usize, f64>> =
            vec![HashMap::new(); src_vocab.len()];
        let mut ll = 0.0f64;
        let mut emp_feat = 0.0f64;
        for (s, t) in &pairs {
            let (m, n) = (s.len(), t.len());
            for (j, &tj) in t.iter().enumerate() {
                let prior = diagonal_prior(lambda, m, n, j);
                let t_null = ttable[0].get(&tj).copied().unwrap_or(UNKNOWN_FLOOR);
                let null_score = p_null * t_null;
                let mut scores = Vec::with_capacity(m);
                let mut denom = null_score;
                for (i, &si) in s.iter().enumerate() {
                    let tp = ttable[si].get(&tj).copied().unwrap_or(UNKNOWN_FLOOR);
                    let sc = (1.0 - p_null) * prior[i] * tp;
                    scores.push(sc);
                    denom += sc;
                }
                ll += denom.ln();
                if null_score > 0.0 {
                    *counts[0].entry(tj).or_insert(0.0) += null_score / denom;
                }
                for (i, &si) in s.iter().enumerate() {
                    let post = scores[i] / denom;
                    *counts[si].entry(tj).or_insert(0.0) += post;
                    emp_feat += post * feature(i, j, m, n);
                }
            }
        }
        log_likelihoods.push(ll);

        // M-step: normalize rows.
        for (row, cnt) in ttable.iter_mut().zip(&counts) {
            let mass: f64 = cnt.values().sum();
            if mass > 0.0 {
                *row = cnt.iter().map(|(&t, &c)| (t, c / mass)).collect();
            }
        }

        if optimize_tension {
            // gradient ascent on the per-token expected diagonal feature:
            // empirical expectation fixed, model expectation recomputed as
            // lambda moves
            let emp = emp_feat / total_target_tokens;
            for _ in 0..8 {
                let mut mod_feat = 0.0f64;
                for (&(m, n), &count) in &shapes {
                    for j in 0..n {
                        let prior = diagonal_prior(lambda, m, n, j);
                        let e: f64 = prior
                            .iter()
                            .enumerate()
                            .map(|(i, &p)| p * feature(i, j, m, n))
                            .sum();
                        mod_feat += count * e;
                    }
                }
                let model = mod_feat / total_target_tokens;
                lambda = (lambda + 20.0 * (emp - model)).max(0.0);
            }
        }
    }

    Ok(AlignmentModel {
        src_vocab,
        src_index,
        tgt_vocab,
        tgt_index,
        ttable,
        lambda,
        p_null,
        log_likelihoods,
    })
}

fn intern(w: &str, vocab: &mut Vec<String>, index: &mut HashMap<String, usize>) -> usize {
    if let Some(&i) = index.get(w) {
        return i;
    }
    let i = vocab.len();
    vocab.push(w.to_string());
    index.insert(w.to_string(), i);
    i
}

impl AlignmentModel {
    /// `t(target | source)`, if the pair was ever seen. The null row is
    /// addressed by [`NULL_WORD`].
    pub fn translation_prob(&self, source: &str, target: &str) -> Option<f64> {
        let si = *self.src_index.get(source)?;
        let ti = *self.tgt_index.get(target)?;
        self.ttable[si].get(&ti).copied()
    }

    /// The full translation row for `source`, descending by probability
    /// (ties by target spelling). `None` for unknown source words.
    pub fn translations(&self, source: &str) -> Option<Vec<(String, f64)>> {
        let si = *self.src_index.get(source)?;
        let mut row: Vec<(String, f64)> = self.ttable[si]
            .iter()
            .map(|(&t, &p)| (self.tgt_vocab[t].clone(), p))
            .collect();
        row.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.cmp(&b.0))
        });
        Some(row)
    }

    /// Source vocabulary (excluding the null word), sorted.
    pub fn source_words(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .src_vocab
            .iter()
            .skip(1)
            .map(String::as_str)
            .collect();
        v.sort_unstable();
        v
    }

    /// Viterbi alignment of one sentence pair: for each target position,
    /// the argmax source position under prior × translation, with the null
    /// hypothesis competing at `p_null`. Null wins only strictly, so a
    /// dead tie keeps the link. Returns 0-based `(i, j)` links for the
    /// linked positions only.
    pub fn viterbi_align(&self, src: &[String], tgt: &[String]) -> Vec<(usize, usize)> {
        let (m, n) = (src.len(), tgt.len());
        let mut links = Vec::new();
        for (j, t) in tgt.iter().enumerate() {
            let prior = diagonal_prior(self.lambda, m, n, j);
            let tn = self
                .lookup(NULL_WORD, t)
                .unwrap_or(UNKNOWN_FLOOR);
            let null_score = self.p_null * tn;
            let mut best: Option<(usize, f64)> = None;
            for (i, s) in src.iter().enumerate() {
                let tp = self.lookup(s, t).unwrap_or(UNKNOWN_FLOOR);
                let sc = (1.0 - self.p_null) * prior[i] * tp;
                if best.map_or(true, |(_, b)| sc > b) {
                    best = Some((i, sc));
                }
            }
            if let Some((i, sc)) = best {
                if null_score <= sc {
                    links.push((i, j));
                }
            }
        }
        links
    }

    fn lookup(&self, source: &str, target: &str) -> Option<f64> {
        let si = *self.src_index.get(source)?;
        let ti = *self.tgt_index.get(target)?;
        self.ttable[si].get(&ti).copied()
    }

    /// The top-`n` translations of every real source word, probabilities
    /// below the unknown-word floor excluded.
    pub fn top_n_translations(&self, n: TopN) -> TranslationTable {
        let mut entries = BTreeMap::new();
        for source in self.source_words() {
            let mut row = self.translations(source).expect("known source word");
            row.retain(|&(_, p)| p >= UNKNOWN_FLOOR);
            if let TopN::N(k) = n {
                row.truncate(k);
            }
            entries.insert(source.to_string(), row);
        }
        TranslationTable { entries }
    }
}

/// Ranked translations per source word.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TranslationTable {
    entries: BTreeMap<String, Vec<(String, f64)>>,
}

impl TranslationTable {
    pub fn sources(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn get(&self, source: &str) -> Option<&[(String, f64)]> {
        self.entries.get(source).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The target words in the top `n` of `source`'s row.
    pub fn top_set(&self, source: &str, n: TopN) -> std::collections::BTreeSet<&str> {
        match self.entries.get(source) {
            None => Default::default(),
            Some(row) => {
                let take = match n {
                    TopN::N(k) => k.min(row.len()),
                    TopN::All => row.len(),
                };
                row[..take].iter().map(|(t, _)| t.as_str()).collect()
            }
        }
    }

    /// Writes `<source>\t<target>\t<probability>` lines, sources sorted,
    /// each row descending by probability.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (source, row) in &self.entries {
            for (target, p) in row {
                writeln!(w, "{source}\t{target}\t{p:.6}")?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn load(path: &Path) -> Result<Self, AlignError> {
        let perr = |line: usize, msg: String| AlignError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let reader = BufReader::new(File::open(path)?);
        let mut entries: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for (no, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (s, t, p) = (parts.next(), parts.next(), parts.next());
            let (Some(s), Some(t), Some(p)) = (s, t, p) else {
                return Err(perr(no + 1, format!("expected 3 tab fields, found {line:?}")));
            };
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| perr(no + 1, format!("bad probability {p:?}")))?;
            entries.entry(s.to_string()).or_default().push((t.to_string(), p));
        }
        for row in entries.values_mut() {
            row.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        }
        Ok(TranslationTable { entries })
    }
}

/// Writes Viterbi alignments for every pair of `p`, one line per pair in
/// Pharaoh `i-j` format (0-based, space-separated).
pub fn write_alignments<W: Write>(
    model: &AlignmentModel,
    p: &ParallelCorpus,
    w: &mut W,
) -> io::Result<()> {
    for (src, tgt) in &p.pairs {
        let links = model.viterbi_align(src, tgt);
        let line: Vec<String> = links.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
