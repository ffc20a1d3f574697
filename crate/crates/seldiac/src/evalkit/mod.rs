//! Measurement: dictionary coverage, pattern contrasts, corpus sparsity,
//! homograph-focused test filtering, significance testing, and a POS
//! tagger for downstream comparisons between diacritization schemes.

mod tagger;

pub use tagger::{
    evaluate_tagger, train_pos_tagger, PerceptronTagger, SliceSpec, TagEval, TaggedCorpus,
};

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ambig::{AmbigDict, Keying, Method};
use crate::corpus::{vocab_stats, Corpus, Scheme, VariantMap};
use crate::textcore::{abstract_pattern, strip_diacritics, DiacPattern, DiacriticSet};

/// Errors from evaluation utilities.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("pattern reports need variant-keyed dictionaries, this one is keyed {found}")]
    KeyingMismatch { found: Keying },
    #[error("paired scores differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least one paired score")]
    NoScores,
    #[error("tagger was trained on {model} text but the test set is {data}")]
    SchemeMismatch { model: Scheme, data: Scheme },
    #[error("training data contains no tagged tokens")]
    EmptyTagset,
}

/// A correct/total pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: u64,
    pub total: u64,
}

impl Accuracy {
    pub fn tally(&mut self, correct: bool) {
        self.total += 1;
        if correct {
            self.correct += 1;
        }
    }

    /// Fraction correct; an empty tally counts as zero.
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Size and ambiguity share of a dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityStats {
    pub types: usize,
    pub ambiguous: usize,
    /// Percentage of entries labelled ambiguous; zero for an empty
    /// dictionary.
    pub ambiguous_pct: f64,
}

pub fn ambiguity_stats(d: &AmbigDict) -> AmbiguityStats {
    let types = d.len();
    let ambiguous = d.ambiguous_count();
    let ambiguous_pct = if types == 0 {
        0.0
    } else {
        100.0 * ambiguous as f64 / types as f64
    };
    AmbiguityStats {
        types,
        ambiguous,
        ambiguous_pct,
    }
}

/// How often a pair of diacritic patterns was kept apart vs collapsed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairTally {
    pub ambiguous: u64,
    pub unambiguous: u64,
}

/// Which pattern contrasts a dictionary preserves.
///
/// Every pair of variants sharing a bare spelling contributes its
/// (sorted) pair of abstract diacritic patterns, tallied by whether the
/// dictionary kept the pair distinguished.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternReport {
    pub tallies: BTreeMap<(DiacPattern, DiacPattern), PairTally>,
}

impl PatternReport {
    /// Pattern pairs that were kept in every group they appeared in.
    pub fn always_ambiguous(&self) -> Vec<&(DiacPattern, DiacPattern)> {
        self.tallies
            .iter()
            .filter(|(_, t)| t.ambiguous > 0 && t.unambiguous == 0)
            .map(|(p, _)| p)
            .collect()
    }

    /// Writes `<pattern>\t<pattern>\t<ambiguous>\t<unambiguous>` lines.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for ((p1, p2), t) in &self.tallies {
            writeln!(w, "{p1}\t{p2}\t{}\t{}", t.ambiguous, t.unambiguous)?;
        }
        Ok(())
    }
}

/// Tallies pattern contrasts for every variant pair in `vm` under the
/// verdicts of `ds`, which must be variant-keyed.
///
/// Translation dictionaries judge variants one by one, and a pair stays
/// written-distinct as long as either side keeps its marks; the other
/// variant-keyed builders label whole groups, where both sides agree
/// anyway.
pub fn pattern_report(
    vm: &VariantMap,
    d: &DiacriticSet,
    ds: &AmbigDict,
) -> Result<PatternReport, EvalError> {
    if ds.keying != Keying::Diac {
        return Err(EvalError::KeyingMismatch { found: ds.keying });
    }
    let mut report = PatternReport::default();
    for (_, variants) in vm.groups() {
        let names: Vec<&String> = variants.keys().collect();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let mut p1 = abstract_pattern(names[i], d);
                let mut p2 = abstract_pattern(names[j], d);
                if p2 < p1 {
                    std::mem::swap(&mut p1, &mut p2);
                }
                let (a1, a2) = (ds.is_ambiguous(names[i]), ds.is_ambiguous(names[j]));
                let kept = match ds.method {
                    Method::Tr => a1 || a2,
                    _ => a1 && a2,
                };
                let tally = report.tallies.entry((p1, p2)).or_default();
                if kept {
                    tally.ambiguous += 1;
                } else {
                    tally.unambiguous += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Vocabulary pressure of a train/test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityMetrics {
    /// Distinct words in the training corpus.
    pub type_count: usize,
    /// Running words in the training corpus.
    pub token_count: u64,
    /// Fraction of test types absent from training.
    pub oov_type_rate: f64,
    /// Fraction of test tokens absent from training.
    pub oov_token_rate: f64,
}

pub fn sparsity_metrics(train: &Corpus, test: &Corpus) -> SparsityMetrics {
    let train_stats = vocab_stats(train);
    let test_stats = vocab_stats(test);
    let mut oov_types = 0usize;
    let mut oov_tokens = 0u64;
    for (word, &freq) in &test_stats.type_freqs {
        if !train_stats.type_freqs.contains_key(word) {
            oov_types += 1;
            oov_tokens += freq;
        }
    }
    let rate = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    SparsityMetrics {
        type_count: train_stats.types,
        token_count: train_stats.tokens,
        oov_type_rate: rate(oov_types as f64, test_stats.types as f64),
        oov_token_rate: rate(oov_tokens as f64, test_stats.tokens as f64),
    }
}

/// Keeps only the sentences containing at least one word whose bare
/// spelling has multiple attested variants. Applying the filter twice
/// changes nothing.
pub fn homograph_filter(test: &Corpus, vm: &VariantMap, d: &DiacriticSet) -> Corpus {
    let sentences = test
        .sentences
        .iter()
        .filter(|s| {
            s.iter()
                .any(|t| vm.is_homograph_key(&strip_diacritics(t, d)))
        })
        .cloned()
        .collect();
    let mut c = Corpus::new(sentences, test.scheme.clone());
    c.provenance = test.provenance.clone();
    c
}

/// Paired bootstrap significance of the difference between two matched
/// score sequences (two-sided).
///
/// Resamples the paired differences with replacement and reports how often
/// the resampled mean lands on the other side of zero from the observed
/// one, doubled and clamped to 1. Identical sequences yield 1.0.
pub fn paired_bootstrap(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(EvalError::NoScores);
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = diffs.iter().sum::<f64>() / n as f64;
    if observed == 0.0 {
        return Ok(1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut opposite = 0usize;
    for _ in 0..resamples {
        let mut total = 0.0;
        for _ in 0..n {
            total += diffs[rng.gen_range(0..n)];
        }
        let mean = total / n as f64;
        let crossed = if observed > 0.0 { mean <= 0.0 } else { mean >= 0.0 };
        if crossed {
            opposite += 1;
        }
    }
    Ok((2.0 * opposite as f64 / resamples as f64).min(1.0))
}
