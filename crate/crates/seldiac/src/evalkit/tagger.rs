//! An averaged-perceptron part-of-speech tagger, used to compare how much
//! tagging signal different diacritization schemes preserve.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Accuracy, EvalError};
use crate::corpus::Scheme;
use crate::textcore::{strip_diacritics, DiacriticSet};

static MARKS: LazyLock<DiacriticSet> = LazyLock::new(DiacriticSet::default);

/// Tags whose per-tag accuracy is reported (the open classes).
pub const CONTENT_TAGS: [&str; 4] = ["ADJ", "ADV", "NOUN", "VERB"];

/// Sentences of `(word, tag)` pairs, with the tag inventory they use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub sentences: Vec<Vec<(String, String)>>,
    pub tagset: BTreeSet<String>,
    pub scheme: Scheme,
}

impl TaggedCorpus {
    pub fn new(sentences: Vec<Vec<(String, String)>>, scheme: Scheme) -> Self {
        let tagset = sentences
            .iter()
            .flatten()
            .map(|(_, t)| t.clone())
            .collect();
        TaggedCorpus {
            sentences,
            tagset,
            scheme,
        }
    }

    pub fn token_count(&self) -> u64 {
        self.sentences.iter().map(|s| s.len() as u64).sum()
    }

    /// Reads space-separated `word/TAG` tokens, one sentence per line.
    /// Words may contain slashes; the tag starts after the last one.
    pub fn from_reader<R: Read>(
        reader: R,
        scheme: Scheme,
        path: &Path,
    ) -> Result<Self, EvalError> {
        let perr = |line: usize, msg: String| EvalError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut sentences = Vec::new();
        for (no, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut sentence = Vec::new();
            for token in line.split_whitespace() {
                let Some((word, tag)) = token.rsplit_once('/') else {
                    return Err(perr(no + 1, format!("token {token:?} has no /TAG")));
                };
                if word.is_empty() || tag.is_empty() {
                    return Err(perr(no + 1, format!("token {token:?} has no /TAG")));
                }
                sentence.push((word.to_string(), tag.to_string()));
            }
            sentences.push(sentence);
        }
        Ok(TaggedCorpus::new(sentences, scheme))
    }

    pub fn from_path(path: &Path, scheme: Scheme) -> Result<Self, EvalError> {
        Self::from_reader(File::open(path)?, scheme, path)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for sentence in &self.sentences {
            let line: Vec<String> = sentence
                .iter()
                .map(|(word, tag)| format!("{word}/{tag}"))
                .collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }
}

/// Context features for position `i`: the word itself, its neighbors, the
/// previous predicted tag, a short suffix, and whether the word carries any
/// diacritics at all (the feature selective schemes manipulate).
fn features(words: &[String], i: usize, prev_tag: &str) -> [String; 6] {
    let w = &words[i];
    let pw = if i == 0 { "<s>" } else { words[i - 1].as_str() };
    let nw = if i + 1 == words.len() {
        "</s>"
    } else {
        words[i + 1].as_str()
    };
    let chars: Vec<char> = w.chars().collect();
    let suffix: String = chars[chars.len().saturating_sub(3)..].iter().collect();
    let marked = w.chars().any(|ch| MARKS.is_mark(ch));
    [
        format!("w={w}"),
        format!("pw={pw}"),
        format!("nw={nw}"),
        format!("pt={prev_tag}"),
        format!("suf={suffix}"),
        format!("dc={}", marked as u8),
    ]
}

/// A greedy averaged-perceptron tagger.
#[derive(Debug, Clone)]
pub struct PerceptronTagger {
    tags: Vec<String>,
    weights: HashMap<String, Vec<f64>>,
    pub scheme: Scheme,
}

impl PerceptronTagger {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    fn score(&self, feats: &[String; 6]) -> usize {
        argmax_tag(&self.weights, self.tags.len(), feats)
    }

    /// Tags one sentence, left to right, each prediction feeding the next
    /// position's context.
    pub fn tag(&self, words: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(words.len());
        let mut prev = "<s>".to_string();
        for i in 0..words.len() {
            let feats = features(words, i, &prev);
            let t = self.score(&feats);
            prev = self.tags[t].clone();
            out.push(prev.clone());
        }
        out
    }
}

/// Scores every tag as a weight sum over active features; ties go to the
/// lower tag index, so decoding is deterministic.
fn argmax_tag(weights: &HashMap<String, Vec<f64>>, ntags: usize, feats: &[String; 6]) -> usize {
    let mut scores = vec![0.0f64; ntags];
    for f in feats {
        if let Some(row) = weights.get(f) {
            for (s, w) in scores.iter_mut().zip(row) {
                *s += w;
            }
        }
    }
    let mut best = 0;
    for (t, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = t;
        }
    }
    best
}

/// Trains the tagger with the usual averaging trick: rather than summing
/// every intermediate weight vector, each cell keeps the step at which it
/// last changed and settles the elapsed span lazily.
pub fn train_pos_tagger(
    train: &TaggedCorpus,
    epochs: usize,
    seed: u64,
) -> Result<PerceptronTagger, EvalError> {
    if train.tagset.is_empty() {
        return Err(EvalError::EmptyTagset);
    }
    let tags: Vec<String> = train.tagset.iter().cloned().collect();
    let tag_index: HashMap<&str, usize> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let ntags = tags.len();
    let mut weights: HashMap<String, Vec<f64>> = HashMap::new();
    let mut totals: HashMap<String, Vec<f64>> = HashMap::new();
    let mut changed_at: HashMap<String, Vec<u64>> = HashMap::new();

    let settle = |weights: &mut HashMap<String, Vec<f64>>,
                      totals: &mut HashMap<String, Vec<f64>>,
                      changed_at: &mut HashMap<String, Vec<u64>>,
                      f: &str,
                      t: usize,
                      delta: f64,
                      step: u64| {
        let wv = weights
            .entry(f.to_string())
            .or_insert_with(|| vec![0.0; ntags]);
        let tv = totals
            .entry(f.to_string())
            .or_insert_with(|| vec![0.0; ntags]);
        let ca = changed_at
            .entry(f.to_string())
            .or_insert_with(|| vec![0; ntags]);
        tv[t] += (step - ca[t]) as f64 * wv[t];
        ca[t] = step;
        wv[t] += delta;
    };

    let mut order: Vec<usize> = (0..train.sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut step: u64 = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let sentence = &train.sentences[si];
            let words: Vec<String> = sentence.iter().map(|(w, _)| w.clone()).collect();
            let mut prev = "<s>".to_string();
            for (i, (_, gold)) in sentence.iter().enumerate() {
                step += 1;
                let feats = features(&words, i, &prev);
                let pred = argmax_tag(&weights, ntags, &feats);
                let gold_idx = tag_index[gold.as_str()];
                if pred != gold_idx {
                    for f in &feats {
                        settle(&mut weights, &mut totals, &mut changed_at, f, gold_idx, 1.0, step);
                        settle(&mut weights, &mut totals, &mut changed_at, f, pred, -1.0, step);
                    }
                }
                prev = tags[pred].clone();
            }
        }
    }

    // settle the remaining spans and divide
    for (f, wv) in weights.iter_mut() {
        let tv = totals.get_mut(f).expect("updated together");
        let ca = &changed_at[f];
        for t in 0..ntags {
            tv[t] += (step - ca[t]) as f64 * wv[t];
            wv[t] = tv[t] / step as f64;
        }
    }

    Ok(PerceptronTagger {
        tags,
        weights,
        scheme: train.scheme.clone(),
    })
}

/// Which extra accuracy slices to report.
#[derive(Debug, Clone, Default)]
pub struct SliceSpec {
    /// Bare spellings with multiple variants; tokens whose stripped form is
    /// in the set land in the `homograph` slice.
    pub homograph_keys: Option<BTreeSet<String>>,
    /// Training vocabulary; tokens outside it land in the `oov` slice.
    pub train_vocab: Option<BTreeSet<String>>,
    /// Report per-tag accuracy for the open classes.
    pub per_tag: bool,
}

/// Evaluation results, sliceable and machine-printable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagEval {
    pub overall: Accuracy,
    /// Named token slices (`homograph`, `oov`) that were requested.
    pub slices: BTreeMap<String, Accuracy>,
    /// Accuracy by gold tag, open classes only.
    pub per_tag: BTreeMap<String, Accuracy>,
    /// `(gold, predicted)` counts over all tokens.
    pub confusion: BTreeMap<(String, String), u64>,
}

impl TagEval {
    /// One `accuracy\t<slice>\t<value>` line per figure, overall first.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("accuracy\toverall\t{:.6}", self.overall.value())];
        for (name, acc) in &self.slices {
            lines.push(format!("accuracy\t{name}\t{:.6}", acc.value()));
        }
        for (tag, acc) in &self.per_tag {
            lines.push(format!("accuracy\ttag:{tag}\t{:.6}", acc.value()));
        }
        lines
    }
}

/// Runs `model` over `test` and tallies accuracy, requested slices, and the
/// confusion matrix. The corpora must carry the same diacritization scheme
/// — comparing a model to mismatched text measures nothing.
pub fn evaluate_tagger(
    model: &PerceptronTagger,
    test: &TaggedCorpus,
    slices: &SliceSpec,
) -> Result<TagEval, EvalError> {
    if model.scheme != test.scheme {
        return Err(EvalError::SchemeMismatch {
            model: model.scheme.clone(),
            data: test.scheme.clone(),
        });
    }
    let mut eval = TagEval::default();
    if slices.homograph_keys.is_some() {
        eval.slices.insert("homograph".into(), Accuracy::default());
    }
    if slices.train_vocab.is_some() {
        eval.slices.insert("oov".into(), Accuracy::default());
    }
    for sentence in &test.sentences {
        let words: Vec<String> = sentence.iter().map(|(w, _)| w.clone()).collect();
        let preds = model.tag(&words);
        for ((word, gold), pred) in sentence.iter().zip(&preds) {
            let correct = gold == pred;
            eval.overall.tally(correct);
            *eval
                .confusion
                .entry((gold.clone(), pred.clone()))
                .or_default() += 1;
            if let Some(keys) = &slices.homograph_keys {
                if keys.contains(&strip_diacritics(word, &MARKS)) {
                    eval.slices.get_mut("homograph").unwrap().tally(correct);
                }
            }
            if let Some(vocab) = &slices.train_vocab {
                if !vocab.contains(word) {
                    eval.slices.get_mut("oov").unwrap().tally(correct);
                }
            }
            if slices.per_tag && CONTENT_TAGS.contains(&gold.as_str()) {
                eval.per_tag.entry(gold.clone()).or_default().tally(correct);
            }
        }
    }
    Ok(eval)
}
