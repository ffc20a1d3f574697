//! Corpus ingestion, cleaning, scheme views, and variant maps.
//!
//! A [`Corpus`] is a list of tokenized sentences tagged with the
//! diacritization [`Scheme`] it is written in. Raw text enters through
//! [`clean`], which normalizes non-lexical material (URLs, e-mails, digits,
//! punctuation, symbols) into unified tokens and bounds sentence length.
//! From a fully diacritized corpus, [`derive_views`] produces the
//! undiacritized view and the view with word-final case/mood marks removed;
//! [`build_variant_map`] groups the surviving diacritized forms under their
//! undiacritized keys — the raw material every ambiguity detector consumes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::mem;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::textcore::{strip_diacritics, to_full_cm, DiacriticSet};

/// Unified token for URLs.
pub const URL_TOKEN: &str = "<URL>";
/// Unified token for e-mail addresses.
pub const EMAIL_TOKEN: &str = "<EMAIL>";
/// Unified token for digit runs.
pub const NUM_TOKEN: &str = "<NUM>";
/// Unified token for punctuation runs.
pub const PUNC_TOKEN: &str = "<PUNC>";
/// Unified token for other symbol runs.
pub const SYM_TOKEN: &str = "<SYM>";

/// Is `t` one of the five unified tokens? These are opaque: no diacritic
/// operation applies to them and they never enter variant maps or
/// dictionaries. (Several contain characters that double as Buckwalter
/// marks — `<NUM>` holds a dammatan `N` — so treating them as words would
/// corrupt them.)
pub fn is_unified_token(t: &str) -> bool {
    t == URL_TOKEN || t == EMAIL_TOKEN || t == NUM_TOKEN || t == PUNC_TOKEN || t == SYM_TOKEN
}

/// Errors from corpus I/O and validation.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: invalid encoding")]
    InvalidEncoding { line: usize },
    #[error("parallel corpus length mismatch: {src} source lines vs {tgt} target lines")]
    LineCountMismatch { src: usize, tgt: usize },
}

/// Diacritization scheme of a corpus view.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Undiacritized.
    None,
    /// Fully diacritized.
    Full,
    /// Fully diacritized with word-final case/mood marks removed.
    FullCm,
    /// Selectively diacritized with the named dictionary.
    Selective(String),
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::None => f.write_str("NONE"),
            Scheme::Full => f.write_str("FULL"),
            Scheme::FullCm => f.write_str("FULL-CM"),
            Scheme::Selective(id) => write!(f, "SELECTIVE({id})"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" => Ok(Scheme::None),
            "FULL" => Ok(Scheme::Full),
            "FULL-CM" | "FULLCM" | "FULL_CM" => Ok(Scheme::FullCm),
            upper => {
                // keep the dictionary id's own case
                if upper.starts_with("SELECTIVE(") && upper.ends_with(')') {
                    let inner = &s["SELECTIVE(".len()..s.len() - 1];
                    Ok(Scheme::Selective(inner.to_string()))
                } else {
                    Err(format!(
                        "unknown scheme {s:?} (expected none, full, full-cm, or selective(ID))"
                    ))
                }
            }
        }
    }
}

/// A tokenized corpus in one diacritization scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Vec<String>>,
    pub scheme: Scheme,
    /// Free-form notes on where this corpus came from (source file, the
    /// stages applied). Carried along, never interpreted.
    pub provenance: Vec<String>,
}

impl Corpus {
    pub fn new(sentences: Vec<Vec<String>>, scheme: Scheme) -> Self {
        Corpus {
            sentences,
            scheme,
            provenance: Vec::new(),
        }
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance.push(note.into());
        self
    }

    pub fn token_count(&self) -> u64 {
        self.sentences.iter().map(|s| s.len() as u64).sum()
    }

    /// Reads one whitespace-tokenized sentence per line. Unlike [`clean`],
    /// this expects already-processed text, so a bad line is an error, not
    /// a statistic.
    pub fn from_reader<R: Read>(reader: R, scheme: Scheme) -> Result<Self, CorpusError> {
        let mut r = BufReader::new(reader);
        let mut sentences = Vec::new();
        let mut buf = Vec::new();
        let mut line_no = 0usize;
        loop {
            buf.clear();
            line_no += 1;
            if r.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            let line = std::str::from_utf8(&buf)
                .map_err(|_| CorpusError::InvalidEncoding { line: line_no })?;
            let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if !tokens.is_empty() {
                sentences.push(tokens);
            }
        }
        Ok(Corpus::new(sentences, scheme))
    }

    pub fn from_path(path: &Path, scheme: Scheme) -> Result<Self, CorpusError> {
        let corpus = Self::from_reader(File::open(path)?, scheme)?;
        Ok(corpus.with_provenance(path.display().to_string()))
    }

    /// Writes one sentence per line, tokens space-separated.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for sentence in &self.sentences {
            writeln!(w, "{}", sentence.join(" "))?;
        }
        Ok(())
    }

    pub fn to_path(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }
}

/// Knobs for [`clean`].
#[derive(Debug, Clone)]
pub struct CleanConfig {
    /// Treat input as Buckwalter transliteration (ASCII specials like `~`
    /// and `'` are word characters) instead of Arabic script.
    pub buckwalter: bool,
    /// Maximum sentence length in tokens; longer sentences are split at
    /// punctuation.
    pub max_len: usize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            buckwalter: false,
            max_len: 150,
        }
    }
}

/// What [`clean`] did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanReport {
    /// Sentences in the cleaned corpus.
    pub sentences: usize,
    /// Over-long sentences that had to be split at punctuation.
    pub split_sentences: usize,
    /// Pieces still over the limit after splitting, dropped.
    pub dropped_long: usize,
    /// Lines skipped because they were not valid UTF-8.
    pub invalid_lines: usize,
}

static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^(?:https?://|www\.)\S+$").unwrap());
static EMAIL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[^@\s]+@[^@\s]+\.[^@\s.]+$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Word,
    Digit,
    Punct,
    Sym,
}

/// Buckwalter characters that are word material despite being ASCII
/// punctuation/symbols.
const BW_SPECIALS: &[char] = &[
    '\'', '|', '>', '&', '<', '}', '{', '$', '*', '_', '~', '`',
];

/// Punctuation recognized for `<PUNC>` and for sentence splitting. Covers
/// ASCII plus the Arabic comma, semicolon, and question mark.
const PUNCT_CHARS: &[char] = &[
    '.', ',', ';', ':', '!', '?', '(', ')', '[', ']', '{', '}', '"', '\'', '-', '/', '\\', '«',
    '»', '…', '،', '؛', '؟', '—', '–',
];

fn classify(c: char, buckwalter: bool) -> CharClass {
    if c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c) {
        return CharClass::Digit;
    }
    if buckwalter && (c.is_ascii_alphabetic() || BW_SPECIALS.contains(&c)) {
        return CharClass::Word;
    }
    if !buckwalter && (c.is_alphabetic() || is_arabic_combining(c) || c == '\u{0640}') {
        return CharClass::Word;
    }
    if PUNCT_CHARS.contains(&c) {
        return CharClass::Punct;
    }
    CharClass::Sym
}

fn is_arabic_combining(c: char) -> bool {
    ('\u{0610}'..='\u{061A}').contains(&c)
        || ('\u{064B}'..='\u{065F}').contains(&c)
        || c == '\u{0670}'
}

/// Rewrites one whitespace token into cleaned tokens. A URL or e-mail
/// becomes a single unified token; otherwise the token is segmented into
/// maximal same-class character runs, with non-word runs unified
/// (`"AEln2019"` → `["AEln", "<NUM>"]`).
fn clean_token(token: &str, buckwalter: bool, out: &mut Vec<String>) {
    if EMAIL_RE.is_match(token) {
        out.push(EMAIL_TOKEN.to_string());
        return;
    }
    if URL_RE.is_match(token) {
        out.push(URL_TOKEN.to_string());
        return;
    }
    let mut run = String::new();
    let mut run_class = None;
    for c in token.chars() {
        let class = classify(c, buckwalter);
        if run_class != Some(class) {
            flush_run(&mut run, run_class, out);
            run_class = Some(class);
        }
        run.push(c);
    }
    flush_run(&mut run, run_class, out);
}

fn flush_run(run: &mut String, class: Option<CharClass>, out: &mut Vec<String>) {
    if run.is_empty() {
        return;
    }
    match class {
        Some(CharClass::Word) => out.push(mem::take(run)),
        Some(CharClass::Digit) => {
            run.clear();
            out.push(NUM_TOKEN.to_string());
        }
        Some(CharClass::Punct) => {
            run.clear();
            out.push(PUNC_TOKEN.to_string());
        }
        Some(CharClass::Sym) => {
            run.clear();
            out.push(SYM_TOKEN.to_string());
        }
        None => run.clear(),
    }
}

/// Splits an over-long sentence into `<PUNC>`-terminated segments, then
/// greedily packs segments left to right into pieces of at most `max`
/// tokens. A lone segment longer than `max` survives as an oversized piece
/// for the caller to drop.
fn split_long(tokens: Vec<String>, max: usize) -> Vec<Vec<String>> {
    let mut segments: Vec<Vec<String>> = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    for t in tokens {
        let is_punc = t == PUNC_TOKEN;
        cur.push(t);
        if is_punc {
            segments.push(mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        segments.push(cur);
    }

    let mut pieces: Vec<Vec<String>> = Vec::new();
    let mut acc: Vec<String> = Vec::new();
    for seg in segments {
        if acc.is_empty() {
            acc = seg;
        } else if acc.len() + seg.len() <= max {
            acc.extend(seg);
        } else {
            pieces.push(mem::take(&mut acc));
            acc = seg;
        }
    }
    if !acc.is_empty() {
        pieces.push(acc);
    }
    pieces
}

/// Cleans raw text into a corpus: unifies URLs, e-mails, digit runs,
/// punctuation, and symbols; splits sentences longer than
/// `config.max_len` at punctuation and drops pieces that are still too
/// long; skips lines that are not valid UTF-8. The resulting scheme is
/// whatever the input text was written in — cleaning never touches
/// diacritics — so the caller tags the corpus itself.
pub fn clean<R: Read>(raw: R, config: &CleanConfig) -> io::Result<(Corpus, CleanReport)> {
    let mut reader = BufReader::new(raw);
    let mut report = CleanReport::default();
    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let line = match std::str::from_utf8(&buf) {
            Ok(l) => l,
            Err(_) => {
                report.invalid_lines += 1;
                continue;
            }
        };
        let mut tokens: Vec<String> = Vec::new();
        for raw_tok in line.split_whitespace() {
            clean_token(raw_tok, config.buckwalter, &mut tokens);
        }
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() <= config.max_len {
            sentences.push(tokens);
        } else {
            report.split_sentences += 1;
            for piece in split_long(tokens, config.max_len) {
                if piece.len() <= config.max_len {
                    sentences.push(piece);
                } else {
                    report.dropped_long += 1;
                }
            }
        }
    }
    report.sentences = sentences.len();
    Ok((Corpus::new(sentences, Scheme::Full), report))
}

/// Derives the undiacritized and final-marks-removed views of a fully
/// diacritized corpus. Sentence and token structure is preserved exactly;
/// unified tokens pass through untouched.
pub fn derive_views(full: &Corpus, d: &DiacriticSet) -> (Corpus, Corpus) {
    let map = |f: &dyn Fn(&str) -> String, scheme: Scheme| {
        let sentences = full
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| {
                        if is_unified_token(t) {
                            t.clone()
                        } else {
                            f(t)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut c = Corpus::new(sentences, scheme);
        c.provenance = full.provenance.clone();
        c
    };
    let none = map(&|t| strip_diacritics(t, d), Scheme::None);
    let cm = map(&|t| to_full_cm(t, d), Scheme::FullCm);
    (none, cm)
}

/// Diacritized variants grouped under their undiacritized keys.
///
/// Frequencies are occurrence counts in the corpus the map was built from;
/// a variant injected from elsewhere (a lexicon, say) may carry frequency
/// zero. Keys with two or more variants are the corpus's homograph
/// candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariantMap {
    groups: BTreeMap<String, BTreeMap<String, u64>>,
}

impl VariantMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `freq` occurrences of `variant` under `key`. Unified tokens are
    /// ignored — they are not words.
    pub fn insert(&mut self, key: &str, variant: &str, freq: u64) {
        if is_unified_token(variant) || is_unified_token(key) {
            return;
        }
        *self
            .groups
            .entry(key.to_string())
            .or_default()
            .entry(variant.to_string())
            .or_insert(0) += freq;
    }

    /// Groups in key order; each group maps variant → frequency.
    pub fn groups(&self) -> impl Iterator<Item = (&String, &BTreeMap<String, u64>)> {
        self.groups.iter()
    }

    pub fn get(&self, key: &str) -> Option<&BTreeMap<String, u64>> {
        self.groups.get(key)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Does `key` collapse two or more distinct diacritized variants?
    pub fn is_homograph_key(&self, key: &str) -> bool {
        self.groups.get(key).map_or(false, |g| g.len() >= 2)
    }

    /// All keys with at least two variants.
    pub fn homograph_keys(&self) -> impl Iterator<Item = &String> {
        self.groups.iter().filter(|(_, g)| g.len() >= 2).map(|(k, _)| k)
    }
}

/// Groups every diacritized token of `fullcm` under its stripped key.
/// Unified tokens are excluded.
pub fn build_variant_map(fullcm: &Corpus, d: &DiacriticSet) -> VariantMap {
    debug_assert_eq!(fullcm.scheme, Scheme::FullCm, "variant maps are built from the FULL-CM view");
    let mut map = VariantMap::new();
    for sentence in &fullcm.sentences {
        for token in sentence {
            if is_unified_token(token) {
                continue;
            }
            map.insert(&strip_diacritics(token, d), token, 1);
        }
    }
    map
}

/// Type and token counts for a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabStats {
    pub types: usize,
    pub tokens: u64,
    pub type_freqs: BTreeMap<String, u64>,
}

pub fn vocab_stats(c: &Corpus) -> VocabStats {
    let mut type_freqs: BTreeMap<String, u64> = BTreeMap::new();
    let mut tokens = 0u64;
    for sentence in &c.sentences {
        for token in sentence {
            tokens += 1;
            *type_freqs.entry(token.clone()).or_insert(0) += 1;
        }
    }
    VocabStats {
        types: type_freqs.len(),
        tokens,
        type_freqs,
    }
}

/// Sentence-aligned source/target pairs for alignment training.
#[derive(Debug, Clone, Default)]
pub struct ParallelCorpus {
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(Vec<String>, Vec<String>)>) -> Self {
        ParallelCorpus { pairs }
    }

    /// Loads two line-aligned files. Line counts must match; pairs where
    /// either side is empty are skipped (their count is returned).
    pub fn from_paths(src: &Path, tgt: &Path) -> Result<(Self, usize), CorpusError> {
        let src_c = Corpus::from_reader_keeping_empty(File::open(src)?)?;
        let tgt_c = Corpus::from_reader_keeping_empty(File::open(tgt)?)?;
        if src_c.len() != tgt_c.len() {
            return Err(CorpusError::LineCountMismatch {
                src: src_c.len(),
                tgt: tgt_c.len(),
            });
        }
        let mut pairs = Vec::new();
        let mut skipped = 0usize;
        for (s, t) in src_c.into_iter().zip(tgt_c) {
            if s.is_empty() || t.is_empty() {
                skipped += 1;
            } else {
                pairs.push((s, t));
            }
        }
        Ok((ParallelCorpus { pairs }, skipped))
    }
}

impl Corpus {
    /// Line-for-line read that keeps empty lines (needed to preserve
    /// alignment between parallel files).
    fn from_reader_keeping_empty<R: Read>(reader: R) -> Result<Vec<Vec<String>>, CorpusError> {
        let mut r = BufReader::new(reader);
        let mut lines = Vec::new();
        let mut buf = Vec::new();
        let mut line_no = 0usize;
        loop {
            buf.clear();
            line_no += 1;
            if r.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            let line = std::str::from_utf8(&buf)
                .map_err(|_| CorpusError::InvalidEncoding { line: line_no })?;
            lines.push(line.split_whitespace().map(str::to_string).collect());
        }
        Ok(lines)
    }
}
