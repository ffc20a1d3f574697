//! Ambiguity dictionaries: which words keep their diacritics.
//!
//! A dictionary maps words to ambiguous/unambiguous. Applied to a
//! fully-diacritized corpus it yields a *selective* view: ambiguous words
//! keep their marks, everything else is stripped bare. Four unsupervised
//! builders are provided — from a morphological lexicon (a word with
//! several analyses is ambiguous), from sense induction on embeddings of
//! undiacritized text (a word whose neighborhood splits into several
//! senses), from hard clusterings of diacritized variants (variants of one
//! bare spelling landing in different clusters), and from translations (a
//! variant sharing no likely translation with some sibling is doing real
//! disambiguation work).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::align::{TopN, TranslationTable};
use crate::clustering::{build_ego_graph, chinese_whispers, ClusterAlgo, ClusterAssignment};
use crate::corpus::{is_unified_token, Corpus, Scheme, VariantMap};
use crate::embeddings::{EmbedError, EmbeddingTable};
use crate::textcore::{strip_diacritics, DiacriticSet};

/// Chinese Whispers passes used during sense induction.
pub const SENSE_CW_ITERATIONS: usize = 20;

/// Errors from dictionary construction and I/O.
#[derive(Debug, Error)]
pub enum AmbigError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("sense induction needs embeddings trained on undiacritized text, these were trained on {found}")]
    WrongTrainingScheme { found: Scheme },
    #[error("cluster-based dictionaries need a hard flat clustering, not {0}")]
    UnsupportedClusterAlgo(ClusterAlgo),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Whether dictionary keys carry diacritics.
///
/// `Undiac` keys are bare spellings — lookups strip the word first, and one
/// entry covers every variant. `Diac` keys are the diacritized variants
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keying {
    Undiac,
    Diac,
}

impl fmt::Display for Keying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Keying::Undiac => "UNDIAC",
            Keying::Diac => "DIAC",
        })
    }
}

impl FromStr for Keying {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "UNDIAC" => Ok(Keying::Undiac),
            "DIAC" => Ok(Keying::Diac),
            _ => Err(format!("unknown keying {s:?} (expected UNDIAC or DIAC)")),
        }
    }
}

/// Which builder produced a dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Morphological lexicon: several analyses for one bare spelling.
    Multi,
    /// Sense induction: ego-network clustering of embedding neighborhoods.
    Sense,
    /// Variant clustering over Brown classes.
    ClBr,
    /// Variant clustering over k-means clusters.
    ClKm,
    /// Variant clustering over mixture components.
    ClEm,
    /// Translation overlap.
    Tr,
}

impl Method {
    /// The keying this builder naturally produces.
    pub fn keying(self) -> Keying {
        match self {
            Method::Multi | Method::Sense => Keying::Undiac,
            Method::ClBr | Method::ClKm | Method::ClEm | Method::Tr => Keying::Diac,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Multi => "MULTI",
            Method::Sense => "SENSE",
            Method::ClBr => "CL-BR",
            Method::ClKm => "CL-KM",
            Method::ClEm => "CL-EM",
            Method::Tr => "TR",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MULTI" => Ok(Method::Multi),
            "SENSE" => Ok(Method::Sense),
            "CL-BR" => Ok(Method::ClBr),
            "CL-KM" => Ok(Method::ClKm),
            "CL-EM" => Ok(Method::ClEm),
            "TR" => Ok(Method::Tr),
            _ => Err(format!(
                "unknown method {s:?} (expected MULTI, SENSE, CL-BR, CL-KM, CL-EM or TR)"
            )),
        }
    }
}

/// A dictionary verdict for one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Ambiguous,
    Unambiguous,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Ambiguous => "A",
            Label::Unambiguous => "U",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Label::Ambiguous),
            "U" => Ok(Label::Unambiguous),
            _ => Err(format!("unknown label {s:?} (expected A or U)")),
        }
    }
}

/// Words labelled ambiguous or unambiguous, plus how they got that way.
///
/// Absent words are treated as unambiguous: a dictionary never *adds*
/// diacritics, so the safe default for an unseen word is to strip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbigDict {
    pub keying: Keying,
    pub method: Method,
    /// Builder settings worth reproducing the dictionary from, as plain
    /// key=value strings.
    pub params: BTreeMap<String, String>,
    labels: BTreeMap<String, Label>,
}

impl AmbigDict {
    pub fn new(keying: Keying, method: Method) -> Self {
        AmbigDict {
            keying,
            method,
            params: BTreeMap::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Records a verdict. Unified placeholder tokens are never entered —
    /// they carry no diacritics to keep.
    pub fn insert(&mut self, word: &str, label: Label) {
        if is_unified_token(word) {
            return;
        }
        self.labels.insert(word.to_string(), label);
    }

    pub fn label_of(&self, word: &str) -> Option<Label> {
        self.labels.get(word).copied()
    }

    /// Whether `word` should keep its diacritics. Unknown words are not
    /// ambiguous.
    pub fn is_ambiguous(&self, word: &str) -> bool {
        matches!(self.labels.get(word), Some(Label::Ambiguous))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, Label)> {
        self.labels.iter().map(|(w, &l)| (w, l))
    }

    pub fn ambiguous_count(&self) -> usize {
        self.labels
            .values()
            .filter(|&&l| l == Label::Ambiguous)
            .count()
    }

    /// Writes `#keying=… method=… params=…` then one `<word>\t<A|U>` line
    /// per entry, words sorted.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(
            w,
            "#keying={} method={} params={}",
            self.keying,
            self.method,
            params.join(",")
        )?;
        for (word, label) in &self.labels {
            writeln!(w, "{word}\t{label}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn load(path: &Path) -> Result<Self, AmbigError> {
        let perr = |line: usize, msg: String| AmbigError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(h) => h?,
            None => return Err(perr(1, "empty file, expected a #keying=… header".into())),
        };
        let Some(header) = header.strip_prefix('#') else {
            return Err(perr(1, format!("expected a #keying=… header, found {header:?}")));
        };
        let mut keying = None;
        let mut method = None;
        let mut params = BTreeMap::new();
        for field in header.split_whitespace() {
            let Some((key, value)) = field.split_once('=') else {
                return Err(perr(1, format!("malformed header field {field:?}")));
            };
            match key {
                "keying" => keying = Some(value.parse::<Keying>().map_err(|e| perr(1, e))?),
                "method" => method = Some(value.parse::<Method>().map_err(|e| perr(1, e))?),
                "params" => {
                    for pair in value.split(',').filter(|p| !p.is_empty()) {
                        let Some((k, v)) = pair.split_once('=') else {
                            return Err(perr(1, format!("malformed parameter {pair:?}")));
                        };
                        params.insert(k.to_string(), v.to_string());
                    }
                }
                other => return Err(perr(1, format!("unknown header field {other:?}"))),
            }
        }
        let keying = keying.ok_or_else(|| perr(1, "header is missing keying".into()))?;
        let method = method.ok_or_else(|| perr(1, "header is missing method".into()))?;
        let mut dict = AmbigDict::new(keying, method);
        dict.params = params;
        for (no, line) in lines.enumerate() {
            let line = line?;
            let lineno = no + 2;
            if line.trim().is_empty() {
                continue;
            }
            let Some((word, label)) = line.split_once('\t') else {
                return Err(perr(lineno, format!("expected <word>\\t<A|U>, found {line:?}")));
            };
            let label: Label = label.parse().map_err(|e| perr(lineno, e))?;
            if is_unified_token(word) {
                return Err(perr(lineno, format!("placeholder token {word:?} cannot be keyed")));
            }
            if let Some(prev) = dict.labels.get(word) {
                if *prev != label {
                    return Err(perr(lineno, format!("conflicting labels for {word:?}")));
                }
            }
            dict.labels.insert(word.to_string(), label);
        }
        Ok(dict)
    }
}

/// A morphological lexicon: bare spellings mapped to their diacritized
/// analyses, normalized so purely syntactic final marks don't multiply the
/// count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorphLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl MorphLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds analyses for a bare spelling. Analyses are normalized by
    /// dropping word-final case/mood marks; the key is stripped of any
    /// stray diacritics.
    pub fn insert<'a>(
        &mut self,
        word: &str,
        analyses: impl IntoIterator<Item = &'a str>,
        d: &DiacriticSet,
    ) {
        let key = strip_diacritics(word, d);
        let set = self.entries.entry(key).or_default();
        for a in analyses {
            set.insert(crate::textcore::to_full_cm(a, d));
        }
    }

    pub fn analyses(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    /// Reads `<word>\t<analysis>|<analysis>|…` lines. Repeated words merge
    /// their analysis sets.
    pub fn from_reader<R: Read>(
        reader: R,
        d: &DiacriticSet,
        path: &Path,
    ) -> Result<Self, AmbigError> {
        let perr = |line: usize, msg: String| AmbigError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lex = MorphLexicon::new();
        for (no, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let Some((word, analyses)) = line.split_once('\t') else {
                return Err(perr(
                    no + 1,
                    format!("expected <word>\\t<analyses>, found {line:?}"),
                ));
            };
            let parts: Vec<&str> = analyses.split('|').filter(|a| !a.is_empty()).collect();
            if parts.is_empty() {
                return Err(perr(no + 1, format!("no analyses for {word:?}")));
            }
            lex.insert(word, parts, d);
        }
        Ok(lex)
    }

    pub fn from_path(path: &Path, d: &DiacriticSet) -> Result<Self, AmbigError> {
        Self::from_reader(File::open(path)?, d, path)
    }
}

/// Lexicon rule: a bare spelling with two or more distinct normalized
/// analyses is ambiguous.
pub fn build_multi(lex: &MorphLexicon) -> AmbigDict {
    let mut dict = AmbigDict::new(Keying::Undiac, Method::Multi);
    for (word, analyses) in &lex.entries {
        let label = if analyses.len() >= 2 {
            Label::Ambiguous
        } else {
            Label::Unambiguous
        };
        dict.insert(word, label);
    }
    dict
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Sense rule: a word whose embedding neighborhood partitions into two or
/// more substantial clusters is ambiguous.
///
/// For each vocabulary word, an ego network over its `graph_size` nearest
/// neighbors (each node connected to its `granularity` most similar
/// co-neighbors) is partitioned by Chinese Whispers; the word is ambiguous
/// when at least two clusters reach `min_cluster` members. Requires
/// embeddings trained on undiacritized text — the whole point is to detect
/// senses that the bare spelling conflates.
pub fn build_sense(
    t: &EmbeddingTable,
    graph_size: usize,
    granularity: usize,
    min_cluster: usize,
    seed: u64,
) -> Result<AmbigDict, AmbigError> {
    if t.trained_on != Scheme::None {
        return Err(AmbigError::WrongTrainingScheme {
            found: t.trained_on.clone(),
        });
    }
    let mut dict = AmbigDict::new(Keying::Undiac, Method::Sense);
    dict.params.insert("graph_size".into(), graph_size.to_string());
    dict.params.insert("granularity".into(), granularity.to_string());
    dict.params.insert("min_cluster".into(), min_cluster.to_string());
    dict.params.insert("seed".into(), seed.to_string());
    for word in t.vocab() {
        if is_unified_token(word) {
            continue;
        }
        let graph = build_ego_graph(t, word, graph_size, granularity)?;
        if graph.len() < 2 {
            dict.insert(word, Label::Unambiguous);
            continue;
        }
        let fit = chinese_whispers(&graph, SENSE_CW_ITERATIONS, seed ^ fnv1a(word.as_bytes()));
        let substantial = fit
            .assignment
            .clusters()
            .iter()
            .filter(|c| c.len() >= min_cluster)
            .count();
        let label = if substantial >= 2 {
            Label::Ambiguous
        } else {
            Label::Unambiguous
        };
        dict.insert(word, label);
    }
    Ok(dict)
}

/// Clustering rule: variants of one bare spelling that land in different
/// clusters are all ambiguous; a spelling whose variants share a cluster is
/// unambiguous throughout.
///
/// Variants missing from the clustering each count as their own singleton
/// cluster (they're returned in the second slot so callers can report
/// coverage). Only hard flat clusterings qualify.
pub fn build_cl(
    vm: &VariantMap,
    ca: &ClusterAssignment,
) -> Result<(AmbigDict, Vec<String>), AmbigError> {
    let method = match ca.algo {
        ClusterAlgo::Km => Method::ClKm,
        ClusterAlgo::Em => Method::ClEm,
        ClusterAlgo::Br => Method::ClBr,
        ClusterAlgo::Cw => return Err(AmbigError::UnsupportedClusterAlgo(ca.algo)),
    };
    let mut dict = AmbigDict::new(Keying::Diac, method);
    dict.params.insert("k".into(), ca.k.to_string());
    let mut uncovered = Vec::new();
    let mut next_pseudo = ca.k;
    for (_, variants) in vm.groups() {
        let mut ids = BTreeSet::new();
        for variant in variants.keys() {
            match ca.cluster_of(variant) {
                Some(id) => {
                    ids.insert(id);
                }
                None => {
                    uncovered.push(variant.clone());
                    ids.insert(next_pseudo);
                    next_pseudo += 1;
                }
            }
        }
        let label = if ids.len() >= 2 {
            Label::Ambiguous
        } else {
            Label::Unambiguous
        };
        for variant in variants.keys() {
            dict.insert(variant, label);
        }
    }
    uncovered.sort_unstable();
    Ok((dict, uncovered))
}

/// Translation rule: a variant is unambiguous only when it shares a likely
/// translation with *every* sibling variant of the same bare spelling.
///
/// Sharing with every sibling means the diacritics carry no meaning a
/// translator cares about; failing even one sibling means they do. A
/// variant with no surviving translations in a multi-variant group cannot
/// demonstrate overlap, so it stays ambiguous. Sole variants are
/// unambiguous outright.
pub fn build_tr(vm: &VariantMap, tt: &TranslationTable, n: TopN) -> AmbigDict {
    let mut dict = AmbigDict::new(Keying::Diac, Method::Tr);
    dict.params.insert("n".into(), n.to_string());
    for (_, variants) in vm.groups() {
        let names: Vec<&String> = variants.keys().collect();
        if names.len() == 1 {
            dict.insert(names[0], Label::Unambiguous);
            continue;
        }
        let tops: Vec<BTreeSet<&str>> = names.iter().map(|v| tt.top_set(v, n)).collect();
        for (i, variant) in names.iter().enumerate() {
            let covers_all = !tops[i].is_empty()
                && tops
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .all(|(_, other)| tops[i].intersection(other).next().is_some());
            let label = if covers_all {
                Label::Unambiguous
            } else {
                Label::Ambiguous
            };
            dict.insert(variant, label);
        }
    }
    dict
}

/// Applies a dictionary to a fully-diacritized corpus: ambiguous words keep
/// their marks, everything else is stripped. Placeholder tokens pass
/// through untouched.
pub fn apply_selective(fullcm: &Corpus, d: &DiacriticSet, ds: &AmbigDict) -> Corpus {
    let sentences = fullcm
        .sentences
        .iter()
        .map(|s| {
            s.iter()
                .map(|token| {
                    if is_unified_token(token) {
                        return token.clone();
                    }
                    let keep = match ds.keying {
                        Keying::Diac => ds.is_ambiguous(token),
                        Keying::Undiac => ds.is_ambiguous(&strip_diacritics(token, d)),
                    };
                    if keep {
                        token.clone()
                    } else {
                        strip_diacritics(token, d)
                    }
                })
                .collect()
        })
        .collect();
    let mut c = Corpus::new(sentences, Scheme::Selective(ds.method.to_string()));
    c.provenance = fullcm.provenance.clone();
    c
}
