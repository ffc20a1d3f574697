//! Clustering over word vectors, corpora, and similarity graphs.
//!
//! Four algorithms with one output shape: k-means and spherical Gaussian
//! mixtures partition embedding vectors, Brown clustering partitions a
//! corpus's vocabulary by bigram context, and Chinese Whispers partitions a
//! similarity graph (used on the ego networks of individual words for sense
//! induction). Every algorithm reports a [`ClusterAssignment`]: a
//! word → cluster-id map with contiguous ids starting at 0.
//!
//! Determinism: each algorithm canonicalizes its input order internally
//! (points are processed in word order) and renumbers clusters by first
//! appearance, so for a fixed seed the cluster *contents* are a pure
//! function of the input set — permuting the input can only relabel them.

mod brown;
mod gmm;
mod graph;
mod kmeans;

pub use brown::{brown, brown_with_trace, class_bigram_log_likelihood, BrownFit, BrownStep};
pub use gmm::{gmm_em, GmmFit};
pub use graph::{build_ego_graph, chinese_whispers, CwFit, SimilarityGraph};
pub use kmeans::{kmeans, KmeansFit};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Errors from clustering.
#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {need} distinct points, have {have}")]
    TooFewPoints { have: usize, need: usize },
    #[error("need at least {need} vocabulary types above min_count, have {have}")]
    TooFewTypes { have: usize, need: usize },
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// Which algorithm produced an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterAlgo {
    /// k-means.
    Km,
    /// Gaussian mixture via EM.
    Em,
    /// Brown classes.
    Br,
    /// Chinese Whispers.
    Cw,
}

impl fmt::Display for ClusterAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterAlgo::Km => "KM",
            ClusterAlgo::Em => "EM",
            ClusterAlgo::Br => "BR",
            ClusterAlgo::Cw => "CW",
        })
    }
}

impl FromStr for ClusterAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "KM" => Ok(ClusterAlgo::Km),
            "EM" => Ok(ClusterAlgo::Em),
            "BR" => Ok(ClusterAlgo::Br),
            "CW" => Ok(ClusterAlgo::Cw),
            _ => Err(format!("unknown algorithm {s:?} (expected km, em, br, or cw)")),
        }
    }
}

/// A word → cluster partition.
///
/// Ids are contiguous from 0 and every id has at least one member. `k` is
/// the number of clusters actually present (for Chinese Whispers this is
/// discovered, not requested). `objective` is the algorithm's own criterion
/// — inertia for k-means, log-likelihood for EM and Brown — and `None` for
/// Chinese Whispers, which does not optimize one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub algo: ClusterAlgo,
    pub k: usize,
    pub labels: BTreeMap<String, usize>,
    pub objective: Option<f64>,
}

impl ClusterAssignment {
    /// Members of each cluster, id order; words sorted within a cluster.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = vec![Vec::new(); self.k];
        for (w, &c) in &self.labels {
            out[c].push(w);
        }
        out
    }

    pub fn cluster_of(&self, w: &str) -> Option<usize> {
        self.labels.get(w).copied()
    }

    /// Writes `#algo=<..> k=<..> objective=<..>` then `<word>\t<id>` lines
    /// in word order.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let obj = match self.objective {
            Some(v) => format!("{v:.6}"),
            None => "none".to_string(),
        };
        writeln!(w, "#algo={} k={} objective={}", self.algo, self.k, obj)?;
        for (word, id) in &self.labels {
            writeln!(w, "{word}\t{id}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn load(path: &Path) -> Result<Self, ClusterError> {
        let perr = |line: usize, msg: String| ClusterError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| perr(1, "empty file".into()))??;
        let mut algo = None;
        let mut k = None;
        let mut objective = None;
        let body = header
            .strip_prefix('#')
            .ok_or_else(|| perr(1, format!("missing # header, found {header:?}")))?;
        for field in body.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| perr(1, format!("bad header field {field:?}")))?;
            match key {
                "algo" => algo = Some(value.parse::<ClusterAlgo>().map_err(|e| perr(1, e))?),
                "k" => {
                    k = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| perr(1, format!("bad k {value:?}")))?,
                    )
                }
                "objective" => {
                    objective = if value == "none" {
                        None
                    } else {
                        Some(value.parse::<f64>().map_err(|_| {
                            perr(1, format!("bad objective {value:?}"))
                        })?)
                    }
                }
                _ => return Err(perr(1, format!("unknown header field {key:?}"))),
            }
        }
        let algo = algo.ok_or_else(|| perr(1, "header missing algo".into()))?;
        let k = k.ok_or_else(|| perr(1, "header missing k".into()))?;
        let mut labels = BTreeMap::new();
        for (no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, id) = line
                .split_once('\t')
                .ok_or_else(|| perr(no + 2, format!("expected <word>\\t<id>, found {line:?}")))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| perr(no + 2, format!("bad cluster id {id:?}")))?;
            if id >= k {
                return Err(perr(no + 2, format!("cluster id {id} out of range (k={k})")));
            }
            if labels.insert(word.to_string(), id).is_some() {
                return Err(perr(no + 2, format!("duplicate word {word:?}")));
            }
        }
        Ok(ClusterAssignment {
            algo,
            k,
            labels,
            objective,
        })
    }
}

/// Renumbers raw labels so cluster ids are contiguous from 0 in order of
/// first appearance, dropping empty ids. `words` and `raw` run in parallel.
pub(crate) fn canonical_labels(
    words: &[String],
    raw: &[usize],
    algo: ClusterAlgo,
    objective: Option<f64>,
) -> ClusterAssignment {
    debug_assert_eq!(words.len(), raw.len());
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (w, &r) in words.iter().zip(raw) {
        let next = remap.len();
        let id = *remap.entry(r).or_insert(next);
        labels.insert(w.clone(), id);
    }
    ClusterAssignment {
        algo,
        k: remap.len(),
        labels,
        objective,
    }
}
