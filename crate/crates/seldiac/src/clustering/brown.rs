//! Brown clustering: greedy agglomerative word classes maximizing the
//! average mutual information (AMI) of adjacent class pairs.
//!
//! The classic insertion variant: the k most frequent types start as
//! singleton classes; every remaining type is added (by frequency) as a
//! temporary (k+1)-th class, and the pair of classes whose merge loses the
//! least AMI is merged. The result is exactly k classes (fewer only when
//! the vocabulary itself is smaller).

use std::collections::{BTreeMap, HashMap};

use crate::corpus::Corpus;

use super::{canonical_labels, ClusterAlgo, ClusterAssignment, ClusterError};

/// A finished Brown run.
#[derive(Debug, Clone)]
pub struct BrownFit {
    pub assignment: ClusterAssignment,
}

/// One merge decision, recorded for inspection: the classes on the table
/// before the merge, which two were merged (indices into `classes_before`),
/// and the AMI on either side of the decision.
#[derive(Debug, Clone)]
pub struct BrownStep {
    pub classes_before: Vec<Vec<String>>,
    pub merged: (usize, usize),
    pub ami_before: f64,
    pub ami_after: f64,
}

/// Clusters the vocabulary of `c` (types with frequency at least
/// `min_count`) into `k` classes.
pub fn brown(c: &Corpus, k: usize, min_count: usize) -> Result<BrownFit, ClusterError> {
    run(c, k, min_count, false).map(|(fit, _)| fit)
}

/// Like [`brown`], also returning the per-insertion merge trace. Meant for
/// small vocabularies — the trace snapshots every intermediate class set.
pub fn brown_with_trace(
    c: &Corpus,
    k: usize,
    min_count: usize,
) -> Result<(BrownFit, Vec<BrownStep>), ClusterError> {
    run(c, k, min_count, true)
}

fn run(
    c: &Corpus,
    k: usize,
    min_count: usize,
    trace: bool,
) -> Result<(BrownFit, Vec<BrownStep>), ClusterError> {
    assert!(k >= 1, "k must be positive");
    // Vocabulary in (frequency desc, word asc) order; ids are ranks.
    let mut freqs: HashMap<&str, u64> = HashMap::new();
    for sentence in &c.sentences {
        for token in sentence {
            *freqs.entry(token).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = freqs
        .iter()
        .filter(|&(_, &n)| n as usize >= min_count)
        .map(|(&w, &n)| (w, n))
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if vocab.len() < k {
        return Err(ClusterError::TooFewTypes {
            have: vocab.len(),
            need: k,
        });
    }
    let id_of: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();

    // Word-level bigram adjacency over kept tokens (dropped tokens close
    // the gap, joining their neighbors).
    let mut left: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vocab.len()];
    let mut right: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vocab.len()];
    for sentence in &c.sentences {
        let kept: Vec<usize> = sentence
            .iter()
            .filter_map(|t| id_of.get(t.as_str()).copied())
            .collect();
        for pair in kept.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            *left[u].entry(v).or_insert(0.0) += 1.0;
            if u != v {
                // self-bigrams are recorded once, on the left side
                *right[v].entry(u).or_insert(0.0) += 1.0;
            }
        }
    }

    let mut state = State::new(vocab.len());
    let initial = k.min(vocab.len());
    for w in 0..initial {
        state.add_class(w, &left, &right);
    }
    let mut steps = Vec::new();
    for w in initial..vocab.len() {
        state.add_class(w, &left, &right);
        let ami_before = state.ami();
        let (a, b, delta) = state.best_merge();
        if trace {
            steps.push(BrownStep {
                classes_before: state
                    .classes
                    .iter()
                    .map(|c| c.iter().map(|&w| vocab[w].0.to_string()).collect())
                    .collect(),
                merged: (a, b),
                ami_before,
                ami_after: ami_before + delta,
            });
        }
        state.merge(a, b);
    }

    let words: Vec<String> = {
        let mut ws: Vec<&str> = vocab.iter().map(|&(w, _)| w).collect();
        ws.sort_unstable();
        ws.into_iter().map(str::to_string).collect()
    };
    let raw: Vec<usize> = words.iter().map(|w| state.class_of[id_of[w.as_str()]]).collect();
    let mut assignment = canonical_labels(&words, &raw, ClusterAlgo::Br, None);
    let objective = class_bigram_log_likelihood(c, &assignment.labels, min_count);
    assignment.objective = Some(objective);
    Ok((BrownFit { assignment }, steps))
}

/// Class-bigram counts and marginals over the inserted vocabulary.
struct State {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    mat: Vec<Vec<f64>>,
    row: Vec<f64>,
    col: Vec<f64>,
    total: f64,
}

impl State {
    fn new(n_words: usize) -> Self {
        State {
            classes: Vec::new(),
            class_of: vec![usize::MAX; n_words],
            mat: Vec::new(),
            row: Vec::new(),
            col: Vec::new(),
            total: 0.0,
        }
    }

    /// Adds word `w` as a fresh singleton class, folding in its bigrams
    /// with all previously inserted words (and itself).
    fn add_class(
        &mut self,
        w: usize,
        left: &[BTreeMap<usize, f64>],
        right: &[BTreeMap<usize, f64>],
    ) {
        let c = self.classes.len();
        self.classes.push(vec![w]);
        self.class_of[w] = c;
        for m in self.mat.iter_mut() {
            m.push(0.0);
        }
        self.mat.push(vec![0.0; c + 1]);
        self.row.push(0.0);
        self.col.push(0.0);
        for (&v, &n) in &left[w] {
            let cv = self.class_of[v];
            if cv == usize::MAX {
                continue;
            }
            self.mat[c][cv] += n;
            self.row[c] += n;
            self.col[cv] += n;
            self.total += n;
        }
        for (&u, &n) in &right[w] {
            let cu = self.class_of[u];
            if cu == usize::MAX {
                continue;
            }
            self.mat[cu][c] += n;
            self.row[cu] += n;
            self.col[c] += n;
            self.total += n;
        }
    }

    fn term(&self, n: f64, r: f64, c: f64) -> f64 {
        if n > 0.0 {
            (n / self.total) * ((n * self.total) / (r * c)).ln()
        } else {
            0.0
        }
    }

    /// AMI of the current class-bigram distribution.
    fn ami(&self) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let c = self.classes.len();
        let mut i = 0.0;
        for a in 0..c {
            for b in 0..c {
                i += self.term(self.mat[a][b], self.row[a], self.col[b]);
            }
        }
        i
    }

    /// AMI change from merging classes `a` and `b`, in O(classes).
    fn merge_delta(&self, a: usize, b: usize) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let c = self.classes.len();
        let mut delta = 0.0;
        for y in 0..c {
            delta -= self.term(self.mat[a][y], self.row[a], self.col[y]);
            delta -= self.term(self.mat[b][y], self.row[b], self.col[y]);
        }
        for x in 0..c {
            if x == a || x == b {
                continue;
            }
            delta -= self.term(self.mat[x][a], self.row[x], self.col[a]);
            delta -= self.term(self.mat[x][b], self.row[x], self.col[b]);
        }
        let rm = self.row[a] + self.row[b];
        let cm = self.col[a] + self.col[b];
        for y in 0..c {
            if y == a || y == b {
                continue;
            }
            delta += self.term(self.mat[a][y] + self.mat[b][y], rm, self.col[y]);
            delta += self.term(self.mat[y][a] + self.mat[y][b], self.row[y], cm);
        }
        let mm = self.mat[a][a] + self.mat[a][b] + self.mat[b][a] + self.mat[b][b];
        delta += self.term(mm, rm, cm);
        delta
    }

    /// The merge pair with the highest post-merge AMI; ties break to the
    /// smallest `(a, b)`.
    fn best_merge(&self) -> (usize, usize, f64) {
        let c = self.classes.len();
        debug_assert!(c >= 2);
        let mut best = (0usize, 1usize, f64::NEG_INFINITY);
        for a in 0..c {
            for b in (a + 1)..c {
                let d = self.merge_delta(a, b);
                if d > best.2 {
                    best = (a, b, d);
                }
            }
        }
        best
    }

    /// Merges `b` into `a` and compacts ids (classes above `b` shift down).
    fn merge(&mut self, a: usize, b: usize) {
        debug_assert!(a < b);
        let c = self.classes.len();
        for y in 0..c {
            self.mat[a][y] += self.mat[b][y];
        }
        for x in 0..c {
            self.mat[x][a] += self.mat[x][b];
        }
        // the b row was folded into row a before columns were folded, so
        // mat[a][a] now holds aa+ab+ba+bb as required
        self.row[a] += self.row[b];
        self.col[a] += self.col[b];
        self.mat.remove(b);
        for m in self.mat.iter_mut() {
            m.remove(b);
        }
        self.row.remove(b);
        self.col.remove(b);
        let moved = self.classes.remove(b);
        self.classes[a].extend(moved);
        for cw in self.class_of.iter_mut() {
            if *cw == b {
                *cw = a;
            } else if *cw != usize::MAX && *cw > b {
                *cw -= 1;
            }
        }
    }
}

/// Log-likelihood of the corpus under the class-bigram model
/// `p(v | u) = p(class(v) | class(u)) * p(v | class(v))`, summed over all
/// adjacent kept-token pairs. This is the objective a Brown partition is
/// judged by, and it applies to *any* partition of the same vocabulary, so
/// alternative partitions can be scored for comparison.
pub fn class_bigram_log_likelihood(
    c: &Corpus,
    labels: &BTreeMap<String, usize>,
    min_count: usize,
) -> f64 {
    let mut freqs: HashMap<&str, u64> = HashMap::new();
    for sentence in &c.sentences {
        for token in sentence {
            *freqs.entry(token).or_insert(0) += 1;
        }
    }
    let kept = |t: &str| freqs.get(t).map_or(false, |&n| n as usize >= min_count) && labels.contains_key(t);

    let n_classes = labels.values().max().map_or(0, |&m| m + 1);
    let mut class_bigram: HashMap<(usize, usize), f64> = HashMap::new();
    let mut class_left = vec![0.0f64; n_classes];
    let mut class_unigram = vec![0.0f64; n_classes];
    let mut unigram: HashMap<&str, f64> = HashMap::new();
    let mut bigrams: Vec<(&str, &str)> = Vec::new();
    for sentence in &c.sentences {
        let kept_toks: Vec<&str> = sentence
            .iter()
            .map(String::as_str)
            .filter(|t| kept(t))
            .collect();
        for t in &kept_toks {
            *unigram.entry(t).or_insert(0.0) += 1.0;
            class_unigram[labels[*t]] += 1.0;
        }
        for pair in kept_toks.windows(2) {
            let (cu, cv) = (labels[pair[0]], labels[pair[1]]);
            *class_bigram.entry((cu, cv)).or_insert(0.0) += 1.0;
            class_left[cu] += 1.0;
            bigrams.push((pair[0], pair[1]));
        }
    }
    let mut ll = 0.0f64;
    for (u, v) in bigrams {
        let (cu, cv) = (labels[u], labels[v]);
        let p_class = class_bigram[&(cu, cv)] / class_left[cu];
        let p_word = unigram[v] / class_unigram[cv];
        ll += p_class.ln() + p_word.ln();
    }
    ll
}
