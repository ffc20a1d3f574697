//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{canonical_labels, ClusterAlgo, ClusterAssignment, ClusterError};

/// A finished k-means run: the assignment plus the centroids and inertia
/// that produced it. Assigning every point to its nearest centroid
/// reproduces `assignment` exactly — that is the fixed point Lloyd
/// iteration stops at.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub assignment: ClusterAssignment,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each point to its centroid.
    pub inertia: f64,
}

/// Clusters `points` into `k` groups, keeping the best of `n_init`
/// k-means++ restarts by inertia. Needs at least `k` distinct vectors.
///
/// Points are processed in word order and clusters are numbered by first
/// appearance in that order, so the partition is independent of input
/// permutation.
pub fn kmeans(
    points: &[(String, Vec<f32>)],
    k: usize,
    n_init: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KmeansFit, ClusterError> {
    assert!(k >= 1, "k must be positive");
    assert!(n_init >= 1, "need at least one restart");
    let (words, data) = sort_points(points);
    let distinct = count_distinct(&data);
    if distinct < k {
        return Err(ClusterError::TooFewPoints {
            have: distinct,
            need: k,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for _ in 0..n_init {
        let mut centroids = seed_plus_plus(&data, k, &mut rng);
        let mut labels = assign(&data, &centroids);
        for _ in 0..max_iter {
            repair_empty(&data, &mut centroids, &mut labels, k);
            let next = means(&data, &labels, &centroids, k);
            let shift = centroids
                .iter()
                .zip(&next)
                .map(|(a, b)| dist2(a, b).sqrt())
                .fold(0.0f64, f64::max);
            centroids = next;
            labels = assign(&data, &centroids);
            if shift < tol {
                break;
            }
        }
        repair_empty(&data, &mut centroids, &mut labels, k);
        let inertia: f64 = data
            .iter()
            .zip(&labels)
            .map(|(x, &c)| dist2(x, &centroids[c]))
            .sum();
        let better = best.as_ref().map_or(true, |(b, _, _)| inertia < *b);
        if better {
            best = Some((inertia, labels, centroids));
        }
    }

    let (inertia, labels, centroids) = best.expect("at least one restart ran");
    let assignment = canonical_labels(&words, &labels, ClusterAlgo::Km, Some(inertia));
    // reorder centroids to the canonical ids
    let mut ordered = vec![Vec::new(); assignment.k];
    for (w, &raw) in words.iter().zip(&labels) {
        let id = assignment.labels[w];
        if ordered[id].is_empty() {
            ordered[id] = centroids[raw].clone();
        }
    }
    Ok(KmeansFit {
        assignment,
        centroids: ordered,
        inertia,
    })
}

/// Sorts points by word and promotes vectors to f64.
pub(crate) fn sort_points(points: &[(String, Vec<f32>)]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.cmp(&points[b].0));
    let words = order.iter().map(|&i| points[i].0.clone()).collect();
    let data = order
        .iter()
        .map(|&i| points[i].1.iter().map(|&v| v as f64).collect())
        .collect();
    (words, data)
}

fn count_distinct(data: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = data
        .iter()
        .map(|v| v.iter().map(|x| x.to_bits()).collect())
        .collect();
    keys.sort();
    keys.dedup();
    keys.len()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++: first centroid uniform, the rest weighted by squared distance
/// to the nearest centroid chosen so far.
fn seed_plus_plus(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(data[rng.gen_range(0..data.len())].clone());
    let mut d2: Vec<f64> = data.iter().map(|x| dist2(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = data.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        } else {
            // all remaining mass is zero (duplicate-heavy data); fall back
            // to an arbitrary point — distinctness was checked up front
            rng.gen_range(0..data.len())
        };
        centroids.push(data[chosen].clone());
        for (i, x) in data.iter().enumerate() {
            let d = dist2(x, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// Nearest-centroid assignment; ties go to the lower centroid index.
fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    data.iter()
        .map(|x| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, m) in centroids.iter().enumerate() {
                let d = dist2(x, m);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn means(data: &[Vec<f64>], labels: &[usize], old: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let dim = data[0].len();
    let mut sums = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in data.iter().zip(labels) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            // keep the old centroid; repair_empty deals with it
            sums[c] = old[c].clone();
        } else {
            for s in sums[c].iter_mut() {
                *s /= counts[c] as f64;
            }
        }
    }
    sums
}

/// Reseeds every empty cluster at the point farthest from its own centroid
/// (a point is eligible only if its cluster keeps another member), then
/// reassigns.
fn repair_empty(data: &[Vec<f64>], centroids: &mut [Vec<f64>], labels: &mut Vec<usize>, k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &c in labels.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, x) in data.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = dist2(x, &centroids[labels[i]]);
            if far.map_or(true, |(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        let (idx, _) = far.expect("a donor cluster with at least two members exists");
        centroids[empty] = data[idx].clone();
        *labels = assign(data, centroids);
    }
}
