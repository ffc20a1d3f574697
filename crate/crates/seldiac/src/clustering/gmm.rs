//! Spherical Gaussian mixtures fit by expectation-maximization.

use super::kmeans::{dist2, sort_points};
use super::{canonical_labels, kmeans, ClusterAlgo, ClusterAssignment, ClusterError};

/// Smallest variance a component may report; anything lower is floored and
/// counted as a degenerate event.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// A fitted spherical mixture. `log_likelihood` holds the total data
/// log-likelihood at each EM iteration (non-decreasing up to rounding).
/// `responsibilities` rows follow `words` order and each row sums to 1.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub assignment: ClusterAssignment,
    pub words: Vec<String>,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// One shared variance per component (spherical covariance).
    pub variances: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    pub responsibilities: Vec<Vec<f64>>,
    /// How many times a component's variance hit the floor.
    pub degenerate_events: usize,
}

/// Fits a `k`-component spherical Gaussian mixture by EM, initialized from
/// a single k-means run with the same seed. Labels are maximum-posterior.
pub fn gmm_em(
    points: &[(String, Vec<f32>)],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<GmmFit, ClusterError> {
    assert!(k >= 1, "k must be positive");
    let init = kmeans(points, k, 1, seed, 50, 1e-6)?;
    let (words, data) = sort_points(points);
    let n = data.len();
    let dim = data[0].len();

    // Parameters from the k-means partition.
    let mut means = init.centroids.clone();
    let mut weights = vec![0.0f64; k];
    let mut variances = vec![0.0f64; k];
    let mut counts = vec![0usize; k];
    let mut degenerate_events = 0usize;
    for (w, x) in words.iter().zip(&data) {
        let c = init.assignment.labels[w];
        counts[c] += 1;
        variances[c] += dist2(x, &means[c]);
    }
    for c in 0..k {
        weights[c] = counts[c] as f64 / n as f64;
        variances[c] /= (counts[c] as f64).max(1.0) * dim as f64;
        if variances[c] < VARIANCE_FLOOR {
            variances[c] = VARIANCE_FLOOR;
            degenerate_events += 1;
        }
    }

    let mut resp = vec![vec![0.0f64; k]; n];
    let mut log_likelihood: Vec<f64> = Vec::new();
    for _ in 0..max_iter {
        // E-step: responsibilities are the softmax of per-component
        // log w_c + log N(x | mu_c, sigma_c^2 I).
        let mut ll = 0.0f64;
        for (i, x) in data.iter().enumerate() {
            let mut logs = vec![0.0f64; k];
            for c in 0..k {
                logs[c] = weights[c].max(f64::MIN_POSITIVE).ln()
                    - 0.5 * dim as f64 * (2.0 * std::f64::consts::PI * variances[c]).ln()
                    - dist2(x, &means[c]) / (2.0 * variances[c]);
            }
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0f64;
            for c in 0..k {
                resp[i][c] = (logs[c] - max).exp();
                z += resp[i][c];
            }
            for c in 0..k {
                resp[i][c] /= z;
            }
            ll += max + z.ln();
        }
        let done = log_likelihood
            .last()
            .map_or(false, |&prev| (ll - prev).abs() < tol);
        log_likelihood.push(ll);
        if done {
            break;
        }

        // M-step.
        for c in 0..k {
            let mass: f64 = resp.iter().map(|r| r[c]).sum();
            weights[c] = mass / n as f64;
            let mut mean = vec![0.0f64; dim];
            for (r, x) in resp.iter().zip(&data) {
                for (m, v) in mean.iter_mut().zip(x) {
                    *m += r[c] * v;
                }
            }
            if mass > 0.0 {
                for m in mean.iter_mut() {
                    *m /= mass;
                }
                means[c] = mean;
                let ss: f64 = resp.iter().zip(&data).map(|(r, x)| r[c] * dist2(x, &means[c])).sum();
                variances[c] = ss / (mass * dim as f64);
            }
            if variances[c] < VARIANCE_FLOOR {
                variances[c] = VARIANCE_FLOOR;
                degenerate_events += 1;
            }
        }
    }

    // Maximum-posterior labels; ties to the lower component index.
    let raw: Vec<usize> = resp
        .iter()
        .map(|r| {
            let mut best = 0usize;
            for c in 1..k {
                if r[c] > r[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    let assignment = canonical_labels(
        &words,
        &raw,
        ClusterAlgo::Em,
        log_likelihood.last().copied(),
    );
    Ok(GmmFit {
        assignment,
        words,
        weights,
        means,
        variances,
        log_likelihood,
        responsibilities: resp,
        degenerate_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(&str, &[f32])]) -> Vec<(String, Vec<f32>)> {
        raw.iter().map(|&(w, v)| (w.to_string(), v.to_vec())).collect()
    }

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<(String, Vec<f32>)> {
        let mut state = seed.wrapping_mul(2685821657736338717).max(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 40) as f32 / (1u64 << 24) as f32 * 4.0 - 2.0
        };
        (0..n)
            .map(|i| (format!("w{i:03}"), (0..dim).map(|_| next()).collect()))
            .collect()
    }

    #[test]
    fn single_component_has_closed_form() {
        let points = pts(&[
            ("a", &[0.0, 0.0]),
            ("b", &[2.0, 0.0]),
            ("c", &[0.0, 2.0]),
            ("d", &[2.0, 2.0]),
        ]);
        let fit = gmm_em(&points, 1, 1, 100, 1e-10).unwrap();
        assert_eq!(fit.assignment.k, 1);
        assert!((fit.means[0][0] - 1.0).abs() < 1e-9);
        assert!((fit.means[0][1] - 1.0).abs() < 1e-9);
        // mean squared deviation per coordinate: each point is (±1, ±1)
        // from the mean, so sum = 8 over n*d = 8 slots
        assert!((fit.variances[0] - 1.0).abs() < 1e-9);
        assert!((fit.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_is_monotone() {
        for seed in 0..5u64 {
            let points = random_points(40, 3, seed + 1);
            let fit = gmm_em(&points, 3, seed, 200, 1e-9).unwrap();
            for w in fit.log_likelihood.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-8,
                    "log-likelihood dropped: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn responsibilities_sum_to_one() {
        let points = random_points(30, 2, 9);
        let fit = gmm_em(&points, 3, 4, 100, 1e-9).unwrap();
        for row in &fit.responsibilities {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn separated_blobs_match_kmeans_partition() {
        let points = pts(&[
            ("a1", &[0.0, 0.0]),
            ("a2", &[0.2, 0.1]),
            ("a3", &[0.1, 0.2]),
            ("b1", &[8.0, 8.0]),
            ("b2", &[8.2, 8.1]),
            ("b3", &[8.1, 8.2]),
        ]);
        let km = kmeans(&points, 2, 5, 1, 100, 1e-9).unwrap();
        let em = gmm_em(&points, 2, 1, 200, 1e-9).unwrap();
        assert_eq!(km.assignment.labels, em.assignment.labels);
    }

    #[test]
    fn collapsed_component_hits_the_floor() {
        // three identical points plus one outlier: the k-means init gives
        // the identical triple zero variance, which must be floored
        let points = pts(&[
            ("a", &[1.0, 1.0]),
            ("b", &[1.0, 1.0]),
            ("c", &[1.0, 1.0]),
            ("d", &[5.0, 5.0]),
        ]);
        let fit = gmm_em(&points, 2, 3, 50, 1e-9).unwrap();
        assert!(fit.degenerate_events > 0);
        assert!(fit.variances.iter().all(|&v| v >= VARIANCE_FLOOR));
        assert!(fit.log_likelihood.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn permutation_changes_only_numbering() {
        let points = random_points(24, 2, 42);
        let mut shuffled = points.clone();
        shuffled.reverse();
        shuffled.swap(0, 5);
        let a = gmm_em(&points, 3, 7, 100, 1e-9).unwrap();
        let b = gmm_em(&shuffled, 3, 7, 100, 1e-9).unwrap();
        assert_eq!(a.assignment, b.assignment);
    }
}
