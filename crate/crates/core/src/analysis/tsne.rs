//! Exact t-SNE.
//!
//! Per-point Gaussian bandwidths are found by bisection on the entropy of the
//! conditional distribution; the embedding follows gradient descent on the KL
//! divergence with momentum, per-coordinate adaptive gains and early
//! exaggeration. Cost is O(n²) per iteration, which is fine for the ≤ 800
//! signals of one generation.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

const ENTROPY_TOLERANCE: f64 = 1e-5;
const BISECTION_STEPS: usize = 50;
const MIN_PROB: f64 = 1e-12;
const MIN_GAIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and initial momentum.
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Standard deviation of the Gaussian initialization.
    pub init_stddev: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            init_stddev: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Vec<[f64; 2]>,
    /// `(iteration, KL divergence)` sampled after the exaggeration phase.
    pub kl_history: Vec<(usize, f64)>,
}

impl Embedding {
    /// KL divergence recorded at exactly `iteration`, if sampled.
    pub fn kl_at(&self, iteration: usize) -> Option<f64> {
        self.kl_history.iter().find(|(i, _)| *i == iteration).map(|&(_, kl)| kl)
    }
}

fn squared_distances<P: AsRef<[f64]>>(points: &[P]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = points[i].as_ref().iter().zip(points[j].as_ref()).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Row `i` of the conditional affinities, with bandwidth tuned so the
/// distribution's perplexity matches the target.
fn conditional_row(dist: &[f64], i: usize, log_perplexity: f64, row: &mut [f64]) {
    let n = row.len();
    let mut beta = 1.0;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let min_d = (0..n).filter(|&j| j != i).map(|j| dist[j]).fold(f64::INFINITY, f64::min);
    for _ in 0..BISECTION_STEPS {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            if j == i {
                row[j] = 0.0;
                continue;
            }
            // shifting by the nearest distance leaves the normalized row unchanged
            let p = (-(dist[j] - min_d) * beta).exp();
            row[j] = p;
            sum += p;
            weighted += (dist[j] - min_d) * p;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        let diff = entropy - log_perplexity;
        if diff.abs() < ENTROPY_TOLERANCE {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_infinite() { beta * 2.0 } else { (beta + hi) / 2.0 };
        } else {
            hi = beta;
            beta = if lo.is_infinite() { beta / 2.0 } else { (beta + lo) / 2.0 };
        }
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
}

/// Symmetrized joint affinities `P`, row-major `n × n`, summing to 1.
pub fn joint_affinities<P: AsRef<[f64]>>(points: &[P], perplexity: f64) -> Vec<f64> {
    let n = points.len();
    let dist = squared_distances(points);
    let mut cond = vec![0.0; n * n];
    let log_perplexity = perplexity.ln();
    for i in 0..n {
        conditional_row(&dist[i * n..(i + 1) * n], i, log_perplexity, &mut cond[i * n..(i + 1) * n]);
    }
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(MIN_PROB);
        }
    }
    p
}

/// Student-t kernel `1/(1+‖yᵢ−yⱼ‖²)` and its off-diagonal sum.
fn low_dim_kernel(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let n = y.len();
    let mut total = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            total += 2.0 * v;
        }
    }
    total
}

/// KL(P‖Q) of an embedding against joint affinities `p`.
pub fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let total = low_dim_kernel(y, &mut num);
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = (num[i * n + j] / total).max(MIN_PROB);
                let pij = p[i * n + j];
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

pub fn tsne_embed<P: AsRef<[f64]>>(points: &[P], cfg: &TsneConfig, seed: u64) -> Result<Embedding> {
    let n = points.len();
    if cfg.perplexity <= 1.0 {
        return Err(Error::Argument(format!("perplexity must exceed 1, got {}", cfg.perplexity)));
    }
    if (n as f64) <= 3.0 * cfg.perplexity {
        return Err(Error::Argument(format!(
            "t-SNE needs more than 3 × perplexity = {} points, got {n}",
            3.0 * cfg.perplexity
        )));
    }

    let init = Normal::new(0.0, cfg.init_stddev)
        .map_err(|e| Error::Argument(format!("invalid init_stddev: {e}")))?;
    let mut rng = stream(seed, Stream::Embedding);
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();

    let first = points[0].as_ref();
    if points.iter().all(|p| p.as_ref() == first) {
        return Ok(Embedding { points: y, kl_history: Vec::new() });
    }

    let p = joint_affinities(points, cfg.perplexity);
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0_f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut grad = vec![[0.0; 2]; n];
    let mut kl_history = Vec::new();

    for iter in 0..cfg.iterations {
        let exaggeration = if iter < cfg.exaggeration_iterations { cfg.early_exaggeration } else { 1.0 };
        let momentum = if iter < cfg.exaggeration_iterations { cfg.initial_momentum } else { cfg.final_momentum };

        let total = low_dim_kernel(&y, &mut num);
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = num[i * n + j];
                let q = (k / total).max(MIN_PROB);
                let coeff = (exaggeration * p[i * n + j] - q) * k;
                g[0] += coeff * (y[i][0] - y[j][0]);
                g[1] += coeff * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * g[0], 4.0 * g[1]];
        }

        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (velocity[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                gains[i][d] = gains[i][d].max(MIN_GAIN);
                velocity[i][d] = momentum * velocity[i][d] - cfg.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        }
        let centre = y.iter().fold([0.0; 2], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        let centre = [centre[0] / n as f64, centre[1] / n as f64];
        y.iter_mut().for_each(|v| {
            v[0] -= centre[0];
            v[1] -= centre[1];
        });

        let done = iter + 1;
        if done >= cfg.exaggeration_iterations && (done % 50 == 0 || done == cfg.iterations) {
            kl_history.push((done, kl_divergence(&p, &y)));
        }
    }
    Ok(Embedding { points: y, kl_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::silhouette_score;

    fn blobs(seed: u64, per_blob: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = stream(seed, Stream::Aux(0));
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        // centroids 0 and (10/3)·1, i.e. 10 apart in 9-d
        for blob in 0..2u8 {
            let centre = f64::from(blob) * 10.0 / 3.0;
            for _ in 0..per_blob {
                pts.push((0..9).map(|_| centre + noise.sample(&mut rng)).collect());
                labels.push(blob);
            }
        }
        (pts, labels)
    }

    #[test]
    fn perplexity_is_matched() {
        let (pts, _) = blobs(1, 40);
        let n = pts.len();
        let dist = squared_distances(&pts);
        let mut row = vec![0.0; n];
        for i in [0, 17, 55] {
            conditional_row(&dist[i * n..(i + 1) * n], i, 10f64.ln(), &mut row);
            let entropy: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
            assert!((entropy.exp() - 10.0).abs() < 1e-3, "perplexity {}", entropy.exp());
        }
    }

    #[test]
    fn rejects_too_few_points() {
        let pts = vec![vec![0.0, 1.0]; 20];
        assert!(tsne_embed(&pts, &TsneConfig::default(), 0).is_err());
        let cfg = TsneConfig { perplexity: 1.0, ..TsneConfig::default() };
        assert!(tsne_embed(&pts, &cfg, 0).is_err());
    }

    #[test]
    fn identical_points_return_initialization() {
        let pts = vec![vec![0.3; 9]; 40];
        let cfg = TsneConfig { perplexity: 5.0, ..TsneConfig::default() };
        let e = tsne_embed(&pts, &cfg, 4).unwrap();
        assert_eq!(e.points.len(), 40);
        assert!(e.points.iter().all(|p| p[0].abs() < 1e-3 && p[1].abs() < 1e-3));
        assert!(e.kl_history.is_empty());
    }

    #[test]
    fn blobs_stay_separated() {
        let (pts, labels) = blobs(2, 100);
        let cfg = TsneConfig { perplexity: 50.0, ..TsneConfig::default() };
        let e = tsne_embed(&pts, &cfg, 9).unwrap();
        assert_eq!(e.points.len(), pts.len());
        let s = silhouette_score(&e.points, &labels).unwrap();
        assert!(s > 0.9, "embedded silhouette {s}");
    }
}
