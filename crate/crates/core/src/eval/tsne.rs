use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    pub coords: Vec<[f64; 2]>,
    /// Perplexity of each calibrated conditional distribution.
    pub perplexities: Vec<f64>,
    /// KL divergence right after early exaggeration ends.
    pub kl_after_exaggeration: Option<f64>,
    pub final_kl: f64,
    /// `(iteration, KL)` every 50 iterations and at the end.
    pub kl_history: Vec<(usize, f64)>,
}

impl TsneResult {
    pub fn to_tsv(&self) -> String {
        self.coords.iter().map(|[x, y]| format!("{x}\t{y}\n")).collect()
    }
}

fn sq_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let rows = parallel::map_range(n, |i| {
        (0..n)
            .map(|j| x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

/// Conditional distribution of row `i` at precision `beta` and its entropy in nats.
fn conditional(d: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let dmin = d
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    for (j, (o, &dj)) in out.iter_mut().zip(d).enumerate() {
        *o = if j == i { 0.0 } else { (-beta * (dj - dmin)).exp() };
        z += *o;
    }
    let mut weighted = 0.0;
    for (o, &dj) in out.iter_mut().zip(d) {
        *o /= z;
        weighted += *o * (dj - dmin);
    }
    z.ln() + beta * weighted
}

/// Bisects each row's precision until its entropy equals `ln(perplexity)`.
fn calibrate(d: &[f64], n: usize, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let target = perplexity.ln();
    let rows = parallel::map_range(n, |i| {
        let row = &d[i * n..(i + 1) * n];
        let mut p = vec![0.0; n];
        let (mut lo, mut hi, mut beta) = (0.0, f64::INFINITY, 1.0);
        let mut h = conditional(row, i, beta, &mut p);
        for _ in 0..200 {
            if (h - target).abs() < 1e-12 {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            h = conditional(row, i, beta, &mut p);
        }
        (p, h.exp())
    });
    let mut p = Vec::with_capacity(n * n);
    let mut perps = Vec::with_capacity(n);
    for (row, perp) in rows {
        p.extend(row);
        perps.push(perp);
    }
    (p, perps)
}

fn kl(p: &[f64], num: &[f64], z: f64) -> f64 {
    p.iter()
        .zip(num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &nij)| pij * (pij / (nij / z).max(1e-300)).ln())
        .sum()
}

/// Student-t kernel matrix of `y` (zero diagonal) and its sum.
fn kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let num = parallel::map_range(n, |i| {
        (0..n)
            .map(|j| {
                if i == j {
                    0.0
                } else {
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    1.0 / (1.0 + dx * dx + dy * dy)
                }
            })
            .collect::<Vec<f64>>()
    })
    .concat();
    let z = num.iter().sum();
    (num, z)
}

/// Exact t-SNE of `x` into two dimensions.
pub fn tsne_project(x: &[Vec<f64>], cfg: &TsneConfig) -> Result<TsneResult> {
    let n = x.len();
    if n < 5 {
        return Err(Error::param("t-SNE needs at least 5 points"));
    }
    if !(cfg.perplexity > 0.0 && cfg.perplexity < (n - 1) as f64 / 3.0) {
        return Err(Error::param(format!(
            "perplexity must lie in (0, {}) for {n} points",
            (n - 1) as f64 / 3.0
        )));
    }
    if cfg.iterations == 0 || cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(Error::param("iterations and learning_rate must be positive"));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::param("all points must have the same dimension"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-SNE input"));
    }

    let d = sq_distances(x);
    let (cond, perplexities) = calibrate(&d, n, cfg.perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(1e-12);
        }
        p[i * n + i] = 0.0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0; 2]; n];
    let mut kl_after_exaggeration = None;
    let mut kl_history = Vec::new();
    let mut final_kl = f64::NAN;

    for it in 0..cfg.iterations {
        let exaggerating = it < cfg.exaggeration_iters;
        let scale = if exaggerating { cfg.exaggeration } else { 1.0 };
        let momentum = if exaggerating {
            cfg.initial_momentum
        } else {
            cfg.final_momentum
        };
        let (num, z) = kernel(&y);
        let grad = parallel::map_range(n, |i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                let nij = num[i * n + j];
                let m = (scale * p[i * n + j] - nij / z) * nij;
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        });
        for i in 0..n {
            for c in 0..2 {
                gains[i][c] = if (grad[i][c] > 0.0) != (velocity[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8f64).max(0.01)
                };
                velocity[i][c] = momentum * velocity[i][c] - cfg.learning_rate * gains[i][c] * grad[i][c];
                y[i][c] += velocity[i][c];
            }
        }
        let mean = y.iter().fold([0.0; 2], |a, r| [a[0] + r[0], a[1] + r[1]]);
        for r in &mut y {
            r[0] -= mean[0] / n as f64;
            r[1] -= mean[1] / n as f64;
        }

        let last = it + 1 == cfg.iterations;
        let end_of_exaggeration = it + 1 == cfg.exaggeration_iters;
        if last || end_of_exaggeration || (it + 1) % 50 == 0 {
            let (num, z) = kernel(&y);
            let value = kl(&p, &num, z);
            kl_history.push((it + 1, value));
            if end_of_exaggeration {
                kl_after_exaggeration = Some(value);
            }
            if last {
                final_kl = value;
            }
        }
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-SNE coordinates"));
    }
    Ok(TsneResult {
        coords: y,
        perplexities,
        kl_after_exaggeration,
        final_kl,
        kl_history,
    })
}

/// Mean silhouette coefficient of a labelled point set.
pub fn silhouette_score<P: AsRef<[f64]> + Sync>(points: &[P], labels: &[usize]) -> Result<f64> {
    let n = points.len();
    if labels.len() != n || n < 2 {
        return Err(Error::param("need at least two labelled points"));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let dist = |a: usize, b: usize| -> f64 {
        points[a]
            .as_ref()
            .iter()
            .zip(points[b].as_ref())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let scores = parallel::map_range(n, |i| {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in (0..n).filter(|&j| j != i) {
            sums[labels[j]] += dist(i, j);
            counts[labels[j]] += 1;
        }
        let own = labels[i];
        if counts[own] == 0 {
            return 0.0;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            return 0.0;
        }
        (b - a) / a.max(b)
    });
    Ok(scores.iter().sum::<f64>() / n as f64)
}
