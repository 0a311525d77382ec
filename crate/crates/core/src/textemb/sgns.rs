//! Negative-sampling kernel shared by the CBOW, PV-DM and skip-gram trainers.

use num_traits::Float;
use rand::Rng;

/// Noise distribution proportional to `count^0.75`.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x);
        i.min(self.cumulative.len() - 1) as u32
    }

    /// The positive target followed by `negatives` noise words distinct from it.
    pub fn targets<R: Rng>(&self, rng: &mut R, positive: u32, negatives: usize) -> Vec<(u32, bool)> {
        let mut out = Vec::with_capacity(negatives + 1);
        out.push((positive, true));
        for _ in 0..negatives {
            let w = self.sample(rng);
            if w != positive {
                out.push((w, false));
            }
        }
        out
    }
}

pub fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `-ln(sigmoid(x))` without overflow.
pub fn neg_log_sigmoid<T: Float>(x: T) -> T {
    if x > T::zero() {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Loss and gradients of one negative-sampling example.
///
/// `loss = -sum_j ln sigmoid(s_j * <h, u_j>)` with `s_j = +1` for the
/// positive target and `-1` for noise words. The gradient with respect to
/// output row `u_j` is `coeffs[j] * h`.
#[derive(Debug, Clone)]
pub struct NsGradient<T> {
    pub loss: T,
    pub hidden: Vec<T>,
    pub coeffs: Vec<T>,
}

pub fn ns_gradient<T: Float>(hidden: &[T], outputs: &[T], targets: &[(u32, bool)]) -> NsGradient<T> {
    let dim = hidden.len();
    let mut grad_h = vec![T::zero(); dim];
    let mut coeffs = Vec::with_capacity(targets.len());
    let mut loss = T::zero();
    for &(w, label) in targets {
        let row = &outputs[w as usize * dim..(w as usize + 1) * dim];
        let dot = hidden.iter().zip(row).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        let (sign, target) = if label {
            (T::one(), T::one())
        } else {
            (-T::one(), T::zero())
        };
        loss = loss + neg_log_sigmoid(sign * dot);
        let g = sigmoid(dot) - target;
        for (gh, &u) in grad_h.iter_mut().zip(row) {
            *gh = *gh + g * u;
        }
        coeffs.push(g);
    }
    NsGradient {
        loss,
        hidden: grad_h,
        coeffs,
    }
}

/// Descends the output rows along their gradient: `u_j -= lr * coeffs[j] * h`.
pub fn update_outputs<T: Float>(outputs: &mut [T], hidden: &[T], targets: &[(u32, bool)], coeffs: &[T], lr: T) {
    let dim = hidden.len();
    for (&(w, _), &g) in targets.iter().zip(coeffs) {
        let row = &mut outputs[w as usize * dim..(w as usize + 1) * dim];
        let step = lr * g;
        for (u, &h) in row.iter_mut().zip(hidden) {
            *u = *u - step * h;
        }
    }
}

/// Adds `scale * delta` to row `idx` of a row-major table.
pub fn axpy_row<T: Float>(table: &mut [T], dim: usize, idx: usize, scale: T, delta: &[T]) {
    for (x, &d) in table[idx * dim..(idx + 1) * dim].iter_mut().zip(delta) {
        *x = *x + scale * d;
    }
}

/// Mean of the given rows of a row-major table.
pub fn mean_rows<T: Float>(table: &[T], dim: usize, rows: impl IntoIterator<Item = usize>) -> Vec<T> {
    let mut out = vec![T::zero(); dim];
    let mut n = 0usize;
    for r in rows {
        for (o, &x) in out.iter_mut().zip(&table[r * dim..(r + 1) * dim]) {
            *o = *o + x;
        }
        n += 1;
    }
    if n > 0 {
        let inv = T::one() / T::from(n).unwrap();
        out.iter_mut().for_each(|o| *o = *o * inv);
    }
    out
}

/// `n` values drawn uniformly from `[-half_width, half_width)`.
pub fn init_uniform<R: Rng>(rng: &mut R, n: usize, half_width: f32) -> Vec<f32> {
    (0..n).map(|_| (rng.random::<f32>() * 2.0 - 1.0) * half_width).collect()
}

/// Linearly decayed learning rate, reaching `initial / 100` at the end.
pub fn decayed_lr(initial: f64, processed: usize, total: usize) -> f64 {
    let progress = if total == 0 {
        0.0
    } else {
        processed as f64 / total as f64
    };
    initial * (1.0 - 0.99 * progress.min(1.0))
}

/// Word2vec-style frequent-word subsampling keep probability.
pub fn keep_probability(count: u64, total: u64, threshold: f64) -> f64 {
    let f = count as f64 / total as f64;
    ((f / threshold).sqrt() + 1.0) * (threshold / f)
}
