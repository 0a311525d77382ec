use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PairDataset;

/// Replaces the captions of `round(fraction * n)` uniformly chosen documents
/// with the caption of another uniformly chosen document (never their own).
///
/// Feature vectors and ground-truth tags stay attached to their image; only
/// the caption text and tokens move. Donors are drawn from the original
/// captions, so a replaced caption is never itself a replacement.
pub fn inject_caption_noise(ds: &PairDataset, fraction: f64, seed: u64) -> PairDataset {
    let n = ds.len();
    let fraction = fraction.clamp(0.0, 1.0);
    let replace = ((fraction * n as f64).round() as usize).min(n);
    let mut out = ds.clone();
    if replace == 0 || n < 2 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, n, replace).into_vec();
    chosen.sort_unstable();
    for target in chosen {
        // uniform over the n-1 other documents
        let mut donor = rng.random_range(0..n - 1);
        if donor >= target {
            donor += 1;
        }
        let src = &ds.documents[donor];
        out.documents[target].raw = src.raw.clone();
        out.documents[target].tokens = src.tokens.clone();
    }
    out
}
