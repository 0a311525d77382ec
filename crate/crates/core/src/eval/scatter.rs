use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel;
use crate::retrieval::cosine_similarity;

/// Distances of one sampled item pair, each min-max normalised over the sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    pub a: usize,
    pub b: usize,
    pub text: f64,
    pub image: f64,
    pub shared_tags: usize,
}

/// Image pair distance regressed on text pair distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterAnalysis {
    pub pairs: Vec<PairDistance>,
    pub r_squared: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl ScatterAnalysis {
    /// Normalises raw `(text, image)` distances and fits the regression.
    pub fn from_raw(mut pairs: Vec<PairDistance>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Evaluation("at least two pairs are needed".into()));
        }
        min_max(pairs.iter_mut().map(|p| &mut p.text));
        min_max(pairs.iter_mut().map(|p| &mut p.image));
        let xs: Vec<f64> = pairs.iter().map(|p| p.text).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.image).collect();
        let (slope, intercept, r2) = fit(&xs, &ys)?;
        Ok(Self {
            pairs,
            r_squared: r2,
            slope,
            intercept,
        })
    }

    /// Pair counts sharing 0, 1, 2, 3 and more than 3 tags.
    pub fn band_counts(&self) -> [usize; 5] {
        let mut bands = [0; 5];
        for p in &self.pairs {
            bands[p.shared_tags.min(4)] += 1;
        }
        bands
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("analysis serializes")
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("text_distance\timage_distance\tshared_tags\n");
        for p in &self.pairs {
            out.push_str(&format!("{}\t{}\t{}\n", p.text, p.image, p.shared_tags));
        }
        out
    }
}

fn min_max<'a>(values: impl Iterator<Item = &'a mut f64>) {
    let values: Vec<&mut f64> = values.collect();
    let lo = values.iter().map(|v| **v).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| **v).fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in values {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
}

fn fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Evaluation("distances are constant, R^2 is undefined".into()));
    }
    let slope = sxy / sxx;
    let r2 = (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0);
    Ok((slope, my - slope * mx, r2))
}

/// Coefficient of determination of the least-squares line of `ys` on `xs`.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Evaluation(
            "need two equally long samples of at least two values".into(),
        ));
    }
    Ok(fit(xs, ys)?.2)
}

/// Samples `pairs` random item pairs and relates their cosine distances in
/// the text space to those in the image space.
pub fn distance_correlation(
    pairs: usize,
    text: &[Vec<f64>],
    image: &[Vec<f64>],
    tags: &[BTreeSet<String>],
    seed: u64,
) -> Result<ScatterAnalysis> {
    let n = text.len();
    if image.len() != n || tags.len() != n {
        return Err(Error::CountMismatch {
            ids: n,
            vectors: image.len().min(tags.len()),
        });
    }
    if n < 2 {
        return Err(Error::Evaluation("need at least two items".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<(usize, usize)> = (0..pairs)
        .map(|_| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n - 1);
            (a, if b >= a { b + 1 } else { b })
        })
        .collect();
    let raw = parallel::map(&sampled, |&(a, b)| -> Result<PairDistance> {
        Ok(PairDistance {
            a,
            b,
            text: 1.0 - cosine_similarity(&text[a], &text[b])?,
            image: 1.0 - cosine_similarity(&image[a], &image[b])?,
            shared_tags: tags[a].intersection(&tags[b]).count(),
        })
    });
    ScatterAnalysis::from_raw(raw.into_iter().collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn random_vectors(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    fn pair(text: f64, image: f64) -> PairDistance {
        PairDistance {
            a: 0,
            b: 1,
            text,
            image,
            shared_tags: 0,
        }
    }

    #[test]
    fn hand_pairs_on_a_line() {
        let s = ScatterAnalysis::from_raw(vec![pair(0.0, 0.0), pair(0.5, 0.5), pair(1.0, 1.0)]).unwrap();
        assert!((s.r_squared - 1.0).abs() < 1e-12);
        assert!((s.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn columns_are_min_max_normalized() {
        let s = ScatterAnalysis::from_raw(vec![pair(0.2, 1.0), pair(0.6, 0.0), pair(1.0, 1.5)]).unwrap();
        let t: Vec<f64> = s.pairs.iter().map(|p| p.text).collect();
        let i: Vec<f64> = s.pairs.iter().map(|p| p.image).collect();
        for (got, want) in t.iter().chain(&i).zip([0.0, 0.5, 1.0, 1.0 / 1.5, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn identical_spaces_give_unit_r2() {
        let v = random_vectors(50, 8, 1);
        let tags = vec![BTreeSet::new(); 50];
        let s = distance_correlation(2000, &v, &v, &tags, 4).unwrap();
        assert!((s.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn independent_spaces_give_small_r2() {
        let t = random_vectors(300, 8, 1);
        let i = random_vectors(300, 8, 2);
        let tags = vec![BTreeSet::new(); 300];
        let s = distance_correlation(20_000, &t, &i, &tags, 4).unwrap();
        assert!(s.r_squared < 0.05, "{}", s.r_squared);
    }

    #[test]
    fn deterministic_and_symmetric() {
        let t = random_vectors(30, 4, 1);
        let i = random_vectors(30, 4, 2);
        let tags: Vec<BTreeSet<String>> = (0..30).map(|k| [format!("t{}", k % 3), "all".into()].into()).collect();
        let a = distance_correlation(500, &t, &i, &tags, 9).unwrap();
        assert_eq!(a, distance_correlation(500, &t, &i, &tags, 9).unwrap());
        let raw_swapped: Vec<PairDistance> = a
            .pairs
            .iter()
            .map(|p| PairDistance {
                a: p.b,
                b: p.a,
                text: 1.0 - cosine_similarity(&t[p.b], &t[p.a]).unwrap(),
                image: 1.0 - cosine_similarity(&i[p.b], &i[p.a]).unwrap(),
                shared_tags: p.shared_tags,
            })
            .collect();
        let b = ScatterAnalysis::from_raw(raw_swapped).unwrap();
        assert!((a.r_squared - b.r_squared).abs() < 1e-12);
        let bands = a.band_counts();
        assert_eq!(bands[0], 0);
        assert_eq!(bands.iter().sum::<usize>(), 500);
        assert!(a.to_tsv().lines().count() == 501);
    }

    #[test]
    fn errors() {
        let v = vec![vec![1.0, 0.0]];
        assert!(distance_correlation(10, &v, &v, &[BTreeSet::new()], 1).is_err());
        assert!(r_squared(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
