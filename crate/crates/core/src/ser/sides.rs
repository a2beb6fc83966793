use super::{Ser, Spread};
use crate::error::{Error, Result};

/// Grid for the anchored mean, fine enough to be invisible but coarse enough
/// that subtracting an integer `D_0` is exact.
const SNAP: f64 = 4_294_967_296.0;

/// Region-wide side intensities; `g_a` is the bright side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerSides {
    pub g_a: f64,
    pub g_b: f64,
    /// Most frequent bright−dark difference.
    pub d0: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64], m: f64) -> f64 {
    v.iter().map(|g| (g - m) * (g - m)).sum::<f64>() / v.len() as f64
}

/// Rounded difference of each pair, counted over all `|a|·|b|` pairs.
///
/// With `b` sorted, `round(x − b_j)` is non-increasing in `j`, so each
/// difference value owns a contiguous run of `b` found by bisection.
fn difference_counts(a: &[f64], b: &[f64]) -> (i64, Vec<u64>) {
    let mut b = b.to_vec();
    b.sort_by(f64::total_cmp);
    let (a_lo, a_hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let k_min = (a_lo - b[b.len() - 1]).round() as i64;
    let k_max = (a_hi - b[0]).round() as i64;
    let mut counts = vec![0u64; (k_max - k_min + 1) as usize];
    for &x in a {
        let hi = (x - b[0]).round() as i64;
        let lo = (x - b[b.len() - 1]).round() as i64;
        let mut start = 0;
        for k in (lo..=hi).rev() {
            let end = start + b[start..].partition_point(|&y| (x - y).round() as i64 >= k);
            counts[(k - k_min) as usize] += (end - start) as u64;
            start = end;
        }
    }
    (k_min, counts)
}

/// Mode of the rounded pairwise differences `a_i − b_j`. Ties go to the
/// smaller magnitude (then the positive value).
fn difference_mode(a: &[f64], b: &[f64]) -> f64 {
    let (k_min, counts) = difference_counts(a, b);
    let (d, _) = counts
        .iter()
        .enumerate()
        .map(|(i, &n)| (k_min + i as i64, n))
        .max_by(|(d1, n1), (d2, n2)| n1.cmp(n2).then(d2.abs().cmp(&d1.abs())).then(d1.cmp(d2)))
        .expect("both groups are non-empty");
    d as f64
}

/// Robust bright/dark side estimate from a pixel population.
///
/// Pixels farther than one spread from the mean split into a bright and a
/// dark group. The side difference is the most frequent pairwise difference;
/// the tighter group supplies its own mean and the other side follows from
/// the difference, so `g_a − g_b == d0` holds exactly.
pub fn estimate_sides_from_pixels(pixels: &[f64], spread: Spread) -> Result<SerSides> {
    if pixels.is_empty() {
        return Err(Error::EmptySideGroup);
    }
    let m0 = mean(pixels);
    let var0 = variance(pixels, m0);
    let v0 = match spread {
        Spread::StdDev => var0.sqrt(),
        Spread::Variance => var0,
    };
    let bright: Vec<f64> = pixels.iter().copied().filter(|&g| g > m0 + v0).collect();
    let dark: Vec<f64> = pixels.iter().copied().filter(|&g| g < m0 - v0).collect();
    if bright.is_empty() || dark.is_empty() {
        return Err(Error::EmptySideGroup);
    }
    let d0 = difference_mode(&bright, &dark);
    if d0 <= 0.0 {
        return Err(Error::NoContrast);
    }
    let (ma, mb) = (mean(&bright), mean(&dark));
    let snap = |v: f64| (v * SNAP).round() / SNAP;
    let (g_a, g_b) = if variance(&bright, ma) < variance(&dark, mb) {
        let g_a = snap(ma);
        (g_a, g_a - d0)
    } else {
        let g_b = snap(mb);
        (g_b + d0, g_b)
    };
    Ok(SerSides { g_a, g_b, d0 })
}

/// Robust sides over all pixels of a region.
pub fn estimate_ser_sides(ser: &Ser, spread: Spread) -> Result<SerSides> {
    estimate_sides_from_pixels(&ser.pixel_values(), spread)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn two_level(members: usize, noise: f64, seed: u64) -> Vec<f64> {
        let profile = [200.0, 200.0, 200.0, 200.0, 125.0, 50.0, 50.0, 50.0, 50.0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
        (0..members)
            .flat_map(|_| profile.iter().copied().collect::<Vec<_>>())
            .map(|g| if noise > 0.0 { g + n.sample(&mut rng) } else { g })
            .collect()
    }

    #[test]
    fn noiseless_two_levels() {
        let s = estimate_sides_from_pixels(&two_level(20, 0.0, 0), Spread::StdDev).unwrap();
        assert_eq!((s.g_a, s.g_b, s.d0), (200.0, 50.0, 150.0));
    }

    #[test]
    fn noisy_two_levels_within_tolerance() {
        for seed in 0..100 {
            let s = estimate_sides_from_pixels(&two_level(100, 2.0, seed), Spread::StdDev).unwrap();
            assert!((s.g_a - 200.0).abs() <= 1.0, "seed {seed}: {s:?}");
            assert!((s.g_b - 50.0).abs() <= 1.0, "seed {seed}: {s:?}");
            assert!((s.d0 - 150.0).abs() <= 2.0);
            assert_eq!(s.g_a - s.g_b, s.d0);
        }
    }

    #[test]
    fn flat_population_has_no_groups() {
        assert!(matches!(estimate_sides_from_pixels(&[128.0; 49], Spread::StdDev), Err(Error::EmptySideGroup)));
    }

    #[test]
    fn mode_tie_prefers_smaller_difference() {
        assert_eq!(difference_mode(&[10.0, 20.0], &[0.0]), 10.0);
        assert_eq!(difference_mode(&[150.2, 150.9], &[0.0]), 150.0);
    }

    #[test]
    fn variance_split_is_wider() {
        // With variance as the spread, gray-level populations leave both
        // groups empty.
        assert!(estimate_sides_from_pixels(&two_level(5, 0.0, 0), Spread::Variance).is_err());
    }

    #[test]
    fn large_groups_use_every_pair() {
        let a: Vec<f64> = (0..1500).map(|i| 200.0 + (i % 3) as f64).collect();
        let b: Vec<f64> = (0..1500).map(|i| 50.0 + (i % 2) as f64).collect();
        let (k_min, counts) = difference_counts(&a, &b);
        assert_eq!(k_min, 149);
        assert_eq!(counts.iter().sum::<u64>(), 1500 * 1500);
        assert_eq!(difference_mode(&a, &b), 150.0);
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(
            a in proptest::collection::vec(-50.0f64..300.0, 1..40),
            b in proptest::collection::vec(-50.0f64..300.0, 1..40),
        ) {
            let (k_min, counts) = difference_counts(&a, &b);
            let mut brute = vec![0u64; counts.len()];
            for x in &a {
                for y in &b {
                    brute[((x - y).round() as i64 - k_min) as usize] += 1;
                }
            }
            prop_assert_eq!(counts, brute);
        }

        #[test]
        fn difference_identity_is_exact(
            hi in 120.0f64..250.0, lo in 0.0f64..100.0, sigma in 0.0f64..5.0, seed in any::<u64>()
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = Normal::new(0.0, sigma + 1e-9).unwrap();
            let px: Vec<f64> = (0..200)
                .map(|i| if i % 2 == 0 { hi } else { lo } + n.sample(&mut rng))
                .collect();
            let s = estimate_sides_from_pixels(&px, Spread::StdDev).unwrap();
            prop_assert_eq!(s.g_a - s.g_b, s.d0);
            prop_assert!(s.g_a > s.g_b);
        }
    }
}
