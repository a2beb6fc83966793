//! Brute-force least-squares fit of a unit-interval-integrated erf edge.
//! Slow and only meant as a reference for checking the closed form.

use statrs::function::erf::erf;

use crate::error::{Error, Result};

const MIN_LEN: usize = 5;
const COARSE_LOC: f64 = 0.05;
const FINE_LOC: f64 = 1e-3;
const SCALE_STEP: f64 = 0.05;
const SCALE_MAX: f64 = 3.0;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErfFit {
    /// Edge location in 1-based sequence coordinates.
    pub location: f64,
    pub scale: f64,
    /// Side level far before / after the location.
    pub low_side: f64,
    pub high_side: f64,
    pub sse: f64,
}

/// Antiderivative of `erf`.
fn erf_antiderivative(u: f64) -> f64 {
    u * erf(u) + (-u * u).exp() / std::f64::consts::PI.sqrt()
}

/// Mean over pixel `i` of the unit step `(1 + erf((t − μ)/(√2 s)))/2`.
fn basis(i: f64, mu: f64, s: f64) -> f64 {
    let k = std::f64::consts::SQRT_2 * s;
    let (u0, u1) = ((i - 0.5 - mu) / k, (i + 0.5 - mu) / k);
    if u0 > 6.0 {
        return 1.0;
    }
    if u1 < -6.0 {
        return 0.0;
    }
    0.5 + 0.5 * k * (erf_antiderivative(u1) - erf_antiderivative(u0))
}

/// Best sides and residual for a fixed location and scale.
fn solve_sides(y: &[f64], mu: f64, s: f64) -> (f64, f64, f64) {
    let e: Vec<f64> = (1..=y.len()).map(|i| basis(i as f64, mu, s)).collect();
    let n = y.len() as f64;
    let (se, sy) = (e.iter().sum::<f64>(), y.iter().sum::<f64>());
    let see: f64 = e.iter().map(|v| v * v).sum();
    let sey: f64 = e.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * see - se * se;
    let (alpha, beta) =
        if det.abs() < 1e-12 { (sy / n, 0.0) } else { ((see * sy - se * sey) / det, (n * sey - se * sy) / det) };
    let sse = e.iter().zip(y).map(|(ei, yi)| (alpha + beta * ei - yi).powi(2)).sum();
    (alpha, alpha + beta, sse)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid search over location and scale, a fine location grid at the best
/// scales, then alternating golden-section refinement.
pub fn erf_fit(profile: &[f64]) -> Result<ErfFit> {
    if profile.len() < MIN_LEN {
        return Err(Error::TooFewPoints { got: profile.len(), need: MIN_LEN });
    }
    let (lo, hi) = profile.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi - lo > 1e-9) {
        return Err(Error::DegenerateProfile);
    }
    let n = profile.len() as f64;
    let sse = |mu: f64, s: f64| solve_sides(profile, mu, s).2;
    let scales: Vec<f64> = (1..=(SCALE_MAX / SCALE_STEP).round() as usize).map(|k| k as f64 * SCALE_STEP).collect();

    let locs = |from: f64, to: f64, step: f64| {
        let count = ((to - from) / step).round() as usize;
        (0..=count).map(move |k| from + k as f64 * step)
    };
    let mut best = (f64::INFINITY, 0.0, 0usize);
    for mu in locs(0.5, n + 0.5, COARSE_LOC) {
        for (si, &s) in scales.iter().enumerate() {
            let v = sse(mu, s);
            if v < best.0 {
                best = (v, mu, si);
            }
        }
    }
    let (_, coarse_mu, coarse_si) = best;
    for si in coarse_si.saturating_sub(2)..(coarse_si + 3).min(scales.len()) {
        for mu in locs(coarse_mu - COARSE_LOC, coarse_mu + COARSE_LOC, FINE_LOC) {
            let v = sse(mu, scales[si]);
            if v < best.0 {
                best = (v, mu, si);
            }
        }
    }
    let (mut mu, mut s) = (best.1, scales[best.2]);
    for _ in 0..4 {
        mu = golden_min(|m| sse(m, s), mu - FINE_LOC, mu + FINE_LOC, 1e-7);
        s = golden_min(|v| sse(mu, v), (s - SCALE_STEP).max(1e-3), s + SCALE_STEP, 1e-6);
    }
    let (low_side, high_side, sse) = solve_sides(profile, mu, s);
    Ok(ErfFit { location: mu, scale: s, low_side, high_side, sse })
}

/// Fitted edge location only.
pub fn erf_fit_oracle(profile: &[f64]) -> Result<f64> {
    erf_fit(profile).map(|f| f.location)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::integrate;

    fn sampled(n: usize, mu: f64, s: f64) -> Vec<f64> {
        (1..=n)
            .map(|i| {
                let c = i as f64;
                integrate(
                    &|t| 200.0 - 75.0 * (1.0 + erf((t - mu) / (std::f64::consts::SQRT_2 * s))),
                    c - 0.5,
                    c + 0.5,
                    1e-10,
                )
            })
            .collect()
    }

    #[test]
    fn recovers_own_model() {
        let fit = erf_fit(&sampled(9, 4.3, 1.2)).unwrap();
        assert!((fit.location - 4.3).abs() <= 1e-3, "{fit:?}");
        assert!((fit.scale - 1.2).abs() < 1e-2);
        assert!((fit.low_side - 200.0).abs() < 0.1 && (fit.high_side - 50.0).abs() < 0.1);
    }

    #[test]
    fn pure_step() {
        // Two full pixels on each side pin the location; with a single
        // bright pixel any location in [0.5, 1.5] fits exactly.
        for (y, want) in
            [(&[200.0, 200.0, 50.0, 50.0, 50.0][..], 2.5), (&[50.0, 50.0, 50.0, 50.0, 200.0, 200.0, 200.0][..], 4.5)]
        {
            let fit = erf_fit(y).unwrap();
            assert!((fit.location - want).abs() <= 1e-3, "{fit:?}");
        }
    }

    #[test]
    fn flat_and_short_profiles() {
        assert!(matches!(erf_fit(&[7.0; 9]), Err(Error::DegenerateProfile)));
        assert!(matches!(erf_fit(&[1.0, 2.0, 3.0]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn basis_is_a_pixel_mean() {
        for (mu, s) in [(3.2, 0.7), (5.0, 2.0)] {
            for i in 1..8 {
                let c = i as f64;
                let num = integrate(
                    &|t| 0.5 * (1.0 + erf((t - mu) / (std::f64::consts::SQRT_2 * s))),
                    c - 0.5,
                    c + 0.5,
                    1e-12,
                );
                assert!((basis(c, mu, s) - num).abs() < 1e-9);
            }
        }
    }
}
