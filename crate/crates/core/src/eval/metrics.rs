use crate::cis::SubpixelPoint;
use crate::error::{Error, Result};
use crate::synth::GroundTruth;

const MIN_CIRCLE_POINTS: usize = 8;

fn wrong_truth(expected: &str) -> Error {
    Error::InvalidParameter(format!("expected {expected} ground truth"))
}

/// Root mean square; `None` for an empty slice.
pub fn rms(residuals: &[f64]) -> Option<f64> {
    (!residuals.is_empty()).then(|| (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt())
}

/// `|mean distance to the true centre − true radius|`.
pub fn circle_radius_error(points: &[SubpixelPoint], truth: &GroundTruth) -> Result<f64> {
    let GroundTruth::Circle { cx, cy, radius } = *truth else { return Err(wrong_truth("circle")) };
    if points.len() < MIN_CIRCLE_POINTS {
        return Err(Error::TooFewPoints { got: points.len(), need: MIN_CIRCLE_POINTS });
    }
    let fitted = points.iter().map(|p| (p.x - cx).hypot(p.y - cy)).sum::<f64>() / points.len() as f64;
    Ok((fitted - radius).abs())
}

/// Signed row errors against a horizontal line edge.
pub fn line_residuals(points: &[SubpixelPoint], truth: &GroundTruth) -> Result<Vec<f64>> {
    let GroundTruth::Line { y } = *truth else { return Err(wrong_truth("line")) };
    Ok(points.iter().map(|p| p.y - y).collect())
}

pub fn line_rmse(points: &[SubpixelPoint], truth: &GroundTruth) -> Result<f64> {
    rms(&line_residuals(points, truth)?).ok_or(Error::TooFewPoints { got: 0, need: 1 })
}

/// Vertical error to the nearest boundary (nearest by perpendicular
/// distance), capped at half the vertical spacing between boundaries.
pub fn slant_residuals(points: &[SubpixelPoint], truth: &GroundTruth) -> Result<Vec<f64>> {
    let GroundTruth::Slant { lines } = truth else { return Err(wrong_truth("slant")) };
    if lines.is_empty() {
        return Err(Error::InvalidParameter("slant truth has no lines".into()));
    }
    let cap = if lines.len() > 1 { (lines[1].intercept - lines[0].intercept).abs() / 2.0 } else { f64::INFINITY };
    Ok(points
        .iter()
        .map(|p| {
            // Parallel lines: the perpendicular and vertical orderings agree.
            let r =
                lines.iter().map(|l| p.y - l.y_at(p.x)).min_by(|a, b| a.abs().total_cmp(&b.abs())).expect("non-empty");
            if r.abs() > cap {
                cap.copysign(r)
            } else {
                r
            }
        })
        .collect())
}

pub fn slant_rmse(points: &[SubpixelPoint], truth: &GroundTruth) -> Result<f64> {
    rms(&slant_residuals(points, truth)?).ok_or(Error::TooFewPoints { got: 0, need: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cis::Source;
    use crate::imaging::Axis;
    use crate::synth::{slant_lines, SlantLine};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn pt(x: f64, y: f64) -> SubpixelPoint {
        SubpixelPoint { x, y, source: Source::Cis, axis: Axis::Horizontal, clamped: false }
    }

    fn circle() -> GroundTruth {
        GroundTruth::Circle { cx: 110.0, cy: 110.0, radius: 80.0 }
    }

    fn on_circle(n: usize, mut r: impl FnMut(usize) -> f64) -> Vec<SubpixelPoint> {
        (0..n)
            .map(|i| {
                let a = i as f64 / n as f64 * std::f64::consts::TAU;
                pt(110.0 + r(i) * a.cos(), 110.0 + r(i) * a.sin())
            })
            .collect()
    }

    #[test]
    fn exact_and_shifted_circle() {
        assert!(circle_radius_error(&on_circle(64, |_| 80.0), &circle()).unwrap() < 1e-12);
        assert!((circle_radius_error(&on_circle(64, |_| 80.05), &circle()).unwrap() - 0.05).abs() < 1e-12);
        assert!(matches!(
            circle_radius_error(&on_circle(7, |_| 80.0), &circle()),
            Err(Error::TooFewPoints { got: 7, need: 8 })
        ));
    }

    #[test]
    fn radial_noise_error_is_small() {
        // The error is |mean radial noise| ~ |N(0, 0.1/√500)|, so 0.01 is a
        // 2.24σ bound: about 97.5% of draws fall inside it.
        let n = Normal::new(0.0, 0.1).unwrap();
        let trials = 400;
        let inside = (0..trials)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let noise: Vec<f64> = (0..500).map(|_| n.sample(&mut rng)).collect();
                circle_radius_error(&on_circle(500, |i| 80.0 + noise[i]), &circle()).unwrap() <= 0.01
            })
            .count();
        let frac = inside as f64 / trials as f64;
        assert!(frac > 0.95, "{frac}");
    }

    #[test]
    fn line_rmse_cases() {
        let t = GroundTruth::Line { y: 20.3 };
        assert_eq!(line_rmse(&[pt(1.0, 20.3), pt(2.0, 20.3)], &t).unwrap(), 0.0);
        let r = line_rmse(&[pt(1.0, 20.4), pt(2.0, 20.2)], &t).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
        assert!(line_rmse(&[], &t).is_err());
        assert!(line_rmse(&[pt(0.0, 0.0)], &circle()).is_err());
    }

    #[test]
    fn slant_rmse_cases() {
        let lines = slant_lines(2);
        let truth = GroundTruth::Slant { lines: lines.clone() };
        let mut pts: Vec<_> = (0..9).map(|i| pt(i as f64 * 3.0, lines[3].y_at(i as f64 * 3.0))).collect();
        assert!(slant_rmse(&pts, &truth).unwrap() < 1e-12);
        pts[4].y += 0.3;
        assert!((slant_rmse(&pts, &truth).unwrap() - 0.1).abs() < 1e-12);
        // Far from every line: counted at the cap.
        let lone = GroundTruth::Slant {
            lines: vec![SlantLine { slope: 1.0, intercept: 0.0 }, SlantLine { slope: 1.0, intercept: 10.0 }],
        };
        assert_eq!(slant_residuals(&[pt(0.0, 50.0)], &lone).unwrap(), vec![5.0]);
    }

    #[test]
    fn rotation_invariance_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = on_circle(40, |_| 80.0 + rng.random_range(-0.2..0.2));
        let rot = |a: f64| -> Vec<SubpixelPoint> {
            pts.iter()
                .map(|p| {
                    let (dx, dy) = (p.x - 110.0, p.y - 110.0);
                    pt(110.0 + dx * a.cos() - dy * a.sin(), 110.0 + dx * a.sin() + dy * a.cos())
                })
                .collect()
        };
        let e0 = circle_radius_error(&pts, &circle()).unwrap();
        assert!((circle_radius_error(&rot(1.1), &circle()).unwrap() - e0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn metrics_are_permutation_invariant(ys in prop::collection::vec(19.0f64..21.0, 8..40), rot in 0usize..40) {
            let t = GroundTruth::Line { y: 20.0 };
            let pts: Vec<_> = ys.iter().enumerate().map(|(i, &y)| pt(i as f64, y)).collect();
            let mut shuffled = pts.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            prop_assert!((line_rmse(&pts, &t).unwrap() - line_rmse(&shuffled, &t).unwrap()).abs() < 1e-12);
            let c: Vec<_> = ys.iter().enumerate().map(|(i, &r)| pt(110.0 + 4.0 * r * (i as f64).cos(), 110.0 + 4.0 * r * (i as f64).sin())).collect();
            let mut cs = c.clone();
            cs.reverse();
            prop_assert!((circle_radius_error(&c, &circle()).unwrap() - circle_radius_error(&cs, &circle()).unwrap()).abs() < 1e-9);
        }
    }
}
