use super::{angle_diff, sequence_theta, SerThresholds};
use crate::cis::Dds;
use crate::imaging::{Axis, EdgePixel, GradientField, ImageBuffer};

/// A sequence grown from one edge pixel until both ends reached a smooth side.
#[derive(Debug, Clone, PartialEq)]
pub struct StableDds {
    pub dds: Dds,
    /// Mean intensity of the final sequence.
    pub mean: f64,
    /// Summed-gradient direction of the final sequence.
    pub theta: f64,
}

impl StableDds {
    /// Growth rounds, `max(k_u, k_d)`.
    pub fn k(&self) -> usize {
        self.dds.k_u.max(self.dds.k_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// The stability score exceeded 1.
    Unstable { k: usize },
    /// Growth ran into the image border.
    Margin,
    /// `k_max` expansions without reaching both sides.
    KMax,
}

/// Grow a sequence along `p`'s DD one pixel per open side per round.
///
/// After each round the mean and the summed-gradient direction are
/// recomputed; the round is rejected when the combined normalized drift of
/// the two exceeds 1. A side closes once its endmost variation is at most
/// `th_ev`.
pub fn grow_stable_dds(
    img: &ImageBuffer,
    grad: &GradientField,
    p: &EdgePixel,
    th: &SerThresholds,
) -> Result<StableDds, Rejection> {
    let axis = p.dd;
    let centre = p.coord(axis);
    let limit = match axis {
        Axis::Horizontal => img.width(),
        Axis::Vertical => img.height(),
    };
    let value = |t: usize| match axis {
        Axis::Horizontal => img.get(t, p.y),
        Axis::Vertical => img.get(p.x, t),
    };

    let (mut k_d, mut k_u) = (0usize, 0usize);
    let (mut low_open, mut high_open) = (true, true);
    let mut mean = value(centre);
    let mut theta = grad.gy(p.x, p.y).atan2(grad.gx(p.x, p.y));
    loop {
        if low_open {
            if k_d + 1 > centre {
                return Err(Rejection::Margin);
            }
            k_d += 1;
        }
        if high_open {
            if centre + k_u + 1 >= limit {
                return Err(Rejection::Margin);
            }
            k_u += 1;
        }
        let k = k_d.max(k_u);
        if k > th.k_max {
            return Err(Rejection::KMax);
        }
        let dds = Dds::from_image(img, *p, axis, k_d, k_u).map_err(|_| Rejection::Margin)?;
        let m = dds.mean();
        let t = sequence_theta(grad, &dds);
        let score = th.combine.apply((m - mean).abs() / th.th_m, angle_diff(t, theta) / th.th_theta);
        if score > 1.0 {
            return Err(Rejection::Unstable { k });
        }
        mean = m;
        theta = t;

        let lo = centre - k_d;
        let hi = centre + k_u;
        if low_open && (value(lo) - value(lo + 1)).abs() <= th.th_ev {
            low_open = false;
        }
        if high_open && (value(hi) - value(hi - 1)).abs() <= th.th_ev {
            high_open = false;
        }
        if !low_open && !high_open {
            return Ok(StableDds { dds, mean, theta });
        }
    }
}
