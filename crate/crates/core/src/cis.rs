//! Converted intensity summation: closed-form subpixel edge localization in a
//! 1-D pixel sequence.
//!
//! Pixel `i` (1-based) of a sequence of length `n` is the integral of the
//! subpixel intensity curve over `(i − 0.5, i + 0.5)`. Replacing the curve by
//! a step from `g_a` to `g_b` at `c` keeps the integral over `(0.5, n + 0.5)`
//! unchanged when the transition is symmetric, so
//!
//! ```text
//! I = (c − 0.5)·g_a + (n + 0.5 − c)·g_b   ⇒   c = (I − n·g_b) / (g_a − g_b) + 1/2
//! ```

use crate::error::{Error, Result};
use crate::imaging::{Axis, EdgePixel, ImageBuffer};

/// Which stage of the pipeline produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Cis,
    Ser,
    Complement,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Cis => "cis",
            Source::Ser => "ser",
            Source::Complement => "complement",
        }
    }
}

/// Discrete deflective sequence: pixels along the DD axis through an anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Dds {
    pub anchor: EdgePixel,
    pub axis: Axis,
    /// Image coordinate, along `axis`, of the first pixel.
    pub start: usize,
    /// Pixels before the anchor.
    pub k_d: usize,
    /// Pixels after the anchor.
    pub k_u: usize,
    intensities: Vec<f64>,
    sum: f64,
}

impl Dds {
    /// Window `[anchor − k_d, anchor + k_u]` along `axis`.
    pub fn from_image(img: &ImageBuffer, anchor: EdgePixel, axis: Axis, k_d: usize, k_u: usize) -> Result<Self> {
        let centre = anchor.coord(axis);
        let limit = match axis {
            Axis::Horizontal => img.width(),
            Axis::Vertical => img.height(),
        };
        if k_d > centre || centre + k_u >= limit {
            return Err(Error::WindowOverrun);
        }
        let start = centre - k_d;
        let intensities: Vec<f64> = (start..=centre + k_u)
            .map(|t| match axis {
                Axis::Horizontal => img.get(t, anchor.y),
                Axis::Vertical => img.get(anchor.x, t),
            })
            .collect();
        Ok(Self::assemble(anchor, axis, start, k_d, intensities))
    }

    /// Sequence from explicit values; `start` is the image coordinate of the
    /// first value along `axis`.
    pub fn from_values(anchor: EdgePixel, axis: Axis, start: usize, intensities: Vec<f64>) -> Result<Self> {
        let centre = anchor.coord(axis);
        if intensities.len() < 2 {
            return Err(Error::InvalidParameter("a sequence needs at least two pixels".into()));
        }
        if centre < start || centre >= start + intensities.len() {
            return Err(Error::InvalidParameter("anchor outside the sequence span".into()));
        }
        Ok(Self::assemble(anchor, axis, start, centre - start, intensities))
    }

    fn assemble(anchor: EdgePixel, axis: Axis, start: usize, k_d: usize, intensities: Vec<f64>) -> Self {
        let k_u = intensities.len() - 1 - k_d;
        let sum = intensities.iter().sum();
        Self { anchor, axis, start, k_d, k_u, intensities, sum }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    #[inline]
    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// Sum of intensities, `I`.
    #[inline]
    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.len() as f64
    }

    /// Image coordinates of the `i`-th (0-based) pixel.
    pub fn pixel_coords(&self, i: usize) -> (usize, usize) {
        match self.axis {
            Axis::Horizontal => (self.start + i, self.anchor.y),
            Axis::Vertical => (self.anchor.x, self.start + i),
        }
    }
}

/// Fixed window of `n_p` pixels centred on `p` along its DD.
pub fn build_dds(img: &ImageBuffer, p: &EdgePixel, n_p: usize) -> Result<Dds> {
    if n_p < 3 || n_p % 2 == 0 {
        return Err(Error::InvalidParameter(format!("window length must be odd and >= 3, got {n_p}")));
    }
    let h = n_p / 2;
    Dds::from_image(img, *p, p.dd, h, h)
}

/// Smooth-side intensities. `g_a` belongs to the low-index end of the
/// sequence, `g_b` to the high-index end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePair {
    pub g_a: f64,
    pub g_b: f64,
}

impl SidePair {
    pub fn new(g_a: f64, g_b: f64) -> Self {
        Self { g_a, g_b }
    }

    pub fn swapped(self) -> Self {
        Self { g_a: self.g_b, g_b: self.g_a }
    }

    pub fn contrast(&self) -> f64 {
        self.g_a - self.g_b
    }

    #[inline]
    fn is_degenerate(&self) -> bool {
        !(self.g_a - self.g_b).is_normal()
    }
}

/// Means of the flat runs at both ends of the sequence.
///
/// Each run grows inward from its end pixel while consecutive differences
/// stay within `flat_tol`.
pub fn estimate_plain_sides(dds: &Dds, flat_tol: f64) -> Result<SidePair> {
    let g = dds.intensities();
    if g.len() < 3 {
        return Err(Error::InvalidParameter("side estimation needs at least three pixels".into()));
    }
    let n = g.len();
    let mut a_end = 0;
    while a_end + 1 < n && (g[a_end + 1] - g[a_end]).abs() <= flat_tol {
        a_end += 1;
    }
    let mut b_start = n - 1;
    while b_start > 0 && (g[b_start - 1] - g[b_start]).abs() <= flat_tol {
        b_start -= 1;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let sides = SidePair::new(mean(&g[..=a_end]), mean(&g[b_start..]));
    if sides.is_degenerate() {
        return Err(Error::NoContrast);
    }
    Ok(sides)
}

/// Edge position in sequence coordinates (pixel `i` is centred on `i`,
/// 1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CisOffset {
    pub c: f64,
    /// The raw solution fell outside `[0.5, n + 0.5]` and was clamped.
    pub clamped: bool,
}

/// Solve the summation identity for the step position `c`.
pub fn localize_cis(dds: &Dds, sides: SidePair) -> Result<CisOffset> {
    if sides.is_degenerate() {
        return Err(Error::NoContrast);
    }
    let n = dds.len() as f64;
    let raw = (dds.sum() - n * sides.g_b) / (sides.g_a - sides.g_b) + 0.5;
    let c = raw.clamp(0.5, n + 0.5);
    Ok(CisOffset { c, clamped: c != raw })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubpixelPoint {
    pub x: f64,
    pub y: f64,
    pub source: Source,
    /// DD along which the position was solved.
    pub axis: Axis,
    pub clamped: bool,
}

/// Map a sequence offset back to image coordinates: position 1 is `start`.
pub fn to_subpixel_point(dds: &Dds, offset: CisOffset, source: Source) -> SubpixelPoint {
    let along = dds.start as f64 + (offset.c - 1.0);
    let (x, y) = match dds.axis {
        Axis::Horizontal => (along, dds.anchor.y as f64),
        Axis::Vertical => (dds.anchor.x as f64, along),
    };
    SubpixelPoint { x, y, source, axis: dds.axis, clamped: offset.clamped }
}

/// Plain CIS configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CisParams {
    /// Initial odd window length.
    pub n_p: usize,
    /// Flatness tolerance (gray levels) for window growth and side runs.
    pub flat_tol: f64,
    /// Upper bound on the grown window length.
    pub max_len: usize,
}

impl Default for CisParams {
    fn default() -> Self {
        Self { n_p: 7, flat_tol: 2.0, max_len: 15 }
    }
}

/// `n_p` window around `p`, then each end grows outward one pixel at a time
/// while its endmost variation exceeds `flat_tol`, up to `max_len` pixels.
pub fn plain_window(img: &ImageBuffer, p: &EdgePixel, params: &CisParams) -> Result<Dds> {
    grow_window(img, &build_dds(img, p, params.n_p)?, params.flat_tol, params.max_len)
}

/// Grow both ends of `dds` outward while the endmost variation exceeds
/// `flat_tol`, keeping the total length at most `max_len`.
pub fn grow_window(img: &ImageBuffer, dds: &Dds, flat_tol: f64, max_len: usize) -> Result<Dds> {
    let axis = dds.axis;
    let centre = dds.anchor.coord(axis);
    let limit = match axis {
        Axis::Horizontal => img.width(),
        Axis::Vertical => img.height(),
    };
    let value = |t: usize| match axis {
        Axis::Horizontal => img.get(t, dds.anchor.y),
        Axis::Vertical => img.get(dds.anchor.x, t),
    };
    let (mut k_d, mut k_u) = (dds.k_d, dds.k_u);
    while k_d + k_u + 1 < max_len {
        let lo = centre - k_d;
        let hi = centre + k_u;
        let mut grew = false;
        if lo > 0 && (value(lo) - value(lo + 1)).abs() > flat_tol {
            k_d += 1;
            grew = true;
        }
        if k_d + k_u + 1 < max_len && hi + 1 < limit && (value(hi) - value(hi - 1)).abs() > flat_tol {
            k_u += 1;
            grew = true;
        }
        if !grew {
            break;
        }
    }
    if (k_d, k_u) == (dds.k_d, dds.k_u) {
        return Ok(dds.clone());
    }
    Dds::from_image(img, dds.anchor, axis, k_d, k_u)
}

/// Plain CIS for one edge pixel: grown window, flat-run sides, closed form.
pub fn localize_plain(img: &ImageBuffer, p: &EdgePixel, params: &CisParams) -> Result<SubpixelPoint> {
    let dds = plain_window(img, p, params)?;
    let sides = estimate_plain_sides(&dds, params.flat_tol)?;
    let offset = localize_cis(&dds, sides)?;
    Ok(to_subpixel_point(&dds, offset, Source::Cis))
}
