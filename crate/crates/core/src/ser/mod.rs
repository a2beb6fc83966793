//! Stable edge regions (SER): groups of tangentially adjacent sequences that
//! share side intensities and length.
//!
//! Regions are found in two phases. Stable sequence growth is independent per
//! edge pixel and runs on the thread pool; tangential expansion then claims
//! pixels in row-major seed order, so parallel and sequential runs produce
//! identical regions.

mod consistency;
mod grow;
mod sides;
mod tangent;

use std::f64::consts::PI;

pub use consistency::{consistency_stats, ConsistencyReport};
pub use grow::{grow_stable_dds, Rejection, StableDds};
pub use sides::{estimate_ser_sides, estimate_sides_from_pixels, SerSides};
pub use tangent::{expand_tangent, expand_tangent_claimed};

use crate::cis::{
    grow_window, localize_cis, localize_plain, to_subpixel_point, CisParams, Dds, SidePair, Source, SubpixelPoint,
};
use crate::error::{Error, Result};
use crate::imaging::{Axis, EdgeMap, EdgePixel, GradientField, ImageBuffer};
use crate::par::{self, Exec};

/// How two normalized drifts combine into one stability score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// Trip only when both drifts exceed their thresholds.
    #[default]
    Min,
    /// Trip when either drift exceeds its threshold.
    Max,
}

impl Combine {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Combine::Min => a.min(b),
            Combine::Max => a.max(b),
        }
    }
}

/// Spread statistic used to split region pixels into bright and dark groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spread {
    #[default]
    StdDev,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerThresholds {
    /// Mean drift threshold (gray levels).
    pub th_m: f64,
    /// Derivative-direction drift threshold (radians).
    pub th_theta: f64,
    /// Endmost variation threshold (gray levels).
    pub th_ev: f64,
    /// Relative mean drift threshold.
    pub th_r: f64,
    /// Cap on expansions per side during stable growth.
    pub k_max: usize,
    /// Border margin for tangential expansion.
    pub margin: usize,
    pub combine: Combine,
    pub spread: Spread,
    /// Robust side estimation samples each member window widened by
    /// `side_pad × L` pixels at both ends; 0 uses the member pixels only.
    pub side_pad: f64,
    /// Localize each member on its window grown to flatness (plain-CIS
    /// growth rule) instead of the fixed region length.
    pub grow_members: bool,
}

impl Default for SerThresholds {
    fn default() -> Self {
        Self {
            th_m: 5.0,
            th_theta: PI / 40.0,
            th_ev: 10.0,
            th_r: 0.1,
            k_max: 20,
            margin: 4,
            combine: Combine::Min,
            spread: Spread::StdDev,
            side_pad: 2.0,
            grow_members: true,
        }
    }
}

impl SerThresholds {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.th_m, self.th_theta, self.th_ev, self.th_r];
        if positive.iter().any(|v| !(*v > 0.0)) || self.k_max == 0 {
            return Err(Error::InvalidParameter("SER thresholds must be positive".into()));
        }
        if !(self.side_pad >= 0.0) {
            return Err(Error::InvalidParameter("side padding must be non-negative".into()));
        }
        Ok(())
    }
}

/// Absolute angular difference in `[0, π]`.
#[inline]
pub(crate) fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b).abs() % (2.0 * PI);
    if d > PI {
        d = 2.0 * PI - d;
    }
    d
}

/// Summed-gradient direction over a sequence.
pub(crate) fn sequence_theta(grad: &GradientField, dds: &Dds) -> f64 {
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..dds.len() {
        let (x, y) = dds.pixel_coords(i);
        sx += grad.gx(x, y);
        sy += grad.gy(x, y);
    }
    sy.atan2(sx)
}

/// A stable edge region: equal-length sequences along a common DD, ordered
/// along the tangent.
#[derive(Debug, Clone)]
pub struct Ser {
    axis: Axis,
    members: Vec<Dds>,
    theta: f64,
}

impl Ser {
    pub fn new(members: Vec<Dds>, theta: f64) -> Result<Self> {
        let first =
            members.first().ok_or_else(|| Error::InvalidParameter("a region needs at least one sequence".into()))?;
        let (axis, len) = (first.axis, first.len());
        if members.iter().any(|m| m.axis != axis || m.len() != len) {
            return Err(Error::InvalidParameter("region sequences must share axis and length".into()));
        }
        Ok(Self { axis, members, theta })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn members(&self) -> &[Dds] {
        &self.members
    }

    /// Common sequence length `L`.
    pub fn seq_len(&self) -> usize {
        self.members[0].len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Regional derivative direction (of the seed sequence).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The two outermost member anchors, in tangent order.
    pub fn endpoints(&self) -> (EdgePixel, EdgePixel) {
        (self.members[0].anchor, self.members[self.members.len() - 1].anchor)
    }

    /// All region pixel intensities.
    pub fn pixel_values(&self) -> Vec<f64> {
        self.members.iter().flat_map(|m| m.intensities().iter().copied()).collect()
    }

    /// Sub-region of members `range`, e.g. to carve a gap out of a region.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let members = self.members.get(range).map(<[Dds]>::to_vec).unwrap_or_default();
        Self::new(members, self.theta)
    }
}

const UNCLAIMED: u32 = u32::MAX;

/// Per-pixel owner of the stable-region set `𝔼_S`.
#[derive(Debug, Clone)]
pub struct ClaimMap {
    width: usize,
    height: usize,
    owner: Vec<u32>,
}

impl ClaimMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, owner: vec![UNCLAIMED; width * height] }
    }

    /// Claims for an explicit region list, in list order.
    pub fn from_sers(edges: &EdgeMap, sers: &[Ser]) -> Self {
        let mut claims = Self::new(edges.width(), edges.height());
        for (id, ser) in sers.iter().enumerate() {
            claims.claim_region(edges, ser, id);
        }
        claims
    }

    pub fn owner(&self, x: isize, y: isize) -> Option<usize> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        match self.owner[y as usize * self.width + x as usize] {
            UNCLAIMED => None,
            id => Some(id as usize),
        }
    }

    pub fn is_claimed(&self, x: isize, y: isize) -> bool {
        self.owner(x, y).is_some()
    }

    fn set(&mut self, x: usize, y: usize, id: usize) {
        let slot = &mut self.owner[y * self.width + x];
        if *slot == UNCLAIMED {
            *slot = id as u32;
        }
    }

    /// Claims every member anchor plus edge pixels one step either side of
    /// the anchor along the DD; the latter absorbs the one-pixel offset
    /// between a tracked centre and the NMS ridge.
    pub fn claim_region(&mut self, edges: &EdgeMap, ser: &Ser, id: usize) {
        let (dx, dy) = ser.axis().step();
        for m in ser.members() {
            let (ax, ay) = (m.anchor.x, m.anchor.y);
            self.set(ax, ay, id);
            for s in [-1isize, 1] {
                let (nx, ny) = (ax as isize + s * dx, ay as isize + s * dy);
                if edges.contains(nx, ny) {
                    self.set(nx as usize, ny as usize, id);
                }
            }
        }
    }
}

/// Regions found on one image together with their claims.
#[derive(Debug, Clone)]
pub struct SerSet {
    pub sers: Vec<Ser>,
    pub claims: ClaimMap,
}

/// Stable growth for every edge pixel, then row-major tangential expansion
/// from each accepted, still unclaimed seed.
pub fn find_sers(img: &ImageBuffer, grad: &GradientField, edges: &EdgeMap, th: &SerThresholds, exec: Exec) -> SerSet {
    let stable: Vec<Option<StableDds>> = par::map(edges.pixels(), exec, |p| grow_stable_dds(img, grad, p, th).ok());
    let mut claims = ClaimMap::new(img.width(), img.height());
    let mut sers = Vec::new();
    for (p, seed) in edges.pixels().iter().zip(stable) {
        if claims.is_claimed(p.x as isize, p.y as isize) {
            continue;
        }
        let Some(seed) = seed else { continue };
        let ser = expand_tangent_claimed(img, grad, edges, &seed, th, Some(&claims));
        claims.claim_region(edges, &ser, sers.len());
        sers.push(ser);
    }
    SerSet { sers, claims }
}

/// Orient the bright/dark pair to a sequence: the low-index end gets the
/// side it is closer to in intensity.
pub(crate) fn orient(dds: &Dds, bright: f64, dark: f64) -> SidePair {
    let g = dds.intensities();
    if g[0] >= g[g.len() - 1] {
        SidePair::new(bright, dark)
    } else {
        SidePair::new(dark, bright)
    }
}

/// Localize every member with the region-wide sides.
pub fn localize_ser(ser: &Ser, sides: &SerSides) -> Result<Vec<SubpixelPoint>> {
    ser.members()
        .iter()
        .map(|m| {
            let off = localize_cis(m, orient(m, sides.g_a, sides.g_b))?;
            Ok(to_subpixel_point(m, off, Source::Ser))
        })
        .collect()
}

/// Intensities used for robust side estimation: every member window
/// extended by `pad` pixels at both ends, clipped to the image.
pub fn side_population(img: &ImageBuffer, ser: &Ser, pad: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(ser.len() * (ser.seq_len() + 2 * pad));
    for m in ser.members() {
        let limit = match m.axis {
            Axis::Horizontal => img.width(),
            Axis::Vertical => img.height(),
        };
        let lo = m.start.saturating_sub(pad);
        let hi = (m.start + m.len() + pad).min(limit);
        out.extend((lo..hi).map(|t| match m.axis {
            Axis::Horizontal => img.get(t, m.anchor.y),
            Axis::Vertical => img.get(m.anchor.x, t),
        }));
    }
    out
}

/// Robust sides of a region with the configured spread and padding.
pub fn region_sides(img: &ImageBuffer, ser: &Ser, th: &SerThresholds) -> Result<SerSides> {
    let pad = (th.side_pad * ser.seq_len() as f64).round() as usize;
    if pad == 0 {
        return estimate_ser_sides(ser, th.spread);
    }
    estimate_sides_from_pixels(&side_population(img, ser, pad), th.spread)
}

/// Localize a region with its robust sides; without them, each member's
/// anchor goes through plain CIS (tagged `cis`).
pub fn localize_ser_or_fallback(
    img: &ImageBuffer,
    ser: &Ser,
    sides: Option<&SerSides>,
    th: &SerThresholds,
    plain: &CisParams,
) -> Vec<SubpixelPoint> {
    match sides {
        Some(sides) => ser
            .members()
            .iter()
            .filter_map(|m| {
                let grown;
                let m = if th.grow_members {
                    grown = grow_window(img, m, plain.flat_tol, plain.max_len.max(m.len())).ok()?;
                    &grown
                } else {
                    m
                };
                let off = localize_cis(m, orient(m, sides.g_a, sides.g_b)).ok()?;
                Some(to_subpixel_point(m, off, Source::Ser))
            })
            .collect(),
        None => ser.members().iter().filter_map(|m| localize_plain(img, &m.anchor, plain).ok()).collect(),
    }
}
