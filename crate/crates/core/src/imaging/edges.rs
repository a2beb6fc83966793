use std::collections::VecDeque;

use super::GradientField;

/// Discrete deflection: the image axis closest to the gradient direction.
///
/// A DDS along `Horizontal` runs along x (varying column, fixed row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    /// DD for a gradient; ties go to `Vertical`.
    #[inline]
    pub fn from_gradient(gx: f64, gy: f64) -> Self {
        if gy.abs() >= gx.abs() {
            Axis::Vertical
        } else {
            Axis::Horizontal
        }
    }

    #[inline]
    pub fn other(self) -> Self {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }

    /// Unit step `(dx, dy)` along the axis.
    #[inline]
    pub fn step(self) -> (isize, isize) {
        match self {
            Axis::Horizontal => (1, 0),
            Axis::Vertical => (0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePixel {
    pub x: usize,
    pub y: usize,
    pub dd: Axis,
    pub gx: f64,
    pub gy: f64,
}

impl EdgePixel {
    pub fn from_gradient(grad: &GradientField, x: usize, y: usize) -> Self {
        let (gx, gy) = (grad.gx(x, y), grad.gy(x, y));
        Self { x, y, dd: Axis::from_gradient(gx, gy), gx, gy }
    }

    /// Coordinate along `axis`.
    #[inline]
    pub fn coord(&self, axis: Axis) -> usize {
        match axis {
            Axis::Horizontal => self.x,
            Axis::Vertical => self.y,
        }
    }
}

const NONE: u32 = u32::MAX;

/// Pixel-level edges in row-major order, with O(1) membership lookup.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    pixels: Vec<EdgePixel>,
    index: Vec<u32>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, mut pixels: Vec<EdgePixel>) -> Self {
        pixels.sort_by_key(|p| (p.y, p.x));
        pixels.dedup_by_key(|p| (p.y, p.x));
        let mut index = vec![NONE; width * height];
        for (i, p) in pixels.iter().enumerate() {
            index[p.y * width + p.x] = i as u32;
        }
        Self { width, height, pixels, index }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, Vec::new())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[EdgePixel] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Position of `(x, y)` in [`pixels`](Self::pixels), if it is an edge pixel.
    pub fn index_of(&self, x: isize, y: isize) -> Option<usize> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        match self.index[y as usize * self.width + x as usize] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    pub fn contains(&self, x: isize, y: isize) -> bool {
        self.index_of(x, y).is_some()
    }

    pub fn get(&self, x: isize, y: isize) -> Option<&EdgePixel> {
        self.index_of(x, y).map(|i| &self.pixels[i])
    }
}

/// Canny-style detection with the default 4-pixel border margin (`⌈n_p/2⌉`
/// for the 7-pixel sequence window).
pub fn detect_edges(grad: &GradientField, th_l: f64, th_h: f64) -> EdgeMap {
    detect_edges_with_margin(grad, th_l, th_h, 4)
}

/// Non-maximum suppression along the gradient direction quantized to
/// 0°/45°/90°/135°, then hysteresis: pixels ≥ `th_h` seed, pixels ≥ `th_l`
/// 8-connected to a seed survive. Pixels closer than `margin` to any border
/// are dropped afterwards.
pub fn detect_edges_with_margin(grad: &GradientField, th_l: f64, th_h: f64, margin: usize) -> EdgeMap {
    assert!(0.0 <= th_l && th_l <= th_h, "thresholds must satisfy 0 <= th_l <= th_h");
    let (w, h) = (grad.width(), grad.height());
    let mag = grad.magnitudes();
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    let mut nms = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let m = mag[y * w + x];
            if m <= 0.0 || m < th_l {
                continue;
            }
            let (dx, dy) = quantized_direction(grad.gx(x, y), grad.gy(x, y));
            let (xi, yi) = (x as isize, y as isize);
            let behind = at(xi - dx, yi - dy);
            let ahead = at(xi + dx, yi + dy);
            // Asymmetric comparison so a two-pixel plateau keeps exactly one pixel.
            if m >= behind && m > ahead {
                nms[y * w + x] = true;
            }
        }
    }

    let mut keep = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if nms[i] && mag[i] >= th_h {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !keep[j] && nms[j] && mag[j] >= th_l {
                    keep[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    let mut pixels = Vec::new();
    for y in margin..h.saturating_sub(margin) {
        for x in margin..w.saturating_sub(margin) {
            if keep[y * w + x] {
                pixels.push(EdgePixel::from_gradient(grad, x, y));
            }
        }
    }
    EdgeMap::new(w, h, pixels)
}

/// Neighbor offset along the gradient direction, quantized to four bins.
fn quantized_direction(gx: f64, gy: f64) -> (isize, isize) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}
