//! Synthetic benchmark images: a disc, a horizontal erf edge and a family of
//! parallel slanted boundaries, each with exact ground truth.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

pub const BRIGHT: f64 = 200.0;
pub const DARK: f64 = 50.0;
/// Foreground/background difference used to calibrate noise.
pub const CONTRAST: f64 = BRIGHT - DARK;

pub const CIRCLE_SIZE: usize = 221;
pub const CIRCLE_CENTER: f64 = 110.0;
pub const CIRCLE_RADIUS: f64 = 80.0;
pub const LINE_WIDTH: usize = 200;
pub const LINE_HEIGHT: usize = 40;
pub const LINE_CENTER: f64 = 20.0;
pub const SLANT_SIZE: usize = 221;
pub const SLANT_PIVOT_Y: f64 = 110.0;
pub const SLANT_SPACING: f64 = 10.0;
pub const SLANT_LINES: usize = 20;

/// Subpixel samples per axis for area rasterization.
pub const SUPERSAMPLE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Circle,
    Line,
    Slant,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Circle => "circle",
            Kind::Line => "line",
            Kind::Slant => "slant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub kind: Kind,
    /// Gaussian kernel size (odd); ignored for lines.
    pub k_g: usize,
    /// dB; `f64::INFINITY` disables noise.
    pub snr: f64,
    /// Blur coefficient of the line edge.
    pub sigma_l: f64,
    /// Subpixel offset of the line edge from the image centre row.
    pub l: f64,
    /// Slant lines fall `slope` pixels per pixel to the right.
    pub slope: u32,
    pub seed: u64,
    /// Noise scale; the SNR is relative to this difference.
    pub k_n: f64,
    /// `σ_G = k_G / sigma_divisor`.
    pub sigma_divisor: f64,
    /// Round to 8-bit gray levels after clamping, as a file round trip
    /// would. Off by default: in-memory benchmarks keep real intensities.
    pub quantize: bool,
}

impl SampleSpec {
    fn base(kind: Kind, seed: u64) -> Self {
        Self {
            kind,
            k_g: 1,
            snr: f64::INFINITY,
            sigma_l: 1.0,
            l: 0.0,
            slope: 1,
            seed,
            k_n: CONTRAST,
            sigma_divisor: 6.0,
            quantize: false,
        }
    }

    pub fn circle(k_g: usize, snr: f64, seed: u64) -> Self {
        Self { k_g, snr, ..Self::base(Kind::Circle, seed) }
    }

    pub fn line(sigma_l: f64, l: f64, snr: f64, seed: u64) -> Self {
        Self { sigma_l, l, snr, ..Self::base(Kind::Line, seed) }
    }

    pub fn slant(slope: u32, k_g: usize, snr: f64, seed: u64) -> Self {
        Self { slope, k_g, snr, ..Self::base(Kind::Slant, seed) }
    }

    pub fn with_quantize(self, quantize: bool) -> Self {
        Self { quantize, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_g == 0 || self.k_g % 2 == 0 {
            return Err(Error::InvalidParameter(format!("kernel size must be odd, got {}", self.k_g)));
        }
        if !(self.snr > 0.0) {
            return Err(Error::InvalidParameter("SNR must be positive".into()));
        }
        if !(self.k_n > 0.0) || !(self.sigma_divisor > 0.0) {
            return Err(Error::InvalidParameter("noise and blur scales must be positive".into()));
        }
        match self.kind {
            Kind::Line if !(self.sigma_l > 0.0) => Err(Error::InvalidParameter("σ_L must be positive".into())),
            Kind::Slant if self.slope == 0 => Err(Error::InvalidParameter("slope must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Boundary `y = intercept − slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantLine {
    pub slope: f64,
    pub intercept: f64,
}

impl SlantLine {
    pub fn y_at(&self, x: f64) -> f64 {
        self.intercept - self.slope * x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Circle {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    /// Edge row in pixel-centre coordinates.
    Line {
        y: f64,
    },
    Slant {
        lines: Vec<SlantLine>,
    },
}

impl GroundTruth {
    /// Long-format `field,value` sidecar.
    pub fn to_csv(&self, spec: &SampleSpec) -> String {
        let mut s = String::from("field,value\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(s, "{k},{v}");
        };
        row("kind", spec.kind.name().into());
        row("seed", spec.seed.to_string());
        row("snr", spec.snr.to_string());
        row("k_n", spec.k_n.to_string());
        row("quantize", spec.quantize.to_string());
        match self {
            GroundTruth::Circle { cx, cy, radius } => {
                row("k_g", spec.k_g.to_string());
                row("center_x", cx.to_string());
                row("center_y", cy.to_string());
                row("radius", radius.to_string());
            }
            GroundTruth::Line { y } => {
                row("sigma_l", spec.sigma_l.to_string());
                row("l", spec.l.to_string());
                row("edge_y", y.to_string());
            }
            GroundTruth::Slant { lines } => {
                row("k_g", spec.k_g.to_string());
                row("slope", spec.slope.to_string());
                for (i, line) in lines.iter().enumerate() {
                    row(&format!("line{i}_intercept"), line.intercept.to_string());
                }
            }
        }
        s
    }
}

/// Area-sample `f` with `ss`×`ss` points per pixel; pixel `(x, y)` covers
/// `(x − ½, x + ½) × (y − ½, y + ½)`.
pub fn render_area(width: usize, height: usize, ss: usize, f: impl Fn(f64, f64) -> f64) -> ImageBuffer {
    let step = 1.0 / ss as f64;
    let offsets: Vec<f64> = (0..ss).map(|i| -0.5 + (i as f64 + 0.5) * step).collect();
    let norm = (ss * ss) as f64;
    ImageBuffer::from_fn(width, height, |x, y| {
        let (px, py) = (x as f64, y as f64);
        let mut acc = 0.0;
        for &oy in &offsets {
            for &ox in &offsets {
                acc += f(px + ox, py + oy);
            }
        }
        acc / norm
    })
}

/// Normalized 1-D Gaussian kernel of odd size `k` with `σ = k / divisor`.
pub fn gaussian_kernel(k: usize, divisor: f64) -> Vec<f64> {
    if k <= 1 {
        return vec![1.0];
    }
    let sigma = k as f64 / divisor;
    let r = (k / 2) as isize;
    let w: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable `k×k` Gaussian blur, `σ = k/6`, replicate borders.
pub fn gaussian_blur(img: &ImageBuffer, k: usize) -> ImageBuffer {
    gaussian_blur_with(img, k, 6.0)
}

pub fn gaussian_blur_with(img: &ImageBuffer, k: usize, divisor: f64) -> ImageBuffer {
    let kernel = gaussian_kernel(k, divisor);
    if kernel.len() == 1 {
        return img.clone();
    }
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let rows = ImageBuffer::from_fn(w, h, |x, y| {
        kernel.iter().enumerate().map(|(i, kv)| kv * img.get_clamped(x as isize + i as isize - r, y as isize)).sum()
    });
    ImageBuffer::from_fn(w, h, |x, y| {
        kernel.iter().enumerate().map(|(i, kv)| kv * rows.get_clamped(x as isize, y as isize + i as isize - r)).sum()
    })
}

/// `σ_n = k_n · 10^(−SNR/20)`.
pub fn noise_sigma(snr: f64, k_n: f64) -> f64 {
    k_n * 10f64.powf(-snr / 20.0)
}

/// Add i.i.d. zero-mean Gaussian noise at the given SNR; no clamping.
pub fn add_gaussian_noise(img: &ImageBuffer, snr: f64, k_n: f64, seed: u64) -> ImageBuffer {
    let sigma = noise_sigma(snr, k_n);
    let mut out = img.clone();
    if !(sigma > 0.0) {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    for v in out.data_mut() {
        *v += normal.sample(&mut rng);
    }
    out
}

fn finish(mut img: ImageBuffer, spec: &SampleSpec) -> ImageBuffer {
    img = add_gaussian_noise(&img, spec.snr, spec.k_n, spec.seed);
    img.clamp_values(0.0, 255.0);
    if spec.quantize {
        img.quantize_8bit();
    }
    img
}

pub fn gen_circle(spec: &SampleSpec) -> (ImageBuffer, GroundTruth) {
    let r2 = CIRCLE_RADIUS * CIRCLE_RADIUS;
    let ideal = render_area(CIRCLE_SIZE, CIRCLE_SIZE, SUPERSAMPLE, |x, y| {
        let (dx, dy) = (x - CIRCLE_CENTER, y - CIRCLE_CENTER);
        if dx * dx + dy * dy < r2 {
            BRIGHT
        } else {
            DARK
        }
    });
    let img = finish(gaussian_blur_with(&ideal, spec.k_g, spec.sigma_divisor), spec);
    (img, GroundTruth::Circle { cx: CIRCLE_CENTER, cy: CIRCLE_CENTER, radius: CIRCLE_RADIUS })
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40)
}

/// The erf edge `I_L + D_L/2·(erf((t − e)/(√2 σ)) + 1)`, dark below `e`.
pub fn erf_edge(t: f64, e: f64, sigma: f64) -> f64 {
    DARK + CONTRAST / 2.0 * (erf((t - e) / (std::f64::consts::SQRT_2 * sigma)) + 1.0)
}

/// Unit-interval integrals of the erf edge for pixels `0..n`.
pub fn erf_profile(n: usize, e: f64, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let c = i as f64;
            integrate(&|t| erf_edge(t, e, sigma), c - 0.5, c + 0.5, 1e-9)
        })
        .collect()
}

/// Horizontal erf edge at row `20 + L`; dark above, bright below. No blur.
pub fn gen_line(spec: &SampleSpec) -> (ImageBuffer, GroundTruth) {
    let e = LINE_CENTER + spec.l;
    let profile = erf_profile(LINE_HEIGHT, e, spec.sigma_l);
    let ideal = ImageBuffer::from_fn(LINE_WIDTH, LINE_HEIGHT, |_, y| profile[y]);
    (finish(ideal, spec), GroundTruth::Line { y: e })
}

/// Boundaries through `(10·i, 110)`, `i = 1..=20`, falling `slope` px per px.
pub fn slant_lines(slope: u32) -> Vec<SlantLine> {
    let s = slope as f64;
    (1..=SLANT_LINES).map(|i| SlantLine { slope: s, intercept: SLANT_PIVOT_Y + s * SLANT_SPACING * i as f64 }).collect()
}

/// Exact area of the unit pixel centred at `(cx, cy)` where `a·x + b·y > c`.
pub fn pixel_half_plane_area(cx: f64, cy: f64, a: f64, b: f64, c: f64) -> f64 {
    let square = [(cx - 0.5, cy - 0.5), (cx + 0.5, cy - 0.5), (cx + 0.5, cy + 0.5), (cx - 0.5, cy + 0.5)];
    let side = |(x, y): (f64, f64)| a * x + b * y - c;
    // Sutherland-Hodgman against a single half-plane, then the shoelace sum.
    let mut clipped = Vec::with_capacity(5);
    for i in 0..4 {
        let (p, q) = (square[i], square[(i + 1) % 4]);
        let (sp, sq) = (side(p), side(q));
        if sp > 0.0 {
            clipped.push(p);
        }
        if (sp > 0.0) != (sq > 0.0) {
            let t = sp / (sp - sq);
            clipped.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    let n = clipped.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (p, q) = (clipped[i], clipped[(i + 1) % n]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum();
    twice.abs() / 2.0
}

/// Stripes between parallel boundaries: crossing a boundary toggles between
/// the dark and bright level, so the region just below the first boundary
/// is bright. Pixels are exact area integrals; a supersampled boundary would
/// carry a position quantum that the vertical residual multiplies by the
/// slope.
pub fn gen_slant(spec: &SampleSpec) -> (ImageBuffer, GroundTruth) {
    let lines = slant_lines(spec.slope);
    let ideal = ImageBuffer::from_fn(SLANT_SIZE, SLANT_SIZE, |x, y| {
        // The bright indicator is the alternating sum of the half-planes
        // beyond each boundary.
        let bright: f64 = lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let a = pixel_half_plane_area(x as f64, y as f64, l.slope, 1.0, l.intercept);
                if i % 2 == 0 {
                    a
                } else {
                    -a
                }
            })
            .sum();
        DARK + CONTRAST * bright
    });
    let img = finish(gaussian_blur_with(&ideal, spec.k_g, spec.sigma_divisor), spec);
    (img, GroundTruth::Slant { lines })
}

pub fn generate(spec: &SampleSpec) -> Result<(ImageBuffer, GroundTruth)> {
    spec.validate()?;
    Ok(match spec.kind {
        Kind::Circle => gen_circle(spec),
        Kind::Line => gen_line(spec),
        Kind::Slant => gen_slant(spec),
    })
}

/// Write `<stem>.pgm` and `<stem>.truth.csv`.
pub fn write_sample(dir: &Path, stem: &str, spec: &SampleSpec) -> Result<()> {
    let (img, truth) = generate(spec)?;
    std::fs::create_dir_all(dir)?;
    crate::imaging::save_grayscale(dir.join(format!("{stem}.pgm")), &img)?;
    std::fs::write(dir.join(format!("{stem}.truth.csv")), truth.to_csv(spec))?;
    Ok(())
}
