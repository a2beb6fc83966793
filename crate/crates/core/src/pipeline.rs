//! End-to-end detection: pixel-level edges, then plain CIS or the
//! region-based method with complement.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cis::{localize_plain, CisParams, SubpixelPoint};
use crate::complement::{complement_edges, ComplementParams};
use crate::error::{Error, Result};
use crate::imaging::{detect_edges_with_margin, sobel_gradients, ImageBuffer};
use crate::par::{self, Exec};
use crate::ser::{find_sers, localize_ser_or_fallback, region_sides, SerThresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plain CIS on every edge pixel.
    Cis,
    /// Stable edge regions with robust sides, then complement.
    CisSer,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cis => "cis",
            Method::CisSer => "cis+ser",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cis" => Ok(Method::Cis),
            "cis+ser" | "cis-ser" | "ser" => Ok(Method::CisSer),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub method: Method,
    /// Hysteresis thresholds on the Sobel magnitude.
    pub th_l: f64,
    pub th_h: f64,
    /// Edge pixels closer than this to the border are dropped.
    pub margin: usize,
    pub cis: CisParams,
    pub ser: SerThresholds,
    /// `None` disables the complement stage.
    pub complement: Option<ComplementParams>,
    /// Keep points whose solution was clamped to the window.
    pub keep_clamped: bool,
    pub exec: Exec,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            method: Method::CisSer,
            th_l: 80.0,
            th_h: 100.0,
            margin: 4,
            cis: CisParams::default(),
            ser: SerThresholds::default(),
            complement: Some(ComplementParams::default()),
            keep_clamped: false,
            exec: Exec::default(),
        }
    }
}

impl DetectConfig {
    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn with_exec(self, exec: Exec) -> Self {
        Self { exec, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.th_l && self.th_l <= self.th_h) {
            return Err(Error::InvalidParameter("need 0 ≤ th_l ≤ th_h".into()));
        }
        if self.cis.n_p < 3 || self.cis.n_p % 2 == 0 || self.cis.max_len < self.cis.n_p {
            return Err(Error::InvalidParameter("n_p must be odd, ≥ 3 and ≤ the window cap".into()));
        }
        if !(self.cis.flat_tol >= 0.0) {
            return Err(Error::InvalidParameter("flat_tol must be non-negative".into()));
        }
        if let Some(c) = &self.complement {
            if !(c.th_c > 0.0) {
                return Err(Error::InvalidParameter("th_c must be positive".into()));
            }
        }
        self.ser.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub points: Vec<SubpixelPoint>,
    pub edge_pixels: usize,
    pub regions: usize,
}

impl Detection {
    /// `x,y,source` rows with six decimals.
    pub fn to_csv(&self) -> String {
        points_to_csv(&self.points)
    }
}

pub fn points_to_csv(points: &[SubpixelPoint]) -> String {
    let mut s = String::from("x,y,source\n");
    for p in points {
        let _ = writeln!(s, "{:.6},{:.6},{}", p.x, p.y, p.source.name());
    }
    s
}

pub fn detect(img: &ImageBuffer, cfg: &DetectConfig) -> Result<Detection> {
    cfg.validate()?;
    let grad = sobel_gradients(img)?;
    let edges = detect_edges_with_margin(&grad, cfg.th_l, cfg.th_h, cfg.margin);
    let keep = |p: &SubpixelPoint| cfg.keep_clamped || !p.clamped;
    let (points, regions) = match cfg.method {
        Method::Cis => {
            let pts = par::map(edges.pixels(), cfg.exec, |p| localize_plain(img, p, &cfg.cis).ok());
            (pts.into_iter().flatten().filter(keep).collect(), 0)
        }
        Method::CisSer => {
            let set = find_sers(img, &grad, &edges, &cfg.ser, cfg.exec);
            let sides = par::map(&set.sers, cfg.exec, |s| region_sides(img, s, &cfg.ser).ok());
            let mut pts: Vec<SubpixelPoint> = set
                .sers
                .iter()
                .zip(&sides)
                .flat_map(|(s, side)| localize_ser_or_fallback(img, s, side.as_ref(), &cfg.ser, &cfg.cis))
                .filter(keep)
                .collect();
            if let Some(c) = &cfg.complement {
                pts.extend(complement_edges(img, &edges, &set, &sides, c).into_iter().filter(keep));
            }
            (pts, set.sers.len())
        }
    };
    Ok(Detection { points, edge_pixels: edges.len(), regions })
}
