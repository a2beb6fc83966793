use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::par::{self, Exec};
use crate::pipeline::{detect, DetectConfig, Method};
use crate::synth::{generate, Kind, SampleSpec};

use super::metrics::{circle_radius_error, line_residuals, rms, slant_residuals};

/// One benchmark cell; unused fields are ignored for the kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub kind: Kind,
    pub k_g: usize,
    pub snr: f64,
    pub sigma_l: f64,
    pub slope: u32,
}

impl CellSpec {
    pub fn circle(k_g: usize, snr: f64) -> Self {
        Self { kind: Kind::Circle, k_g, snr, sigma_l: 0.0, slope: 0 }
    }

    pub fn line(sigma_l: f64, snr: f64) -> Self {
        Self { kind: Kind::Line, k_g: 1, snr, sigma_l, slope: 0 }
    }

    pub fn slant(slope: u32, k_g: usize, snr: f64) -> Self {
        Self { kind: Kind::Slant, k_g, snr, sigma_l: 0.0, slope }
    }

    pub fn params(&self) -> String {
        match self.kind {
            Kind::Circle => format!("k_g={} snr={}", self.k_g, self.snr),
            Kind::Line => format!("sigma_l={} snr={}", self.sigma_l, self.snr),
            Kind::Slant => format!("slope={} k_g={} snr={}", self.slope, self.k_g, self.snr),
        }
    }
}

/// Line edge offsets; each line cell pools every offset.
pub const LINE_OFFSETS: [f64; 11] = [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub cells: Vec<CellSpec>,
    pub methods: Vec<Method>,
    /// Samples per cell (per line offset for line cells).
    pub samples: usize,
    pub seed: u64,
    pub config: DetectConfig,
    /// Run cells on the thread pool; detections stay single-threaded.
    pub exec: Exec,
}

impl Suite {
    pub fn new(cells: Vec<CellSpec>) -> Self {
        Self {
            cells,
            methods: vec![Method::Cis, Method::CisSer],
            samples: 5,
            seed: 0,
            config: DetectConfig::default(),
            exec: Exec::default(),
        }
    }

    /// Circle grid: k_G ∈ {3, 5, 7, 9} × SNR ∈ {80, 90, 100}.
    pub fn circle_grid() -> Self {
        Self::new([3, 5, 7, 9].iter().flat_map(|&k| [80.0, 90.0, 100.0].map(|s| CellSpec::circle(k, s))).collect())
    }

    /// Line grid: σ_L ∈ {1, 1.25, …, 2.25} × SNR ∈ {70, 73, 76, 79, 85}.
    pub fn line_grid() -> Self {
        let sigmas = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25];
        Self::new(sigmas.iter().flat_map(|&g| [70.0, 73.0, 76.0, 79.0, 85.0].map(|s| CellSpec::line(g, s))).collect())
    }

    /// Slopes 1..=10 at one blur and SNR.
    pub fn slant_grid(k_g: usize, snr: f64) -> Self {
        Self::new((1..=10).map(|s| CellSpec::slant(s, k_g, snr)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub cell: CellSpec,
    pub method: Method,
    /// Mean radius error for circles, pooled RMSE otherwise.
    pub metric: f64,
    pub samples: usize,
    pub points: usize,
    /// Mean detection wall time per image (s).
    pub seconds_per_image: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,params,method,metric,samples,points,seconds_per_image\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{},{},{:.6}",
                r.cell.kind.name(),
                r.cell.params(),
                r.method.name(),
                r.metric,
                r.samples,
                r.points,
                r.seconds_per_image
            );
        }
        s
    }

    /// Whitespace-separated columns for plotting.
    pub fn to_dat(&self) -> String {
        let mut s = String::from("# kind k_g snr sigma_l slope method metric seconds\n");
        for r in &self.rows {
            let c = &r.cell;
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {:.6} {:.6}",
                c.kind.name(),
                c.k_g,
                c.snr,
                c.sigma_l,
                c.slope,
                r.method.name(),
                r.metric,
                r.seconds_per_image
            );
        }
        s
    }

    /// Text table, one line per row.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:<8} {:<28} {:<8} {:>10} {:>8} {:>12}\n",
            "kind", "params", "method", "metric", "samples", "s/image"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8} {:<28} {:<8} {:>10.4} {:>8} {:>12.5}",
                r.cell.kind.name(),
                r.cell.params(),
                r.method.name(),
                r.metric,
                r.samples,
                r.seconds_per_image
            );
        }
        s
    }

    /// Mean metric over rows of one method.
    pub fn mean_metric(&self, method: Method) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.method == method).map(|r| r.metric).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn sample_seed(base: u64, cell: usize, sample: usize) -> u64 {
    // splitmix64 finalizer over the packed index.
    let mut z = base ^ ((cell as u64) << 32) ^ sample as u64;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_specs(cell: &CellSpec, index: usize, suite: &Suite) -> Vec<SampleSpec> {
    match cell.kind {
        Kind::Circle => (0..suite.samples)
            .map(|i| SampleSpec::circle(cell.k_g, cell.snr, sample_seed(suite.seed, index, i)))
            .collect(),
        Kind::Slant => (0..suite.samples)
            .map(|i| SampleSpec::slant(cell.slope, cell.k_g, cell.snr, sample_seed(suite.seed, index, i)))
            .collect(),
        Kind::Line => LINE_OFFSETS
            .iter()
            .enumerate()
            .flat_map(|(j, &l)| (0..suite.samples).map(move |i| (j, l, i)))
            .map(|(j, l, i)| {
                SampleSpec::line(cell.sigma_l, l, cell.snr, sample_seed(suite.seed, index, j * suite.samples + i))
            })
            .collect(),
    }
}

fn run_cell(index: usize, cell: &CellSpec, suite: &Suite) -> Result<Vec<BenchRow>> {
    let samples: Vec<_> = sample_specs(cell, index, suite).iter().map(generate).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &method in &suite.methods {
        let cfg = suite.config.with_method(method).with_exec(Exec::Sequential);
        let mut elapsed = 0.0;
        let mut per_image = Vec::new();
        let mut residuals = Vec::new();
        let mut points = 0;
        for (img, truth) in &samples {
            let t0 = Instant::now();
            let det = detect(img, &cfg)?;
            elapsed += t0.elapsed().as_secs_f64();
            points += det.points.len();
            match cell.kind {
                Kind::Circle => per_image.push(circle_radius_error(&det.points, truth)?),
                Kind::Line => residuals.extend(line_residuals(&det.points, truth)?),
                Kind::Slant => residuals.extend(slant_residuals(&det.points, truth)?),
            }
        }
        let metric = match cell.kind {
            Kind::Circle => per_image.iter().sum::<f64>() / per_image.len() as f64,
            _ => rms(&residuals).unwrap_or(f64::NAN),
        };
        rows.push(BenchRow {
            cell: *cell,
            method,
            metric,
            samples: samples.len(),
            points,
            seconds_per_image: elapsed / samples.len() as f64,
        });
    }
    Ok(rows)
}

/// Generate every sample, run each method on it single-threaded and collect
/// one row per cell and method, in cell order.
pub fn run_benchmark(suite: &Suite) -> Result<BenchReport> {
    let cells: Vec<(usize, CellSpec)> = suite.cells.iter().copied().enumerate().collect();
    let results = par::map(&cells, suite.exec, |(i, c)| run_cell(*i, c, suite));
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(BenchReport { rows })
}
