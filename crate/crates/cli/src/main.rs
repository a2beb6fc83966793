use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cisedge::complement::ComplementParams;
use cisedge::eval::{run_benchmark, Suite};
use cisedge::imaging::{detect_edges_with_margin, load_grayscale, save_grayscale, sobel_gradients};
use cisedge::ser::{consistency_stats, Combine, ConsistencyReport, Spread};
use cisedge::synth::{write_sample, SampleSpec};
use cisedge::{detect, CisParams, DetectConfig, Exec, ImageBuffer, Method, SerThresholds};

/// Overrides every `--seed` flag when set.
const SEED_ENV: &str = "SUBPIX_SEED";
const OVERLAY_SCALE: usize = 4;

#[derive(Parser)]
#[command(name = "cisedge", version, about = "Subpixel edge localization by converted intensity summation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Localize subpixel edges in a PGM image and write `x,y,source` CSV.
    Detect(DetectArgs),
    /// Write one synthetic sample (PGM plus truth CSV).
    Generate(GenerateArgs),
    /// Run a benchmark grid and write a report CSV.
    Bench(BenchArgs),
    /// Sequence consistency statistics over 7×7 windows.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cis,
    #[value(name = "cis+ser")]
    CisSer,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cis => Method::Cis,
            MethodArg::CisSer => Method::CisSer,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineArg {
    Min,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpreadArg {
    Std,
    Var,
}

/// Accepts a plain number or `pi/N`.
fn parse_angle(s: &str) -> Result<f64, String> {
    if let Some(d) = s.strip_prefix("pi/") {
        let d: f64 = d.parse().map_err(|e| format!("{e}"))?;
        return Ok(std::f64::consts::PI / d);
    }
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args, Clone)]
struct Thresholds {
    /// Low hysteresis threshold.
    #[arg(long, default_value_t = 80.0)]
    th_l: f64,
    /// High hysteresis threshold.
    #[arg(long, default_value_t = 100.0)]
    th_h: f64,
    /// Initial plain-CIS window length (odd).
    #[arg(long, default_value_t = 7)]
    n_p: usize,
    /// Upper bound on the grown plain-CIS window.
    #[arg(long, default_value_t = 15)]
    max_len: usize,
    /// Flatness tolerance for plain side runs (gray levels).
    #[arg(long, default_value_t = 2.0)]
    flat_tol: f64,
    /// Mean drift threshold.
    #[arg(long, default_value_t = 5.0)]
    th_m: f64,
    /// Derivative direction threshold, radians or `pi/N`.
    #[arg(long, default_value = "pi/40", value_parser = parse_angle)]
    th_theta: f64,
    /// Endmost variation threshold.
    #[arg(long, default_value_t = 10.0)]
    th_ev: f64,
    /// Relative mean threshold.
    #[arg(long, default_value_t = 0.1)]
    th_r: f64,
    /// Complement adjustment threshold.
    #[arg(long, default_value_t = 10.0)]
    th_c: f64,
    /// Expansion cap per side during stable growth.
    #[arg(long, default_value_t = 20)]
    k_max: usize,
    /// How the two drift scores combine.
    #[arg(long, value_enum, default_value = "min")]
    combine: CombineArg,
    /// Widening of region windows for side estimation, as a fraction of L.
    #[arg(long, default_value_t = 2.0)]
    side_pad: f64,
    /// Spread used to split bright and dark region pixels.
    #[arg(long, value_enum, default_value = "std")]
    spread: SpreadArg,
    /// Skip the complement stage of cis+ser.
    #[arg(long)]
    no_complement: bool,
    /// Single-threaded execution.
    #[arg(long)]
    sequential: bool,
}

impl Thresholds {
    fn config(&self, method: Method) -> DetectConfig {
        let spread = match self.spread {
            SpreadArg::Std => Spread::StdDev,
            SpreadArg::Var => Spread::Variance,
        };
        let base = DetectConfig::default();
        DetectConfig {
            method,
            th_l: self.th_l,
            th_h: self.th_h,
            cis: CisParams { n_p: self.n_p, flat_tol: self.flat_tol, max_len: self.max_len },
            ser: SerThresholds {
                th_m: self.th_m,
                th_theta: self.th_theta,
                th_ev: self.th_ev,
                th_r: self.th_r,
                k_max: self.k_max,
                combine: match self.combine {
                    CombineArg::Min => Combine::Min,
                    CombineArg::Max => Combine::Max,
                },
                spread,
                side_pad: self.side_pad,
                ..SerThresholds::default()
            },
            complement: (!self.no_complement).then_some(ComplementParams { th_c: self.th_c }),
            exec: if self.sequential { Exec::Sequential } else { Exec::Parallel },
            ..base
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value = "cis+ser")]
    method: MethodArg,
    /// Also write the points over a 4× upscaled copy of the input.
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[command(flatten)]
    th: Thresholds,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Circle,
    Line,
    Slant,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: KindArg,
    /// Gaussian kernel size (circle, slant).
    #[arg(long, default_value_t = 3)]
    kg: usize,
    /// Signal-to-noise ratio in dB.
    #[arg(long, default_value_t = 100.0)]
    snr: f64,
    /// Line blur σ_L.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Line edge offset from the centre row.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    l: f64,
    /// Slant boundary slope.
    #[arg(long, default_value_t = 1)]
    slope: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// File stem; derived from the parameters by default.
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    kind: KindArg,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cis,cis+ser")]
    methods: Vec<MethodArg>,
    /// Samples per cell (per line offset for the line grid).
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slant grid blur.
    #[arg(long, default_value_t = 5)]
    kg: usize,
    /// Slant grid SNR.
    #[arg(long, default_value_t = 85.0)]
    snr: f64,
    /// Report CSV.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    /// Optional gnuplot data file.
    #[arg(long)]
    dat: Option<PathBuf>,
    #[command(flatten)]
    th: Thresholds,
}

#[derive(Args)]
struct StatsArgs {
    inputs: Vec<PathBuf>,
    /// Label for the edge_class column.
    #[arg(long, default_value = "all")]
    class: String,
    #[arg(long, default_value_t = 80.0)]
    th_l: f64,
    #[arg(long, default_value_t = 100.0)]
    th_h: f64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not an unsigned integer")),
        Err(_) => Ok(flag),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn overlay(img: &ImageBuffer, points: &[cisedge::SubpixelPoint]) -> ImageBuffer {
    let s = OVERLAY_SCALE;
    let mut out = ImageBuffer::from_fn(img.width() * s, img.height() * s, |x, y| 0.6 * img.get(x / s, y / s));
    for p in points {
        let (ux, uy) = ((p.x + 0.5) * s as f64, (p.y + 0.5) * s as f64);
        if ux >= 0.0 && uy >= 0.0 && (ux as usize) < out.width() && (uy as usize) < out.height() {
            out.set(ux as usize, uy as usize, 255.0);
        }
    }
    out
}

fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let img = load_grayscale(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let det = detect(&img, &a.th.config(a.method.into()))?;
    write(&a.output, &det.to_csv())?;
    if let Some(path) = &a.overlay {
        save_grayscale(path, &overlay(&img, &det.points)).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("{} edge pixels, {} regions, {} points", det.edge_pixels, det.regions, det.points.len());
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let seed = seed(a.seed)?;
    let spec = match a.kind {
        KindArg::Circle => SampleSpec::circle(a.kg, a.snr, seed),
        KindArg::Line => SampleSpec::line(a.sigma, a.l, a.snr, seed),
        KindArg::Slant => SampleSpec::slant(a.slope, a.kg, a.snr, seed),
    };
    let stem = a.stem.clone().unwrap_or_else(|| match a.kind {
        KindArg::Circle => format!("circle_kg{}_snr{}_seed{seed}", a.kg, a.snr),
        KindArg::Line => format!("line_sigma{}_snr{}_l{}_seed{seed}", a.sigma, a.snr, a.l),
        KindArg::Slant => format!("slant_slope{}_kg{}_snr{}_seed{seed}", a.slope, a.kg, a.snr),
    });
    write_sample(&a.out, &stem, &spec)?;
    println!("{}", a.out.join(format!("{stem}.pgm")).display());
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let mut suite = match a.kind {
        KindArg::Circle => Suite::circle_grid(),
        KindArg::Line => Suite::line_grid(),
        KindArg::Slant => Suite::slant_grid(a.kg, a.snr),
    };
    suite.methods = a.methods.iter().map(|&m| m.into()).collect();
    suite.samples = a.samples;
    suite.seed = seed(a.seed)?;
    suite.config = a.th.config(Method::Cis);
    suite.exec = suite.config.exec;
    let report = run_benchmark(&suite)?;
    write(&a.out, &report.to_csv())?;
    if let Some(dat) = &a.dat {
        write(dat, &report.to_dat())?;
    }
    print!("{}", report.summary());
    Ok(())
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    if a.inputs.is_empty() {
        bail!("no input images");
    }
    let mut total = ConsistencyReport { total_edge_pixels: 0, regions_examined: 0, regions_passing: 0 };
    for path in &a.inputs {
        let img = load_grayscale(path).with_context(|| format!("reading {}", path.display()))?;
        let edges = detect_edges_with_margin(&sobel_gradients(&img)?, a.th_l, a.th_h, 4);
        let r = consistency_stats(&img, &edges);
        total.total_edge_pixels += r.total_edge_pixels;
        total.regions_examined += r.regions_examined;
        total.regions_passing += r.regions_passing;
    }
    let csv = format!("{}\n{}\n", ConsistencyReport::CSV_HEADER, total.csv_row(&a.class));
    match &a.out {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Detect(a) => cmd_detect(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Stats(a) => cmd_stats(&a),
    }
}
