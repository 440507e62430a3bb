//! The `aclbf` command line.
//!
//! Exit codes: 0 converged (or command succeeded), 1 runtime error,
//! 2 segmentation stopped at `--max-iters`, 64 invalid flags.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aclbf_core::iglim::{self, IglimOutput};
use aclbf_core::{segment, GrayImage, PixelSet, RunConfig, Scheme, SidePolicy, StabilizerPolicy};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench_fixture, fixture_paths, load_fixture, suite_config, LoadedFixture};
use crate::dct::FastDct;
use crate::error::Error;
use crate::io::{
    field_sign_to_gray, load_gray, overlay, write_mask, write_pgm, write_png_rgb, write_ppm,
};
use crate::report::{bench_csv, energy_csv, OverlayFormat, RunSummary};
use crate::synth::{generate, suite, Shape, SynthParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_MAX_ITERS: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

const SYMBOLS: &str = "\
Parameter symbols:
  --mu μ             fitting strength
  --lambda1 λ₁       inside fitting weight
  --lambda2 λ₂       outside fitting weight
  --sigma σ          Gaussian kernel width (pixels)
  --eps ε            diffuse-interface width
  --eps1 ε₁          Heaviside smoothing width
  --h h              pixel spacing
  --dt Δt            time step
  --lambda λ         graph-Laplacian weight exponent
  --k1 k₁, --k2 k₂   zero-cross thresholds
  --denoise-passes M denoising passes
  --stabilizer S     auto: G/2+1, table: c·μ·ε₁, fixed: value

Intensities are normalized to [0, 1] before any parameter applies.

Exit codes: 0 converged, 1 error, 2 stopped at --max-iters, 64 invalid flags.";

#[derive(Debug, Parser)]
#[command(name = "aclbf", version, about = "Allen-Cahn local binary fitting segmentation", after_help = SYMBOLS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Initialize with IGLIM and evolve to a segmentation.
    #[command(after_help = SYMBOLS)]
    Segment(SegmentArgs),
    /// Run the initialization only and write its intermediate sets.
    #[command(after_help = SYMBOLS)]
    Iglim(IglimArgs),
    /// Write a synthetic image and its ground-truth mask.
    Synth(SynthArgs),
    /// Run ETD1 and ETDRK2 over a fixture set and tabulate iterations.
    ///
    /// Model defaults here are μ = 150000 and ε₁ = 1, the values the
    /// bundled fixtures are tuned for.
    #[command(after_help = SYMBOLS)]
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Auto,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Etd1,
    Etdrk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StabilizerArg {
    Auto,
    Table,
    Fixed,
}

/// Default multiplier `c` of the table stabilizer `S = c·μ·ε₁`.
pub const TABLE_MULTIPLIER: f64 = 10.0;

#[derive(Debug, Clone, Default, Args)]
pub struct IglimFlags {
    /// λ: graph-Laplacian weight exponent [default: 50]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// k₁: negative zero-cross threshold [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    /// k₂: positive zero-cross threshold [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    pub k2: Option<f64>,
    /// M: denoising passes [default: 1]
    #[arg(long)]
    pub denoise_passes: Option<usize>,
    /// Edge set used as the initial contour [default: auto]
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
}

impl IglimFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.iglim;
        set(&mut p.lambda, self.lambda);
        set(&mut p.k1, self.k1);
        set(&mut p.k2, self.k2);
        set(&mut p.denoise_passes, self.denoise_passes);
        if let Some(s) = self.side {
            p.side = match s {
                SideArg::Auto => SidePolicy::Auto,
                SideArg::Positive => SidePolicy::Positive,
                SideArg::Negative => SidePolicy::Negative,
            };
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// μ: fitting strength [default: 40000]
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// σ: Gaussian kernel width in pixels [default: 3]
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// ε: diffuse-interface width [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// ε₁: Heaviside smoothing width [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub eps1: Option<f64>,
    /// Δt: time step [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// h: pixel spacing [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// λ₁: inside fitting weight [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda1: Option<f64>,
    /// λ₂: outside fitting weight [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    /// Time stepper [default: etdrk2]
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// S policy [default: auto]
    #[arg(long, value_enum)]
    pub stabilizer: Option<StabilizerArg>,
    /// Multiplier c for `table` (default 10), S itself for `fixed`
    #[arg(long, requires = "stabilizer", allow_negative_numbers = true)]
    pub stabilizer_value: Option<f64>,
    /// Iteration cap [default: 500]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Energy increase tolerated per ETDRK2 step [default: 0.0001]
    #[arg(long, allow_negative_numbers = true)]
    pub rk2_slack: Option<f64>,
    /// Fail instead of counting energy increases beyond tolerance
    #[arg(long)]
    pub strict_energy: bool,
}

impl ModelFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), String> {
        let m = &mut cfg.model;
        set(&mut m.mu, self.mu);
        set(&mut m.sigma, self.sigma);
        set(&mut m.eps, self.eps);
        set(&mut m.eps1, self.eps1);
        set(&mut m.dt, self.dt);
        set(&mut m.h, self.h);
        set(&mut m.lambda1, self.lambda1);
        set(&mut m.lambda2, self.lambda2);
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Etd1 => Scheme::Etd1,
                SchemeArg::Etdrk2 => Scheme::Etdrk2,
            };
        }
        if let Some(s) = self.stabilizer {
            cfg.stabilizer = match s {
                StabilizerArg::Auto => StabilizerPolicy::Auto,
                StabilizerArg::Table => StabilizerPolicy::Table {
                    multiplier: self.stabilizer_value.unwrap_or(TABLE_MULTIPLIER),
                },
                StabilizerArg::Fixed => StabilizerPolicy::Fixed {
                    value: self
                        .stabilizer_value
                        .ok_or("--stabilizer fixed needs --stabilizer-value")?,
                },
            };
        }
        set(&mut cfg.max_iters, self.max_iters);
        set(&mut cfg.rk2_slack, self.rk2_slack);
        if self.strict_energy {
            cfg.strict_energy = true;
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Grayscale PGM (P5) or 8-bit PNG
    #[arg(long, required_unless_present = "replay")]
    pub input: Option<PathBuf>,
    /// Directory for mask.pgm, overlay, energy.csv and run.json
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Start from the input and configuration recorded in a run.json;
    /// other flags override it
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub overlay_format: Option<OverlayFormat>,
    #[command(flatten)]
    pub iglim: IglimFlags,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, Args)]
pub struct IglimArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for edges_p.pgm, edges_n.pgm, init_region.pgm and u0.pgm
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    #[command(flatten)]
    pub iglim: IglimFlags,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub shape: Shape,
    /// Side length of the square image
    #[arg(long, default_value_t = 100)]
    pub size: usize,
    /// Disk radius in pixels [default: size/4]
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Object intensity in [0, 1]
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub fg: f64,
    /// Background intensity in [0, 1]
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub bg: f64,
    /// Illumination change across the width [default: 0.4 for ramp-disk, 0.2 for vessel, else 0]
    #[arg(long, allow_negative_numbers = true)]
    pub gradient: Option<f64>,
    /// Gaussian noise variance on the 0–255 scale
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise_var: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File stem [default: the shape name]
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `<name>.pgm` images with optional `<name>_truth.pgm`
    /// masks [default: the built-in suite]
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// CSV destination [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub iglim: IglimFlags,
    #[command(flatten)]
    pub model: ModelFlags,
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Segment(a) => cmd_segment(&a),
        Command::Iglim(a) => cmd_iglim(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Core(c @ aclbf_core::Error::InvalidParameter { .. }) => {
                Failure::Usage(c.to_string())
            }
            other => Failure::Runtime(other),
        }
    }
}

impl From<aclbf_core::Error> for Failure {
    fn from(e: aclbf_core::Error) -> Self {
        Error::from(e).into()
    }
}

type Outcome = Result<u8, Failure>;

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(Error::io(dir, e)))
}

fn cmd_segment(a: &SegmentArgs) -> Outcome {
    let (mut cfg, mut input, mut format) = match &a.replay {
        Some(path) => {
            let s = RunSummary::read(path)?;
            (s.config, Some(s.input), s.overlay_format)
        }
        None => (RunConfig::default(), None, OverlayFormat::default()),
    };
    a.iglim.apply(&mut cfg);
    a.model.apply(&mut cfg).map_err(Failure::Usage)?;
    cfg.validate()?;
    if let Some(i) = &a.input {
        input = Some(i.clone());
    }
    if let Some(f) = a.overlay_format {
        format = f;
    }
    let input = input.ok_or_else(|| Failure::Usage("missing --input".into()))?;

    let image = load_gray(&input)?;
    ensure_dir(&a.output)?;
    let dct = FastDct::new(image.dims());
    let start = Instant::now();
    let result = segment(&image, &cfg, &dct, || start.elapsed().as_secs_f64() * 1e3)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if let (SidePolicy::Auto, Some(d)) = (cfg.iglim.side, &result.iglim) {
        eprintln!(
            "iglim: auto side {:?}, {} region pixels",
            d.side, d.region_size
        );
    }

    let out = &a.output;
    write_mask(&result.mask, &out.join("mask.pgm"))?;
    let rgb = overlay(&image, &result.mask)?;
    let overlay_path = out.join(format.file_name());
    match format {
        OverlayFormat::Ppm => write_ppm(&rgb, &overlay_path)?,
        OverlayFormat::Png => write_png_rgb(&rgb, &overlay_path)?,
    }
    let csv_path = out.join("energy.csv");
    fs::write(&csv_path, energy_csv(&result.trace))
        .map_err(|e| Failure::Runtime(Error::io(&csv_path, e)))?;
    RunSummary::new(&input, cfg, format, &result, wall_ms).write(&out.join("run.json"))?;

    if result.energy_violations > 0 {
        eprintln!(
            "warning: {} steps raised the energy beyond tolerance",
            result.energy_violations
        );
    }
    if result.converged {
        eprintln!("converged after {} iterations", result.iterations);
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "stopped at max_iters = {} without convergence",
            cfg.max_iters
        );
        Ok(EXIT_MAX_ITERS)
    }
}

/// Writes the four IGLIM rasters into `out`.
pub fn write_iglim_outputs(init: &IglimOutput, out: &Path) -> crate::Result<()> {
    let as_mask = |s: &PixelSet| s.to_mask();
    write_mask(&as_mask(&init.positive.points), &out.join("edges_p.pgm"))?;
    write_mask(&as_mask(&init.negative.points), &out.join("edges_n.pgm"))?;
    write_mask(&as_mask(&init.region), &out.join("init_region.pgm"))?;
    write_pgm(&field_sign_to_gray(&init.u0), &out.join("u0.pgm"))
}

fn cmd_iglim(a: &IglimArgs) -> Outcome {
    let mut cfg = RunConfig::default();
    a.iglim.apply(&mut cfg);
    cfg.iglim.validate()?;
    let image: GrayImage = load_gray(&a.input)?;
    let init = iglim::run(&image, &cfg.iglim)?;
    ensure_dir(&a.output)?;
    write_iglim_outputs(&init, &a.output)?;
    let d = init.diagnostics();
    eprintln!(
        "iglim: {} positive, {} negative edge points; side {:?}; {} region pixels",
        d.positive_points, d.negative_points, d.side, d.region_size
    );
    Ok(EXIT_OK)
}

fn cmd_synth(a: &SynthArgs) -> Outcome {
    let mut params = SynthParams::new(a.shape, a.size);
    set(&mut params.radius, a.radius);
    set(&mut params.gradient, a.gradient);
    params.fg = a.fg;
    params.bg = a.bg;
    params.noise_var = a.noise_var;
    params.seed = a.seed;
    params.validate().map_err(Failure::Usage)?;
    let f = generate(&params);
    let stem = a.name.clone().unwrap_or(f.name);
    ensure_dir(&a.output)?;
    write_pgm(&f.image, &a.output.join(format!("{stem}.pgm")))?;
    write_mask(&f.truth, &a.output.join(format!("{stem}_truth.pgm")))?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs) -> Outcome {
    let mut cfg = suite_config();
    a.iglim.apply(&mut cfg);
    a.model.apply(&mut cfg).map_err(Failure::Usage)?;
    cfg.validate()?;

    let mut log = |m: String| eprintln!("bench: {m}");
    let mut rows = Vec::new();
    match &a.fixtures {
        None => {
            for f in suite() {
                rows.extend(bench_fixture(&LoadedFixture::from(&f), &cfg, &mut log));
            }
        }
        Some(dir) => {
            for path in fixture_paths(dir)? {
                match load_fixture(&path) {
                    Ok(f) => rows.extend(bench_fixture(&f, &cfg, &mut log)),
                    Err(e) => {
                        log(e.to_string());
                        let name = path
                            .file_stem()
                            .and_then(|s| s.to_str())
                            .unwrap_or_default();
                        for scheme in [Scheme::Etd1, Scheme::Etdrk2] {
                            rows.push(crate::report::BenchRow {
                                fixture: name.to_string(),
                                scheme,
                                iters: None,
                                wall_ms: 0.0,
                                dice: None,
                            });
                        }
                    }
                }
            }
        }
    }
    let csv = bench_csv(&rows);
    match &a.output {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                ensure_dir(parent)?;
            }
            fs::write(path, csv).map_err(|e| Failure::Runtime(Error::io(path, e)))?;
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}
