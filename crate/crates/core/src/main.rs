use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;

use mpiview::align::{apply_scale_shift, fit_scale_shift};
use mpiview::alpha::HalfGaussian;
use mpiview::baseline::{
    diffusion_inpaint, median_filter_disparity, threshold_occlusion_mask, warp_single_image, DiffusionParams,
    VisibilityMask, DEFAULT_MASK_RATIO, DEFAULT_MASK_WINDOW, DEFAULT_MEDIAN_WINDOW,
};
use mpiview::blend::{build_mpi, identity_mpi, BlendWeights};
use mpiview::io::png::{save_image_png, PngDepth};
use mpiview::io::{self, pfm};
use mpiview::render::{circle_path, grid_path, render_novel_view, zoom_path};
use mpiview::{plane_depths, CameraIntrinsics, CameraPose, DisparityUnit, Error, ImageBuffer, Result};

#[derive(Parser)]
#[command(name = "mpiview", version, about = "Build, render and inspect multiplane images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an MPI archive from a color image and a disparity map.
    Build(BuildArgs),
    /// Render one novel view of an MPI archive.
    Render(RenderArgs),
    /// Render a camera path (grid, circle or zoom) to numbered PNG frames.
    Path(PathArgs),
    /// Single-image warping baseline with optional diffusion inpainting.
    Baseline(BaselineArgs),
    /// Fit scale/shift from relative to absolute disparity and write the aligned map.
    Align(AlignArgs),
    /// Sample training frame pairs from a camera trajectory.
    SamplePairs(SamplePairsArgs),
    /// Export an MPI archive for the browser viewer.
    ExportWeb(ExportWebArgs),
}

#[derive(Args, Clone, Copy)]
struct IntrinsicsArgs {
    /// Focal length in pixels (default: image width).
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    /// Principal point in pixels (default: image center).
    #[arg(long)]
    cx: Option<f64>,
    #[arg(long)]
    cy: Option<f64>,
}

impl IntrinsicsArgs {
    fn resolve(&self, width: usize, height: usize, base: Option<CameraIntrinsics>) -> Result<CameraIntrinsics> {
        let base = base.unwrap_or_else(|| CameraIntrinsics::centered(width, height));
        CameraIntrinsics::new(
            self.fx.unwrap_or(base.fx),
            self.fy.unwrap_or(self.fx.unwrap_or(base.fy)),
            self.cx.unwrap_or(base.cx),
            self.cy.unwrap_or(base.cy),
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Normalized,
    InverseMeters,
}

impl From<UnitArg> for DisparityUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Normalized => DisparityUnit::Normalized,
            UnitArg::InverseMeters => DisparityUnit::InverseMeters,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    fg: PathBuf,
    /// PFM or 16-bit PNG disparity.
    #[arg(long)]
    disparity: PathBuf,
    /// Background color image; requires --weights.
    #[arg(long, requires = "weights")]
    bg: Option<PathBuf>,
    /// Blend weights as one gray PFM with the K planes stacked vertically.
    #[arg(long, requires = "bg")]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    planes: usize,
    #[arg(long, default_value_t = 1.0)]
    near: f64,
    #[arg(long, default_value_t = 100.0)]
    far: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    #[arg(long, default_value_t = 31)]
    window: usize,
    /// How PFM disparity values are interpreted.
    #[arg(long, value_enum, default_value = "normalized")]
    disparity_unit: UnitArg,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    mpi: PathBuf,
    /// "tx,ty,tz[,rx,ry,rz]": translation in meters, optional axis-angle rotation in radians.
    #[arg(long, allow_hyphen_values = true)]
    pose: String,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 8)]
    bit_depth: u8,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathKindArg {
    Grid,
    Circle,
    Zoom,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long)]
    mpi: PathBuf,
    #[arg(long, value_enum)]
    kind: PathKindArg,
    /// Grid side length, or frame count for circle/zoom.
    #[arg(long, default_value_t = 7)]
    n: usize,
    /// Grid half-extent, circle radius or zoom distance, in meters.
    #[arg(long, default_value_t = 0.3)]
    extent: f64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum InpaintArg {
    Diffusion,
    None,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    fg: PathBuf,
    #[arg(long)]
    disparity: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pose: String,
    #[arg(long, value_enum, default_value = "diffusion")]
    inpaint: InpaintArg,
    #[arg(long, default_value_t = DEFAULT_MEDIAN_WINDOW)]
    median_window: usize,
    #[arg(long, default_value_t = DEFAULT_MASK_WINDOW)]
    mask_window: usize,
    #[arg(long, default_value_t = DEFAULT_MASK_RATIO)]
    mask_ratio: f64,
    /// Also write the final visibility mask as a gray PNG.
    #[arg(long)]
    mask_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "normalized")]
    disparity_unit: UnitArg,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    relative: PathBuf,
    #[arg(long)]
    absolute: PathBuf,
    /// Optional gray PNG; pixels above 0.5 take part in the fit.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SamplePairsArgs {
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Number of pairs (default: one per 10 frames).
    #[arg(long)]
    count: Option<usize>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct ExportWebArgs {
    #[arg(long)]
    mpi: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

fn parse_pose(s: &str) -> Result<CameraPose> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Argument(format!("pose {s:?} is not a comma-separated list of numbers")))?;
    match vals.as_slice() {
        [tx, ty, tz] => Ok(CameraPose::from_translation(*tx, *ty, *tz)),
        [tx, ty, tz, rx, ry, rz] => {
            CameraPose::from_axis_angle(Vector3::new(*rx, *ry, *rz), Vector3::new(*tx, *ty, *tz))
        }
        _ => Err(Error::Argument(format!("pose {s:?} needs 3 or 6 values"))),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_weights(path: &Path, planes: usize, width: usize, height: usize) -> Result<BlendWeights> {
    let p = pfm::Pfm::read(path)?;
    if p.channels != 1 || p.width != width || p.height != planes * height {
        return Err(Error::Parse {
            context: path.display().to_string(),
            message: format!(
                "weights must be a gray {width}x{} PFM ({planes} stacked {width}x{height} planes), got {}x{}x{}",
                planes * height,
                p.width,
                p.height,
                p.channels
            ),
        });
    }
    BlendWeights::new(planes, width, height, p.data)
}

fn build(a: BuildArgs) -> Result<()> {
    let fg = io::load_image(&a.fg)?.to_channels(3)?;
    let d = io::load_disparity(&a.disparity, a.disparity_unit.into())?;
    let depths = plane_depths(a.planes, a.near, a.far)?;
    let intr = a.intrinsics.resolve(fg.width(), fg.height(), None)?;
    let alpha = HalfGaussian {
        sigma: a.sigma,
        window: a.window,
        peak: 1.0,
    };
    let mpi = match (&a.bg, &a.weights) {
        (Some(bg), Some(w)) => {
            let bg = io::load_image(bg)?.to_channels(3)?;
            let weights = load_weights(w, a.planes, fg.width(), fg.height())?;
            build_mpi(&fg, &bg, &weights, &d, depths, intr, &alpha)?
        }
        _ => identity_mpi(&fg, &d, depths, intr, &alpha)?,
    };
    io::save_mpi(&mpi, &a.output)
}

fn render(a: RenderArgs) -> Result<()> {
    let mpi = io::load_mpi(&a.mpi)?;
    let pose = parse_pose(&a.pose)?;
    let size = (a.width.unwrap_or(mpi.width()), a.height.unwrap_or(mpi.height()));
    let intr = a.intrinsics.resolve(size.0, size.1, Some(*mpi.intrinsics()))?;
    let depth = match a.bit_depth {
        8 => PngDepth::Eight,
        16 => PngDepth::Sixteen,
        n => return Err(Error::Argument(format!("bit depth must be 8 or 16, got {n}"))),
    };
    let img = render_novel_view(&mpi, &pose, &intr, size)?;
    save_image_png(&a.output, &img, depth)
}

fn path(a: PathArgs) -> Result<()> {
    let mpi = io::load_mpi(&a.mpi)?;
    let path = match a.kind {
        PathKindArg::Grid => grid_path(a.n, a.extent)?,
        PathKindArg::Circle => circle_path(a.extent, a.n)?,
        PathKindArg::Zoom => zoom_path(a.extent, a.n)?,
    };
    ensure_dir(&a.output)?;
    let mut poses = String::from("# frame tx ty tz\n");
    for (i, pose) in path.poses().iter().enumerate() {
        let img = render_novel_view(&mpi, pose, mpi.intrinsics(), (mpi.width(), mpi.height()))?;
        save_image_png(&a.output.join(format!("frame_{i:04}.png")), &img, PngDepth::Eight)?;
        let t = pose.translation();
        let _ = writeln!(poses, "{i} {} {} {}", t.x, t.y, t.z);
    }
    write_text(&a.output.join("poses.txt"), &poses)
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let fg = io::load_image(&a.fg)?.to_channels(3)?;
    let d = io::load_disparity(&a.disparity, a.disparity_unit.into())?;
    let pose = parse_pose(&a.pose)?;
    let intr = a.intrinsics.resolve(fg.width(), fg.height(), None)?;
    let filtered = median_filter_disparity(&d, a.median_window)?;
    let (warped, covered) = warp_single_image(&fg, &filtered, &pose, &intr)?;
    // keep a pixel only if it was hit and enough of its neighbours were too
    let mask = threshold_occlusion_mask(&covered, a.mask_window, a.mask_ratio)?.and(&covered)?;
    let out = match a.inpaint {
        InpaintArg::Diffusion => diffusion_inpaint(&warped, &mask, &DiffusionParams::default())?,
        InpaintArg::None => blank_invisible(&warped, &mask),
    };
    save_image_png(&a.output, &out, PngDepth::Eight)?;
    if let Some(p) = &a.mask_out {
        let m = ImageBuffer::from_vec(
            mask.width(),
            mask.height(),
            1,
            mask.data().iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        )?;
        save_image_png(p, &m, PngDepth::Eight)?;
    }
    Ok(())
}

fn blank_invisible(img: &ImageBuffer, mask: &VisibilityMask) -> ImageBuffer {
    let ch = img.channels();
    let mut out = img.clone();
    for (i, &vis) in mask.data().iter().enumerate() {
        if !vis {
            for c in 0..ch {
                out.set(i % img.width(), i / img.width(), c, 0.0);
            }
        }
    }
    out
}

fn align(a: AlignArgs) -> Result<()> {
    let rel = io::load_disparity(&a.relative, DisparityUnit::InverseMeters)?;
    let abs = io::load_disparity(&a.absolute, DisparityUnit::InverseMeters)?;
    let mask = match &a.mask {
        Some(p) => {
            let m = io::load_image(p)?.to_channels(1)?;
            Some(VisibilityMask::new(
                m.width(),
                m.height(),
                m.data().iter().map(|&v| v > 0.5).collect(),
            )?)
        }
        None => None,
    };
    let t = fit_scale_shift(&rel, &abs, mask.as_ref())?;
    println!("s={} b={}", t.scale, t.shift);
    io::save_disparity(&a.output, &apply_scale_shift(&rel, &t)?)
}

fn sample_pairs(a: SamplePairsArgs) -> Result<()> {
    let text = fs::read_to_string(&a.trajectory).map_err(|e| Error::Io {
        path: a.trajectory.clone(),
        source: e,
    })?;
    let traj = io::parse_trajectory(&text)?;
    let frames = traj.records.len();
    let count = a.count.unwrap_or((frames / 10).max(1));
    let pairs = io::sample_training_pairs(frames, a.seed, count)?;
    let mut out = String::from("# source target interval source_timestamp target_timestamp\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            p.source, p.target, p.interval, traj.records[p.source].timestamp, traj.records[p.target].timestamp
        );
    }
    write_text(&a.output, &out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Render(a) => render(a),
        Command::Path(a) => path(a),
        Command::Baseline(a) => baseline(a),
        Command::Align(a) => align(a),
        Command::SamplePairs(a) => sample_pairs(a),
        Command::ExportWeb(a) => io::load_mpi(&a.mpi).and_then(|m| io::export_web(&m, &a.output).map(|_| ())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
