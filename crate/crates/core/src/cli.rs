//! `rspose` command line. Exit codes: 0 success, 1 runtime or data failure,
//! 2 usage, configuration or unreadable input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{format_motion, format_scene, load_motion, load_scene, RunConfig};
use crate::geom::{row_pose, FrameId, RotationModel};
use crate::image::{masked_rmse, INVALID};
use crate::io;
use crate::rectify::{correct_image, fill_holes, ground_truth_matches, overlay_diff, render_gs, synthesize_rs, PlaneScene};
use crate::simgen::{run_sweep, sweep_csv, SweepVariable};
use crate::solver::{ransac_solve, solve_relative_pose_with, MotionEstimate, ScaleStatus};
use crate::stereo::{compute_disparity, depth_map};
use crate::{svg, Error};

#[derive(Debug, Parser)]
#[command(name = "rspose", version, about = "Stereo rolling-shutter relative pose, SGM depth and rectification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Image {
    I1,
    I2,
    I3,
    I4,
}

impl From<Image> for FrameId {
    fn from(i: Image) -> FrameId {
        match i {
            Image::I1 => FrameId::I1,
            Image::I2 => FrameId::I2,
            Image::I3 => FrameId::I3,
            Image::I4 => FrameId::I4,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a parameter sweep and write its CSV plus an SVG chart next to it.
    Simulate {
        /// noise, translation_speed, rotation_speed, readout_ratio or baseline.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the motion from a correspondence CSV.
    Solve {
        matches: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ransac: bool,
        /// Per-match inlier flags (with --ransac).
        #[arg(long)]
        inliers: Option<PathBuf>,
        /// Report file; it doubles as a motion file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SGM disparity and depth of a stereo pair.
    Depth {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Depth PFM.
        #[arg(long)]
        out: PathBuf,
        /// Disparity PFM; defaults to `<out stem>_disparity.pfm`.
        #[arg(long)]
        disparity: Option<PathBuf>,
    },
    /// Render the four rolling-shutter images of a plane scene with ground truth.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Plane-scene file; a built-in layered scene otherwise.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Warp a rolling-shutter image to the pose of its first row.
    Rectify {
        image: PathBuf,
        depth: PathBuf,
        motion: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "i1")]
        frame: Image,
        /// Global-shutter reference for overlays and RMSE.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Skip the median hole-filling pass.
        #[arg(long)]
        no_fill: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

trait Stage<T> {
    /// Reading inputs and configuration.
    fn input(self) -> CliResult<T>;
    /// Everything after the inputs are in memory.
    fn runtime(self) -> CliResult<T>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn input(self) -> CliResult<T> {
        self.map_err(|e| Failure::Usage(e.to_string()))
    }
    fn runtime(self) -> CliResult<T> {
        self.map_err(|e| Failure::Runtime(e.to_string()))
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p).input()?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn sibling(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Runs the CLI on `args` (including the program name), printing to
/// stdout/stderr, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}

/// Runs one command and returns its summary text.
pub fn execute(cmd: Command) -> CliResult<String> {
    match cmd {
        Command::Simulate { sweep, config, seed, trials, out } => {
            let var = SweepVariable::parse(&sweep).ok_or_else(|| {
                let names: Vec<_> = SweepVariable::ALL.iter().map(|v| v.name()).collect();
                Failure::Usage(format!("unknown sweep `{sweep}` (expected one of {})", names.join(", ")))
            })?;
            let mut cfg = load_config(config.as_deref(), seed)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.validate().input()?;
            simulate(&cfg, var, &out)
        }
        Command::Solve { matches, config, seed, ransac, inliers, out } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let (left, right) = io::read_correspondences(&matches).input()?;
            solve(&cfg, &left, &right, ransac, inliers.as_deref(), out.as_deref())
        }
        Command::Depth { left, right, config, out, disparity } => {
            let cfg = load_config(config.as_deref(), None)?;
            let l = io::read_pgm(&left).input()?;
            let r = io::read_pgm(&right).input()?;
            let disp_path = disparity.unwrap_or_else(|| sibling(&out, "_disparity", "pfm"));
            depth(&cfg, &l, &r, &out, &disp_path)
        }
        Command::Synth { config, seed, scene, out } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let scene = match scene {
                Some(p) => load_scene(&p).input()?,
                None => PlaneScene::layered(cfg.seed),
            };
            synth(&cfg, &scene, &out)
        }
        Command::Rectify { image, depth, motion, config, frame, reference, no_fill, out } => {
            let cfg = load_config(config.as_deref(), None)?;
            let img = io::read_pgm(&image).input()?;
            let z = io::read_pfm(&depth).input()?;
            let m = load_motion(&motion).input()?;
            let reference = reference.map(|p| io::read_pgm(&p)).transpose().input()?;
            rectify(&cfg, &img, &z, &m, frame.into(), reference.as_ref(), !no_fill, &out)
        }
    }
}

fn simulate(cfg: &RunConfig, var: SweepVariable, out: &Path) -> CliResult<String> {
    let rows = run_sweep(&cfg.sweep_spec(var)).runtime()?;
    io::write_text(out, &sweep_csv(&rows)).runtime()?;
    let chart = sibling(out, "", "svg");
    io::write_text(&chart, &svg::sweep_chart(var.name(), &rows)).runtime()?;
    let mut s = format!("wrote {} rows to {} and chart {}\n", rows.len(), out.display(), chart.display());
    for r in &rows {
        let _ = writeln!(
            s,
            "{} = {:<10} {}  e_T {:.3e}  e_R {:.3e}  failures {}/{}",
            var.name(),
            r.value,
            r.solver.name(),
            r.mean_e_t,
            r.mean_e_r,
            r.failures,
            r.trials
        );
    }
    Ok(s)
}

fn report(est: &MotionEstimate, n_left: usize, n_right: usize, inliers: Option<(usize, usize)>) -> String {
    let mut s = String::from("# rspose solve report\n");
    let _ = writeln!(s, "# matches: left {n_left}, right {n_right}");
    if let Some((l, r)) = inliers {
        let _ = writeln!(s, "# inliers: left {l}/{n_left}, right {r}/{n_right}");
    }
    let dd = est.d_direction;
    let _ = writeln!(s, "# d_direction: {} {} {}", dd[0], dd[1], dd[2]);
    let _ = writeln!(
        s,
        "# scale: {}",
        match est.scale_status {
            ScaleStatus::Metric => "metric",
            ScaleStatus::DirectionOnly => "direction_only (d below is a unit vector)",
        }
    );
    let _ = writeln!(s, "# consistent: {}", est.consistent);
    if let Some(d) = est.diagnostics {
        let _ = writeln!(s, "# sigma_min: {:e}", d.sigma_smallest);
        let _ = writeln!(s, "# sigma_second: {:e}", d.sigma_second);
        let _ = writeln!(s, "# sigma_ratio: {:e}", d.ratio());
    }
    s.push_str(&format_motion(&est.motion()));
    s
}

fn solve(
    cfg: &RunConfig,
    left: &[crate::solver::Correspondence],
    right: &[crate::solver::Correspondence],
    ransac: bool,
    inliers_path: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<String> {
    let k = cfg.intrinsics().input()?;
    let rig = cfg.rig().input()?;
    let text = if ransac {
        let res = ransac_solve(left, right, &rig, &k, &cfg.ransac_options()).runtime()?;
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        let path = inliers_path.map(Path::to_path_buf).or_else(|| out.map(|o| sibling(o, "_inliers", "csv")));
        if let Some(p) = path {
            let mut csv = String::from("side,index,inlier\n");
            for (side, mask) in [("L", &res.inliers_left), ("R", &res.inliers_right)] {
                for (i, &m) in mask.iter().enumerate() {
                    let _ = writeln!(csv, "{side},{i},{}", m as u8);
                }
            }
            io::write_text(&p, &csv).runtime()?;
        }
        report(&res.estimate, left.len(), right.len(), Some((count(&res.inliers_left), count(&res.inliers_right))))
    } else {
        let est = solve_relative_pose_with(left, right, &rig, &k, &cfg.solver_options()).runtime()?;
        report(&est, left.len(), right.len(), None)
    };
    if let Some(p) = out {
        io::write_text(p, &text).runtime()?;
    }
    Ok(text)
}

fn depth(cfg: &RunConfig, l: &crate::image::GrayImage, r: &crate::image::GrayImage, out: &Path, disp_path: &Path) -> CliResult<String> {
    let disp = compute_disparity(l, r, &cfg.sgm()).runtime()?;
    let z = depth_map(&disp, cfg.fy, cfg.half_baseline);
    io::write_pfm(disp_path, &disp).runtime()?;
    io::write_pfm(out, &z).runtime()?;
    let valid = disp.data().iter().filter(|&&d| d != INVALID).count();
    Ok(format!(
        "valid disparities: {valid}/{} ({:.1}%)\nwrote {} and {}\n",
        disp.data().len(),
        100.0 * valid as f64 / disp.data().len() as f64,
        disp_path.display(),
        out.display()
    ))
}

fn synth(cfg: &RunConfig, scene: &PlaneScene, out: &Path) -> CliResult<String> {
    let k = cfg.intrinsics().input()?;
    let rig = cfg.rig().input()?;
    let motion = cfg.motion();
    let model = cfg.rotation_model;
    std::fs::create_dir_all(out).map_err(|e| Failure::Runtime(Error::io(out, e).to_string()))?;
    let mut depths = Vec::with_capacity(4);
    for id in FrameId::ALL {
        let n = id.index();
        let (img, z) = synthesize_rs(scene, &k, &rig, id, &motion, model).runtime()?;
        let (gs, _) = render_gs(scene, &k, &row_pose(&rig, id, 0.0, &motion).runtime()?, model);
        io::write_pgm(&out.join(format!("i{n}.pgm")), &img).runtime()?;
        io::write_pgm(&out.join(format!("gs_i{n}.pgm")), &gs).runtime()?;
        io::write_pfm(&out.join(format!("depth_i{n}.pfm")), &z).runtime()?;
        depths.push(z);
    }
    let depths: [_; 4] = depths.try_into().expect("four images");
    let (left, right) = ground_truth_matches(scene, &k, &rig, &motion, model, &depths, cfg.point_count, cfg.seed).runtime()?;
    io::write_text(&out.join("matches.csv"), &io::format_correspondences(&left, &right)).runtime()?;
    io::write_text(&out.join("motion.txt"), &format_motion(&motion)).runtime()?;
    io::write_text(&out.join("config.txt"), &cfg.serialize()).runtime()?;
    io::write_text(&out.join("scene.txt"), &format_scene(scene)).runtime()?;
    Ok(format!(
        "wrote i1-i4, gs_i1-gs_i4, depth_i1-depth_i4, matches.csv ({} left, {} right), motion.txt to {}\n",
        left.len(),
        right.len(),
        out.display()
    ))
}

#[allow(clippy::too_many_arguments)]
fn rectify(
    cfg: &RunConfig,
    img: &crate::image::GrayImage,
    z: &crate::image::FloatImage,
    motion: &crate::geom::MotionVelocity,
    id: FrameId,
    reference: Option<&crate::image::GrayImage>,
    fill: bool,
    out: &Path,
) -> CliResult<String> {
    let k = cfg.intrinsics().input()?;
    let rig = cfg.rig().input()?;
    let model: RotationModel = cfg.rotation_model;
    let (mut corrected, mut mask) = correct_image(img, z, &k, &rig, id, motion, model).runtime()?;
    if fill {
        (corrected, mask) = fill_holes(&corrected, &mask).runtime()?;
    }
    io::write_pgm(out, &corrected).runtime()?;
    let mask_path = sibling(out, "_mask", "pgm");
    io::write_mask(&mask_path, &mask).runtime()?;
    let valid = mask.data().iter().filter(|&&m| m).count();
    let mut s = format!("wrote {} and {}\nvalid pixels: {valid}/{}\n", out.display(), mask_path.display(), mask.data().len());
    if let Some(gs) = reference {
        img.check_same_size(gs).runtime()?;
        io::write_ppm(&sibling(out, "_overlay_rs", "ppm"), &overlay_diff(img, gs).runtime()?).runtime()?;
        io::write_ppm(&sibling(out, "_overlay_corrected", "ppm"), &overlay_diff(&corrected, gs).runtime()?).runtime()?;
        let before = masked_rmse(img, gs, &mask).runtime()?;
        let after = masked_rmse(&corrected, gs, &mask).runtime()?;
        if let (Some(b), Some(a)) = (before, after) {
            let _ = writeln!(s, "rmse_before = {b:.4}\nrmse_after = {a:.4}\nreduction = {:.2}%", 100.0 * (1.0 - a / b));
        } else {
            s.push_str("no valid pixels to compare\n");
        }
    }
    Ok(s)
}
