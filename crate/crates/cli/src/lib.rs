//! `viewcurate` command-line driver.
//!
//! Every subcommand reads and validates all of its inputs before creating
//! any output, and echoes its effective configuration as `config.json` into
//! the output directory.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;

use config::PipelineConfig;
use viewcurate::clustering::{GroundHeight, Method};
use viewcurate::sampling::PoseMode;
use viewcurate::{Result, UpAxis};

/// Process exit status for a failed domain operation.
pub const EXIT_FAILURE: i32 = 1;
/// Process exit status for a command-line usage error.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "viewcurate", version, about = "Curate and augment aerial views for novel view synthesis")]
#[command(subcommand_required = true, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic city, survey scan and tracks.
    Synth(SynthArgs),
    /// Group real views into fixed-size clusters.
    Cluster(ClusterArgs),
    /// Place sampling domes over a point cloud and draw synthetic poses.
    Augment(AugmentArgs),
    /// Splat-render poses against a point cloud.
    Render(RenderArgs),
    /// Write a DTU-style scan tree for a manifest.
    ExportDtu(ExportArgs),
    /// Report intra-cluster shared points for a manifest.
    Eval(EvalArgs),
    /// Merge a real and a synthetic scan tree.
    Combine(CombineArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n_buildings: Option<usize>,
    #[arg(long)]
    pub points_per_building: Option<usize>,
    #[arg(long)]
    pub ground_points: Option<usize>,
    #[arg(long)]
    pub altitude: Option<f64>,
    #[arg(long)]
    pub line_spacing: Option<f64>,
    #[arg(long)]
    pub shot_spacing: Option<f64>,
    /// Camera tilt from nadir in degrees.
    #[arg(long)]
    pub pitch: Option<f64>,
    /// Insert mid-line 90 degree heading changes.
    #[arg(long)]
    pub abrupt_turns: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory with cameras.txt, images.txt and points3D.txt.
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub method: Method,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub num_clusters: Option<usize>,
    /// Maximum optical-axis deviation for grid clustering, in degrees.
    #[arg(long)]
    pub angle_threshold: Option<f64>,
    /// Ground height for ray clustering: a number or `estimate`.
    #[arg(long)]
    pub ground_height: Option<GroundHeight>,
    #[arg(long)]
    pub grid_cell_size: Option<f64>,
    #[arg(long, default_value = "+z", allow_hyphen_values = true)]
    pub up_axis: UpAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AugmentMode {
    Grid,
    Semantic,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub common: Common,
    /// ASCII PLY point cloud, Z up.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub mode: AugmentMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Real scene: synthetic image ids start after its largest id and its
    /// first camera model is reused.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub poses_per_dome: Option<usize>,
    #[arg(long)]
    pub pose_mode: Option<PoseMode>,
    #[arg(long)]
    pub slice_percentile: Option<f64>,
    #[arg(long)]
    pub merge_m: Option<usize>,
    #[arg(long)]
    pub mask_resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub points: PathBuf,
    /// Directory with the poses to render in SfM text form.
    #[arg(long)]
    pub poses: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub splat_radius: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    /// Point cloud for the depth range; defaults to the scene's points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Directory of `{image_id:08}.ppm` renders to copy into the scans.
    #[arg(long)]
    pub renders: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    /// Also write quality.json and config.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    #[command(flatten)]
    pub common: Common,
    /// Exported real scan tree.
    #[arg(long)]
    pub real: PathBuf,
    /// Exported synthetic scan tree.
    #[arg(long)]
    pub synthetic: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn base_config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => {
            let mut cfg = base_config(&a.common)?;
            let s = &mut cfg.synth;
            override_opt(&mut s.n_buildings, a.n_buildings);
            override_opt(&mut s.points_per_building, a.points_per_building);
            if a.ground_points.is_some() {
                s.ground_points = a.ground_points;
            }
            override_opt(&mut s.altitude, a.altitude);
            override_opt(&mut s.line_spacing, a.line_spacing);
            override_opt(&mut s.shot_spacing, a.shot_spacing);
            override_opt(&mut s.pitch_deg, a.pitch);
            s.abrupt_turns |= a.abrupt_turns;
            commands::synth(&cfg, &a.out)
        }
        Command::Cluster(a) => {
            let mut cfg = base_config(&a.common)?;
            let c = &mut cfg.clustering;
            c.k = a.k;
            if a.num_clusters.is_some() {
                c.num_clusters = a.num_clusters;
            }
            override_opt(&mut c.angle_threshold_deg, a.angle_threshold);
            override_opt(&mut c.ground_height, a.ground_height);
            if a.grid_cell_size.is_some() {
                c.grid_cell_size = a.grid_cell_size;
            }
            commands::cluster(&cfg, &a.scene, a.method, a.up_axis, &a.out)
        }
        Command::Augment(a) => {
            let mut cfg = base_config(&a.common)?;
            let s = &mut cfg.sampling;
            override_opt(&mut s.poses_per_dome, a.poses_per_dome);
            override_opt(&mut s.pose_mode, a.pose_mode);
            override_opt(&mut s.slice_percentile, a.slice_percentile);
            override_opt(&mut s.merge_m, a.merge_m);
            override_opt(&mut s.mask_resolution, a.mask_resolution);
            commands::augment(&cfg, &a.points, a.mode, a.scene.as_deref(), &a.out)
        }
        Command::Render(a) => {
            let mut cfg = base_config(&a.common)?;
            override_opt(&mut cfg.render.splat_radius, a.splat_radius);
            commands::render(&cfg, &a.points, &a.poses, &a.out)
        }
        Command::ExportDtu(a) => {
            let cfg = base_config(&a.common)?;
            commands::export_dtu(
                &cfg,
                &a.manifest,
                &a.scene,
                a.points.as_deref(),
                a.renders.as_deref(),
                &a.out,
            )
        }
        Command::Eval(a) => {
            let cfg = base_config(&a.common)?;
            commands::eval(&cfg, &a.manifest, &a.scene, a.out.as_deref())
        }
        Command::Combine(a) => {
            let cfg = base_config(&a.common)?;
            commands::combine(&cfg, &a.real, &a.synthetic, &a.out)
        }
    }
}

fn override_opt<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

pub(crate) fn ensure_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(viewcurate::Error::InvalidConfig(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}
