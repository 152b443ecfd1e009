//! Command-line surface. Every subcommand writes its outputs and a `run.json`
//! manifest into `--out`; `--from-manifest run.json` replays the recorded
//! command and reproduces the outputs byte for byte (the manifest itself
//! differs only in wall time).

pub mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::denoise::{denoise_run, DenoiseParams};
use crate::density::{knn_density, threshold_top};
use crate::error::{Error, Result};
use crate::geometry::{random_subset_indices, PointCloud};
use crate::homology::{
    barcode_stats, lazy_witness_complex_capped, persistence, rips_complex_capped, Barcode, BarcodeStats,
    LandmarkSelection, LandmarkSet, Prominence, DEFAULT_SIMPLEX_CAP,
};
use crate::kernelfield::FieldParams;
use crate::patches::{self, build_patch_cloud, DNormSpec, HyperplaneBasis, PatchCloudSpec};
use crate::synth::{rejection_sample, NoisyShapeSpec, Shape};

pub const THREADS_ENV: &str = "TOPO_DENOISE_THREADS";
pub const MANIFEST_FILE: &str = "run.json";
const DEFAULT_OMEGA: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "topo-denoise", version, about = "De-noise point clouds and check their topology")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Replay the command recorded in a run manifest.
    #[arg(long, value_name = "RUN_JSON")]
    pub from_manifest: Option<PathBuf>,

    /// Output directory for a replay; defaults to the recorded one.
    #[arg(long = "out", id = "replay_out", requires = "from_manifest")]
    pub replay_out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Sample a noisy shape or a synthetic patch corpus.
    Synth(SynthArgs),
    /// Move a random subset of the input along the kernel field.
    Denoise(DenoiseArgs),
    /// Persistence barcode of a point cloud.
    Barcode(BarcodeArgs),
    /// Keep the densest points under the k-nearest-neighbor estimate.
    Threshold(ThresholdArgs),
    /// Normalize image patches onto the unit sphere.
    Patches(PatchesArgs),
    /// Barcodes of de-noising and of thresholding side by side.
    Compare(CompareArgs),
    /// Draw a point cloud.
    #[command(subcommand)]
    Render(RenderCommand),
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "view")]
pub enum RenderCommand {
    /// Two coordinates of every point as an SVG scatter plot.
    Scatter(ScatterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeArg {
    Circle,
    Sphere,
    Point,
    GradientPatches,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub shape: ShapeArg,
    /// Points to draw; ramp patches for `gradient-patches`.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Noise level; per-pixel log-intensity deviation of noise patches for
    /// `gradient-patches`.
    #[arg(long)]
    pub sigma: f64,
    /// Ambient dimension of `point`.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub box_half_width: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub noise_patches: usize,
    #[arg(long, default_value_t = 3)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 5000)]
    pub patches_per_image: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DenoiseOptions {
    /// Size of the starting subset.
    #[arg(long, default_value_t = 100)]
    pub subset: usize,
    #[arg(long, default_value_t = 0.6)]
    pub sigma: f64,
    /// Repulsion weight; 0.1 when omitted.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Step length.
    #[arg(long, default_value_t = 0.05)]
    pub c: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Seed of the starting subset.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl DenoiseOptions {
    pub fn params(&self, snapshot_every: usize) -> Result<DenoiseParams> {
        let params = DenoiseParams {
            field: FieldParams::new(self.sigma, self.omega.unwrap_or(DEFAULT_OMEGA))?,
            step_c: self.c,
            iterations: self.iters,
            snapshot_every,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub options: DenoiseOptions,
    /// Write `s_<iteration>.csv` every this many iterations; the final state
    /// is always written.
    #[arg(long, default_value_t = 50)]
    pub snapshot_every: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    Rips,
    LazyWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionArg {
    Random,
    Maxmin,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BarcodeOptions {
    #[arg(long, value_enum, default_value_t = ComplexKind::Rips)]
    pub complex: ComplexKind,
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(long)]
    pub max_eps: f64,
    /// Landmark count for the lazy witness complex; capped at the cloud size.
    #[arg(long, default_value_t = 100)]
    pub landmarks: usize,
    #[arg(long, value_enum, default_value_t = SelectionArg::Random)]
    pub landmark_selection: SelectionArg,
    #[arg(long, default_value_t = 0)]
    pub landmark_seed: u64,
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
    pub max_simplices: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BarcodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub options: BarcodeOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ThresholdOptions {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub options: ThresholdOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PatchesArgs {
    /// Flattened patches, one per row.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON sidecar with `rows`, `cols` and optional `image_ids`; defaults to
    /// the input path with a `.json` extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Contrast matrix as CSV; identity when omitted.
    #[arg(long)]
    pub dnorm: Option<PathBuf>,
    /// Hyperplane basis as CSV; derived from the contrast matrix when omitted.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    #[arg(long, default_value_t = 5000)]
    pub per_image: usize,
    #[arg(long)]
    pub no_log: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub denoise: DenoiseOptions,
    #[command(flatten)]
    pub threshold: ThresholdOptions,
    #[command(flatten)]
    pub barcode: BarcodeOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScatterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub x: usize,
    #[arg(long, default_value_t = 1)]
    pub y: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: Command,
    /// Files written to the output directory, in order.
    pub outputs: Vec<String>,
    pub computed: Map<String, Value>,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl Command {
    pub fn out_dir(&self) -> &Path {
        match self {
            Command::Synth(a) => &a.out,
            Command::Denoise(a) => &a.out,
            Command::Barcode(a) => &a.out,
            Command::Threshold(a) => &a.out,
            Command::Patches(a) => &a.out,
            Command::Compare(a) => &a.out,
            Command::Render(RenderCommand::Scatter(a)) => &a.out,
        }
    }

    fn set_out_dir(&mut self, dir: PathBuf) {
        let slot = match self {
            Command::Synth(a) => &mut a.out,
            Command::Denoise(a) => &mut a.out,
            Command::Barcode(a) => &mut a.out,
            Command::Threshold(a) => &mut a.out,
            Command::Patches(a) => &mut a.out,
            Command::Compare(a) => &mut a.out,
            Command::Render(RenderCommand::Scatter(a)) => &mut a.out,
        };
        *slot = dir;
    }
}

/// Collects output files and computed values for the manifest.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    computed: Map<String, Value>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            computed: Map::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn record(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.computed.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::invalid("threads", "must be positive"));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
            log::warn!("thread pool already initialized; --threads ignored");
        }
    }
    let command = match (cli.from_manifest, cli.command) {
        (Some(path), _) => {
            let mut command = RunManifest::read(&path)?.command;
            if let Some(out) = cli.replay_out {
                command.set_out_dir(out);
            }
            command
        }
        (None, Some(command)) => command,
        (None, None) => return Err(Error::invalid("command", "give a subcommand or --from-manifest")),
    };
    execute(&command).map(|_| ())
}

/// Runs one command and writes its manifest.
pub fn execute(command: &Command) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = Outputs::new(command.out_dir())?;
    match command {
        Command::Synth(a) => synth(a, &mut out)?,
        Command::Denoise(a) => denoise(a, &mut out)?,
        Command::Barcode(a) => barcode(a, &mut out)?,
        Command::Threshold(a) => threshold(a, &mut out)?,
        Command::Patches(a) => patch_cloud(a, &mut out)?,
        Command::Compare(a) => compare(a, &mut out)?,
        Command::Render(RenderCommand::Scatter(a)) => scatter(a, &mut out)?,
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
        outputs: out.files.clone(),
        computed: out.computed.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    let path = out.dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn synth(a: &SynthArgs, out: &mut Outputs) -> Result<()> {
    let shape = match a.shape {
        ShapeArg::Circle => Shape::Circle,
        ShapeArg::Sphere => Shape::Sphere,
        ShapeArg::Point => Shape::Point { dim: a.dim },
        ShapeArg::GradientPatches => return synth_patches(a, out),
    };
    let mut spec = NoisyShapeSpec::new(shape, a.sigma, a.n, a.seed);
    if let Some(b) = a.box_half_width {
        spec.box_half_width = b;
    }
    let sample = rejection_sample(&spec)?;
    out.write("points.csv", &sample.cloud.to_csv_string())?;
    out.record("spec", spec)?;
    out.record("proposals", sample.proposals)?;
    out.record("acceptance_rate", sample.acceptance_rate())
}

fn synth_patches(a: &SynthArgs, out: &mut Outputs) -> Result<()> {
    let corpus = patches::synthetic::GradientCorpus {
        rows: a.patch_size,
        cols: a.patch_size,
        gradients: a.n,
        noise: a.noise_patches,
        noise_sd: a.sigma,
        patches_per_image: a.patches_per_image,
        seed: a.seed,
    };
    let (list, ids, _) = patches::synthetic::gradient_corpus(&corpus)?;
    let flat: Vec<f64> = list.iter().flat_map(|p| p.values().iter().copied()).collect();
    let cloud = PointCloud::from_flat(a.patch_size * a.patch_size, flat)?;
    out.write("patches.csv", &cloud.to_csv_string())?;
    out.write_json(
        "patches.json",
        &patches::PatchFileMeta {
            rows: a.patch_size,
            cols: a.patch_size,
            image_ids: Some(ids),
        },
    )
}

/// Random starting subset, de-noised.
pub fn run_denoise(data: &PointCloud, opts: &DenoiseOptions, snapshot_every: usize) -> Result<(crate::denoise::DenoiseTrace, Vec<usize>)> {
    let params = opts.params(snapshot_every)?;
    let indices = random_subset_indices(data.len(), opts.subset, opts.seed)?;
    let s0 = data.select(&indices);
    Ok((denoise_run(data, &s0, &params)?, indices))
}

fn denoise(a: &DenoiseArgs, out: &mut Outputs) -> Result<()> {
    let data = PointCloud::read_csv(&a.input)?;
    let (trace, indices) = run_denoise(&data, &a.options, a.snapshot_every)?;
    for (iteration, s) in &trace.snapshots {
        out.write(&format!("s_{iteration}.csv"), &s.to_csv_string())?;
    }
    out.record("m_norm", trace.m_norm)?;
    out.record("omega", trace.params.field.omega)?;
    out.record("omega_defaulted", a.options.omega.is_none())?;
    out.record("subset_indices", indices)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeRun {
    pub barcode: Barcode,
    pub simplex_counts: Vec<usize>,
    /// Cloud indices of the landmarks, when a witness complex was built.
    pub landmarks: Option<Vec<usize>>,
}

pub fn barcode_for(cloud: &PointCloud, opts: &BarcodeOptions) -> Result<BarcodeRun> {
    let (complex, landmarks) = match opts.complex {
        ComplexKind::Rips => (rips_complex_capped(cloud, opts.max_eps, opts.max_dim, opts.max_simplices)?, None),
        ComplexKind::LazyWitness => {
            let selection = match opts.landmark_selection {
                SelectionArg::Random => LandmarkSelection::Random,
                SelectionArg::Maxmin => LandmarkSelection::MaxMin,
            };
            let count = opts.landmarks.min(cloud.len());
            let set = LandmarkSet::select(cloud, count, selection, opts.landmark_seed)?;
            let complex =
                lazy_witness_complex_capped(cloud, &set, opts.nu, opts.max_eps, opts.max_dim, opts.max_simplices)?;
            (complex, Some(set.indices))
        }
    };
    Ok(BarcodeRun {
        barcode: persistence(&complex)?,
        simplex_counts: complex.counts(),
        landmarks,
    })
}

pub fn all_stats(barcode: &Barcode) -> Vec<BarcodeStats> {
    (0..=barcode.max_dim()).map(|d| barcode_stats(barcode, d)).collect()
}

fn barcode(a: &BarcodeArgs, out: &mut Outputs) -> Result<()> {
    let cloud = PointCloud::read_csv(&a.input)?;
    let run = barcode_for(&cloud, &a.options)?;
    write_barcode(out, "", &run)
}

fn write_barcode(out: &mut Outputs, prefix: &str, run: &BarcodeRun) -> Result<()> {
    let mut json = run.barcode.to_json();
    json.push('\n');
    out.write(&format!("{prefix}barcode.json"), &json)?;
    out.write_json(&format!("{prefix}stats.json"), &all_stats(&run.barcode))?;
    out.write(&format!("{prefix}barcode.svg"), &render::barcode_svg(&run.barcode))?;
    out.write(&format!("{prefix}barcode.txt"), &render::barcode_text(&run.barcode, 72))?;
    out.record(&format!("{prefix}simplex_counts"), &run.simplex_counts)?;
    out.record(&format!("{prefix}zero_length_pairs"), run.barcode.zero_length())?;
    if let Some(l) = &run.landmarks {
        out.record(&format!("{prefix}landmarks"), l)?;
    }
    Ok(())
}

pub fn run_threshold(cloud: &PointCloud, opts: &ThresholdOptions) -> Result<PointCloud> {
    let density = knn_density(cloud, opts.k)?;
    threshold_top(cloud, &density, opts.fraction)
}

fn threshold(a: &ThresholdArgs, out: &mut Outputs) -> Result<()> {
    let cloud = PointCloud::read_csv(&a.input)?;
    let kept = run_threshold(&cloud, &a.options)?;
    out.write("points.csv", &kept.to_csv_string())?;
    out.record("kept", kept.len())
}

fn patch_cloud(a: &PatchesArgs, out: &mut Outputs) -> Result<()> {
    let meta = a.meta.clone().unwrap_or_else(|| a.input.with_extension("json"));
    let (list, ids) = patches::read_patches(&a.input, &meta)?;
    let n = list.first().ok_or(Error::EmptyCloud)?.len();
    let dnorm = match &a.dnorm {
        Some(p) => DNormSpec::read_csv(p)?,
        None => DNormSpec::identity(n),
    };
    let basis = match &a.basis {
        Some(p) => HyperplaneBasis::read_csv(p, &dnorm)?,
        None => HyperplaneBasis::for_dnorm(&dnorm)?,
    };
    let spec = PatchCloudSpec {
        patches_per_image: a.per_image,
        contrast_fraction: a.fraction,
        apply_log: !a.no_log,
        seed: a.seed,
    };
    let result = build_patch_cloud(&list, &ids, &dnorm, &spec, &basis)?;
    out.write("points.csv", &result.cloud.to_csv_string())?;
    out.record("kept", result.kept.len())?;
    out.record("zero_contrast", result.zero_contrast)
}

/// Which prominence is larger: `"denoise"`, `"threshold"`, `"tie"`, or
/// `"no features"` when neither method has an interval.
pub fn verdict(denoise: Prominence, threshold: Prominence) -> &'static str {
    match (denoise.value(), threshold.value()) {
        (None, None) => "no features",
        (Some(_), None) => "denoise",
        (None, Some(_)) => "threshold",
        (Some(a), Some(b)) if a > b => "denoise",
        (Some(a), Some(b)) if a < b => "threshold",
        _ => "tie",
    }
}

fn compare(a: &CompareArgs, out: &mut Outputs) -> Result<()> {
    let data = PointCloud::read_csv(&a.input)?;
    let (trace, _) = run_denoise(&data, &a.denoise, 0)?;
    let thresholded = run_threshold(&data, &a.threshold)?;
    out.write("denoised.csv", &trace.final_cloud.to_csv_string())?;
    out.write("thresholded.csv", &thresholded.to_csv_string())?;
    let den = barcode_for(&trace.final_cloud, &a.barcode)?;
    let thr = barcode_for(&thresholded, &a.barcode)?;
    write_barcode(out, "denoise_", &den)?;
    write_barcode(out, "threshold_", &thr)?;

    let (ds, ts) = (all_stats(&den.barcode), all_stats(&thr.barcode));
    let dims: Vec<Value> = ds
        .iter()
        .zip(&ts)
        .map(|(d, t)| {
            json!({
                "dim": d.dim,
                "denoise": d,
                "threshold": t,
                "verdict": if d.truncated_dimension { "truncated" } else { verdict(d.prominence, t.prominence) },
            })
        })
        .collect();
    out.write_json("report.json", &json!({ "m_norm": trace.m_norm, "dimensions": dims }))?;
    out.record("m_norm", trace.m_norm)?;
    out.record("thresholded_points", thresholded.len())
}

fn scatter(a: &ScatterArgs, out: &mut Outputs) -> Result<()> {
    let cloud = PointCloud::read_csv(&a.input)?;
    if a.x >= cloud.dim() || a.y >= cloud.dim() {
        return Err(Error::invalid("x/y", format!("cloud has {} coordinates", cloud.dim())));
    }
    out.write("scatter.svg", &render::scatter_svg(&cloud, a.x, a.y))
}
