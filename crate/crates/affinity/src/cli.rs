//! The `affinity` command: argument parsing and the pipelines behind each
//! subcommand.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use affinity_core::apps::{
    active_cluster, align_labels, consensus_report, incremental_update, kmeans, majority_vote,
    IncrementalState, Partition,
};
use affinity_core::embed::{fit_fourier_embedding, fit_span_projection, FourierEmbedding};
use affinity_core::field::{evaluate_affinity_field, extract_contours, GridSpec, DEFAULT_LEVELS};
use affinity_core::oracle::exact_affinity_2d_with;
use affinity_core::rng::rng_from_seed;
use affinity_core::{
    affinity_batch, required_samples, BoundingBox, ClusterModel, Dataset, DistanceMeasure,
    Generator, SamplerConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csv::{ingest_csv, labels_text, points_text, read_labels, read_weights, write_text};
use crate::report::{affinity_csv, grid_csv, read_affinity_csv, Report};

/// Exit status for a run that completed.
pub const EXIT_OK: i32 = 0;
/// Exit status for a run that failed after its arguments were accepted.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit status for malformed or inconsistent arguments.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "affinity",
    version,
    about = "Per-point affinity scores for clusterings"
)]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every point against the clustering.
    Affinity(AffinityArgs),
    /// Evaluate the score field on a grid; write heatmap, contours, grid CSV.
    Field(FieldArgs),
    /// Exact 2D affinities by polygon clipping, optionally checking a sampled run.
    Exact2d(Exact2dArgs),
    /// k-means++ seeding followed by Lloyd iterations.
    Kmeans(KmeansArgs),
    /// Cluster a sample mixing stable and unstable points.
    Active(ActiveArgs),
    /// Feed the points in batches, folding in only stable points.
    Stream(StreamArgs),
    /// Stability and Rand distance of base partitions and their consensus.
    ConsensusEval(ConsensusArgs),
    /// Samples needed for additive error eps with probability 1 - delta.
    Samplesize(SampleSizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    Euclidean,
    Kl,
    #[value(alias = "is")]
    ItakuraSaito,
}

impl MeasureArg {
    fn measure(self) -> DistanceMeasure {
        match self {
            Self::Euclidean => DistanceMeasure::SquaredEuclidean,
            Self::Kl => DistanceMeasure::Bregman(Generator::GeneralizedKl),
            Self::ItakuraSaito => DistanceMeasure::Bregman(Generator::ItakuraSaito),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Rbf,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Point CSV, one point per row.
    #[arg(long)]
    points: PathBuf,
    /// Embed points with random Fourier features before anything else.
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Kernel bandwidth.
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of random Fourier features.
    #[arg(long, default_value_t = 500)]
    rff: usize,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[arg(long, value_enum, default_value = "euclidean")]
    measure: MeasureArg,
    /// Scale of the sampling box around data and centers.
    #[arg(long, default_value_t = 2.0)]
    box_inflation: f64,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Label file, one cluster index per point.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Representative CSV; defaults to the label-group centroids.
    #[arg(long)]
    centers: Option<PathBuf>,
    /// `none`, `cluster-size`, or a file with one weight per cluster.
    #[arg(long, default_value = "none")]
    weights: String,
    /// Score in the full space even when the centers span fewer dimensions.
    #[arg(long)]
    no_project: bool,
}

#[derive(Debug, Args)]
struct SamplerArgs {
    /// Target additive error per affinity.
    #[arg(long, default_value_t = 0.04)]
    eps: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Samples per point (see `samplesize` for the bound implied by --eps and --delta).
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Walk steps discarded before sampling
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Whitening pilot length; defaults to max(200, 10 * dim).
    #[arg(long)]
    pilot: Option<usize>,
    #[arg(long, env = "AFFINITY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct AffinityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Grid nodes as NXxNY.
    #[arg(long, default_value = "200x200", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Margin of the grid around data and centers.
    #[arg(long, default_value_t = 1.1)]
    grid_inflation: f64,
    /// Greyscale PGM of the score field, darker where scores are low
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// SVG of the level-set contours and the centers
    #[arg(long)]
    contours: Option<PathBuf>,
    /// Contour levels, strictly increasing in (0, 1).
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Grid CSV (x,y,score).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Exact2dArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Affinity CSV to compare against the exact values.
    #[arg(long)]
    check: Option<PathBuf>,
    /// Largest accepted per-point deviation for --check.
    #[arg(long, default_value_t = 0.04)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of clusters
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, env = "AFFINITY_SEED", default_value_t = 0)]
    seed: u64,
    /// Label file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    centers_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ActiveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Number of clusters
    #[arg(long)]
    k: usize,
    /// Share of the sample drawn from stable points.
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Label file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    centers_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StreamArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Number of clusters
    #[arg(long)]
    k: usize,
    /// Number of consecutive batches the points are split into.
    #[arg(long, default_value_t = 5)]
    batches: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Final centers CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-batch CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConsensusArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Base partition files.
    #[arg(long, value_delimiter = ',', required = true)]
    partitions: Vec<PathBuf>,
    /// Consensus partition; majority vote of the aligned bases when absent.
    #[arg(long)]
    consensus: Option<PathBuf>,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    consensus_out: Option<PathBuf>,
    /// `metric,value` report; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleSizeArgs {
    #[arg(long, default_value_t = 0.04)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Number of clusters
    #[arg(long)]
    k: usize,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got {s:?}"))?;
    let n = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 2)
            .ok_or_else(|| format!("grid sizes must be integers >= 2, got {s:?}"))
    };
    Ok((n(a)?, n(b)?))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(runtime(e)),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command) -> Outcome<()> {
    match command {
        Command::Affinity(a) => cmd_affinity(a),
        Command::Field(a) => cmd_field(a),
        Command::Exact2d(a) => cmd_exact2d(a),
        Command::Kmeans(a) => cmd_kmeans(a),
        Command::Active(a) => cmd_active(a),
        Command::Stream(a) => cmd_stream(a),
        Command::ConsensusEval(a) => cmd_consensus(a),
        Command::Samplesize(a) => cmd_samplesize(a),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => write_text(p, text).map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Loaded points, after any kernel embedding.
struct Data {
    points: Dataset,
    embedding: Option<FourierEmbedding>,
}

impl DataArgs {
    fn load(&self, seed: u64, measure: Option<MeasureArg>) -> Outcome<Data> {
        let raw = ingest_csv(&self.points, None).map_err(runtime)?;
        let embedding = match self.kernel {
            None => {
                if self.sigma.is_some() {
                    return Err(usage("--sigma requires --kernel"));
                }
                None
            }
            Some(KernelArg::Rbf) => {
                if matches!(measure, Some(m) if m != MeasureArg::Euclidean) {
                    return Err(usage("--kernel works with --measure euclidean only"));
                }
                let sigma = self
                    .sigma
                    .ok_or_else(|| usage("--kernel rbf requires --sigma"))?;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(usage("--sigma must be positive"));
                }
                if self.rff == 0 {
                    return Err(usage("--rff must be at least 1"));
                }
                Some(fit_fourier_embedding(raw.dim(), self.rff, sigma, seed).map_err(runtime)?)
            }
        };
        let points = match &embedding {
            Some(fe) => fe.embed_dataset(&raw).map_err(runtime)?,
            None => raw,
        };
        Ok(Data { points, embedding })
    }

    fn describe(&self) -> String {
        match (self.kernel, self.sigma) {
            (Some(KernelArg::Rbf), Some(s)) => format!("kernel=rbf sigma={s} rff={}", self.rff),
            _ => "kernel=none".into(),
        }
    }
}

impl MeasureArgs {
    fn check(&self) -> Outcome<()> {
        if !(self.box_inflation.is_finite() && self.box_inflation >= 1.0) {
            return Err(usage("--box-inflation must be a finite value >= 1"));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let name = match self.measure {
            MeasureArg::Euclidean => "euclidean",
            MeasureArg::Kl => "kl",
            MeasureArg::ItakuraSaito => "itakura-saito",
        };
        format!("measure={name} box_inflation={}", self.box_inflation)
    }
}

impl SamplerArgs {
    fn config(&self) -> Outcome<SamplerConfig> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(usage("--eps must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(usage("--delta must lie in (0, 1)"));
        }
        if self.m == 0 {
            return Err(usage("--m must be at least 1"));
        }
        let samples = self.m;
        Ok(SamplerConfig {
            samples,
            burn_in: self.burn_in,
            pilot_steps: self.pilot,
            seed: self.seed,
            epsilon: self.eps,
            delta: self.delta,
            whiten: true,
        })
    }
}

fn describe_config(c: &SamplerConfig) -> String {
    let pilot = c.pilot_steps.map_or("auto".into(), |p| p.to_string());
    format!(
        "seed={} m={} burn_in={} pilot={pilot} eps={} delta={}",
        c.seed, c.samples, c.burn_in, c.epsilon, c.delta
    )
}

/// Clustering ready for scoring, in the frame the points live in.
struct Scene {
    points: Dataset,
    model: ClusterModel,
    measure: DistanceMeasure,
    bounds: BoundingBox,
    note: String,
}

impl ModelArgs {
    fn build(&self, data: &Data, measure: &MeasureArgs, original_dim: usize) -> Outcome<Scene> {
        measure.check()?;
        let points = &data.points;
        let labels = match &self.labels {
            Some(p) => {
                let part = read_labels(p).map_err(runtime)?;
                if part.len() != points.len() {
                    return Err(runtime(format!(
                        "{}: {} labels for {} points",
                        p.display(),
                        part.len(),
                        points.len()
                    )));
                }
                Some(part)
            }
            None => None,
        };
        let mut model = match (&self.centers, &labels) {
            (Some(path), _) => {
                let raw = ingest_csv(path, Some(original_dim)).map_err(runtime)?;
                let reps = match &data.embedding {
                    Some(fe) => fe.embed_dataset(&raw).map_err(runtime)?,
                    None => raw,
                };
                let m = ClusterModel::from_flat(reps.as_flat().to_vec(), reps.dim())
                    .map_err(runtime)?;
                match &labels {
                    Some(l) => m.with_labels(l.labels().to_vec()).map_err(runtime)?,
                    None => m,
                }
            }
            (None, Some(l)) => {
                ClusterModel::from_labels(points, l.labels(), None).map_err(runtime)?
            }
            (None, None) => return Err(usage("one of --labels or --centers is required")),
        };
        model = match self.weights.as_str() {
            "none" => model,
            "cluster-size" => {
                if labels.is_none() {
                    return Err(usage("--weights cluster-size requires --labels"));
                }
                model.with_cluster_size_weights().map_err(runtime)?
            }
            file => {
                let w = read_weights(Path::new(file)).map_err(runtime)?;
                model.with_weights(w, 0.0).map_err(runtime)?
            }
        };
        let measure_v = measure.measure.measure();
        let mut note = format!("k={} dim={}", model.k(), points.dim());
        let project = measure_v.is_euclidean()
            && !self.no_project
            && points.dim() > model.k()
            && model.k() >= 2;
        let (points, model) = if project {
            let proj = fit_span_projection(&model).map_err(runtime)?;
            let _ = write!(note, " projection=span(r={})", proj.rank());
            (
                proj.project_dataset(points).map_err(runtime)?,
                proj.project_model(&model).map_err(runtime)?,
            )
        } else {
            note.push_str(" projection=off");
            (points.clone(), model)
        };
        let _ = write!(note, " weights={}", self.weights);
        let bounds =
            BoundingBox::for_model(&points, &model, measure.box_inflation).map_err(runtime)?;
        let bounds = match measure_v.domain_floor() {
            // Keep the box inside the generator's domain.
            Some(floor) => BoundingBox::new(
                bounds.lower().iter().map(|&l| l.max(floor)).collect(),
                bounds.upper().to_vec(),
            )
            .map_err(runtime)?,
            None => bounds,
        };
        Ok(Scene {
            points,
            model,
            measure: measure_v,
            bounds,
            note,
        })
    }
}

fn log(cmd: &str, parts: &[String]) {
    eprintln!("affinity {cmd}: {}", parts.join(" "));
}

fn score_all(scene: &Scene, config: &SamplerConfig) -> Outcome<Vec<affinity_core::AffinityVector>> {
    affinity_batch(
        &scene.points,
        &scene.model,
        &scene.measure,
        &scene.bounds,
        config,
    )
    .map_err(runtime)?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(runtime)
}

fn cmd_affinity(a: AffinityArgs) -> Outcome<()> {
    let data = a.data.load(a.sampler.seed, Some(a.measure.measure))?;
    let original_dim = ingest_dim(&data);
    let scene = a.model.build(&data, &a.measure, original_dim)?;
    let config = a.sampler.config()?;
    log(
        "affinity",
        &[
            scene.note.clone(),
            a.data.describe(),
            a.measure.describe(),
            describe_config(&config),
        ],
    );
    let rows = score_all(&scene, &config)?;
    let unstable = rows.iter().filter(|r| !r.stable).count();
    eprintln!(
        "affinity affinity: {} points, {} unstable",
        rows.len(),
        unstable
    );
    emit(a.out.as_deref(), &affinity_csv(scene.model.k(), &rows))
}

/// Dimension of the point file before any kernel embedding.
fn ingest_dim(data: &Data) -> usize {
    data.embedding
        .as_ref()
        .map_or(data.points.dim(), FourierEmbedding::input_dim)
}

fn require_2d(scene: &Scene, cmd: &str) -> Outcome<()> {
    if scene.points.dim() != 2 {
        return Err(runtime(format!(
            "{cmd} needs 2D data after projection, got dimension {}",
            scene.points.dim()
        )));
    }
    Ok(())
}

fn cmd_field(a: FieldArgs) -> Outcome<()> {
    if a.heatmap.is_none() && a.contours.is_none() && a.out.is_none() {
        return Err(usage(
            "nothing to write: give --heatmap, --contours or --out",
        ));
    }
    if !(a.grid_inflation.is_finite() && a.grid_inflation >= 1.0) {
        return Err(usage("--grid-inflation must be a finite value >= 1"));
    }
    let levels = a.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
    if levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(
            "--levels must be strictly increasing values in (0, 1)",
        ));
    }
    let data = a.data.load(a.sampler.seed, Some(a.measure.measure))?;
    let original_dim = ingest_dim(&data);
    let scene = a.model.build(&data, &a.measure, original_dim)?;
    require_2d(&scene, "field")?;
    let config = a.sampler.config()?;
    let area =
        BoundingBox::for_model(&scene.points, &scene.model, a.grid_inflation).map_err(runtime)?;
    let (nx, ny) = a.grid;
    let spec = GridSpec::spanning(
        [area.lower()[0], area.lower()[1]],
        [area.upper()[0], area.upper()[1]],
        nx,
        ny,
    )
    .map_err(runtime)?;
    log(
        "field",
        &[
            scene.note.clone(),
            a.data.describe(),
            a.measure.describe(),
            describe_config(&config),
            format!("grid={nx}x{ny}"),
        ],
    );
    let grid = evaluate_affinity_field(&scene.model, &scene.measure, &scene.bounds, &config, spec)
        .map_err(runtime)?;
    eprintln!(
        "affinity field: unstable node fraction {}",
        crate::format_sig9(grid.unstable_fraction())
    );
    if let Some(p) = &a.heatmap {
        crate::pgm::write_heatmap_pgm(&grid, p).map_err(runtime)?;
    }
    if let Some(p) = &a.contours {
        let contours = extract_contours(&grid, &levels).map_err(runtime)?;
        let centers: Vec<[f64; 2]> = scene
            .model
            .representatives()
            .map(|c| [c[0], c[1]])
            .collect();
        crate::svg::write_contours_svg(&grid, &contours, &centers, p).map_err(runtime)?;
    }
    if let Some(p) = &a.out {
        write_text(p, &grid_csv(&grid)).map_err(runtime)?;
    }
    Ok(())
}

fn cmd_exact2d(a: Exact2dArgs) -> Outcome<()> {
    if !(a.eps >= 0.0) {
        return Err(usage("--eps must be non-negative"));
    }
    let data = a.data.load(0, Some(a.measure.measure))?;
    let original_dim = ingest_dim(&data);
    let scene = a.model.build(&data, &a.measure, original_dim)?;
    require_2d(&scene, "exact2d")?;
    log(
        "exact2d",
        &[scene.note.clone(), a.data.describe(), a.measure.describe()],
    );
    let rows = scene
        .points
        .points()
        .enumerate()
        .map(|(i, x)| {
            exact_affinity_2d_with(x, &scene.model, &scene.measure, &scene.bounds)
                .map_err(|e| runtime(format!("point {i}: {e}")))
        })
        .collect::<Outcome<Vec<_>>>()?;
    if let Some(p) = &a.out {
        write_text(p, &affinity_csv(scene.model.k(), &rows)).map_err(runtime)?;
    } else if a.check.is_none() {
        print!("{}", affinity_csv(scene.model.k(), &rows));
    }
    if let Some(p) = &a.check {
        let sampled = read_affinity_csv(p).map_err(runtime)?;
        if sampled.len() != rows.len() {
            return Err(runtime(format!(
                "{}: {} rows for {} points",
                p.display(),
                sampled.len(),
                rows.len()
            )));
        }
        let mut worst = (0.0f64, 0usize);
        for (i, (s, e)) in sampled.iter().zip(&rows).enumerate() {
            if s.len() != e.alphas.len() {
                return Err(runtime(format!(
                    "{}: row {i} has {} alphas, expected {}",
                    p.display(),
                    s.len(),
                    e.k()
                )));
            }
            let dev = s
                .iter()
                .zip(&e.alphas)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        eprintln!(
            "affinity exact2d: max deviation {} at point {} (eps {})",
            crate::format_sig9(worst.0),
            worst.1,
            a.eps
        );
        if worst.0 > a.eps {
            return Err(runtime(format!(
                "max deviation {} exceeds --eps {}",
                worst.0, a.eps
            )));
        }
    }
    Ok(())
}

fn cmd_kmeans(a: KmeansArgs) -> Outcome<()> {
    let data = a.data.load(a.seed, None)?;
    if a.k == 0 || a.k > data.points.len() {
        return Err(usage(format!("--k must lie in [1, {}]", data.points.len())));
    }
    log(
        "kmeans",
        &[
            format!("k={} max_iters={} seed={}", a.k, a.max_iters, a.seed),
            a.data.describe(),
        ],
    );
    let fit =
        kmeans(&data.points, a.k, a.max_iters, &mut rng_from_seed(a.seed)).map_err(runtime)?;
    eprintln!(
        "affinity kmeans: cost {} after {} iterations{}",
        crate::format_sig9(fit.cost()),
        fit.costs.len(),
        if fit.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    if let Some(p) = &a.centers_out {
        write_text(p, &points_text(fit.centers.iter().map(Vec::as_slice))).map_err(runtime)?;
    }
    emit(a.out.as_deref(), &labels_text(&fit.labels))
}

fn cmd_active(a: ActiveArgs) -> Outcome<()> {
    a.measure.check()?;
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1)"));
    }
    let data = a.data.load(a.sampler.seed, Some(a.measure.measure))?;
    if a.k == 0 || a.k > data.points.len() {
        return Err(usage(format!("--k must lie in [1, {}]", data.points.len())));
    }
    let config = a.sampler.config()?;
    log(
        "active",
        &[
            format!("k={} alpha={} max_iters={}", a.k, a.alpha, a.max_iters),
            a.data.describe(),
            a.measure.describe(),
            describe_config(&config),
        ],
    );
    let result = active_cluster(
        &data.points,
        a.k,
        a.alpha,
        &a.measure.measure.measure(),
        &config,
        a.measure.box_inflation,
        a.max_iters,
        &mut rng_from_seed(a.sampler.seed),
    )
    .map_err(runtime)?;
    let r = &result.report;
    let mut report = Report::new();
    report
        .push("n", data.points.len())
        .push("stable_pool", r.stable_pool)
        .push("unstable_pool", r.unstable_pool)
        .push("requested_stable", r.requested_stable)
        .push("requested_unstable", r.requested_unstable)
        .push("drawn_stable", r.drawn_stable)
        .push("drawn_unstable", r.drawn_unstable)
        .push("stable_for_unstable", r.stable_for_unstable)
        .push("unstable_for_stable", r.unstable_for_stable);
    if let Some(p) = &a.report {
        write_text(p, &report.to_csv()).map_err(runtime)?;
    }
    if let Some(p) = &a.centers_out {
        write_text(p, &points_text(result.model.representatives())).map_err(runtime)?;
    }
    let labels = result.model.labels().unwrap_or(&[]);
    emit(a.out.as_deref(), &labels_text(labels))
}

fn cmd_stream(a: StreamArgs) -> Outcome<()> {
    a.measure.check()?;
    let data = a.data.load(a.sampler.seed, Some(a.measure.measure))?;
    let n = data.points.len();
    if a.batches == 0 || a.batches > n {
        return Err(usage(format!("--batches must lie in [1, {n}]")));
    }
    let size = n.div_ceil(a.batches);
    if a.k == 0 || a.k > size.min(n) {
        return Err(usage(format!(
            "--k must lie in [1, {}] (first batch size)",
            size.min(n)
        )));
    }
    let config = a.sampler.config()?;
    log(
        "stream",
        &[
            format!("k={} batches={} max_iters={}", a.k, a.batches, a.max_iters),
            a.data.describe(),
            a.measure.describe(),
            describe_config(&config),
        ],
    );
    let indices: Vec<usize> = (0..n).collect();
    let batches: Vec<Dataset> = indices
        .chunks(size)
        .map(|c| data.points.subset(c))
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    let measure = a.measure.measure.measure();
    let mut state = IncrementalState::initialize(
        &batches[0],
        a.k,
        a.max_iters,
        &measure,
        &config,
        a.measure.box_inflation,
        &mut rng_from_seed(a.sampler.seed),
    )
    .map_err(runtime)?;
    for b in &batches[1..] {
        state = incremental_update(state, b, &measure, &config, a.measure.box_inflation)
            .map_err(runtime)?;
    }
    let mut report =
        String::from("batch,candidates,stable_first_pass,stable_second_pass,pool_size\n");
    for r in state.reports() {
        let _ = writeln!(
            report,
            "{},{},{},{},{}",
            r.batch, r.candidates, r.stable_first_pass, r.stable_second_pass, r.pool_size
        );
    }
    eprintln!(
        "affinity stream: {} points seen, {} folded, {} pooled",
        state.seen(),
        state.folded(),
        state.pool().len()
    );
    if let Some(p) = &a.report {
        write_text(p, &report).map_err(runtime)?;
    }
    emit(
        a.out.as_deref(),
        &points_text(state.centers().iter().map(Vec::as_slice)),
    )
}

fn cmd_consensus(a: ConsensusArgs) -> Outcome<()> {
    a.measure.check()?;
    let data = a.data.load(a.sampler.seed, Some(a.measure.measure))?;
    let n = data.points.len();
    let read = |p: &Path| -> Outcome<Partition> {
        let part = read_labels(p).map_err(runtime)?;
        if part.len() != n {
            return Err(runtime(format!(
                "{}: {} labels for {n} points",
                p.display(),
                part.len()
            )));
        }
        Ok(part)
    };
    let base = a
        .partitions
        .iter()
        .map(|p| read(p))
        .collect::<Outcome<Vec<_>>>()?;
    let reference = read(&a.reference)?;
    let consensus = match &a.consensus {
        Some(p) => read(p)?,
        None => {
            let aligned = base
                .iter()
                .map(|p| align_labels(&base[0], p))
                .collect::<Result<Vec<_>, _>>()
                .map_err(runtime)?;
            majority_vote(&aligned).map_err(runtime)?
        }
    };
    let config = a.sampler.config()?;
    log(
        "consensus-eval",
        &[
            format!(
                "partitions={} consensus={}",
                base.len(),
                if a.consensus.is_some() {
                    "file"
                } else {
                    "majority-vote"
                }
            ),
            a.data.describe(),
            a.measure.describe(),
            describe_config(&config),
        ],
    );
    let r = consensus_report(
        &base,
        &consensus,
        &reference,
        &data.points,
        &a.measure.measure.measure(),
        &config,
        a.measure.box_inflation,
    )
    .map_err(runtime)?;
    let mut report = Report::new();
    for (i, (u, d)) in r.base_unstable.iter().zip(&r.base_rand).enumerate() {
        report.push_real(format!("base_{i}_unstable_pct"), *u);
        report.push_real(format!("base_{i}_rand_distance"), *d);
    }
    report.push_real("consensus_unstable_pct", r.consensus_unstable);
    report.push_real("consensus_rand_distance", r.consensus_rand);
    if let Some(p) = &a.consensus_out {
        write_text(p, &labels_text(consensus.labels())).map_err(runtime)?;
    }
    emit(a.out.as_deref(), &report.to_csv())
}

fn cmd_samplesize(a: SampleSizeArgs) -> Outcome<()> {
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(usage("--eps must lie in (0, 1)"));
    }
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(usage("--delta must lie in (0, 1)"));
    }
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let m = required_samples(a.eps, a.delta, a.k).map_err(runtime)?;
    println!("{m}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag_parsing() {
        assert_eq!(parse_grid("200x150"), Ok((200, 150)));
        assert!(parse_grid("200").is_err());
        assert!(parse_grid("1x5").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["affinity", "bogus"]), EXIT_USAGE);
        assert_eq!(
            run(["affinity", "samplesize", "--k", "5", "--eps", "2"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["affinity", "field", "--points", "x.csv", "--grid", "3"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn runtime_errors_exit_1() {
        assert_eq!(
            run([
                "affinity",
                "affinity",
                "--points",
                "/nonexistent/points.csv",
                "--labels",
                "l.csv"
            ]),
            EXIT_RUNTIME
        );
    }

    #[test]
    fn samplesize_runs() {
        assert_eq!(run(["affinity", "samplesize", "--k", "5"]), EXIT_OK);
    }
}
