//! `hcrs`: command-line front end for the hybrid clothes recommender.
//!
//! Every subcommand accepts `--config <file.json>`; keys mirror long flag
//! names and explicit flags override them.

mod config;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hcrs_core::clustering::save_model;
use hcrs_core::color::{read_features, write_features};
use hcrs_core::eval::{write_reports, SweepAxis, FEATURES_FILE, RATINGS_FILE};
use hcrs_core::hog::{WINDOW_HEIGHT, WINDOW_WIDTH};
use hcrs_core::ratings::{build_group_matrix, load_groups, load_ratings, save_groups};
use hcrs_core::*;

use config::{list, need, Merge};

#[derive(Debug, Parser)]
#[command(name = "hcrs", version, about = "Hybrid clothes recommender: detection, color features, clustering, CF and evaluation")]
struct Cli {
    /// JSON file whose keys supply defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the dimensions of a PPM image as WxH.
    ImgInfo { path: PathBuf },
    /// Detect people in an image; prints "x y w h score scale" per detection.
    Detect(DetectArgs),
    /// Train a linear SVM on directories of positive and negative PPM crops.
    TrainSvm(TrainArgs),
    /// Extract one color vector per image in a directory.
    Extract(ExtractArgs),
    /// Cluster color vectors and write soft group memberships.
    Cluster(ClusterArgs),
    /// Top-N recommendations for one user.
    Recommend(RecommendArgs),
    /// Write a seeded synthetic dataset (ratings.csv, features.csv).
    GenData(GenArgs),
    /// Evaluate the hybrid pipeline; prints a one-row report CSV.
    Evaluate(EvalArgs),
    /// Evaluate the Pearson-only baseline; prints a one-row report CSV.
    Baseline(EvalArgs),
    /// Evaluate a parameter grid; prints one report row per grid point.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct WindowArgs {
    /// Minimum SVM score kept as a detection [default: 0]
    #[arg(long)]
    threshold: Option<f64>,
    /// Window step in pixels [default: 8]
    #[arg(long)]
    stride: Option<usize>,
    /// Comma-separated pyramid scales [default: 1]
    #[arg(long)]
    scales: Option<String>,
}

impl WindowArgs {
    fn params(&self) -> Result<DetectParams> {
        let defaults = DetectParams::default();
        let params = DetectParams {
            threshold: self.threshold.unwrap_or(defaults.threshold),
            stride: self.stride.unwrap_or(defaults.stride),
            scales: match &self.scales {
                Some(s) => list(s, "scales")?,
                None => defaults.scales,
            },
        };
        if params.stride == 0 {
            bail!("--stride must be positive");
        }
        if params.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            bail!("--scales must be positive");
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct DetectArgs {
    #[arg(long)]
    image: Option<PathBuf>,
    /// SVM model JSON
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    window: WindowArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct TrainArgs {
    /// Directory of positive PPM crops
    #[arg(long)]
    positives: Option<PathBuf>,
    /// Directory of negative PPM crops
    #[arg(long)]
    negatives: Option<PathBuf>,
    /// Output model JSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// [default: 50]
    #[arg(long)]
    epochs: Option<usize>,
    /// [default: 0.01]
    #[arg(long)]
    learning_rate: Option<f64>,
    /// [default: 0.001]
    #[arg(long)]
    regularization: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct ExtractArgs {
    /// Directory of PPM images; file stems become item ids
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output features CSV
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    window: WindowArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct ClusterArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    /// [default: 30]
    #[arg(long)]
    k: Option<usize>,
    /// [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Output group-membership CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Centers CSV; a JSON sidecar is written next to it [default: <out>.centers.csv]
    #[arg(long)]
    centers: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct ScaleArgs {
    /// Lowest rating [default: 1]
    #[arg(long)]
    rating_min: Option<f64>,
    /// Highest rating [default: 5]
    #[arg(long)]
    rating_max: Option<f64>,
}

impl ScaleArgs {
    fn scale(&self) -> Result<RatingScale> {
        let d = RatingScale::default();
        Ok(RatingScale::new(self.rating_min.unwrap_or(d.min), self.rating_max.unwrap_or(d.max))?)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct RecommendArgs {
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Group-membership CSV; omit for ratings-only similarity
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    user: Option<String>,
    /// [default: 10]
    #[arg(long)]
    top: Option<usize>,
    /// [default: 50]
    #[arg(long)]
    neighbors: Option<usize>,
    /// Pearson share of the similarity [default: 0.5]
    #[arg(long)]
    weight: Option<f64>,
    /// Multiplier applied to group memberships [default: 5]
    #[arg(long)]
    scale: Option<f64>,
    /// Ignore neighbours with non-positive similarity
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    exclude_negative: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    scale_range: ScaleArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct GenArgs {
    /// [default: 163]
    #[arg(long)]
    users: Option<usize>,
    /// [default: 50]
    #[arg(long)]
    items: Option<usize>,
    /// Number of ratings [default: 1783]
    #[arg(long)]
    count: Option<usize>,
    /// [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Influence of color on ratings, in [0, 1] [default: 0.8]
    #[arg(long)]
    strength: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct DataArgs {
    /// Directory holding ratings.csv and features.csv
    #[arg(long)]
    data: Option<PathBuf>,
    /// Ratings CSV [default: <data>/ratings.csv]
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Features CSV [default: <data>/features.csv]
    #[arg(long)]
    features: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    scale_range: ScaleArgs,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let path = |explicit: &Option<PathBuf>, file: &str, flag: &str| -> Result<PathBuf> {
            match (explicit, &self.data) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(dir)) => Ok(dir.join(file)),
                (None, None) => bail!("missing --{flag} (or --data)"),
            }
        };
        let ratings = path(&self.ratings, RATINGS_FILE, "ratings")?;
        let features = path(&self.features, FEATURES_FILE, "features")?;
        Dataset::load(&ratings, &features, self.scale_range.scale()?)
            .with_context(|| format!("loading {} and {}", ratings.display(), features.display()))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Color groups [default: 30]
    #[arg(long)]
    k: Option<usize>,
    /// [default: 50]
    #[arg(long)]
    neighbors: Option<usize>,
    /// [default: 0.5]
    #[arg(long)]
    weight: Option<f64>,
    /// [default: 5]
    #[arg(long)]
    scale: Option<f64>,
    /// [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Share of users held out [default: 0.2]
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    exclude_negative: Option<bool>,
    /// Also write the report CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalArgs {
    fn params(&self) -> EvalParams {
        let d = EvalParams::default();
        EvalParams {
            k: self.k.unwrap_or(d.k),
            neighbors: self.neighbors.unwrap_or(d.neighbors),
            weight: self.weight.unwrap_or(d.weight),
            scale_factor: self.scale.unwrap_or(d.scale_factor),
            seed: self.seed.unwrap_or(d.seed),
            test_fraction: self.test_fraction.unwrap_or(d.test_fraction),
            exclude_negative: self.exclude_negative.unwrap_or(d.exclude_negative),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    eval: EvalArgs,
    /// Comma-separated cluster counts [default: --k]
    #[arg(long)]
    k_list: Option<String>,
    /// Comma-separated neighbourhood sizes [default: --neighbors]
    #[arg(long)]
    neighbor_list: Option<String>,
    /// Comma-separated Pearson weights [default: --weight]
    #[arg(long)]
    weight_list: Option<String>,
    /// Comma-separated group scale factors [default: --scale]
    #[arg(long)]
    scale_list: Option<String>,
    /// Write an SVG chart of MAE over the varying parameter
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = config::load(cli.config.as_deref())?;
    let mut out = io::stdout().lock();
    match cli.command {
        Command::ImgInfo { path } => {
            let img = load_image(&path)?;
            writeln!(out, "{}x{}", img.width(), img.height())?;
        }
        Command::Detect(args) => run_detect(args.merge(&file)?, &mut out)?,
        Command::TrainSvm(args) => run_train(args.merge(&file)?, &mut out)?,
        Command::Extract(args) => run_extract(args.merge(&file)?, &mut out)?,
        Command::Cluster(args) => run_cluster(args.merge(&file)?, &mut out)?,
        Command::Recommend(args) => run_recommend(args.merge(&file)?, &mut out)?,
        Command::GenData(args) => run_gen(args.merge(&file)?, &mut out)?,
        Command::Evaluate(args) => {
            let args = args.merge(&file)?;
            let report = evaluate(&args.data.load()?, &args.params())?;
            emit(&[report], args.out.as_deref(), None, &mut out)?;
        }
        Command::Baseline(args) => {
            let args = args.merge(&file)?;
            let params = args.params();
            let report = baseline_pearson(&args.data.load()?, params.neighbors, params.seed)?;
            emit(&[report], args.out.as_deref(), None, &mut out)?;
        }
        Command::Sweep(args) => run_sweep(args.merge(&file)?, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn load_model(path: &Path) -> Result<LinearSvmModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LinearSvmModel::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

fn run_detect(args: DetectArgs, out: &mut impl Write) -> Result<()> {
    let image = load_image(need(&args.image, "image")?)?;
    let model = load_model(need(&args.model, "model")?)?;
    for d in detect(&image, &model, &args.window.params()?) {
        let r = d.region;
        writeln!(out, "{} {} {} {} {} {}", r.x, r.y, r.w, r.h, d.score, d.scale)?;
    }
    Ok(())
}

/// PPM files in `dir`, sorted by name.
fn ppm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")));
    files.sort();
    Ok(files)
}

fn descriptors(dir: &Path) -> Result<Vec<HogDescriptor>> {
    ppm_files(dir)?
        .iter()
        .map(|p| {
            let img = load_image(p)?;
            let img = if (img.width(), img.height()) == (WINDOW_WIDTH, WINDOW_HEIGHT) {
                img
            } else {
                eprintln!("resizing {} to {WINDOW_WIDTH}x{WINDOW_HEIGHT}", p.display());
                img.resize_nearest(WINDOW_WIDTH, WINDOW_HEIGHT)
            };
            Ok(window_descriptor(&img, (0, 0))?)
        })
        .collect()
}

fn run_train(args: TrainArgs, out: &mut impl Write) -> Result<()> {
    let pos = descriptors(need(&args.positives, "positives")?)?;
    let neg = descriptors(need(&args.negatives, "negatives")?)?;
    let d = SvmParams::default();
    let params = SvmParams {
        epochs: args.epochs.unwrap_or(d.epochs),
        learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
        regularization: args.regularization.unwrap_or(d.regularization),
        seed: args.seed.unwrap_or(d.seed),
    };
    let model = train_svm(&pos, &neg, &params)?;
    let path = need(&args.out, "out")?;
    std::fs::write(path, model.to_json()).with_context(|| format!("writing {}", path.display()))?;
    let tp = pos.iter().filter(|d| model.score(d) >= 0.0).count();
    let tn = neg.iter().filter(|d| model.score(d) < 0.0).count();
    writeln!(out, "positives,negatives,train_accuracy")?;
    writeln!(out, "{},{},{}", pos.len(), neg.len(), (tp + tn) as f64 / (pos.len() + neg.len()) as f64)?;
    Ok(())
}

fn run_extract(args: ExtractArgs, out: &mut impl Write) -> Result<()> {
    let model = load_model(need(&args.model, "model")?)?;
    let params = args.window.params()?;
    let mut features = Vec::new();
    writeln!(out, "item_id,x,y,w,h,detections")?;
    for path in ppm_files(need(&args.images, "images")?)? {
        let id = path.file_stem().and_then(|s| s.to_str()).context("image file name is not UTF-8")?;
        let img = load_image(&path)?;
        let hits = detect(&img, &model, &params);
        let r = clothes_region(&hits, &img);
        writeln!(out, "{id},{},{},{},{},{}", r.x, r.y, r.w, r.h, hits.len())?;
        features.push(color_vector(&img, r, id)?);
    }
    if features.is_empty() {
        bail!("no .ppm images found");
    }
    write_features(need(&args.out, "out")?, &features)?;
    Ok(())
}

fn run_cluster(args: ClusterArgs, out: &mut impl Write) -> Result<()> {
    let features = read_features(need(&args.features, "features")?)?;
    let points: Vec<&[f64]> = features.iter().map(|f| f.per.as_slice()).collect();
    let model = kmeans(&points, &KMeansParams::new(args.k.unwrap_or(30), args.seed.unwrap_or(42)))?;
    let ids: Vec<String> = features.iter().map(|f| f.item_id.clone()).collect();
    let groups = build_group_matrix(&membership(&points, &model)?, &ids)?;
    let groups_path = need(&args.out, "out")?;
    save_groups(&groups, groups_path)?;
    let centers = args.centers.clone().unwrap_or_else(|| groups_path.with_extension("centers.csv"));
    save_model(&model, &centers, centers.with_extension("json"))?;
    writeln!(out, "k,iterations,sse")?;
    writeln!(out, "{},{},{}", model.k, model.iterations, model.sse)?;
    Ok(())
}

fn run_recommend(args: RecommendArgs, out: &mut impl Write) -> Result<()> {
    let ratings = load_ratings(need(&args.ratings, "ratings")?, args.scale_range.scale()?)?;
    let groups = match &args.groups {
        Some(p) => load_groups(p)?,
        None => GroupRatingMatrix::empty(),
    };
    let matrix = extend(&ratings, &groups, args.scale.unwrap_or(5.0))?;
    let user_id = need(&args.user, "user")?;
    let user = ratings.user_index(user_id).with_context(|| format!("unknown user {user_id}"))?;
    let sims = similarity_matrix(&matrix, args.weight.unwrap_or(0.5))?;
    let options = NeighborOptions {
        neighbors: args.neighbors.unwrap_or(50),
        exclude_negative: args.exclude_negative.unwrap_or(false),
    };
    writeln!(out, "rank,item_id,prediction")?;
    for (rank, p) in recommend(user, args.top.unwrap_or(10), &sims, &options, &matrix)?.iter().enumerate() {
        writeln!(out, "{},{},{}", rank + 1, p.item_id, p.value)?;
    }
    Ok(())
}

fn run_gen(args: GenArgs, out: &mut impl Write) -> Result<()> {
    let d = SyntheticConfig::default();
    let config = SyntheticConfig::new(
        args.users.unwrap_or(d.n_users),
        args.items.unwrap_or(d.n_items),
        args.count.unwrap_or(d.n_ratings),
        args.seed.unwrap_or(d.seed),
        args.strength.unwrap_or(d.preference_strength),
    );
    let data = gen_synthetic(&config)?;
    let dir = need(&args.out, "out")?;
    data.save(dir)?;
    writeln!(out, "users,items,ratings")?;
    writeln!(out, "{},{},{}", data.ratings().n_users(), data.features().len(), data.ratings().len())?;
    Ok(())
}

fn run_sweep(args: SweepArgs, out: &mut impl Write) -> Result<()> {
    let base = args.eval.params();
    let axis = |text: &Option<String>, name: &str, fallback: f64| -> Result<Vec<f64>> {
        text.as_deref().map_or(Ok(vec![fallback]), |s| list(s, name))
    };
    let counts = |v: Vec<f64>, name: &str| -> Result<Vec<usize>> {
        v.into_iter()
            .map(|x| if x >= 0.0 && x.fract() == 0.0 { Ok(x as usize) } else { bail!("--{name} takes whole numbers, got {x}") })
            .collect()
    };
    let grid = SweepGrid {
        ks: counts(axis(&args.k_list, "k-list", base.k as f64)?, "k-list")?,
        neighbors: counts(axis(&args.neighbor_list, "neighbor-list", base.neighbors as f64)?, "neighbor-list")?,
        weights: axis(&args.weight_list, "weight-list", base.weight)?,
        scale_factors: axis(&args.scale_list, "scale-list", base.scale_factor)?,
    };
    let reports = sweep(&args.eval.data.load()?, &grid, &base)?;
    let svg = args.svg.as_deref().map(|p| (p, SweepAxis::infer(&reports)));
    emit(&reports, args.eval.out.as_deref(), svg, out)
}

fn emit(reports: &[EvalReport], path: Option<&Path>, svg: Option<(&Path, SweepAxis)>, out: &mut impl Write) -> Result<()> {
    for r in reports.iter().filter(|r| r.skipped > 0) {
        eprintln!("k={} N={}: {} withheld ratings on unrated items skipped", r.params.k, r.params.neighbors, r.skipped);
    }
    write_reports(reports, &mut *out)?;
    match (path, svg) {
        (Some(p), svg) => emit_report(reports, p, svg)?,
        (None, Some((svg_path, axis))) => std::fs::write(svg_path, eval::render_svg(reports, axis))?,
        (None, None) => {}
    }
    Ok(())
}
