//! Offline evaluation: user-level train/test split, MAE, the hybrid pipeline
//! and its Pearson-only baseline, parameter sweeps, and a seeded synthetic
//! dataset generator.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cf::{predict, similarity_matrix, CfError, NeighborOptions, SimilarityMatrix};
use crate::clustering::{kmeans, membership, ClusterError, KMeansParams};
use crate::color::{read_features, write_features, ColorError, ColorVector, COLOR_CODES};
use crate::ratings::{
    build_group_matrix, extend, load_ratings, save_ratings, ExtendedMatrix, GroupRatingMatrix, RatingError, RatingMatrix, RatingScale,
};

pub const RATINGS_FILE: &str = "ratings.csv";
pub const FEATURES_FILE: &str = "features.csv";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("need at least two users to split, found {0}")]
    TooFewUsers(usize),
    #[error("no prediction pairs to score")]
    NoPairs,
    #[error("item {0} is rated but has no color vector")]
    MissingFeatures(String),
    #[error("cannot place {requested} ratings in a {users}x{items} matrix")]
    Infeasible {
        requested: usize,
        users: usize,
        items: usize,
    },
    #[error("preference strength {0} is outside [0, 1]")]
    BadStrength(f64),
    #[error("parameter grid has an empty axis")]
    EmptyGrid,
    #[error("report file: {0}")]
    Report(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Rating(#[from] RatingError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ratings plus the color vector of every item.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ratings: RatingMatrix,
    features: Vec<ColorVector>,
}

impl Dataset {
    pub fn new(ratings: RatingMatrix, features: Vec<ColorVector>) -> Result<Self, EvalError> {
        let known: std::collections::HashSet<&str> = features.iter().map(|f| f.item_id.as_str()).collect();
        if let Some(missing) = ratings
            .item_ids()
            .iter()
            .enumerate()
            .find(|(i, id)| !ratings.item_ratings(*i).is_empty() && !known.contains(id.as_str()))
        {
            return Err(EvalError::MissingFeatures(missing.1.clone()));
        }
        Ok(Self { ratings, features })
    }

    pub fn ratings(&self) -> &RatingMatrix {
        &self.ratings
    }

    pub fn features(&self) -> &[ColorVector] {
        &self.features
    }

    pub fn scale(&self) -> RatingScale {
        self.ratings.scale()
    }

    /// Reads a ratings CSV and a features CSV.
    pub fn load(ratings: impl AsRef<Path>, features: impl AsRef<Path>, scale: RatingScale) -> Result<Self, EvalError> {
        Dataset::new(load_ratings(ratings, scale)?, read_features(features)?)
    }

    /// Writes `ratings.csv` and `features.csv` into `dir`, creating it if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), EvalError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        save_ratings(&self.ratings, dir.join(RATINGS_FILE))?;
        write_features(dir.join(FEATURES_FILE), &self.features)?;
        Ok(())
    }

    /// Copy with every `(item, user)` rating listed in `changes` replaced.
    pub fn with_ratings_replaced(&self, changes: &[(String, String, f64)]) -> Result<Self, EvalError> {
        let lookup: HashMap<(&str, &str), f64> = changes.iter().map(|(i, u, r)| ((i.as_str(), u.as_str()), *r)).collect();
        let mut ratings = RatingMatrix::with_universe(
            self.ratings.scale(),
            self.ratings.item_ids().iter().map(String::as_str),
            self.ratings.user_ids().iter().map(String::as_str),
        );
        for (item, user, r) in self.ratings.entries() {
            ratings.insert(item, user, lookup.get(&(item, user)).copied().unwrap_or(r))?;
        }
        Dataset::new(ratings, self.features.clone())
    }
}

/// One withheld rating of a test user.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldOut {
    pub user_id: String,
    pub item_id: String,
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// Training users' ratings plus the revealed half of each test user's.
    pub train: RatingMatrix,
    pub test_users: Vec<String>,
    pub withheld: Vec<HeldOut>,
}

/// Number of test users: `round(fraction * users)`, halves rounded up,
/// kept within `1..users`.
pub fn test_user_count(users: usize, fraction: f64) -> usize {
    ((fraction * users as f64 + 0.5).floor() as usize).clamp(1, users - 1)
}

/// Seeded user-level split.
///
/// A shuffled `round(fraction * users)` users become test users. Each test
/// user's ratings are shuffled; the first half (rounded down) stays visible
/// to the predictor and the rest is withheld for scoring. The train matrix
/// keeps every dataset item and user in its universe. The outcome depends on
/// ids and ratings only, not on the order they were loaded in.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Split, EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::BadFraction(test_fraction));
    }
    let ratings = &dataset.ratings;
    let n_users = ratings.n_users();
    if n_users < 2 {
        return Err(EvalError::TooFewUsers(n_users));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users: Vec<usize> = (0..n_users).collect();
    users.sort_by(|&a, &b| ratings.user_ids()[a].cmp(&ratings.user_ids()[b]));
    users.shuffle(&mut rng);
    let mut test: Vec<usize> = users[..test_user_count(n_users, test_fraction)].to_vec();
    test.sort_unstable();

    let mut is_test = vec![false; n_users];
    test.iter().for_each(|&u| is_test[u] = true);

    let item_ids = dataset
        .features
        .iter()
        .map(|f| f.item_id.as_str())
        .chain(ratings.item_ids().iter().map(String::as_str));
    let mut train = RatingMatrix::with_universe(ratings.scale(), item_ids, ratings.user_ids().iter().map(String::as_str));
    let mut withheld = Vec::new();
    let mut by_id: Vec<usize> = (0..n_users).collect();
    by_id.sort_by(|&a, &b| ratings.user_ids()[a].cmp(&ratings.user_ids()[b]));
    for u in by_id {
        let user_id = &ratings.user_ids()[u];
        let mut items: Vec<(usize, f64)> = ratings.user_ratings(u).iter().map(|(&i, &r)| (i, r)).collect();
        items.sort_by(|a, b| ratings.item_ids()[a.0].cmp(&ratings.item_ids()[b.0]));
        let visible = if is_test[u] {
            items.shuffle(&mut rng);
            items.len() / 2
        } else {
            items.len()
        };
        for (n, &(i, r)) in items.iter().enumerate() {
            let item_id = &ratings.item_ids()[i];
            if n < visible {
                train.insert(item_id, user_id, r)?;
            } else {
                withheld.push(HeldOut {
                    user_id: user_id.clone(),
                    item_id: item_id.clone(),
                    rating: r,
                });
            }
        }
    }
    Ok(Split {
        train,
        test_users: test.iter().map(|&u| ratings.user_ids()[u].clone()).collect(),
        withheld,
    })
}

/// Mean absolute error over `(prediction, truth)` pairs.
pub fn mae(pairs: &[(f64, f64)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    Ok(pairs.iter().map(|(p, r)| (p - r).abs()).sum::<f64>() / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    /// Number of color groups; 0 disables the group columns.
    pub k: usize,
    /// Neighbourhood size `N`.
    pub neighbors: usize,
    /// Pearson share of the combined similarity.
    pub weight: f64,
    pub scale_factor: f64,
    pub seed: u64,
    pub test_fraction: f64,
    pub exclude_negative: bool,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            k: 30,
            neighbors: 50,
            weight: 0.5,
            scale_factor: 5.0,
            seed: 42,
            test_fraction: 0.2,
            exclude_negative: false,
        }
    }
}

impl EvalParams {
    /// The classic-Pearson configuration: no groups, Pearson only.
    pub fn baseline(neighbors: usize, seed: u64) -> Self {
        Self {
            k: 0,
            neighbors,
            weight: 1.0,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub params: EvalParams,
    pub mae: f64,
    /// Number of scored prediction pairs.
    pub pairs: usize,
    /// Withheld ratings on items with no training ratings, which are not scored.
    pub skipped: usize,
}

/// Everything computed from the training side of a split.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: Split,
    pub extended: ExtendedMatrix,
    pub sims: SimilarityMatrix,
}

/// Split, cluster all item features, extend the train matrix, and compute similarities.
pub fn prepare(dataset: &Dataset, params: &EvalParams) -> Result<Prepared, EvalError> {
    let split = split(dataset, params.test_fraction, params.seed)?;
    let groups = if params.k == 0 {
        GroupRatingMatrix::empty()
    } else {
        let by_id: HashMap<&str, &ColorVector> = dataset.features.iter().map(|f| (f.item_id.as_str(), f)).collect();
        let item_ids = split.train.item_ids();
        let points = item_ids
            .iter()
            .map(|id| by_id.get(id.as_str()).map(|f| f.per.as_slice()).ok_or_else(|| EvalError::MissingFeatures(id.clone())))
            .collect::<Result<Vec<&[f64]>, _>>()?;
        let model = kmeans(&points, &KMeansParams::new(params.k, params.seed))?;
        build_group_matrix(&membership(&points, &model)?, item_ids)?
    };
    let extended = extend(&split.train, &groups, params.scale_factor)?;
    let sims = similarity_matrix(&extended, params.weight)?;
    Ok(Prepared { split, extended, sims })
}

/// Runs the full pipeline and scores every withheld rating.
pub fn evaluate(dataset: &Dataset, params: &EvalParams) -> Result<EvalReport, EvalError> {
    let prepared = prepare(dataset, params)?;
    let train = prepared.extended.ratings();
    let options = NeighborOptions {
        neighbors: params.neighbors,
        exclude_negative: params.exclude_negative,
    };
    let mut pairs = Vec::with_capacity(prepared.split.withheld.len());
    let mut skipped = 0;
    for held in &prepared.split.withheld {
        let item = train.item_index(&held.item_id).expect("train universe covers all items");
        let user = train.user_index(&held.user_id).expect("train universe covers all users");
        match predict(item, user, &prepared.sims, &options, &prepared.extended) {
            Ok(p) => pairs.push((p.value, held.rating)),
            Err(CfError::ColdItem(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(EvalReport {
        params: *params,
        mae: mae(&pairs)?,
        pairs: pairs.len(),
        skipped,
    })
}

/// Pearson-only prediction without group columns, on the same split as `evaluate`.
pub fn baseline_pearson(dataset: &Dataset, neighbors: usize, seed: u64) -> Result<EvalReport, EvalError> {
    evaluate(dataset, &EvalParams::baseline(neighbors, seed))
}

/// Axes of a sweep; the grid is their cartesian product, `k` outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub ks: Vec<usize>,
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
    pub scale_factors: Vec<f64>,
}

impl SweepGrid {
    pub fn points(&self, base: &EvalParams) -> Vec<EvalParams> {
        let mut out = Vec::new();
        for &k in &self.ks {
            for &neighbors in &self.neighbors {
                for &weight in &self.weights {
                    for &scale_factor in &self.scale_factors {
                        out.push(EvalParams {
                            k,
                            neighbors,
                            weight,
                            scale_factor,
                            ..*base
                        });
                    }
                }
            }
        }
        out
    }
}

/// Evaluates every grid point (in parallel); reports come back in grid order.
pub fn sweep(dataset: &Dataset, grid: &SweepGrid, base: &EvalParams) -> Result<Vec<EvalReport>, EvalError> {
    let points = grid.points(base);
    if points.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    points.par_iter().map(|p| evaluate(dataset, p)).collect()
}

/// Knobs of the synthetic generator beyond the required counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_ratings: usize,
    pub seed: u64,
    /// 0 makes ratings pure noise; 1 gives colors full influence.
    pub preference_strength: f64,
    /// Number of disjoint color themes items are drawn from.
    pub themes: usize,
    /// Color codes per theme.
    pub codes_per_theme: usize,
    /// Half-width of the rating swing driven by color preference.
    pub spread: f64,
    /// Standard deviation of the additive rating noise.
    pub noise: f64,
    /// Share of a code's affinity inherited from its theme.
    pub theme_weight: f64,
    pub scale: RatingScale,
}

impl SyntheticConfig {
    pub fn new(n_users: usize, n_items: usize, n_ratings: usize, seed: u64, preference_strength: f64) -> Self {
        Self {
            n_users,
            n_items,
            n_ratings,
            seed,
            preference_strength,
            themes: 8,
            codes_per_theme: 6,
            spread: 2.0,
            noise: 0.6,
            theme_weight: 0.7,
            scale: RatingScale::default(),
        }
    }
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self::new(163, 50, 1783, 42, 0.8)
    }
}

/// Generates a seeded stand-in dataset.
///
/// Color codes are partitioned into themes; each item takes 2-4 codes of one
/// theme with random weights. Each user holds an affinity in `[-1, 1]` per
/// code, mixing a per-theme and a per-code draw. A rating is
/// `round(mid + strength * spread * (affinity . color) + noise)` clamped to
/// the scale, for `n_ratings` distinct `(user, item)` pairs sampled uniformly.
pub fn gen_synthetic(config: &SyntheticConfig) -> Result<Dataset, EvalError> {
    let SyntheticConfig {
        n_users,
        n_items,
        n_ratings,
        seed,
        preference_strength,
        themes,
        codes_per_theme,
        spread,
        noise,
        theme_weight,
        scale,
    } = *config;
    if n_ratings > n_users * n_items {
        return Err(EvalError::Infeasible {
            requested: n_ratings,
            users: n_users,
            items: n_items,
        });
    }
    if !(0.0..=1.0).contains(&preference_strength) {
        return Err(EvalError::BadStrength(preference_strength));
    }
    let themes = themes.clamp(1, COLOR_CODES / 4);
    let codes_per_theme = codes_per_theme.clamp(4, COLOR_CODES / themes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut codes: Vec<usize> = (0..COLOR_CODES).collect();
    codes.shuffle(&mut rng);
    let palettes: Vec<&[usize]> = codes.chunks_exact(codes_per_theme).take(themes).collect();
    let mut theme_of_code = vec![None; COLOR_CODES];
    for (t, palette) in palettes.iter().enumerate() {
        palette.iter().for_each(|&c| theme_of_code[c] = Some(t));
    }

    let width = |n: usize| n.saturating_sub(1).to_string().len().max(3);
    let (iw, uw) = (width(n_items), width(n_users));
    let features: Vec<ColorVector> = (0..n_items)
        .map(|i| {
            let palette = palettes[rng.random_range(0..themes)];
            let n_codes = rng.random_range(2..=4);
            let picked = rand::seq::index::sample(&mut rng, palette.len(), n_codes);
            let weights: Vec<f64> = (0..n_codes).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut per = vec![0.0; COLOR_CODES];
            for (slot, w) in picked.iter().zip(&weights) {
                per[palette[slot]] = w / total;
            }
            ColorVector::new(format!("item{i:0iw$}"), per).expect("weights are positive")
        })
        .collect();

    let affinities: Vec<Vec<f64>> = (0..n_users)
        .map(|_| {
            let theme_pull: Vec<f64> = (0..themes).map(|_| rng.random_range(-1.0..=1.0)).collect();
            (0..COLOR_CODES)
                .map(|c| {
                    let own = rng.random_range(-1.0..=1.0);
                    match theme_of_code[c] {
                        Some(t) => theme_weight * theme_pull[t] + (1.0 - theme_weight) * own,
                        None => own,
                    }
                })
                .collect()
        })
        .collect();

    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite standard deviation");
    let mut cells = rand::seq::index::sample(&mut rng, n_users * n_items, n_ratings).into_vec();
    cells.sort_unstable();
    let mut ratings = RatingMatrix::with_universe(
        scale,
        features.iter().map(|f| f.item_id.as_str()),
        std::iter::empty(),
    );
    for cell in cells {
        let (u, i) = (cell / n_items, cell % n_items);
        let affinity: f64 = affinities[u].iter().zip(&features[i].per).map(|(a, c)| a * c).sum();
        let raw = scale.midpoint() + preference_strength * spread * affinity + normal.sample(&mut rng);
        ratings.insert(&features[i].item_id, &format!("user{u:0uw$}"), scale.clamp(raw.round()))?;
    }
    Dataset::new(ratings, features)
}

pub const REPORT_HEADER: [&str; 7] = ["k", "N", "w", "scale_factor", "seed", "mae", "pairs"];

/// Writes `k,N,w,scale_factor,seed,mae,pairs` rows in report order.
pub fn write_reports<W: io::Write>(reports: &[EvalReport], writer: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        let p = &r.params;
        w.write_record([
            p.k.to_string(),
            p.neighbors.to_string(),
            p.weight.to_string(),
            p.scale_factor.to_string(),
            p.seed.to_string(),
            r.mae.to_string(),
            r.pairs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a report CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportRow {
    pub k: usize,
    #[serde(rename = "N")]
    pub neighbors: usize,
    pub w: f64,
    pub scale_factor: f64,
    pub seed: u64,
    pub mae: f64,
    pub pairs: usize,
}

impl From<&EvalReport> for ReportRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            k: r.params.k,
            neighbors: r.params.neighbors,
            w: r.params.weight,
            scale_factor: r.params.scale_factor,
            seed: r.params.seed,
            mae: r.mae,
            pairs: r.pairs,
        }
    }
}

pub fn read_reports<R: io::Read>(reader: R) -> Result<Vec<ReportRow>, EvalError> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()?.iter().ne(REPORT_HEADER) {
        return Err(EvalError::Report("unexpected header".into()));
    }
    Ok(r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?)
}

/// Writes the report CSV to `path`, plus an SVG chart when `svg` is given.
pub fn emit_report(reports: &[EvalReport], path: impl AsRef<Path>, svg: Option<(&Path, SweepAxis)>) -> Result<(), EvalError> {
    if reports.is_empty() {
        return Err(EvalError::Report("no reports to write".into()));
    }
    write_reports(reports, std::fs::File::create(path)?)?;
    if let Some((svg_path, axis)) = svg {
        std::fs::write(svg_path, render_svg(reports, axis))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Clusters,
    Neighbors,
    Weight,
    ScaleFactor,
}

impl SweepAxis {
    fn value(self, p: &EvalParams) -> f64 {
        match self {
            SweepAxis::Clusters => p.k as f64,
            SweepAxis::Neighbors => p.neighbors as f64,
            SweepAxis::Weight => p.weight,
            SweepAxis::ScaleFactor => p.scale_factor,
        }
    }

    fn label(self) -> &'static str {
        match self {
            SweepAxis::Clusters => "clusters (k)",
            SweepAxis::Neighbors => "neighbours (N)",
            SweepAxis::Weight => "Pearson weight (w)",
            SweepAxis::ScaleFactor => "group scale factor",
        }
    }

    /// The axis that varies across `reports`, defaulting to neighbours.
    pub fn infer(reports: &[EvalReport]) -> SweepAxis {
        [SweepAxis::Clusters, SweepAxis::Neighbors, SweepAxis::Weight, SweepAxis::ScaleFactor]
            .into_iter()
            .find(|a| reports.iter().any(|r| a.value(&r.params) != a.value(&reports[0].params)))
            .unwrap_or(SweepAxis::Neighbors)
    }
}

/// Line chart of MAE against `axis`, one marker per report.
pub fn render_svg(reports: &[EvalReport], axis: SweepAxis) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let xs: Vec<f64> = reports.iter().map(|r| axis.value(&r.params)).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.mae).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, axis.label());
    let _ = writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">MAE</text>"#, H / 2.0, H / 2.0);
    let points: Vec<String> = xs.iter().zip(&ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    if points.len() > 1 {
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, points.join(" "));
    }
    for ((&x, &y), r) in xs.iter().zip(&ys).zip(reports) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"><title>{} = {}, MAE = {:.4}</title></circle>"#,
            px(x),
            py(y),
            axis.label(),
            axis.value(&r.params),
            y
        );
    }
    svg.push_str("</svg>\n");
    svg
}
