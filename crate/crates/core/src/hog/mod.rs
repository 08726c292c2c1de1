//! Histogram-of-oriented-gradients person detection.
//!
//! The chain runs on RGB with no gamma correction: centered `[-1, 0, 1]`
//! derivatives per channel (the channel with the largest gradient norm wins),
//! 9 unsigned orientation bins over 8x8 pixel cells, 2x2-cell blocks at a
//! one-cell stride normalized with L2-Hys, and 64x128 detector windows scored
//! by a linear SVM.

mod detect;
pub mod fixture;
mod svm;

pub use detect::{detect, non_max_suppression, DetectParams, Detection, NMS_IOU_THRESHOLD};
pub use svm::{svm_objective, train_svm, LinearSvmModel, SvmParams};

use thiserror::Error;

use crate::imaging::{ImageError, Region, RgbImage};

pub const CELL_SIZE: usize = 8;
pub const ORIENTATION_BINS: usize = 9;
pub const BLOCK_CELLS: usize = 2;
pub const BLOCK_LEN: usize = BLOCK_CELLS * BLOCK_CELLS * ORIENTATION_BINS;
pub const WINDOW_WIDTH: usize = 64;
pub const WINDOW_HEIGHT: usize = 128;
pub const DESCRIPTOR_LEN: usize = (WINDOW_WIDTH / CELL_SIZE - 1) * (WINDOW_HEIGHT / CELL_SIZE - 1) * BLOCK_LEN;

/// Guard added (squared) under the square root of each L2 normalization.
pub const L2HYS_EPSILON: f64 = 1e-5;
/// Ceiling applied between the two L2 normalizations.
pub const L2HYS_CLIP: f64 = 0.2;

const BIN_WIDTH: f64 = 180.0 / ORIENTATION_BINS as f64;

#[derive(Debug, Error)]
pub enum HogError {
    #[error("image {width}x{height} is smaller than the 3x3 gradient support")]
    TooSmall { width: usize, height: usize },
    #[error("detector window at ({x}, {y}) does not fit a {width}x{height} image")]
    WindowOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("descriptor length {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training set has no {0} examples")]
    EmptyClass(&'static str),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Per-pixel gradient magnitude and unsigned orientation in degrees `[0, 180)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    orientation: Vec<f64>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn orientation(&self) -> &[f64] {
        &self.orientation
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.magnitude[i], self.orientation[i])
    }

    /// Builds a field from raw parts; orientations are folded into `[0, 180)`.
    pub fn from_parts(
        width: usize,
        height: usize,
        magnitude: Vec<f64>,
        orientation: Vec<f64>,
    ) -> Option<Self> {
        if magnitude.len() != width * height
            || orientation.len() != magnitude.len()
            || magnitude.iter().any(|m| !(m.is_finite() && *m >= 0.0))
        {
            return None;
        }
        let orientation = orientation.into_iter().map(fold_unsigned).collect();
        Some(Self {
            width,
            height,
            magnitude,
            orientation,
        })
    }

    /// Same orientations with every magnitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            magnitude: self.magnitude.iter().map(|m| m * factor).collect(),
            ..self.clone()
        }
    }
}

fn fold_unsigned(degrees: f64) -> f64 {
    let folded = degrees.rem_euclid(180.0);
    // rem_euclid can round up to exactly 180 for tiny negative inputs
    if folded >= 180.0 {
        0.0
    } else {
        folded
    }
}

/// Centered `[-1, 0, 1]` derivatives with replicated borders.
pub fn compute_gradients(image: &RgbImage) -> Result<GradientField, HogError> {
    let (width, height) = (image.width(), image.height());
    if width < 3 || height < 3 {
        return Err(HogError::TooSmall { width, height });
    }
    let px = image.pixels();
    let mut magnitude = Vec::with_capacity(width * height);
    let mut orientation = Vec::with_capacity(width * height);
    for y in 0..height {
        let up = y.saturating_sub(1) * width;
        let down = (y + 1).min(height - 1) * width;
        let row = y * width;
        for x in 0..width {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(width - 1);
            let mut best = (0.0f64, 0.0f64, 0.0f64);
            let (l, r, u, d) = (px[row + left], px[row + right], px[up + x], px[down + x]);
            for c in 0..3 {
                let dx = f64::from(r[c]) - f64::from(l[c]);
                let dy = f64::from(d[c]) - f64::from(u[c]);
                let norm2 = dx * dx + dy * dy;
                if norm2 > best.0 {
                    best = (norm2, dx, dy);
                }
            }
            let (norm2, dx, dy) = best;
            if norm2 == 0.0 {
                magnitude.push(0.0);
                orientation.push(0.0);
            } else {
                magnitude.push(norm2.sqrt());
                orientation.push(fold_unsigned(dy.atan2(dx).to_degrees()));
            }
        }
    }
    Ok(GradientField {
        width,
        height,
        magnitude,
        orientation,
    })
}

/// 9-bin orientation histograms over non-overlapping 8x8 cells, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    cells_x: usize,
    cells_y: usize,
    hist: Vec<[f64; ORIENTATION_BINS]>,
}

impl CellGrid {
    pub fn cells_x(&self) -> usize {
        self.cells_x
    }

    pub fn cells_y(&self) -> usize {
        self.cells_y
    }

    pub fn cell(&self, cx: usize, cy: usize) -> &[f64; ORIENTATION_BINS] {
        &self.hist[cy * self.cells_x + cx]
    }

    pub fn total(&self) -> f64 {
        self.hist.iter().flatten().sum()
    }
}

/// Center of orientation bin `b`, in degrees.
pub fn bin_center(b: usize) -> f64 {
    BIN_WIDTH * (b as f64 + 0.5)
}

/// Splits `magnitude` between the two nearest bin centers, wrapping at 180.
fn vote(hist: &mut [f64; ORIENTATION_BINS], magnitude: f64, orientation: f64) {
    let pos = orientation / BIN_WIDTH - 0.5;
    let floor = pos.floor();
    let frac = pos - floor;
    let lo = (floor as i64).rem_euclid(ORIENTATION_BINS as i64) as usize;
    let hi = (lo + 1) % ORIENTATION_BINS;
    hist[lo] += magnitude * (1.0 - frac);
    hist[hi] += magnitude * frac;
}

/// Orientation-binned cell histograms. Pixels past the last whole cell are ignored.
pub fn compute_cell_histograms(grad: &GradientField) -> CellGrid {
    let cells_x = grad.width / CELL_SIZE;
    let cells_y = grad.height / CELL_SIZE;
    let mut hist = vec![[0.0; ORIENTATION_BINS]; cells_x * cells_y];
    for y in 0..cells_y * CELL_SIZE {
        for x in 0..cells_x * CELL_SIZE {
            let (m, o) = grad.at(x, y);
            if m > 0.0 {
                vote(&mut hist[(y / CELL_SIZE) * cells_x + x / CELL_SIZE], m, o);
            }
        }
    }
    CellGrid {
        cells_x,
        cells_y,
        hist,
    }
}

fn l2_normalize(values: &mut [f64]) {
    let norm = (values.iter().map(|v| v * v).sum::<f64>() + L2HYS_EPSILON * L2HYS_EPSILON).sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
}

/// L2 normalize, clip at [`L2HYS_CLIP`], L2 normalize again. A zero block stays zero.
pub fn l2_hys(values: &mut [f64]) {
    l2_normalize(values);
    values.iter_mut().for_each(|v| *v = v.min(L2HYS_CLIP));
    l2_normalize(values);
}

/// 2x2-cell blocks at a one-cell stride, row-major, each L2-Hys normalized.
pub fn normalize_blocks(cells: &CellGrid) -> Vec<[f64; BLOCK_LEN]> {
    let blocks_x = cells.cells_x.saturating_sub(BLOCK_CELLS - 1);
    let blocks_y = cells.cells_y.saturating_sub(BLOCK_CELLS - 1);
    let mut blocks = Vec::with_capacity(blocks_x * blocks_y);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut block = [0.0; BLOCK_LEN];
            for dy in 0..BLOCK_CELLS {
                for dx in 0..BLOCK_CELLS {
                    let offset = (dy * BLOCK_CELLS + dx) * ORIENTATION_BINS;
                    block[offset..offset + ORIENTATION_BINS].copy_from_slice(cells.cell(bx + dx, by + dy));
                }
            }
            l2_hys(&mut block);
            blocks.push(block);
        }
    }
    blocks
}

#[derive(Debug, Clone, PartialEq)]
pub struct HogDescriptor(Vec<f64>);

impl HogDescriptor {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.0.chunks_exact(BLOCK_LEN)
    }
}

/// Descriptor of an entire gradient field, blocks concatenated row-major.
pub fn descriptor_from_gradients(grad: &GradientField) -> HogDescriptor {
    let blocks = normalize_blocks(&compute_cell_histograms(grad));
    HogDescriptor(blocks.into_iter().flatten().collect())
}

/// Descriptor of the 64x128 window whose top-left corner is `top_left`.
///
/// Gradients are taken over the window alone, so a window cut from a scene
/// and the same pixels supplied as a standalone crop give identical output.
pub fn window_descriptor(image: &RgbImage, top_left: (usize, usize)) -> Result<HogDescriptor, HogError> {
    let (x, y) = top_left;
    let region = Region::new(x, y, WINDOW_WIDTH, WINDOW_HEIGHT);
    if !region.fits_within(image.width(), image.height()) {
        return Err(HogError::WindowOutOfBounds {
            x,
            y,
            width: image.width(),
            height: image.height(),
        });
    }
    let window = image.crop(region)?;
    Ok(descriptor_from_gradients(&compute_gradients(&window)?))
}
