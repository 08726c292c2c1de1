use std::cmp::Ordering;

use rayon::prelude::*;

use super::{window_descriptor, LinearSvmModel, WINDOW_HEIGHT, WINDOW_WIDTH};
use crate::imaging::{Region, RgbImage};

/// Overlap above which the lower-scoring of two detections is suppressed.
pub const NMS_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Window in original-image coordinates.
    pub region: Region,
    pub score: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectParams {
    pub threshold: f64,
    pub stride: usize,
    /// Window enlargement factors; the image is downscaled by each one.
    pub scales: Vec<f64>,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            threshold: 0.0,
            stride: 8,
            scales: vec![1.0],
        }
    }
}

fn by_score_desc(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.region.y.cmp(&b.region.y))
        .then(a.region.x.cmp(&b.region.x))
        .then(a.scale.total_cmp(&b.scale))
}

/// Greedy suppression: keep the best remaining detection, drop everything
/// overlapping it by more than `iou_threshold`, repeat.
pub fn non_max_suppression(mut detections: Vec<Detection>, iou_threshold: f64) -> Vec<Detection> {
    detections.sort_by(by_score_desc);
    let mut kept: Vec<Detection> = Vec::new();
    for det in detections {
        if kept.iter().all(|k| k.region.iou(&det.region) <= iou_threshold) {
            kept.push(det);
        }
    }
    kept
}

/// Sliding-window detection over a nearest-neighbour pyramid.
///
/// Scales at which the image shrinks below one window are skipped, so an
/// image too small everywhere yields no detections. Window scoring runs in
/// parallel; suppression sees the fully collected set.
pub fn detect(image: &RgbImage, model: &LinearSvmModel, params: &DetectParams) -> Vec<Detection> {
    let stride = params.stride.max(1);
    let mut candidates = Vec::new();
    for &scale in params.scales.iter().filter(|s| s.is_finite() && **s > 0.0) {
        let width = (image.width() as f64 / scale).round() as usize;
        let height = (image.height() as f64 / scale).round() as usize;
        if width < WINDOW_WIDTH || height < WINDOW_HEIGHT {
            continue;
        }
        let scaled;
        let source = if width == image.width() && height == image.height() {
            image
        } else {
            scaled = image.resize_nearest(width, height);
            &scaled
        };
        let positions: Vec<(usize, usize)> = (0..=height - WINDOW_HEIGHT)
            .step_by(stride)
            .flat_map(|y| (0..=width - WINDOW_WIDTH).step_by(stride).map(move |x| (x, y)))
            .collect();
        let found: Vec<Detection> = positions
            .par_iter()
            .filter_map(|&(x, y)| {
                let desc = window_descriptor(source, (x, y)).expect("window positions are in bounds");
                let score = model.score(&desc);
                (score >= params.threshold).then(|| Detection {
                    region: map_back(x, y, scale, image),
                    score,
                    scale,
                })
            })
            .collect();
        candidates.extend(found);
    }
    non_max_suppression(candidates, NMS_IOU_THRESHOLD)
}

fn map_back(x: usize, y: usize, scale: f64, image: &RgbImage) -> Region {
    let ox = ((x as f64 * scale).round() as usize).min(image.width() - 1);
    let oy = ((y as f64 * scale).round() as usize).min(image.height() - 1);
    let w = ((WINDOW_WIDTH as f64 * scale).round() as usize).clamp(1, image.width() - ox);
    let h = ((WINDOW_HEIGHT as f64 * scale).round() as usize).clamp(1, image.height() - oy);
    Region::new(ox, oy, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hog::DESCRIPTOR_LEN;

    fn det(x: usize, y: usize, score: f64) -> Detection {
        Detection {
            region: Region::new(x, y, 64, 128),
            score,
            scale: 1.0,
        }
    }

    #[test]
    fn nms_keeps_best_of_overlapping() {
        let out = non_max_suppression(vec![det(0, 0, 1.0), det(8, 0, 2.0), det(200, 0, 0.5)], 0.5);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].score, 2.0);
        assert_eq!(out[1].region.x, 200);
    }

    #[test]
    fn nms_keeps_pairs_at_exactly_threshold_or_below() {
        // dx = 32 on a 64-wide window: IoU = 32/96
        let out = non_max_suppression(vec![det(0, 0, 1.0), det(32, 0, 0.9)], 0.5);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn infinite_threshold_and_small_images_give_nothing() {
        let model = LinearSvmModel::new(vec![0.0; DESCRIPTOR_LEN], 1.0).unwrap();
        let img = RgbImage::filled(80, 140, [9, 9, 9]);
        let params = DetectParams {
            threshold: f64::INFINITY,
            ..DetectParams::default()
        };
        assert!(detect(&img, &model, &params).is_empty());
        let tiny = RgbImage::filled(60, 140, [9, 9, 9]);
        assert!(detect(&tiny, &model, &DetectParams::default()).is_empty());
    }

    #[test]
    fn larger_scales_map_back_to_original_coordinates() {
        let model = LinearSvmModel::new(vec![0.0; DESCRIPTOR_LEN], 1.0).unwrap();
        let img = RgbImage::filled(128, 256, [9, 9, 9]);
        let params = DetectParams {
            threshold: 0.0,
            stride: 8,
            scales: vec![2.0],
        };
        let out = detect(&img, &model, &params);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].region, Region::new(0, 0, 128, 256));
        assert_eq!(out[0].scale, 2.0);
    }
}
