//! Synthetic person-detection fixture: a drawn figure pasted into a flat scene,
//! with matching positive and negative training crops. Used by the tests,
//! the benchmarks and the `train-svm` smoke path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{WINDOW_HEIGHT, WINDOW_WIDTH};
use crate::imaging::{Region, RgbImage};

pub const BACKGROUND: [u8; 3] = [200, 200, 190];
const SKIN: [u8; 3] = [222, 170, 140];
const STRIPE_A: [u8; 3] = [180, 30, 40];
const STRIPE_B: [u8; 3] = [30, 40, 110];
const TROUSERS: [u8; 3] = [45, 45, 60];

pub struct PatchFixture {
    pub scene: RgbImage,
    pub truth: Region,
    pub flat: RgbImage,
    pub positives: Vec<RgbImage>,
    pub negatives: Vec<RgbImage>,
}

fn inside_rect(x: i64, y: i64, x0: i64, y0: i64, x1: i64, y1: i64) -> bool {
    (x0..x1).contains(&x) && (y0..y1).contains(&y)
}

/// A 64x128 window holding a standing figure offset by `(dx, dy)`.
pub fn figure(dx: i64, dy: i64) -> RgbImage {
    RgbImage::from_fn(WINDOW_WIDTH, WINDOW_HEIGHT, |x, y| {
        let (x, y) = (x as i64 - dx, y as i64 - dy);
        let (hx, hy) = (x - 32, y - 18);
        if hx * hx + hy * hy <= 100 {
            SKIN
        } else if inside_rect(x, y, 18, 30, 46, 80) {
            if (y / 6) % 2 == 0 {
                STRIPE_A
            } else {
                STRIPE_B
            }
        } else if inside_rect(x, y, 11, 32, 17, 72) || inside_rect(x, y, 47, 32, 53, 72) {
            SKIN
        } else if inside_rect(x, y, 21, 80, 30, 122) || inside_rect(x, y, 34, 80, 43, 122) {
            TROUSERS
        } else {
            BACKGROUND
        }
    })
}

fn add_noise(image: &RgbImage, amplitude: i16, rng: &mut impl Rng) -> RgbImage {
    RgbImage::from_fn(image.width(), image.height(), |x, y| {
        image.get(x, y).map(|c| (i16::from(c) + rng.random_range(-amplitude..=amplitude)).clamp(0, 255) as u8)
    })
}

/// Copies `patch` into `scene` with its top-left corner at `(x, y)`; pixels
/// falling outside the scene are dropped.
pub fn paste(scene: &RgbImage, patch: &RgbImage, x: usize, y: usize) -> RgbImage {
    RgbImage::from_fn(scene.width(), scene.height(), |px, py| {
        if (x..x + patch.width()).contains(&px) && (y..y + patch.height()).contains(&py) {
            patch.get(px - x, py - y)
        } else {
            scene.get(px, py)
        }
    })
}

/// Builds the fixture with `n_pos` positive and `n_neg` negative crops.
///
/// Negatives cycle through flat background, noisy background, and figures
/// displaced far enough that they overlap the window by less than half.
pub fn patch_fixture(seed: u64, n_pos: usize, n_neg: usize) -> PatchFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = Region::new(96, 64, WINDOW_WIDTH, WINDOW_HEIGHT);
    let flat = RgbImage::filled(256, 256, BACKGROUND);
    let scene = paste(&flat, &add_noise(&figure(0, 0), 4, &mut rng), truth.x, truth.y);

    let positives = (0..n_pos)
        .map(|_| {
            let (dx, dy) = (rng.random_range(-2..=2), rng.random_range(-2..=2));
            add_noise(&figure(dx, dy), 6, &mut rng)
        })
        .collect();
    let negatives = (0..n_neg)
        .map(|i| match i % 4 {
            0 => RgbImage::filled(WINDOW_WIDTH, WINDOW_HEIGHT, BACKGROUND),
            1 => add_noise(&RgbImage::filled(WINDOW_WIDTH, WINDOW_HEIGHT, BACKGROUND), 6, &mut rng),
            2 => {
                let sign = if rng.random_bool(0.5) { 1 } else { -1 };
                add_noise(&figure(sign * rng.random_range(32..=44), 0), 6, &mut rng)
            }
            _ => {
                let sign = if rng.random_bool(0.5) { 1 } else { -1 };
                add_noise(&figure(0, sign * rng.random_range(56..=72)), 6, &mut rng)
            }
        })
        .collect();
    PatchFixture {
        scene,
        truth,
        flat,
        positives,
        negatives,
    }
}
