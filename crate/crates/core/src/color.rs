//! 72-code HSV quantization and per-item color-percentage vectors.

use std::path::Path;

use thiserror::Error;

use crate::hog::Detection;
use crate::imaging::{rgb_to_hsv, HsvPixel, Region, RgbImage};

pub const HUE_BINS: usize = 8;
pub const LEVEL_BINS: usize = 3;
pub const COLOR_CODES: usize = HUE_BINS * LEVEL_BINS * LEVEL_BINS;

#[derive(Debug, Error)]
pub enum ColorError {
    #[error("region {0:?} is empty or outside the image")]
    BadRegion(Region),
    #[error("feature file: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature file line {line}: {reason}")]
    Format { line: u64, reason: String },
}

/// Index `L = 9H + 3S + V` with `H` in `0..8` and `S`, `V` in `0..3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorCode(u8);

impl ColorCode {
    pub fn from_bins(hue: usize, saturation: usize, value: usize) -> Option<Self> {
        (hue < HUE_BINS && saturation < LEVEL_BINS && value < LEVEL_BINS)
            .then(|| ColorCode((9 * hue + 3 * saturation + value) as u8))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn bins(self) -> (usize, usize, usize) {
        let l = self.index();
        (l / 9, (l % 9) / 3, l % 3)
    }
}

/// Upper hue bounds (inclusive, degrees) of bins 1..=7; bin 0 wraps around red.
const HUE_UPPER: [f64; 7] = [40.0, 75.0, 155.0, 190.0, 270.0, 295.0, 315.0];

pub fn hue_bin(h: f64) -> usize {
    if h <= 20.0 || h > 315.0 {
        return 0;
    }
    1 + HUE_UPPER.iter().position(|&upper| h <= upper).unwrap_or(HUE_UPPER.len() - 1)
}

/// Saturation and value thresholds splitting `[0, 1]` into three levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub low: f64,
    pub high: f64,
}

impl Default for Quantizer {
    fn default() -> Self {
        Self { low: 0.2, high: 0.7 }
    }
}

impl Quantizer {
    fn level(&self, x: f64) -> usize {
        if x < self.low {
            0
        } else if x < self.high {
            1
        } else {
            2
        }
    }

    pub fn quantize(&self, p: HsvPixel) -> ColorCode {
        ColorCode::from_bins(hue_bin(p.h), self.level(p.s), self.level(p.v)).expect("bins are in range")
    }
}

pub fn quantize_hsv(p: HsvPixel) -> ColorCode {
    Quantizer::default().quantize(p)
}

/// Fraction of a picture's pixels falling in each of the 72 color codes.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorVector {
    pub item_id: String,
    pub per: Vec<f64>,
}

impl ColorVector {
    pub fn new(item_id: impl Into<String>, per: Vec<f64>) -> Option<Self> {
        (per.len() == COLOR_CODES && per.iter().all(|v| v.is_finite() && *v >= 0.0)).then(|| Self {
            item_id: item_id.into(),
            per,
        })
    }
}

pub fn color_vector(image: &RgbImage, region: Region, item_id: &str) -> Result<ColorVector, ColorError> {
    color_vector_with(&Quantizer::default(), image, region, item_id)
}

pub fn color_vector_with(
    quantizer: &Quantizer,
    image: &RgbImage,
    region: Region,
    item_id: &str,
) -> Result<ColorVector, ColorError> {
    if region.area() == 0 || !region.fits_within(image.width(), image.height()) {
        return Err(ColorError::BadRegion(region));
    }
    let mut counts = [0u64; COLOR_CODES];
    for y in region.y..region.y + region.h {
        for x in region.x..region.x + region.w {
            let [r, g, b] = image.get(x, y);
            counts[quantizer.quantize(rgb_to_hsv(r, g, b)).index()] += 1;
        }
    }
    let total = region.area() as f64;
    Ok(ColorVector {
        item_id: item_id.to_owned(),
        per: counts.iter().map(|&c| c as f64 / total).collect(),
    })
}

/// Region of the best-scoring detection, or the whole image when there is none.
pub fn clothes_region(detections: &[Detection], image: &RgbImage) -> Region {
    detections
        .iter()
        .max_by(|a, b| a.score.total_cmp(&b.score))
        .map_or_else(|| image.full_region(), |d| d.region)
}

/// Writes `item_id,c0,...,c71`, one row per item, in shortest round-trip form.
pub fn write_features(path: impl AsRef<Path>, vectors: &[ColorVector]) -> Result<(), ColorError> {
    let mut writer = csv::Writer::from_path(path)?;
    write_features_to(&mut writer, vectors)?;
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_features_to<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    vectors: &[ColorVector],
) -> Result<(), ColorError> {
    let mut header = vec!["item_id".to_owned()];
    header.extend((0..COLOR_CODES).map(|i| format!("c{i}")));
    writer.write_record(&header)?;
    for v in vectors {
        let mut row = vec![v.item_id.clone()];
        row.extend(v.per.iter().map(f64::to_string));
        writer.write_record(&row)?;
    }
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<ColorVector>, ColorError> {
    read_features_from(csv::Reader::from_path(path)?)
}

pub fn read_features_from<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<Vec<ColorVector>, ColorError> {
    let header = reader.headers()?.clone();
    if header.len() != COLOR_CODES + 1 || &header[0] != "item_id" {
        return Err(ColorError::Format {
            line: 1,
            reason: format!("expected item_id plus {COLOR_CODES} color columns"),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let per = record
            .iter()
            .skip(1)
            .map(|field| field.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ColorError::Format {
                line,
                reason: e.to_string(),
            })?;
        let vector = ColorVector::new(&record[0], per).ok_or_else(|| ColorError::Format {
            line,
            reason: "color fractions must be finite and non-negative".into(),
        })?;
        out.push(vector);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hsv(h: f64, s: f64, v: f64) -> HsvPixel {
        HsvPixel { h, s, v }
    }

    #[test]
    fn reference_codes() {
        let red = quantize_hsv(hsv(0.0, 1.0, 1.0));
        assert_eq!(red.bins(), (0, 2, 2));
        assert_eq!(red.index(), 8);
        assert_eq!(quantize_hsv(hsv(0.0, 0.0, 0.0)).index(), 0);
        assert_eq!(ColorCode::from_bins(7, 2, 2).unwrap().index(), 71);
        assert!(ColorCode::from_bins(8, 0, 0).is_none());
    }

    #[test]
    fn hue_table_boundaries() {
        let cases = [
            (0.0, 0),
            (20.0, 0),
            (20.5, 1),
            (40.0, 1),
            (40.1, 2),
            (75.0, 2),
            (100.0, 3),
            (155.0, 3),
            (190.0, 4),
            (200.0, 5),
            (270.0, 5),
            (280.0, 6),
            (295.0, 6),
            (300.0, 7),
            (315.0, 7),
            (315.5, 0),
            (359.9, 0),
        ];
        for (h, bin) in cases {
            assert_eq!(hue_bin(h), bin, "hue {h}");
        }
    }

    #[test]
    fn level_thresholds_are_half_open() {
        let q = Quantizer::default();
        assert_eq!(q.level(0.19999), 0);
        assert_eq!(q.level(0.2), 1);
        assert_eq!(q.level(0.69999), 1);
        assert_eq!(q.level(0.7), 2);
        assert_eq!(q.level(1.0), 2);
    }

    #[test]
    fn uniform_and_split_regions() {
        let red = RgbImage::filled(10, 10, [255, 0, 0]);
        let v = color_vector(&red, red.full_region(), "a").unwrap();
        assert_eq!(v.per[8], 1.0);
        assert_eq!(v.per.iter().sum::<f64>(), 1.0);

        let half = RgbImage::from_fn(10, 10, |x, _| if x < 5 { [255, 0, 0] } else { [0, 0, 0] });
        let v = color_vector(&half, half.full_region(), "b").unwrap();
        assert_eq!(v.per[8], 0.5);
        assert_eq!(v.per[0], 0.5);

        assert!(matches!(
            color_vector(&half, Region::new(0, 0, 0, 3), "c"),
            Err(ColorError::BadRegion(_))
        ));
        assert!(color_vector(&half, Region::new(5, 5, 6, 1), "c").is_err());
    }

    #[test]
    fn region_choice() {
        let img = RgbImage::filled(20, 40, [0; 3]);
        assert_eq!(clothes_region(&[], &img), Region::new(0, 0, 20, 40));
        let mk = |x, score| Detection {
            region: Region::new(x, 0, 4, 4),
            score,
            scale: 1.0,
        };
        assert_eq!(clothes_region(&[mk(1, 0.4), mk(7, 1.2)], &img).x, 7);
        assert_eq!(clothes_region(&[mk(3, -2.0)], &img).x, 3);
    }

    #[test]
    fn csv_round_trip() {
        let vectors = vec![
            ColorVector::new("shirt,1", (0..72).map(|i| i as f64 / 2556.0).collect()).unwrap(),
            ColorVector::new("dress", (0..72).map(|i| if i == 8 { 1.0 } else { 0.0 }).collect()).unwrap(),
        ];
        let mut w = csv::Writer::from_writer(Vec::new());
        write_features_to(&mut w, &vectors).unwrap();
        let bytes = w.into_inner().unwrap();
        assert!(bytes.starts_with(b"item_id,c0,c1,"));
        let back = read_features_from(csv::Reader::from_reader(bytes.as_slice())).unwrap();
        assert_eq!(back, vectors);
        let bad = "item_id,c0\nx,1\n";
        assert!(read_features_from(csv::Reader::from_reader(bad.as_bytes())).is_err());
    }

    proptest! {
        #[test]
        fn quantization_is_total(h in 0.0f64..360.0, s in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let code = quantize_hsv(hsv(h, s, v));
            prop_assert!(code.index() < COLOR_CODES);
            let (hb, sb, vb) = code.bins();
            prop_assert_eq!(code.index(), 9 * hb + 3 * sb + vb);
        }

        #[test]
        fn vector_sums_to_one_and_ignores_pixel_order(
            pixels in proptest::collection::vec(any::<[u8; 3]>(), 1..60),
            rot in 0usize..60,
        ) {
            let n = pixels.len();
            let img = RgbImage::new(n, 1, pixels.clone()).unwrap();
            let mut rotated = pixels;
            rotated.rotate_left(rot % n);
            let img2 = RgbImage::new(n, 1, rotated).unwrap();
            let a = color_vector(&img, img.full_region(), "x").unwrap();
            let b = color_vector(&img2, img2.full_region(), "x").unwrap();
            prop_assert!((a.per.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn union_is_count_weighted_average(
            pixels in proptest::collection::vec(any::<[u8; 3]>(), 2..60),
            cut in 1usize..59,
        ) {
            let n = pixels.len();
            let cut = cut.min(n - 1);
            let img = RgbImage::new(n, 1, pixels).unwrap();
            let left = color_vector(&img, Region::new(0, 0, cut, 1), "l").unwrap();
            let right = color_vector(&img, Region::new(cut, 0, n - cut, 1), "r").unwrap();
            let all = color_vector(&img, img.full_region(), "a").unwrap();
            for i in 0..COLOR_CODES {
                let mix = (left.per[i] * cut as f64 + right.per[i] * (n - cut) as f64) / n as f64;
                prop_assert!((mix - all.per[i]).abs() < 1e-9);
            }
        }
    }
}
