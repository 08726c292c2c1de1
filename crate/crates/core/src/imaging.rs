//! RGB images, binary PPM I/O, cropping and RGB to HSV conversion.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PPM header at byte {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("truncated pixel data at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid dimensions {width}x{height} for {len} pixels")]
    Dimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("region {region:?} exceeds image bounds {width}x{height}")]
    OutOfBounds {
        region: Region,
        width: usize,
        height: usize,
    },
}

/// A rectangle in pixel coordinates: top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.x
            .checked_add(self.w)
            .is_some_and(|right| right <= width)
            && self.y.checked_add(self.h).is_some_and(|bottom| bottom <= height)
    }

    /// Intersection-over-union of two rectangles; 0 when both are empty.
    pub fn iou(&self, other: &Region) -> f64 {
        let left = self.x.max(other.x);
        let top = self.y.max(other.y);
        let right = (self.x + self.w).min(other.x + other.w);
        let bottom = (self.y + self.h).min(other.y + other.h);
        let inter = right.saturating_sub(left) * bottom.saturating_sub(top);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(ImageError::Dimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single color.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn full_region(&self) -> Region {
        Region::new(0, 0, self.width, self.height)
    }

    /// Copies `region` out into a new image.
    pub fn crop(&self, region: Region) -> Result<RgbImage, ImageError> {
        if region.area() == 0 || !region.fits_within(self.width, self.height) {
            return Err(ImageError::OutOfBounds {
                region,
                width: self.width,
                height: self.height,
            });
        }
        let mut pixels = Vec::with_capacity(region.area());
        for y in region.y..region.y + region.h {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + region.x..row + region.x + region.w]);
        }
        Ok(RgbImage {
            width: region.w,
            height: region.h,
            pixels,
        })
    }

    /// Nearest-neighbour resample to `width` x `height`.
    pub fn resize_nearest(&self, width: usize, height: usize) -> RgbImage {
        RgbImage::from_fn(width, height, |x, y| {
            let sx = (x * self.width / width).min(self.width - 1);
            let sy = (y * self.height / height).min(self.height - 1);
            self.get(sx, sy)
        })
    }

    /// Encodes as binary PPM (P6, maxval 255).
    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len() * 3);
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    /// Decodes a binary PPM (P6, maxval 255). Header comments are skipped.
    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<RgbImage, ImageError> {
        if bytes.len() < 2 || &bytes[..2] != b"P6" {
            return Err(ImageError::Header {
                offset: 0,
                reason: "missing P6 magic".into(),
            });
        }
        let mut cursor = 2;
        let mut fields = [0usize; 3];
        for (i, field) in fields.iter_mut().enumerate() {
            let start = skip_whitespace_and_comments(bytes, cursor);
            if start == cursor && i == 0 {
                return Err(ImageError::Header {
                    offset: cursor,
                    reason: "expected whitespace after magic".into(),
                });
            }
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end == start {
                return Err(ImageError::Header {
                    offset: start,
                    reason: "expected a decimal number".into(),
                });
            }
            // digits are ASCII, so this cannot fail
            let text = std::str::from_utf8(&bytes[start..end]).unwrap();
            *field = text.parse().map_err(|_| ImageError::Header {
                offset: start,
                reason: format!("number out of range: {text}"),
            })?;
            cursor = end;
        }
        let [width, height, maxval] = fields;
        if width == 0 || height == 0 {
            return Err(ImageError::Header {
                offset: cursor,
                reason: format!("zero dimension {width}x{height}"),
            });
        }
        if maxval != 255 {
            return Err(ImageError::Header {
                offset: cursor,
                reason: format!("unsupported maxval {maxval}"),
            });
        }
        match bytes.get(cursor) {
            Some(b) if b.is_ascii_whitespace() => cursor += 1,
            _ => {
                return Err(ImageError::Header {
                    offset: cursor,
                    reason: "expected a single whitespace byte before pixel data".into(),
                })
            }
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| ImageError::Header {
                offset: cursor,
                reason: "dimensions overflow".into(),
            })?;
        let data = &bytes[cursor..];
        if data.len() < expected {
            return Err(ImageError::Truncated {
                offset: bytes.len(),
                expected,
                found: data.len(),
            });
        }
        let pixels = data[..expected]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }
}

fn skip_whitespace_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RgbImage::from_ppm_bytes(&bytes)
}

pub fn save_image(image: &RgbImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let io_err = |source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&image.to_ppm_bytes()).map_err(io_err)
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV. Achromatic pixels get `h = 0`.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = f64::from(max) / 255.0;
    if max == 0 {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let delta = f64::from(max - min);
    let s = delta / f64::from(max);
    if max == min {
        return HsvPixel { h: 0.0, s, v };
    }
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        (g - b) / delta
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hsv_to_rgb(p: HsvPixel) -> [u8; 3] {
        let c = p.v * p.s;
        let hp = p.h / 60.0;
        let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
        let (r1, g1, b1) = match hp as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = p.v - c;
        let to_u8 = |f: f64| ((f + m) * 255.0).round().clamp(0.0, 255.0) as u8;
        [to_u8(r1), to_u8(g1), to_u8(b1)]
    }

    #[test]
    fn decodes_hand_written_ppm() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255]);
        let img = RgbImage::from_ppm_bytes(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(
            img.pixels(),
            &[[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 255]]
        );
    }

    #[test]
    fn truncated_data_reports_offset() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1; 9]);
        match RgbImage::from_ppm_bytes(&bytes) {
            Err(ImageError::Truncated {
                offset,
                expected,
                found,
            }) => {
                assert_eq!(offset, bytes.len());
                assert_eq!(expected, 12);
                assert_eq!(found, 9);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(
            RgbImage::from_ppm_bytes(b"P3\n1 1\n255\n"),
            Err(ImageError::Header { offset: 0, .. })
        ));
        assert!(matches!(
            RgbImage::from_ppm_bytes(b"P6\n1 x\n255\n"),
            Err(ImageError::Header { offset: 5, .. })
        ));
        assert!(matches!(
            RgbImage::from_ppm_bytes(b"P6\n1 1\n65535\n\0\0\0\0\0\0"),
            Err(ImageError::Header { .. })
        ));
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = RgbImage::from_ppm_bytes(b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03").unwrap();
        assert_eq!(img.get(0, 0), [1, 2, 3]);
    }

    #[test]
    fn encodes_black_pixel() {
        let img = RgbImage::filled(1, 1, [0, 0, 0]);
        assert_eq!(img.to_ppm_bytes(), b"P6\n1 1\n255\n\0\0\0".to_vec());
        let wide = RgbImage::filled(3, 1, [9, 9, 9]);
        assert!(wide.to_ppm_bytes().starts_with(b"P6\n3 1\n"));
    }

    #[test]
    fn file_round_trip_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ppm");
        let img = RgbImage::from_fn(5, 3, |x, y| [x as u8, y as u8, (x * y) as u8]);
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
        assert!(matches!(
            load_image(dir.path().join("missing.ppm")),
            Err(ImageError::Io { .. })
        ));
    }

    #[test]
    fn hsv_reference_colors() {
        let red = rgb_to_hsv(255, 0, 0);
        assert_eq!((red.h, red.s, red.v), (0.0, 1.0, 1.0));
        let grey = rgb_to_hsv(128, 128, 128);
        assert_eq!((grey.h, grey.s, grey.v), (0.0, 0.0, 128.0 / 255.0));
        let blue = rgb_to_hsv(0, 0, 255);
        assert_eq!((blue.h, blue.s, blue.v), (240.0, 1.0, 1.0));
        let magenta_ish = rgb_to_hsv(255, 0, 1);
        assert!(magenta_ish.h < 360.0 && magenta_ish.h > 359.0);
    }

    #[test]
    fn crop_cases() {
        let img = RgbImage::from_fn(4, 3, |x, y| [x as u8, y as u8, 7]);
        assert_eq!(img.crop(img.full_region()).unwrap(), img);
        let one = img.crop(Region::new(0, 0, 1, 1)).unwrap();
        assert_eq!(one.pixels(), &[[0, 0, 7]]);
        let inner = img.crop(Region::new(1, 1, 2, 2)).unwrap();
        assert_eq!(inner.pixels(), &[[1, 1, 7], [2, 1, 7], [1, 2, 7], [2, 2, 7]]);
        assert!(matches!(
            img.crop(Region::new(3, 0, 2, 1)),
            Err(ImageError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn iou_of_half_overlap() {
        let a = Region::new(0, 0, 10, 10);
        let b = Region::new(5, 0, 10, 10);
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&Region::new(20, 20, 1, 1)), 0.0);
    }

    proptest! {
        #[test]
        fn hsv_inverse_within_one(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let hsv = rgb_to_hsv(r, g, b);
            prop_assert!((0.0..360.0).contains(&hsv.h));
            prop_assert!((0.0..=1.0).contains(&hsv.s) && (0.0..=1.0).contains(&hsv.v));
            let back = hsv_to_rgb(hsv);
            for (a, b) in back.iter().zip([r, g, b]) {
                prop_assert!((i16::from(*a) - i16::from(b)).abs() <= 1);
            }
        }

        #[test]
        fn grey_is_unsaturated(x in 0u8..=255) {
            prop_assert_eq!(rgb_to_hsv(x, x, x).s, 0.0);
        }

        #[test]
        fn ppm_round_trip(w in 1usize..8, h in 1usize..8, seed in any::<u64>()) {
            let img = RgbImage::from_fn(w, h, |x, y| {
                let v = seed.wrapping_mul(31).wrapping_add((x * 7 + y * 13) as u64);
                [v as u8, (v >> 8) as u8, (v >> 16) as u8]
            });
            prop_assert_eq!(RgbImage::from_ppm_bytes(&img.to_ppm_bytes()).unwrap(), img);
        }
    }
}
