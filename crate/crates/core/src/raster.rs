//! Raster primitives: grayscale and binary images, binarization, cropping and
//! the projection profiles used by every segmentation stage.
//!
//! Row 0 is the top of an image. In a [`BinaryImage`] `true` always means ink.

use std::fmt;

use crate::error::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image of a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Renders ink as 0 and background as 255.
    pub fn from_binary(img: &BinaryImage) -> Self {
        let data = img.data.iter().map(|&b| if b { 0 } else { 255 }).collect();
        Self {
            width: img.width,
            height: img.height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Bit raster where `true` marks an ink pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    /// Blank (all background) image.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} bits cannot form a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Parses rows of text where `#` (or `1`) is ink and anything else is
    /// background. Mostly useful for fixtures.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().chars().count()).unwrap_or(0);
        let mut data = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != width {
                return Err(Error::InvalidImage(format!(
                    "row {i} has {} columns, expected {width}",
                    row.chars().count()
                )));
            }
            data.extend(row.chars().map(|c| c == '#' || c == '1'));
        }
        Self::from_bits(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.data
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like [`get`](Self::get) but treats everything outside the raster as
    /// background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.data[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Coordinates of every ink pixel in raster order.
    pub fn ink_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Self {
        let mut out = Self::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    /// Mirror top-down.
    pub fn flip_vertical(&self) -> Self {
        let mut out = Self::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, self.height - 1 - y, self.get(x, y));
            }
        }
        out
    }

    /// Copies the ink of `src` onto this image with its top-left corner at
    /// `(x, y)`, clipping anything that falls outside.
    pub fn blit(&mut self, src: &BinaryImage, x: isize, y: isize) {
        for (sx, sy) in src.ink_pixels() {
            let tx = x + sx as isize;
            let ty = y + sy as isize;
            if tx >= 0 && ty >= 0 && (tx as usize) < self.width && (ty as usize) < self.height {
                self.set(tx as usize, ty as usize, true);
            }
        }
    }

    /// Bounding box of the ink, if any.
    pub fn ink_bounds(&self) -> Option<Rect> {
        let mut min_x = usize::MAX;
        let mut min_y = usize::MAX;
        let mut max_x = 0;
        let mut max_y = 0;
        let mut any = false;
        for (x, y) in self.ink_pixels() {
            any = true;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        any.then(|| Rect::new(min_x, min_y, max_x - min_x + 1, max_y - min_y + 1))
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        for y in 0..self.height {
            for x in 0..self.width {
                f.write_str(if self.get(x, y) { "#" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle; `x + w` and `y + h` are exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn offset(&self, dx: usize, dy: usize) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Smallest rectangle containing both.
    pub fn union(&self, other: &Rect) -> Rect {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// Intersection over union of the two areas.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersect(other).map_or(0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }
}

/// Otsu's threshold: the `t` for which marking `v < t` as ink maximizes the
/// between-class variance. `None` when the image has a single intensity.
///
/// When several split points share the maximum (empty intensity ranges between
/// the two modes), the middle of that plateau is used.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total = img.data().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let mut variances = [0.0f64; 255];
    let mut count0 = 0.0;
    let mut sum0 = 0.0;
    for k in 0..255 {
        count0 += hist[k] as f64;
        sum0 += k as f64 * hist[k] as f64;
        let count1 = total - count0;
        if count0 == 0.0 || count1 == 0.0 {
            continue;
        }
        let mean0 = sum0 / count0;
        let mean1 = (sum_all - sum0) / count1;
        let w0 = count0 / total;
        let w1 = count1 / total;
        variances[k] = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
    }
    let best = variances.iter().cloned().fold(0.0f64, f64::max);
    if best <= 0.0 {
        return None;
    }
    let tol = best * 1e-12;
    let first = variances.iter().position(|&v| v >= best - tol)?;
    let last = variances.iter().rposition(|&v| v >= best - tol)?;
    Some(((first + last) / 2 + 1) as u8)
}

/// Marks intensities strictly below the threshold as ink. Without an explicit
/// threshold Otsu's method picks one; a uniform image comes out blank.
pub fn binarize(img: &GrayImage, threshold: Option<u8>) -> BinaryImage {
    let t = match threshold.or_else(|| otsu_threshold(img)) {
        Some(t) => t,
        None => return BinaryImage::new(img.width(), img.height()),
    };
    let data = img.data().iter().map(|&v| v < t).collect();
    BinaryImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Ink count per row (length = height).
pub fn row_projection(img: &BinaryImage) -> Vec<u32> {
    img.data
        .chunks(img.width)
        .map(|row| row.iter().filter(|&&b| b).count() as u32)
        .collect()
}

/// Ink count per column (length = width).
pub fn col_projection(img: &BinaryImage) -> Vec<u32> {
    let mut out = vec![0u32; img.width];
    for row in img.data.chunks(img.width) {
        for (acc, &b) in out.iter_mut().zip(row) {
            *acc += b as u32;
        }
    }
    out
}

/// Column profile where each ink pixel at row `y` weighs `1 + w * y / height`,
/// so ink low in the image counts more than ink near the top. With `w = 0`
/// this is exactly [`col_projection`].
pub fn enhanced_col_projection(img: &BinaryImage, penalty_weight: f64) -> Vec<f64> {
    assert!(penalty_weight >= 0.0, "penalty weight must be nonnegative");
    let h = img.height as f64;
    let mut out = vec![0.0f64; img.width];
    for (y, row) in img.data.chunks(img.width).enumerate() {
        let weight = 1.0 + penalty_weight * y as f64 / h;
        for (acc, &b) in out.iter_mut().zip(row) {
            if b {
                *acc += weight;
            }
        }
    }
    out
}

/// Sub-raster covered by `r`.
pub fn crop(img: &BinaryImage, r: Rect) -> Result<BinaryImage> {
    if !r.fits_in(img.width, img.height) {
        return Err(Error::OutOfBounds {
            x: r.x,
            y: r.y,
            w: r.w,
            h: r.h,
            width: img.width,
            height: img.height,
        });
    }
    let mut data = Vec::with_capacity(r.area());
    for y in r.y..r.bottom() {
        let start = y * img.width + r.x;
        data.extend_from_slice(&img.data[start..start + r.w]);
    }
    Ok(BinaryImage {
        width: r.w,
        height: r.h,
        data,
    })
}

/// Crop to the minimal ink bounding box. Returns the box (in `img`
/// coordinates) with the cropped raster, or `None` for a blank image.
pub fn tight_crop(img: &BinaryImage) -> Option<(Rect, BinaryImage)> {
    let r = img.ink_bounds()?;
    let c = crop(img, r).expect("ink bounds lie inside the image");
    Some((r, c))
}
