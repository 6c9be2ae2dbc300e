//! The 32-entry glyph feature inventory.
//!
//! Topological features (endpoints, junctions, dots, bends) are measured on
//! the skeleton; area, profile and symmetry features on the raw symbol.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::raster::{col_projection, row_projection, tight_crop, BinaryImage};
use crate::segmentation::{connected_components, skeletonize};
use crate::{Error, Result};

pub const FEATURE_COUNT: usize = 32;

/// Feature identifier, `F1` through `F32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(u8);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Boolean,
    Count,
    Range,
}

impl FeatureId {
    /// `number` is the 1-based feature number.
    pub fn new(number: usize) -> Result<Self> {
        if (1..=FEATURE_COUNT).contains(&number) {
            Ok(Self(number as u8))
        } else {
            Err(Error::OutOfRange {
                what: "feature number".into(),
                value: number as f64,
            })
        }
    }

    pub fn number(self) -> usize {
        self.0 as usize
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = FeatureId> {
        (1..=FEATURE_COUNT as u8).map(FeatureId)
    }

    pub fn kind(self) -> FeatureKind {
        match self.0 {
            1 | 4 | 5 | 13 | 14 => FeatureKind::Boolean,
            2 | 3 | 6..=11 | 15..=17 => FeatureKind::Count,
            _ => FeatureKind::Range,
        }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .strip_prefix('F')
            .or_else(|| s.strip_prefix('f'))
            .ok_or_else(|| Error::Format(format!("feature id must look like F7, got {s:?}")))?;
        let n: usize = digits
            .parse()
            .map_err(|_| Error::Format(format!("bad feature id {s:?}")))?;
        FeatureId::new(n)
    }
}

impl Serialize for FeatureId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The 32 measured values of one symbol, indexed by [`FeatureId`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn get(&self, id: FeatureId) -> f64 {
        self.0[id.index()]
    }

    pub fn set(&mut self, id: FeatureId, v: f64) {
        self.0[id.index()] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Checks the declared type and range of every slot.
    pub fn validate(&self) -> Result<()> {
        for id in FeatureId::all() {
            let v = self.get(id);
            let ok = match id.kind() {
                FeatureKind::Boolean => v == 0.0 || v == 1.0,
                FeatureKind::Count => v >= 0.0 && v.fract() == 0.0,
                FeatureKind::Range => (0.0..=100.0).contains(&v),
            };
            if !ok {
                return Err(Error::OutOfRange {
                    what: id.to_string(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl std::ops::Index<FeatureId> for FeatureVector {
    type Output = f64;

    fn index(&self, id: FeatureId) -> &f64 {
        &self.0[id.index()]
    }
}

/// Thresholds used by the line and symmetry detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Minimum Jaccard overlap with the mirror image for F13/F14.
    pub symmetry_threshold: f64,
    /// Gaps of up to this many pixels do not break a headline or sidebar run.
    pub line_straightness_tolerance: usize,
    /// Fraction of rows (from the top) searched for a headline.
    pub headline_band: f64,
    /// Fraction of columns (from each side) searched for a sidebar.
    pub sidebar_band: f64,
    /// Fraction of the width (headline) or height (sidebar) a run must cover.
    pub line_coverage: f64,
    /// Holes with fewer pixels are filled before measuring (0 keeps all).
    pub min_hole_pixels: usize,
    /// Skeleton branches of at most this many pixels that end in a junction
    /// are pruned before measuring (0 keeps all).
    pub max_spur_length: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            symmetry_threshold: 0.8,
            line_straightness_tolerance: 0,
            headline_band: 0.25,
            sidebar_band: 0.15,
            line_coverage: 0.8,
            min_hole_pixels: 0,
            max_spur_length: 0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("symmetry_threshold", self.symmetry_threshold),
            ("headline_band", self.headline_band),
            ("sidebar_band", self.sidebar_band),
            ("line_coverage", self.line_coverage),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: what.into(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// A tight-cropped symbol with its skeleton.
#[derive(Clone, Debug)]
pub struct FeatureContext {
    pub raw: BinaryImage,
    pub skeleton: BinaryImage,
    pub config: FeatureConfig,
}

impl FeatureContext {
    /// Crops `img` to its ink and skeletonizes it. Blank images are rejected.
    pub fn new(img: &BinaryImage, config: &FeatureConfig) -> Result<Self> {
        let (_, mut raw) =
            tight_crop(img).ok_or_else(|| Error::InvalidImage("blank symbol".into()))?;
        for hole in holes(&raw) {
            if hole.len() < config.min_hole_pixels {
                for (x, y) in hole {
                    raw.set(x, y, true);
                }
            }
        }
        let mut skeleton = skeletonize(&raw);
        if config.max_spur_length > 0 {
            prune_spurs(&mut skeleton, config.max_spur_length);
        }
        Ok(Self {
            raw,
            skeleton,
            config: config.clone(),
        })
    }
}

fn neighbour_count(img: &BinaryImage, x: usize, y: usize) -> usize {
    let mut n = 0;
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if (dx, dy) != (0, 0) && img.get_signed(x as isize + dx, y as isize + dy) {
                n += 1;
            }
        }
    }
    n
}

/// Lengths of ink runs along a line, merging gaps up to `tolerance`.
fn longest_run(bits: impl Iterator<Item = bool>, tolerance: usize) -> usize {
    let mut best = 0;
    let mut start: Option<usize> = None;
    let mut last_ink = 0;
    for (i, b) in bits.enumerate() {
        if !b {
            continue;
        }
        match start {
            Some(s) if i - last_ink - 1 <= tolerance => {
                best = best.max(i - s + 1);
            }
            _ => {
                start = Some(i);
                best = best.max(1);
            }
        }
        last_ink = i;
    }
    best
}

fn run_count(bits: impl Iterator<Item = bool>) -> usize {
    let mut n = 0;
    let mut prev = false;
    for b in bits {
        if b && !prev {
            n += 1;
        }
        prev = b;
    }
    n
}

/// Rows of the headline, if any.
fn headline_rows(ctx: &FeatureContext) -> Vec<usize> {
    let img = &ctx.raw;
    let (w, h) = (img.width(), img.height());
    let band = ((h as f64 * ctx.config.headline_band).ceil() as usize).clamp(1, h);
    let need = ctx.config.line_coverage * w as f64;
    (0..band)
        .filter(|&y| {
            longest_run((0..w).map(|x| img.get(x, y)), ctx.config.line_straightness_tolerance)
                as f64
                >= need
        })
        .collect()
}

fn has_sidebar(ctx: &FeatureContext, right: bool) -> bool {
    let img = &ctx.raw;
    let (w, h) = (img.width(), img.height());
    let band = ((w as f64 * ctx.config.sidebar_band).ceil() as usize).clamp(1, w);
    let need = ctx.config.line_coverage * h as f64;
    (0..band).any(|i| {
        let x = if right { w - 1 - i } else { i };
        longest_run((0..h).map(|y| img.get(x, y)), ctx.config.line_straightness_tolerance) as f64
            >= need
    })
}

/// Background regions enclosed by ink: 4-connected background components
/// that do not reach the image border.
pub fn holes(img: &BinaryImage) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if img.get(sx, sy) || seen[sy * w + sx] {
                continue;
            }
            let mut region = Vec::new();
            let mut touches_border = false;
            let mut queue = VecDeque::from([(sx, sy)]);
            seen[sy * w + sx] = true;
            while let Some((x, y)) = queue.pop_front() {
                region.push((x, y));
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    touches_border = true;
                }
                let steps = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)];
                for (dx, dy) in steps {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if !img.get(nx, ny) && !seen[ny * w + nx] {
                        seen[ny * w + nx] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            if !touches_border {
                out.push(region);
            }
        }
    }
    out
}

/// Removes branches that run from an endpoint to a junction in at most
/// `max_len` pixels. Free-standing strokes and dots are kept.
pub fn prune_spurs(skeleton: &mut BinaryImage, max_len: usize) {
    let ends: Vec<(usize, usize)> = skeleton
        .ink_pixels()
        .filter(|&(x, y)| neighbour_count(skeleton, x, y) == 1)
        .collect();
    let mut doomed = Vec::new();
    for start in ends {
        let mut path = vec![start];
        let mut cur = start;
        let reaches_junction = loop {
            let next: Vec<(usize, usize)> = (-1isize..=1)
                .flat_map(|dy| (-1isize..=1).map(move |dx| (dx, dy)))
                .filter(|&d| d != (0, 0))
                .map(|(dx, dy)| (cur.0 as isize + dx, cur.1 as isize + dy))
                .filter(|&(nx, ny)| skeleton.get_signed(nx, ny))
                .map(|(nx, ny)| (nx as usize, ny as usize))
                .filter(|p| !path.contains(p))
                .collect();
            match next.as_slice() {
                [] => break false,
                [n] if neighbour_count(skeleton, n.0, n.1) <= 2 => {
                    if path.len() >= max_len {
                        break false;
                    }
                    cur = *n;
                    path.push(cur);
                }
                _ => break true,
            }
        };
        if reaches_junction {
            doomed.extend(path);
        }
    }
    for (x, y) in doomed {
        skeleton.set(x, y, false);
    }
}

/// Skeleton pixels with more than two ink neighbours, grouped into
/// 8-connected clusters so that one crossing counts once.
pub fn junction_clusters(skeleton: &BinaryImage) -> Vec<Vec<(usize, usize)>> {
    let mut marks = BinaryImage::new(skeleton.width(), skeleton.height());
    for (x, y) in skeleton.ink_pixels() {
        if neighbour_count(skeleton, x, y) > 2 {
            marks.set(x, y, true);
        }
    }
    connected_components(&marks)
        .into_iter()
        .map(|c| c.pixels)
        .collect()
}

fn pixels_with_neighbours(skeleton: &BinaryImage, n: usize) -> usize {
    skeleton
        .ink_pixels()
        .filter(|&(x, y)| neighbour_count(skeleton, x, y) == n)
        .count()
}

/// Clockwise and anticlockwise right-angle turns along skeleton paths.
fn bends(skeleton: &BinaryImage) -> (usize, usize) {
    let (mut cw, mut acw) = (0, 0);
    for (x, y) in skeleton.ink_pixels() {
        let mut nb = Vec::with_capacity(2);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if (dx, dy) != (0, 0) && skeleton.get_signed(x as isize + dx, y as isize + dy) {
                    nb.push((dx, dy));
                }
            }
        }
        if nb.len() != 2 {
            continue;
        }
        // Walk from the earlier neighbour (raster order) through p to the later one.
        let d1 = (-nb[0].0, -nb[0].1);
        let d2 = nb[1];
        if d1.0 * d2.0 + d1.1 * d2.1 != 0 {
            continue;
        }
        // y grows downwards, so a positive cross product is a clockwise turn.
        if d1.0 * d2.1 - d1.1 * d2.0 > 0 {
            cw += 1;
        } else {
            acw += 1;
        }
    }
    (cw, acw)
}

fn mirror_similarity(img: &BinaryImage, mirror: &BinaryImage) -> f64 {
    let (mut both, mut either) = (0usize, 0usize);
    for (a, b) in img.bits().iter().zip(mirror.bits()) {
        both += (*a && *b) as usize;
        either += (*a || *b) as usize;
    }
    if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// Profile depths from one side: distance to the first ink pixel along each
/// cross-section, as a percentage of the extent along that direction.
fn depths(img: &BinaryImage, side: Side) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    match side {
        Side::Left | Side::Right => (0..h)
            .map(|y| {
                let d = match side {
                    Side::Left => (0..w).position(|x| img.get(x, y)),
                    _ => (0..w).rev().position(|x| img.get(x, y)),
                };
                100.0 * d.unwrap_or(w) as f64 / w as f64
            })
            .collect(),
        Side::Top | Side::Bottom => (0..w)
            .map(|x| {
                let d = match side {
                    Side::Top => (0..h).position(|y| img.get(x, y)),
                    _ => (0..h).rev().position(|y| img.get(x, y)),
                };
                100.0 * d.unwrap_or(h) as f64 / h as f64
            })
            .collect(),
    }
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::MIN, f64::max)
}

fn fold_min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::MAX, f64::min)
}

fn epicenter(offset: f64, extent: usize) -> f64 {
    let half = extent as f64 / 2.0;
    (50.0 + 50.0 * offset / half).clamp(0.0, 100.0)
}

/// Computes one feature.
pub fn compute_feature(id: FeatureId, ctx: &FeatureContext) -> f64 {
    let raw = &ctx.raw;
    let sk = &ctx.skeleton;
    let (w, h) = (raw.width(), raw.height());
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    match id.number() {
        1 => b(!headline_rows(ctx).is_empty()),
        2 => holes(raw).len() as f64,
        3 => {
            let rows = headline_rows(ctx);
            if rows.is_empty() {
                return 0.0;
            }
            holes(raw)
                .iter()
                .filter(|hole| {
                    hole.iter().any(|&(x, y)| {
                        (-1isize..=1).any(|dy| {
                            (-1isize..=1).any(|dx| {
                                let (nx, ny) = (x as isize + dx, y as isize + dy);
                                raw.get_signed(nx, ny) && rows.contains(&(ny as usize))
                            })
                        })
                    })
                })
                .count() as f64
        }
        4 => b(has_sidebar(ctx, false)),
        5 => b(has_sidebar(ctx, true)),
        6 => connected_components(raw).len() as f64,
        7 => pixels_with_neighbours(sk, 1) as f64,
        8 => junction_clusters(sk).len() as f64,
        9 => {
            let rows = headline_rows(ctx);
            let (Some(&lo), Some(&hi)) = (rows.first(), rows.last()) else {
                return 0.0;
            };
            let lo = lo.saturating_sub(1);
            junction_clusters(sk)
                .iter()
                .filter(|c| c.iter().any(|&(_, y)| y >= lo && y <= hi + 1))
                .count() as f64
        }
        10 => bends(sk).0 as f64,
        11 => bends(sk).1 as f64,
        12 => 100.0 * w.min(h) as f64 / w.max(h) as f64,
        13 => b(mirror_similarity(raw, &raw.flip_horizontal()) >= ctx.config.symmetry_threshold),
        14 => b(mirror_similarity(raw, &raw.flip_vertical()) >= ctx.config.symmetry_threshold),
        15 => pixels_with_neighbours(sk, 0) as f64,
        16 => (0..h)
            .map(|y| run_count((0..w).map(|x| raw.get(x, y))))
            .max()
            .unwrap_or(0) as f64,
        17 => (0..w)
            .map(|x| run_count((0..h).map(|y| raw.get(x, y))))
            .max()
            .unwrap_or(0) as f64,
        18 | 20 => {
            let p = col_projection(raw);
            let v = if id.number() == 18 {
                p.iter().min()
            } else {
                p.iter().max()
            };
            100.0 * *v.unwrap_or(&0) as f64 / h as f64
        }
        19 | 21 => {
            let p = row_projection(raw);
            let v = if id.number() == 19 {
                p.iter().min()
            } else {
                p.iter().max()
            };
            100.0 * *v.unwrap_or(&0) as f64 / w as f64
        }
        22 => fold_max(&depths(raw, Side::Left)),
        23 => fold_max(&depths(raw, Side::Right)),
        24 => fold_max(&depths(raw, Side::Top)),
        25 => fold_max(&depths(raw, Side::Bottom)),
        26 => fold_min(&depths(raw, Side::Left)),
        27 => fold_min(&depths(raw, Side::Right)),
        28 => fold_min(&depths(raw, Side::Top)),
        29 => fold_min(&depths(raw, Side::Bottom)),
        30 => 100.0 * raw.ink_count() as f64 / (w * h) as f64,
        31 | 32 => {
            let n = raw.ink_count() as f64;
            let (sx, sy) = raw
                .ink_pixels()
                .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x as f64, sy + y as f64));
            if id.number() == 31 {
                epicenter(sy / n - (h as f64 - 1.0) / 2.0, h)
            } else {
                epicenter(sx / n - (w as f64 - 1.0) / 2.0, w)
            }
        }
        _ => unreachable!("feature ids are 1..=32"),
    }
}

/// Computes all 32 features.
pub fn compute_feature_vector(ctx: &FeatureContext) -> FeatureVector {
    let mut v = FeatureVector([0.0; FEATURE_COUNT]);
    for id in FeatureId::all() {
        v.set(id, compute_feature(id, ctx));
    }
    v
}

/// Convenience wrapper: crop, skeletonize and measure.
pub fn features_of(img: &BinaryImage, config: &FeatureConfig) -> Result<FeatureVector> {
    Ok(compute_feature_vector(&FeatureContext::new(img, config)?))
}

pub const FEATURE_TABLE_HEADER: &str = "#voltage-features v1";

/// Serializes `(symbol id, vector)` rows as a tab-separated table.
pub fn write_feature_table<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>,
) -> String {
    let mut out = String::new();
    out.push_str(FEATURE_TABLE_HEADER);
    out.push('\n');
    out.push_str("symbol");
    for id in FeatureId::all() {
        out.push('\t');
        out.push_str(&id.to_string());
    }
    out.push('\n');
    for (sym, v) in rows {
        out.push_str(sym);
        for x in v.as_slice() {
            out.push('\t');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn read_feature_table(text: &str) -> Result<Vec<(String, FeatureVector)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == FEATURE_TABLE_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {FEATURE_TABLE_HEADER:?}"),
            })
        }
    }
    lines.next();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let sym = cols.next().unwrap_or_default().to_string();
        let mut v = [0.0; FEATURE_COUNT];
        let mut n = 0;
        for (slot, c) in cols.enumerate() {
            if slot >= FEATURE_COUNT {
                n = usize::MAX;
                break;
            }
            v[slot] = c.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad number {c:?}"),
            })?;
            n += 1;
        }
        if n != FEATURE_COUNT {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {FEATURE_COUNT} feature columns"),
            });
        }
        out.push((sym, FeatureVector(v)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(n: usize) -> FeatureId {
        FeatureId::new(n).unwrap()
    }

    fn ctx(rows: &[&str]) -> FeatureContext {
        FeatureContext::new(&BinaryImage::from_rows(rows).unwrap(), &FeatureConfig::default())
            .unwrap()
    }

    fn ring() -> FeatureContext {
        ctx(&["#####", "#...#", "#...#", "#...#", "#####"])
    }

    #[test]
    fn ids_round_trip() {
        assert_eq!(FeatureId::all().count(), 32);
        for id in FeatureId::all() {
            assert_eq!(id.to_string().parse::<FeatureId>().unwrap(), id);
        }
        assert!("F33".parse::<FeatureId>().is_err());
        assert!("G1".parse::<FeatureId>().is_err());
    }

    #[test]
    fn segment_has_two_endpoints() {
        assert_eq!(compute_feature(f(7), &ctx(&["#####"])), 2.0);
    }

    #[test]
    fn ring_features() {
        let c = ring();
        let v = compute_feature_vector(&c);
        assert_eq!(v[f(2)], 1.0);
        assert_eq!(v[f(7)], 0.0);
        assert_eq!(v[f(1)], 1.0);
        assert_eq!(v[f(3)], 1.0);
        assert_eq!(v[f(4)], 1.0);
        assert_eq!(v[f(5)], 1.0);
        assert_eq!(v[f(13)], 1.0);
        assert_eq!(v[f(14)], 1.0);
    }

    #[test]
    fn plus_sign_is_one_junction() {
        let c = ctx(&["..#..", "..#..", "#####", "..#..", "..#.."]);
        assert_eq!(c.skeleton, c.raw);
        assert_eq!(compute_feature(f(8), &c), 1.0);
        assert_eq!(compute_feature(f(7), &c), 4.0);
    }

    #[test]
    fn small_holes_are_filled_on_request() {
        let rows = ["#####", "#####", "##.##", "#####", "#####"];
        assert_eq!(compute_feature(f(2), &ctx(&rows)), 1.0);
        let cfg = FeatureConfig {
            min_hole_pixels: 2,
            ..FeatureConfig::default()
        };
        let c = FeatureContext::new(&BinaryImage::from_rows(&rows).unwrap(), &cfg).unwrap();
        assert_eq!(compute_feature(f(2), &c), 0.0);
        let ring_cfg = FeatureContext::new(&ring().raw, &cfg).unwrap();
        assert_eq!(compute_feature(f(2), &ring_cfg), 1.0);
    }

    #[test]
    fn short_spur_is_pruned() {
        let rows = ["#########", "....#....", "....#...."];
        let mut sk = BinaryImage::from_rows(&rows).unwrap();
        assert_eq!(pixels_with_neighbours(&sk, 1), 3);
        prune_spurs(&mut sk, 1);
        assert_eq!(pixels_with_neighbours(&sk, 1), 2);
        assert!(!sk.get(4, 2));
        // A free-standing stroke has no junction and survives.
        let mut line = BinaryImage::from_rows(&["##"]).unwrap();
        prune_spurs(&mut line, 3);
        assert_eq!(line.ink_count(), 2);
        // Longer branches survive.
        let mut plus = BinaryImage::from_rows(&[
            "...#...", "...#...", "...#...", "#######", "...#...", "...#...", "...#...",
        ])
        .unwrap();
        let before = plus.clone();
        prune_spurs(&mut plus, 1);
        assert_eq!(plus, before);
    }

    #[test]
    fn aspect_ratio_of_wide_symbol() {
        let rows = vec!["##########"; 5];
        assert_eq!(compute_feature(f(12), &ctx(&rows)), 50.0);
    }

    #[test]
    fn mirror_symmetric_bitmap() {
        let c = ctx(&["#...#", ".#.#.", "..#.."]);
        assert_eq!(compute_feature(f(13), &c), 1.0);
        assert_eq!(compute_feature(f(14), &c), 0.0);
    }

    #[test]
    fn isolated_pixel_is_a_dot() {
        let c = ctx(&["#.........", "..........", "....######"]);
        assert_eq!(compute_feature(f(15), &c), 1.0);
    }

    #[test]
    fn full_square_stroke_length() {
        let rows = vec!["####"; 4];
        assert_eq!(compute_feature(f(30), &ctx(&rows)), 100.0);
    }

    #[test]
    fn single_dot_walkthrough() {
        let v = compute_feature_vector(&ctx(&["#"]));
        assert_eq!(v[f(6)], 1.0);
        assert_eq!(v[f(7)], 0.0);
        assert_eq!(v[f(15)], 1.0);
        assert_eq!(v[f(2)], 0.0);
        assert_eq!(v[f(12)], 100.0);
        assert_eq!(v[f(31)], 50.0);
        assert_eq!(v[f(32)], 50.0);
        v.validate().unwrap();
    }

    #[test]
    fn vertical_bar_has_both_sidebars() {
        let rows = vec!["##"; 10];
        let v = compute_feature_vector(&ctx(&rows));
        assert_eq!(v[f(4)], 1.0);
        assert_eq!(v[f(5)], 1.0);
        assert_eq!(v[f(12)], 20.0);
    }

    #[test]
    fn headline_junctions() {
        // A headline with two stems hanging from it.
        let c = ctx(&["#########", "..#...#..", "..#...#..", "..#...#..", "..#...#.."]);
        assert_eq!(compute_feature(f(1), &c), 1.0);
        assert_eq!(compute_feature(f(8), &c), 2.0);
        assert_eq!(compute_feature(f(9), &c), 2.0);
        assert_eq!(compute_feature(f(3), &c), 0.0);
    }

    #[test]
    fn layers_and_bends() {
        let c = ctx(&["#.#.#", "#.#.#", "#####"]);
        assert_eq!(compute_feature(f(16), &c), 3.0);
        assert_eq!(compute_feature(f(17), &c), 1.0);
        let l = ctx(&["#....", "#....", "#####"]);
        let (cw, acw) = (compute_feature(f(10), &l), compute_feature(f(11), &l));
        assert_eq!(cw + acw, 1.0);
    }

    #[test]
    fn profile_depths() {
        let c = ctx(&["####", "#...", "####"]);
        assert_eq!(compute_feature(f(22), &c), 0.0);
        assert_eq!(compute_feature(f(23), &c), 75.0);
        assert_eq!(compute_feature(f(27), &c), 0.0);
        assert_eq!(compute_feature(f(18), &c), 100.0 * 2.0 / 3.0);
        assert_eq!(compute_feature(f(20), &c), 100.0);
        assert_eq!(compute_feature(f(19), &c), 25.0);
    }

    #[test]
    fn table_round_trip() {
        let v1 = compute_feature_vector(&ring());
        let v2 = compute_feature_vector(&ctx(&["#"]));
        let text = write_feature_table([("a", &v1), ("b", &v2)]);
        let back = read_feature_table(&text).unwrap();
        assert_eq!(back, vec![("a".to_string(), v1), ("b".to_string(), v2)]);
        assert!(read_feature_table("nonsense").is_err());
    }

    fn bitmap(max_side: usize) -> impl Strategy<Value = BinaryImage> {
        (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
            prop::collection::vec(any::<bool>(), w * h)
                .prop_filter("needs ink", |b| b.iter().any(|&x| x))
                .prop_map(move |bits| BinaryImage::from_bits(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn ranges_hold(img in bitmap(12)) {
            let v = features_of(&img, &FeatureConfig::default()).unwrap();
            prop_assert!(v.validate().is_ok(), "{:?}", v);
            prop_assert!(v[f(18)] <= v[f(20)]);
            prop_assert!(v[f(19)] <= v[f(21)]);
            prop_assert!(v[f(26)] <= v[f(22)]);
            prop_assert!(v[f(29)] <= v[f(25)]);
        }

        #[test]
        fn translation_invariant(img in bitmap(8), dx in 0usize..5, dy in 0usize..5) {
            let mut big = BinaryImage::new(img.width() + dx + 2, img.height() + dy + 2);
            big.blit(&img, dx as isize, dy as isize);
            let cfg = FeatureConfig::default();
            prop_assert_eq!(features_of(&img, &cfg).unwrap(), features_of(&big, &cfg).unwrap());
        }

        #[test]
        fn mirror_keeps_symmetry_flag(img in bitmap(8)) {
            let cfg = FeatureConfig::default();
            let a = features_of(&img, &cfg).unwrap();
            let b = features_of(&img.flip_horizontal(), &cfg).unwrap();
            prop_assert_eq!(a[f(13)], b[f(13)]);
        }
    }
}
