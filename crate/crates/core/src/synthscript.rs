//! Synthetic abugida-like script: procedural glyphs, page rendering and
//! exact ground truth.
//!
//! Root glyphs (consonants, vowels, numbers) are unions of strokes on a 3x4
//! node lattice; modifiers use a 3x2 lattice and sit above or below the
//! root. Line geometry, in rows from the line top: upper zone `[0, 7)`,
//! body `[10, 34)`, bottom zone `[37, 44)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::augment::{augment_bitmap, AugmentConfig, AugmentParams};
use crate::gfrs::{quantize_feature, CharsetPrototypes, GfrsConfig};
use crate::glyphfeat::{features_of, FeatureConfig, FeatureId, FeatureVector};
use crate::metrics::{Document, PageDoc, SymbolBox, WordBox};
use crate::postrules::{ScriptModel, SymbolClass};
use crate::raster::{tight_crop, BinaryImage, GrayImage, Rect};
use crate::segmentation::{skeletonize, Zone};
use crate::{Error, Result};

const STROKE: usize = 3;
const ROOT_W: usize = 13;
const ROOT_H: usize = 24;
const MOD_H: usize = 7;
pub const LINE_HEIGHT: usize = 44;
const BODY_TOP: usize = 10;
const BOTTOM_TOP: usize = 37;
pub const CHAR_GAP: usize = 6;
pub const WORD_GAP: usize = 26;
pub const LINE_GAP: usize = 16;
pub const PAGE_MARGIN: usize = 24;
/// Horizontal displacement of an overhanging upper modifier.
pub const OVERLAP_SHIFT: usize = 7;

/// Glyph counts per class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharsetCounts {
    pub consonants: usize,
    pub vowels: usize,
    pub modifiers: usize,
    pub numbers: usize,
}

impl Default for CharsetCounts {
    /// 33 consonants, 11 vowels, 10 modifiers, 10 numbers.
    fn default() -> Self {
        Self {
            consonants: 33,
            vowels: 11,
            modifiers: 10,
            numbers: 10,
        }
    }
}

impl CharsetCounts {
    pub fn total(&self) -> usize {
        self.consonants + self.vowels + self.modifiers + self.numbers
    }

    /// Modifiers drawn below the line; the rest go above.
    pub fn bottom_modifiers(&self) -> usize {
        (self.modifiers / 2).min(4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlyphClass {
    Consonant,
    Vowel,
    Modifier,
    Number,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Glyph {
    pub label: String,
    pub class: GlyphClass,
    pub zone: Zone,
    /// Drawing on the full lattice box (13x24 roots, 13x7 modifiers), so
    /// the position inside the zone is preserved.
    pub canvas: BinaryImage,
    /// Tight crop of `canvas`.
    pub image: BinaryImage,
    pub features: FeatureVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCharset {
    pub seed: u64,
    pub counts: CharsetCounts,
    pub glyphs: Vec<Glyph>,
    /// Consonants that never end a word.
    pub panchamkshar: Vec<usize>,
}

fn fill(img: &mut BinaryImage, x: usize, y: usize, w: usize, h: usize) {
    for yy in y..(y + h).min(img.height()) {
        for xx in x..(x + w).min(img.width()) {
            img.set(xx, yy, true);
        }
    }
}

/// Edge list of a `cols x rows` lattice with the given node pitch: all
/// horizontal edges, then all vertical edges. Each edge is a pixel rect.
fn lattice_edges(cols: usize, rows: usize, dx: usize, dy: usize) -> Vec<Rect> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            out.push(Rect::new(c * dx, r * dy, dx + STROKE, STROKE));
        }
    }
    for c in 0..cols {
        for r in 0..rows - 1 {
            out.push(Rect::new(c * dx, r * dy, STROKE, dy + STROKE));
        }
    }
    out
}

fn draw(edges: &[Rect], mask: u32, w: usize, h: usize) -> BinaryImage {
    let mut img = BinaryImage::new(w, h);
    for (i, e) in edges.iter().enumerate() {
        if mask >> i & 1 == 1 {
            fill(&mut img, e.x, e.y, e.w, e.h);
        }
    }
    img
}

fn is_connected(img: &BinaryImage) -> bool {
    crate::segmentation::connected_components(img).len() == 1
}

fn quantized(v: &FeatureVector) -> Vec<u32> {
    let cfg = GfrsConfig::default();
    FeatureId::all()
        .map(|id| quantize_feature(id, v.get(id), &cfg).expect("feature values are validated"))
        .collect()
}

const ROOT_COLS: usize = 3;
const ROOT_ROWS: usize = 4;
const ROOT_HORIZONTAL: usize = (ROOT_COLS - 1) * ROOT_ROWS;

/// Vertical edges of root lattice column `c`, as a bit mask.
fn root_column_mask(c: usize) -> u32 {
    let per = (ROOT_ROWS - 1) as u32;
    ((1u32 << per) - 1) << (ROOT_HORIZONTAL as u32 + c as u32 * per)
}

/// Root constraints: a vertical stroke in every lattice column (no wide
/// internal low-ink runs), one full-height column, and a skeleton whose
/// centroid stays in the middle third of the body.
fn root_ok(mask: u32, img: &BinaryImage) -> bool {
    let cols_ok = (0..ROOT_COLS).all(|c| mask & root_column_mask(c) != 0);
    let full = (0..ROOT_COLS).any(|c| mask & root_column_mask(c) == root_column_mask(c));
    if !(cols_ok && full && is_connected(img)) {
        return false;
    }
    let skel = skeletonize(img);
    let (n, sum) = skel.ink_pixels().fold((0usize, 0usize), |(n, s), (_, y)| (n + 1, s + y));
    let centroid = sum as f64 / n.max(1) as f64;
    (8.0..=16.0).contains(&centroid)
}

struct Pool {
    seen: HashSet<Vec<u32>>,
    masks: Vec<u32>,
    cfg: FeatureConfig,
}

impl Pool {
    /// Accepts the drawing if its quantized features are new and, for
    /// masks of the same kind, it differs from every accepted mask in at
    /// least `min_edge_distance` edges.
    fn try_add(&mut self, mask: u32, canvas: &BinaryImage, min_edge_distance: u32) -> Option<(BinaryImage, FeatureVector)> {
        if self.masks.iter().any(|m| (m ^ mask).count_ones() < min_edge_distance) {
            return None;
        }
        let image = tight_crop(canvas)?.1;
        let features = features_of(&image, &self.cfg).ok()?;
        if !self.seen.insert(quantized(&features)) {
            return None;
        }
        self.masks.push(mask);
        Some((image, features))
    }
}

const MAX_ATTEMPTS: usize = 200_000;

/// Draws a charset whose glyphs are pairwise distinct under quantized
/// features. Deterministic per seed.
pub fn gen_charset(seed: u64, counts: CharsetCounts) -> Result<SynthCharset> {
    if counts.consonants == 0 || counts.vowels == 0 || counts.modifiers == 0 || counts.numbers == 0 {
        return Err(Error::Config("every glyph class needs at least one glyph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fcfg = FeatureConfig::default();
    let mut glyphs = Vec::with_capacity(counts.total());

    let root_edges = lattice_edges(ROOT_COLS, ROOT_ROWS, 5, 7);
    let mut roots = Pool {
        seen: HashSet::new(),
        masks: Vec::new(),
        cfg: fcfg.clone(),
    };
    let classes = [
        (GlyphClass::Consonant, counts.consonants, "c"),
        (GlyphClass::Vowel, counts.vowels, "v"),
        (GlyphClass::Number, counts.numbers, "n"),
    ];
    for (class, n, prefix) in classes {
        for i in 0..n {
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    return Err(Error::InsufficientData(format!(
                        "could not draw {} distinct root glyphs; request fewer glyphs",
                        counts.consonants + counts.vowels + counts.numbers
                    )));
                }
                let mask: u32 = (0..root_edges.len()).fold(0, |m, b| m | (u32::from(rng.gen_bool(0.5)) << b));
                let canvas = draw(&root_edges, mask, ROOT_W, ROOT_H);
                if !root_ok(mask, &canvas) {
                    continue;
                }
                if let Some((image, features)) = roots.try_add(mask, &canvas, 2) {
                    let label = if class == GlyphClass::Number { format!("{prefix}{i}") } else { format!("{prefix}{i:02}") };
                    glyphs.push(Glyph {
                        label,
                        class,
                        zone: Zone::Middle,
                        canvas,
                        image,
                        features,
                    });
                    break;
                }
            }
        }
    }

    // Modifiers share the root feature pool so that all glyphs stay distinct.
    let mod_edges = lattice_edges(3, 2, 5, 4);
    let mut mods = Pool {
        seen: std::mem::take(&mut roots.seen),
        masks: Vec::new(),
        cfg: fcfg,
    };
    let bottom = counts.bottom_modifiers();
    let upper = counts.modifiers - bottom;
    for i in 0..counts.modifiers {
        let zone = if i < upper { Zone::Upper } else { Zone::Bottom };
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::InsufficientData(format!(
                    "could not draw {} distinct modifiers; request fewer glyphs",
                    counts.modifiers
                )));
            }
            // The first upper modifier is a flat bar, the overhang shape.
            let mask = if i == 0 { 0b11 } else { rng.gen_range(1u32..1 << mod_edges.len()) };
            let canvas = draw(&mod_edges, mask, ROOT_W, MOD_H);
            if !is_connected(&canvas) {
                continue;
            }
            if let Some((image, features)) = mods.try_add(mask, &canvas, 1) {
                glyphs.push(Glyph {
                    label: format!("m{i:02}"),
                    class: GlyphClass::Modifier,
                    zone,
                    canvas,
                    image,
                    features,
                });
                break;
            }
        }
    }

    let consonants: Vec<usize> = (0..counts.consonants).collect();
    let panchamkshar = if consonants.len() >= 3 {
        consonants[consonants.len() - 2..].to_vec()
    } else {
        Vec::new()
    };
    Ok(SynthCharset {
        seed,
        counts,
        glyphs,
        panchamkshar,
    })
}

impl SynthCharset {
    pub fn indices(&self, class: GlyphClass) -> Vec<usize> {
        (0..self.glyphs.len()).filter(|&i| self.glyphs[i].class == class).collect()
    }

    pub fn modifiers_in(&self, zone: Zone) -> Vec<usize> {
        (0..self.glyphs.len())
            .filter(|&i| self.glyphs[i].class == GlyphClass::Modifier && self.glyphs[i].zone == zone)
            .collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.glyphs.iter().position(|g| g.label == label)
    }

    /// Labels per zone.
    pub fn zone_label_counts(&self) -> BTreeMap<Zone, usize> {
        let mut out = BTreeMap::new();
        for g in &self.glyphs {
            *out.entry(g.zone).or_default() += 1;
        }
        out
    }

    /// Post-processing classes for this charset.
    pub fn script_model(&self) -> ScriptModel {
        let classes = self
            .glyphs
            .iter()
            .map(|g| {
                let c = match g.class {
                    GlyphClass::Consonant => SymbolClass::Consonant,
                    GlyphClass::Vowel => SymbolClass::IndependentVowel,
                    GlyphClass::Modifier => SymbolClass::VowelModifier,
                    GlyphClass::Number => SymbolClass::Number,
                };
                (g.label.clone(), c)
            })
            .collect();
        let pk: BTreeSet<String> = self.panchamkshar.iter().map(|&i| self.glyphs[i].label.clone()).collect();
        ScriptModel::new(format!("synthetic-{}", self.seed), classes, pk, Vec::new(), Vec::new())
            .expect("generated model is consistent")
    }
}

/// One written character: a root glyph and at most one modifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharSpec {
    pub root: usize,
    pub modifier: Option<usize>,
}

pub type WordSpec = Vec<CharSpec>;

/// Lines of words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TextSpec {
    pub lines: Vec<Vec<WordSpec>>,
}

impl TextSpec {
    pub fn word_count(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }
}

/// A random word that respects the script's word-formation rules: vowels
/// only word-initially, at most one modifier per consonant, numbers never
/// mixed with letters, no panchamkshar at the end.
pub fn random_word(charset: &SynthCharset, rng: &mut impl Rng) -> WordSpec {
    let numbers = charset.indices(GlyphClass::Number);
    if rng.gen_bool(0.08) {
        let n = rng.gen_range(1..=3);
        return (0..n)
            .map(|_| CharSpec {
                root: numbers[rng.gen_range(0..numbers.len())],
                modifier: None,
            })
            .collect();
    }
    let consonants = charset.indices(GlyphClass::Consonant);
    let vowels = charset.indices(GlyphClass::Vowel);
    let upper = charset.modifiers_in(Zone::Upper);
    let bottom = charset.modifiers_in(Zone::Bottom);
    let len = rng.gen_range(1..=5);
    let mut word = Vec::with_capacity(len);
    for i in 0..len {
        if i == 0 && rng.gen_bool(0.15) {
            word.push(CharSpec {
                root: vowels[rng.gen_range(0..vowels.len())],
                modifier: None,
            });
            continue;
        }
        let last = i + 1 == len;
        let root = loop {
            let c = consonants[rng.gen_range(0..consonants.len())];
            if !(last && charset.panchamkshar.contains(&c)) {
                break c;
            }
        };
        let modifier = if rng.gen_bool(0.4) {
            let pool = if bottom.is_empty() || rng.gen_bool(0.6) { &upper } else { &bottom };
            Some(pool[rng.gen_range(0..pool.len())])
        } else {
            None
        };
        word.push(CharSpec { root, modifier });
    }
    word
}

pub fn random_text(charset: &SynthCharset, lines: usize, words_per_line: usize, seed: u64) -> TextSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TextSpec {
        lines: (0..lines)
            .map(|_| (0..words_per_line).map(|_| random_word(charset, &mut rng)).collect())
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    /// Salt-and-pepper flip probability per pixel.
    pub noise: f64,
    /// Probability that an upper modifier overhangs the next character
    /// (only when that character has no upper modifier of its own).
    pub overlap: f64,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            noise: 0.0,
            overlap: 0.0,
            seed: 0,
        }
    }
}

impl RenderConfig {
    /// Noise and overlap levels used for the "paper-like" corpus.
    pub fn paper_like(seed: u64) -> Self {
        Self {
            noise: 0.002,
            overlap: 0.3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("noise", self.noise), ("overlap", self.overlap)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { what: what.into(), value: v });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthSymbol {
    pub label: String,
    pub zone: Zone,
    pub rect: Rect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthChar {
    /// The root's box.
    pub root: Rect,
    /// Root first, then its modifier.
    pub symbols: Vec<TruthSymbol>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthWord {
    pub rect: Rect,
    pub chars: Vec<TruthChar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthLine {
    pub y_start: usize,
    pub y_end: usize,
    pub words: Vec<TruthWord>,
}

/// A rendered page and everything that was drawn on it.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthPage {
    pub image: GrayImage,
    pub lines: Vec<TruthLine>,
}

impl SynthPage {
    pub fn word_count(&self) -> usize {
        self.lines.iter().map(|l| l.words.len()).sum()
    }

    pub fn symbol_count(&self) -> usize {
        self.lines
            .iter()
            .flat_map(|l| &l.words)
            .flat_map(|w| &w.chars)
            .map(|c| c.symbols.len())
            .sum()
    }

    pub fn to_page_doc(&self, page: usize) -> PageDoc {
        let mut words = Vec::new();
        for (li, line) in self.lines.iter().enumerate() {
            for w in &line.words {
                words.push(WordBox {
                    line: li,
                    symbols: w
                        .chars
                        .iter()
                        .flat_map(|c| &c.symbols)
                        .map(|s| SymbolBox {
                            label: s.label.clone(),
                            zone: s.zone,
                            rect: s.rect,
                        })
                        .collect(),
                });
            }
        }
        PageDoc { page, words }
    }

    /// Transcript: words as concatenated labels.
    pub fn transcript(&self) -> String {
        Document {
            pages: vec![self.to_page_doc(0)],
        }
        .plain_text()
    }
}

fn word_width(charset: &SynthCharset, word: &WordSpec) -> usize {
    word.iter().map(|c| charset.glyphs[c.root].canvas.width()).sum::<usize>() + CHAR_GAP * word.len().saturating_sub(1)
}

fn blit_tracked(page: &mut BinaryImage, glyph: &BinaryImage, x: usize, y: usize) -> Rect {
    page.blit(glyph, x as isize, y as isize);
    let r = glyph.ink_bounds().expect("glyphs have ink");
    r.offset(x, y)
}

/// Renders text onto a page sized to fit it, then applies noise.
pub fn render_page(charset: &SynthCharset, text: &TextSpec, cfg: &RenderConfig) -> Result<SynthPage> {
    cfg.validate()?;
    for &idx in text.lines.iter().flatten().flatten().flat_map(|c| std::iter::once(&c.root).chain(c.modifier.as_ref())) {
        if idx >= charset.glyphs.len() {
            return Err(Error::OutOfRange {
                what: "glyph index".into(),
                value: idx as f64,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let line_widths: Vec<usize> = text
        .lines
        .iter()
        .map(|l| l.iter().map(|w| word_width(charset, w)).sum::<usize>() + WORD_GAP * l.len().saturating_sub(1))
        .collect();
    let width = 2 * PAGE_MARGIN + line_widths.iter().copied().max().unwrap_or(0) + OVERLAP_SHIFT;
    let n = text.lines.len();
    let height = 2 * PAGE_MARGIN + n * LINE_HEIGHT + n.saturating_sub(1) * LINE_GAP;
    let mut page = BinaryImage::new(width, height);
    let mut lines = Vec::with_capacity(n);

    for (li, words) in text.lines.iter().enumerate() {
        let top = PAGE_MARGIN + li * (LINE_HEIGHT + LINE_GAP);
        let mut x = PAGE_MARGIN;
        let mut truth_words = Vec::with_capacity(words.len());
        for word in words {
            let mut chars = Vec::with_capacity(word.len());
            for (ci, ch) in word.iter().enumerate() {
                let root = &charset.glyphs[ch.root];
                let root_rect = blit_tracked(&mut page, &root.canvas, x, top + BODY_TOP);
                let mut symbols = vec![TruthSymbol {
                    label: root.label.clone(),
                    zone: Zone::Middle,
                    rect: root_rect,
                }];
                if let Some(m) = ch.modifier {
                    let g = &charset.glyphs[m];
                    let y = if g.zone == Zone::Upper { top } else { top + BOTTOM_TOP };
                    let next_free = word
                        .get(ci + 1)
                        .is_some_and(|n| n.modifier.is_none_or(|nm| charset.glyphs[nm].zone != Zone::Upper));
                    let shift = if g.zone == Zone::Upper && next_free && cfg.overlap > 0.0 && rng.gen_bool(cfg.overlap) {
                        OVERLAP_SHIFT
                    } else {
                        0
                    };
                    let rect = blit_tracked(&mut page, &g.canvas, x + shift, y);
                    symbols.push(TruthSymbol {
                        label: g.label.clone(),
                        zone: g.zone,
                        rect,
                    });
                }
                chars.push(TruthChar { root: root_rect, symbols });
                x += root.canvas.width() + CHAR_GAP;
            }
            x += WORD_GAP - CHAR_GAP;
            let rect = chars
                .iter()
                .flat_map(|c| c.symbols.iter().map(|s| s.rect))
                .reduce(|a, b| a.union(&b))
                .unwrap_or_default();
            truth_words.push(TruthWord { rect, chars });
        }
        lines.push(TruthLine {
            y_start: top,
            y_end: top + LINE_HEIGHT,
            words: truth_words,
        });
    }

    let mut gray = GrayImage::from_binary(&page);
    if cfg.noise > 0.0 {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        noise_rng.set_stream(1);
        for y in 0..gray.height() {
            for x in 0..gray.width() {
                if noise_rng.gen_bool(cfg.noise) {
                    let v = gray.get(x, y);
                    gray.set(x, y, 255 - v);
                }
            }
        }
    }
    Ok(SynthPage { image: gray, lines })
}

/// Single-word pages for the overlap experiment. Odd-position characters
/// get no modifier; even ones carry the flat upper modifier, which
/// overhangs the next character when `overlap` is set.
pub fn overlap_fixture(charset: &SynthCharset, words: usize, overlap: bool, seed: u64) -> Result<Vec<SynthPage>> {
    let bar = charset
        .modifiers_in(Zone::Upper)
        .first()
        .copied()
        .ok_or_else(|| Error::Config("charset has no upper modifier".into()))?;
    let consonants = charset.indices(GlyphClass::Consonant);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..words)
        .map(|w| {
            let len = rng.gen_range(3..=6);
            let word: WordSpec = (0..len)
                .map(|i| CharSpec {
                    root: consonants[rng.gen_range(0..consonants.len())],
                    modifier: (i % 2 == 0 && i + 1 < len).then_some(bar),
                })
                .collect();
            let cfg = RenderConfig {
                noise: 0.0,
                overlap: if overlap { 1.0 } else { 0.0 },
                seed: seed.wrapping_add(w as u64),
            };
            render_page(charset, &TextSpec { lines: vec![vec![word]] }, &cfg)
        })
        .collect()
}

/// Perturbed renderings of one glyph: bounded rotation and shear, then
/// salt-and-pepper noise at `noise`, cropped to the largest component.
pub fn glyph_variants(glyph: &Glyph, count: usize, aug: &AugmentConfig, noise: f64, seed: u64) -> Result<Vec<BinaryImage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = AugmentParams::sample(aug, &mut rng);
            let mut img = augment_bitmap(&glyph.image, &p, aug)?;
            if noise > 0.0 {
                let mut padded = BinaryImage::new(img.width() + 2, img.height() + 2);
                padded.blit(&img, 1, 1);
                for y in 0..padded.height() {
                    for x in 0..padded.width() {
                        if rng.gen_bool(noise) {
                            let v = padded.get(x, y);
                            padded.set(x, y, !v);
                        }
                    }
                }
                let comps = crate::segmentation::connected_components(&padded);
                if let Some(c) = comps.iter().max_by_key(|c| c.pixels.len()) {
                    img = c.to_image();
                }
            }
            Ok(img)
        })
        .collect()
}

/// Jittered renderings of every glyph in one zone, plus an independent set
/// of renderings per label to serve as feature-tree prototypes.
#[derive(Clone, Debug, PartialEq)]
pub struct ZoneCorpus {
    pub zone: Zone,
    pub images: Vec<BinaryImage>,
    pub features: Vec<FeatureVector>,
    pub labels: Vec<String>,
    pub prototypes: CharsetPrototypes,
}

impl ZoneCorpus {
    pub fn label_count(&self) -> usize {
        self.prototypes.len()
    }
}

/// Handwriting-like jitter: rotation up to `max_rotation_deg`, shear of the
/// same slope, no brightness change.
pub fn jitter_config(max_rotation_deg: f64) -> AugmentConfig {
    AugmentConfig {
        max_rotation_deg,
        max_shear_fraction: max_rotation_deg / 90.0,
        max_brightness_fraction: 0.0,
        ..AugmentConfig::default()
    }
}

pub fn zone_corpus(
    charset: &SynthCharset,
    zone: Zone,
    per_label: usize,
    prototypes_per_label: usize,
    aug: &AugmentConfig,
    noise: f64,
    seed: u64,
) -> Result<ZoneCorpus> {
    let fcfg = FeatureConfig::default();
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut protos = Vec::new();
    for (gi, g) in charset.glyphs.iter().enumerate().filter(|(_, g)| g.zone == zone) {
        let base = seed.wrapping_mul(1_000_003).wrapping_add(gi as u64);
        for img in glyph_variants(g, per_label, aug, noise, base)? {
            images.push(img);
            labels.push(g.label.clone());
        }
        let p = glyph_variants(g, prototypes_per_label, aug, noise, base ^ 0x9e37_79b9_7f4a_7c15)?;
        let p = p.iter().map(|i| features_of(i, &fcfg)).collect::<Result<Vec<_>>>()?;
        protos.push((g.label.clone(), p));
    }
    let features = images.iter().map(|i| features_of(i, &fcfg)).collect::<Result<Vec<_>>>()?;
    Ok(ZoneCorpus {
        zone,
        images,
        features,
        labels,
        prototypes: CharsetPrototypes::new(protos)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::{extract_page, SegmentationConfig};

    #[test]
    fn default_charset_is_distinct() {
        let cs = gen_charset(1, CharsetCounts::default()).unwrap();
        assert_eq!(cs.glyphs.len(), 64);
        let q: HashSet<Vec<u32>> = cs.glyphs.iter().map(|g| quantized(&g.features)).collect();
        assert_eq!(q.len(), 64);
        assert_eq!(cs.modifiers_in(Zone::Upper).len(), 6);
        assert_eq!(cs.modifiers_in(Zone::Bottom).len(), 4);
        assert_eq!(cs, gen_charset(1, CharsetCounts::default()).unwrap());
    }

    #[test]
    fn tiny_and_invalid_counts() {
        let one = CharsetCounts {
            consonants: 1,
            vowels: 1,
            modifiers: 1,
            numbers: 1,
        };
        assert_eq!(gen_charset(3, one).unwrap().glyphs.len(), 4);
        assert!(gen_charset(3, CharsetCounts { vowels: 0, ..one }).is_err());
        let huge = CharsetCounts {
            modifiers: 200,
            ..one
        };
        assert!(gen_charset(3, huge).is_err());
    }

    #[test]
    fn blank_page() {
        let cs = gen_charset(2, CharsetCounts::default()).unwrap();
        let p = render_page(&cs, &TextSpec::default(), &RenderConfig::default()).unwrap();
        assert_eq!(p.symbol_count(), 0);
        assert!(p.image.data().iter().all(|&v| v == 255));
    }

    #[test]
    fn figure_shape_counts() {
        let cs = gen_charset(2, CharsetCounts::default()).unwrap();
        let text = random_text(&cs, 18, 9, 4);
        let p = render_page(&cs, &text, &RenderConfig::default()).unwrap();
        assert_eq!(p.lines.len(), 18);
        assert_eq!(p.word_count(), 162);
    }

    #[test]
    fn clean_page_segments_to_truth() {
        let cs = gen_charset(5, CharsetCounts::default()).unwrap();
        let text = random_text(&cs, 4, 6, 8);
        let page = render_page(&cs, &text, &RenderConfig::default()).unwrap();
        let bin = crate::raster::binarize(&page.image, None);
        let layout = extract_page(&bin, 0, &SegmentationConfig::default());
        let found: Vec<(Rect, Zone)> = layout.symbols().map(|s| (s.rect, s.zone)).collect();
        let truth: Vec<(Rect, Zone)> = page.to_page_doc(0).words.iter().flat_map(|w| &w.symbols).map(|s| (s.rect, s.zone)).collect();
        assert_eq!(found, truth);
        assert_eq!(layout.word_count(), page.word_count());
    }

    #[test]
    fn overlap_hides_gaps_from_hx_only() {
        let cs = gen_charset(1, CharsetCounts::default()).unwrap();
        let cfg = SegmentationConfig::default();
        let hx = SegmentationConfig {
            penalty_weight: 0.0,
            ..cfg.clone()
        };
        let mut hx_short = 0;
        for page in overlap_fixture(&cs, 6, true, 3).unwrap() {
            let bin = crate::raster::binarize(&page.image, None);
            let n = page.lines[0].words[0].chars.len();
            let e = extract_page(&bin, 0, &cfg).char_count();
            let h = extract_page(&bin, 0, &hx).char_count();
            assert_eq!(e, n);
            if h < n {
                hx_short += 1;
            }
        }
        assert!(hx_short > 0);
    }

    #[test]
    fn script_model_covers_charset() {
        let cs = gen_charset(1, CharsetCounts::default()).unwrap();
        let m = cs.script_model();
        for g in &cs.glyphs {
            assert!(m.class_of(&g.label).is_ok());
        }
    }

    #[test]
    fn zone_corpus_shape() {
        let cs = gen_charset(1, CharsetCounts::default()).unwrap();
        let c = zone_corpus(&cs, Zone::Bottom, 3, 2, &jitter_config(4.0), 0.0, 7).unwrap();
        assert_eq!(c.label_count(), 4);
        assert_eq!(c.images.len(), 12);
        assert_eq!(c.features.len(), 12);
        assert_eq!(c, zone_corpus(&cs, Zone::Bottom, 3, 2, &jitter_config(4.0), 0.0, 7).unwrap());
    }

    #[test]
    fn variants_are_deterministic() {
        let cs = gen_charset(1, CharsetCounts::default()).unwrap();
        let a = glyph_variants(&cs.glyphs[0], 4, &AugmentConfig::default(), 0.01, 9).unwrap();
        assert_eq!(a, glyph_variants(&cs.glyphs[0], 4, &AugmentConfig::default(), 0.01, 9).unwrap());
        assert_eq!(a.len(), 4);
    }
}
