//! Whole-page extraction: lines, words, characters and ordered symbols.

use super::{
    classify_zones, components::connected_components, median_line_height, segment_characters,
    segment_lines, segment_words, LineBand, Provenance, SegmentationConfig, SymbolRecord, Zone,
};
use crate::raster::{crop, BinaryImage, Rect};

#[derive(Clone, Debug, PartialEq)]
pub struct WordLayout {
    /// Page coordinates.
    pub rect: Rect,
    /// Character boxes in page coordinates, left to right.
    pub chars: Vec<Rect>,
    /// Symbols in reading order.
    pub symbols: Vec<SymbolRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineLayout {
    pub band: LineBand,
    pub words: Vec<WordLayout>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PageLayout {
    pub lines: Vec<LineLayout>,
}

impl PageLayout {
    pub fn symbols(&self) -> impl Iterator<Item = &SymbolRecord> {
        self.lines
            .iter()
            .flat_map(|l| l.words.iter())
            .flat_map(|w| w.symbols.iter())
    }

    pub fn word_count(&self) -> usize {
        self.lines.iter().map(|l| l.words.len()).sum()
    }

    pub fn char_count(&self) -> usize {
        self.lines
            .iter()
            .flat_map(|l| l.words.iter())
            .map(|w| w.chars.len())
            .sum()
    }
}

fn center_x(r: &Rect) -> f64 {
    r.x as f64 + r.w as f64 / 2.0
}

fn x_overlap(a: &Rect, b: &Rect) -> usize {
    a.right().min(b.right()).saturating_sub(a.x.max(b.x))
}

/// Reading order of a word's symbols: middle-zone roots left to right, each
/// followed by the upper then bottom symbols attached to it. A non-root
/// attaches to the root it overlaps most horizontally (nearest centre on
/// ties). Returns indices into `symbols`.
pub fn reading_order(symbols: &[SymbolRecord]) -> Vec<usize> {
    let by_x = |idx: &mut Vec<usize>| {
        idx.sort_by(|&a, &b| {
            center_x(&symbols[a].rect)
                .total_cmp(&center_x(&symbols[b].rect))
                .then(a.cmp(&b))
        })
    };
    let mut roots: Vec<usize> = (0..symbols.len())
        .filter(|&i| symbols[i].zone == Zone::Middle)
        .collect();
    by_x(&mut roots);
    if roots.is_empty() {
        let mut all: Vec<usize> = (0..symbols.len()).collect();
        by_x(&mut all);
        return all;
    }

    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
    for (i, s) in symbols.iter().enumerate() {
        if s.zone == Zone::Middle {
            continue;
        }
        let best = (0..roots.len())
            .min_by(|&a, &b| {
                let ra = &symbols[roots[a]].rect;
                let rb = &symbols[roots[b]].rect;
                x_overlap(rb, &s.rect)
                    .cmp(&x_overlap(ra, &s.rect))
                    .then(
                        (center_x(ra) - center_x(&s.rect))
                            .abs()
                            .total_cmp(&(center_x(rb) - center_x(&s.rect)).abs()),
                    )
            })
            .expect("roots is nonempty");
        attached[best].push(i);
    }

    let mut out = Vec::with_capacity(symbols.len());
    for (slot, &root) in roots.iter().enumerate() {
        out.push(root);
        let mut extra = std::mem::take(&mut attached[slot]);
        extra.sort_by(|&a, &b| {
            symbols[a]
                .zone
                .cmp(&symbols[b].zone)
                .then(center_x(&symbols[a].rect).total_cmp(&center_x(&symbols[b].rect)))
        });
        out.extend(extra);
    }
    out
}

/// Index of the character box closest (horizontally) to column `x`.
fn nearest_char(chars: &[Rect], x: f64) -> usize {
    (0..chars.len())
        .min_by(|&a, &b| {
            let d = |r: &Rect| {
                if x < r.x as f64 {
                    r.x as f64 - x
                } else if x >= r.right() as f64 {
                    x - r.right() as f64 + 1.0
                } else {
                    0.0
                }
            };
            d(&chars[a]).total_cmp(&d(&chars[b]))
        })
        .unwrap_or(0)
}

/// `page` without components smaller than `min_pixels`.
pub fn without_speckle(page: &BinaryImage, min_pixels: usize) -> BinaryImage {
    let mut out = BinaryImage::new(page.width(), page.height());
    for c in connected_components(page) {
        if c.pixels.len() >= min_pixels.max(1) {
            for &(x, y) in &c.pixels {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Segments a binarized page down to zoned symbols.
///
/// Speckle (components under `min_symbol_pixels`) is dropped first so that
/// it cannot bridge line or word gaps. Each connected component of a word is handed whole to the character box
/// nearest its centroid, so a modifier overhanging a character cut is never
/// split between two characters.
pub fn extract_page(page: &BinaryImage, page_index: usize, cfg: &SegmentationConfig) -> PageLayout {
    let cleaned = without_speckle(page, cfg.min_symbol_pixels);
    let page = &cleaned;
    let bands = segment_lines(page, cfg);
    let median = median_line_height(&bands);
    let mut layout = PageLayout::default();

    for (line_index, band) in bands.into_iter().enumerate() {
        let line_rect = Rect::new(0, band.y_start, page.width(), band.height());
        let line_img = crop(page, line_rect).expect("line band lies inside the page");
        let mut words = Vec::new();

        for (word_index, local) in segment_words(&line_img, cfg, median).into_iter().enumerate() {
            let rect = local.offset(0, band.y_start);
            let word_img = crop(page, rect).expect("word box lies inside the page");
            let char_rects = segment_characters(&word_img, cfg, median);
            if char_rects.is_empty() {
                continue;
            }

            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); char_rects.len()];
            let comps = connected_components(&word_img);
            for (ci, c) in comps.iter().enumerate() {
                groups[nearest_char(&char_rects, c.centroid().0)].push(ci);
            }

            let mut symbols: Vec<(usize, SymbolRecord)> = Vec::new();
            for (char_index, group) in groups.iter().enumerate() {
                let Some(bounds) = group
                    .iter()
                    .map(|&ci| comps[ci].rect)
                    .reduce(|a, b| a.union(&b))
                else {
                    continue;
                };
                let mut char_img = BinaryImage::new(bounds.w, bounds.h);
                for &ci in group {
                    for &(x, y) in &comps[ci].pixels {
                        char_img.set(x - bounds.x, y - bounds.y, true);
                    }
                }
                let origin = (rect.x + bounds.x, rect.y + bounds.y);
                for s in classify_zones(&char_img, origin, &band, cfg) {
                    symbols.push((char_index, s));
                }
            }
            if symbols.is_empty() {
                continue;
            }

            let records: Vec<SymbolRecord> = symbols.iter().map(|(_, s)| s.clone()).collect();
            let order = reading_order(&records);
            // Non-root symbols take the character of the root they follow.
            let mut ordered = Vec::with_capacity(order.len());
            let mut current_char = symbols[order[0]].0;
            let mut per_char: Vec<usize> = vec![0; char_rects.len()];
            for &i in &order {
                let (char_index, mut s) = symbols[i].clone();
                if s.zone == Zone::Middle {
                    current_char = char_index;
                }
                s.provenance = Provenance {
                    page: page_index,
                    line: line_index,
                    word: words.len(),
                    char: current_char,
                    symbol: per_char[current_char],
                };
                per_char[current_char] += 1;
                ordered.push(s);
            }
            let _ = word_index;

            words.push(WordLayout {
                rect,
                chars: char_rects.iter().map(|r| r.offset(rect.x, rect.y)).collect(),
                symbols: ordered,
            });
        }
        layout.lines.push(LineLayout { band, words });
    }
    layout
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fill(img: &mut BinaryImage, x: usize, y: usize, w: usize, h: usize) {
        for yy in y..y + h {
            for xx in x..x + w {
                img.set(xx, yy, true);
            }
        }
    }

    fn glyph(img: &mut BinaryImage, x: usize, y: usize) {
        for dx in [0, 5, 10] {
            fill(img, x + dx, y, 3, 24);
        }
        fill(img, x, y, 13, 3);
    }

    #[test]
    fn recovers_known_layout() {
        // Two lines; the first holds words of 2 and 1 characters, the second
        // a single 3-character word. One character carries an upper modifier.
        let mut page = BinaryImage::new(200, 120);
        glyph(&mut page, 10, 20);
        glyph(&mut page, 29, 20);
        fill(&mut page, 29, 10, 13, 3); // modifier over the second glyph
        glyph(&mut page, 80, 20);
        for i in 0..3 {
            glyph(&mut page, 10 + 19 * i, 70);
        }
        let layout = extract_page(&page, 3, &SegmentationConfig::default());
        assert_eq!(layout.lines.len(), 2);
        assert_eq!(layout.lines[0].words.len(), 2);
        assert_eq!(layout.lines[1].words.len(), 1);
        assert_eq!(layout.char_count(), 6);
        assert_eq!(layout.symbols().count(), 7);

        let first = &layout.lines[0].words[0].symbols;
        let zones: Vec<Zone> = first.iter().map(|s| s.zone).collect();
        assert_eq!(zones, vec![Zone::Middle, Zone::Middle, Zone::Upper]);
        assert_eq!(first[2].provenance.char, 1);
        assert_eq!(first[2].provenance.symbol, 1);
        assert_eq!(first[2].provenance.page, 3);

        // Every ink pixel ends up in exactly one symbol.
        let ink: usize = layout.symbols().map(|s| s.image.ink_count()).sum();
        assert_eq!(ink, page.ink_count());
    }

    #[test]
    fn speckle_does_not_join_words() {
        let mut page = BinaryImage::new(120, 60);
        glyph(&mut page, 10, 20);
        glyph(&mut page, 70, 20);
        let clean = extract_page(&page, 0, &SegmentationConfig::default());
        // A dotted trail across the word gap and specks above and below the line.
        for x in (25..66).step_by(3) {
            page.set(x, 30, true);
        }
        page.set(40, 2, true);
        page.set(40, 57, true);
        let noisy = extract_page(&page, 0, &SegmentationConfig::default());
        assert_eq!(noisy.word_count(), 2);
        assert_eq!(noisy, clean);
        assert_eq!(without_speckle(&page, 4).ink_count(), 2 * (3 * 24 * 3 + 13 * 3 - 27));
    }

    #[test]
    fn blank_page_is_empty() {
        let layout = extract_page(&BinaryImage::new(50, 50), 0, &SegmentationConfig::default());
        assert!(layout.lines.is_empty());
    }
}
