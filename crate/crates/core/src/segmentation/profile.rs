//! Valley detection on projection profiles and the line, word and character
//! splitters built on it.

use super::{zones::middle_band, LineBand, ScriptClass, SegmentationConfig};
use crate::raster::{
    col_projection, crop, enhanced_col_projection, row_projection, BinaryImage, Rect,
};

/// A maximal low run `[start, end)` of a profile, cut at its midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valley {
    pub start: usize,
    pub end: usize,
    pub cut: usize,
}

/// Maximal runs where the profile is at or below `threshold_fraction` of its
/// maximum and at least `min_gap` long. A blank profile is one big valley.
pub fn find_valleys(profile: &[f64], threshold_fraction: f64, min_gap: usize) -> Vec<Valley> {
    let max = profile.iter().cloned().fold(0.0f64, f64::max);
    let limit = threshold_fraction * max;
    let mut out = Vec::new();
    let mut i = 0;
    while i < profile.len() {
        if profile[i] > limit {
            i += 1;
            continue;
        }
        let start = i;
        while i < profile.len() && profile[i] <= limit {
            i += 1;
        }
        if i - start >= min_gap.max(1) {
            out.push(Valley {
                start,
                end: i,
                cut: (start + i - 1) / 2,
            });
        }
    }
    out
}

/// Pieces `[a, b)` of `0..len` between consecutive valley cuts.
pub fn split_at_valleys(len: usize, valleys: &[Valley]) -> Vec<(usize, usize)> {
    let mut bounds = vec![0];
    bounds.extend(valleys.iter().map(|v| v.cut).filter(|&c| c > 0 && c < len));
    bounds.push(len);
    bounds.dedup();
    bounds.windows(2).map(|w| (w[0], w[1])).collect()
}

fn as_f64(v: Vec<u32>) -> Vec<f64> {
    v.into_iter().map(f64::from).collect()
}

/// Column pieces trimmed to the ink they contain; blank pieces are dropped.
fn column_segments(img: &BinaryImage, profile: &[f64], threshold: f64, min_gap: usize) -> Vec<Rect> {
    let valleys = find_valleys(profile, threshold, min_gap);
    split_at_valleys(img.width(), &valleys)
        .into_iter()
        .filter_map(|(a, b)| {
            let piece = crop(img, Rect::new(a, 0, b - a, img.height())).ok()?;
            piece.ink_bounds().map(|r| r.offset(a, 0))
        })
        .collect()
}

/// Text lines from valleys of the row profile, top to bottom.
pub fn segment_lines(page: &BinaryImage, cfg: &SegmentationConfig) -> Vec<LineBand> {
    let rows = row_projection(page);
    let profile = as_f64(rows.clone());
    let valleys = find_valleys(&profile, cfg.line_threshold_fraction, cfg.min_gap_px);

    let mut bands: Vec<(usize, usize)> = split_at_valleys(page.height(), &valleys)
        .into_iter()
        .filter_map(|(a, b)| {
            let first = (a..b).find(|&y| rows[y] > 0)?;
            let last = (a..b).rev().find(|&y| rows[y] > 0)?;
            Some((first, last + 1))
        })
        .collect();

    if bands.len() > 1 {
        let mut heights: Vec<usize> = bands.iter().map(|b| b.1 - b.0).collect();
        heights.sort_unstable();
        let median = heights[heights.len() / 2] as f64;
        let thin = cfg.thin_band_fraction * median;
        while bands.len() > 1 {
            let Some(i) = bands.iter().position(|b| ((b.1 - b.0) as f64) < thin) else {
                break;
            };
            let gap_above = (i > 0).then(|| bands[i].0 - bands[i - 1].1);
            let gap_below = (i + 1 < bands.len()).then(|| bands[i + 1].0 - bands[i].1);
            let target = match (gap_above, gap_below) {
                (Some(a), Some(b)) if a < b => i - 1,
                (Some(_), None) => i - 1,
                _ => i + 1,
            };
            let (lo, hi) = (i.min(target), i.max(target));
            bands[lo] = (bands[lo].0, bands[hi].1);
            bands.remove(hi);
        }
    }

    bands
        .into_iter()
        .map(|(y_start, y_end)| {
            let (u, l) = middle_band(&rows[y_start..y_end], cfg.middle_mass_fraction);
            LineBand {
                y_start,
                y_end,
                upper_boundary: y_start + u,
                lower_boundary: y_start + l,
            }
        })
        .collect()
}

/// Median height of a set of lines (0 when there are none).
pub fn median_line_height(lines: &[LineBand]) -> usize {
    let mut h: Vec<usize> = lines.iter().map(LineBand::height).collect();
    h.sort_unstable();
    h.get(h.len() / 2).copied().unwrap_or(0)
}

/// Word boxes within a line image, left to right, in line coordinates.
pub fn segment_words(
    line: &BinaryImage,
    cfg: &SegmentationConfig,
    median_line_height: usize,
) -> Vec<Rect> {
    let profile = as_f64(col_projection(line));
    column_segments(
        line,
        &profile,
        cfg.valley_threshold_fraction,
        cfg.word_min_gap(median_line_height),
    )
}

/// Character boxes within a word image, left to right, in word coordinates.
pub fn segment_characters(
    word: &BinaryImage,
    cfg: &SegmentationConfig,
    median_line_height: usize,
) -> Vec<Rect> {
    let profile = match cfg.script_class {
        ScriptClass::Abugida => enhanced_col_projection(word, cfg.penalty_weight),
        ScriptClass::Alphabet => as_f64(col_projection(word)),
    };
    column_segments(
        word,
        &profile,
        cfg.valley_threshold_fraction,
        cfg.char_min_gap(median_line_height),
    )
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

    /// Independent run scan used as the valley oracle.
    fn oracle_runs(profile: &[f64], frac: f64, min_gap: usize) -> Vec<(usize, usize)> {
        let max = profile.iter().cloned().fold(0.0, f64::max);
        let low: Vec<bool> = profile.iter().map(|&v| v <= frac * max).collect();
        let mut out = Vec::new();
        for start in 0..low.len() {
            if !low[start] || (start > 0 && low[start - 1]) {
                continue;
            }
            let len = low[start..].iter().take_while(|&&b| b).count();
            if len >= min_gap {
                out.push((start, start + len));
            }
        }
        out
    }

    #[test]
    fn valley_midpoint_floors() {
        let v = find_valleys(&[5.0, 5.0, 0.0, 0.0, 5.0, 5.0], 0.1, 1);
        assert_eq!(v, vec![Valley { start: 2, end: 4, cut: 2 }]);
        assert_eq!(oracle_runs(&[5.0, 5.0, 0.0, 0.0, 5.0, 5.0], 0.1, 1), vec![(2, 4)]);
    }

    #[test]
    fn constant_profile_has_no_valleys() {
        assert!(find_valleys(&[3.0; 7], 0.1, 1).is_empty());
    }

    #[test]
    fn short_runs_are_ignored() {
        assert!(find_valleys(&[3.0, 0.0, 3.0, 0.0, 3.0], 0.1, 2).is_empty());
    }

    #[test]
    fn valleys_match_run_oracle() {
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..200 {
            let profile: Vec<f64> = (0..20)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state % 6) as f64
                })
                .collect();
            for min_gap in 1..4 {
                let got: Vec<(usize, usize)> = find_valleys(&profile, 0.2, min_gap)
                    .iter()
                    .map(|v| (v.start, v.end))
                    .collect();
                assert_eq!(got, oracle_runs(&profile, 0.2, min_gap));
            }
        }
    }

    #[test]
    fn two_strips_make_two_lines() {
        let mut page = BinaryImage::new(30, 40);
        fill(&mut page, 2, 0, 20, 10);
        fill(&mut page, 2, 20, 20, 10);
        let lines = segment_lines(&page, &SegmentationConfig::default());
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].y_start, lines[0].y_end), (0, 10));
        assert_eq!((lines[1].y_start, lines[1].y_end), (20, 30));
        for l in &lines {
            assert!(l.y_start <= l.upper_boundary);
            assert!(l.upper_boundary < l.lower_boundary);
            assert!(l.lower_boundary <= l.y_end);
        }
    }

    #[test]
    fn blank_page_has_no_lines() {
        let page = BinaryImage::new(20, 20);
        assert!(segment_lines(&page, &SegmentationConfig::default()).is_empty());
        assert!(segment_words(&page, &SegmentationConfig::default(), 20).is_empty());
        assert!(segment_characters(&page, &SegmentationConfig::default(), 20).is_empty());
    }

    #[test]
    fn single_strip_is_one_line() {
        let mut page = BinaryImage::new(30, 40);
        fill(&mut page, 3, 12, 20, 9);
        let lines = segment_lines(&page, &SegmentationConfig::default());
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].y_start, lines[0].y_end), (12, 21));
    }

    #[test]
    fn detached_modifier_strip_joins_its_line() {
        let mut page = BinaryImage::new(40, 60);
        fill(&mut page, 5, 5, 8, 3); // modifier strip
        fill(&mut page, 2, 12, 30, 20); // body
        let lines = segment_lines(&page, &SegmentationConfig::default());
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].y_start, lines[0].y_end), (5, 32));
        assert!(lines[0].upper_boundary >= 12);
    }

    #[test]
    fn words_split_on_wide_gaps_only() {
        let mut line = BinaryImage::new(60, 10);
        fill(&mut line, 0, 0, 10, 10);
        fill(&mut line, 13, 0, 10, 10);
        fill(&mut line, 33, 0, 10, 10);
        let cfg = SegmentationConfig {
            word_min_gap_px: Some(5),
            ..Default::default()
        };
        let words = segment_words(&line, &cfg, 10);
        assert_eq!(words, vec![Rect::new(0, 0, 23, 10), Rect::new(33, 0, 10, 10)]);

        let cfg = SegmentationConfig {
            word_min_gap_px: Some(11),
            ..Default::default()
        };
        assert_eq!(segment_words(&line, &cfg, 10).len(), 1);
    }

    /// Two 24-row glyph bodies whose 6-column gap is bridged only by a thin
    /// bar near the top of the word.
    fn overhang_word() -> BinaryImage {
        let mut word = BinaryImage::new(32, 34);
        for x in [0, 5, 10, 19, 24, 29] {
            fill(&mut word, x, 10, 3, 24);
        }
        fill(&mut word, 0, 10, 13, 3);
        fill(&mut word, 19, 31, 13, 3);
        // Modifier over the first glyph, shifted to overhang the second.
        fill(&mut word, 7, 0, 13, 3);
        word
    }

    #[test]
    fn enhanced_profile_recovers_masked_gap() {
        let word = overhang_word();
        let hx = SegmentationConfig {
            script_class: ScriptClass::Alphabet,
            char_min_gap_px: Some(4),
            ..Default::default()
        };
        let ehx = SegmentationConfig {
            script_class: ScriptClass::Abugida,
            ..hx.clone()
        };
        // Oracle: the bar contributes 3 in the gap. Plain max is 27 (bar over
        // a stroke), so 3 > 2.7; weighted, the gap scores 3 + 3/34 against a
        // stroke column of 24 + 516/34.
        let plain = col_projection(&word);
        assert_eq!(plain[15], 3);
        assert_eq!(*plain.iter().max().unwrap(), 27);
        let weighted = enhanced_col_projection(&word, 1.0);
        assert!((weighted[15] - (3.0 + 3.0 / 34.0)).abs() < 1e-12);
        assert!(weighted[15] <= 0.1 * weighted.iter().cloned().fold(0.0, f64::max));

        assert_eq!(segment_characters(&word, &hx, 34).len(), 1);
        assert_eq!(segment_characters(&word, &ehx, 34).len(), 2);
    }

    #[test]
    fn clear_gaps_agree_under_both_profiles() {
        let mut word = BinaryImage::new(40, 24);
        fill(&mut word, 0, 0, 10, 24);
        fill(&mut word, 16, 4, 10, 20);
        fill(&mut word, 32, 0, 8, 12);
        let hx = SegmentationConfig {
            script_class: ScriptClass::Alphabet,
            char_min_gap_px: Some(3),
            ..Default::default()
        };
        let ehx = SegmentationConfig {
            script_class: ScriptClass::Abugida,
            ..hx.clone()
        };
        let a = segment_characters(&word, &hx, 24);
        assert_eq!(a.len(), 3);
        assert_eq!(a, segment_characters(&word, &ehx, 24));
    }

    #[test]
    fn zero_penalty_matches_plain_segmentation() {
        let word = overhang_word();
        let hx = SegmentationConfig {
            script_class: ScriptClass::Alphabet,
            char_min_gap_px: Some(4),
            ..Default::default()
        };
        let ehx0 = SegmentationConfig {
            script_class: ScriptClass::Abugida,
            penalty_weight: 0.0,
            ..hx.clone()
        };
        assert_eq!(segment_characters(&word, &hx, 34), segment_characters(&word, &ehx0, 34));
    }
}
