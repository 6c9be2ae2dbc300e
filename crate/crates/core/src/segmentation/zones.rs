use super::{
    components::connected_components, thinning::skeletonize, LineBand, Provenance, ScriptClass,
    SegmentationConfig, SymbolRecord, Zone,
};
use crate::raster::{tight_crop, BinaryImage};

/// Smallest row window `[upper, lower)` of a line profile holding at least
/// `fraction` of its ink. Among equally short windows the heavier one wins,
/// then the earlier one. A blank profile yields the whole range.
pub fn middle_band(rows: &[u32], fraction: f64) -> (usize, usize) {
    let n = rows.len();
    let total: u64 = rows.iter().map(|&v| v as u64).sum();
    if total == 0 || n == 0 {
        return (0, n.max(1));
    }
    let need = fraction * total as f64;
    let mut prefix = vec![0u64; n + 1];
    for (i, &v) in rows.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v as u64;
    }
    for len in 1..=n {
        let best = (0..=n - len)
            .map(|a| (prefix[a + len] - prefix[a], a))
            .filter(|&(mass, _)| mass as f64 >= need)
            .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        if let Some((_, a)) = best {
            return (a, a + len);
        }
    }
    (0, n)
}

/// Script-specific override for the centroid zone rule. Returning `Some`
/// replaces the proposed zone.
pub trait ZoneException: Send + Sync {
    fn apply(&self, symbol: &SymbolRecord, centroid_row: f64, band: &LineBand) -> Option<Zone>;
}

/// [`classify_zones_with`] without exceptions.
pub fn classify_zones(
    char_img: &BinaryImage,
    origin: (usize, usize),
    band: &LineBand,
    cfg: &SegmentationConfig,
) -> Vec<SymbolRecord> {
    classify_zones_with(char_img, origin, band, cfg, &[])
}

/// Splits one character into zoned symbols. `origin` is the page position of
/// the character image's top-left pixel and `band` is in page rows.
///
/// Each 8-connected component (of at least `min_symbol_pixels`) becomes a
/// symbol; its zone comes from the centroid row of its skeleton relative to
/// the middle band. Alphabetic scripts yield the whole character as one
/// middle-zone symbol.
pub fn classify_zones_with(
    char_img: &BinaryImage,
    origin: (usize, usize),
    band: &LineBand,
    cfg: &SegmentationConfig,
    exceptions: &[&dyn ZoneException],
) -> Vec<SymbolRecord> {
    if cfg.script_class == ScriptClass::Alphabet {
        return tight_crop(char_img)
            .map(|(r, image)| SymbolRecord {
                image,
                zone: Zone::Middle,
                rect: r.offset(origin.0, origin.1),
                provenance: Provenance::default(),
                label: None,
            })
            .into_iter()
            .collect();
    }

    connected_components(char_img)
        .into_iter()
        .filter(|c| c.pixels.len() >= cfg.min_symbol_pixels.max(1))
        .map(|c| {
            let image = c.to_image();
            let skeleton = skeletonize(&image);
            let (n, sum) = skeleton
                .ink_pixels()
                .fold((0usize, 0usize), |(n, s), (_, y)| (n + 1, s + y));
            let local = if n > 0 {
                sum as f64 / n as f64
            } else {
                c.centroid().1 - c.rect.y as f64
            };
            let row = (origin.1 + c.rect.y) as f64 + local;
            let zone = if row < band.upper_boundary as f64 {
                Zone::Upper
            } else if row >= band.lower_boundary as f64 {
                Zone::Bottom
            } else {
                Zone::Middle
            };
            let mut symbol = SymbolRecord {
                image,
                zone,
                rect: c.rect.offset(origin.0, origin.1),
                provenance: Provenance::default(),
                label: None,
            };
            for ex in exceptions {
                if let Some(z) = ex.apply(&symbol, row, band) {
                    symbol.zone = z;
                }
            }
            symbol
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band() -> LineBand {
        LineBand {
            y_start: 0,
            y_end: 30,
            upper_boundary: 8,
            lower_boundary: 22,
        }
    }

    fn fill(img: &mut BinaryImage, x: usize, y: usize, w: usize, h: usize) {
        for yy in y..y + h {
            for xx in x..x + w {
                img.set(xx, yy, true);
            }
        }
    }

    #[test]
    fn band_holds_required_mass() {
        let rows = [1, 0, 10, 10, 10, 10, 0, 2];
        assert_eq!(middle_band(&rows, 0.7), (2, 6));
        assert_eq!(middle_band(&rows, 1.0), (0, 8));
        assert_eq!(middle_band(&[0, 0, 0], 0.7), (0, 3));
    }

    #[test]
    fn component_above_band_is_upper() {
        let mut img = BinaryImage::new(10, 30);
        fill(&mut img, 2, 1, 5, 3);
        let s = classify_zones(&img, (0, 0), &band(), &SegmentationConfig::default());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].zone, Zone::Upper);
    }

    #[test]
    fn spanning_character_is_one_middle_symbol() {
        let mut img = BinaryImage::new(10, 30);
        fill(&mut img, 2, 0, 3, 30);
        fill(&mut img, 2, 14, 7, 3);
        let s = classify_zones(&img, (0, 0), &band(), &SegmentationConfig::default());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].zone, Zone::Middle);
    }

    #[test]
    fn stacked_components_get_three_zones() {
        let mut img = BinaryImage::new(10, 30);
        fill(&mut img, 3, 1, 3, 3); // centroid row 2
        fill(&mut img, 1, 9, 8, 12); // centroid row 15
        fill(&mut img, 3, 25, 3, 3); // centroid row 26
        let s = classify_zones(&img, (40, 100), &LineBand {
            y_start: 100,
            y_end: 130,
            upper_boundary: 108,
            lower_boundary: 122,
        }, &SegmentationConfig::default());
        let zones: Vec<Zone> = s.iter().map(|s| s.zone).collect();
        assert_eq!(zones, vec![Zone::Upper, Zone::Middle, Zone::Bottom]);
        assert_eq!(s[0].rect.x, 43);
        assert_eq!(s[0].rect.y, 101);
        let pixels: usize = s.iter().map(|s| s.image.ink_count()).sum();
        assert_eq!(pixels, img.ink_count());
    }

    #[test]
    fn blank_character_has_no_symbols() {
        let img = BinaryImage::new(5, 5);
        assert!(classify_zones(&img, (0, 0), &band(), &SegmentationConfig::default()).is_empty());
    }

    #[test]
    fn alphabet_character_is_single_symbol() {
        let mut img = BinaryImage::new(10, 30);
        fill(&mut img, 3, 1, 3, 3);
        fill(&mut img, 1, 9, 8, 12);
        let cfg = SegmentationConfig {
            script_class: ScriptClass::Alphabet,
            ..Default::default()
        };
        let s = classify_zones(&img, (0, 0), &band(), &cfg);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].zone, Zone::Middle);
        assert_eq!(s[0].image.ink_count(), img.ink_count());
    }

    #[test]
    fn exception_overrides_zone() {
        struct AllBottom;
        impl ZoneException for AllBottom {
            fn apply(&self, _: &SymbolRecord, _: f64, _: &LineBand) -> Option<Zone> {
                Some(Zone::Bottom)
            }
        }
        let mut img = BinaryImage::new(10, 30);
        fill(&mut img, 2, 1, 5, 3);
        let s = classify_zones_with(&img, (0, 0), &band(), &SegmentationConfig::default(), &[&AllBottom]);
        assert_eq!(s[0].zone, Zone::Bottom);
    }

    #[test]
    fn speckles_are_dropped() {
        let mut img = BinaryImage::new(10, 30);
        img.set(0, 0, true);
        fill(&mut img, 2, 10, 5, 5);
        let s = classify_zones(&img, (0, 0), &band(), &SegmentationConfig::default());
        assert_eq!(s.len(), 1);
    }
}
