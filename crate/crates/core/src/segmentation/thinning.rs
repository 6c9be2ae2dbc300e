//! Zhang-Suen thinning.

use crate::raster::BinaryImage;

// Neighbour offsets in the classic P2..P9 order: N, NE, E, SE, S, SW, W, NW.
const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let mut out = [false; 8];
    for (slot, (dx, dy)) in out.iter_mut().zip(RING) {
        *slot = img.get_signed(x as isize + dx, y as isize + dy);
    }
    out
}

/// Number of 0 -> 1 transitions around the closed ring.
fn transitions(p: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count()
}

/// Yokoi's 8-connectivity number; 1 means removing the pixel changes neither
/// the number of ink components nor the number of holes.
fn yokoi8(p: &[bool; 8]) -> i32 {
    // Yokoi indexes E, NE, N, NW, W, SW, S, SE.
    let n = |i: usize| -> i32 {
        let v = match i % 8 {
            0 => p[2],
            1 => p[1],
            2 => p[0],
            3 => p[7],
            4 => p[6],
            5 => p[5],
            6 => p[4],
            _ => p[3],
        };
        1 - v as i32
    };
    [0, 2, 4, 6]
        .iter()
        .map(|&k| n(k) - n(k) * n(k + 1) * n(k + 2))
        .sum()
}

/// Thins ink to one-pixel-wide strokes.
///
/// Candidates for each sub-iteration are marked against the image as it was
/// at the start of that sub-iteration, as in the original algorithm. They are
/// then removed one at a time, skipping any that are no longer simple points or
/// have become endpoints, so components never split or vanish (the plain
/// algorithm erases isolated 2x2 squares).
pub fn skeletonize(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    let (w, h) = (img.width(), img.height());
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            candidates.clear();
            for y in 0..h {
                for x in 0..w {
                    if !out.get(x, y) {
                        continue;
                    }
                    let p = ring(&out, x, y);
                    let b = p.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) || transitions(&p) != 1 {
                        continue;
                    }
                    let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
                    let keep = if step == 0 {
                        (n && e && s) || (e && s && wst)
                    } else {
                        (n && e && wst) || (n && s && wst)
                    };
                    if !keep {
                        candidates.push((x, y));
                    }
                }
            }
            for &(x, y) in &candidates {
                let p = ring(&out, x, y);
                let b = p.iter().filter(|&&v| v).count();
                if b >= 2 && yokoi8(&p) == 1 {
                    out.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::components::connected_components;
    use proptest::prelude::*;

    #[test]
    fn thin_line_is_unchanged() {
        let img = BinaryImage::from_rows(&[".....", "#####", "....."]).unwrap();
        assert_eq!(skeletonize(&img), img);
    }

    #[test]
    fn thick_bar_thins_to_single_row() {
        let img = BinaryImage::from_rows(&[
            "...........",
            ".#########.",
            ".#########.",
            ".#########.",
            "...........",
        ])
        .unwrap();
        let sk = skeletonize(&img);
        // Every column holds at most one pixel and the length survives.
        let cols = crate::raster::col_projection(&sk);
        assert!(cols.iter().all(|&c| c <= 1), "{sk:?}");
        let len = cols.iter().filter(|&&c| c == 1).count();
        assert!((7..=9).contains(&len), "length {len}: {sk:?}");
    }

    #[test]
    fn square_block_keeps_a_pixel() {
        let img = BinaryImage::from_rows(&["....", ".##.", ".##.", "...."]).unwrap();
        let n = skeletonize(&img).ink_count();
        assert!((1..=2).contains(&n));
    }

    #[test]
    fn blank_stays_blank() {
        assert!(skeletonize(&BinaryImage::new(4, 4)).is_blank());
    }

    #[test]
    fn ring_survives() {
        let img = BinaryImage::from_rows(&["#####", "#...#", "#...#", "#####"]).unwrap();
        assert_eq!(skeletonize(&img), img);
    }

    proptest! {
        #[test]
        fn preserves_component_count(
            (w, h, bits) in (1usize..14, 1usize..14)
                .prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h)))
        ) {
            let img = BinaryImage::from_bits(w, h, bits).unwrap();
            let sk = skeletonize(&img);
            prop_assert_eq!(connected_components(&img).len(), connected_components(&sk).len());
            // Thinning only removes ink.
            for (x, y) in sk.ink_pixels() {
                prop_assert!(img.get(x, y));
            }
        }
    }
}
