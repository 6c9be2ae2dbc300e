//! Bounded rotation, shear and brightness augmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::raster::{binarize, tight_crop, BinaryImage, GrayImage};
use crate::{Error, Result};

/// Threshold used to turn augmented gray images back into bitmaps.
pub const REBINARIZE_THRESHOLD: u8 = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub max_rotation_deg: f64,
    pub max_shear_fraction: f64,
    pub max_brightness_fraction: f64,
    pub copies_per_symbol: usize,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            max_rotation_deg: 9.0,
            max_shear_fraction: 0.10,
            max_brightness_fraction: 0.10,
            copies_per_symbol: 4,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=45.0).contains(&self.max_rotation_deg) {
            return Err(Error::OutOfRange {
                what: "max_rotation_deg".into(),
                value: self.max_rotation_deg,
            });
        }
        for (what, v) in [
            ("max_shear_fraction", self.max_shear_fraction),
            ("max_brightness_fraction", self.max_brightness_fraction),
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

/// One draw of transform parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentParams {
    pub rotation_deg: f64,
    /// Horizontal displacement per row, as a fraction of the row offset.
    pub shear: f64,
    /// Intensities are multiplied by `1 + brightness`.
    pub brightness: f64,
}

impl AugmentParams {
    pub const IDENTITY: AugmentParams = AugmentParams {
        rotation_deg: 0.0,
        shear: 0.0,
        brightness: 0.0,
    };

    pub fn sample(cfg: &AugmentConfig, rng: &mut impl Rng) -> Self {
        let mut draw = |bound: f64| if bound > 0.0 { rng.gen_range(-bound..=bound) } else { 0.0 };
        AugmentParams {
            rotation_deg: draw(cfg.max_rotation_deg),
            shear: draw(cfg.max_shear_fraction),
            brightness: draw(cfg.max_brightness_fraction),
        }
    }

    pub fn within(&self, cfg: &AugmentConfig) -> bool {
        self.rotation_deg.abs() <= cfg.max_rotation_deg
            && self.shear.abs() <= cfg.max_shear_fraction
            && self.brightness.abs() <= cfg.max_brightness_fraction
    }
}

fn bilinear(img: &GrayImage, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let sample = |xi: isize, yi: isize| -> f64 {
        if xi < 0 || yi < 0 || xi >= w || yi >= h {
            255.0
        } else {
            img.get(xi as usize, yi as usize) as f64
        }
    };
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    let top = sample(xi, yi) * (1.0 - fx) + sample(xi + 1, yi) * fx;
    let bottom = sample(xi, yi + 1) * (1.0 - fx) + sample(xi + 1, yi + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Shears, then rotates about the image centre, then scales brightness.
/// Pixels mapped from outside the source are background (white).
pub fn augment_symbol(img: &GrayImage, params: &AugmentParams, cfg: &AugmentConfig) -> Result<GrayImage> {
    if !params.within(cfg) {
        return Err(Error::OutOfRange {
            what: format!("augmentation parameters {params:?}"),
            value: f64::NAN,
        });
    }
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (sin, cos) = params.rotation_deg.to_radians().sin_cos();
    let gain = 1.0 + params.brightness;
    let mut out = GrayImage::filled(w, h, 255);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = (x as f64 - cx, y as f64 - cy);
            // Undo the rotation, then the shear.
            let (ru, rv) = (cos * u + sin * v, -sin * u + cos * v);
            let su = ru - params.shear * rv;
            let value = bilinear(img, su + cx, rv + cy) * gain;
            out.set(x, y, value.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// Augments a bitmap: pads it so rotation cannot clip ink, transforms,
/// re-binarizes and crops to the ink. Falls back to the input if the
/// transform wipes it out.
pub fn augment_bitmap(img: &BinaryImage, params: &AugmentParams, cfg: &AugmentConfig) -> Result<BinaryImage> {
    let pad = (img.width().max(img.height()) as f64 * 0.3).ceil() as usize + 2;
    let mut canvas = BinaryImage::new(img.width() + 2 * pad, img.height() + 2 * pad);
    canvas.blit(img, pad as isize, pad as isize);
    let gray = augment_symbol(&GrayImage::from_binary(&canvas), params, cfg)?;
    let bits = binarize(&gray, Some(REBINARIZE_THRESHOLD));
    Ok(tight_crop(&bits).map_or_else(|| img.clone(), |(_, c)| c))
}

/// One symbol of an augmented set.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedSymbol {
    /// Index of the source symbol.
    pub source: usize,
    /// None for the retained original.
    pub params: Option<AugmentParams>,
    pub image: BinaryImage,
}

/// The originals followed, per source, by `copies_per_symbol` variants.
/// Symbol `i` draws from its own generator stream, so output does not
/// depend on scheduling.
pub fn augment_dataset(symbols: &[BinaryImage], cfg: &AugmentConfig) -> Result<Vec<AugmentedSymbol>> {
    cfg.validate()?;
    let per_symbol: Vec<Result<Vec<AugmentedSymbol>>> = symbols
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut out = Vec::with_capacity(cfg.copies_per_symbol + 1);
            out.push(AugmentedSymbol {
                source: i,
                params: None,
                image: img.clone(),
            });
            for _ in 0..cfg.copies_per_symbol {
                let p = AugmentParams::sample(cfg, &mut rng);
                out.push(AugmentedSymbol {
                    source: i,
                    params: Some(p),
                    image: augment_bitmap(img, &p, cfg)?,
                });
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_symbol {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn glyph32() -> BinaryImage {
        let mut img = BinaryImage::new(32, 32);
        for y in 6..26 {
            for x in 9..13 {
                img.set(x, y, true);
            }
            for x in 19..23 {
                img.set(x, y, true);
            }
        }
        for y in 6..10 {
            for x in 9..23 {
                img.set(x, y, true);
            }
        }
        img
    }

    fn iou(a: &BinaryImage, b: &BinaryImage) -> f64 {
        let (mut i, mut u) = (0, 0);
        for (x, y) in a.bits().iter().zip(b.bits()) {
            i += (*x && *y) as usize;
            u += (*x || *y) as usize;
        }
        i as f64 / u as f64
    }

    #[test]
    fn identity_is_exact() {
        let g = GrayImage::new(3, 2, vec![0, 17, 255, 128, 99, 3]).unwrap();
        let out = augment_symbol(&g, &AugmentParams::IDENTITY, &AugmentConfig::default()).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn rotation_round_trip_keeps_shape() {
        let cfg = AugmentConfig::default();
        let g = GrayImage::from_binary(&glyph32());
        let rot = |deg: f64, img: &GrayImage| {
            let p = AugmentParams {
                rotation_deg: deg,
                ..AugmentParams::IDENTITY
            };
            augment_symbol(img, &p, &cfg).unwrap()
        };
        let back = binarize(&rot(-9.0, &rot(9.0, &g)), Some(REBINARIZE_THRESHOLD));
        assert!(iou(&back, &glyph32()) >= 0.85);
    }

    #[test]
    fn brightness_is_multiplicative() {
        let g = GrayImage::filled(2, 2, 100);
        let p = AugmentParams {
            brightness: 0.10,
            ..AugmentParams::IDENTITY
        };
        let out = augment_symbol(&g, &p, &AugmentConfig::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 110));
        let bright = augment_symbol(&GrayImage::filled(1, 1, 250), &p, &AugmentConfig::default()).unwrap();
        assert_eq!(bright.data(), &[255]);
    }

    #[test]
    fn out_of_bounds_params_rejected() {
        let p = AugmentParams {
            rotation_deg: 10.0,
            ..AugmentParams::IDENTITY
        };
        assert!(augment_symbol(&GrayImage::filled(2, 2, 0), &p, &AugmentConfig::default()).is_err());
        let bad = AugmentConfig {
            max_rotation_deg: 50.0,
            ..AugmentConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rotation_adds_no_phantom_ink() {
        let p = AugmentParams {
            rotation_deg: 9.0,
            ..AugmentParams::IDENTITY
        };
        let out = augment_symbol(&GrayImage::filled(8, 8, 255), &p, &AugmentConfig::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 255));
    }

    #[test]
    fn dataset_counts_and_links() {
        let syms = vec![glyph32(), glyph32().flip_vertical()];
        let none = AugmentConfig {
            copies_per_symbol: 0,
            ..AugmentConfig::default()
        };
        let same = augment_dataset(&syms, &none).unwrap();
        assert_eq!(same.iter().map(|s| s.image.clone()).collect::<Vec<_>>(), syms);

        let cfg = AugmentConfig {
            copies_per_symbol: 3,
            seed: 11,
            ..AugmentConfig::default()
        };
        let out = augment_dataset(&syms, &cfg).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(out.iter().filter(|s| s.source == 1).count(), 4);
        assert!(out.iter().all(|s| s.params.is_none_or(|p| p.within(&cfg))));
        assert_eq!(out, augment_dataset(&syms, &cfg).unwrap());
    }

    #[test]
    fn full_scale_arithmetic() {
        let cfg = AugmentConfig {
            copies_per_symbol: 15,
            ..AugmentConfig::default()
        };
        let total = 14_051 * (cfg.copies_per_symbol + 1);
        assert!((200_000..=250_000).contains(&total));
    }

    proptest! {
        #[test]
        fn sampled_params_within_bounds(seed in any::<u64>(), rot in 0.0f64..45.0, frac in 0.0f64..1.0) {
            let cfg = AugmentConfig {
                max_rotation_deg: rot,
                max_shear_fraction: frac,
                max_brightness_fraction: frac,
                ..AugmentConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                prop_assert!(AugmentParams::sample(&cfg, &mut rng).within(&cfg));
            }
        }
    }
}
