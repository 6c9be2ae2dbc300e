//! Page → line → word → character → symbol segmentation.
//!
//! Lines and words come from valleys in the row and column projections.
//! Characters use the enhanced column projection for abugidas (ink near the
//! top of a line, where modifiers overhang their neighbours, is discounted)
//! and the plain one for alphabets. Characters are split into zoned symbols
//! by thinning, component labelling and a middle-band rule.

mod components;
mod page;
mod profile;
mod thinning;
mod zones;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::raster::{BinaryImage, Rect};

pub use components::{connected_components, Component};
pub use page::{extract_page, reading_order, without_speckle, LineLayout, PageLayout, WordLayout};
pub use profile::{
    find_valleys, median_line_height, segment_characters, segment_lines, segment_words,
    split_at_valleys, Valley,
};
pub use thinning::skeletonize;
pub use zones::{classify_zones, classify_zones_with, middle_band, ZoneException};

/// Vertical band of a text line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Upper,
    Middle,
    Bottom,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Upper, Zone::Middle, Zone::Bottom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Upper => "upper",
            Zone::Middle => "middle",
            Zone::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Zone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upper" => Ok(Zone::Upper),
            "middle" => Ok(Zone::Middle),
            "bottom" => Ok(Zone::Bottom),
            other => Err(Error::Format(format!("unknown zone {other:?}"))),
        }
    }
}

/// Rows of one text line, with the middle zone as `[upper_boundary,
/// lower_boundary)`. All rows are page coordinates; `y_end` is exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineBand {
    pub y_start: usize,
    pub y_end: usize,
    pub upper_boundary: usize,
    pub lower_boundary: usize,
}

impl LineBand {
    pub fn height(&self) -> usize {
        self.y_end - self.y_start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScriptClass {
    #[default]
    Abugida,
    Alphabet,
}

/// Where a symbol came from on its page.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Provenance {
    pub page: usize,
    pub line: usize,
    pub word: usize,
    pub char: usize,
    pub symbol: usize,
}

/// A segmented sub-character unit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolRecord {
    /// Tight-cropped ink.
    pub image: BinaryImage,
    pub zone: Zone,
    /// Bounding box in page coordinates.
    pub rect: Rect,
    pub provenance: Provenance,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    /// Word and character valleys: fraction of the profile maximum at or
    /// below which a column counts as a gap.
    pub valley_threshold_fraction: f64,
    /// Same, for the row profile used to find lines.
    pub line_threshold_fraction: f64,
    /// Minimum valley length between lines.
    pub min_gap_px: usize,
    /// Word gap as a fraction of the median line height.
    pub word_gap_factor: f64,
    /// Character gap as a fraction of the median line height.
    pub char_gap_factor: f64,
    pub word_min_gap_px: Option<usize>,
    pub char_min_gap_px: Option<usize>,
    pub penalty_weight: f64,
    pub script_class: ScriptClass,
    /// Share of a line's ink the middle band must hold.
    pub middle_mass_fraction: f64,
    /// Line pieces thinner than this fraction of the median line height are
    /// folded into the nearest line (detached modifier strips).
    pub thin_band_fraction: f64,
    /// Components smaller than this are treated as speckle.
    pub min_symbol_pixels: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            valley_threshold_fraction: 0.1,
            line_threshold_fraction: 0.02,
            min_gap_px: 4,
            word_gap_factor: 0.5,
            char_gap_factor: 0.1,
            word_min_gap_px: None,
            char_min_gap_px: None,
            penalty_weight: 1.0,
            script_class: ScriptClass::Abugida,
            middle_mass_fraction: 0.7,
            thin_band_fraction: 0.4,
            min_symbol_pixels: 4,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let frac = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        frac("valley_threshold_fraction", self.valley_threshold_fraction)?;
        frac("line_threshold_fraction", self.line_threshold_fraction)?;
        frac("middle_mass_fraction", self.middle_mass_fraction)?;
        frac("thin_band_fraction", self.thin_band_fraction)?;
        if !(self.penalty_weight >= 0.0) {
            return Err(Error::Config(format!(
                "penalty_weight must be nonnegative, got {}",
                self.penalty_weight
            )));
        }
        if self.min_gap_px == 0 {
            return Err(Error::Config("min_gap_px must be at least 1".into()));
        }
        Ok(())
    }

    /// Minimum word gap for lines of the given median height.
    pub fn word_min_gap(&self, median_line_height: usize) -> usize {
        self.word_min_gap_px
            .unwrap_or_else(|| (self.word_gap_factor * median_line_height as f64).ceil() as usize)
            .max(1)
    }

    /// Minimum character gap for lines of the given median height.
    pub fn char_min_gap(&self, median_line_height: usize) -> usize {
        self.char_min_gap_px
            .unwrap_or_else(|| (self.char_gap_factor * median_line_height as f64).ceil() as usize)
            .max(1)
    }
}
