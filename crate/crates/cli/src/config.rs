//! Pipeline configuration: one sectioned TOML file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voltage_core::postrules::RuleId;
use voltage_core::synthscript::{CharsetCounts, RenderConfig};
use voltage_core::{
    AugmentConfig, ClusteringConfig, EvaluationConfig, FeatureConfig, GfrsConfig, LossConfig, SegmentationConfig,
};

use crate::error::{CliError, Result};

/// File looked up in the workspace when `--config` is not given.
pub const DEFAULT_CONFIG_FILE: &str = "voltage.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Page images to extract. Relative paths resolve against the workspace.
    pub input: PathBuf,
    /// Reference glyphs, one image per label, plus `charset.tsv`.
    pub charset: PathBuf,
    pub script_model: PathBuf,
    /// Ground-truth symbol manifest for `--ground-truth` and `evaluate`.
    pub truth: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            input: "pages".into(),
            charset: "pages/charset".into(),
            script_model: "pages/script.toml".into(),
            truth: "pages/truth.tsv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub charset_seed: u64,
    pub seed: u64,
    pub pages: usize,
    pub lines: usize,
    pub words_per_line: usize,
    pub noise: f64,
    pub overlap: f64,
    pub consonants: usize,
    pub vowels: usize,
    pub modifiers: usize,
    pub numbers: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let counts = CharsetCounts::default();
        Self {
            charset_seed: 1,
            seed: 0,
            pages: 5,
            lines: 6,
            words_per_line: 8,
            noise: 0.0,
            overlap: 0.0,
            consonants: counts.consonants,
            vowels: counts.vowels,
            modifiers: counts.modifiers,
            numbers: counts.numbers,
        }
    }
}

impl SyntheticConfig {
    pub fn counts(&self) -> CharsetCounts {
        CharsetCounts {
            consonants: self.consonants,
            vowels: self.vowels,
            modifiers: self.modifiers,
            numbers: self.numbers,
        }
    }

    /// Switches noise and overlap to a named preset: `clean` or `paper-like`.
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        let r = match name {
            "clean" => RenderConfig::default(),
            "paper-like" => RenderConfig::paper_like(0),
            _ => return Err(CliError::Config(format!("unknown preset {name:?} (clean, paper-like)"))),
        };
        self.noise = r.noise;
        self.overlap = r.overlap;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    pub use_feature_tree: bool,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self { use_feature_tree: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostRulesConfig {
    pub enabled: BTreeSet<RuleId>,
}

impl Default for PostRulesConfig {
    fn default() -> Self {
        Self {
            enabled: RuleId::builtin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub synthetic: SyntheticConfig,
    pub segmentation: SegmentationConfig,
    pub features: FeatureConfig,
    pub gfrs: GfrsConfig,
    pub clustering: ClusteringConfig,
    pub annotate: AnnotateConfig,
    pub augment: AugmentConfig,
    pub training: LossConfig,
    pub postrules: PostRulesConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: PathsConfig::default(),
            synthetic: SyntheticConfig::default(),
            segmentation: SegmentationConfig::default(),
            // Single-pixel pepper inside a stroke would otherwise count as a hole.
            features: FeatureConfig {
                min_hole_pixels: 3,
                ..FeatureConfig::default()
            },
            gfrs: GfrsConfig::default(),
            clustering: ClusteringConfig::default(),
            annotate: AnnotateConfig::default(),
            augment: AugmentConfig::default(),
            training: LossConfig::default(),
            postrules: PostRulesConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// Reads `explicit` if given, else the workspace's `voltage.toml` if
    /// present, else the defaults.
    pub fn load(explicit: Option<&Path>, workspace: &Path) -> Result<Self> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = workspace.join(DEFAULT_CONFIG_FILE);
                if !p.exists() {
                    return Ok(Self::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        self.features.validate()?;
        self.gfrs.validate()?;
        self.clustering.validate()?;
        self.augment.validate()?;
        self.training.validate()?;
        let s = &self.synthetic;
        RenderConfig {
            noise: s.noise,
            overlap: s.overlap,
            seed: s.seed,
        }
        .validate()?;
        if !(0.0..=1.0).contains(&self.evaluation.min_iou) || !(0.0..=1.0).contains(&self.evaluation.fragment_containment) {
            return Err(CliError::Config("evaluation thresholds must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `--seed`: every stage seed at once. The charset seed is left alone so
    /// that pages drawn with different seeds share one script.
    pub fn apply_seed(&mut self, seed: u64) {
        self.synthetic.seed = seed;
        self.clustering.seed = seed;
        self.augment.seed = seed;
        self.training.seed = seed;
    }

    /// The defaults as TOML with a comment above every key.
    pub fn emit_default() -> String {
        let mut out = String::from(
            "# voltage pipeline configuration. Every key is optional; omitted keys take\n\
             # the values shown here. Relative paths resolve against the workspace.\n",
        );
        let mut section = String::new();
        for line in Self::default().to_toml().lines() {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.to_string();
                out.push('\n');
            } else if let Some((key, _)) = line.split_once(" = ") {
                if let Some(doc) = key_doc(&section, key.trim()) {
                    out.push_str("# ");
                    out.push_str(doc);
                    out.push('\n');
                }
            }
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

fn key_doc(section: &str, key: &str) -> Option<&'static str> {
    Some(match (section, key) {
        ("paths", "input") => "directory of page images (PGM or PNG, 8-bit gray)",
        ("paths", "charset") => "reference glyphs: charset.tsv and one image per label",
        ("paths", "script_model") => "symbol classes for the post-processing rules (TOML)",
        ("paths", "truth") => "ground-truth symbol manifest",
        ("synthetic", "charset_seed") => "seed of the generated script",
        ("synthetic", "seed") => "seed of the generated text and noise",
        ("synthetic", "pages") => "pages to render",
        ("synthetic", "lines") => "lines per page",
        ("synthetic", "words_per_line") => "words per line",
        ("synthetic", "noise") => "salt-and-pepper flip probability per pixel",
        ("synthetic", "overlap") => "probability that an upper modifier overhangs the next character",
        ("synthetic", "consonants") => "glyph counts per class",
        ("segmentation", "valley_threshold_fraction") => "column gap: profile value at most this fraction of the maximum",
        ("segmentation", "line_threshold_fraction") => "row gap: profile value at most this fraction of the maximum",
        ("segmentation", "min_gap_px") => "shortest row gap between lines",
        ("segmentation", "word_gap_factor") => "shortest word gap, as a fraction of the median line height",
        ("segmentation", "char_gap_factor") => "shortest character gap, as a fraction of the median line height",
        ("segmentation", "penalty_weight") => "lower-row weighting of the column profile; 0 gives the plain profile",
        ("segmentation", "script_class") => "abugida or alphabet",
        ("segmentation", "middle_mass_fraction") => "share of a line's ink inside the middle zone",
        ("segmentation", "thin_band_fraction") => "thinner line pieces are folded into their neighbour",
        ("segmentation", "min_symbol_pixels") => "smaller components are discarded as speckle",
        ("features", "symmetry_threshold") => "mirror overlap needed for the symmetry features",
        ("features", "line_straightness_tolerance") => "gap tolerated inside a headline or sidebar run",
        ("features", "headline_band") => "top share of rows searched for a headline",
        ("features", "sidebar_band") => "side share of columns searched for a sidebar",
        ("features", "line_coverage") => "share of the extent a headline or sidebar must cover",
        ("features", "min_hole_pixels") => "smaller holes are filled before measuring",
        ("features", "max_spur_length") => "shorter skeleton spurs are pruned before measuring (0 keeps all)",
        ("gfrs", "max_group_size") => "largest label group the feature tree may leave",
        ("gfrs", "bins_per_range_feature") => "buckets for continuous features",
        ("gfrs", "stability_margin") => "share of a label's prototypes that must agree on a bucket",
        ("gfrs", "count_cap") => "count features saturate at this bucket",
        ("gfrs", "candidate_features") => "features the tree may use; empty means all",
        ("clustering", "k") => "0 derives k from the label count of each partition",
        ("clustering", "max_iterations") => "Lloyd iterations per restart",
        ("clustering", "restarts") => "k-means++ restarts; the lowest inertia wins",
        ("clustering", "seed") => "clustering seed",
        ("clustering", "space") => "feature_vector or raw_pixels",
        ("annotate", "use_feature_tree") => "split the middle zone by the recommended feature tree before clustering",
        ("augment", "max_rotation_deg") => "rotation bound in degrees",
        ("augment", "max_shear_fraction") => "horizontal shear bound",
        ("augment", "max_brightness_fraction") => "brightness scale bound",
        ("augment", "copies_per_symbol") => "augmented copies per labelled symbol",
        ("augment", "seed") => "augmentation seed",
        ("training", "temperature") => "contrastive temperature",
        ("training", "learning_rate") => "SGD step size",
        ("training", "momentum") => "SGD momentum",
        ("training", "epochs") => "passes over the training set",
        ("training", "batch_size") => "source symbols per batch; each yields two views",
        ("training", "seed") => "initialisation and shuffling seed",
        ("postrules", "enabled") => "correction rules applied during recognition",
        ("evaluation", "min_iou") => "box overlap needed for a symbol or word match",
        ("evaluation", "fragment_containment") => "share of a piece inside a true symbol for it to count as a fragment",
        ("evaluation", "max_examples") => "error examples kept per category",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emitted_defaults_round_trip() {
        let text = PipelineConfig::emit_default();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), PipelineConfig::default());
        assert!(text.contains("# contrastive temperature\ntemperature = 0.1"));
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = PipelineConfig::from_toml("[training]\nepochs = 3\n[postrules]\nenabled = [\"R1\", \"R8\"]\n").unwrap();
        assert_eq!(cfg.training.epochs, 3);
        assert_eq!(cfg.training.temperature, 0.1);
        assert_eq!(cfg.postrules.enabled.len(), 2);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(PipelineConfig::from_toml("[training]\nepochs = \"x\"\n").is_err());
        assert!(PipelineConfig::from_toml("[nonsense]\n").is_err());
        assert!(PipelineConfig::from_toml("[augment]\nmax_rotation_deg = 90.0\n").is_err());
        assert!(PipelineConfig::from_toml("[synthetic]\nnoise = 2.0\n").is_err());
    }

    #[test]
    fn seed_override_spares_the_charset() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_seed(9);
        assert_eq!((cfg.training.seed, cfg.augment.seed, cfg.clustering.seed, cfg.synthetic.seed), (9, 9, 9, 9));
        assert_eq!(cfg.synthetic.charset_seed, 1);
    }
}
