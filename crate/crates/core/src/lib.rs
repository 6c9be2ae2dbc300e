//! Unsupervised OCR for low-resource abugida scripts: page segmentation,
//! hand-crafted glyph features, feature-tree grouping, cluster labelling,
//! augmentation, contrastive symbol recognition, rule-based correction and
//! evaluation. A procedural synthetic script supplies exact ground truth.

pub mod annotate;
pub mod augment;
pub mod error;
pub mod gfrs;
pub mod glyphfeat;
pub mod metrics;
pub mod postrules;
pub mod raster;
pub mod segmentation;
pub mod supcon;
pub mod synthscript;

pub use annotate::{ClusterSpace, ClusteringConfig, LabelMap};
pub use augment::AugmentConfig;
pub use error::{Error, Result};
pub use gfrs::{FeatureTree, GfrsConfig};
pub use glyphfeat::{FeatureConfig, FeatureId, FeatureVector};
pub use metrics::{Document, EvaluationConfig, EvaluationReport};
pub use postrules::{RuleId, ScriptModel};
pub use raster::{BinaryImage, GrayImage, Rect};
pub use segmentation::{Provenance, SegmentationConfig, SymbolRecord, Zone};
pub use supcon::{LossConfig, TrainedRecognizer};
