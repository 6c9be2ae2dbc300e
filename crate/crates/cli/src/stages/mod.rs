//! Pipeline stages. Each reads the previous stage's files from the
//! workspace, validates their schema, and rewrites its own directory.

mod annotate;
mod evaluate;
mod extract;
mod recognize;
mod synthetic;
mod train;

use std::path::Path;

pub use annotate::{cmd_annotate, AnnotateSummary, CLUSTERS_SCHEMA, DISCARD_LABEL};
pub use evaluate::cmd_evaluate;
pub use extract::cmd_extract;
pub use recognize::{cmd_recognize, RECOGNITION_SCHEMA};
pub use synthetic::{cmd_gen_synthetic, read_charset, CHARSET_SCHEMA};
pub use train::{cmd_augment, cmd_train, AUGMENT_SCHEMA, LOSS_SCHEMA};
use voltage_core::BinaryImage;

use crate::error::Result;
use crate::io::{read_bitmap, read_stage_text, Workspace};
use crate::manifest::{read_pages, read_symbols, PageRow, SymbolRow};

pub const EXTRACT_DIR: &str = "extract";
pub const ANNOTATE_DIR: &str = "annotate";
pub const AUGMENT_DIR: &str = "augment";
pub const TRAIN_DIR: &str = "train";
pub const RECOGNIZE_DIR: &str = "recognize";
pub const EVALUATE_DIR: &str = "evaluate";

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const PAGES_FILE: &str = "pages.tsv";
pub const RECOGNIZER_FILE: &str = "recognizer.bin";

/// The extraction manifest and page table.
pub(crate) fn load_extraction(ws: &Workspace) -> Result<(Vec<SymbolRow>, Vec<PageRow>)> {
    let dir = ws.stage_dir(EXTRACT_DIR);
    let mpath = dir.join(MANIFEST_FILE);
    let rows = read_symbols(&mpath, &read_stage_text("extract", &mpath)?)?;
    let ppath = dir.join(PAGES_FILE);
    let pages = read_pages(&ppath, &read_stage_text("extract", &ppath)?)?;
    Ok((rows, pages))
}

/// Reads the images named by `paths` (relative to the workspace), in order.
pub(crate) fn load_bitmaps<'a>(ws: &Workspace, paths: impl IntoIterator<Item = &'a str>) -> Result<Vec<BinaryImage>> {
    use rayon::prelude::*;
    let paths: Vec<&str> = paths.into_iter().collect();
    paths.par_iter().map(|p| read_bitmap(&ws.resolve(Path::new(p)))).collect()
}

/// Formats a float for stage files: shortest text that parses back exactly.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
