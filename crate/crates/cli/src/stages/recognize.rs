use std::path::Path;

use rayon::prelude::*;
use voltage_core::postrules::{apply_corrections, RecognizedSymbol, RecognizedWord, RuleViolation};
use voltage_core::raster::binarize;
use voltage_core::segmentation::extract_page;
use voltage_core::{Provenance, TrainedRecognizer};

use super::synthetic::load_script_model;
use super::{num, MANIFEST_FILE, PAGES_FILE, RECOGNIZER_FILE, RECOGNIZE_DIR, TRAIN_DIR};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::{list_images, read_gray, reset_dir, write_text, Workspace};
use crate::manifest::{rows_to_document, write_pages, write_symbols, write_table, PageRow, SymbolRow};

pub const RECOGNITION_SCHEMA: &str = "#voltage-recognition v1";
const RECOGNITION_COLUMNS: &[&str] = &["id", "label", "score", "runner_up", "runner_up_score", "flags"];
/// Ranked candidates kept per symbol for post-rule substitutions.
const ALTERNATIVES: usize = 5;

struct PageResult {
    rows: Vec<SymbolRow>,
    details: Vec<Vec<String>>,
    page: PageRow,
}

fn flags_text(flags: &[RuleViolation]) -> String {
    if flags.is_empty() {
        return "-".into();
    }
    flags.iter().map(|v| v.rule.to_string()).collect::<Vec<_>>().join(",")
}

fn recognize_page(
    path: &Path,
    index: usize,
    recognizer: &TrainedRecognizer,
    cfg: &PipelineConfig,
    script: Option<&voltage_core::ScriptModel>,
) -> Result<PageResult> {
    let gray = read_gray(path)?;
    let layout = extract_page(&binarize(&gray, None), index, &cfg.segmentation);
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for line in &layout.lines {
        for word in &line.words {
            let symbols: Vec<RecognizedSymbol> = word
                .symbols
                .iter()
                .map(|s| {
                    let c = recognizer.classify(&s.image, Some(s.zone));
                    RecognizedSymbol {
                        label: c.label,
                        zone: s.zone,
                        score: c.score,
                        alternatives: c.ranked.into_iter().take(ALTERNATIVES).collect(),
                        rect: Some(s.rect),
                    }
                })
                .collect();
            let raw = RecognizedWord::new(symbols);
            let corrected = match script {
                Some(m) => apply_corrections(&raw, m, &cfg.postrules.enabled)?,
                None => raw,
            };
            let flags = flags_text(&corrected.flags);
            for (si, s) in corrected.symbols.iter().enumerate() {
                let rect = s.rect.unwrap_or_default();
                // The character of the first original symbol inside this box.
                let base = word
                    .symbols
                    .iter()
                    .find(|o| rect.intersect(&o.rect).is_some_and(|x| x == o.rect))
                    .or(word.symbols.first())
                    .map(|o| o.provenance)
                    .unwrap_or_default();
                let row = SymbolRow {
                    provenance: Provenance { symbol: si, ..base },
                    zone: s.zone,
                    rect,
                    label: Some(s.label.clone()),
                    path: None,
                };
                let runner = s.alternatives.iter().find(|(l, _)| *l != s.label);
                details.push(vec![
                    row.id(),
                    s.label.clone(),
                    num(s.score),
                    runner.map_or_else(|| "-".into(), |r| r.0.clone()),
                    runner.map_or_else(|| "-".into(), |r| num(r.1)),
                    flags.clone(),
                ]);
                rows.push(row);
            }
        }
    }
    let page = PageRow {
        page: index,
        file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        width: gray.width(),
        height: gray.height(),
        lines: layout.lines.len(),
        words: layout.word_count(),
        chars: layout.char_count(),
        symbols: rows.len(),
    };
    Ok(PageResult { rows, details, page })
}

/// Segments and classifies the pages in `pages` (default: the configured
/// input directory) and applies the enabled post-rules.
pub fn cmd_recognize(ws: &Workspace, cfg: &PipelineConfig, pages: Option<&Path>) -> Result<String> {
    let model_path = ws.stage_dir(TRAIN_DIR).join(RECOGNIZER_FILE);
    if !model_path.exists() {
        return Err(CliError::MissingStage {
            stage: "train",
            path: model_path,
        });
    }
    let bytes = std::fs::read(&model_path).map_err(|source| CliError::Io {
        path: model_path.clone(),
        source,
    })?;
    let recognizer = TrainedRecognizer::from_bytes(&bytes)?;
    let script = load_script_model(ws, cfg)?;
    if script.is_none() {
        log::warn!("no script model at {}; post-rules skipped", ws.resolve(&cfg.paths.script_model).display());
    }

    let input = pages.map_or_else(|| ws.resolve(&cfg.paths.input), |p| ws.resolve(p));
    let files = list_images(&input)?;
    let results: Vec<PageResult> = files
        .par_iter()
        .enumerate()
        .map(|(i, f)| recognize_page(f, i, &recognizer, cfg, script.as_ref()))
        .collect::<Result<_>>()?;

    let dir = ws.stage_dir(RECOGNIZE_DIR);
    reset_dir(&dir)?;
    let rows: Vec<SymbolRow> = results.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    let page_rows: Vec<PageRow> = results.iter().map(|r| r.page.clone()).collect();
    write_text(&dir.join(MANIFEST_FILE), &write_symbols(&rows))?;
    write_text(&dir.join(PAGES_FILE), &write_pages(&page_rows))?;
    write_text(
        &dir.join("results.tsv"),
        &write_table(RECOGNITION_SCHEMA, RECOGNITION_COLUMNS, results.into_iter().flat_map(|r| r.details)),
    )?;
    let doc = rows_to_document(&rows, page_rows.len());
    write_text(&dir.join("transcript.txt"), &doc.plain_text())?;
    Ok(format!(
        "recognized {} symbols in {} words on {} pages",
        rows.len(),
        doc.word_count(),
        page_rows.len()
    ))
}
