use std::path::Path;

use voltage_core::metrics::evaluate;
use voltage_core::{Error as CoreError, EvaluationReport};

use super::{EVALUATE_DIR, MANIFEST_FILE, PAGES_FILE, RECOGNIZE_DIR};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::io::{read_stage_text, reset_dir, write_text, Workspace};
use crate::manifest::{read_pages, read_symbols, rows_to_document};

/// Scores the recognize stage against a ground-truth symbol manifest
/// (default: the configured truth file).
pub fn cmd_evaluate(ws: &Workspace, cfg: &PipelineConfig, truth: Option<&Path>) -> Result<EvaluationReport> {
    let tpath = truth.map_or_else(|| ws.resolve(&cfg.paths.truth), |p| ws.resolve(p));
    let truth_rows = read_symbols(&tpath, &read_stage_text("gen-synthetic", &tpath)?)?;
    if truth_rows.is_empty() {
        return Err(CoreError::InsufficientData(format!("ground truth {} has no symbols", tpath.display())).into());
    }
    let dir = ws.stage_dir(RECOGNIZE_DIR);
    let rpath = dir.join(MANIFEST_FILE);
    let rec_rows = read_symbols(&rpath, &read_stage_text("recognize", &rpath)?)?;
    let ppath = dir.join(PAGES_FILE);
    let pages = read_pages(&ppath, &read_stage_text("recognize", &ppath)?)?;

    let page_count = truth_rows.iter().map(|r| r.provenance.page + 1).max().unwrap_or(0).max(pages.len());
    let truth_doc = rows_to_document(&truth_rows, page_count);
    let rec_doc = rows_to_document(&rec_rows, page_count);
    let report = evaluate(&truth_doc, &rec_doc, &cfg.evaluation)?;

    let out = ws.stage_dir(EVALUATE_DIR);
    reset_dir(&out)?;
    write_text(&out.join("report.tsv"), &report.to_tsv())?;
    write_text(&out.join("summary.txt"), &report.summary())?;
    Ok(report)
}
