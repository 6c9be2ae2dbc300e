use rayon::prelude::*;
use voltage_core::raster::binarize;
use voltage_core::segmentation::{extract_page, PageLayout};

use super::{EXTRACT_DIR, MANIFEST_FILE, PAGES_FILE};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::io::{list_images, read_gray, reset_dir, write_bitmap, write_text, Workspace};
use crate::manifest::{write_pages, write_symbols, PageRow, SymbolRow};

/// Segments every page of the input directory into symbols.
pub fn cmd_extract(ws: &Workspace, cfg: &PipelineConfig) -> Result<String> {
    cfg.segmentation.validate()?;
    let input = ws.resolve(&cfg.paths.input);
    let files = list_images(&input)?;
    let layouts: Vec<(PageLayout, usize, usize)> = files
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let gray = read_gray(f)?;
            let bin = binarize(&gray, None);
            Ok((extract_page(&bin, i, &cfg.segmentation), gray.width(), gray.height()))
        })
        .collect::<Result<_>>()?;

    let dir = ws.stage_dir(EXTRACT_DIR);
    reset_dir(&dir)?;
    let mut rows = Vec::new();
    let mut pages = Vec::new();
    for (i, ((layout, width, height), file)) in layouts.iter().zip(&files).enumerate() {
        let before = rows.len();
        for s in layout.symbols() {
            let mut row = SymbolRow {
                provenance: s.provenance,
                zone: s.zone,
                rect: s.rect,
                label: None,
                path: None,
            };
            let rel = format!("{EXTRACT_DIR}/symbols/{}.pgm", row.id());
            write_bitmap(&ws.resolve(rel.as_ref()), &s.image)?;
            row.path = Some(rel);
            rows.push(row);
        }
        pages.push(PageRow {
            page: i,
            file: file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            width: *width,
            height: *height,
            lines: layout.lines.len(),
            words: layout.word_count(),
            chars: layout.char_count(),
            symbols: rows.len() - before,
        });
    }
    write_text(&dir.join(MANIFEST_FILE), &write_symbols(&rows))?;
    write_text(&dir.join(PAGES_FILE), &write_pages(&pages))?;
    Ok(format!("extracted {} symbols from {} pages", rows.len(), pages.len()))
}
