use std::path::{Path, PathBuf};

use voltage_core::postrules::ScriptModel;
use voltage_core::synthscript::{gen_charset, random_text, render_page, GlyphClass, RenderConfig, SynthPage};
use voltage_core::{Document, Provenance, Zone};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::io::{read_bitmap, read_stage_text, reset_dir, write_bitmap, write_gray, write_text, Workspace};
use crate::manifest::{parse_cell, read_table, write_pages, write_symbols, write_table, PageRow, SymbolRow};

pub const CHARSET_SCHEMA: &str = "#voltage-charset v1";
const CHARSET_COLUMNS: &[&str] = &["label", "class", "zone", "file"];
const CHARSET_FILE: &str = "charset.tsv";
/// Marks a directory as generated, so that regeneration may clear it.
const MARKER: &str = ".voltage-synthetic";

fn class_name(c: GlyphClass) -> &'static str {
    match c {
        GlyphClass::Consonant => "consonant",
        GlyphClass::Vowel => "vowel",
        GlyphClass::Modifier => "modifier",
        GlyphClass::Number => "number",
    }
}

fn truth_rows(page: &SynthPage, index: usize) -> Vec<SymbolRow> {
    let mut rows = Vec::new();
    for (li, line) in page.lines.iter().enumerate() {
        for (wi, word) in line.words.iter().enumerate() {
            for (ci, ch) in word.chars.iter().enumerate() {
                for (si, s) in ch.symbols.iter().enumerate() {
                    rows.push(SymbolRow {
                        provenance: Provenance {
                            page: index,
                            line: li,
                            word: wi,
                            char: ci,
                            symbol: si,
                        },
                        zone: s.zone,
                        rect: s.rect,
                        label: Some(s.label.clone()),
                        path: None,
                    });
                }
            }
        }
    }
    rows
}

fn prepare_output(dir: &Path) -> Result<()> {
    let fresh = !dir.exists() || dir.join(MARKER).exists() || dir.read_dir().map(|mut d| d.next().is_none()).unwrap_or(false);
    if !fresh {
        return Err(CliError::Config(format!(
            "{} exists and was not generated by gen-synthetic; refusing to overwrite it",
            dir.display()
        )));
    }
    reset_dir(dir)?;
    write_text(&dir.join(MARKER), "")
}

/// Renders a synthetic corpus into `out` (default: the configured input
/// directory): page images, ground truth, reference glyphs and the script
/// model.
pub fn cmd_gen_synthetic(ws: &Workspace, cfg: &PipelineConfig, out: Option<&Path>) -> Result<String> {
    let s = &cfg.synthetic;
    let out: PathBuf = out.map_or_else(|| ws.resolve(&cfg.paths.input), |p| ws.resolve(p));
    let charset = gen_charset(s.charset_seed, s.counts())?;
    prepare_output(&out)?;

    let mut truth = Vec::new();
    let mut pages = Vec::new();
    let mut doc = Document::default();
    for i in 0..s.pages {
        let page_seed = s.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let text = random_text(&charset, s.lines, s.words_per_line, page_seed ^ 0x7e57);
        let render = RenderConfig {
            noise: s.noise,
            overlap: s.overlap,
            seed: page_seed,
        };
        let page = render_page(&charset, &text, &render)?;
        let file = format!("page-{i:04}.pgm");
        write_gray(&out.join(&file), &page.image)?;
        truth.extend(truth_rows(&page, i));
        pages.push(PageRow {
            page: i,
            file,
            width: page.image.width(),
            height: page.image.height(),
            lines: page.lines.len(),
            words: page.word_count(),
            chars: page.lines.iter().flat_map(|l| &l.words).map(|w| w.chars.len()).sum(),
            symbols: page.symbol_count(),
        });
        doc.pages.push(page.to_page_doc(i));
    }
    write_text(&out.join("truth.tsv"), &write_symbols(&truth))?;
    write_text(&out.join("pages.tsv"), &write_pages(&pages))?;
    write_text(&out.join("transcript.txt"), &doc.plain_text())?;
    write_text(&out.join("script.toml"), &charset.script_model().to_toml())?;

    let cdir = out.join("charset");
    let mut rows = Vec::new();
    for g in &charset.glyphs {
        let file = format!("{}.pgm", g.label);
        write_bitmap(&cdir.join(&file), &g.image)?;
        rows.push(vec![g.label.clone(), class_name(g.class).into(), g.zone.to_string(), file]);
    }
    write_text(&cdir.join(CHARSET_FILE), &write_table(CHARSET_SCHEMA, CHARSET_COLUMNS, rows))?;

    Ok(format!(
        "wrote {} pages ({} words, {} symbols) and {} reference glyphs to {}",
        s.pages,
        doc.word_count(),
        truth.len(),
        charset.glyphs.len(),
        out.display()
    ))
}

/// A reference glyph read back from a charset directory.
#[derive(Clone, Debug, PartialEq)]
pub struct CharsetEntry {
    pub label: String,
    pub zone: Zone,
    pub image: voltage_core::BinaryImage,
}

/// Reads `charset.tsv` and its images.
pub fn read_charset(dir: &Path) -> Result<Vec<CharsetEntry>> {
    let path = dir.join(CHARSET_FILE);
    let text = read_stage_text("gen-synthetic (or a hand-made charset directory)", &path)?;
    read_table(&path, &text, CHARSET_SCHEMA, CHARSET_COLUMNS)?
        .into_iter()
        .map(|(n, c)| {
            Ok(CharsetEntry {
                label: c[0].clone(),
                zone: parse_cell(&path, n, "zone", &c[2])?,
                image: read_bitmap(&dir.join(&c[3]))?,
            })
        })
        .collect()
}

/// The script model, if the configured file exists.
pub(crate) fn load_script_model(ws: &Workspace, cfg: &PipelineConfig) -> Result<Option<ScriptModel>> {
    let path = ws.resolve(&cfg.paths.script_model);
    if !path.exists() {
        return Ok(None);
    }
    let text = crate::io::read_text(&path)?;
    ScriptModel::from_toml(&text)
        .map(Some)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
