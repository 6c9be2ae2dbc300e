//! Tab-separated stage manifests. Every file starts with a schema line
//! (`#voltage-<kind> v1`) followed by a column header line.
//!
//! The symbol manifest is shared by extraction output, synthetic ground
//! truth and recognizer output:
//!
//! ```text
//! #voltage-symbols v1
//! id  page  line  word  char  symbol  zone  x  y  w  h  label  path
//! ```
//!
//! `word` counts within its line; `label` and `path` may be empty.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use voltage_core::metrics::{PageDoc, SymbolBox, WordBox};
use voltage_core::{Document, Provenance, Rect, Zone};

use crate::error::{CliError, Result};

pub const SYMBOLS_SCHEMA: &str = "#voltage-symbols v1";
pub const SYMBOL_COLUMNS: &[&str] = &[
    "id", "page", "line", "word", "char", "symbol", "zone", "x", "y", "w", "h", "label", "path",
];

/// One parsed row with its 1-based line number.
pub type Row = (usize, Vec<String>);

pub fn write_table<I>(schema: &str, columns: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = format!("{schema}\n{}\n", columns.join("\t"));
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Checks the schema and column lines and splits every row.
pub fn read_table(path: &Path, text: &str, schema: &str, columns: &[&str]) -> Result<Vec<Row>> {
    let err = |line: usize, msg: String| CliError::Schema {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == schema => {}
        Some((_, l)) => return Err(err(1, format!("expected schema {schema:?}, found {l:?}"))),
        None => return Err(err(1, format!("empty file, expected schema {schema:?}"))),
    }
    let header = columns.join("\t");
    match lines.next() {
        Some((_, l)) if l == header => {}
        _ => return Err(err(2, format!("expected columns {header:?}"))),
    }
    let mut rows = Vec::new();
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let cells: Vec<String> = l.split('\t').map(str::to_string).collect();
        if cells.len() != columns.len() {
            return Err(err(n, format!("{} columns, expected {}", cells.len(), columns.len())));
        }
        rows.push((n, cells));
    }
    Ok(rows)
}

pub fn parse_cell<T: FromStr>(path: &Path, line: usize, column: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Schema {
        path: path.to_path_buf(),
        line,
        msg: format!("bad {column} value {value:?}"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolRow {
    pub provenance: Provenance,
    pub zone: Zone,
    pub rect: Rect,
    pub label: Option<String>,
    pub path: Option<String>,
}

impl SymbolRow {
    /// Stable symbol id, also used as the image file stem.
    pub fn id(&self) -> String {
        let p = &self.provenance;
        format!("p{:04}-l{:03}-w{:03}-c{:03}-s{}", p.page, p.line, p.word, p.char, p.symbol)
    }
}

pub fn write_symbols(rows: &[SymbolRow]) -> String {
    write_table(
        SYMBOLS_SCHEMA,
        SYMBOL_COLUMNS,
        rows.iter().map(|r| {
            let p = &r.provenance;
            vec![
                r.id(),
                p.page.to_string(),
                p.line.to_string(),
                p.word.to_string(),
                p.char.to_string(),
                p.symbol.to_string(),
                r.zone.to_string(),
                r.rect.x.to_string(),
                r.rect.y.to_string(),
                r.rect.w.to_string(),
                r.rect.h.to_string(),
                r.label.clone().unwrap_or_default(),
                r.path.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn read_symbols(path: &Path, text: &str) -> Result<Vec<SymbolRow>> {
    read_table(path, text, SYMBOLS_SCHEMA, SYMBOL_COLUMNS)?
        .into_iter()
        .map(|(n, c)| {
            let num = |i: usize| parse_cell::<usize>(path, n, SYMBOL_COLUMNS[i], &c[i]);
            let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
            let row = SymbolRow {
                provenance: Provenance {
                    page: num(1)?,
                    line: num(2)?,
                    word: num(3)?,
                    char: num(4)?,
                    symbol: num(5)?,
                },
                zone: parse_cell(path, n, "zone", &c[6])?,
                rect: Rect::new(num(7)?, num(8)?, num(9)?, num(10)?),
                label: opt(&c[11]),
                path: opt(&c[12]),
            };
            if row.id() != c[0] {
                return Err(CliError::Schema {
                    path: path.to_path_buf(),
                    line: n,
                    msg: format!("id {:?} does not match its provenance", c[0]),
                });
            }
            Ok(row)
        })
        .collect()
}

/// Labelled rows as a document; `pages` empty pages are kept so that page
/// counts survive. Unlabelled rows are skipped.
pub fn rows_to_document(rows: &[SymbolRow], pages: usize) -> Document {
    let mut by_page: BTreeMap<usize, BTreeMap<(usize, usize), Vec<SymbolBox>>> = (0..pages).map(|p| (p, BTreeMap::new())).collect();
    for r in rows {
        let Some(label) = &r.label else { continue };
        by_page
            .entry(r.provenance.page)
            .or_default()
            .entry((r.provenance.line, r.provenance.word))
            .or_default()
            .push(SymbolBox {
                label: label.clone(),
                zone: r.zone,
                rect: r.rect,
            });
    }
    Document {
        pages: by_page
            .into_iter()
            .map(|(page, words)| PageDoc {
                page,
                words: words
                    .into_iter()
                    .map(|((line, _), symbols)| WordBox { line, symbols })
                    .collect(),
            })
            .collect(),
    }
}

pub const PAGES_SCHEMA: &str = "#voltage-pages v1";
pub const PAGE_COLUMNS: &[&str] = &["page", "file", "width", "height", "lines", "words", "chars", "symbols"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageRow {
    pub page: usize,
    pub file: String,
    pub width: usize,
    pub height: usize,
    pub lines: usize,
    pub words: usize,
    pub chars: usize,
    pub symbols: usize,
}

pub fn write_pages(rows: &[PageRow]) -> String {
    write_table(
        PAGES_SCHEMA,
        PAGE_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.page.to_string(),
                r.file.clone(),
                r.width.to_string(),
                r.height.to_string(),
                r.lines.to_string(),
                r.words.to_string(),
                r.chars.to_string(),
                r.symbols.to_string(),
            ]
        }),
    )
}

pub fn read_pages(path: &Path, text: &str) -> Result<Vec<PageRow>> {
    read_table(path, text, PAGES_SCHEMA, PAGE_COLUMNS)?
        .into_iter()
        .map(|(n, c)| {
            let num = |i: usize| parse_cell::<usize>(path, n, PAGE_COLUMNS[i], &c[i]);
            Ok(PageRow {
                page: num(0)?,
                file: c[1].clone(),
                width: num(2)?,
                height: num(3)?,
                lines: num(4)?,
                words: num(5)?,
                chars: num(6)?,
                symbols: num(7)?,
            })
        })
        .collect()
}
