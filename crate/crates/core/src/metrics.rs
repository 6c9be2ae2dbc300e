//! Recognition error rates and the error taxonomy.
//!
//! CER and WER only count symbols and words that were segmented correctly;
//! the end-to-end rate aligns whole word sequences and so also charges
//! segmentation losses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::raster::Rect;
use crate::segmentation::Zone;
use crate::{Error, Result};

/// One symbol of a transcribed page.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolBox {
    pub label: String,
    pub zone: Zone,
    pub rect: Rect,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordBox {
    pub line: usize,
    /// Reading order.
    pub symbols: Vec<SymbolBox>,
}

impl WordBox {
    pub fn rect(&self) -> Option<Rect> {
        self.symbols.iter().map(|s| s.rect).reduce(|a, b| a.union(&b))
    }

    /// Labels joined with no separator.
    pub fn text(&self) -> String {
        self.symbols.iter().map(|s| s.label.as_str()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PageDoc {
    pub page: usize,
    /// Reading order.
    pub words: Vec<WordBox>,
}

/// A set of transcribed pages, either ground truth or recognizer output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub pages: Vec<PageDoc>,
}

pub const DOCUMENT_HEADER: &str = "#voltage-transcript v1";
const DOCUMENT_COLUMNS: &str = "page\tline\tword\tzone\tx\ty\tw\th\tlabel";

impl Document {
    pub fn word_count(&self) -> usize {
        self.pages.iter().map(|p| p.words.len()).sum()
    }

    pub fn symbol_count(&self) -> usize {
        self.pages.iter().flat_map(|p| &p.words).map(|w| w.symbols.len()).sum()
    }

    pub fn page(&self, index: usize) -> Option<&PageDoc> {
        self.pages.iter().find(|p| p.page == index)
    }

    /// Every word of every page as text, pages in order.
    pub fn word_texts(&self) -> Vec<String> {
        self.pages.iter().flat_map(|p| &p.words).map(WordBox::text).collect()
    }

    /// Plain text: one line per text line, words separated by spaces.
    pub fn plain_text(&self) -> String {
        let mut out = String::new();
        for p in &self.pages {
            let mut line = None;
            for w in &p.words {
                match line {
                    Some(l) if l == w.line => out.push(' '),
                    Some(_) => out.push('\n'),
                    None => {}
                }
                line = Some(w.line);
                out.push_str(&w.text());
            }
            out.push('\n');
        }
        out
    }

    /// Tab-separated, one row per symbol; the word column is the word's
    /// index within its page.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{DOCUMENT_HEADER}\n{DOCUMENT_COLUMNS}\n");
        for p in &self.pages {
            for (wi, w) in p.words.iter().enumerate() {
                for s in &w.symbols {
                    let r = s.rect;
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{wi}\t{}\t{}\t{}\t{}\t{}\t{}",
                        p.page, w.line, s.zone, r.x, r.y, r.w, r.h, s.label
                    );
                }
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == DOCUMENT_HEADER => {}
            _ => return Err(Error::Parse { line: 1, msg: format!("expected {DOCUMENT_HEADER:?}") }),
        }
        let mut doc = Document::default();
        let mut last_key: Option<(usize, usize)> = None;
        for (i, line) in lines {
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line == DOCUMENT_COLUMNS {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 9 {
                return Err(err(format!("expected 9 columns, got {}", cols.len())));
            }
            let num = |k: usize| cols[k].parse::<usize>().map_err(|e| err(format!("column {}: {e}", k + 1)));
            let (page, line_no, word) = (num(0)?, num(1)?, num(2)?);
            let zone: Zone = cols[3].parse().map_err(|e: Error| err(e.to_string()))?;
            let rect = Rect::new(num(4)?, num(5)?, num(6)?, num(7)?);
            let label = cols[8].to_string();
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(err(format!("bad label {label:?}")));
            }
            if doc.pages.last().is_none_or(|p| p.page != page) {
                if doc.pages.iter().any(|p| p.page == page) {
                    return Err(err(format!("page {page} is not contiguous")));
                }
                doc.pages.push(PageDoc { page, words: Vec::new() });
                last_key = None;
            }
            let words = &mut doc.pages.last_mut().expect("pushed above").words;
            if last_key != Some((page, word)) {
                if word != words.len() {
                    return Err(err(format!("word index {word} out of sequence")));
                }
                words.push(WordBox { line: line_no, symbols: Vec::new() });
                last_key = Some((page, word));
            }
            words.last_mut().expect("pushed above").symbols.push(SymbolBox { label, zone, rect });
        }
        Ok(doc)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ZoneStats {
    /// Correctly segmented symbols in the zone.
    pub segmented: usize,
    /// Of those, correctly labelled.
    pub correct: usize,
}

impl ZoneStats {
    pub fn accuracy(&self) -> Option<f64> {
        (self.segmented > 0).then(|| self.correct as f64 / self.segmented as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorKind {
    OverSegmentation,
    MisClassification,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::OverSegmentation => "over-segmentation",
            ErrorKind::MisClassification => "mis-classification",
        }
    }
}

/// A ground-truth symbol and what it was recognized as.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorRecord {
    pub page: usize,
    pub truth: String,
    pub recognized: Vec<String>,
}

impl ErrorRecord {
    /// None when the record is not an error (or is a plain miss).
    pub fn kind(&self) -> Option<ErrorKind> {
        match self.recognized.len() {
            0 => None,
            1 if self.recognized[0] == self.truth => None,
            1 => Some(ErrorKind::MisClassification),
            _ => Some(ErrorKind::OverSegmentation),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaxonomyReport {
    pub counts: BTreeMap<ErrorKind, usize>,
    pub examples: Vec<(ErrorKind, ErrorRecord)>,
}

impl TaxonomyReport {
    pub fn count(&self, kind: ErrorKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }
}

/// Counts of over-segmentation and mis-classification, with up to
/// `max_examples` listings per kind.
pub fn taxonomy_report(errors: &[ErrorRecord], max_examples: usize) -> TaxonomyReport {
    let mut report = TaxonomyReport::default();
    for e in errors {
        if let Some(kind) = e.kind() {
            let n = report.counts.entry(kind).or_default();
            *n += 1;
            if *n <= max_examples {
                report.examples.push((kind, e.clone()));
            }
        }
    }
    report.examples.sort_by_key(|(k, _)| *k);
    report
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvaluationReport {
    pub truth_symbols: usize,
    pub truth_words: usize,
    /// N_s: ground-truth symbols matched one-to-one by a recognized symbol.
    pub segmented_symbols: usize,
    /// N_s': segmented symbols with the wrong label.
    pub misrecognized_symbols: usize,
    /// N_w: ground-truth words matched by a recognized word.
    pub segmented_words: usize,
    /// N_w': segmented words whose label sequence differs.
    pub misrecognized_words: usize,
    /// Ground-truth words not reproduced exactly in the aligned sequence.
    pub e2e_word_errors: usize,
    pub missed_symbols: usize,
    pub spurious_symbols: usize,
    pub over_segmented_symbols: usize,
    pub zones: BTreeMap<Zone, ZoneStats>,
    pub taxonomy: TaxonomyReport,
}

fn rate(num: usize, den: usize, what: &str) -> Result<f64> {
    if den == 0 {
        return Err(Error::UndefinedRate(format!("{what}: denominator is 0")));
    }
    if num > den {
        return Err(Error::OutOfRange {
            what: format!("{what} numerator {num} over denominator {den}"),
            value: num as f64,
        });
    }
    Ok(num as f64 / den as f64)
}

/// N_s' / N_s.
pub fn cer(report: &EvaluationReport) -> Result<f64> {
    rate(report.misrecognized_symbols, report.segmented_symbols, "CER")
}

/// N_w' / N_w.
pub fn wer(report: &EvaluationReport) -> Result<f64> {
    rate(report.misrecognized_words, report.segmented_words, "WER")
}

/// Unaligned word errors over ground-truth words.
pub fn e2e(report: &EvaluationReport) -> Result<f64> {
    rate(report.e2e_word_errors, report.truth_words, "E2E")
}

/// Number of ground-truth items left unmatched by a minimal edit-distance
/// alignment of the two sequences (substituted or deleted items).
pub fn aligned_errors<T: PartialEq>(truth: &[T], recognized: &[T]) -> usize {
    let (n, m) = (truth.len(), recognized.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(truth[i - 1] != recognized[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    // Walk back, preferring exact matches, to count matched truth items.
    let (mut i, mut j, mut matched) = (n, m, 0);
    while i > 0 && j > 0 {
        if truth[i - 1] == recognized[j - 1] && d[i][j] == d[i - 1][j - 1] {
            matched += 1;
            i -= 1;
            j -= 1;
        } else if d[i][j] == d[i - 1][j - 1] + 1 {
            i -= 1;
            j -= 1;
        } else if d[i][j] == d[i - 1][j] + 1 {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    n - matched
}

/// Fraction of ground-truth words not reproduced, after aligning the word
/// sequences by edit distance.
pub fn e2e_error<T: PartialEq>(truth: &[T], recognized: &[T]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::UndefinedRate("E2E: empty ground truth".into()));
    }
    Ok(aligned_errors(truth, recognized) as f64 / truth.len() as f64)
}

/// Greedy one-to-one matching by IoU (highest first, then lowest indices).
fn match_boxes(truth: &[Rect], found: &[Rect], min_iou: f64) -> Vec<Option<usize>> {
    let mut pairs = Vec::new();
    for (i, t) in truth.iter().enumerate() {
        for (j, f) in found.iter().enumerate() {
            let iou = t.iou(f);
            if iou >= min_iou && iou > 0.0 {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut out = vec![None; truth.len()];
    let mut used = vec![false; found.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(j);
            used[j] = true;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// IoU needed for a segmented symbol or word to count as correct.
    pub min_iou: f64,
    /// Share of a recognized box inside a truth box for it to count as a
    /// fragment of that symbol.
    pub fragment_containment: f64,
    pub max_examples: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            min_iou: 0.5,
            fragment_containment: 0.5,
            max_examples: 10,
        }
    }
}

/// Compares recognizer output with ground truth page by page.
pub fn evaluate(truth: &Document, recognized: &Document, cfg: &EvaluationConfig) -> Result<EvaluationReport> {
    let mut r = EvaluationReport::default();
    let mut records = Vec::new();
    let empty = PageDoc::default();
    for tp in &truth.pages {
        let rp = recognized.page(tp.page).unwrap_or(&empty);
        let ts: Vec<&SymbolBox> = tp.words.iter().flat_map(|w| &w.symbols).collect();
        let rs: Vec<&SymbolBox> = rp.words.iter().flat_map(|w| &w.symbols).collect();
        r.truth_symbols += ts.len();
        r.truth_words += tp.words.len();

        // Each recognized box belongs to the truth box it overlaps most.
        let mut fragments: Vec<Vec<usize>> = vec![Vec::new(); ts.len()];
        for (j, s) in rs.iter().enumerate() {
            let best = ts
                .iter()
                .enumerate()
                .filter_map(|(i, t)| t.rect.intersect(&s.rect).map(|x| (x.area(), i)))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            if let Some((area, i)) = best {
                if area as f64 >= cfg.fragment_containment * s.rect.area() as f64 {
                    fragments[i].push(j);
                }
            }
        }
        let over: Vec<bool> = fragments.iter().map(|f| f.len() >= 2).collect();
        let t_rects: Vec<Rect> = ts
            .iter()
            .zip(&over)
            .map(|(t, &o)| if o { Rect::default() } else { t.rect })
            .collect();
        let mut claimed = vec![false; rs.len()];
        for (i, f) in fragments.iter().enumerate() {
            if over[i] {
                f.iter().for_each(|&j| claimed[j] = true);
            }
        }
        let r_rects: Vec<Rect> = rs
            .iter()
            .zip(&claimed)
            .map(|(s, &c)| if c { Rect::default() } else { s.rect })
            .collect();
        let matches = match_boxes(&t_rects, &r_rects, cfg.min_iou);

        let mut used = claimed.clone();
        for (i, t) in ts.iter().enumerate() {
            if over[i] {
                r.over_segmented_symbols += 1;
                records.push(ErrorRecord {
                    page: tp.page,
                    truth: t.label.clone(),
                    recognized: fragments[i].iter().map(|&j| rs[j].label.clone()).collect(),
                });
                continue;
            }
            match matches[i] {
                Some(j) => {
                    used[j] = true;
                    r.segmented_symbols += 1;
                    let ok = rs[j].label == t.label;
                    let z = r.zones.entry(t.zone).or_default();
                    z.segmented += 1;
                    if ok {
                        z.correct += 1;
                    } else {
                        r.misrecognized_symbols += 1;
                    }
                    records.push(ErrorRecord {
                        page: tp.page,
                        truth: t.label.clone(),
                        recognized: vec![rs[j].label.clone()],
                    });
                }
                None => r.missed_symbols += 1,
            }
        }
        r.spurious_symbols += used.iter().filter(|u| !**u).count();

        let tw: Vec<Rect> = tp.words.iter().map(|w| w.rect().unwrap_or_default()).collect();
        let rw: Vec<Rect> = rp.words.iter().map(|w| w.rect().unwrap_or_default()).collect();
        for (i, m) in match_boxes(&tw, &rw, cfg.min_iou).into_iter().enumerate() {
            if let Some(j) = m {
                r.segmented_words += 1;
                let a: Vec<&str> = tp.words[i].symbols.iter().map(|s| s.label.as_str()).collect();
                let b: Vec<&str> = rp.words[j].symbols.iter().map(|s| s.label.as_str()).collect();
                if a != b {
                    r.misrecognized_words += 1;
                }
            }
        }
        let label_seq = |w: &WordBox| w.symbols.iter().map(|s| s.label.clone()).collect::<Vec<_>>();
        let ta: Vec<Vec<String>> = tp.words.iter().map(label_seq).collect();
        let ra: Vec<Vec<String>> = rp.words.iter().map(label_seq).collect();
        r.e2e_word_errors += aligned_errors(&ta, &ra);
    }
    r.taxonomy = taxonomy_report(&records, cfg.max_examples);
    Ok(r)
}

/// `rate` as a percentage string with the given number of decimals.
pub fn format_percent(rate: f64, decimals: usize) -> String {
    format!("{:.*}%", decimals, rate * 100.0)
}

impl EvaluationReport {
    /// Machine-readable `metric\tvalue` table.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("#voltage-report v1\nmetric\tvalue\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k}\t{v}");
        };
        let opt = |r: Result<f64>| r.map_or_else(|_| "undefined".to_string(), |v| format!("{v:.6}"));
        row("cer", opt(cer(self)));
        row("wer", opt(wer(self)));
        row("e2e", opt(e2e(self)));
        for (k, v) in [
            ("truth_symbols", self.truth_symbols),
            ("truth_words", self.truth_words),
            ("segmented_symbols", self.segmented_symbols),
            ("misrecognized_symbols", self.misrecognized_symbols),
            ("segmented_words", self.segmented_words),
            ("misrecognized_words", self.misrecognized_words),
            ("e2e_word_errors", self.e2e_word_errors),
            ("missed_symbols", self.missed_symbols),
            ("spurious_symbols", self.spurious_symbols),
            ("over_segmented_symbols", self.over_segmented_symbols),
        ] {
            row(k, v.to_string());
        }
        for (z, s) in &self.zones {
            row(&format!("zone_{z}_segmented"), s.segmented.to_string());
            row(&format!("zone_{z}_correct"), s.correct.to_string());
        }
        for kind in [ErrorKind::OverSegmentation, ErrorKind::MisClassification] {
            row(&format!("taxonomy_{}", kind.as_str()), self.taxonomy.count(kind).to_string());
        }
        out
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let pct = |r: Result<f64>| r.map_or_else(|_| "n/a".to_string(), |v| format_percent(v, 1));
        let mut out = String::new();
        let _ = writeln!(out, "E2E  {}  ({} of {} words)", pct(e2e(self)), self.e2e_word_errors, self.truth_words);
        let _ = writeln!(out, "WER  {}  ({} of {} segmented words)", pct(wer(self)), self.misrecognized_words, self.segmented_words);
        let _ = writeln!(out, "CER  {}  ({} of {} segmented symbols)", pct(cer(self)), self.misrecognized_symbols, self.segmented_symbols);
        let _ = writeln!(
            out,
            "segmentation: {} missed, {} spurious, {} over-segmented",
            self.missed_symbols, self.spurious_symbols, self.over_segmented_symbols
        );
        for (z, s) in &self.zones {
            let acc = s.accuracy().map_or_else(|| "n/a".into(), |a| format_percent(a, 1));
            let _ = writeln!(out, "zone {z:<6} accuracy {acc}  ({} of {})", s.correct, s.segmented);
        }
        for kind in [ErrorKind::OverSegmentation, ErrorKind::MisClassification] {
            let _ = writeln!(out, "{:<19} {}", kind.as_str(), self.taxonomy.count(kind));
        }
        for (kind, e) in &self.taxonomy.examples {
            let _ = writeln!(out, "  {:<19} page {}: {} -> {}", kind.as_str(), e.page, e.truth, e.recognized.join(" "));
        }
        out
    }
}
