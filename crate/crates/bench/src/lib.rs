//! Inputs shared by the benchmarks.

use voltage_core::raster::binarize;
use voltage_core::synthscript::{gen_charset, random_text, render_page, CharsetCounts, RenderConfig, SynthCharset};
use voltage_core::BinaryImage;

pub fn charset() -> SynthCharset {
    gen_charset(1, CharsetCounts::default()).expect("default charset")
}

/// One rendered and binarized page of `lines` lines.
pub fn page(charset: &SynthCharset, lines: usize, noisy: bool) -> BinaryImage {
    let text = random_text(charset, lines, 8, 7);
    let cfg = if noisy { RenderConfig::paper_like(7) } else { RenderConfig::default() };
    let page = render_page(charset, &text, &cfg).expect("rendered page");
    binarize(&page.image, None)
}
