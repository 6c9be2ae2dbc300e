//! Workspace paths, image files and text files.

use std::fs;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageReader};
use voltage_core::raster::binarize;
use voltage_core::{BinaryImage, GrayImage};

use crate::error::{CliError, Result};

/// Environment variable naming the default workspace.
pub const WORKSPACE_ENV: &str = "VOLTAGE_WORKSPACE";

/// Root of a pipeline workspace; every stage writes into its own
/// subdirectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `p` itself if absolute, else relative to the workspace root.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.root.join(stage)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Reads a file another stage should have produced.
pub fn read_stage_text(stage: &'static str, path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(CliError::MissingStage {
            stage,
            path: path.to_path_buf(),
        });
    }
    read_text(path)
}

/// Removes and recreates a stage directory so reruns leave no stale files.
pub fn reset_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Decodes a PGM/PNM or PNG file to 8-bit gray.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let bad = |msg: String| CliError::Image {
        path: path.to_path_buf(),
        msg,
    };
    let img = ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(|e| bad(e.to_string()))?
        .into_luma8();
    let (w, h) = img.dimensions();
    Ok(GrayImage::new(w as usize, h as usize, img.into_raw())?)
}

/// Writes binary (P5) PGM.
pub fn write_gray(path: &Path, img: &GrayImage) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut bytes = Vec::with_capacity(img.data().len() + 32);
    PnmEncoder::new(&mut bytes)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(img.data(), img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(|e| CliError::Image {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn write_bitmap(path: &Path, img: &BinaryImage) -> Result<()> {
    write_gray(path, &GrayImage::from_binary(img))
}

/// Symbol images are stored as pure black on white.
pub fn read_bitmap(path: &Path) -> Result<BinaryImage> {
    Ok(binarize(&read_gray(path)?, Some(128)))
}

/// Image files (`.pgm`, `.pnm`, `.png`) directly inside `dir`, by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("pgm" | "pnm" | "png")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.pgm");
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        write_gray(&p, &img).unwrap();
        assert!(std::fs::read(&p).unwrap().starts_with(b"P5"));
        assert_eq!(read_gray(&p).unwrap(), img);
    }

    #[test]
    fn corrupt_image_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.png");
        std::fs::write(&p, b"not an image").unwrap();
        let err = read_gray(&p).unwrap_err().to_string();
        assert!(err.contains("bad.png"), "{err}");
    }

    #[test]
    fn listing_is_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.pgm", "a.PNG", "notes.txt"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        let names: Vec<_> = list_images(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.PNG", "b.pgm"]);
    }
}
