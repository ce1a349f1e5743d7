use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use crate::error::{Error, Result};

/// 8-bit grayscale image stored row-major.
///
/// Positions derived from frames use continuous pixel coordinates: pixel
/// `(i, j)` covers `[i, i + 1) × [j, j + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn from_fn<F>(width: usize, height: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> u8,
    {
        assert!(width > 0 && height > 0, "empty frame");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    #[inline]
    pub(crate) fn row(&self, y: usize, x: usize, len: usize) -> &[u8] {
        let start = y * self.width + x;
        &self.pixels[start..start + len]
    }

    /// Read a binary (P5) 8-bit PGM file.
    pub fn read_pgm(path: &Path) -> Result<Self> {
        let input_err = |message: String| Error::Input {
            path: path.to_path_buf(),
            message,
        };
        let bytes = fs::read(path).map_err(|e| input_err(e.to_string()))?;
        if !bytes.starts_with(b"P5") {
            return Err(input_err("not a binary (P5) PGM file".into()));
        }
        let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
            .map_err(|e| input_err(e.to_string()))?;
        let gray = match img {
            image::DynamicImage::ImageLuma8(g) => g,
            other => {
                return Err(input_err(format!(
                    "expected 8-bit grayscale, found {:?}",
                    other.color()
                )))
            }
        };
        let (w, h) = gray.dimensions();
        Frame::new(w as usize, h as usize, gray.into_raw()).map_err(|e| input_err(e.to_string()))
    }

    /// Write a binary (P5) 8-bit PGM file.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let encoder = PnmEncoder::new(BufWriter::new(file))
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
        encoder
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                ExtendedColorType::L8,
            )
            .map_err(|e| Error::Input {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
    }
}

/// All `.pgm` files in `dir`, sorted by file name.
pub fn list_pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Input {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_pgm = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub fn load_sequence(dir: &Path) -> Result<Vec<Frame>> {
    list_pgm_files(dir)?
        .iter()
        .map(|p| Frame::read_pgm(p))
        .collect()
}
