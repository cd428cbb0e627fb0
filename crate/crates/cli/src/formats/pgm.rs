//! Directories of 8-bit binary PGM (P5) frames named `frame_%06d.pgm`,
//! numbered from 1 and mapped to `[0, 1]` by `/ 255`.

use std::fs;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use shadowtrack_core::FrameStack;

use crate::error::{CliError, Result};

pub fn frame_name(frame: usize) -> String {
    format!("frame_{frame:06}.pgm")
}

fn frame_number(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    (digits.len() == 6 && digits.bytes().all(|b| b.is_ascii_digit())).then(|| digits.parse().ok())?
}

/// Frames of `dir` in numeric order. Other files are ignored.
pub fn read_dir(dir: &Path) -> Result<FrameStack> {
    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        if let Some(n) = entry.file_name().to_str().and_then(frame_number) {
            files.push((n, entry.path()));
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::format(dir, None, "no frame_%06d.pgm files"));
    }
    let mut dims = None;
    let mut data = Vec::new();
    for (_, path) in &files {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        if !bytes.starts_with(b"P5") {
            return Err(CliError::format(path, Some("offset 0".into()), "not a binary PGM (P5)"));
        }
        let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
            .map_err(|e| CliError::format(path, None, e.to_string()))?;
        if !matches!(img, image::DynamicImage::ImageLuma8(_)) {
            return Err(CliError::format(path, None, "expected 8-bit samples (maxval 255)"));
        }
        let img = img.into_luma8();
        let d = (img.height() as usize, img.width() as usize);
        if *dims.get_or_insert(d) != d {
            return Err(CliError::format(path, None, format!("frame is {}x{}, expected {}x{}", d.0, d.1, dims.unwrap().0, dims.unwrap().1)));
        }
        data.extend(img.as_raw().iter().map(|&b| b as f32 / 255.0));
    }
    let (h, w) = dims.unwrap();
    FrameStack::new(files.len(), h, w, data).map_err(|e| CliError::format(dir, None, e.to_string()))
}

/// Writes `frame_000001.pgm` onward, quantizing to the nearest of 256 levels.
pub fn write_dir(dir: &Path, stack: &FrameStack) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for k in 0..stack.frames() {
        let pixels: Vec<u8> = stack.frame(k).data.iter().map(|&v| (v * 255.0).round() as u8).collect();
        let path = dir.join(frame_name(k + 1));
        let mut bytes = Vec::new();
        PnmEncoder::new(&mut bytes)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&pixels, stack.cols() as u32, stack.rows() as u32, ExtendedColorType::L8)
            .map_err(|e| CliError::format(&path, None, e.to_string()))?;
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
