//! `VSR1` frame stacks: magic `VSR1`, little-endian `u32` T, H, W, then
//! T·H·W little-endian `f32` samples, frame-major and row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use shadowtrack_core::FrameStack;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"VSR1";
const HEADER: usize = 16;

pub fn encode(stack: &FrameStack) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 4 * stack.data().len());
    out.extend_from_slice(MAGIC);
    for d in [stack.frames(), stack.rows(), stack.cols()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in stack.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a stack; errors name the byte offset. `path` is only used in messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<FrameStack> {
    let at = |offset: usize, msg: String| CliError::format(path, Some(format!("offset {offset}")), msg);
    if bytes.len() < HEADER {
        return Err(at(0, format!("file has {} bytes, header needs {HEADER}", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(at(0, "missing VSR1 magic".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (t, h, w) = (dim(0), dim(1), dim(2));
    let n = t
        .checked_mul(h)
        .and_then(|n| n.checked_mul(w))
        .filter(|n| n.checked_mul(4).is_some_and(|b| b.checked_add(HEADER).is_some()))
        .ok_or_else(|| at(4, format!("dimensions {t}x{h}x{w} overflow")))?;
    if bytes.len() != HEADER + 4 * n {
        return Err(at(HEADER, format!("{t}x{h}x{w} needs {} payload bytes, found {}", 4 * n, bytes.len() - HEADER)));
    }
    let data: Vec<f32> = bytes[HEADER..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(at(HEADER + 4 * i, format!("sample {} outside [0, 1]", data[i])));
    }
    FrameStack::new(t, h, w, data).map_err(|e| at(4, e.to_string()))
}

pub fn read(path: &Path) -> Result<FrameStack> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes, path)
}

pub fn write(path: &Path, stack: &FrameStack) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&encode(stack)).map_err(|e| CliError::io(path, e))
}
