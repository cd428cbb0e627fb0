//! On-disk formats.

pub mod mot;
pub mod pgm;
pub mod vsr;

use std::path::Path;

use shadowtrack_core::FrameStack;

use crate::error::Result;

/// Reads a `VSR1` file, or a PGM frame directory when `path` is a directory.
pub fn read_frames(path: &Path) -> Result<FrameStack> {
    if path.is_dir() {
        pgm::read_dir(path)
    } else {
        vsr::read(path)
    }
}

/// Writes PGM frames when `path` has no extension or ends in `/`, `VSR1` otherwise.
pub fn write_frames(path: &Path, stack: &FrameStack) -> Result<()> {
    if path.is_dir() || path.extension().is_none() {
        pgm::write_dir(path, stack)
    } else {
        vsr::write(path, stack)
    }
}
