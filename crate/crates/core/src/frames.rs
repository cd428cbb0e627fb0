//! Grayscale video cubes and their Casorati matrix view.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `t` frames of `h x w` intensities in `[0, 1]`, frame-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    t: usize,
    h: usize,
    w: usize,
    data: Vec<f32>,
}

/// Borrowed view of one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameRef<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f32],
}

impl<'a> FrameRef<'a> {
    pub fn new(rows: usize, cols: usize, data: &'a [f32]) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidFrameStack(format!(
                "frame of {rows}x{cols} needs {} samples, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(FrameRef { rows, cols, data })
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }
}

impl FrameStack {
    pub fn new(t: usize, h: usize, w: usize, data: Vec<f32>) -> Result<Self> {
        if t == 0 || h == 0 || w == 0 {
            return Err(Error::InvalidFrameStack(format!("empty dimensions {t}x{h}x{w}")));
        }
        let expected = t
            .checked_mul(h)
            .and_then(|n| n.checked_mul(w))
            .ok_or_else(|| Error::InvalidFrameStack(format!("dimensions {t}x{h}x{w} overflow")))?;
        if data.len() != expected {
            return Err(Error::InvalidFrameStack(format!(
                "expected {expected} samples, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidFrameStack(format!(
                "sample {i} = {} outside [0, 1]",
                data[i]
            )));
        }
        Ok(FrameStack { t, h, w, data })
    }

    /// Stack of zeros.
    pub fn zeros(t: usize, h: usize, w: usize) -> Result<Self> {
        Self::new(t, h, w, alloc::vec![0.0; t * h * w])
    }

    pub fn frames(&self) -> usize {
        self.t
    }

    pub fn rows(&self) -> usize {
        self.h
    }

    pub fn cols(&self) -> usize {
        self.w
    }

    pub fn pixels_per_frame(&self) -> usize {
        self.h * self.w
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Frame at 0-based `index`.
    pub fn frame(&self, index: usize) -> FrameRef<'_> {
        let n = self.pixels_per_frame();
        FrameRef {
            rows: self.h,
            cols: self.w,
            data: &self.data[index * n..(index + 1) * n],
        }
    }

    /// Casorati matrix: column `j` is frame `j` vectorized row-major.
    pub fn casorati(&self) -> DMatrix<f64> {
        let n = self.pixels_per_frame();
        DMatrix::from_fn(n, self.t, |i, j| self.data[j * n + i] as f64)
    }

    /// Casorati matrix of frames `start..start + len`.
    pub fn casorati_range(&self, start: usize, len: usize) -> DMatrix<f64> {
        let n = self.pixels_per_frame();
        DMatrix::from_fn(n, len, |i, j| self.data[(start + j) * n + i] as f64)
    }

    /// Inverse of [`casorati`](Self::casorati). Samples must lie in `[0, 1]`.
    pub fn from_casorati(m: &DMatrix<f64>, h: usize, w: usize) -> Result<Self> {
        if m.nrows() != h * w {
            return Err(Error::ShapeMismatch {
                expected: (h * w, m.ncols()),
                found: (m.nrows(), m.ncols()),
            });
        }
        let t = m.ncols();
        let n = h * w;
        let mut data = alloc::vec![0.0f32; t * n];
        for j in 0..t {
            for i in 0..n {
                data[j * n + i] = m[(i, j)] as f32;
            }
        }
        Self::new(t, h, w, data)
    }

    /// Sample-wise `1 - v`, turning dark shadows into bright blobs.
    pub fn inverted(&self) -> Self {
        FrameStack {
            data: self.data.iter().map(|v| 1.0 - v).collect(),
            ..self.clone()
        }
    }
}
