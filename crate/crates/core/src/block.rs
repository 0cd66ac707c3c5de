//! Macroblock partitioning and displaced-block access.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Integer-pel displacement of a block.
///
/// A positive `dx` points right and a positive `dy` points down. The block at
/// `origin` in the current frame is matched against the reference-frame block
/// at `origin + (dx, dy)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        MotionVector { dx, dy }
    }

    /// City-block length, used for center-biased tie-breaking.
    pub fn l1(self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }

    /// Chebyshev length.
    pub fn linf(self) -> u32 {
        self.dx.unsigned_abs().max(self.dy.unsigned_abs())
    }
}

impl Add for MotionVector {
    type Output = MotionVector;
    fn add(self, rhs: Self) -> Self {
        MotionVector::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl Sub for MotionVector {
    type Output = MotionVector;
    fn sub(self, rhs: Self) -> Self {
        MotionVector::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl fmt::Display for MotionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dx, self.dy)
    }
}

/// Top-left pixel coordinate of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Origin {
    pub x: usize,
    pub y: usize,
}

impl Origin {
    pub const fn new(x: usize, y: usize) -> Self {
        Origin { x, y }
    }
}

/// Raster partition of a frame into non-overlapping square blocks.
///
/// Pixels to the right of the last full column or below the last full row are
/// not covered by any block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    block_size: usize,
    cols: usize,
    rows: usize,
    width: usize,
    height: usize,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, block_size: usize) -> Result<Self> {
        if block_size < 2 {
            return Err(Error::Config(format!("block size must be >= 2, got {block_size}")));
        }
        let cols = width / block_size;
        let rows = height / block_size;
        if cols == 0 || rows == 0 {
            return Err(Error::Config(format!(
                "{width}x{height} frame holds no {block_size}x{block_size} block"
            )));
        }
        Ok(BlockGrid {
            block_size,
            cols,
            rows,
            width,
            height,
        })
    }

    pub fn for_frame(frame: &Frame, block_size: usize) -> Result<Self> {
        BlockGrid::new(frame.width(), frame.height(), block_size)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_origin(&self, index: usize) -> Result<Origin> {
        if index >= self.len() {
            return Err(Error::BlockIndex {
                index,
                count: self.len(),
            });
        }
        Ok(Origin::new(
            self.block_size * (index % self.cols),
            self.block_size * (index / self.cols),
        ))
    }

    /// Origins of every block in raster order.
    pub fn origins(&self) -> impl Iterator<Item = Origin> + '_ {
        (0..self.len()).map(move |i| {
            Origin::new(self.block_size * (i % self.cols), self.block_size * (i / self.cols))
        })
    }

    pub fn bounds(&self, origin: Origin) -> DisplacementBounds {
        DisplacementBounds::new(origin, self.block_size, self.width, self.height)
    }

    pub fn clamp_displacement(&self, origin: Origin, d: MotionVector) -> MotionVector {
        self.bounds(origin).clamp(d)
    }
}

/// The rectangle of displacements that keep a block fully inside the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisplacementBounds {
    pub min_dx: i32,
    pub max_dx: i32,
    pub min_dy: i32,
    pub max_dy: i32,
}

impl DisplacementBounds {
    pub fn new(origin: Origin, block_size: usize, width: usize, height: usize) -> Self {
        DisplacementBounds {
            min_dx: -(origin.x as i32),
            max_dx: width as i32 - block_size as i32 - origin.x as i32,
            min_dy: -(origin.y as i32),
            max_dy: height as i32 - block_size as i32 - origin.y as i32,
        }
    }

    pub fn contains(&self, d: MotionVector) -> bool {
        (self.min_dx..=self.max_dx).contains(&d.dx) && (self.min_dy..=self.max_dy).contains(&d.dy)
    }

    /// Component-wise nearest legal displacement.
    pub fn clamp(&self, d: MotionVector) -> MotionVector {
        MotionVector::new(
            d.dx.clamp(self.min_dx, self.max_dx),
            d.dy.clamp(self.min_dy, self.max_dy),
        )
    }

    pub fn clamp_f64(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x.clamp(self.min_dx as f64, self.max_dx as f64),
            y.clamp(self.min_dy as f64, self.max_dy as f64),
        )
    }
}

/// An owned square block of samples, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelBlock {
    pub size: usize,
    pub samples: Vec<u8>,
}

fn check_inside(frame: &Frame, origin: Origin, d: MotionVector, block_size: usize) -> Result<(usize, usize)> {
    let x = origin.x as i64 + d.dx as i64;
    let y = origin.y as i64 + d.dy as i64;
    let bs = block_size as i64;
    if x < 0 || y < 0 || x + bs > frame.width() as i64 || y + bs > frame.height() as i64 {
        return Err(Error::OutOfBounds {
            x,
            y,
            size: block_size,
            width: frame.width(),
            height: frame.height(),
        });
    }
    Ok((x as usize, y as usize))
}

/// Copies the block at `origin + d`. The displacement must already be legal.
pub fn extract_block(frame: &Frame, origin: Origin, d: MotionVector, block_size: usize) -> Result<PixelBlock> {
    let (x, y) = check_inside(frame, origin, d, block_size)?;
    let mut samples = Vec::with_capacity(block_size * block_size);
    for row in y..y + block_size {
        samples.extend_from_slice(&frame.row(row)[x..x + block_size]);
    }
    Ok(PixelBlock {
        size: block_size,
        samples,
    })
}

/// Row slices of the block at `origin + d`, without copying.
pub(crate) fn block_rows<'a>(
    frame: &'a Frame,
    origin: Origin,
    d: MotionVector,
    block_size: usize,
) -> Result<impl Iterator<Item = &'a [u8]> + 'a> {
    let (x, y) = check_inside(frame, origin, d, block_size)?;
    Ok((y..y + block_size).map(move |r| &frame.row(r)[x..x + block_size]))
}
