//! Decoder-side reconstruction of a frame from its reference and a motion field.

use crate::block::{BlockGrid, MotionVector};
use crate::error::{Error, Result};
use crate::estimators::MotionField;
use crate::frame::Frame;

#[derive(Clone, Debug)]
pub struct CompensatedFrame<'f> {
    pub frame: Frame,
    pub source_field: &'f MotionField,
}

/// Builds the prediction of the current frame: block `m` is copied from
/// `anchor` at `origin(m) + field[m]`. Pixels outside the tiled region are
/// copied from the co-located anchor pixels.
pub fn compensate<'f>(anchor: &Frame, field: &'f MotionField, grid: &BlockGrid) -> Result<CompensatedFrame<'f>> {
    if !field.matches_grid(grid) || grid.width() != anchor.width() || grid.height() != anchor.height() {
        return Err(Error::DimensionMismatch(format!(
            "field {}x{} blocks of {} vs grid {}x{} blocks of {} on {}x{} anchor",
            field.cols(),
            field.rows(),
            field.block_size(),
            grid.cols(),
            grid.rows(),
            grid.block_size(),
            anchor.width(),
            anchor.height()
        )));
    }
    let bs = grid.block_size();
    let width = anchor.width();
    let mut out = anchor.clone();
    let dst = out.luma_mut();
    for (origin, &d) in grid.origins().zip(field.vectors()) {
        if !grid.bounds(origin).contains(d) {
            return Err(Error::OutOfBounds {
                x: origin.x as i64 + d.dx as i64,
                y: origin.y as i64 + d.dy as i64,
                size: bs,
                width,
                height: anchor.height(),
            });
        }
        if d == MotionVector::ZERO {
            continue;
        }
        let sx = (origin.x as i32 + d.dx) as usize;
        let sy = (origin.y as i32 + d.dy) as usize;
        for r in 0..bs {
            let src = &anchor.row(sy + r)[sx..sx + bs];
            let start = (origin.y + r) * width + origin.x;
            dst[start..start + bs].copy_from_slice(src);
        }
    }
    Ok(CompensatedFrame {
        frame: out,
        source_field: field,
    })
}
