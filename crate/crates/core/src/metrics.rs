//! Matching cost (SAD) with per-block evaluation accounting, and PSNR.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::block::{block_rows, DisplacementBounds, MotionVector, Origin, PixelBlock};
use crate::error::{Error, Result};
use crate::frame::{Frame, Sequence};

/// PSNR reported for frames with zero error.
pub const PSNR_CAP_DB: f64 = 100.0;

/// Peak sample value of 8-bit luma.
pub const PEAK: f64 = 255.0;

/// Divisor applied to the absolute-difference sum of an N×N block.
///
/// Costs are stored as integer sums; the divisor is only applied when a sum
/// is compared against a threshold or reported as a normalized SAD.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SadNorm {
    /// Divide by the block side N.
    #[default]
    BlockSide,
    /// Divide by the pixel count N².
    PixelCount,
    /// Plain sum.
    None,
}

impl SadNorm {
    pub fn divisor(self, block_size: usize) -> u64 {
        match self {
            SadNorm::BlockSide => block_size as u64,
            SadNorm::PixelCount => (block_size * block_size) as u64,
            SadNorm::None => 1,
        }
    }

    /// True when a raw sum, normalized, is strictly below `threshold`.
    pub fn below(self, sum: u32, threshold: f64, block_size: usize) -> bool {
        (sum as f64) < threshold * self.divisor(block_size) as f64
    }
}

/// Sum of absolute differences between two equally long sample runs.
#[inline]
pub fn sad_sum(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs())
        .sum()
}

/// Normalized SAD of two N×N blocks: the absolute-difference sum divided by N.
pub fn sad(a: &PixelBlock, b: &PixelBlock) -> Result<f64> {
    if a.size != b.size || a.samples.len() != b.samples.len() {
        return Err(Error::BlockSizeMismatch(a.samples.len(), b.samples.len()));
    }
    let sum = sad_sum(&a.samples, &b.samples);
    Ok(sum as f64 / SadNorm::BlockSide.divisor(a.size) as f64)
}

/// A displacement and its raw matching cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub mv: MotionVector,
    pub cost: u32,
}

impl Candidate {
    pub fn new(mv: MotionVector, cost: u32) -> Self {
        Candidate { mv, cost }
    }

    /// Lower cost wins; ties go to the smaller |dx|+|dy|, then to raster
    /// order of (dy, dx).
    fn key(&self) -> (u32, u32, i32, i32) {
        (self.cost, self.mv.l1(), self.mv.dy, self.mv.dx)
    }

    pub fn better_than(&self, other: &Candidate) -> bool {
        self.cmp(other) == Ordering::Less
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Memoizing cost oracle for one block's search.
///
/// Every distinct displacement is evaluated at most once; `evals` is the
/// number of distinct displacements evaluated so far.
#[derive(Debug)]
pub struct EvalCounter<'a> {
    anchor: &'a Frame,
    target: &'a Frame,
    origin: Origin,
    block_size: usize,
    bounds: DisplacementBounds,
    memo: HashMap<MotionVector, u32>,
    queries: u64,
}

impl<'a> EvalCounter<'a> {
    /// `anchor` is the reference frame searched over, `target` the frame
    /// whose block at `origin` is being matched.
    pub fn new(anchor: &'a Frame, target: &'a Frame, origin: Origin, block_size: usize) -> Result<Self> {
        if !anchor.same_dims(target) {
            return Err(Error::DimensionMismatch(format!(
                "anchor {}x{} vs target {}x{}",
                anchor.width(),
                anchor.height(),
                target.width(),
                target.height()
            )));
        }
        let bounds = DisplacementBounds::new(origin, block_size, anchor.width(), anchor.height());
        // the co-located block itself must be inside the frame
        if !bounds.contains(MotionVector::ZERO) {
            return Err(Error::OutOfBounds {
                x: origin.x as i64,
                y: origin.y as i64,
                size: block_size,
                width: anchor.width(),
                height: anchor.height(),
            });
        }
        Ok(EvalCounter {
            anchor,
            target,
            origin,
            block_size,
            bounds,
            memo: HashMap::new(),
            queries: 0,
        })
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn bounds(&self) -> DisplacementBounds {
        self.bounds
    }

    /// Raw absolute-difference sum between the target block at `origin` and
    /// the anchor block at `origin + d`.
    pub fn sad_at(&mut self, d: MotionVector) -> Result<u32> {
        self.queries += 1;
        if let Some(&cost) = self.memo.get(&d) {
            return Ok(cost);
        }
        let cur = block_rows(self.target, self.origin, MotionVector::ZERO, self.block_size)?;
        let reference = block_rows(self.anchor, self.origin, d, self.block_size)?;
        let cost = cur.zip(reference).map(|(a, b)| sad_sum(a, b)).sum();
        self.memo.insert(d, cost);
        Ok(cost)
    }

    pub fn candidate(&mut self, d: MotionVector) -> Result<Candidate> {
        Ok(Candidate::new(d, self.sad_at(d)?))
    }

    /// Number of distinct displacements evaluated.
    pub fn evals(&self) -> usize {
        self.memo.len()
    }

    /// Number of `sad_at` calls, including memo hits.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn cached(&self, d: MotionVector) -> Option<u32> {
        self.memo.get(&d).copied()
    }

    /// Best displacement evaluated so far under the shared tie-break order.
    pub fn best_evaluated(&self) -> Option<Candidate> {
        self.memo.iter().map(|(&mv, &cost)| Candidate::new(mv, cost)).min()
    }
}

/// Mean squared luma difference between two equally sized frames.
pub fn frame_mse(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sse: u64 = a
        .luma()
        .iter()
        .zip(b.luma())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sse as f64 / a.luma().len() as f64)
}

/// PSNR in dB for a given MSE, capped at [`PSNR_CAP_DB`].
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP_DB)
}

pub fn frame_psnr(original: &Frame, compensated: &Frame) -> Result<f64> {
    frame_mse(original, compensated).map(psnr_from_mse)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsnrReport {
    pub per_frame_db: Vec<f64>,
    pub mean_db: f64,
}

impl PsnrReport {
    pub fn from_frames(per_frame_db: Vec<f64>) -> Self {
        let mean_db = if per_frame_db.is_empty() {
            f64::NAN
        } else {
            per_frame_db.iter().sum::<f64>() / per_frame_db.len() as f64
        };
        PsnrReport {
            per_frame_db,
            mean_db,
        }
    }
}

/// Per-frame PSNR over `range`, averaged with equal weight per frame.
pub fn psnr(original: &Sequence, compensated: &Sequence, range: Range<usize>) -> Result<PsnrReport> {
    if range.end > original.len() || range.end > compensated.len() {
        return Err(Error::DimensionMismatch(format!(
            "frame range {range:?} exceeds sequence lengths {} / {}",
            original.len(),
            compensated.len()
        )));
    }
    let per_frame = range
        .map(|k| frame_psnr(&original.frames()[k], &compensated.frames()[k]))
        .collect::<Result<Vec<_>>>()?;
    Ok(PsnrReport::from_frames(per_frame))
}
