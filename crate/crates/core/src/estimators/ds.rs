use crate::block::MotionVector;
use crate::error::Result;
use crate::metrics::EvalCounter;

use super::{probe, EstimatorConfig};

const fn mv(dx: i32, dy: i32) -> MotionVector {
    MotionVector::new(dx, dy)
}

/// Large diamond search pattern without its center.
pub const LARGE_DIAMOND: [MotionVector; 8] = [
    mv(0, -2),
    mv(-1, -1),
    mv(1, -1),
    mv(-2, 0),
    mv(2, 0),
    mv(-1, 1),
    mv(1, 1),
    mv(0, 2),
];

/// Small diamond search pattern without its center.
pub const SMALL_DIAMOND: [MotionVector; 4] = [mv(0, -1), mv(-1, 0), mv(1, 0), mv(0, 1)];

/// Diamond search: repeat the large diamond until its best point is the
/// center, then finish with one small diamond around it.
pub fn ds_search(counter: &mut EvalCounter<'_>, config: &EstimatorConfig) -> Result<MotionVector> {
    let mut best = counter.candidate(MotionVector::ZERO)?;
    loop {
        let center = best.mv;
        best = probe(counter, config, best, center, &LARGE_DIAMOND)?;
        if best.mv == center {
            break;
        }
    }
    let center = best.mv;
    best = probe(counter, config, best, center, &SMALL_DIAMOND)?;
    Ok(best.mv)
}
