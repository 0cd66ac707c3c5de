use crate::block::MotionVector;
use crate::error::Result;
use crate::metrics::{Candidate, EvalCounter};

use super::EstimatorConfig;

/// Full search over every legal displacement with |dx|, |dy| <= P.
pub fn es_search(counter: &mut EvalCounter<'_>, config: &EstimatorConfig) -> Result<MotionVector> {
    let p = config.search_range;
    let bounds = counter.bounds();
    let mut best: Option<Candidate> = None;
    for dy in (-p).max(bounds.min_dy)..=p.min(bounds.max_dy) {
        for dx in (-p).max(bounds.min_dx)..=p.min(bounds.max_dx) {
            let c = counter.candidate(MotionVector::new(dx, dy))?;
            if best.is_none_or(|b| c.better_than(&b)) {
                best = Some(c);
            }
        }
    }
    // (0, 0) is always legal, so the window is never empty
    Ok(best.map_or(MotionVector::ZERO, |c| c.mv))
}
