use crate::block::MotionVector;
use crate::error::Result;
use crate::metrics::EvalCounter;

use super::{probe, zero_motion_static, Algorithm, EstimatorConfig, SMALL_DIAMOND};
use crate::metrics::SadNorm;

/// Rood arm length used when no left neighbor exists.
const DEFAULT_ARM: i32 = 2;

/// Adaptive rood pattern search with zero-motion prejudgment.
///
/// The rood arm length follows the left neighbor's vector, which is also
/// probed directly; the search then refines with a unit rood until the best
/// point stays at the center. Returns the vector and whether the block was
/// declared static.
pub fn arps_search(
    counter: &mut EvalCounter<'_>,
    config: &EstimatorConfig,
    left_neighbor_mv: Option<MotionVector>,
) -> Result<(MotionVector, bool)> {
    let is_static = match config.arps_zmp_sum {
        Some(sum) => zero_motion_static(counter, sum, SadNorm::None)?,
        None => zero_motion_static(
            counter,
            config.require_threshold(Algorithm::AdaptiveRood)?,
            config.sad_norm,
        )?,
    };
    if is_static {
        return Ok((MotionVector::ZERO, true));
    }

    let arm = left_neighbor_mv.map_or(DEFAULT_ARM, |p| p.linf() as i32);
    let mut initial = vec![
        MotionVector::new(0, -arm),
        MotionVector::new(-arm, 0),
        MotionVector::new(arm, 0),
        MotionVector::new(0, arm),
    ];
    if let Some(p) = left_neighbor_mv {
        initial.push(p);
    }

    let mut best = counter.candidate(MotionVector::ZERO)?;
    best = probe(counter, config, best, MotionVector::ZERO, &initial)?;
    loop {
        let center = best.mv;
        best = probe(counter, config, best, center, &SMALL_DIAMOND)?;
        if best.mv == center {
            break;
        }
    }
    Ok((best.mv, false))
}
