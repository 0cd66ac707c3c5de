//! The common estimator contract and the baseline block matchers.
//!
//! Every estimator walks the block grid in raster order and returns a
//! [`MotionField`] holding one vector per block together with the number of
//! distinct cost evaluations the search spent on it.

mod arps;
mod ds;
mod es;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use arps::arps_search;
pub use ds::{ds_search, LARGE_DIAMOND, SMALL_DIAMOND};
pub use es::es_search;

use crate::block::{BlockGrid, MotionVector};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metrics::{Candidate, EvalCounter, SadNorm};
use crate::pso_zmp::{estimate_pso_zmp, PsoConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "es")]
    Exhaustive,
    #[serde(rename = "ds")]
    Diamond,
    #[serde(rename = "arps")]
    AdaptiveRood,
    #[serde(rename = "pso-zmp")]
    PsoZmp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Exhaustive,
        Algorithm::Diamond,
        Algorithm::AdaptiveRood,
        Algorithm::PsoZmp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "es",
            Algorithm::Diamond => "ds",
            Algorithm::AdaptiveRood => "arps",
            Algorithm::PsoZmp => "pso-zmp",
        }
    }

    /// Whether the algorithm reads `config.zmp_threshold`.
    pub fn needs_shared_threshold(self, config: &EstimatorConfig) -> bool {
        match self {
            Algorithm::Exhaustive => false,
            Algorithm::Diamond => config.ds_zmp,
            Algorithm::AdaptiveRood => config.arps_zmp_sum.is_none(),
            Algorithm::PsoZmp => true,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "es" | "fs" | "full" | "exhaustive" => Ok(Algorithm::Exhaustive),
            "ds" | "diamond" => Ok(Algorithm::Diamond),
            "arps" => Ok(Algorithm::AdaptiveRood),
            "pso-zmp" | "psozmp" | "pso_zmp" | "pso" => Ok(Algorithm::PsoZmp),
            _ => Err(Error::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub block_size: usize,
    /// Search window half-width for ES, DS and ARPS.
    pub search_range: i32,
    /// Zero-motion threshold, in normalized SAD units.
    pub zmp_threshold: Option<f64>,
    pub sad_norm: SadNorm,
    /// Run zero-motion prejudgment in front of DS as well.
    pub ds_zmp: bool,
    /// ARPS zero-motion threshold on the plain absolute-difference sum.
    /// `None` makes ARPS share `zmp_threshold` and `sad_norm` with PSO-ZMP.
    pub arps_zmp_sum: Option<f64>,
}

/// Zero-motion threshold of the original ARPS formulation (plain SAD sum of
/// a 16x16 block).
pub const ARPS_ZMP_SUM: f64 = 512.0;

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            block_size: 16,
            search_range: 7,
            zmp_threshold: None,
            sad_norm: SadNorm::BlockSide,
            ds_zmp: false,
            arps_zmp_sum: Some(ARPS_ZMP_SUM),
        }
    }
}

impl EstimatorConfig {
    pub fn with_threshold(mut self, delta: f64) -> Self {
        self.zmp_threshold = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < 2 {
            return Err(Error::Config(format!("block size must be >= 2, got {}", self.block_size)));
        }
        if self.search_range < 1 {
            return Err(Error::Config(format!("search range must be >= 1, got {}", self.search_range)));
        }
        for d in [self.zmp_threshold, self.arps_zmp_sum].into_iter().flatten() {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("ZMP threshold must be finite and >= 0, got {d}")));
            }
        }
        Ok(())
    }

    pub(crate) fn require_threshold(&self, algo: Algorithm) -> Result<f64> {
        self.zmp_threshold
            .ok_or_else(|| Error::Config(format!("{algo} needs a ZMP threshold")))
    }

    pub(crate) fn in_window(&self, d: MotionVector) -> bool {
        d.linf() <= self.search_range.unsigned_abs()
    }
}

/// Zero-motion prejudgment: evaluates the co-located block and reports
/// whether it is static (cost strictly below `threshold`).
pub(crate) fn zero_motion_static(
    counter: &mut EvalCounter<'_>,
    threshold: f64,
    norm: SadNorm,
) -> Result<bool> {
    let cost = counter.sad_at(MotionVector::ZERO)?;
    Ok(norm.below(cost, threshold, counter.block_size()))
}

/// Evaluates `center + offset` for each offset that is legal and inside the
/// window, returning the best of those and `best`.
pub(crate) fn probe(
    counter: &mut EvalCounter<'_>,
    config: &EstimatorConfig,
    mut best: Candidate,
    center: MotionVector,
    offsets: &[MotionVector],
) -> Result<Candidate> {
    let bounds = counter.bounds();
    for &off in offsets {
        let p = center + off;
        if !bounds.contains(p) || !config.in_window(p) {
            continue;
        }
        let c = counter.candidate(p)?;
        if c.better_than(&best) {
            best = c;
        }
    }
    Ok(best)
}

/// Per-block motion vectors and search statistics for one frame pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotionField {
    cols: usize,
    rows: usize,
    block_size: usize,
    vectors: Vec<MotionVector>,
    evals: Vec<u32>,
    static_flags: Vec<bool>,
}

impl MotionField {
    pub fn new(cols: usize, rows: usize, block_size: usize) -> Self {
        let n = cols * rows;
        MotionField {
            cols,
            rows,
            block_size,
            vectors: vec![MotionVector::ZERO; n],
            evals: vec![0; n],
            static_flags: vec![false; n],
        }
    }

    pub fn for_grid(grid: &BlockGrid) -> Self {
        MotionField::new(grid.cols(), grid.rows(), grid.block_size())
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    pub fn evals(&self) -> &[u32] {
        &self.evals
    }

    pub fn static_flags(&self) -> &[bool] {
        &self.static_flags
    }

    pub fn set(&mut self, index: usize, mv: MotionVector, evals: u32, is_static: bool) {
        self.vectors[index] = mv;
        self.evals[index] = evals;
        self.static_flags[index] = is_static;
    }

    pub fn set_vector(&mut self, index: usize, mv: MotionVector) {
        self.vectors[index] = mv;
    }

    pub fn total_evals(&self) -> u64 {
        self.evals.iter().map(|&e| e as u64).sum()
    }

    /// Mean number of cost evaluations per motion vector.
    pub fn avg_evals(&self) -> f64 {
        self.total_evals() as f64 / self.len() as f64
    }

    pub fn static_fraction(&self) -> f64 {
        self.static_flags.iter().filter(|&&s| s).count() as f64 / self.len() as f64
    }

    pub fn matches_grid(&self, grid: &BlockGrid) -> bool {
        self.cols == grid.cols() && self.rows == grid.rows() && self.block_size == grid.block_size()
    }
}

/// Estimates one motion field from `anchor` (reference) to `target`.
///
/// `seed` only affects PSO-ZMP.
pub fn estimate(
    algorithm: Algorithm,
    anchor: &Frame,
    target: &Frame,
    config: &EstimatorConfig,
    pso: &PsoConfig,
    seed: u64,
) -> Result<MotionField> {
    config.validate()?;
    if !anchor.same_dims(target) {
        return Err(Error::DimensionMismatch(format!(
            "anchor {}x{} vs target {}x{}",
            anchor.width(),
            anchor.height(),
            target.width(),
            target.height()
        )));
    }
    let grid = BlockGrid::for_frame(anchor, config.block_size)?;
    if algorithm == Algorithm::PsoZmp {
        return estimate_pso_zmp(anchor, target, config, pso, &grid, seed);
    }

    let mut field = MotionField::for_grid(&grid);
    for (index, origin) in grid.origins().enumerate() {
        let mut counter = EvalCounter::new(anchor, target, origin, config.block_size)?;
        let mut is_static = false;
        let mv = match algorithm {
            Algorithm::Exhaustive => es_search(&mut counter, config)?,
            Algorithm::Diamond => {
                if config.ds_zmp
                    && zero_motion_static(
                        &mut counter,
                        config.require_threshold(algorithm)?,
                        config.sad_norm,
                    )?
                {
                    is_static = true;
                    MotionVector::ZERO
                } else {
                    ds_search(&mut counter, config)?
                }
            }
            Algorithm::AdaptiveRood => {
                let left = (index % grid.cols() != 0).then(|| field.vectors[index - 1]);
                let (mv, s) = arps_search(&mut counter, config, left)?;
                is_static = s;
                mv
            }
            Algorithm::PsoZmp => unreachable!(),
        };
        field.set(index, mv, counter.evals() as u32, is_static);
    }
    Ok(field)
}
