//! Particle-swarm block matching with zero-motion prejudgment.
//!
//! Per block, in raster order:
//!
//! 1. The co-located block is scored; a cost strictly below the threshold
//!    marks the block static with a zero vector and ends its search.
//! 2. An initialization pattern is chosen from the block's position. Blocks
//!    off the left column are centered on the left neighbor's vector, which
//!    is also scored as a global-best candidate.
//! 3. A fixed number of inertia-weighted PSO iterations refine the swarm.
//!
//! Particle state is continuous. Positions are clamped to the legal
//! displacement rectangle after every move and rounded half away from zero
//! only when a cost is looked up.
//!
//! Randomness comes from one `ChaCha8Rng` stream per frame pair. Each
//! iteration consumes four uniform draws per particle, in particle order:
//! `r1` and `r2` for x, then `r1` and `r2` for y.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{BlockGrid, DisplacementBounds, MotionVector};
use crate::error::{Error, Result};
use crate::estimators::{Algorithm, EstimatorConfig, MotionField};
use crate::frame::Frame;
use crate::metrics::{Candidate, EvalCounter, SadNorm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub seed: u64,
    /// Score the predicted vector as a global-best candidate (pattern A).
    pub seed_candidate: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            particles: 8,
            iterations: 5,
            w_start: 0.9,
            w_end: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_max: 5.0,
            seed: 0,
            seed_candidate: true,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::Config("PSO needs at least one particle".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("PSO needs at least one iteration".into()));
        }
        if !(0.0 <= self.w_end && self.w_end <= self.w_start) {
            return Err(Error::Config(format!(
                "inertia must satisfy 0 <= w_end <= w_start, got {} -> {}",
                self.w_start, self.w_end
            )));
        }
        if self.v_max.is_nan() || self.v_max <= 0.0 {
            return Err(Error::Config(format!("v_max must be positive, got {}", self.v_max)));
        }
        Ok(())
    }

    /// Inertia weight of iteration `t` (0-based), linear from `w_start` at
    /// the first iteration to `w_end` at the last.
    pub fn inertia(&self, t: usize) -> f64 {
        if self.iterations <= 1 {
            return self.w_start;
        }
        let s = t as f64 / (self.iterations - 1) as f64;
        self.w_start * (1.0 - s) + self.w_end * s
    }
}

/// Swarm initialization layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InitPattern {
    /// Unit rood plus diagonal rood around the predicted vector.
    A,
    /// Top-left block: fans out down and right.
    B,
    /// Bottom-left block: fans out up and right.
    C,
    /// Other left-column blocks: right half-plane plus vertical arm.
    D,
}

impl fmt::Display for InitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InitPattern::A => "A",
            InitPattern::B => "B",
            InitPattern::C => "C",
            InitPattern::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for InitPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(InitPattern::A),
            "B" | "b" => Ok(InitPattern::B),
            "C" | "c" => Ok(InitPattern::C),
            "D" | "d" => Ok(InitPattern::D),
            other => Err(Error::UnknownPattern(other.to_string())),
        }
    }
}

const fn mv(dx: i32, dy: i32) -> MotionVector {
    MotionVector::new(dx, dy)
}

const PATTERN_A: [MotionVector; 8] = [
    mv(0, -1),
    mv(-1, 0),
    mv(1, 0),
    mv(0, 1),
    mv(-1, -1),
    mv(1, -1),
    mv(-1, 1),
    mv(1, 1),
];

const PATTERN_B: [MotionVector; 8] = [
    mv(0, 1),
    mv(1, 0),
    mv(1, 1),
    mv(2, 0),
    mv(0, 2),
    mv(2, 1),
    mv(1, 2),
    mv(2, 2),
];

const PATTERN_C: [MotionVector; 8] = [
    mv(0, -1),
    mv(1, 0),
    mv(1, -1),
    mv(2, 0),
    mv(0, -2),
    mv(2, -1),
    mv(1, -2),
    mv(2, -2),
];

const PATTERN_D: [MotionVector; 8] = [
    mv(0, -1),
    mv(0, 1),
    mv(0, -2),
    mv(0, 2),
    mv(1, 0),
    mv(2, 0),
    mv(1, 1),
    mv(1, -1),
];

/// Initial particle positions (before clamping) for `kind` around `center`.
pub fn init_pattern(kind: InitPattern, center: MotionVector) -> [MotionVector; 8] {
    let offsets = match kind {
        InitPattern::A => &PATTERN_A,
        InitPattern::B => &PATTERN_B,
        InitPattern::C => &PATTERN_C,
        InitPattern::D => &PATTERN_D,
    };
    offsets.map(|o| center + o)
}

pub fn select_pattern(block_index: usize, grid: &BlockGrid) -> InitPattern {
    let cols = grid.cols();
    if block_index == 0 {
        InitPattern::B
    } else if !block_index.is_multiple_of(cols) {
        InitPattern::A
    } else if block_index == (grid.rows() - 1) * cols {
        InitPattern::C
    } else {
        InitPattern::D
    }
}

/// Region-of-support prediction using only the block immediately to the
/// left. Left-column blocks have no predictor.
pub fn predict_mv_ros_d(field_so_far: &MotionField, block_index: usize) -> Option<MotionVector> {
    if block_index.is_multiple_of(field_so_far.cols()) {
        None
    } else {
        Some(field_so_far.vectors()[block_index - 1])
    }
}

/// Scores the zero displacement; returns it if the block counts as static.
pub fn zmp_check(counter: &mut EvalCounter<'_>, threshold: f64, norm: SadNorm) -> Result<Option<MotionVector>> {
    let cost = counter.sad_at(MotionVector::ZERO)?;
    Ok(norm
        .below(cost, threshold, counter.block_size())
        .then_some(MotionVector::ZERO))
}

fn lattice(x: f64, y: f64) -> MotionVector {
    MotionVector::new(x.round() as i32, y.round() as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: (f64, f64),
    pub velocity: (f64, f64),
    pub best: Candidate,
}

/// Swarm state for one block's search.
#[derive(Clone, Debug)]
pub struct Swarm {
    particles: Vec<Particle>,
    global_best: Candidate,
    bounds: DisplacementBounds,
}

impl Swarm {
    /// Places particle `i` at `positions[i % positions.len()]` (clamped) with
    /// zero velocity and scores it. The global best also covers
    /// `seed_candidate` and anything `counter` already evaluated.
    pub fn initialize(
        counter: &mut EvalCounter<'_>,
        positions: &[MotionVector],
        seed_candidate: Option<MotionVector>,
        particles: usize,
    ) -> Result<Swarm> {
        if positions.is_empty() {
            return Err(Error::Config("swarm needs at least one initial position".into()));
        }
        let bounds = counter.bounds();
        let mut global_best = counter.best_evaluated();
        let consider = |c: Candidate, gb: &mut Option<Candidate>| {
            if gb.is_none_or(|g| c.better_than(&g)) {
                *gb = Some(c);
            }
        };

        if let Some(s) = seed_candidate {
            let c = counter.candidate(bounds.clamp(s))?;
            consider(c, &mut global_best);
        }

        let mut swarm = Vec::with_capacity(particles);
        for i in 0..particles {
            let p = bounds.clamp(positions[i % positions.len()]);
            let c = counter.candidate(p)?;
            swarm.push(Particle {
                position: (p.dx as f64, p.dy as f64),
                velocity: (0.0, 0.0),
                best: c,
            });
        }
        for p in &swarm {
            consider(p.best, &mut global_best);
        }

        Ok(Swarm {
            particles: swarm,
            // at least one particle was scored above
            global_best: global_best.expect("non-empty swarm"),
            bounds,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn global_best(&self) -> Candidate {
        self.global_best
    }

    /// One synchronous iteration: every particle moves using the global best
    /// from the previous iteration, is scored, and only then is the global
    /// best refreshed.
    pub fn step<R: Rng>(
        &mut self,
        t: usize,
        counter: &mut EvalCounter<'_>,
        config: &PsoConfig,
        rng: &mut R,
    ) -> Result<()> {
        let w = config.inertia(t);
        let vmax = config.v_max;
        let g = self.global_best.mv;
        let (gx, gy) = (g.dx as f64, g.dy as f64);

        for p in &mut self.particles {
            let (r1x, r2x, r1y, r2y): (f64, f64, f64, f64) =
                (rng.random(), rng.random(), rng.random(), rng.random());
            let (x, y) = p.position;
            let (bx, by) = (p.best.mv.dx as f64, p.best.mv.dy as f64);

            let vx = w * p.velocity.0 + config.c1 * r1x * (bx - x) + config.c2 * r2x * (gx - x);
            let vy = w * p.velocity.1 + config.c1 * r1y * (by - y) + config.c2 * r2y * (gy - y);
            p.velocity = (vx.clamp(-vmax, vmax), vy.clamp(-vmax, vmax));
            p.position = self.bounds.clamp_f64(x + p.velocity.0, y + p.velocity.1);

            let c = counter.candidate(lattice(p.position.0, p.position.1))?;
            if c.better_than(&p.best) {
                p.best = c;
            }
        }

        for p in &self.particles {
            if p.best.better_than(&self.global_best) {
                self.global_best = p.best;
            }
        }
        Ok(())
    }
}

/// Runs a fixed-iteration PSO from `pattern_positions` and returns the best
/// displacement found.
pub fn pso_match<R: Rng>(
    counter: &mut EvalCounter<'_>,
    pattern_positions: &[MotionVector],
    seed_candidate: Option<MotionVector>,
    config: &PsoConfig,
    rng: &mut R,
) -> Result<MotionVector> {
    let mut swarm = Swarm::initialize(counter, pattern_positions, seed_candidate, config.particles)?;
    for t in 0..config.iterations {
        swarm.step(t, counter, config, rng)?;
    }
    Ok(swarm.global_best().mv)
}

/// Full per-frame PSO-ZMP estimation. `seed` initializes the RNG stream
/// shared by all blocks of this frame pair.
pub fn estimate_pso_zmp(
    anchor: &Frame,
    target: &Frame,
    config: &EstimatorConfig,
    pso: &PsoConfig,
    grid: &BlockGrid,
    seed: u64,
) -> Result<MotionField> {
    pso.validate()?;
    let threshold = config.require_threshold(Algorithm::PsoZmp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = MotionField::for_grid(grid);

    for (index, origin) in grid.origins().enumerate() {
        let mut counter = EvalCounter::new(anchor, target, origin, grid.block_size())?;
        if let Some(zero) = zmp_check(&mut counter, threshold, config.sad_norm)? {
            field.set(index, zero, counter.evals() as u32, true);
            continue;
        }

        let kind = select_pattern(index, grid);
        let (center, seed_candidate) = match kind {
            InitPattern::A => {
                let pred = predict_mv_ros_d(&field, index).unwrap_or(MotionVector::ZERO);
                (pred, pso.seed_candidate.then_some(pred))
            }
            _ => (MotionVector::ZERO, None),
        };
        let positions = init_pattern(kind, center);
        let mv = pso_match(&mut counter, &positions, seed_candidate, pso, &mut rng)?;
        field.set(index, mv, counter.evals() as u32, false);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::Origin;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn smooth(x: usize, y: usize) -> u8 {
        let (x, y) = (x as f64, y as f64);
        (128.0 + 60.0 * (x / 9.0).sin() * (y / 11.0).cos() + 40.0 * ((x + 2.0 * y) / 17.0).sin()) as u8
    }

    fn qcif_grid() -> BlockGrid {
        BlockGrid::new(176, 144, 16).unwrap()
    }

    #[test]
    fn default_parameters() {
        let c = PsoConfig::default();
        assert_eq!((c.particles, c.iterations), (8, 5));
        assert_eq!((c.w_start, c.w_end, c.c1, c.c2, c.v_max), (0.9, 0.4, 2.0, 2.0, 5.0));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn inertia_schedule_endpoints() {
        let c = PsoConfig::default();
        assert_eq!(c.inertia(0), 0.9);
        assert_eq!(c.inertia(4), 0.4);
        let ws: Vec<f64> = (0..5).map(|t| c.inertia(t)).collect();
        for pair in ws.windows(2) {
            assert!(pair[1] < pair[0]);
            assert!(((pair[0] - pair[1]) - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_configs() {
        let base = PsoConfig::default();
        for bad in [
            PsoConfig { particles: 0, ..base.clone() },
            PsoConfig { iterations: 0, ..base.clone() },
            PsoConfig { w_end: 0.95, ..base.clone() },
            PsoConfig { v_max: 0.0, ..base.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn pattern_a_is_unit_ring() {
        let ring: HashSet<MotionVector> = init_pattern(InitPattern::A, MotionVector::ZERO).into_iter().collect();
        let mut expected = HashSet::new();
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy) != (0, 0) {
                    expected.insert(MotionVector::new(dx, dy));
                }
            }
        }
        assert_eq!(ring, expected);
        let shifted = init_pattern(InitPattern::A, MotionVector::new(3, 2));
        for (a, b) in shifted.iter().zip(init_pattern(InitPattern::A, MotionVector::ZERO)) {
            assert_eq!(*a, b + MotionVector::new(3, 2));
        }
    }

    #[test]
    fn every_pattern_has_eight_distinct_points() {
        for k in ["A", "B", "C", "D"] {
            let kind: InitPattern = k.parse().unwrap();
            let pts: HashSet<_> = init_pattern(kind, MotionVector::ZERO).into_iter().collect();
            assert_eq!(pts.len(), 8, "pattern {kind}");
            assert!(!pts.contains(&MotionVector::ZERO));
        }
        assert!(matches!("E".parse::<InitPattern>(), Err(Error::UnknownPattern(_))));
    }

    #[test]
    fn corner_patterns_are_legal_where_used() {
        let g = qcif_grid();
        let top_left = g.bounds(g.block_origin(0).unwrap());
        assert!(init_pattern(InitPattern::B, MotionVector::ZERO).iter().all(|&p| top_left.contains(p)));
        let bottom_left = g.bounds(g.block_origin(88).unwrap());
        assert!(init_pattern(InitPattern::C, MotionVector::ZERO).iter().all(|&p| bottom_left.contains(p)));
    }

    #[test]
    fn pattern_selection_on_qcif() {
        let g = qcif_grid();
        assert_eq!(select_pattern(0, &g), InitPattern::B);
        assert_eq!(select_pattern(88, &g), InitPattern::C);
        assert_eq!(select_pattern(44, &g), InitPattern::D);
        assert_eq!(select_pattern(45, &g), InitPattern::A);
        assert_eq!(select_pattern(11, &g), InitPattern::D);
        assert_eq!(select_pattern(98, &g), InitPattern::A);
        // enumerate: exactly one B, one C, rows-2 D
        let kinds: Vec<_> = (0..g.len()).map(|i| select_pattern(i, &g)).collect();
        assert_eq!(kinds.iter().filter(|&&k| k == InitPattern::B).count(), 1);
        assert_eq!(kinds.iter().filter(|&&k| k == InitPattern::C).count(), 1);
        assert_eq!(kinds.iter().filter(|&&k| k == InitPattern::D).count(), 7);
    }

    #[test]
    fn ros_d_prediction() {
        let mut field = MotionField::new(11, 9, 16);
        field.set(44, MotionVector::new(2, -1), 10, false);
        assert_eq!(predict_mv_ros_d(&field, 0), None);
        assert_eq!(predict_mv_ros_d(&field, 44), None);
        assert_eq!(predict_mv_ros_d(&field, 45), Some(MotionVector::new(2, -1)));
    }

    #[test]
    fn zmp_strict_threshold() {
        let f = Frame::filled(32, 32, 10).unwrap();
        let mut c = EvalCounter::new(&f, &f, Origin::new(0, 0), 16).unwrap();
        assert_eq!(zmp_check(&mut c, 384.0, SadNorm::BlockSide).unwrap(), Some(MotionVector::ZERO));
        assert_eq!(c.evals(), 1);

        // co-located cost exactly at the threshold: 16 * 16 pixels off by 24
        // sum 6144, normalized 6144 / 16 = 384
        let g = Frame::filled(32, 32, 34).unwrap();
        let mut c = EvalCounter::new(&f, &g, Origin::new(0, 0), 16).unwrap();
        assert_eq!(zmp_check(&mut c, 384.0, SadNorm::BlockSide).unwrap(), None);
        assert_eq!(c.cached(MotionVector::ZERO), Some(6144));
    }

    #[test]
    fn finds_zero_cost_point_among_pattern() {
        let anchor = Frame::from_fn(96, 96, |x, y| smooth(x + 8, y + 8)).unwrap();
        let target = Frame::from_fn(96, 96, |x, y| smooth(x + 9, y + 9)).unwrap();
        let mut c = EvalCounter::new(&anchor, &target, Origin::new(32, 32), 16).unwrap();
        let positions = init_pattern(InitPattern::A, MotionVector::ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = pso_match(&mut c, &positions, None, &PsoConfig::default(), &mut rng).unwrap();
        assert_eq!(v, MotionVector::new(1, 1));
    }

    #[test]
    fn degenerate_swarm_only_scores_pattern() {
        let anchor = Frame::from_fn(96, 96, |x, y| smooth(x + 8, y + 8)).unwrap();
        let target = Frame::from_fn(96, 96, |x, y| smooth(x + 12, y + 5)).unwrap();
        let cfg = PsoConfig {
            c1: 0.0,
            c2: 0.0,
            w_start: 0.0,
            w_end: 0.0,
            ..PsoConfig::default()
        };
        let positions = init_pattern(InitPattern::A, MotionVector::new(2, 2));
        let seed = MotionVector::new(-3, 0);

        let mut c = EvalCounter::new(&anchor, &target, Origin::new(32, 32), 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = pso_match(&mut c, &positions, Some(seed), &cfg, &mut rng).unwrap();
        assert_eq!(c.evals(), 9);

        // oracle: score the 8 pattern points and the seed independently
        let mut oracle = EvalCounter::new(&anchor, &target, Origin::new(32, 32), 16).unwrap();
        let best = positions
            .iter()
            .chain(std::iter::once(&seed))
            .map(|&p| oracle.candidate(p).unwrap())
            .min()
            .unwrap();
        assert_eq!(v, best.mv);
    }

    #[test]
    fn block_search_is_deterministic() {
        let anchor = Frame::from_fn(96, 96, |x, y| smooth(x + 8, y + 8)).unwrap();
        let target = Frame::from_fn(96, 96, |x, y| smooth(x + 11, y + 6)).unwrap();
        let run = || {
            let mut c = EvalCounter::new(&anchor, &target, Origin::new(32, 32), 16).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let positions = init_pattern(InitPattern::A, MotionVector::ZERO);
            let v = pso_match(&mut c, &positions, Some(MotionVector::ZERO), &PsoConfig::default(), &mut rng)
                .unwrap();
            (v, c.evals())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn saturated_frames_never_static() {
        let anchor = Frame::filled(64, 48, 0).unwrap();
        let target = Frame::filled(64, 48, 255).unwrap();
        let grid = BlockGrid::for_frame(&anchor, 16).unwrap();
        let cfg = EstimatorConfig::default().with_threshold(384.0);
        let field = estimate_pso_zmp(&anchor, &target, &cfg, &PsoConfig::default(), &grid, 0).unwrap();
        assert!(field.static_flags().iter().all(|&s| !s));
        assert!(field.evals().iter().all(|&e| e > 1));
    }

    #[test]
    fn identical_frames_all_static() {
        let f = Frame::from_fn(176, 144, smooth).unwrap();
        let grid = BlockGrid::for_frame(&f, 16).unwrap();
        let cfg = EstimatorConfig::default().with_threshold(384.0);
        let field = estimate_pso_zmp(&f, &f, &cfg, &PsoConfig::default(), &grid, 9).unwrap();
        assert!(field.static_flags().iter().all(|&s| s));
        assert!(field.evals().iter().all(|&e| e == 1));
        assert!(field.vectors().iter().all(|&v| v == MotionVector::ZERO));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn swarm_invariants_hold(
            seed in any::<u64>(),
            sx in 0usize..40,
            sy in 0usize..40,
            cx in -3i32..=3,
            cy in -3i32..=3,
            bx in 0usize..4,
            by in 0usize..4,
        ) {
            let anchor = Frame::from_fn(64, 64, |x, y| smooth(x + 20, y + 20)).unwrap();
            let target = Frame::from_fn(64, 64, |x, y| smooth(x + sx, y + sy)).unwrap();
            let origin = Origin::new(bx * 16, by * 16);
            let cfg = PsoConfig::default();
            let mut c = EvalCounter::new(&anchor, &target, origin, 16).unwrap();
            let zero_cost = c.sad_at(MotionVector::ZERO).unwrap();
            let pred = MotionVector::new(cx, cy);
            let positions = init_pattern(InitPattern::A, pred);
            let mut swarm = Swarm::initialize(&mut c, &positions, Some(pred), cfg.particles).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last = swarm.global_best();
            for t in 0..cfg.iterations {
                swarm.step(t, &mut c, &cfg, &mut rng).unwrap();
                for p in swarm.particles() {
                    prop_assert!(p.velocity.0.abs() <= cfg.v_max && p.velocity.1.abs() <= cfg.v_max);
                    prop_assert!(c.bounds().contains(lattice(p.position.0, p.position.1)));
                }
                let gb = swarm.global_best();
                prop_assert!(gb.cost <= last.cost);
                last = gb;
            }
            let best = swarm.global_best();
            prop_assert!(best.cost <= zero_cost);
            prop_assert_eq!(Some(best), c.best_evaluated());
            // 1 zero point + 1 seed + 8 pattern + 8 per iteration
            prop_assert!(c.evals() <= 1 + 1 + 8 + 8 * cfg.iterations);
        }
    }
}
