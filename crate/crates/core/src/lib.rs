//! Block-matching motion estimation.
//!
//! The crate provides a particle-swarm block matcher with zero-motion
//! prejudgment ([`pso_zmp`]) together with exhaustive, diamond and adaptive
//! rood pattern search baselines ([`estimators`]), the SAD/PSNR metrics they
//! are scored with, motion compensation, and a sequence benchmark harness.
//!
//! Frames are 8-bit luma planes. A motion vector `d` for the block at origin
//! `m` of the current frame points at the reference-frame block at `m + d`.

pub mod bench;
pub mod block;
pub mod compensation;
pub mod error;
pub mod estimators;
pub mod frame;
pub mod metrics;
pub mod mvf;
pub mod pso_zmp;
pub mod video_io;

pub use block::{BlockGrid, MotionVector, Origin};
pub use error::{Error, ErrorKind, Result};
pub use estimators::{estimate, Algorithm, EstimatorConfig, MotionField};
pub use frame::{Frame, Sequence};
pub use metrics::{EvalCounter, SadNorm};
pub use pso_zmp::PsoConfig;
