#![allow(dead_code)]

use mebench_core::Frame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Aperiodic smooth texture: bilinear value noise on two lattice scales.
pub struct Texture {
    coarse: Vec<f64>,
    fine: Vec<f64>,
    span: usize,
}

const COARSE: usize = 9;
const FINE: usize = 4;

impl Texture {
    pub fn new(seed: u64, span: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cn = span / COARSE + 2;
        let fnn = span / FINE + 2;
        Texture {
            coarse: (0..cn * cn).map(|_| rng.random_range(0.0..1.0)).collect(),
            fine: (0..fnn * fnn).map(|_| rng.random_range(0.0..1.0)).collect(),
            span,
        }
    }

    fn lerp_grid(grid: &[f64], cell: usize, x: f64, y: f64) -> f64 {
        let n = (grid.len() as f64).sqrt() as usize;
        let (gx, gy) = (x / cell as f64, y / cell as f64);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let (fx, fy) = (gx - ix as f64, gy - iy as f64);
        let at = |i: usize, j: usize| grid[j.min(n - 1) * n + i.min(n - 1)];
        let top = at(ix, iy) * (1.0 - fx) + at(ix + 1, iy) * fx;
        let bottom = at(ix, iy + 1) * (1.0 - fx) + at(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn sample(&self, x: usize, y: usize) -> u8 {
        assert!(x < self.span && y < self.span);
        let (xf, yf) = (x as f64, y as f64);
        let v = 150.0 * Self::lerp_grid(&self.coarse, COARSE, xf, yf)
            + 100.0 * Self::lerp_grid(&self.fine, FINE, xf, yf);
        v.clamp(0.0, 255.0) as u8
    }
}

/// An anchor/target pair where target(x, y) = anchor(x + dx, y + dy).
pub fn shifted_pair(tex: &Texture, w: usize, h: usize, dx: i32, dy: i32) -> (Frame, Frame) {
    const PAD: i32 = 8;
    let anchor = Frame::from_fn(w, h, |x, y| tex.sample(x + PAD as usize, y + PAD as usize)).unwrap();
    let target = Frame::from_fn(w, h, |x, y| {
        tex.sample((x as i32 + PAD + dx) as usize, (y as i32 + PAD + dy) as usize)
    })
    .unwrap();
    (anchor, target)
}

/// Noisy pair with independently shifted rectangular regions.
pub fn piecewise_pair(seed: u64, w: usize, h: usize) -> (Frame, Frame) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tex = Texture::new(seed ^ 0x5eed, w.max(h) + 32);
    const PAD: i32 = 12;
    let anchor = Frame::from_fn(w, h, |x, y| tex.sample(x + PAD as usize, y + PAD as usize)).unwrap();

    // split into a 2x2 arrangement at a random cut with its own shift each
    let cx = rng.random_range(w / 4..3 * w / 4);
    let cy = rng.random_range(h / 4..3 * h / 4);
    let shifts: Vec<(i32, i32)> = (0..4)
        .map(|_| (rng.random_range(-6..=6), rng.random_range(-6..=6)))
        .collect();
    let mut luma = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let region = (x >= cx) as usize + 2 * (y >= cy) as usize;
            let (dx, dy) = shifts[region];
            let v = tex.sample((x as i32 + PAD + dx) as usize, (y as i32 + PAD + dy) as usize) as i32;
            let noise = rng.random_range(-4..=4);
            luma.push((v + noise).clamp(0, 255) as u8);
        }
    }
    (anchor, Frame::new(w, h, luma).unwrap())
}
