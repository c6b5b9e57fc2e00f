use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{DualField, GridDims, Image};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn dims(r: usize, c: usize) -> GridDims {
    GridDims::new(r, c).unwrap()
}

pub(crate) fn random_image(d: GridDims, rng: &mut impl Rng) -> Image {
    Image::from_fn(d, |_, _| rng.gen_range(0.0..1.0))
}

pub(crate) fn random_field(d: GridDims, scale: f64, rng: &mut impl Rng) -> DualField {
    let v: Vec<f64> = (0..d.edge_count()).map(|_| rng.gen_range(-scale..scale)).collect();
    DualField::new(d, v).unwrap()
}

/// Piecewise-constant blocks plus uniform noise: a small denoising instance.
pub(crate) fn noisy_blocks(d: GridDims, seed: u64) -> Image {
    let mut r = rng(seed);
    Image::from_fn(d, |i, j| {
        let base = if (i * 4 / d.rows + j * 4 / d.cols) % 2 == 0 { 0.2 } else { 0.8 };
        base + r.gen_range(-0.3..0.3)
    })
}

pub(crate) fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum();
    libm::sqrt(num / den)
}
