//! Seeded additive Gaussian noise.
//!
//! Generator: ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Each uniform is `(next_u64() >> 11) * 2^-53` in
//! `[0, 1)`. Normals come in pairs from the Box-Muller transform
//!
//! ```text
//! r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
//! ```
//!
//! consumed in the order `z0, z1` and assigned to pixels in row-major order.
//! Noise is added without clamping.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rofdd_core::Image;

/// Standard normal samples from the documented generator.
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if let Some(z) = self.spare.take() {
            return Some(z);
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * angle.sin());
        Some(r * angle.cos())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("noise variance must be finite and nonnegative, got {0}")]
pub struct NegativeVariance(pub f64);

/// `f + mean + sqrt(variance) * z` with `z` from [`NormalStream`].
pub fn add_gaussian_noise(f: &Image, mean: f64, variance: f64, seed: u64) -> Result<Image, NegativeVariance> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(NegativeVariance(variance));
    }
    let std = variance.sqrt();
    let mut out = f.clone();
    for (v, z) in out.values_mut().iter_mut().zip(NormalStream::new(seed)) {
        *v += mean + std * z;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rofdd_core::GridDims;

    #[test]
    fn pinned_samples() {
        let got: Vec<f64> = NormalStream::new(2024).take(8).collect();
        for (g, p) in got.iter().zip(PINNED) {
            assert_eq!(g.to_bits(), p.to_bits(), "{got:?}");
        }
    }

    // first eight normals for seed 2024, from an independent implementation
    // of the generator described in the module docs
    const PINNED: [f64; 8] = [
        1.0802812972309104,
        -1.8066885238948334,
        0.6924991793505223,
        1.4132522877839973,
        -0.24759240304888686,
        -2.4938105349969226,
        -0.25095659747563664,
        -0.05954659510175102,
    ];

    #[test]
    fn zero_variance_is_identity() {
        let f = Image::from_fn(GridDims::new(5, 4).unwrap(), |i, j| (i * j) as f64 * 0.05);
        assert_eq!(add_gaussian_noise(&f, 0.0, 0.0, 9).unwrap(), f);
        assert!(add_gaussian_noise(&f, 0.0, -1.0, 9).is_err());
    }

    #[test]
    fn same_seed_same_output() {
        let f = Image::constant(GridDims::new(16, 16).unwrap(), 0.5);
        let a = add_gaussian_noise(&f, 0.0, 0.05, 3).unwrap();
        assert_eq!(a, add_gaussian_noise(&f, 0.0, 0.05, 3).unwrap());
        assert_ne!(a, add_gaussian_noise(&f, 0.0, 0.05, 4).unwrap());
    }

    #[test]
    fn sample_moments() {
        let f = Image::zeros(GridDims::new(512, 512).unwrap());
        let (mut mean_acc, mut var_acc) = (0.0, 0.0);
        let seeds = [1u64, 2, 3, 4];
        for &seed in &seeds {
            let n = add_gaussian_noise(&f, 0.0, 0.05, seed).unwrap();
            let v = n.values();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
            assert!(m.abs() < 0.002 && (var - 0.05).abs() < 0.002, "seed {seed}: {m} {var}");
            mean_acc += m;
            var_acc += var;
        }
        let k = seeds.len() as f64;
        assert!((mean_acc / k).abs() < 0.002);
        assert!((var_acc / k - 0.05).abs() < 0.002);
    }
}
