//! Image quality metrics.

use rofdd_core::Image;

/// Mean squared error; panics on mismatched dimensions.
pub fn mse(u: &Image, reference: &Image) -> f64 {
    assert_eq!(u.dims(), reference.dims(), "image dims differ");
    let n = u.values().len() as f64;
    u.values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

/// `10 log10(max_val^2 |Omega| / |u - reference|^2)` in dB.
///
/// Identical images give `f64::INFINITY`.
pub fn psnr(u: &Image, reference: &Image, max_val: f64) -> f64 {
    let e = mse(u, reference);
    if e == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (max_val * max_val / e).log10()
}
