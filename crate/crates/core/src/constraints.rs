//! Pointwise feasible sets for the dual variable and their projections.

use crate::error::{invalid, Error};
use crate::mesh::{DualField, GridDims, Patch};

/// Exponent of the discrete total variation.
///
/// `One` bounds every dof by 1 (anisotropic TV); `Two` bounds the Euclidean
/// norm of the pair of dofs anchored at each pixel (isotropic TV).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PNorm {
    #[default]
    One,
    Two,
}

impl TryFrom<u32> for PNorm {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self, Error> {
        match p {
            1 => Ok(PNorm::One),
            2 => Ok(PNorm::Two),
            _ => Err(invalid("pnorm", "only 1 and 2 are supported")),
        }
    }
}

impl PNorm {
    pub fn as_u32(self) -> u32 {
        match self {
            PNorm::One => 1,
            PNorm::Two => 2,
        }
    }
}

// Pairs whose computed norm is within a few ulps of 1 are left alone, which
// keeps the isotropic projection exactly idempotent.
const PAIR_SLACK: f64 = 4.0 * f64::EPSILON;

/// Clamp every dof to `[-1, 1]` via `p / max(1, |p|)`.
pub fn project_box(p: &mut [f64]) {
    for v in p {
        let a = v.abs();
        if a > 1.0 {
            *v /= a;
        }
    }
}

/// Radially scale each pixel's `(vertical, horizontal)` pair onto the unit
/// disc. Only defined for closed patches (every dof belongs to the pair
/// anchored at its own pixel).
pub fn project_pairs(patch: &Patch, p: &mut [f64]) {
    debug_assert_eq!(patch.dof_count(), patch.interior_count());
    let (rows, cols) = (patch.rows(), patch.cols());
    let ho = patch.horizontal_offset();
    for i in 0..rows {
        for j in 0..cols {
            let vi = (i + 1 < rows).then(|| i * cols + j);
            let hi = (j + 1 < cols).then(|| ho + i * (cols - 1) + j);
            let a = vi.map_or(0.0, |k| p[k]);
            let b = hi.map_or(0.0, |k| p[k]);
            let n = libm::sqrt(a * a + b * b);
            if n > 1.0 + PAIR_SLACK {
                if let Some(k) = vi {
                    p[k] = a / n;
                }
                if let Some(k) = hi {
                    p[k] = b / n;
                }
            }
        }
    }
}

/// Projection onto `C^1` (dofwise clipping).
pub fn project_c1(p: &DualField) -> DualField {
    let mut out = p.clone();
    project_box(out.values_mut());
    out
}

/// Projection onto `C^2` (pixelwise radial scaling).
pub fn project_c2(p: &DualField) -> DualField {
    let mut out = p.clone();
    project_pairs(&Patch::closed(p.dims()), out.values_mut());
    out
}

pub fn project(p: &DualField, pn: PNorm) -> DualField {
    match pn {
        PNorm::One => project_c1(p),
        PNorm::Two => project_c2(p),
    }
}

/// Whether every pixel constraint of `C^pn` holds within `tol`.
pub fn is_feasible(p: &DualField, pn: PNorm, tol: f64) -> bool {
    match pn {
        PNorm::One => p.values().iter().all(|v| v.abs() <= 1.0 + tol),
        PNorm::Two => pair_norms(p.dims(), p.values()).all(|n| n <= 1.0 + tol),
    }
}

fn pair_norms(dims: GridDims, p: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let (rows, cols) = (dims.rows, dims.cols);
    let ho = (rows - 1) * cols;
    (0..rows * cols).map(move |k| {
        let (i, j) = (k / cols, k % cols);
        let a = if i + 1 < rows { p[i * cols + j] } else { 0.0 };
        let b = if j + 1 < cols {
            p[ho + i * (cols - 1) + j]
        } else {
            0.0
        };
        libm::sqrt(a * a + b * b)
    })
}
