//! Pixel grid, degree-of-freedom layout and the divergence operator pair.
//!
//! Every pixel is a unit square element. An [`Image`] stores one value per
//! pixel (row-major, row index growing toward `T[i+1][j]`). A [`DualField`]
//! stores one normal-flux value per interior edge of the lowest-order
//! Raviart-Thomas space with vanishing normal trace on the image boundary.
//!
//! Dof ordering, fixed for serialization and traces:
//!
//! * all vertical-pair edges first (edge between `T[i][j]` and `T[i+1][j]`),
//!   row-major over `i in 0..M-1, j in 0..N`;
//! * then all horizontal-pair edges (edge between `T[i][j]` and `T[i][j+1]`),
//!   row-major over `i in 0..M, j in 0..N-1`.
//!
//! A positive value means flux toward increasing index. The divergence of a
//! field is `(div p)[i][j] = (p_down - p_up) + (p_right - p_left)` where any
//! edge on the image boundary contributes zero. The adjoint `div*` is the
//! negative forward difference.
//!
//! [`Patch`] generalizes the stencil to a rectangular block whose sides may
//! carry extra "open" boundary dofs; the full image is the closed patch. The
//! domain decomposition code uses open patches for subdomain-local fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDims {
    pub rows: usize,
    pub cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims { rows, cols });
        }
        Ok(Self { rows, cols })
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn edge_count(&self) -> usize {
        edge_count(*self)
    }
}

/// Number of dual dofs: `(M-1)*N + M*(N-1)`.
pub fn edge_count(dims: GridDims) -> usize {
    (dims.rows - 1) * dims.cols + dims.rows * (dims.cols - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Edge between `T[i][j]` and `T[i+1][j]`.
    VerticalPair,
    /// Edge between `T[i][j]` and `T[i][j+1]`.
    HorizontalPair,
}

/// An interior edge, identified by its orientation and 0-based anchor pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeId {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

impl EdgeId {
    pub fn vertical(row: usize, col: usize) -> Self {
        Self {
            orientation: Orientation::VerticalPair,
            row,
            col,
        }
    }

    pub fn horizontal(row: usize, col: usize) -> Self {
        Self {
            orientation: Orientation::HorizontalPair,
            row,
            col,
        }
    }
}

/// Position of `edge` in the fixed dof ordering.
pub fn edge_index(dims: GridDims, edge: EdgeId) -> Result<usize> {
    let GridDims { rows, cols } = dims;
    let bad = Error::InvalidEdge {
        row: edge.row,
        col: edge.col,
        rows,
        cols,
    };
    match edge.orientation {
        Orientation::VerticalPair => {
            if edge.row + 1 >= rows || edge.col >= cols {
                return Err(bad);
            }
            Ok(edge.row * cols + edge.col)
        }
        Orientation::HorizontalPair => {
            if edge.row >= rows || edge.col + 1 >= cols {
                return Err(bad);
            }
            Ok((rows - 1) * cols + edge.row * (cols - 1) + edge.col)
        }
    }
}

/// Inverse of [`edge_index`].
pub fn edge_at(dims: GridDims, index: usize) -> Option<EdgeId> {
    let GridDims { rows, cols } = dims;
    let nv = (rows - 1) * cols;
    if index < nv {
        Some(EdgeId::vertical(index / cols, index % cols))
    } else if index < edge_count(dims) && cols > 1 {
        let k = index - nv;
        Some(EdgeId::horizontal(k / (cols - 1), k % (cols - 1)))
    } else {
        None
    }
}

/// Piecewise-constant image (element of X).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    dims: GridDims,
    values: Vec<f64>,
}

impl Image {
    pub fn new(dims: GridDims, values: Vec<f64>) -> Result<Self> {
        check_len(dims.pixel_count(), values.len())?;
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: GridDims) -> Self {
        Self {
            dims,
            values: vec![0.0; dims.pixel_count()],
        }
    }

    pub fn constant(dims: GridDims, value: f64) -> Self {
        Self {
            dims,
            values: vec![value; dims.pixel_count()],
        }
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(dims.pixel_count());
        for i in 0..dims.rows {
            for j in 0..dims.cols {
                values.push(f(i, j));
            }
        }
        Self { dims, values }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.dims.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Normal-flux dofs of the Raviart-Thomas space (element of Y).
#[derive(Debug, Clone, PartialEq)]
pub struct DualField {
    dims: GridDims,
    values: Vec<f64>,
}

impl DualField {
    pub fn new(dims: GridDims, values: Vec<f64>) -> Result<Self> {
        check_len(dims.edge_count(), values.len())?;
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: GridDims) -> Self {
        Self {
            dims,
            values: vec![0.0; dims.edge_count()],
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, edge: EdgeId) -> Result<f64> {
        Ok(self.values[edge_index(self.dims, edge)?])
    }

    pub fn set(&mut self, edge: EdgeId, value: f64) -> Result<()> {
        let k = edge_index(self.dims, edge)?;
        self.values[k] = value;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `div p` as an image.
pub fn div(p: &DualField) -> Image {
    let dims = p.dims();
    let mut out = vec![0.0; dims.pixel_count()];
    Patch::closed(dims).div(p.values(), &mut out);
    Image { dims, values: out }
}

/// `div* u`, the adjoint of [`div`] under the Euclidean inner products.
pub fn div_adj(u: &Image) -> DualField {
    let dims = u.dims();
    let mut out = vec![0.0; dims.edge_count()];
    Patch::closed(dims).div_adj(u.values(), &mut out);
    DualField { dims, values: out }
}

pub fn dot_x(u: &Image, v: &Image) -> Result<f64> {
    if u.dims != v.dims {
        return Err(Error::DimensionMismatch {
            expected: u.values.len(),
            found: v.values.len(),
        });
    }
    Ok(dot(&u.values, &v.values))
}

pub fn dot_y(p: &DualField, q: &DualField) -> Result<f64> {
    if p.dims != q.dims {
        return Err(Error::DimensionMismatch {
            expected: p.values.len(),
            found: q.values.len(),
        });
    }
    Ok(dot(&p.values, &q.values))
}

pub fn norm_x(u: &Image) -> f64 {
    libm::sqrt(dot(&u.values, &u.values))
}

pub fn norm_y(p: &DualField) -> f64 {
    libm::sqrt(dot(&p.values, &p.values))
}

/// Sequential Euclidean dot product (fixed summation order).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Which sides of a [`Patch`] carry their own boundary-flux dofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct OpenSides {
    pub top: bool,
    pub bottom: bool,
    pub left: bool,
    pub right: bool,
}

/// Rectangular block of pixels with the Raviart-Thomas stencil.
///
/// Slot layout: interior vertical-pair edges, interior horizontal-pair edges
/// (both row-major, same as the global ordering), then the open sides in the
/// order top (`cols` slots), bottom (`cols`), left (`rows`), right (`rows`).
/// Open-side slots hold the flux in global orientation: a top slot is the
/// vertical edge above row 0, so it enters `div` of row 0 with a minus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Patch {
    rows: usize,
    cols: usize,
    open: OpenSides,
}

impl Patch {
    pub fn new(rows: usize, cols: usize, open: OpenSides) -> Self {
        assert!(rows > 0 && cols > 0, "empty patch");
        Self { rows, cols, open }
    }

    pub fn closed(dims: GridDims) -> Self {
        Self::new(dims.rows, dims.cols, OpenSides::default())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn open(&self) -> OpenSides {
        self.open
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn interior_count(&self) -> usize {
        (self.rows - 1) * self.cols + self.rows * (self.cols - 1)
    }

    pub fn dof_count(&self) -> usize {
        self.right_offset() + if self.open.right { self.rows } else { 0 }
    }

    pub fn horizontal_offset(&self) -> usize {
        (self.rows - 1) * self.cols
    }

    pub fn top_offset(&self) -> usize {
        self.interior_count()
    }

    pub fn bottom_offset(&self) -> usize {
        self.top_offset() + if self.open.top { self.cols } else { 0 }
    }

    pub fn left_offset(&self) -> usize {
        self.bottom_offset() + if self.open.bottom { self.cols } else { 0 }
    }

    pub fn right_offset(&self) -> usize {
        self.left_offset() + if self.open.left { self.rows } else { 0 }
    }

    /// `out = div p` on this patch. Each pixel is evaluated as
    /// `(down - up) + (right - left)`, so the value of a pixel does not depend
    /// on whether it is computed on the whole image or on a subdomain patch.
    pub fn div(&self, p: &[f64], out: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        debug_assert_eq!(p.len(), self.dof_count());
        debug_assert_eq!(out.len(), self.pixel_count());
        let vert = &p[..self.horizontal_offset()];
        let horiz = &p[self.horizontal_offset()..self.interior_count()];
        let top = self.open.top.then(|| &p[self.top_offset()..self.top_offset() + cols]);
        let bottom = self
            .open
            .bottom
            .then(|| &p[self.bottom_offset()..self.bottom_offset() + cols]);
        let left = self
            .open
            .left
            .then(|| &p[self.left_offset()..self.left_offset() + rows]);
        let right = self
            .open
            .right
            .then(|| &p[self.right_offset()..self.right_offset() + rows]);
        let hw = cols - 1;

        for i in 0..rows {
            let up: Option<&[f64]> = if i > 0 {
                Some(&vert[(i - 1) * cols..i * cols])
            } else {
                top
            };
            let down: Option<&[f64]> = if i + 1 < rows {
                Some(&vert[i * cols..(i + 1) * cols])
            } else {
                bottom
            };
            let h = &horiz[i * hw..(i + 1) * hw];
            let row = &mut out[i * cols..(i + 1) * cols];
            for j in 0..cols {
                let d = down.map_or(0.0, |s| s[j]);
                let u = up.map_or(0.0, |s| s[j]);
                let r = if j + 1 < cols {
                    h[j]
                } else {
                    right.map_or(0.0, |s| s[i])
                };
                let l = if j > 0 {
                    h[j - 1]
                } else {
                    left.map_or(0.0, |s| s[i])
                };
                row[j] = (d - u) + (r - l);
            }
        }
    }

    /// `out = div* u` on this patch.
    pub fn div_adj(&self, u: &[f64], out: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        debug_assert_eq!(u.len(), self.pixel_count());
        debug_assert_eq!(out.len(), self.dof_count());
        let ho = self.horizontal_offset();
        for i in 0..rows.saturating_sub(1) {
            let a = &u[i * cols..(i + 1) * cols];
            let b = &u[(i + 1) * cols..(i + 2) * cols];
            for ((o, x), y) in out[i * cols..(i + 1) * cols].iter_mut().zip(a).zip(b) {
                *o = x - y;
            }
        }
        let hw = cols - 1;
        for i in 0..rows {
            let a = &u[i * cols..(i + 1) * cols];
            let o = &mut out[ho + i * hw..ho + (i + 1) * hw];
            for j in 0..hw {
                o[j] = a[j] - a[j + 1];
            }
        }
        if self.open.top {
            let off = self.top_offset();
            for j in 0..cols {
                out[off + j] = -u[j];
            }
        }
        if self.open.bottom {
            let off = self.bottom_offset();
            let last = (rows - 1) * cols;
            out[off..off + cols].copy_from_slice(&u[last..last + cols]);
        }
        if self.open.left {
            let off = self.left_offset();
            for i in 0..rows {
                out[off + i] = -u[i * cols];
            }
        }
        if self.open.right {
            let off = self.right_offset();
            for i in 0..rows {
                out[off + i] = u[i * cols + cols - 1];
            }
        }
    }
}
