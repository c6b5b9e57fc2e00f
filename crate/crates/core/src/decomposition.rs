//! Checkerboard partition of the pixel grid into rectangular subdomains.
//!
//! Every dual dof is classified by its edge: if the two pixels it separates
//! belong to different subdomains the dof lies on the interface `Gamma`,
//! otherwise it is interior to exactly one subdomain.
//!
//! Each subdomain is seen through two [`Patch`]es over its pixel rectangle:
//! the closed patch (only its interior dofs, used by the primal
//! decomposition) and the open patch, which also carries a slot for every
//! interface edge on its boundary (the duplicated representation used by the
//! primal-dual decomposition). All values keep the global orientation, so the
//! jump operator is a plain difference of the two duplicated values.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::mesh::{DualField, GridDims, Image, OpenSides, Orientation, Patch};

/// Pixel rectangle `[row0, row0 + rows) x [col0, col0 + cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Rect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row0 && row < self.row0 + self.rows && col >= self.col0 && col < self.col0 + self.cols
    }
}

#[derive(Debug, Clone)]
pub struct Subdomain {
    rect: Rect,
    open: OpenSides,
    /// Global dof of every slot of the open patch; the first
    /// `interior_count` entries are the interior dofs, in closed-patch order.
    tilde_map: Vec<usize>,
    /// Interface index of every open-side slot, in slot order.
    boundary_gamma: Vec<usize>,
    /// Sign of each open-side slot in `B`: `+1` where this subdomain is the
    /// lower-numbered owner (bottom and right sides), `-1` otherwise.
    boundary_sign: Vec<f64>,
}

impl Subdomain {
    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn closed_patch(&self) -> Patch {
        Patch::new(self.rect.rows, self.rect.cols, OpenSides::default())
    }

    pub fn open_patch(&self) -> Patch {
        Patch::new(self.rect.rows, self.rect.cols, self.open)
    }

    /// Global positions of the dofs interior to this subdomain.
    pub fn interior_dofs(&self) -> &[usize] {
        &self.tilde_map[..self.interior_count()]
    }

    pub fn interior_count(&self) -> usize {
        self.closed_patch().interior_count()
    }

    /// Global position of every open-patch slot.
    pub fn tilde_map(&self) -> &[usize] {
        &self.tilde_map
    }

    /// Interface index of each slot past the interior ones.
    pub fn boundary_gamma(&self) -> &[usize] {
        &self.boundary_gamma
    }

    pub fn boundary_sign(&self) -> &[f64] {
        &self.boundary_sign
    }

    /// Copy this subdomain's pixels out of a full-image array.
    pub fn gather_pixels(&self, image: &[f64], image_cols: usize) -> Vec<f64> {
        let r = self.rect;
        let mut out = Vec::with_capacity(r.rows * r.cols);
        for i in 0..r.rows {
            let start = (r.row0 + i) * image_cols + r.col0;
            out.extend_from_slice(&image[start..start + r.cols]);
        }
        out
    }

    /// Write local pixel values back into a full-image array.
    pub fn scatter_pixels(&self, local: &[f64], image: &mut [f64], image_cols: usize) {
        let r = self.rect;
        for i in 0..r.rows {
            let start = (r.row0 + i) * image_cols + r.col0;
            image[start..start + r.cols].copy_from_slice(&local[i * r.cols..(i + 1) * r.cols]);
        }
    }
}

/// One interface dof and its two owners `s < t`, with the slot it occupies
/// in each owner's open patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfacePair {
    pub dof: usize,
    pub orientation: Orientation,
    pub s: usize,
    pub slot_s: usize,
    pub t: usize,
    pub slot_t: usize,
}

/// Values indexed by the interface dofs, in increasing global position.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVector {
    pub values: Vec<f64>,
}

impl InterfaceVector {
    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-subdomain fields over the open-patch slots (interface dofs duplicated).
#[derive(Debug, Clone, PartialEq)]
pub struct TildeField {
    pub parts: Vec<Vec<f64>>,
}

impl TildeField {
    pub fn norm_sq(&self) -> f64 {
        self.parts.iter().map(|p| crate::mesh::norm_sq(p)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    dims: GridDims,
    nsub: (usize, usize),
    subdomains: Vec<Subdomain>,
    interface_dofs: Vec<usize>,
    pairs: Vec<InterfacePair>,
}

/// Split `n` pixels into `parts` blocks; the last block takes the remainder.
fn extents(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = n / parts;
    (0..parts)
        .map(|k| {
            let len = if k + 1 == parts { n - base * (parts - 1) } else { base };
            (k * base, len)
        })
        .collect()
}

impl Decomposition {
    /// Partition `dims` into `nsub.0 x nsub.1` subdomains, numbered row-major.
    pub fn build(dims: GridDims, nsub: (usize, usize)) -> Result<Self> {
        let (nr, nc) = nsub;
        if nr == 0 || nc == 0 {
            return Err(invalid("nsub", "needs at least one subdomain per direction"));
        }
        let rows = extents(dims.rows, nr);
        let cols = extents(dims.cols, nc);
        // a single subdomain has no interface, so thin images are fine
        let split = nr * nc > 1;
        for (a, &(_, h)) in rows.iter().enumerate().filter(|_| split) {
            for (b, &(_, w)) in cols.iter().enumerate() {
                if h < 2 || w < 2 {
                    return Err(Error::SubdomainTooSmall {
                        index: a * nc + b,
                        rows: h,
                        cols: w,
                    });
                }
            }
        }

        let (m, n) = (dims.rows, dims.cols);
        let ho = (m - 1) * n;
        let vert = |i: usize, j: usize| i * n + j;
        let horiz = |i: usize, j: usize| ho + i * (n - 1) + j;

        let mut subdomains = Vec::with_capacity(nr * nc);
        for (a, &(row0, h)) in rows.iter().enumerate() {
            for (b, &(col0, w)) in cols.iter().enumerate() {
                let rect = Rect { row0, col0, rows: h, cols: w };
                let open = OpenSides {
                    top: a > 0,
                    bottom: a + 1 < nr,
                    left: b > 0,
                    right: b + 1 < nc,
                };
                let mut map = Vec::new();
                for i in 0..h - 1 {
                    map.extend((0..w).map(|j| vert(row0 + i, col0 + j)));
                }
                for i in 0..h {
                    map.extend((0..w - 1).map(|j| horiz(row0 + i, col0 + j)));
                }
                if open.top {
                    map.extend((0..w).map(|j| vert(row0 - 1, col0 + j)));
                }
                if open.bottom {
                    map.extend((0..w).map(|j| vert(row0 + h - 1, col0 + j)));
                }
                if open.left {
                    map.extend((0..h).map(|i| horiz(row0 + i, col0 - 1)));
                }
                if open.right {
                    map.extend((0..h).map(|i| horiz(row0 + i, col0 + w - 1)));
                }
                let mut sign = Vec::new();
                sign.extend(core::iter::repeat_n(-1.0, if open.top { w } else { 0 }));
                sign.extend(core::iter::repeat_n(1.0, if open.bottom { w } else { 0 }));
                sign.extend(core::iter::repeat_n(-1.0, if open.left { h } else { 0 }));
                sign.extend(core::iter::repeat_n(1.0, if open.right { h } else { 0 }));
                subdomains.push(Subdomain {
                    rect,
                    open,
                    tilde_map: map,
                    boundary_gamma: Vec::new(),
                    boundary_sign: sign,
                });
            }
        }

        // Interface dofs, each seen from its lower-numbered owner's bottom or
        // right side and its partner's top or left side.
        let mut pairs = Vec::new();
        for s in 0..subdomains.len() {
            let sd = &subdomains[s];
            let p = sd.open_patch();
            if sd.open.bottom {
                let t = s + nc;
                let pt = subdomains[t].open_patch();
                for j in 0..sd.rect.cols {
                    pairs.push(InterfacePair {
                        dof: sd.tilde_map[p.bottom_offset() + j],
                        orientation: Orientation::VerticalPair,
                        s,
                        slot_s: p.bottom_offset() + j,
                        t,
                        slot_t: pt.top_offset() + j,
                    });
                }
            }
            if sd.open.right {
                let t = s + 1;
                let pt = subdomains[t].open_patch();
                for i in 0..sd.rect.rows {
                    pairs.push(InterfacePair {
                        dof: sd.tilde_map[p.right_offset() + i],
                        orientation: Orientation::HorizontalPair,
                        s,
                        slot_s: p.right_offset() + i,
                        t,
                        slot_t: pt.left_offset() + i,
                    });
                }
            }
        }
        pairs.sort_by_key(|q| q.dof);
        let interface_dofs: Vec<usize> = pairs.iter().map(|q| q.dof).collect();

        for sd in subdomains.iter_mut() {
            let ic = sd.interior_count();
            sd.boundary_gamma = sd.tilde_map[ic..]
                .iter()
                .map(|g| interface_dofs.binary_search(g).expect("boundary slot on the interface"))
                .collect();
        }

        Ok(Self {
            dims,
            nsub,
            subdomains,
            interface_dofs,
            pairs,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn nsub(&self) -> (usize, usize) {
        self.nsub
    }

    pub fn subdomain_count(&self) -> usize {
        self.subdomains.len()
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, s: usize) -> &Subdomain {
        &self.subdomains[s]
    }

    /// Global positions of the interface dofs, increasing.
    pub fn interface_dofs(&self) -> &[usize] {
        &self.interface_dofs
    }

    pub fn interface_len(&self) -> usize {
        self.interface_dofs.len()
    }

    /// One entry per interface dof, in interface order.
    pub fn interface_pairs(&self) -> &[InterfacePair] {
        &self.pairs
    }

    fn check_field(&self, p: &DualField) -> Result<()> {
        if p.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.edge_count(),
                found: p.values().len(),
            });
        }
        Ok(())
    }

    fn check_interface(&self, v: &InterfaceVector) -> Result<()> {
        if v.len() != self.interface_len() {
            return Err(Error::DimensionMismatch {
                expected: self.interface_len(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_tilde(&self, pt: &TildeField) -> Result<()> {
        if pt.parts.len() != self.subdomains.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subdomains.len(),
                found: pt.parts.len(),
            });
        }
        for (part, sd) in pt.parts.iter().zip(&self.subdomains) {
            if part.len() != sd.tilde_map.len() {
                return Err(Error::DimensionMismatch {
                    expected: sd.tilde_map.len(),
                    found: part.len(),
                });
            }
        }
        Ok(())
    }

    /// `p = p_I + p_Gamma`: interior parts per subdomain (closed-patch order)
    /// and the interface part.
    pub fn restrict(&self, p: &DualField) -> Result<(Vec<Vec<f64>>, InterfaceVector)> {
        self.check_field(p)?;
        let v = p.values();
        let interior = self
            .subdomains
            .iter()
            .map(|sd| sd.interior_dofs().iter().map(|&g| v[g]).collect())
            .collect();
        let gamma = self.interface_dofs.iter().map(|&g| v[g]).collect();
        Ok((interior, InterfaceVector { values: gamma }))
    }

    /// Inverse of [`restrict`](Self::restrict).
    pub fn assemble(&self, interior: &[Vec<f64>], gamma: &InterfaceVector) -> Result<DualField> {
        self.check_interface(gamma)?;
        if interior.len() != self.subdomains.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subdomains.len(),
                found: interior.len(),
            });
        }
        let mut out = vec![0.0; self.dims.edge_count()];
        for (part, sd) in interior.iter().zip(&self.subdomains) {
            let dofs = sd.interior_dofs();
            if part.len() != dofs.len() {
                return Err(Error::DimensionMismatch {
                    expected: dofs.len(),
                    found: part.len(),
                });
            }
            for (&g, &x) in dofs.iter().zip(part) {
                out[g] = x;
            }
        }
        for (&g, &x) in self.interface_dofs.iter().zip(&gamma.values) {
            out[g] = x;
        }
        DualField::new(self.dims, out)
    }

    /// Duplicate `p` into every subdomain's open patch.
    pub fn split_tilde(&self, p: &DualField) -> Result<TildeField> {
        self.check_field(p)?;
        let v = p.values();
        Ok(TildeField {
            parts: self
                .subdomains
                .iter()
                .map(|sd| sd.tilde_map.iter().map(|&g| v[g]).collect())
                .collect(),
        })
    }

    /// Inverse of [`split_tilde`](Self::split_tilde). Interface dofs take the
    /// value of their lower-numbered owner; the field is rejected if any jump
    /// exceeds `tol`.
    pub fn merge_tilde(&self, pt: &TildeField, tol: f64) -> Result<DualField> {
        self.check_tilde(pt)?;
        let jump = self.jump_b(pt)?;
        let worst = jump.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(worst <= tol) {
            return Err(Error::NonConforming { jump: worst, tol });
        }
        let mut out = vec![0.0; self.dims.edge_count()];
        for (part, sd) in pt.parts.iter().zip(&self.subdomains) {
            for (&g, &x) in sd.interior_dofs().iter().zip(part) {
                out[g] = x;
            }
        }
        for q in &self.pairs {
            out[q.dof] = pt.parts[q.s][q.slot_s];
        }
        DualField::new(self.dims, out)
    }

    /// Jump `B pt`: value in the lower-numbered owner minus value in the other.
    pub fn jump_b(&self, pt: &TildeField) -> Result<InterfaceVector> {
        self.check_tilde(pt)?;
        Ok(InterfaceVector {
            values: self
                .pairs
                .iter()
                .map(|q| pt.parts[q.s][q.slot_s] - pt.parts[q.t][q.slot_t])
                .collect(),
        })
    }

    /// Adjoint `B* lambda`: `+lambda` into the lower owner's slot, `-lambda`
    /// into the other's, zero elsewhere.
    pub fn jump_b_adj(&self, lambda: &InterfaceVector) -> Result<TildeField> {
        self.check_interface(lambda)?;
        let mut parts: Vec<Vec<f64>> = self.subdomains.iter().map(|sd| vec![0.0; sd.tilde_map.len()]).collect();
        for (q, &l) in self.pairs.iter().zip(&lambda.values) {
            parts[q.s][q.slot_s] = l;
            parts[q.t][q.slot_t] = -l;
        }
        Ok(TildeField { parts })
    }

    /// Pixels of subdomain `s` from a full image.
    pub fn local_pixels(&self, s: usize, image: &Image) -> Vec<f64> {
        self.subdomains[s].gather_pixels(image.values(), self.dims.cols)
    }
}
