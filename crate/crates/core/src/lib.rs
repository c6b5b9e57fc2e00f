//! Matrix-free total-variation denoising on the pixel grid.
//!
//! The dual variable lives in the lowest-order Raviart-Thomas space: one
//! normal-flux dof per interior pixel edge. On top of the exact `div`/`div*`
//! pair this crate provides full-domain solvers for the dual ROF problem and
//! two nonoverlapping domain decomposition methods:
//!
//! * [`primal_ddm`]: FISTA on the interface dofs, with interior dofs
//!   eliminated by independent subdomain solves;
//! * [`pdual_ddm`]: duplicated interface dofs glued by Lagrange multipliers,
//!   with linearly convergent proximal subdomain solves.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution is pluggable
//! through [`exec::Executor`].

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod decomposition;
pub mod error;
pub mod exec;
pub mod mesh;
pub mod pdual_ddm;
pub mod primal_ddm;
pub mod solvers;

pub use constraints::PNorm;

pub use decomposition::{Decomposition, InterfaceVector, TildeField};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use mesh::{DualField, EdgeId, GridDims, Image, Orientation};
pub use solvers::{SolveReport, SolverParams, StopReason, TraceEntry};

#[cfg(test)]
pub(crate) mod testutil;
