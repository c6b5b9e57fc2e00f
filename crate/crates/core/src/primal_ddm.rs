//! Primal domain decomposition: projected FISTA on the interface dofs.
//!
//! For frozen interface values `q_Gamma` the interior dofs are eliminated by
//! independent subdomain solves (the harmonic-like extension `H_I`); the
//! reduced energy `J_Gamma(q) = J(H_I q + q)` has gradient
//! `(1/alpha) div*(div(H_I q + q) + alpha f)` restricted to the interface,
//! with Lipschitz constant `4/alpha` when every subdomain has at least 2x2
//! pixels.
//!
//! Subdomain solves use the accelerated primal-dual kernel on the closed
//! subdomain patch; the interface flux enters only through the shifted datum
//! `alpha f_s + div(0 + q_Gamma)|_s`. Local iterates are warm-started from the
//! previous outer iteration.

use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::{project_box, PNorm};
use crate::decomposition::{Decomposition, InterfaceVector, Subdomain};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::mesh::{DualField, Image};
use crate::solvers::kernels::{self, next_t, PdState, Projection};
use crate::solvers::{
    dual_energy_from_div, energy_primal, recover_from_div, SolveReport, SolverParams, StopReason,
    TraceEntry,
};

/// Outer (interface FISTA) and inner (subdomain solver) parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDdmParams {
    pub outer: SolverParams,
    pub inner: SolverParams,
}

impl PrimalDdmParams {
    /// `L = 4`, outer tolerance `1e-3`; inner accelerated primal-dual solver
    /// with its defaults and tolerance `1e-5`.
    pub fn new(alpha: f64) -> Self {
        Self {
            outer: SolverParams::primal_ddm(alpha),
            inner: SolverParams::accel_pd(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate_primal_ddm()?;
        self.inner.validate_accel_pd()?;
        if self.inner.alpha != self.outer.alpha {
            return Err(crate::error::invalid("alpha", "outer and inner alpha differ"));
        }
        if self.inner.pnorm != PNorm::One {
            return Err(crate::error::invalid("pnorm", "domain decomposition supports p = 1 only"));
        }
        Ok(())
    }
}

/// Warm-startable state of one subdomain solve.
#[derive(Debug, Clone)]
struct LocalSolve {
    /// `alpha f_s`.
    scaled_f: Vec<f64>,
    /// `alpha f_s` plus the frozen interface flux.
    data: Vec<f64>,
    /// Open-patch buffer: zero interior, interface values on the sides.
    frame: Vec<f64>,
    frame_div: Vec<f64>,
    state: PdState,
    iterations: usize,
    finite: bool,
}

impl LocalSolve {
    fn new(sd: &Subdomain, scaled_f: Vec<f64>) -> Self {
        let open = sd.open_patch();
        Self {
            data: scaled_f.clone(),
            scaled_f,
            frame: vec![0.0; open.dof_count()],
            frame_div: vec![0.0; open.pixel_count()],
            state: PdState::zeros(&sd.closed_patch()),
            iterations: 0,
            finite: true,
        }
    }

    fn solve(&mut self, sd: &Subdomain, q: &[f64], inner: &SolverParams) {
        let open = sd.open_patch();
        let ic = sd.interior_count();
        for (slot, &g) in self.frame[ic..].iter_mut().zip(sd.boundary_gamma()) {
            *slot = q[g];
        }
        open.div(&self.frame, &mut self.frame_div);
        for ((d, a), b) in self.data.iter_mut().zip(&self.scaled_f).zip(&self.frame_div) {
            *d = a + b;
        }
        let outcome = kernels::accel_pd(
            &sd.closed_patch(),
            &self.data,
            &inner.accel_config(),
            Projection::Box,
            &mut self.state,
            inner.stop(),
            |_, _| {},
        );
        self.iterations = outcome.iterations;
        self.finite = self.state.p.iter().chain(&self.state.u).all(|v| v.is_finite());
    }
}

fn scaled_local(d: &Decomposition, s: usize, f: &Image, alpha: f64) -> Vec<f64> {
    let mut v = d.local_pixels(s, f);
    v.iter_mut().for_each(|x| *x *= alpha);
    v
}

fn check_inputs(f: &Image, d: &Decomposition, q: Option<&InterfaceVector>) -> Result<()> {
    if f.dims() != d.dims() {
        return Err(Error::DimensionMismatch {
            expected: d.dims().pixel_count(),
            found: f.values().len(),
        });
    }
    if let Some(q) = q {
        if q.len() != d.interface_len() {
            return Err(Error::DimensionMismatch {
                expected: d.interface_len(),
                found: q.len(),
            });
        }
    }
    Ok(())
}

/// Minimize the dual energy of subdomain `s` over its interior dofs with the
/// interface dofs frozen at `q_gamma` (cold start). Returns the interior field
/// in closed-patch order.
pub fn local_eliminate(
    s: usize,
    q_gamma: &InterfaceVector,
    f: &Image,
    d: &Decomposition,
    inner: &SolverParams,
) -> Result<Vec<f64>> {
    check_inputs(f, d, Some(q_gamma))?;
    inner.validate_accel_pd()?;
    let sd = d.subdomain(s);
    let mut local = LocalSolve::new(sd, scaled_local(d, s, f, inner.alpha));
    local.solve(sd, &q_gamma.values, inner);
    if !local.finite {
        return Err(Error::NonFinite { context: "local elimination" });
    }
    Ok(local.state.p)
}

/// `H_I q_gamma`: every subdomain's [`local_eliminate`], run through `exec`.
pub fn harmonic_extend(
    q_gamma: &InterfaceVector,
    f: &Image,
    d: &Decomposition,
    inner: &SolverParams,
    exec: &impl Executor,
) -> Result<Vec<Vec<f64>>> {
    check_inputs(f, d, Some(q_gamma))?;
    inner.validate_accel_pd()?;
    let mut locals: Vec<LocalSolve> = (0..d.subdomain_count())
        .map(|s| LocalSolve::new(d.subdomain(s), scaled_local(d, s, f, inner.alpha)))
        .collect();
    exec.for_each_mut(&mut locals, |s, local| local.solve(d.subdomain(s), &q_gamma.values, inner));
    if locals.iter().any(|l| !l.finite) {
        return Err(Error::NonFinite { context: "harmonic extension" });
    }
    Ok(locals.into_iter().map(|l| l.state.p).collect())
}

/// `(1/alpha) div*(div(p_I + q_gamma) + alpha f)` on the interface dofs.
pub fn grad_j_gamma(
    q_gamma: &InterfaceVector,
    p_interior: &[Vec<f64>],
    f: &Image,
    d: &Decomposition,
    alpha: f64,
) -> Result<InterfaceVector> {
    check_inputs(f, d, Some(q_gamma))?;
    let p = d.assemble(p_interior, q_gamma)?;
    let g = crate::solvers::grad_j(&p, f, alpha);
    Ok(d.restrict(&g)?.1)
}

/// `J_Gamma(q) = J(H_I q + q)`, with `H_I` recomputed from a cold start.
pub fn interface_energy(
    q_gamma: &InterfaceVector,
    f: &Image,
    d: &Decomposition,
    inner: &SolverParams,
) -> Result<f64> {
    let p_i = harmonic_extend(q_gamma, f, d, inner, &Sequential)?;
    let p = d.assemble(&p_i, q_gamma)?;
    Ok(crate::solvers::energy_dual(&p, f, inner.alpha))
}

/// Iteration state of the interface FISTA.
///
/// Construction performs the initial extension at `q = 0` and records trace
/// entry 0; every [`step`](Self::step) performs one gradient step and one
/// extension at the new extrapolated point.
#[derive(Debug, Clone)]
pub struct PrimalDdm<'a> {
    f: &'a Image,
    d: &'a Decomposition,
    params: PrimalDdmParams,
    locals: Vec<LocalSolve>,
    /// Main iterate `p_Gamma`.
    p: InterfaceVector,
    /// Extrapolated point `q_Gamma`, where the last extension was computed.
    q: InterfaceVector,
    t: f64,
    iteration: usize,
    /// `div(H_I q + q) + alpha f` at the current `q`.
    residual: Vec<f64>,
    energy: f64,
    trace: Vec<TraceEntry>,
    max_inner: usize,
    converged: bool,
}

impl<'a> PrimalDdm<'a> {
    pub fn new(
        f: &'a Image,
        d: &'a Decomposition,
        params: PrimalDdmParams,
        exec: &impl Executor,
    ) -> Result<Self> {
        params.validate()?;
        check_inputs(f, d, None)?;
        let alpha = params.outer.alpha;
        let locals = (0..d.subdomain_count())
            .map(|s| LocalSolve::new(d.subdomain(s), scaled_local(d, s, f, alpha)))
            .collect();
        let n = d.interface_len();
        let mut this = Self {
            f,
            d,
            params,
            locals,
            p: InterfaceVector::zeros(n),
            q: InterfaceVector::zeros(n),
            t: 1.0,
            iteration: 0,
            residual: vec![0.0; f.dims().pixel_count()],
            energy: 0.0,
            trace: Vec::new(),
            max_inner: 0,
            converged: false,
        };
        let entry = this.extend(exec)?;
        this.trace.push(entry);
        Ok(this)
    }

    /// Solve every subdomain at the current `q` and refresh the residual,
    /// energies and trace entry.
    fn extend(&mut self, exec: &impl Executor) -> Result<TraceEntry> {
        let (d, inner, q) = (self.d, &self.params.inner, &self.q);
        exec.for_each_mut(&mut self.locals, |s, local| {
            local.solve(d.subdomain(s), &q.values, inner)
        });
        if self.locals.iter().any(|l| !l.finite) {
            return Err(Error::NonFinite { context: "subdomain solve" });
        }
        let interior: Vec<Vec<f64>> = self.locals.iter().map(|l| l.state.p.clone()).collect();
        let field = d.assemble(&interior, q)?;
        let divp = crate::mesh::div(&field);
        let alpha = self.params.outer.alpha;
        for ((r, dv), fv) in self.residual.iter_mut().zip(divp.values()).zip(self.f.values()) {
            *r = dv + alpha * fv;
        }
        let u = recover_from_div(divp.values(), self.f, alpha);
        self.energy = energy_primal(&u, self.f, alpha, PNorm::One);
        let inner_max = self.locals.iter().map(|l| l.iterations).max().unwrap_or(0);
        self.max_inner = self.max_inner.max(inner_max);
        Ok(TraceEntry {
            iteration: self.iteration,
            dual_energy: dual_energy_from_div(divp.values(), self.f.values(), alpha),
            primal_energy: self.energy,
            jump_norm: None,
            max_inner_iterations: inner_max,
        })
    }

    /// One outer iteration. Returns the new trace entry.
    pub fn step(&mut self, exec: &impl Executor) -> Result<TraceEntry> {
        let lipschitz = self.params.outer.lipschitz;
        // div* of the residual, restricted to the interface
        let mut next = self.q.values.clone();
        let cols = self.f.dims().cols;
        for (k, pair) in self.d.interface_pairs().iter().enumerate() {
            let g = pair.dof;
            let (a, b) = match pair.orientation {
                crate::mesh::Orientation::VerticalPair => (g, g + cols),
                crate::mesh::Orientation::HorizontalPair => {
                    let rows = self.f.dims().rows;
                    let h = g - (rows - 1) * cols;
                    let (i, j) = (h / (cols - 1), h % (cols - 1));
                    (i * cols + j, i * cols + j + 1)
                }
            };
            next[k] -= (self.residual[a] - self.residual[b]) / lipschitz;
        }
        project_box(&mut next);

        let t_new = next_t(self.t);
        let beta = (self.t - 1.0) / t_new;
        for ((q, p), n) in self.q.values.iter_mut().zip(&mut self.p.values).zip(&next) {
            *q = n + beta * (n - *p);
            *p = *n;
        }
        self.t = t_new;
        self.iteration += 1;

        let previous = self.energy;
        let entry = self.extend(exec)?;
        self.trace.push(entry);
        let change = (self.energy - previous).abs();
        self.converged = change == 0.0 || change < self.params.outer.rel_tol * self.energy.abs();
        Ok(entry)
    }

    /// Whether the last step met the relative energy-change criterion.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// Main interface iterate `p_Gamma`.
    pub fn interface_iterate(&self) -> &InterfaceVector {
        &self.p
    }

    /// Extrapolated interface point `q_Gamma`.
    pub fn extrapolated(&self) -> &InterfaceVector {
        &self.q
    }

    pub fn momentum(&self) -> f64 {
        self.t
    }

    /// Current interior fields (closed-patch order per subdomain).
    pub fn interior(&self) -> Vec<Vec<f64>> {
        self.locals.iter().map(|l| l.state.p.clone()).collect()
    }

    /// Full field `H_I q + q` at the current extrapolated point.
    pub fn dual(&self) -> DualField {
        self.d.assemble(&self.interior(), &self.q).expect("consistent sizes")
    }

    pub fn primal(&self) -> Image {
        let alpha = self.params.outer.alpha;
        let values = self.residual.iter().map(|r| r / alpha).collect();
        Image::new(self.f.dims(), values).expect("dims")
    }

    /// Run until convergence or `max_iter`, calling `observer` on each new
    /// trace entry (entry 0 is reported first).
    pub fn run(&mut self, exec: &impl Executor, observer: &mut dyn FnMut(&TraceEntry)) -> Result<()> {
        if self.iteration == 0 {
            observer(&self.trace[0]);
        }
        while !self.converged && self.iteration < self.params.outer.max_iter {
            let e = self.step(exec)?;
            observer(&e);
        }
        Ok(())
    }

    pub fn into_report(self) -> SolveReport {
        SolveReport {
            iterations: self.iteration,
            dual: self.dual(),
            primal: self.primal(),
            stop_reason: if self.converged {
                StopReason::Tolerance
            } else {
                StopReason::MaxIter
            },
            max_inner_iterations: self.max_inner,
            trace: self.trace,
        }
    }
}

/// Run the primal decomposition to convergence with sequential subdomain
/// solves.
pub fn primal_ddm_solve(f: &Image, d: &Decomposition, params: &PrimalDdmParams) -> Result<SolveReport> {
    primal_ddm_solve_with(f, d, params, &Sequential, &mut |_| {})
}

pub fn primal_ddm_solve_with(
    f: &Image,
    d: &Decomposition,
    params: &PrimalDdmParams,
    exec: &impl Executor,
    observer: &mut dyn FnMut(&TraceEntry),
) -> Result<SolveReport> {
    let mut solver = PrimalDdm::new(f, d, params.clone(), exec)?;
    solver.run(exec, observer)?;
    Ok(solver.into_report())
}
