//! Primal-dual domain decomposition: duplicated interface dofs glued by
//! Lagrange multipliers.
//!
//! Each subdomain owns a full copy of the dofs on its interface sides (the
//! open patch). The saddle problem
//! `min_pt max_lambda J~(pt) + <B pt, lambda>` is solved by alternating a
//! multiplier ascent with extrapolation and independent proximal subdomain
//! problems
//! `min_{ps in C} J_s(ps) + 1/(2 tau) |ps - p_hat_s|^2`, handled by the
//! linearly convergent primal-dual kernel and warm-started across outer
//! iterations.

use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::PNorm;
use crate::decomposition::{Decomposition, InterfaceVector, Subdomain, TildeField};
use crate::error::{invalid, Error, Result};
use crate::exec::{Executor, Sequential};
use crate::mesh::{DualField, Image};
use crate::solvers::kernels::{self, PdState, Projection};
use crate::solvers::{energy_primal, SolveReport, SolverParams, StopReason, TraceEntry};

/// Outer (multiplier) and local (proximal solver) parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PdualDdmParams {
    pub outer: SolverParams,
    pub local: SolverParams,
}

impl PdualDdmParams {
    /// `L = 2`, `sigma = 0.02`, `tau = 25`, outer tolerance `1e-3`; local
    /// solver with `L = 8`, `gamma = alpha/2`, `delta = 1/tau` and tolerance
    /// `1e-5`.
    pub fn new(alpha: f64) -> Self {
        let outer = SolverParams::pdual_ddm(alpha);
        let local = SolverParams::linear_pd(alpha, outer.tau);
        Self { outer, local }
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate_pdual_ddm()?;
        self.local.validate_linear_pd()?;
        if self.local.alpha != self.outer.alpha {
            return Err(invalid("alpha", "outer and local alpha differ"));
        }
        if self.local.tau != self.outer.tau {
            return Err(invalid("tau", "the local proximal weight must equal the outer tau"));
        }
        if self.local.pnorm != PNorm::One {
            return Err(invalid("pnorm", "domain decomposition supports p = 1 only"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct LocalProx {
    /// `alpha f_s`.
    data: Vec<f64>,
    hat: Vec<f64>,
    /// Iterate before the last solve.
    prev: Vec<f64>,
    state: PdState,
    divp: Vec<f64>,
    iterations: usize,
    finite: bool,
}

impl LocalProx {
    fn new(sd: &Subdomain, data: Vec<f64>) -> Self {
        let patch = sd.open_patch();
        let n = patch.dof_count();
        Self {
            data,
            hat: vec![0.0; n],
            prev: vec![0.0; n],
            state: PdState::zeros(&patch),
            divp: vec![0.0; patch.pixel_count()],
            iterations: 0,
            finite: true,
        }
    }

    /// `p_hat = p~ - tau B* lambda`, then the proximal solve from the current
    /// iterate.
    fn solve(&mut self, sd: &Subdomain, lambda: &[f64], local: &SolverParams) {
        let patch = sd.open_patch();
        let ic = sd.interior_count();
        let tau = local.tau;
        self.hat.copy_from_slice(&self.state.p);
        for ((h, &g), &sign) in self.hat[ic..].iter_mut().zip(sd.boundary_gamma()).zip(sd.boundary_sign()) {
            *h -= tau * sign * lambda[g];
        }
        self.prev.copy_from_slice(&self.state.p);
        let outcome = kernels::linear_pd(
            &patch,
            &self.data,
            &self.hat,
            &local.linear_config(),
            Projection::Box,
            &mut self.state,
            local.stop(),
            |_, _| {},
        );
        self.iterations = outcome.iterations;
        patch.div(&self.state.p, &mut self.divp);
        self.finite = self.state.p.iter().chain(&self.state.u).all(|v| v.is_finite());
    }
}

fn scaled_local(d: &Decomposition, s: usize, f: &Image, alpha: f64) -> Vec<f64> {
    let mut v = d.local_pixels(s, f);
    v.iter_mut().for_each(|x| *x *= alpha);
    v
}

fn check_image(f: &Image, d: &Decomposition) -> Result<()> {
    if f.dims() != d.dims() {
        return Err(Error::DimensionMismatch {
            expected: d.dims().pixel_count(),
            found: f.values().len(),
        });
    }
    Ok(())
}

/// Solve `min_{ps in C} J_s(ps) + 1/(2 tau) |ps - p_hat_s|^2` on the open
/// patch of subdomain `s` from a cold start; `tau` is `local.tau`.
pub fn local_prox_solve(
    s: usize,
    p_hat: &[f64],
    f: &Image,
    d: &Decomposition,
    local: &SolverParams,
) -> Result<Vec<f64>> {
    check_image(f, d)?;
    local.validate_linear_pd()?;
    let sd = d.subdomain(s);
    let patch = sd.open_patch();
    if p_hat.len() != patch.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: patch.dof_count(),
            found: p_hat.len(),
        });
    }
    let mut st = PdState::zeros(&patch);
    kernels::linear_pd(
        &patch,
        &scaled_local(d, s, f, local.alpha),
        p_hat,
        &local.linear_config(),
        Projection::Box,
        &mut st,
        local.stop(),
        |_, _| {},
    );
    if st.p.iter().chain(&st.u).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "local proximal solve" });
    }
    Ok(st.p)
}

/// `J~(pt) = sum_s 1/(2 alpha) |div_s pt_s + alpha f_s|^2`.
pub fn tilde_energy(pt: &TildeField, f: &Image, d: &Decomposition, alpha: f64) -> Result<f64> {
    check_image(f, d)?;
    d.jump_b(pt)?; // size check
    let mut total = 0.0;
    for (s, sd) in d.subdomains().iter().enumerate() {
        let patch = sd.open_patch();
        let mut dv = vec![0.0; patch.pixel_count()];
        patch.div(&pt.parts[s], &mut dv);
        let fs = d.local_pixels(s, f);
        total += dv
            .iter()
            .zip(&fs)
            .map(|(a, b)| {
                let w = a + alpha * b;
                w * w
            })
            .sum::<f64>();
    }
    Ok(total / (2.0 * alpha))
}

/// Iteration state of the multiplier method. Construction records trace
/// entry 0 for `pt = 0`, `lambda = 0`.
#[derive(Debug, Clone)]
pub struct PdualDdm<'a> {
    f: &'a Image,
    d: &'a Decomposition,
    params: PdualDdmParams,
    locals: Vec<LocalProx>,
    lambda: InterfaceVector,
    iteration: usize,
    energy: f64,
    trace: Vec<TraceEntry>,
    max_inner: usize,
    converged: bool,
}

impl<'a> PdualDdm<'a> {
    pub fn new(f: &'a Image, d: &'a Decomposition, params: PdualDdmParams) -> Result<Self> {
        params.validate()?;
        check_image(f, d)?;
        let alpha = params.outer.alpha;
        let locals: Vec<LocalProx> = (0..d.subdomain_count())
            .map(|s| LocalProx::new(d.subdomain(s), scaled_local(d, s, f, alpha)))
            .collect();
        let mut this = Self {
            f,
            d,
            params,
            locals,
            lambda: InterfaceVector::zeros(d.interface_len()),
            iteration: 0,
            energy: 0.0,
            trace: Vec::new(),
            max_inner: 0,
            converged: false,
        };
        let entry = this.measure(0);
        this.trace.push(entry);
        Ok(this)
    }

    fn measure(&mut self, inner: usize) -> TraceEntry {
        let alpha = self.params.outer.alpha;
        let u = self.primal();
        self.energy = energy_primal(&u, self.f, alpha, PNorm::One);
        let mut dual = 0.0;
        for l in &self.locals {
            dual += l
                .divp
                .iter()
                .zip(&l.data)
                .map(|(a, b)| (a + b) * (a + b))
                .sum::<f64>();
        }
        let jump = self.jump();
        TraceEntry {
            iteration: self.iteration,
            dual_energy: dual / (2.0 * alpha),
            primal_energy: self.energy,
            jump_norm: Some(libm::sqrt(crate::mesh::norm_sq(&jump.values))),
            max_inner_iterations: inner,
        }
    }

    /// One outer iteration: multiplier update, then all local solves.
    pub fn step(&mut self, exec: &impl Executor) -> Result<TraceEntry> {
        let sigma = self.params.outer.sigma;
        for (l, q) in self.lambda.values.iter_mut().zip(self.d.interface_pairs()) {
            let a = &self.locals[q.s];
            let b = &self.locals[q.t];
            let xs = 2.0 * a.state.p[q.slot_s] - a.prev[q.slot_s];
            let xt = 2.0 * b.state.p[q.slot_t] - b.prev[q.slot_t];
            *l += sigma * (xs - xt);
        }
        let (d, local, lambda) = (self.d, &self.params.local, &self.lambda.values);
        exec.for_each_mut(&mut self.locals, |s, l| l.solve(d.subdomain(s), lambda, local));
        if self.locals.iter().any(|l| !l.finite) {
            return Err(Error::NonFinite { context: "subdomain proximal solve" });
        }
        self.iteration += 1;
        let inner = self.locals.iter().map(|l| l.iterations).max().unwrap_or(0);
        self.max_inner = self.max_inner.max(inner);

        let previous = self.energy;
        let entry = self.measure(inner);
        self.trace.push(entry);
        let change = (self.energy - previous).abs();
        self.converged = change == 0.0 || change < self.params.outer.rel_tol * self.energy.abs();
        Ok(entry)
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn multiplier(&self) -> &InterfaceVector {
        &self.lambda
    }

    /// Current duplicated iterate `pt`.
    pub fn tilde(&self) -> TildeField {
        TildeField {
            parts: self.locals.iter().map(|l| l.state.p.clone()).collect(),
        }
    }

    /// `B pt` of the current iterate.
    pub fn jump(&self) -> InterfaceVector {
        InterfaceVector {
            values: self
                .d
                .interface_pairs()
                .iter()
                .map(|q| self.locals[q.s].state.p[q.slot_s] - self.locals[q.t].state.p[q.slot_t])
                .collect(),
        }
    }

    /// `u = f + (1/alpha) div_s pt_s`, assembled subdomain by subdomain.
    pub fn primal(&self) -> Image {
        let alpha = self.params.outer.alpha;
        let cols = self.f.dims().cols;
        let mut values = vec![0.0; self.f.dims().pixel_count()];
        for (s, l) in self.locals.iter().enumerate() {
            let u: Vec<f64> = l.divp.iter().zip(&l.data).map(|(d, a)| (d + a) / alpha).collect();
            self.d.subdomain(s).scatter_pixels(&u, &mut values, cols);
        }
        Image::new(self.f.dims(), values).expect("dims")
    }

    /// Global field with each interface dof set to the mean of its two
    /// copies (exact whenever the jump vanishes).
    pub fn dual(&self) -> DualField {
        let mut out = vec![0.0; self.d.dims().edge_count()];
        for (sd, l) in self.d.subdomains().iter().zip(&self.locals) {
            for (&g, &x) in sd.interior_dofs().iter().zip(&l.state.p) {
                out[g] = x;
            }
        }
        for q in self.d.interface_pairs() {
            out[q.dof] = 0.5 * (self.locals[q.s].state.p[q.slot_s] + self.locals[q.t].state.p[q.slot_t]);
        }
        DualField::new(self.d.dims(), out).expect("dims")
    }

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

pub fn pdual_ddm_solve(f: &Image, d: &Decomposition, params: &PdualDdmParams) -> Result<SolveReport> {
    pdual_ddm_solve_with(f, d, params, &Sequential, &mut |_| {})
}

pub fn pdual_ddm_solve_with(
    f: &Image,
    d: &Decomposition,
    params: &PdualDdmParams,
    exec: &impl Executor,
    observer: &mut dyn FnMut(&TraceEntry),
) -> Result<SolveReport> {
    let mut solver = PdualDdm::new(f, d, params.clone())?;
    solver.run(exec, observer)?;
    Ok(solver.into_report())
}
