//! Energies, gradient, primal recovery and the full-domain solvers.
//!
//! Three full-domain solvers are provided:
//!
//! * [`fista_dual_full`]: projected FISTA on the dual energy;
//! * [`accel_pd_full`]: the `O(1/n^2)` accelerated primal-dual scheme, also
//!   used as the subdomain engine of the primal decomposition;
//! * [`linear_pd_full`]: the linearly convergent primal-dual scheme for the
//!   proximally regularized problem, the subdomain engine of the primal-dual
//!   decomposition.
//!
//! All start from `p = 0, u = 0` and stop on the relative change of the dual
//! iterate or on `max_iter`.

pub(crate) mod kernels;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::PNorm;
use crate::error::{invalid, Error, Result};
use crate::mesh::{DualField, GridDims, Image, Patch};

use kernels::{AccelPdConfig, FistaState, LinearPdConfig, PdState, Projection, Stop};

/// Parameters shared by all solvers. Each solver reads the subset it needs
/// and validates it before running; see the per-solver constructors for the
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Fidelity weight.
    pub alpha: f64,
    /// Step bound `L`.
    pub lipschitz: f64,
    /// Primal-dual decomposition primal step, also the proximal weight of the
    /// linearly convergent local solver.
    pub tau: f64,
    /// Primal-dual decomposition multiplier step.
    pub sigma: f64,
    /// Image-block step of the accelerated primal-dual scheme.
    pub tau0: f64,
    /// Dual-block step of the accelerated primal-dual scheme.
    pub sigma0: f64,
    /// Strong-convexity modulus used by the image block (`gamma <= alpha`).
    pub gamma: f64,
    /// Strong-convexity modulus used by the dual block (`delta <= 1/tau`).
    pub delta: f64,
    /// Extrapolation weight of the linear scheme; `None` means `1/(1+mu)`.
    pub theta0: Option<f64>,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub pnorm: PNorm,
    /// Record every `trace_stride`-th iterate (the last one is always kept).
    pub trace_stride: usize,
}

impl SolverParams {
    fn base(alpha: f64) -> Self {
        Self {
            alpha,
            lipschitz: 8.0,
            tau: 0.0,
            sigma: 0.0,
            tau0: 0.0,
            sigma0: 0.0,
            gamma: 0.0,
            delta: 0.0,
            theta0: None,
            max_iter: 100_000,
            rel_tol: 1e-5,
            pnorm: PNorm::One,
            trace_stride: 1,
        }
    }

    /// FISTA defaults: `L = 8`.
    pub fn fista(alpha: f64) -> Self {
        Self::base(alpha)
    }

    /// Accelerated primal-dual defaults: `L = 8`, `gamma = 0.125 alpha`,
    /// `tau0 = 0.01`, `sigma0 = 1/(L tau0)`.
    pub fn accel_pd(alpha: f64) -> Self {
        let mut p = Self::base(alpha);
        p.gamma = 0.125 * alpha;
        p.tau0 = 0.01;
        p.sigma0 = 1.0 / (p.lipschitz * p.tau0);
        p
    }

    /// Linear primal-dual defaults for proximal weight `tau`: `L = 8`,
    /// `gamma = 0.5 alpha`, `delta = 1/tau`, `theta0 = 1/(1+mu)`.
    pub fn linear_pd(alpha: f64, tau: f64) -> Self {
        let mut p = Self::base(alpha);
        p.tau = tau;
        p.gamma = 0.5 * alpha;
        p.delta = 1.0 / tau;
        p
    }

    /// Outer parameters of the primal decomposition: `L = 4`, relative energy
    /// tolerance `1e-3`, at most 1000 outer iterations.
    pub fn primal_ddm(alpha: f64) -> Self {
        let mut p = Self::base(alpha);
        p.lipschitz = 4.0;
        p.rel_tol = 1e-3;
        p.max_iter = 1000;
        p
    }

    /// Outer parameters of the primal-dual decomposition: `L = 2`,
    /// `sigma = 0.02`, `tau = 1/(L sigma) = 25`.
    pub fn pdual_ddm(alpha: f64) -> Self {
        let mut p = Self::base(alpha);
        p.lipschitz = 2.0;
        p.sigma = 0.02;
        p.tau = 1.0 / (p.lipschitz * p.sigma);
        p.rel_tol = 1e-3;
        p.max_iter = 1000;
        p
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn check_common(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(invalid("rel_tol", "must be nonnegative"));
        }
        if self.trace_stride == 0 {
            return Err(invalid("trace_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn validate_fista(&self) -> Result<()> {
        self.check_common()?;
        if !(self.lipschitz >= 8.0) {
            return Err(invalid("lipschitz", "FISTA on the full domain needs L >= 8"));
        }
        Ok(())
    }

    pub fn validate_accel_pd(&self) -> Result<()> {
        self.check_common()?;
        if !(self.lipschitz >= 8.0) {
            return Err(invalid("lipschitz", "needs L >= 8"));
        }
        if !(self.tau0 > 0.0 && self.sigma0 > 0.0) {
            return Err(invalid("tau0/sigma0", "must be positive"));
        }
        if !close(self.tau0 * self.sigma0 * self.lipschitz, 1.0) {
            return Err(invalid("sigma0", "sigma0 * tau0 must equal 1/L"));
        }
        if !(self.gamma > 0.0 && self.gamma <= self.alpha) {
            return Err(invalid("gamma", "needs 0 < gamma <= alpha"));
        }
        Ok(())
    }

    /// `mu = 2 sqrt(gamma delta) / L` of the linear scheme.
    pub fn mu(&self) -> f64 {
        2.0 * libm::sqrt(self.gamma * self.delta) / self.lipschitz
    }

    pub fn validate_linear_pd(&self) -> Result<()> {
        self.check_common()?;
        if !(self.lipschitz >= 8.0) {
            return Err(invalid("lipschitz", "needs L >= 8"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", "must be positive and finite"));
        }
        if !(self.gamma > 0.0 && self.gamma <= self.alpha) {
            return Err(invalid("gamma", "needs 0 < gamma <= alpha"));
        }
        if !(self.delta > 0.0 && self.delta * self.tau <= 1.0 + 1e-12) {
            return Err(invalid("delta", "needs 0 < delta <= 1/tau"));
        }
        if let Some(theta) = self.theta0 {
            let lo = 1.0 / (1.0 + self.mu());
            if !(theta >= lo && theta <= 1.0) {
                return Err(invalid(
                    "theta0",
                    format!("must lie in [{lo}, 1], got {theta}"),
                ));
            }
        }
        Ok(())
    }

    pub fn validate_primal_ddm(&self) -> Result<()> {
        self.check_common()?;
        if !(self.lipschitz >= 4.0) {
            return Err(invalid("lipschitz", "the primal decomposition needs L >= 4"));
        }
        if self.pnorm != PNorm::One {
            return Err(invalid("pnorm", "domain decomposition supports p = 1 only"));
        }
        Ok(())
    }

    pub fn validate_pdual_ddm(&self) -> Result<()> {
        self.check_common()?;
        if !(self.lipschitz >= 2.0) {
            return Err(invalid("lipschitz", "the primal-dual decomposition needs L >= 2"));
        }
        if !(self.tau > 0.0 && self.sigma > 0.0) {
            return Err(invalid("tau/sigma", "must be positive"));
        }
        if !close(self.tau * self.sigma * self.lipschitz, 1.0) {
            return Err(invalid("sigma", "tau * sigma must equal 1/L"));
        }
        if self.pnorm != PNorm::One {
            return Err(invalid("pnorm", "domain decomposition supports p = 1 only"));
        }
        Ok(())
    }

    pub(crate) fn accel_config(&self) -> AccelPdConfig {
        AccelPdConfig {
            alpha: self.alpha,
            tau0: self.tau0,
            sigma0: self.sigma0,
            gamma: self.gamma,
        }
    }

    pub(crate) fn linear_config(&self) -> LinearPdConfig {
        let mu = self.mu();
        LinearPdConfig {
            alpha: self.alpha,
            tau: self.tau,
            tau0: mu / (2.0 * self.gamma),
            sigma0: mu / (2.0 * self.delta),
            theta0: self.theta0.unwrap_or(1.0 / (1.0 + mu)),
        }
    }

    pub(crate) fn stop(&self) -> Stop {
        Stop {
            tol: self.rel_tol,
            max_iter: self.max_iter,
        }
    }

    pub(crate) fn projection(&self) -> Projection {
        match self.pnorm {
            PNorm::One => Projection::Box,
            PNorm::Two => Projection::Pairs,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIter,
}

/// One recorded iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub dual_energy: f64,
    pub primal_energy: f64,
    /// Interface jump `|B p|` (primal-dual decomposition only).
    pub jump_norm: Option<f64>,
    /// Largest subdomain iteration count in this outer step (0 for
    /// full-domain solvers).
    pub max_inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub dual: DualField,
    pub primal: Image,
    /// Starts with the initial state at iteration 0.
    pub trace: Vec<TraceEntry>,
    pub stop_reason: StopReason,
    /// Largest subdomain iteration count over the whole run.
    pub max_inner_iterations: usize,
}

/// `J(p) = 1/(2 alpha) * sum_T (div p + alpha f)^2`.
pub fn energy_dual(p: &DualField, f: &Image, alpha: f64) -> f64 {
    assert_eq!(p.dims(), f.dims(), "dual field and image dims differ");
    let d = crate::mesh::div(p);
    dual_energy_from_div(d.values(), f.values(), alpha)
}

pub(crate) fn dual_energy_from_div(divp: &[f64], f: &[f64], alpha: f64) -> f64 {
    let s: f64 = divp
        .iter()
        .zip(f)
        .map(|(d, f)| {
            let w = d + alpha * f;
            w * w
        })
        .sum();
    s / (2.0 * alpha)
}

/// Discrete total variation with forward differences (zero past the last
/// row/column).
pub fn total_variation(u: &Image, pn: PNorm) -> f64 {
    let GridDims { rows, cols } = u.dims();
    let v = u.values();
    let mut s = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let c = v[i * cols + j];
            let a = if i + 1 < rows { v[(i + 1) * cols + j] - c } else { 0.0 };
            let b = if j + 1 < cols { v[i * cols + j + 1] - c } else { 0.0 };
            s += match pn {
                PNorm::One => a.abs() + b.abs(),
                PNorm::Two => libm::sqrt(a * a + b * b),
            };
        }
    }
    s
}

/// `E(u) = alpha/2 |u - f|^2 + TV_p(u)`.
pub fn energy_primal(u: &Image, f: &Image, alpha: f64, pn: PNorm) -> f64 {
    assert_eq!(u.dims(), f.dims(), "image dims differ");
    let fid: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    0.5 * alpha * fid + total_variation(u, pn)
}

/// `grad J(p) = (1/alpha) div*(div p + alpha f)`.
pub fn grad_j(p: &DualField, f: &Image, alpha: f64) -> DualField {
    assert_eq!(p.dims(), f.dims(), "dual field and image dims differ");
    let dims = p.dims();
    let mut w = crate::mesh::div(p).into_values();
    for (w, f) in w.iter_mut().zip(f.values()) {
        *w = (*w + alpha * f) / alpha;
    }
    crate::mesh::div_adj(&Image::new(dims, w).expect("dims"))
}

/// `u = f + (1/alpha) div p`.
pub fn recover_primal(p: &DualField, f: &Image, alpha: f64) -> Image {
    assert_eq!(p.dims(), f.dims(), "dual field and image dims differ");
    let d = crate::mesh::div(p);
    recover_from_div(d.values(), f, alpha)
}

pub(crate) fn recover_from_div(divp: &[f64], f: &Image, alpha: f64) -> Image {
    let values = f
        .values()
        .iter()
        .zip(divp)
        .map(|(f, d)| f + d / alpha)
        .collect();
    Image::new(f.dims(), values).expect("dims")
}

fn scaled(f: &Image, alpha: f64) -> Vec<f64> {
    f.values().iter().map(|v| alpha * v).collect()
}

/// Shared driver for the full-domain solvers: runs `step` (one of the
/// kernels) while recording energies.
struct FullTracer<'a> {
    f: &'a Image,
    params: &'a SolverParams,
    patch: Patch,
    divp: Vec<f64>,
    trace: Vec<TraceEntry>,
    observer: &'a mut dyn FnMut(&TraceEntry),
}

impl<'a> FullTracer<'a> {
    fn new(f: &'a Image, params: &'a SolverParams, observer: &'a mut dyn FnMut(&TraceEntry)) -> Self {
        let patch = Patch::closed(f.dims());
        Self {
            f,
            params,
            patch,
            divp: vec![0.0; patch.pixel_count()],
            trace: Vec::new(),
            observer,
        }
    }

    fn record(&mut self, k: usize, p: &[f64]) {
        self.patch.div(p, &mut self.divp);
        let alpha = self.params.alpha;
        let u = recover_from_div(&self.divp, self.f, alpha);
        let entry = TraceEntry {
            iteration: k,
            dual_energy: dual_energy_from_div(&self.divp, self.f.values(), alpha),
            primal_energy: energy_primal(&u, self.f, alpha, self.params.pnorm),
            jump_norm: None,
            max_inner_iterations: 0,
        };
        (self.observer)(&entry);
        self.trace.push(entry);
    }

    fn maybe_record(&mut self, k: usize, p: &[f64]) {
        if k % self.params.trace_stride == 0 {
            self.record(k, p);
        }
    }

    fn finish(mut self, p: Vec<f64>, outcome: kernels::Outcome) -> Result<SolveReport> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "full-domain solver" });
        }
        if self.trace.last().map(|e| e.iteration) != Some(outcome.iterations) {
            self.record(outcome.iterations, &p);
        }
        let dims = self.f.dims();
        let dual = DualField::new(dims, p)?;
        let primal = recover_primal(&dual, self.f, self.params.alpha);
        Ok(SolveReport {
            iterations: outcome.iterations,
            dual,
            primal,
            trace: self.trace,
            stop_reason: if outcome.converged {
                StopReason::Tolerance
            } else {
                StopReason::MaxIter
            },
            max_inner_iterations: 0,
        })
    }
}

pub fn fista_dual_full(f: &Image, params: &SolverParams) -> Result<SolveReport> {
    fista_dual_full_observed(f, params, &mut |_| {})
}

/// [`fista_dual_full`] calling `observer` on every recorded trace entry.
pub fn fista_dual_full_observed(
    f: &Image,
    params: &SolverParams,
    observer: &mut dyn FnMut(&TraceEntry),
) -> Result<SolveReport> {
    params.validate_fista()?;
    let mut tr = FullTracer::new(f, params, observer);
    let patch = tr.patch;
    let data = scaled(f, params.alpha);
    let mut st = FistaState::zeros(&patch);
    tr.record(0, &st.p);
    let outcome = kernels::fista(
        &patch,
        &data,
        params.lipschitz,
        params.projection(),
        &mut st,
        params.stop(),
        |k, p| tr.maybe_record(k, p),
    );
    tr.finish(st.p, outcome)
}

pub fn accel_pd_full(f: &Image, params: &SolverParams) -> Result<SolveReport> {
    accel_pd_full_observed(f, params, &mut |_| {})
}

pub fn accel_pd_full_observed(
    f: &Image,
    params: &SolverParams,
    observer: &mut dyn FnMut(&TraceEntry),
) -> Result<SolveReport> {
    params.validate_accel_pd()?;
    let mut tr = FullTracer::new(f, params, observer);
    let patch = tr.patch;
    let data = scaled(f, params.alpha);
    let mut st = PdState::zeros(&patch);
    tr.record(0, &st.p);
    let outcome = kernels::accel_pd(
        &patch,
        &data,
        &params.accel_config(),
        params.projection(),
        &mut st,
        params.stop(),
        |k, p| tr.maybe_record(k, p),
    );
    tr.finish(st.p, outcome)
}

/// Solves `min_{p in C} J(p) + 1/(2 tau) |p - p_hat|^2` with `tau =
/// params.tau` by the linearly convergent primal-dual scheme.
pub fn linear_pd_full(f: &Image, p_hat: &DualField, params: &SolverParams) -> Result<SolveReport> {
    params.validate_linear_pd()?;
    if p_hat.dims() != f.dims() {
        return Err(Error::DimensionMismatch {
            expected: f.dims().edge_count(),
            found: p_hat.values().len(),
        });
    }
    let mut observer = |_: &TraceEntry| {};
    let mut tr = FullTracer::new(f, params, &mut observer);
    let patch = tr.patch;
    let data = scaled(f, params.alpha);
    let mut st = PdState::zeros(&patch);
    tr.record(0, &st.p);
    let outcome = kernels::linear_pd(
        &patch,
        &data,
        p_hat.values(),
        &params.linear_config(),
        params.projection(),
        &mut st,
        params.stop(),
        |k, p| tr.maybe_record(k, p),
    );
    tr.finish(st.p, outcome)
}

/// Number of accelerated primal-dual iterations behind [`reference_minimum`].
pub const REFERENCE_ITERATIONS: usize = 10_000;

/// Approximate `min E` by a fixed-length run of the accelerated primal-dual
/// scheme on the full domain (tolerance is ignored; the run only ends early
/// if the iterate stops changing exactly).
pub fn reference_minimum(f: &Image, params: &SolverParams) -> Result<f64> {
    params.validate_accel_pd()?;
    let patch = Patch::closed(f.dims());
    let data = scaled(f, params.alpha);
    let mut st = PdState::zeros(&patch);
    let stop = Stop {
        tol: 0.0,
        max_iter: params.max_iter.max(1),
    };
    kernels::accel_pd(
        &patch,
        &data,
        &params.accel_config(),
        params.projection(),
        &mut st,
        stop,
        |_, _| {},
    );
    let dual = DualField::new(f.dims(), st.p)?;
    let u = recover_primal(&dual, f, params.alpha);
    let e = energy_primal(&u, f, params.alpha, params.pnorm);
    if !e.is_finite() {
        return Err(Error::NonFinite { context: "reference_minimum" });
    }
    Ok(e)
}

/// [`reference_minimum`] with the accelerated defaults and
/// [`REFERENCE_ITERATIONS`] iterations.
pub fn reference_minimum_default(f: &Image, alpha: f64, pn: PNorm) -> Result<f64> {
    let mut params = SolverParams::accel_pd(alpha).with_max_iter(REFERENCE_ITERATIONS);
    params.pnorm = pn;
    reference_minimum(f, &params)
}
