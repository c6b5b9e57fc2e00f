//! Runs one solver on one image and collects per-iteration timings.

use std::time::Instant;

use rofdd_core::pdual_ddm::{PdualDdm, PdualDdmParams};
use rofdd_core::primal_ddm::{PrimalDdm, PrimalDdmParams};
use rofdd_core::solvers::{accel_pd_full_observed, fista_dual_full_observed};
use rofdd_core::{Decomposition, Error, Image, PNorm, SolveReport, SolverParams, TraceEntry};

use crate::exec::{BatchTiming, PoolExecutor};
use crate::trace::TraceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Fista,
    AccelPd,
    PrimalDdm,
    PdualDdm,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fista => "fista",
            Self::AccelPd => "accel-pd",
            Self::PrimalDdm => "primal-ddm",
            Self::PdualDdm => "pdual-ddm",
        }
    }

    pub fn is_decomposed(self) -> bool {
        matches!(self, Self::PrimalDdm | Self::PdualDdm)
    }
}

/// Everything that determines a denoising run.
///
/// Full-domain solvers stop on `inner_tol` (the relative dual change rule)
/// and cap at `max_outer` iterations; the decompositions use `outer_tol` and
/// `max_outer` for the interface iteration and `inner_tol` and `max_inner`
/// for every subdomain solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub solver: SolverKind,
    pub alpha: f64,
    pub nsub: (usize, usize),
    pub pnorm: PNorm,
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
}

impl DenoiseConfig {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            solver,
            alpha: 10.0,
            nsub: (1, 1),
            pnorm: PNorm::One,
            outer_tol: 1e-3,
            inner_tol: 1e-5,
            max_outer: None,
            max_inner: None,
        }
    }

    pub fn full_params(&self) -> SolverParams {
        let mut p = match self.solver {
            SolverKind::Fista => SolverParams::fista(self.alpha),
            _ => SolverParams::accel_pd(self.alpha),
        };
        p.pnorm = self.pnorm;
        p.rel_tol = self.inner_tol;
        if let Some(m) = self.max_outer {
            p.max_iter = m;
        }
        p
    }

    pub fn primal_params(&self) -> PrimalDdmParams {
        let mut p = PrimalDdmParams::new(self.alpha);
        p.outer.pnorm = self.pnorm;
        p.inner.pnorm = self.pnorm;
        p.outer.rel_tol = self.outer_tol;
        p.inner.rel_tol = self.inner_tol;
        if let Some(m) = self.max_outer {
            p.outer.max_iter = m;
        }
        if let Some(m) = self.max_inner {
            p.inner.max_iter = m;
        }
        p
    }

    pub fn pdual_params(&self) -> PdualDdmParams {
        let mut p = PdualDdmParams::new(self.alpha);
        p.outer.pnorm = self.pnorm;
        p.local.pnorm = self.pnorm;
        p.outer.rel_tol = self.outer_tol;
        p.local.rel_tol = self.inner_tol;
        if let Some(m) = self.max_outer {
            p.outer.max_iter = m;
        }
        if let Some(m) = self.max_inner {
            p.local.max_iter = m;
        }
        p
    }

    /// Effective configuration as `key=value` pairs, solver constants
    /// included. Worker count is left out since it does not affect results.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("solver", self.solver.name().into());
        put("alpha", self.alpha.to_string());
        put("nsub", format!("{}x{}", self.nsub.0, self.nsub.1));
        put("pnorm", pnorm_name(self.pnorm).into());
        match self.solver {
            SolverKind::Fista | SolverKind::AccelPd => {
                let p = self.full_params();
                put("tol", p.rel_tol.to_string());
                put("max_iter", p.max_iter.to_string());
                put("lipschitz", p.lipschitz.to_string());
                if self.solver == SolverKind::AccelPd {
                    put("gamma", p.gamma.to_string());
                    put("tau0", p.tau0.to_string());
                    put("sigma0", p.sigma0.to_string());
                }
            }
            SolverKind::PrimalDdm => {
                let p = self.primal_params();
                put("outer_tol", p.outer.rel_tol.to_string());
                put("max_outer", p.outer.max_iter.to_string());
                put("outer_lipschitz", p.outer.lipschitz.to_string());
                put("inner_tol", p.inner.rel_tol.to_string());
                put("max_inner", p.inner.max_iter.to_string());
                put("inner_lipschitz", p.inner.lipschitz.to_string());
                put("inner_gamma", p.inner.gamma.to_string());
                put("inner_tau0", p.inner.tau0.to_string());
                put("inner_sigma0", p.inner.sigma0.to_string());
            }
            SolverKind::PdualDdm => {
                let p = self.pdual_params();
                put("outer_tol", p.outer.rel_tol.to_string());
                put("max_outer", p.outer.max_iter.to_string());
                put("outer_lipschitz", p.outer.lipschitz.to_string());
                put("sigma", p.outer.sigma.to_string());
                put("tau", p.outer.tau.to_string());
                put("inner_tol", p.local.rel_tol.to_string());
                put("max_inner", p.local.max_iter.to_string());
                put("inner_lipschitz", p.local.lipschitz.to_string());
                put("inner_gamma", p.local.gamma.to_string());
                put("inner_delta", p.local.delta.to_string());
            }
        }
        out
    }
}

pub fn pnorm_name(p: PNorm) -> &'static str {
    match p {
        PNorm::One => "1",
        PNorm::Two => "2",
    }
}

/// Cumulative clock readings at one trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Clock {
    pub wall: f64,
    /// Wall-clock with each batch of subdomain solves counted as its slowest
    /// solve, as if every subdomain had its own processor.
    pub virtual_wall: f64,
}

#[derive(Debug, Clone)]
pub struct Denoised {
    pub report: SolveReport,
    /// One reading per trace entry.
    pub clocks: Vec<Clock>,
}

impl Denoised {
    pub fn records(&self, reference_energy: Option<f64>, with_clocks: bool) -> Vec<TraceRecord> {
        self.report
            .trace
            .iter()
            .zip(&self.clocks)
            .map(|(e, c)| {
                let mut r = TraceRecord::from_entry(e, reference_energy);
                if with_clocks {
                    r.wall_clock_seconds = Some(c.wall);
                    r.virtual_wall_clock_seconds = Some(c.virtual_wall);
                }
                r
            })
            .collect()
    }
}

/// Tracks the two clocks from observer callbacks.
struct Stopwatch {
    start: Instant,
    last: Instant,
    virtual_wall: f64,
    clocks: Vec<Clock>,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            virtual_wall: 0.0,
            clocks: Vec::new(),
        }
    }

    /// Record a trace entry; `batches` are the subdomain solve batches run
    /// since the previous entry.
    fn tick(&mut self, batches: &[BatchTiming]) {
        let now = Instant::now();
        let step = (now - self.last).as_secs_f64();
        let batch: f64 = batches.iter().map(|b| b.batch).sum();
        let slowest: f64 = batches.iter().map(BatchTiming::slowest).sum();
        self.virtual_wall += (step - batch).max(0.0) + slowest;
        self.last = now;
        self.clocks.push(Clock {
            wall: (now - self.start).as_secs_f64(),
            virtual_wall: self.virtual_wall,
        });
    }
}

pub fn denoise(f: &Image, config: &DenoiseConfig, exec: &PoolExecutor) -> Result<Denoised, Error> {
    let mut watch = Stopwatch::new();
    exec.take_timings();
    let report = match config.solver {
        SolverKind::Fista | SolverKind::AccelPd => {
            if config.nsub != (1, 1) {
                return Err(Error::InvalidParameter {
                    name: "nsub",
                    reason: format!("{} is a full-domain solver; use 1x1", config.solver.name()),
                });
            }
            let params = config.full_params();
            let mut observe = |_: &TraceEntry| watch.tick(&[]);
            if config.solver == SolverKind::Fista {
                fista_dual_full_observed(f, &params, &mut observe)?
            } else {
                accel_pd_full_observed(f, &params, &mut observe)?
            }
        }
        SolverKind::PrimalDdm => {
            let d = Decomposition::build(f.dims(), config.nsub)?;
            let mut solver = PrimalDdm::new(f, &d, config.primal_params(), exec)?;
            solver.run(exec, &mut |_| watch.tick(&exec.take_timings()))?;
            solver.into_report()
        }
        SolverKind::PdualDdm => {
            let d = Decomposition::build(f.dims(), config.nsub)?;
            let mut solver = PdualDdm::new(f, &d, config.pdual_params())?;
            solver.run(exec, &mut |_| watch.tick(&exec.take_timings()))?;
            solver.into_report()
        }
    };
    let mut clocks = watch.clocks;
    // full-domain traces always end on the final iterate, which the solver
    // may record after the last observer call
    while clocks.len() < report.trace.len() {
        let last = clocks.last().copied().unwrap_or_default();
        clocks.push(last);
    }
    clocks.truncate(report.trace.len());
    Ok(Denoised { report, clocks })
}
