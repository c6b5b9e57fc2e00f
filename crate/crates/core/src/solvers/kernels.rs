//! Iteration kernels shared by the full-domain solvers and the subdomain
//! solvers. Everything here works on raw slices over a [`Patch`], so the same
//! code runs on the whole image and on a single subdomain.
//!
//! `data` is always the scaled datum `alpha * f` (plus any frozen boundary
//! flux contribution in the subdomain case); the dual energy being minimized
//! is `1/(2 alpha) * |div p + data|^2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::{project_box, project_pairs};
use crate::mesh::Patch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Projection {
    Box,
    Pairs,
}

impl Projection {
    pub(crate) fn apply(self, patch: &Patch, p: &mut [f64]) {
        match self {
            Projection::Box => project_box(p),
            Projection::Pairs => project_pairs(patch, p),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Stop {
    pub tol: f64,
    pub max_iter: usize,
}

impl Stop {
    /// Relative change `|p_new - p_old| / |p_new| < tol`. Never fires on the
    /// first iteration: from a zero start the primal-dual schemes leave `p`
    /// at zero for one step. A step that leaves `p` exactly unchanged (every
    /// moving dof pinned at the bound) only counts if the image block has
    /// settled too.
    fn reached(&self, k: usize, dp: (f64, f64), du: (f64, f64)) -> bool {
        let tol_sq = self.tol * self.tol;
        k >= 2 && dp.0 <= tol_sq * dp.1 && (dp.0 > 0.0 || du.0 <= tol_sq * du.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Outcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Iterate plus auxiliary primal image, reused across warm starts.
#[derive(Debug, Clone)]
pub(crate) struct PdState {
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    ubar: Vec<f64>,
    grad: Vec<f64>,
    divp: Vec<f64>,
}

impl PdState {
    pub(crate) fn zeros(patch: &Patch) -> Self {
        let n = patch.dof_count();
        let m = patch.pixel_count();
        Self {
            p: vec![0.0; n],
            u: vec![0.0; m],
            ubar: vec![0.0; m],
            grad: vec![0.0; n],
            divp: vec![0.0; m],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AccelPdConfig {
    pub alpha: f64,
    pub tau0: f64,
    pub sigma0: f64,
    pub gamma: f64,
}

/// Accelerated primal-dual iteration for `min_{p in C} J(p)` (the image
/// block is `alpha`-strongly convex, so its step shrinks as
/// `theta = 1/sqrt(1 + 2 gamma tau)`).
pub(crate) fn accel_pd(
    patch: &Patch,
    data: &[f64],
    cfg: &AccelPdConfig,
    proj: Projection,
    st: &mut PdState,
    stop: Stop,
    mut hook: impl FnMut(usize, &[f64]),
) -> Outcome {
    let alpha = cfg.alpha;
    let (mut tau, mut sigma) = (cfg.tau0, cfg.sigma0);
    st.ubar.copy_from_slice(&st.u);
    for k in 1..=stop.max_iter {
        patch.div_adj(&st.ubar, &mut st.grad);
        // grad <- candidate p
        for (g, p) in st.grad.iter_mut().zip(&st.p) {
            *g = p - sigma * *g;
        }
        proj.apply(patch, &mut st.grad);
        let dp = swap_measure(&mut st.p, &st.grad);

        patch.div(&st.p, &mut st.divp);
        let theta = 1.0 / libm::sqrt(1.0 + 2.0 * cfg.gamma * tau);
        let scale = 1.0 / (1.0 + tau * alpha);
        let mut du = (0.0, 0.0);
        for (((u, ub), d), a) in st.u.iter_mut().zip(&mut st.ubar).zip(&st.divp).zip(data) {
            let old = *u;
            let new = (old + tau * (d + a)) * scale;
            du.0 += (new - old) * (new - old);
            du.1 += new * new;
            *u = new;
            *ub = new + theta * (new - old);
        }
        tau *= theta;
        sigma /= theta;

        hook(k, &st.p);
        if stop.reached(k, dp, du) {
            return Outcome {
                iterations: k,
                converged: true,
            };
        }
    }
    Outcome {
        iterations: stop.max_iter,
        converged: false,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearPdConfig {
    pub alpha: f64,
    /// Weight of the proximal term `1/(2 tau) |p - p_hat|^2`.
    pub tau: f64,
    pub tau0: f64,
    pub sigma0: f64,
    pub theta0: f64,
}

/// Linearly convergent primal-dual iteration for
/// `min_{p in C} J(p) + 1/(2 tau) |p - p_hat|^2`.
pub(crate) fn linear_pd(
    patch: &Patch,
    data: &[f64],
    p_hat: &[f64],
    cfg: &LinearPdConfig,
    proj: Projection,
    st: &mut PdState,
    stop: Stop,
    mut hook: impl FnMut(usize, &[f64]),
) -> Outcome {
    let LinearPdConfig {
        alpha,
        tau,
        tau0,
        sigma0,
        theta0,
    } = *cfg;
    let inv = 1.0 / (tau + sigma0);
    let scale = 1.0 / (1.0 + tau0 * alpha);
    st.ubar.copy_from_slice(&st.u);
    for k in 1..=stop.max_iter {
        patch.div_adj(&st.ubar, &mut st.grad);
        for ((g, p), h) in st.grad.iter_mut().zip(&st.p).zip(p_hat) {
            *g = (tau * (p - sigma0 * *g) + sigma0 * h) * inv;
        }
        proj.apply(patch, &mut st.grad);
        let dp = swap_measure(&mut st.p, &st.grad);

        patch.div(&st.p, &mut st.divp);
        let mut du = (0.0, 0.0);
        for (((u, ub), d), a) in st.u.iter_mut().zip(&mut st.ubar).zip(&st.divp).zip(data) {
            let old = *u;
            let new = (old + tau0 * (d + a)) * scale;
            du.0 += (new - old) * (new - old);
            du.1 += new * new;
            *u = new;
            *ub = new + theta0 * (new - old);
        }

        hook(k, &st.p);
        if stop.reached(k, dp, du) {
            return Outcome {
                iterations: k,
                converged: true,
            };
        }
    }
    Outcome {
        iterations: stop.max_iter,
        converged: false,
    }
}

/// FISTA iterate: main sequence `p`, extrapolated point `q`, momentum `t`.
#[derive(Debug, Clone)]
pub(crate) struct FistaState {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
    w: Vec<f64>,
    next: Vec<f64>,
}

impl FistaState {
    pub(crate) fn zeros(patch: &Patch) -> Self {
        let n = patch.dof_count();
        Self {
            p: vec![0.0; n],
            q: vec![0.0; n],
            t: 1.0,
            w: vec![0.0; patch.pixel_count()],
            next: vec![0.0; n],
        }
    }
}

/// Next FISTA momentum scalar.
pub(crate) fn next_t(t: f64) -> f64 {
    (1.0 + libm::sqrt(1.0 + 4.0 * t * t)) / 2.0
}

/// Projected FISTA for `min_{p in C} J(p)` with the alpha-cancelled step
/// `q - (1/L) div*(div q + data)`.
pub(crate) fn fista(
    patch: &Patch,
    data: &[f64],
    lipschitz: f64,
    proj: Projection,
    st: &mut FistaState,
    stop: Stop,
    mut hook: impl FnMut(usize, &[f64]),
) -> Outcome {
    let step = 1.0 / lipschitz;
    for k in 1..=stop.max_iter {
        patch.div(&st.q, &mut st.w);
        for (w, a) in st.w.iter_mut().zip(data) {
            *w += a;
        }
        patch.div_adj(&st.w, &mut st.next);
        for (n, q) in st.next.iter_mut().zip(&st.q) {
            *n = q - step * *n;
        }
        proj.apply(patch, &mut st.next);
        let t_new = next_t(st.t);
        let beta = (st.t - 1.0) / t_new;
        let mut diff_sq = 0.0;
        let mut norm_sq = 0.0;
        for ((p, q), n) in st.p.iter_mut().zip(&mut st.q).zip(&st.next) {
            let d = n - *p;
            diff_sq += d * d;
            norm_sq += n * n;
            *q = n + beta * d;
            *p = *n;
        }
        st.t = t_new;

        hook(k, &st.p);
        // plain relative change; FISTA moves off zero on its first step
        if diff_sq <= stop.tol * stop.tol * norm_sq {
            return Outcome {
                iterations: k,
                converged: true,
            };
        }
    }
    Outcome {
        iterations: stop.max_iter,
        converged: false,
    }
}

/// Copy `new` into `p`, returning `(|new - p|^2, |new|^2)`.
fn swap_measure(p: &mut [f64], new: &[f64]) -> (f64, f64) {
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for (a, b) in p.iter_mut().zip(new) {
        let d = b - *a;
        diff_sq += d * d;
        norm_sq += b * b;
        *a = *b;
    }
    (diff_sq, norm_sq)
}
