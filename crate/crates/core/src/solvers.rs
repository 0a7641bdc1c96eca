//! Constrained critical points on the mass sphere: the local minimizer u⁺ and
//! the Pohozaev-manifold minimizer u⁻.
//!
//! Both solvers run a preconditioned projected descent first (energy for u⁺,
//! the fiber-maximized energy J(v) = max_s E(s ⋆ v) for u⁻) and finish with
//! Newton iterations on the bordered stationarity system
//! `∂E/∂u − ℓ ∂M/∂u = 0`, `M(u) = a^p`, with λ = pℓ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{fiber_points, psi, Components, DiscreteFunctional, FiberClass, Tridiag};
use crate::params::{Params, RegimeKind};
use crate::radial::{
    fiber_rescale, mass_normalize, GridSpec, NormTriple, RadialFunction, RadialGrid,
};
use crate::thresholds::{sobolev_constant, ThresholdSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Grid used when no initial profile is supplied.
    pub grid: GridSpec,
    /// Projected-gradient tolerance relative to max(1, A).
    pub tol_g: f64,
    /// Bound on |P|/A.
    pub tol_pohozaev: f64,
    pub max_iter: usize,
    /// Resize R_max from the decay rate implied by λ.
    pub adapt_grid: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grid: GridSpec::new(4096, 60.0, 9.0),
            tol_g: 1e-8,
            tol_pohozaev: 1e-3,
            max_iter: 50_000,
            adapt_grid: true,
        }
    }
}

/// Outcome of a constrained solve. The profile is written separately as CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SolverResult {
    #[serde(skip_serializing)]
    pub profile: RadialFunction,
    pub lambda: f64,
    pub level: f64,
    pub pohozaev_residual: f64,
    pub identity_residual: f64,
    pub manifold_sign: ManifoldSign,
    pub iterations: usize,
    pub newton_steps: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub tol_g: f64,
    pub triple: NormTriple,
    pub grid: GridSpec,
    /// Projected-gradient norm history (thinned to at most 256 entries).
    pub diagnostics: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Energy,
    Reduced,
}

struct Eval {
    value: f64,
    /// Fiber maximizer in reduced mode, 0 otherwise.
    t: f64,
    grad: Vec<f64>,
    comps: Components,
}

/// Stationarity data of E at a profile.
struct Kkt {
    comps: Components,
    ell: f64,
    rnorm: f64,
}

struct Solver<'a> {
    params: Params,
    th: &'a ThresholdSet,
    opts: SolverOptions,
    sign: ManifoldSign,
    history: Vec<f64>,
    iterations: usize,
    newton_steps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn energy_grad(c: &Components, params: &Params) -> Vec<f64> {
    let (p, q, ps, mu) = (params.p, params.q, params.p_star(), params.mu);
    (0..c.ga.len()).map(|i| c.ga[i] / p - mu * c.gb[i] / q - c.gc[i] / ps).collect()
}

/// Optimal multiplier and residual norm of `g − ℓ gm` in the lumped metric.
fn project_w(g: &[f64], gm: &[f64], w: &[f64]) -> (f64, f64) {
    let m = w.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m {
        num += g[i] * gm[i] / w[i];
        den += gm[i] * gm[i] / w[i];
    }
    let ell = if den > 0.0 { num / den } else { 0.0 };
    let r2: f64 = (0..m).map(|i| (g[i] - ell * gm[i]).powi(2) / w[i]).sum();
    (ell, r2.sqrt())
}

/// Fixes the pinned node and restores the prescribed mass.
fn retract(u: &RadialFunction, p: f64, a: f64) -> Result<RadialFunction> {
    let mut v = u.clone();
    let last = v.values().len() - 1;
    v.values_mut()[last] = 0.0;
    mass_normalize(&v, p, a)
}

fn kkt(df: &DiscreteFunctional, u: &RadialFunction) -> Kkt {
    let comps = df.components(u);
    let ge = energy_grad(&comps, &df.params);
    let (ell, rnorm) = project_w(&ge, &comps.gm, u.grid().node_weights());
    Kkt { comps, ell, rnorm }
}

/// First radius where u falls below half its maximum.
fn half_radius(u: &RadialFunction) -> f64 {
    let top = u.sup_norm();
    let r = u.grid().nodes();
    for (i, v) in u.values().iter().enumerate() {
        if v.abs() < 0.5 * top {
            return r[i];
        }
    }
    u.grid().r_max()
}

impl<'a> Solver<'a> {
    fn df(&self, u: &RadialFunction) -> DiscreteFunctional {
        DiscreteFunctional::new(self.params, u.grid().r_max())
    }

    fn evaluate(&self, df: &DiscreteFunctional, u: &RadialFunction, mode: Mode) -> Option<Eval> {
        let comps = df.components(u);
        let pr = &self.params;
        let (p, q, ps, mu, qg) = (pr.p, pr.q, pr.p_star(), pr.mu, pr.q_gamma());
        match mode {
            Mode::Energy => {
                let t = &comps.triple;
                let value = t.a / p - mu * t.b / q - t.c / ps;
                let grad = energy_grad(&comps, pr);
                Some(Eval { value, t: 0.0, grad, comps })
            }
            Mode::Reduced => {
                let fp = fiber_points(&comps.triple, pr).ok()?;
                let t = fp.t_u?;
                let value = psi(&comps.triple, t, pr).value;
                let (ea, eb, ec) = ((p * t).exp() / p, mu * (qg * t).exp() / q, (ps * t).exp() / ps);
                let grad = (0..comps.ga.len()).map(|i| ea * comps.ga[i] - eb * comps.gb[i] - ec * comps.gc[i]).collect();
                Some(Eval { value, t, grad, comps })
            }
        }
    }

    /// Preconditioner: linearized gradient term plus a mass shift of size |λ|.
    fn preconditioner(&self, df: &DiscreteFunctional, u: &RadialFunction, ev: &Eval) -> Tridiag {
        let pr = &self.params;
        let tr = &ev.comps.triple;
        let (p, ps, qg) = (pr.p, pr.p_star(), pr.q_gamma());
        let t = ev.t;
        let at = tr.a * (p * t).exp();
        let lam = (at - pr.mu * tr.b * (qg * t).exp() - tr.c * (ps * t).exp()) / pr.mass();
        let shift = lam.abs().max(1e-3 * at / pr.mass()).max(1e-12);
        let mut k = df.gradient_hessian(u);
        let scale = (p * t).exp();
        let w = u.grid().node_weights();
        for (d, wi) in k.diag.iter_mut().zip(w) {
            *d = *d * scale + shift * wi;
        }
        for x in k.sub.iter_mut().chain(k.sup.iter_mut()) {
            *x *= scale;
        }
        k
    }

    fn record(&mut self, v: f64) {
        self.history.push(v);
    }

    /// Preconditioned projected descent. Returns the final iterate and
    /// whether the line search stalled (a sign that Newton should take over).
    fn descend(&mut self, mut u: RadialFunction, mode: Mode, budget: usize) -> Result<(RadialFunction, bool)> {
        let (p, a) = (self.params.p, self.params.a);
        let df = self.df(&u);
        let mut ev = self
            .evaluate(&df, &u, mode)
            .ok_or_else(|| Error::Threshold("fiber map has no maximum at the initial profile".into()))?;
        let mut step: f64 = 1.0;
        let m = u.grid().cells();
        for _ in 0..budget {
            self.iterations += 1;
            let w = u.grid().node_weights();
            let (_, rn) = project_w(&ev.grad, &ev.comps.gm, w);
            self.record(rn);
            let k = self.preconditioner(&df, &u, &ev);
            let ze = k.solve(&ev.grad[..m])?;
            let zm = k.solve(&ev.comps.gm[..m])?;
            let ell = dot(&ev.comps.gm[..m], &ze) / dot(&ev.comps.gm[..m], &zm);
            let d: Vec<f64> = (0..m).map(|i| -(ze[i] - ell * zm[i])).collect();
            let slope = dot(&ev.grad[..m], &d);
            if !(slope < 0.0) || -slope <= 1e-15 * ev.value.abs().max(1e-300) {
                return Ok((u, true));
            }
            let mut t = (2.0 * step).min(1.0);
            let mut accepted = None;
            for _ in 0..40 {
                let mut vals = u.values().to_vec();
                for i in 0..m {
                    vals[i] += t * d[i];
                }
                if let Ok(c) = retract(&u.with_values(vals), p, a) {
                    if let Some(e2) = self.evaluate(&df, &c, mode) {
                        if e2.value <= ev.value + 1e-4 * t * slope {
                            accepted = Some((c, e2));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            let Some((c, e2)) = accepted else {
                return Ok((u, true));
            };
            step = t;
            u = c;
            ev = e2;
            if mode == Mode::Energy && self.sign == ManifoldSign::Plus {
                if let Some(r0) = self.th.r0 {
                    if ev.comps.triple.a.powf(1.0 / p) > 0.95 * r0 {
                        let fp = fiber_points(&ev.comps.triple, &self.params)?;
                        if let Some(s) = fp.s_u {
                            u = fiber_rescale(&u, s, p)?;
                            ev = self.evaluate(&df, &u, mode).ok_or_else(|| Error::Solver("lost fiber".into()))?;
                        }
                    }
                }
            }
            if mode == Mode::Reduced && ev.t.abs() > 0.5 {
                u = fiber_rescale(&u, ev.t, p)?;
                ev = self.evaluate(&df, &u, mode).ok_or_else(|| Error::Solver("lost fiber maximum".into()))?;
            }
            let rel = -slope / ev.value.abs().max(1e-300);
            if rel < 1e-9 {
                return Ok((u, true));
            }
        }
        Ok((u, false))
    }

    fn tol_abs(&self, a_val: f64) -> f64 {
        self.opts.tol_g * a_val.max(1.0)
    }

    fn pohozaev_rel(&self, t: &NormTriple) -> f64 {
        crate::functionals::pohozaev_of(t, &self.params).abs() / t.a
    }

    /// Damped Newton on the bordered stationarity system.
    fn newton(&mut self, u0: &RadialFunction, max_steps: usize) -> Result<RadialFunction> {
        let (p, a) = (self.params.p, self.params.a);
        let df = self.df(u0);
        let mut u = u0.clone();
        let mut cur = kkt(&df, &u);
        let m = u.grid().cells();
        let mut trail = vec![cur.rnorm];
        for _ in 0..max_steps {
            let tol = self.tol_abs(cur.comps.triple.a);
            // Linear-rate stagnation (non-smooth Hessian for p ≠ 2).
            if trail.len() > 10 && cur.rnorm > 0.5 * trail[trail.len() - 11] && cur.rnorm > 100.0 * tol {
                return Err(Error::Solver(format!("Newton stagnated at residual {:.3e}", cur.rnorm)));
            }
            if cur.rnorm <= tol {
                return Ok(u);
            }
            self.newton_steps += 1;
            let ge = energy_grad(&cur.comps, &self.params);
            let gm = &cur.comps.gm[..m];
            let f1: Vec<f64> = (0..m).map(|i| -(ge[i] - cur.ell * gm[i])).collect();
            let h = df.lagrangian_hessian(&u, cur.ell);
            let x1 = h.solve(&f1)?;
            let x2 = h.solve(gm)?;
            let den = dot(gm, &x2);
            if !(den.abs() > 0.0) {
                return Err(Error::Solver("singular bordered system".into()));
            }
            let dl = (a.powf(p) - cur.comps.mass - dot(gm, &x1)) / den;
            let du: Vec<f64> = (0..m).map(|i| x1[i] + dl * x2[i]).collect();
            let mut s = 1.0;
            let mut next = None;
            for _ in 0..8 {
                let mut vals = u.values().to_vec();
                for i in 0..m {
                    vals[i] += s * du[i];
                }
                if let Ok(c) = retract(&u.with_values(vals), p, a) {
                    let kc = kkt(&df, &c);
                    if kc.rnorm.is_finite() && kc.rnorm < (1.0 - 1e-4 * s) * cur.rnorm {
                        next = Some((c, kc));
                        break;
                    }
                }
                s *= 0.5;
            }
            match next {
                Some((c, kc)) => {
                    u = c;
                    cur = kc;
                    log::trace!("newton: step {s} residual {:.3e}", cur.rnorm);
                    trail.push(cur.rnorm);
                    self.record(cur.rnorm);
                }
                None => {
                    // Roundoff floor: accept a stalled iterate near tolerance.
                    if cur.rnorm <= 100.0 * tol {
                        return Ok(u);
                    }
                    return Err(Error::Solver(format!("Newton stalled at residual {:.3e}", cur.rnorm)));
                }
            }
        }
        if cur.rnorm <= 100.0 * self.tol_abs(cur.comps.triple.a) {
            Ok(u)
        } else {
            Err(Error::Solver("Newton step budget exhausted".into()))
        }
    }

    /// Rebuilds the grid so that R_max covers the exponential tail implied by λ.
    fn adapt(&self, u: &RadialFunction, mode: Mode) -> Result<Option<RadialFunction>> {
        if !self.opts.adapt_grid {
            return Ok(None);
        }
        let df = self.df(u);
        let Some(ev) = self.evaluate(&df, u, mode) else {
            return Ok(None);
        };
        let pr = &self.params;
        let tr = ev.comps.triple;
        let t = ev.t;
        let lam = (tr.a * (pr.p * t).exp() - pr.mu * tr.b * (pr.q_gamma() * t).exp() - tr.c * (pr.p_star() * t).exp())
            / pr.mass();
        if !(lam < 0.0) {
            return Ok(None);
        }
        // Decay rate of the linearized tail, pulled back to the current scale.
        let k = (-lam / (pr.p - 1.0)).powf(1.0 / pr.p) / t.exp();
        let rh = half_radius(u);
        let need = rh + 40.0 / k;
        let g = u.grid();
        let rm = g.r_max();
        if need <= 1.1 * rm && need >= 0.3 * rm {
            return Ok(None);
        }
        let m = g.cells();
        let r1 = g.first_cell().min(rh / 400.0).min(0.5 * need / m as f64);
        let spec = GridSpec::with_first_cell(m, need, r1)?;
        let grid = Arc::new(RadialGrid::new(g.dim(), spec)?);
        log::debug!("regrid: R_max {rm:.3} -> {need:.3} (lambda ~ {lam:.3e})");
        Ok(Some(retract(&u.resample(grid)?, pr.p, pr.a)?))
    }

    fn run(&mut self, init: RadialFunction) -> Result<SolverResult> {
        let (p, a) = (self.params.p, self.params.a);
        let mode = match self.sign {
            ManifoldSign::Plus => Mode::Energy,
            ManifoldSign::Minus => Mode::Reduced,
        };
        let mut u = retract(&init, p, a)?;
        if mode == Mode::Reduced {
            u = self.project_to_max(&u)?;
        }
        let mut restarted = false;
        let mut regrids = 0;
        let mut chunk = 30;
        let mut last_err = String::new();
        loop {
            let budget = chunk.min(self.opts.max_iter.saturating_sub(self.iterations));
            if budget == 0 {
                let msg = format!("max_iter reached ({last_err})");
                return self.finish(u, false, msg);
            }
            let (v, stalled) = self.descend(u, mode, budget)?;
            u = v;
            if regrids < 4 {
                if let Some(w) = self.adapt(&u, mode)? {
                    u = w;
                    regrids += 1;
                    continue;
                }
            }
            let start = if mode == Mode::Reduced { self.project_to_max(&u)? } else { u.clone() };
            match self.newton(&start, 60) {
                Ok(w) => {
                    let tr = kkt(&self.df(&w), &w).comps.triple;
                    let d2 = psi(&tr, 0.0, &self.params).d2;
                    let sign_ok = match self.sign {
                        ManifoldSign::Plus => d2 > 0.0,
                        ManifoldSign::Minus => d2 < 0.0,
                    };
                    let neg = w.values().iter().cloned().fold(0.0f64, f64::min);
                    if sign_ok && neg < -1e-8 * w.sup_norm() && !restarted {
                        restarted = true;
                        let abs: Vec<f64> = w.values().iter().map(|x| x.abs()).collect();
                        u = retract(&w.with_values(abs), p, a)?;
                        continue;
                    }
                    if sign_ok {
                        return self.finish(w, true, String::new());
                    }
                    last_err = "Newton reached the wrong manifold component".into();
                }
                Err(e) => last_err = e.to_string(),
            }
            if stalled && chunk > 4000 {
                let msg = format!("descent stalled ({last_err})");
                return self.finish(u, false, msg);
            }
            chunk = (chunk * 2).min(5000);
        }
    }

    fn project_to_max(&self, u: &RadialFunction) -> Result<RadialFunction> {
        let df = self.df(u);
        let ev = self
            .evaluate(&df, u, Mode::Reduced)
            .ok_or_else(|| Error::Threshold("fiber map has no maximum (NoCritical); refusing".into()))?;
        if ev.t.abs() < 1e-12 {
            return Ok(u.clone());
        }
        fiber_rescale(u, ev.t, self.params.p)
    }

    fn finish(&mut self, u: RadialFunction, newton_ok: bool, message: String) -> Result<SolverResult> {
        let df = self.df(&u);
        let k = kkt(&df, &u);
        let tr = k.comps.triple;
        let pr = &self.params;
        let (lambda, identity_residual) = crate::functionals::lagrange_multiplier_of(&tr, pr);
        let pres = self.pohozaev_rel(&tr);
        let tol = self.tol_abs(tr.a);
        let converged =
            newton_ok && pres <= self.opts.tol_pohozaev && k.rnorm <= 100.0 * tol && identity_residual <= IDENTITY_TOL;
        let mut diagnostics = self.history.clone();
        if diagnostics.len() > 256 {
            let stride = diagnostics.len().div_ceil(256);
            let last = *diagnostics.last().unwrap();
            diagnostics = diagnostics.into_iter().step_by(stride).collect();
            diagnostics.push(last);
        }
        let mut message = message;
        if newton_ok && !converged {
            message = format!("Pohozaev residual {pres:.3e} or identity residual {identity_residual:.3e} above tolerance");
        }
        Ok(SolverResult {
            grid: u.grid().spec(),
            level: df.energy(&u),
            profile: u,
            lambda,
            pohozaev_residual: pres,
            identity_residual,
            manifold_sign: self.sign,
            iterations: self.iterations,
            newton_steps: self.newton_steps,
            converged,
            grad_norm: k.rnorm,
            tol_g: tol,
            triple: tr,
            diagnostics,
            message,
        })
    }
}

fn grid_for(n: usize, spec: GridSpec) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::new(n, spec)?))
}

/// Monotone Gaussian bump with ‖∇u‖_p ≈ `target`.
pub fn plus_initial_guess(params: &Params, target: f64, spec: GridSpec) -> Result<RadialFunction> {
    let base = grid_for(params.n, GridSpec::new(2048, 12.0, 3.0))?;
    let g1 = mass_normalize(&RadialFunction::from_fn(base, |r| (-r * r).exp())?, params.p, params.a)?;
    let a1 = crate::radial::grad_lp_norm(&g1, params.p).powf(1.0 / params.p);
    let width = a1 / target;
    let spec = if spec.r_max < 8.0 * width { GridSpec { r_max: 8.0 * width, ..spec } } else { spec };
    let grid = grid_for(params.n, spec)?;
    let u = RadialFunction::from_fn(grid, |r| (-(r / width).powi(2)).exp())?;
    retract(&u, params.p, params.a)
}

/// Bubble-shaped bump `(1 + r^{p'})^{(p−N)/p}` with an exponential cutoff.
pub fn minus_initial_guess(params: &Params, spec: GridSpec) -> Result<RadialFunction> {
    let grid = grid_for(params.n, spec)?;
    let (p, nf) = (params.p, params.dim());
    let pp = p / (p - 1.0);
    let cut = spec.r_max / 20.0;
    let u = RadialFunction::from_fn(grid, |r| (1.0 + r.powf(pp)).powf((p - nf) / p) * (-r / cut).exp())?;
    retract(&u, p, params.a)
}

fn refuse_unless(ok: bool, msg: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Threshold(msg))
    }
}

/// Local minimizer u⁺ of E on {‖∇u‖_p ≤ R₀} ∩ S_a (Subcritical only).
pub fn solve_local_min(
    params: &Params,
    th: &ThresholdSet,
    init: Option<&RadialFunction>,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    params.validate()?;
    refuse_unless(th.regime == RegimeKind::Subcritical, format!("u+ exists only in the Subcritical regime, got {:?}", th.regime))?;
    let alpha = th.alpha()?;
    refuse_unless(
        params.mu > 0.0 && params.scaled_mu() < alpha,
        format!("mu*a^(q(1-gamma)) = {:.6e} outside (0, alpha = {alpha:.6e})", params.scaled_mu()),
    )?;
    let r0 = th.r0.ok_or_else(|| Error::Dependency("R0 missing from threshold set".into()))?;
    let u0 = match init {
        Some(u) => u.clone(),
        None => plus_initial_guess(params, 0.25 * r0, opts.grid)?,
    };
    let mut s = Solver { params: *params, th, opts: *opts, sign: ManifoldSign::Plus, history: vec![], iterations: 0, newton_steps: 0 };
    s.run(u0)
}

/// Minimizer u⁻ of E on the Pohozaev component where Ψ″(0) < 0.
pub fn solve_mountain_pass(
    params: &Params,
    th: &ThresholdSet,
    init: Option<&RadialFunction>,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    params.validate()?;
    refuse_unless(th.mu_bound_ok(params), format!("mu = {} violates the existence bound for {:?}", params.mu, th.regime))?;
    let u0 = match init {
        Some(u) => u.clone(),
        None => minus_initial_guess(params, opts.grid)?,
    };
    let mut s = Solver { params: *params, th, opts: *opts, sign: ManifoldSign::Minus, history: vec![], iterations: 0, newton_steps: 0 };
    s.run(u0)
}

/// Empirical search without existence preconditions: a bounded descent on
/// the fiber-maximized energy (plain energy if no fiber maximum exists)
/// followed by one Newton attempt. Used as a probe where no solution is
/// expected; the result is never refused.
pub fn probe_critical_point(
    params: &Params,
    th: &ThresholdSet,
    init: &RadialFunction,
    budget: usize,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    params.validate()?;
    let mut s = Solver { params: *params, th, opts: *opts, sign: ManifoldSign::Minus, history: vec![], iterations: 0, newton_steps: 0 };
    let u = retract(init, params.p, params.a)?;
    let (u, mode) = match s.project_to_max(&u) {
        Ok(v) => (v, Mode::Reduced),
        Err(_) => (u, Mode::Energy),
    };
    let (u, _) = s.descend(u, mode, budget)?;
    let start = if mode == Mode::Reduced { s.project_to_max(&u).unwrap_or(u) } else { u };
    match s.newton(&start, 40) {
        Ok(w) => s.finish(w, true, String::new()),
        Err(e) => s.finish(start, false, e.to_string()),
    }
}

/// Independent re-check of a solver result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub pohozaev_residual: f64,
    pub pohozaev_ok: bool,
    pub identity_residual: f64,
    pub identity_ok: bool,
    pub grad_norm: f64,
    pub grad_ok: bool,
    pub positive: bool,
    pub monotone: bool,
    pub fiber_class: Option<FiberClass>,
    pub psi_d2: f64,
    pub sign_consistent: bool,
    pub lambda: f64,
    /// For μ > 0 a solution must have λ < 0.
    pub lambda_sign_ok: bool,
    /// For μ ≤ 0 reports whether ‖∇u‖_p^p > S^{N/p}.
    pub exceeds_sobolev_level: Option<bool>,
    pub passed: bool,
}

pub const IDENTITY_TOL: f64 = 1e-2;

/// Recomputes every certificate quantity from the profile alone.
pub fn certify(result: &SolverResult, params: &Params) -> CertificateReport {
    certify_profile(&result.profile, params, result.manifold_sign, 1e-8, 1e-3)
}

pub fn certify_profile(
    u: &RadialFunction,
    params: &Params,
    sign: ManifoldSign,
    tol_g: f64,
    tol_pohozaev: f64,
) -> CertificateReport {
    let df = DiscreteFunctional::new(*params, u.grid().r_max());
    let k = kkt(&df, u);
    let tr = k.comps.triple;
    let pres = crate::functionals::pohozaev_of(&tr, params).abs() / tr.a;
    let (lambda, ires) = crate::functionals::lagrange_multiplier_of(&tr, params);
    let vals = u.values();
    let top = u.sup_norm();
    let positive = vals.iter().all(|&x| x >= -1e-8 * top);
    let monotone = vals.windows(2).all(|w| w[1] <= w[0] + 1e-8 * top);
    let fiber_class = fiber_points(&tr, params).ok().map(|f| f.classification);
    let d2 = psi(&tr, 0.0, params).d2;
    let sign_consistent = match sign {
        ManifoldSign::Plus => d2 > 0.0,
        ManifoldSign::Minus => d2 < 0.0,
    };
    let lambda_sign_ok = params.mu <= 0.0 || lambda < 0.0;
    let exceeds = if params.mu <= 0.0 {
        sobolev_constant(params.n, params.p).ok().map(|s| tr.a > s.powf(params.dim() / params.p))
    } else {
        None
    };
    let pohozaev_ok = pres <= tol_pohozaev;
    let identity_ok = ires <= IDENTITY_TOL;
    let grad_ok = k.rnorm <= 100.0 * tol_g * tr.a.max(1.0);
    let passed = pohozaev_ok && identity_ok && grad_ok && positive && sign_consistent && lambda_sign_ok;
    CertificateReport {
        pohozaev_residual: pres,
        pohozaev_ok,
        identity_residual: ires,
        identity_ok,
        grad_norm: k.rnorm,
        grad_ok,
        positive,
        monotone,
        fiber_class,
        psi_d2: d2,
        sign_consistent,
        lambda,
        lambda_sign_ok,
        exceeds_sobolev_level: exceeds,
        passed,
    }
}
