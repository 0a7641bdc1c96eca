//! Sobolev extremals (bubbles), their cut-off versions u_ε = φ·U_ε, the
//! small-ε expansions of their norms, and the annular test family used for
//! the negativity of the truncated functional.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::functionals::truncated_energy;
use crate::numerics::{fit_line, integrate_linear, integrate_log, smoothstep_down, smoothstep_down_deriv, sphere_area, LineFit};
use crate::params::Params;
use crate::radial::{grad_lp_norm, lr_norm, mass_normalize, GridSpec, RadialFunction, RadialGrid};
use crate::thresholds::ThresholdSet;

/// Bubble normalization and its ODE residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleConst {
    pub d: f64,
    pub residual: f64,
}

fn check_np(n: usize, p: f64) -> Result<()> {
    if !(p > 1.0 && p < n as f64) {
        return Err(param_err!("requires 1 < p < N, got p = {p}, N = {n}"));
    }
    Ok(())
}

/// U_ε(r) = d ε^{(N−p)/(p(p−1))}(ε^{p'} + r^{p'})^{(p−N)/p}.
pub fn bubble_value(n: usize, p: f64, eps: f64, d: f64, r: f64) -> f64 {
    let nf = n as f64;
    let pp = p / (p - 1.0);
    d * eps.powf((nf - p) / (p * (p - 1.0))) * (eps.powf(pp) + r.powf(pp)).powf((p - nf) / p)
}

/// dU_ε/dr.
pub fn bubble_deriv(n: usize, p: f64, eps: f64, d: f64, r: f64) -> f64 {
    let nf = n as f64;
    let pp = p / (p - 1.0);
    let e = (p - nf) / p;
    d * eps.powf((nf - p) / (p * (p - 1.0))) * e * (eps.powf(pp) + r.powf(pp)).powf(e - 1.0) * pp * r.powf(pp - 1.0)
}

/// Sample radii for the ODE residual (relative to ε). Beyond 10²ε the two
/// leading terms of Δ_p U cancel to below double precision.
fn residual_radii(eps: f64) -> Vec<f64> {
    (0..=200).map(|i| eps * 10f64.powf(-3.0 + 5.0 * i as f64 / 200.0)).collect()
}

/// (−Δ_p U, U^{p*−1}) at `r` for the bubble with constant `d`, using
/// −Δ_p U = −|U′|^{p−2}((p−1)U″ + (N−1)U′/r) with the analytic U′, U″.
fn ode_sides(n: usize, p: f64, eps: f64, d: f64, r: f64) -> (f64, f64) {
    let nf = n as f64;
    let ps = nf * p / (nf - p);
    let pp = p / (p - 1.0);
    let e = (p - nf) / p;
    let c = d * eps.powf((nf - p) / (p * (p - 1.0)));
    let w = eps.powf(pp) + r.powf(pp);
    let g = c * e * pp * r.powf(pp - 1.0) * w.powf(e - 1.0);
    let g2 = c * e * pp * ((pp - 1.0) * r.powf(pp - 2.0) * w.powf(e - 1.0) + (e - 1.0) * pp * r.powf(2.0 * pp - 2.0) * w.powf(e - 2.0));
    let lap = -g.abs().powf(p - 2.0) * ((p - 1.0) * g2 + (nf - 1.0) * g / r);
    (lap, bubble_value(n, p, eps, d, r).powf(ps - 1.0))
}

/// Maximum relative residual of −Δ_p U = U^{p*−1} over r ∈ [10⁻³ε, 10²ε].
pub fn bubble_ode_residual(n: usize, p: f64, eps: f64, d: f64) -> f64 {
    residual_radii(eps)
        .into_iter()
        .map(|r| {
            let (l, rhs) = ode_sides(n, p, eps, d, r);
            ((l - rhs) / rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Fits d so that U_ε solves −Δ_p U = U^{p*−1}. Since −Δ_p(dV) = d^{p−1}(−Δ_p V),
/// the residual is minimized in closed form over κ = d^{p*−p} by averaging the
/// pointwise ratio (−Δ_p V)/V^{p*−1}.
pub fn bubble_d_const(n: usize, p: f64) -> Result<BubbleConst> {
    check_np(n, p)?;
    let nf = n as f64;
    let ps = nf * p / (nf - p);
    let radii = residual_radii(1.0);
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let (l, rhs) = ode_sides(n, p, 1.0, 1.0, r);
            l / rhs
        })
        .collect();
    let kappa = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Numerical(format!("bubble normalization fit failed (kappa = {kappa})")));
    }
    let d = kappa.powf(1.0 / (ps - p));
    let residual = bubble_ode_residual(n, p, 1.0, d);
    if residual > 1e-6 {
        return Err(Error::Numerical(format!("bubble ODE residual {residual:.3e} above 1e-6")));
    }
    Ok(BubbleConst { d, residual })
}

/// Smallest ε whose core is resolved by `grid` (twenty first cells).
pub fn eps_floor(grid: &RadialGrid) -> f64 {
    20.0 * grid.first_cell()
}

/// Cut-off bubble u_ε = φ U_ε with φ the cubic smoothstep from 1 on [0,1] to
/// 0 beyond 2, sampled on a grid.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub eps: f64,
    /// Distance of the center from the origin; radial profiles use 0.
    pub center_offset: f64,
    pub d_const: f64,
    pub profile: RadialFunction,
}

impl Bubble {
    pub fn new(n: usize, p: f64, eps: f64, grid: Arc<RadialGrid>) -> Result<Self> {
        check_np(n, p)?;
        if grid.dim() != n {
            return Err(param_err!("grid dimension {} differs from N = {n}", grid.dim()));
        }
        if grid.r_max() < 2.0 {
            return Err(param_err!("cut-off bubble needs r_max >= 2, got {}", grid.r_max()));
        }
        let floor = eps_floor(&grid);
        if !(eps > 0.0 && eps <= 0.3) {
            return Err(param_err!("eps must lie in (0, 0.3], got {eps}"));
        }
        if eps < floor {
            return Err(Error::Numerical(format!("eps = {eps:.3e} below the resolvable floor {floor:.3e}")));
        }
        let d = bubble_d_const(n, p)?.d;
        let profile = RadialFunction::from_fn(grid, |r| smoothstep_down(r, 1.0, 2.0) * bubble_value(n, p, eps, d, r))?;
        Ok(Bubble { eps, center_offset: 0.0, d_const: d, profile })
    }
}

/// Small-ε behavior of ∫_{B₂}|f_ε|^r for f_ε = ε^{−σ}f₁(x/ε) with f₁ ~ |x|^{−β}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormCase {
    /// rβ > N: ε^{N−rσ}.
    Integrable,
    /// rβ = N: ε^{N−rσ}|log ε|.
    Logarithmic,
    /// rβ < N: ε^{r(β−σ)}.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormLaw {
    pub r: f64,
    pub case: NormCase,
    pub exponent: f64,
}

fn law(nf: f64, sigma: f64, beta: f64, r: f64) -> NormLaw {
    let x = r * beta - nf;
    if x.abs() <= 1e-9 * nf {
        NormLaw { r, case: NormCase::Logarithmic, exponent: nf - r * sigma }
    } else if x > 0.0 {
        NormLaw { r, case: NormCase::Integrable, exponent: nf - r * sigma }
    } else {
        NormLaw { r, case: NormCase::Divergent, exponent: r * (beta - sigma) }
    }
}

/// Law of ‖u_ε‖_r^r; the case split sits at r = N(p−1)/(N−p).
pub fn lr_law(n: usize, p: f64, r: f64) -> NormLaw {
    let nf = n as f64;
    law(nf, (nf - p) / p, (nf - p) / (p - 1.0), r)
}

/// Law of ‖∇u_ε‖_r^r; the case split sits at r = N(p−1)/(N−1).
pub fn grad_lr_law(n: usize, p: f64, r: f64) -> NormLaw {
    let nf = n as f64;
    law(nf, nf / p, (nf - 1.0) / (p - 1.0), r)
}

/// Norms of one cut-off bubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffNorms {
    pub eps: f64,
    /// ‖∇u_ε‖_p^p
    pub grad: f64,
    /// ‖u_ε‖_{p*}^{p*}
    pub crit: f64,
    /// S^{N/p} − ‖∇u_ε‖_p^p, evaluated without cancellation.
    pub grad_deficit: f64,
    /// S^{N/p} − ‖u_ε‖_{p*}^{p*}.
    pub crit_deficit: f64,
    /// ‖u_ε‖_r^r for each tabulated r.
    pub lr: Vec<f64>,
    /// ‖∇u_ε‖_r^r for each tabulated r.
    pub grad_lr: Vec<f64>,
}

/// Quadrature of the cut-off norms. Inside B₁ the profile equals U_ε, so
/// each deficit reduces to integrals over r ≥ 1.
fn cutoff_norms_exact(n: usize, p: f64, d: f64, eps: f64, rs: &[f64], panels: usize) -> CutoffNorms {
    let nf = n as f64;
    let ps = nf * p / (nf - p);
    let om = sphere_area(n);
    let u = |r: f64| smoothstep_down(r, 1.0, 2.0) * bubble_value(n, p, eps, d, r);
    let du = |r: f64| {
        smoothstep_down_deriv(r, 1.0, 2.0) * bubble_value(n, p, eps, d, r)
            + smoothstep_down(r, 1.0, 2.0) * bubble_deriv(n, p, eps, d, r)
    };
    let lo = eps * 1e-10;
    let on_ball = |f: &dyn Fn(f64) -> f64| {
        om * (integrate_log(|r| f(r) * r.powf(nf - 1.0), lo, 1.0, panels) + integrate_linear(|r| f(r) * r.powf(nf - 1.0), 1.0, 2.0, 4 * panels))
    };
    let grad = on_ball(&|r| du(r).abs().powf(p));
    let crit = on_ball(&|r| u(r).abs().powf(ps));
    // ∫_{r>1} of the full bubble densities with analytic power tails.
    let hi = 1e12;
    let fa = |r: f64| bubble_deriv(n, p, eps, d, r).abs().powf(p) * r.powf(nf - 1.0);
    let fc = |r: f64| bubble_value(n, p, eps, d, r).powf(ps) * r.powf(nf - 1.0);
    let beta_a = (nf - 1.0) / (p - 1.0);
    let beta_c = (nf + p - 1.0) / (p - 1.0);
    let outer_a = integrate_log(fa, 1.0, hi, panels) + fa(hi) * hi / (beta_a - 1.0);
    let outer_c = integrate_log(fc, 1.0, hi, panels) + fc(hi) * hi / (beta_c - 1.0);
    let shell_a = integrate_linear(|r| du(r).abs().powf(p) * r.powf(nf - 1.0), 1.0, 2.0, 4 * panels);
    let shell_c = integrate_linear(|r| u(r).abs().powf(ps) * r.powf(nf - 1.0), 1.0, 2.0, 4 * panels);
    let lr = rs.iter().map(|&e| on_ball(&|r| u(r).abs().powf(e))).collect();
    let grad_lr = rs.iter().map(|&e| on_ball(&|r| du(r).abs().powf(e))).collect();
    CutoffNorms {
        eps,
        grad,
        crit,
        grad_deficit: om * (outer_a - shell_a),
        crit_deficit: om * (outer_c - shell_c),
        lr,
        grad_lr,
    }
}

fn cutoff_norms_grid(b: &Bubble, p: f64, s_level: f64, rs: &[f64]) -> Result<CutoffNorms> {
    let u = &b.profile;
    let n = u.grid().dim();
    let ps = n as f64 * p / (n as f64 - p);
    let grad = grad_lp_norm(u, p);
    let crit = lr_norm(u, ps)?;
    let lr = rs.iter().map(|&r| lr_norm(u, r)).collect::<Result<Vec<_>>>()?;
    let grad_lr = rs.iter().map(|&r| u.integrate_gradient(|g| g.abs().powf(r))).collect();
    Ok(CutoffNorms {
        eps: b.eps,
        grad,
        crit,
        grad_deficit: s_level - grad,
        crit_deficit: s_level - crit,
        lr,
        grad_lr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixTable {
    pub n: usize,
    pub p: f64,
    /// Exponents r of the tabulated r-norms (p and q).
    pub r_values: Vec<f64>,
    /// S^{N/p}.
    pub s_level: f64,
    pub rows: Vec<CutoffNorms>,
    /// Smallest usable ε (0 for grid-free quadrature).
    pub eps_floor: f64,
    /// Requested ε below the floor.
    pub skipped: Vec<f64>,
}

/// Norm table of the cut-off bubbles. With `grid = None` the norms come from
/// analytic quadrature; with a grid they are evaluated on the sampled profile
/// and ε below twenty first cells is skipped and reported.
pub fn appendix_norms(n: usize, p: f64, q: f64, eps_list: &[f64], grid: Option<GridSpec>) -> Result<AppendixTable> {
    check_np(n, p)?;
    if eps_list.len() < 5 {
        return Err(param_err!("need at least 5 values of eps, got {}", eps_list.len()));
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(e > 0.0 && e <= 0.3)) {
        return Err(param_err!("eps must lie in (0, 0.3], got {e}"));
    }
    let bc = bubble_d_const(n, p)?;
    let s = crate::thresholds::sobolev_constant(n, p)?;
    let s_level = s.powf(n as f64 / p);
    let r_values = vec![p, q];
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut floor = 0.0;
    match grid {
        None => {
            for &e in eps_list {
                rows.push(cutoff_norms_exact(n, p, bc.d, e, &r_values, 24));
            }
        }
        Some(spec) => {
            let g = Arc::new(RadialGrid::new(n, spec)?);
            floor = eps_floor(&g);
            for &e in eps_list {
                if e < floor {
                    skipped.push(e);
                    continue;
                }
                let b = Bubble::new(n, p, e, g.clone())?;
                rows.push(cutoff_norms_grid(&b, p, s_level, &r_values)?);
            }
            if !skipped.is_empty() {
                log::warn!("appendix table: {} eps values below the grid floor {floor:.3e} skipped", skipped.len());
            }
        }
    }
    Ok(AppendixTable { n, p, r_values, s_level, rows, eps_floor: floor, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub fitted: f64,
    pub target: f64,
    pub r_squared: f64,
    pub rel_err: f64,
    /// Within 10% of the target.
    pub ok: bool,
}

impl ExponentFit {
    /// A zero target (norm tending to a constant) is compared in absolute terms.
    fn from_fit(f: &LineFit, target: f64) -> Self {
        let rel_err = if target == 0.0 { f.slope.abs() } else { ((f.slope - target) / target).abs() };
        ExponentFit { fitted: f.slope, target, r_squared: f.r_squared, rel_err, ok: rel_err <= 0.10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawFit {
    pub law: NormLaw,
    pub fit: ExponentFit,
    /// norm/(ε^e|log ε|) over the smallest decade of ε (logarithmic case only).
    pub log_ratios: Option<Vec<f64>>,
    /// max/min − 1 of `log_ratios`.
    pub log_ratio_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub grad_deficit: ExponentFit,
    pub crit_deficit: ExponentFit,
    pub lr: Vec<LawFit>,
    pub grad_lr: Vec<LawFit>,
    /// Every fit within 10% and every log-ratio spread within 15%.
    pub all_ok: bool,
}

fn fit_law(eps: &[f64], vals: &[f64], lw: NormLaw) -> Result<LawFit> {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let log = lw.case == NormCase::Logarithmic;
    let ys: Vec<f64> = eps
        .iter()
        .zip(vals)
        .map(|(e, v)| if log { (v / e.ln().abs()).ln() } else { v.ln() })
        .collect();
    let f = fit_line(&xs, &ys)?;
    let (log_ratios, spread) = if log {
        let emin = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratios: Vec<f64> = eps
            .iter()
            .zip(vals)
            .filter(|(e, _)| **e <= 10.0 * emin * (1.0 + 1e-12))
            .map(|(e, v)| v / (e.powf(lw.exponent) * e.ln().abs()))
            .collect();
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        (Some(ratios), Some(hi / lo - 1.0))
    } else {
        (None, None)
    };
    Ok(LawFit { law: lw, fit: ExponentFit::from_fit(&f, lw.exponent), log_ratios, log_ratio_spread: spread })
}

/// Regressions of the table against the predicted small-ε laws.
pub fn appendix_regression(t: &AppendixTable) -> Result<AppendixReport> {
    if t.rows.len() < 5 {
        return Err(Error::InsufficientData(format!("{} usable eps values, need 5", t.rows.len())));
    }
    let (n, p) = (t.n, t.p);
    let nf = n as f64;
    let eps: Vec<f64> = t.rows.iter().map(|r| r.eps).collect();
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let deficit_fit = |vals: Vec<f64>, target: f64| -> Result<ExponentFit> {
        let ys: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
        Ok(ExponentFit::from_fit(&fit_line(&xs, &ys)?, target))
    };
    let grad_deficit = deficit_fit(t.rows.iter().map(|r| r.grad_deficit).collect(), (nf - p) / (p - 1.0))?;
    let crit_deficit = deficit_fit(t.rows.iter().map(|r| r.crit_deficit).collect(), nf / (p - 1.0))?;
    let mut lr = Vec::new();
    let mut grad_lr = Vec::new();
    for (k, &r) in t.r_values.iter().enumerate() {
        let v: Vec<f64> = t.rows.iter().map(|row| row.lr[k]).collect();
        lr.push(fit_law(&eps, &v, lr_law(n, p, r))?);
        let g: Vec<f64> = t.rows.iter().map(|row| row.grad_lr[k]).collect();
        grad_lr.push(fit_law(&eps, &g, grad_lr_law(n, p, r))?);
    }
    let laws_ok = lr
        .iter()
        .chain(&grad_lr)
        .all(|l| l.fit.ok && l.log_ratio_spread.is_none_or(|s| s <= 0.15));
    let all_ok = grad_deficit.ok && crit_deficit.ok && laws_ok;
    Ok(AppendixReport { grad_deficit, crit_deficit, lr, grad_lr, all_ok })
}

/// Grid spanning the annuli of [`gengeqn_family`] with near-uniform cells.
pub fn gengeqn_grid(dim: usize, count: usize, radius: f64, cells: usize) -> Result<Arc<RadialGrid>> {
    let r_max = (2 * count + 1) as f64 * radius * 1.02;
    Ok(Arc::new(RadialGrid::new(dim, GridSpec::new(cells, r_max, 0.5))?))
}

/// Mass-normalized profiles u_k = A_k(1 + r²)^k φ_k(r), k = 1..n, with φ_k a
/// C¹ bump equal to 1 on [(2k−½)R, (2k+½)R] and 0 outside ((2k−1)R, (2k+1)R).
pub fn gengeqn_family(count: usize, radius: f64, params: &Params, grid: Arc<RadialGrid>) -> Result<Vec<RadialFunction>> {
    if count == 0 || !(radius > 1.0) {
        return Err(param_err!("need n >= 1 and R > 1, got n = {count}, R = {radius}"));
    }
    let outer = (2 * count + 1) as f64 * radius;
    if grid.r_max() < outer {
        return Err(param_err!("grid r_max = {} does not contain the outer annulus radius {outer}", grid.r_max()));
    }
    if grid.dim() != params.n {
        return Err(param_err!("grid dimension {} differs from N = {}", grid.dim(), params.n));
    }
    (1..=count)
        .map(|k| {
            let kf = k as f64;
            let (a0, a1) = ((2.0 * kf - 1.0) * radius, (2.0 * kf - 0.5) * radius);
            let (b0, b1) = ((2.0 * kf + 0.5) * radius, (2.0 * kf + 1.0) * radius);
            let u = RadialFunction::from_fn(grid.clone(), |r| {
                let bump = (1.0 - smoothstep_down(r, a0, a1)) * smoothstep_down(r, b0, b1);
                // (1+r²)^k scaled by R^{−2k} keeps values O(1).
                ((1.0 + r * r) / (radius * radius)).powi(k as i32) * bump
            })?;
            mass_normalize(&u, params.p, params.a)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityPoint {
    pub radius: f64,
    /// max over random unit ℓ^p combinations of E_τ.
    pub max_energy: f64,
    /// max_k ‖∇u_k‖_p^p.
    pub max_grad: f64,
    /// Worst relative deviation from ℓ^p mass additivity.
    pub mass_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativitySweep {
    pub count: usize,
    pub combos: usize,
    pub points: Vec<NegativityPoint>,
    /// Smallest swept R from which every max_energy is negative.
    pub threshold_radius: Option<f64>,
    /// min over R ≥ threshold of −max_energy.
    pub epsilon: Option<f64>,
}

impl NegativitySweep {
    pub fn succeeded(&self) -> bool {
        self.threshold_radius.is_some()
    }
}

/// Evaluates E_τ on random unit ℓ^p combinations of the annular family for
/// each R and reports the radius beyond which all of them are negative.
pub fn gengeqn_negativity_sweep(
    count: usize,
    radii: &[f64],
    params: &Params,
    th: &ThresholdSet,
    combos: usize,
    seed: u64,
) -> Result<NegativitySweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params.p;
    let mut points = Vec::new();
    for &radius in radii {
        let grid = gengeqn_grid(params.n, count, radius, 4096)?;
        let fam = gengeqn_family(count, radius, params, grid.clone())?;
        let max_grad = fam.iter().map(|u| grad_lp_norm(u, p)).fold(0.0, f64::max);
        let mut max_energy = f64::NEG_INFINITY;
        let mut mass_defect: f64 = 0.0;
        for _ in 0..combos {
            let mut c: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = c.iter().map(|x: &f64| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            if norm == 0.0 {
                continue;
            }
            c.iter_mut().for_each(|x| *x /= norm);
            let mut vals = vec![0.0; grid.nodes().len()];
            for (ck, u) in c.iter().zip(&fam) {
                for (v, x) in vals.iter_mut().zip(u.values()) {
                    *v += ck * x;
                }
            }
            let v = RadialFunction::new(grid.clone(), vals)?;
            let m = lr_norm(&v, p)?;
            mass_defect = mass_defect.max((m / params.mass() - 1.0).abs());
            max_energy = max_energy.max(truncated_energy(&v, params, th)?);
        }
        points.push(NegativityPoint { radius, max_energy, max_grad, mass_defect });
    }
    let mut threshold_radius = None;
    let mut epsilon = None;
    for i in (0..points.len()).rev() {
        if points[i].max_energy < 0.0 {
            threshold_radius = Some(points[i].radius);
            let e = -points[i].max_energy;
            epsilon = Some(epsilon.map_or(e, |x: f64| x.min(e)));
        } else {
            break;
        }
    }
    Ok(NegativitySweep { count, combos, points, threshold_radius, epsilon })
}
