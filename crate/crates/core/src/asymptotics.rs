//! Parameter sweeps: scaling exponents of λ and the norms as μ → 0, μ → ᾱ
//! and μ → ∞, limit-profile gaps against φ₀, the μ < 0 nonexistence scan
//! and the monotonicity of the levels in the mass.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy_of, pohozaev_of};
use crate::numerics::fit_line;
use crate::ode::{profile_gap, rescale_to_limit_profile, GroundStateProfile, LimitScaling};
use crate::par::{self, ExecMode};
use crate::params::{classify_regime, Params, RegimeKind};
use crate::radial::{grad_lp_norm, lr_norm, mass_normalize, NormTriple, RadialFunction, RadialGrid};
use crate::solvers::{
    certify, probe_critical_point, solve_local_min, solve_mountain_pass, ManifoldSign,
    SolverOptions, SolverResult,
};
use crate::thresholds::{threshold_constants, ThresholdSet};

/// Minimum R² before a slope is compared with its target.
pub const MIN_R_SQUARED: f64 = 0.98;
/// Relative tolerance on fitted exponents.
pub const SLOPE_RTOL: f64 = 0.10;
/// Sup-norm gap below which a rescaled profile is indistinguishable from φ₀
/// on the default grids.
pub const GAP_FLOOR: f64 = 1e-5;
/// Converged points required for an exponent check to pass.
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    MuToZero,
    MuToAlphaBar,
    MuToInfinity,
}

/// Sharp constants shared by every point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepConstants<'a> {
    pub s: f64,
    pub c_gn: f64,
    /// Ground state for limit-profile gaps (optional).
    pub phi0: Option<&'a GroundStateProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    /// Start each point from the previous converged profile, stretched by the
    /// expected length-scale law. Forces sequential execution.
    pub warm_start: bool,
    pub exec: ExecMode,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { solver: SolverOptions::default(), warm_start: true, exec: ExecMode::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub mu: f64,
    pub branch: ManifoldSign,
    pub lambda: f64,
    /// A = ‖∇u‖_p^p
    pub grad_norm_p: f64,
    pub level: f64,
    /// B = ‖u‖_q^q
    pub q_norm: f64,
    /// C = ‖u‖_{p*}^{p*}
    pub crit_norm: f64,
    pub converged: bool,
    pub pohozaev_residual: f64,
    pub identity_residual: f64,
    pub certified: bool,
    /// sup-norm gap between the rescaled profile and φ₀.
    pub profile_gap: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCheck {
    pub label: String,
    pub target: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Least-asymptotic points removed after a failed R² test.
    pub dropped: usize,
    pub rel_err: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub kind: SweepKind,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub records: Vec<SweepRecord>,
    /// Second branch solved along the same grid (u⁻ for the μ → 0 sweep).
    pub aux_records: Vec<SweepRecord>,
    pub checks: Vec<ExponentCheck>,
    pub properties: Vec<PropertyCheck>,
}

impl ExponentReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok) && self.properties.iter().all(|p| p.passed)
    }

    pub fn check(&self, label: &str) -> Option<&ExponentCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|c| c.name == name)
    }

    /// CSV rows of the sweep records.
    pub fn records_csv(&self) -> String {
        let mut s = String::from("mu,branch,lambda,A,B,C,level,converged,pohozaev_residual,identity_residual,profile_gap\n");
        for r in self.records.iter().chain(&self.aux_records) {
            s.push_str(&format!(
                "{:e},{:?},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{}\n",
                r.mu,
                r.branch,
                r.lambda,
                r.grad_norm_p,
                r.q_norm,
                r.crit_norm,
                r.level,
                r.converged,
                r.pohozaev_residual,
                r.identity_residual,
                r.profile_gap.map_or(String::new(), |g| format!("{g:e}"))
            ));
        }
        s
    }
}

/// Fits y = slope·x + c on points ordered from least to most asymptotic.
/// If R² < 0.98 the two least-asymptotic points are dropped once.
pub fn regress_exponent(label: &str, xs: &[f64], ys: &[f64], target: f64) -> Result<ExponentCheck> {
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!("{label}: {} converged points, need at least 4", xs.len())));
    }
    let mut fit = fit_line(xs, ys)?;
    let mut dropped = 0;
    if fit.r_squared < MIN_R_SQUARED && xs.len() >= 6 {
        fit = fit_line(&xs[2..], &ys[2..])?;
        dropped = 2;
    }
    let rel_err = ((fit.slope - target) / target).abs();
    let ok = fit.points >= MIN_POINTS && fit.r_squared >= MIN_R_SQUARED && rel_err <= SLOPE_RTOL;
    Ok(ExponentCheck {
        label: label.to_string(),
        target,
        slope: fit.slope,
        r_squared: fit.r_squared,
        points: fit.points,
        dropped,
        rel_err,
        ok,
    })
}

/// Exponent regressions over the converged records of a sweep. For
/// μ → ᾱ the abscissa is log(ᾱ − μ) and `alpha_bar` must be set.
pub fn exponent_checks(kind: SweepKind, template: &Params, records: &[SweepRecord], alpha_bar: f64) -> Result<Vec<ExponentCheck>> {
    let pts = ordered(records, kind);
    let ln = |f: fn(&SweepRecord) -> f64| pts.iter().map(|r| f(r).ln()).collect::<Vec<_>>();
    let (p, qg) = (template.p, template.q_gamma());
    match kind {
        SweepKind::MuToZero | SweepKind::MuToInfinity => {
            let xs: Vec<f64> = pts.iter().map(|r| r.mu.ln()).collect();
            let d = p - qg;
            Ok(vec![
                regress_exponent("neg_lambda", &xs, &ln(|r| -r.lambda), p / d)?,
                regress_exponent("grad_norm_p", &xs, &ln(|r| r.grad_norm_p), p / d)?,
                regress_exponent("q_norm", &xs, &ln(|r| r.q_norm), qg / d)?,
            ])
        }
        SweepKind::MuToAlphaBar => {
            if !(alpha_bar > 0.0) {
                return Err(crate::error::param_err!("alpha_bar must be positive"));
            }
            let target = (template.dim() - p) / p;
            let xs: Vec<f64> = pts.iter().map(|r| (alpha_bar - r.mu).ln()).collect();
            Ok(vec![
                regress_exponent("neg_lambda", &xs, &ln(|r| -r.lambda), target)?,
                regress_exponent("grad_norm_p", &xs, &ln(|r| r.grad_norm_p), target)?,
            ])
        }
    }
}

fn record_from(mu: f64, res: &SolverResult, params: &Params, gap: Option<f64>) -> SweepRecord {
    let cert = certify(res, params);
    SweepRecord {
        mu,
        branch: res.manifold_sign,
        lambda: res.lambda,
        grad_norm_p: res.triple.a,
        level: res.level,
        q_norm: res.triple.b,
        crit_norm: res.triple.c,
        converged: res.converged,
        pohozaev_residual: res.pohozaev_residual,
        identity_residual: res.identity_residual,
        certified: cert.passed,
        profile_gap: gap,
        message: res.message.clone(),
    }
}

fn failed_record(mu: f64, branch: ManifoldSign, msg: String) -> SweepRecord {
    SweepRecord {
        mu,
        branch,
        lambda: f64::NAN,
        grad_norm_p: f64::NAN,
        level: f64::NAN,
        q_norm: f64::NAN,
        crit_norm: f64::NAN,
        converged: false,
        pohozaev_residual: f64::NAN,
        identity_residual: f64::NAN,
        certified: false,
        profile_gap: None,
        message: msg,
    }
}

/// Same nodal values on a grid stretched by `factor`, renormalized.
fn stretch(u: &RadialFunction, factor: f64, params: &Params) -> Result<RadialFunction> {
    let g = u.grid();
    let spec = g.spec().scaled(factor);
    let grid = Arc::new(RadialGrid::new(g.dim(), spec)?);
    mass_normalize(&RadialFunction::new(grid, u.values().to_vec())?, params.p, params.a)
}

/// Ratio of the expected length scale at `mu_new` to that at `mu_old`.
fn expected_stretch(kind: SweepKind, params: &Params, alpha_bar: f64, mu_old: f64, mu_new: f64) -> f64 {
    let p = params.p;
    match kind {
        SweepKind::MuToZero | SweepKind::MuToInfinity => (mu_new / mu_old).powf(-1.0 / (p - params.q_gamma())),
        SweepKind::MuToAlphaBar => {
            let e = -(params.dim() - p) / (p * p);
            ((alpha_bar - mu_new) / (alpha_bar - mu_old)).powf(e)
        }
    }
}

struct Point {
    record: SweepRecord,
    result: Option<SolverResult>,
}

fn solve_point(
    params: &Params,
    c: &SweepConstants,
    branch: ManifoldSign,
    init: Option<&RadialFunction>,
    opts: &SolverOptions,
    scaling: Option<LimitScaling>,
) -> Point {
    let mu = params.mu;
    let th = match threshold_constants(params, c.s, c.c_gn) {
        Ok(t) => t,
        Err(e) => return Point { record: failed_record(mu, branch, e.to_string()), result: None },
    };
    let res = match branch {
        ManifoldSign::Plus => solve_local_min(params, &th, init, opts),
        ManifoldSign::Minus => solve_mountain_pass(params, &th, init, opts),
    };
    match res {
        Ok(r) => {
            let scaling = match scaling {
                Some(LimitScaling::MuToAlphaBar { alpha_bar, .. }) => {
                    Some(LimitScaling::MuToAlphaBar { alpha_bar, lambda: r.lambda })
                }
                s => s,
            };
            let gap = match (c.phi0, scaling) {
                (Some(phi0), Some(sc)) if r.converged => {
                    rescale_to_limit_profile(&r.profile, params, sc, phi0).ok().map(|(w, _)| profile_gap(&w, phi0))
                }
                _ => None,
            };
            Point { record: record_from(mu, &r, params, gap), result: Some(r) }
        }
        Err(e) => Point { record: failed_record(mu, branch, e.to_string()), result: None },
    }
}

/// Solves one branch over the μ grid, warm-starting along it if requested.
#[allow(clippy::too_many_arguments)]
fn run_branch(
    template: &Params,
    mus: &[f64],
    c: &SweepConstants,
    branch: ManifoldSign,
    kind: SweepKind,
    alpha_bar: f64,
    opts: &SweepOptions,
    scaling: Option<LimitScaling>,
) -> Vec<SweepRecord> {
    if opts.warm_start {
        let mut out = Vec::new();
        let mut prev: Option<(f64, RadialFunction)> = None;
        for &mu in mus {
            let params = template.with_mu(mu);
            let init = prev
                .as_ref()
                .and_then(|(m0, u)| stretch(u, expected_stretch(kind, template, alpha_bar, *m0, mu), &params).ok());
            let mut pt = solve_point(&params, c, branch, init.as_ref(), &opts.solver, scaling);
            if init.is_some() && !pt.record.converged {
                // Cold restart before giving up on the point.
                pt = solve_point(&params, c, branch, None, &opts.solver, scaling);
            }
            if let Some(r) = pt.result.as_ref().filter(|r| r.converged) {
                prev = Some((mu, r.profile.clone()));
            }
            out.push(pt.record);
        }
        out
    } else {
        par::map(opts.exec, mus, |&mu| solve_point(&template.with_mu(mu), c, branch, None, &opts.solver, scaling).record)
    }
}

fn converged(records: &[SweepRecord]) -> Vec<&SweepRecord> {
    records.iter().filter(|r| r.converged).collect()
}

/// Records sorted so that the least-asymptotic points come first.
fn ordered(records: &[SweepRecord], kind: SweepKind) -> Vec<&SweepRecord> {
    let mut v = converged(records);
    match kind {
        SweepKind::MuToZero => v.sort_by(|a, b| b.mu.total_cmp(&a.mu)),
        SweepKind::MuToAlphaBar | SweepKind::MuToInfinity => v.sort_by(|a, b| a.mu.total_cmp(&b.mu)),
    }
    v
}

fn gap_property(records: &[&SweepRecord], final_tol: f64) -> PropertyCheck {
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.profile_gap).collect();
    if gaps.len() < 2 {
        return PropertyCheck { name: "limit_profile_gap".into(), passed: false, detail: "fewer than two gaps available".into() };
    }
    // Below the resolution floor the gap is discretization noise.
    let monotone = gaps.windows(2).all(|w| w[1] < w[0] || w[1].max(w[0]) <= GAP_FLOOR);
    let last = *gaps.last().unwrap();
    PropertyCheck {
        name: "limit_profile_gap".into(),
        passed: monotone && last < final_tol,
        detail: format!("gaps [{}]; monotone = {monotone}, final = {last:.4e} (< {final_tol})", fmt_list(&gaps)),
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn sorted_grid(mu_grid: &[f64]) -> Result<Vec<f64>> {
    let mut mus = mu_grid.to_vec();
    if mus.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(crate::error::param_err!("mu grid must be positive and finite"));
    }
    mus.sort_by(|a, b| a.total_cmp(b));
    mus.dedup();
    Ok(mus)
}

/// μ → 0⁺ on the local minimizer: −λ, A ~ μ^{p/(p−qγ)}, B ~ μ^{qγ/(p−qγ)},
/// m⁺ → 0; the u⁻ branch on the same grid approaches the Sobolev level.
pub fn sweep_mu_to_zero(template: &Params, mu_grid: &[f64], c: &SweepConstants, opts: &SweepOptions) -> Result<ExponentReport> {
    template.validate()?;
    if classify_regime(template) != RegimeKind::Subcritical {
        return Err(crate::error::param_err!("mu -> 0 sweep needs the Subcritical regime"));
    }
    let th = threshold_constants(&template.with_mu(0.0), c.s, c.c_gn)?;
    let alpha = th.alpha()? * template.a.powf(-template.q * (1.0 - template.gamma_q()));
    let mut mus = sorted_grid(mu_grid)?;
    if mus.iter().any(|&m| m >= alpha) {
        return Err(crate::error::param_err!("mu grid must lie below alpha*a^(-q(1-gamma)) = {alpha:.6e}"));
    }
    // Largest μ first so warm starts move toward the limit.
    mus.reverse();
    let records = run_branch(template, &mus, c, ManifoldSign::Plus, SweepKind::MuToZero, 0.0, opts, Some(LimitScaling::MuToZeroPlus));
    let aux = run_branch(template, &mus, c, ManifoldSign::Minus, SweepKind::MuToZero, 0.0, opts, None);
    let pts = ordered(&records, SweepKind::MuToZero);
    let checks = exponent_checks(SweepKind::MuToZero, template, &records, 0.0)?;
    let mut properties = Vec::new();
    let (first, last) = (pts.first().unwrap(), pts.last().unwrap());
    let levels: Vec<f64> = pts.iter().map(|r| r.level).collect();
    properties.push(PropertyCheck {
        name: "m_plus_to_zero".into(),
        passed: last.level.abs() < first.level.abs() && levels.iter().all(|&l| l < 0.0) && levels.windows(2).all(|w| w[1].abs() <= w[0].abs()),
        detail: format!("m+(mu_max) = {:.6e}, m+(mu_min) = {:.6e}", first.level, last.level),
    });
    let lvl = c.s.powf(template.dim() / template.p);
    match converged(&aux).into_iter().min_by(|a, b| a.mu.total_cmp(&b.mu)) {
        Some(m) => {
            let (ea, ec) = (m.grad_norm_p / lvl - 1.0, m.crit_norm / lvl - 1.0);
            properties.push(PropertyCheck {
                name: "u_minus_to_sobolev_level".into(),
                passed: ea.abs() <= 0.02 && ec.abs() <= 0.02 && m.level < lvl / template.dim(),
                detail: format!("at mu = {:.4e}: A/S^(N/p) - 1 = {ea:.3e}, C/S^(N/p) - 1 = {ec:.3e}, m- = {:.6e}", m.mu, m.level),
            });
        }
        None => properties.push(PropertyCheck {
            name: "u_minus_to_sobolev_level".into(),
            passed: false,
            detail: "no converged u- point".into(),
        }),
    }
    if c.phi0.is_some() {
        properties.push(gap_property(&pts, 0.05));
    }
    Ok(ExponentReport {
        kind: SweepKind::MuToZero,
        n: template.n,
        p: template.p,
        q: template.q,
        a: template.a,
        records,
        aux_records: aux,
        checks,
        properties,
    })
}

/// μ → ᾱ⁻ in the mass-critical case: −λ, A ~ (ᾱ−μ)^{(N−p)/p}, m⁻ → 0, and
/// refusal beyond ᾱ. `gaps` are geometric distances ᾱ − μ.
pub fn sweep_mu_to_alpha_bar(template: &Params, gaps: &[f64], c: &SweepConstants, opts: &SweepOptions) -> Result<ExponentReport> {
    template.validate()?;
    if classify_regime(template) != RegimeKind::MassCritical {
        return Err(crate::error::param_err!("mu -> alpha_bar sweep needs the MassCritical regime"));
    }
    let th = threshold_constants(template, c.s, c.c_gn)?;
    let ab = th.alpha_bar()?;
    let mut dist = sorted_grid(gaps)?;
    if dist.iter().any(|&g| g >= ab) {
        return Err(crate::error::param_err!("distances to alpha_bar must lie in (0, {ab:.6e})"));
    }
    dist.reverse();
    let mus: Vec<f64> = dist.iter().map(|g| ab - g).collect();
    let scaling = LimitScaling::MuToAlphaBar { alpha_bar: ab, lambda: -1.0 };
    let records = run_branch(template, &mus, c, ManifoldSign::Minus, SweepKind::MuToAlphaBar, ab, opts, Some(scaling));
    let pts = ordered(&records, SweepKind::MuToAlphaBar);
    let checks = exponent_checks(SweepKind::MuToAlphaBar, template, &records, ab)?;
    let mut properties = Vec::new();
    let levels: Vec<f64> = pts.iter().map(|r| r.level).collect();
    properties.push(PropertyCheck {
        name: "m_minus_to_zero".into(),
        passed: levels.iter().all(|&l| l > 0.0) && levels.windows(2).all(|w| w[1] < w[0]),
        detail: format!("levels along the approach: {levels:.4?}"),
    });
    let over = template.with_mu(1.01 * ab);
    let beyond = match solve_mountain_pass(&over, &th, None, &opts.solver) {
        Err(e) => (true, format!("refused at mu = 1.01 alpha_bar: {e}")),
        Ok(r) => (!r.converged, format!("mu = 1.01 alpha_bar: converged = {}, level = {:.4e}", r.converged, r.level)),
    };
    properties.push(PropertyCheck { name: "degenerate_beyond_alpha_bar".into(), passed: beyond.0, detail: beyond.1 });
    let probe = unboundedness_probe(template, &[10.0, 100.0, 1000.0])?;
    properties.push(PropertyCheck {
        name: "grad_over_q_unbounded".into(),
        passed: probe.iter().all(|x| x.exceeded),
        detail: probe.iter().map(|x| format!("M={}: k={} ratio={:.3e}", x.bound, x.k, x.ratio)).collect::<Vec<_>>().join("; "),
    });
    if c.phi0.is_some() {
        properties.push(gap_property(&pts, f64::INFINITY));
    }
    Ok(ExponentReport {
        kind: SweepKind::MuToAlphaBar,
        n: template.n,
        p: template.p,
        q: template.q,
        a: template.a,
        records,
        aux_records: vec![],
        checks,
        properties,
    })
}

/// μ → ∞ in the supercritical case: −λ, A ~ μ^{−p/(qγ−p)}, B ~ μ^{−qγ/(qγ−p)},
/// non-increasing m⁻ and decreasing limit-profile gaps.
pub fn sweep_mu_to_infinity(template: &Params, mu_grid: &[f64], c: &SweepConstants, opts: &SweepOptions) -> Result<ExponentReport> {
    template.validate()?;
    if classify_regime(template) != RegimeKind::Supercritical {
        return Err(crate::error::param_err!("mu -> infinity sweep needs the Supercritical regime"));
    }
    let mus = sorted_grid(mu_grid)?;
    let records = run_branch(template, &mus, c, ManifoldSign::Minus, SweepKind::MuToInfinity, 0.0, opts, Some(LimitScaling::MuToInfinity));
    let pts = ordered(&records, SweepKind::MuToInfinity);
    let checks = exponent_checks(SweepKind::MuToInfinity, template, &records, 0.0)?;
    let levels: Vec<f64> = pts.iter().map(|r| r.level).collect();
    let mut properties = vec![PropertyCheck {
        name: "m_minus_non_increasing".into(),
        passed: levels.windows(2).all(|w| w[1] <= w[0] + 1e-10),
        detail: format!("levels {levels:.4?}"),
    }];
    if c.phi0.is_some() {
        properties.push(gap_property(&pts, f64::INFINITY));
    }
    Ok(ExponentReport {
        kind: SweepKind::MuToInfinity,
        n: template.n,
        p: template.p,
        q: template.q,
        a: template.a,
        records,
        aux_records: vec![],
        checks,
        properties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundednessPoint {
    pub bound: f64,
    pub k: usize,
    pub ratio: f64,
    pub exceeded: bool,
}

/// ‖∇u‖_p^p/‖u‖_q^q on the mass sphere along u_k = c_k e^{−r²/2}(2 + cos(k r)),
/// doubling k until each bound is passed. The ratio is dilation invariant in
/// the mass-critical case, so growth must come from oscillation.
pub fn unboundedness_probe(template: &Params, bounds: &[f64]) -> Result<Vec<UnboundednessPoint>> {
    let grid = Arc::new(RadialGrid::new(template.n, crate::radial::GridSpec::new(1 << 15, 12.0, 0.5))?);
    let ratio = |k: usize| -> Result<f64> {
        let kf = k as f64;
        let u = RadialFunction::from_fn(grid.clone(), |r| (-(r * r) / 2.0).exp() * (2.0 + (kf * r).cos()) * (1.0 - r / 12.0))?;
        let u = mass_normalize(&u, template.p, template.a)?;
        Ok(grad_lp_norm(&u, template.p) / lr_norm(&u, template.q)?)
    };
    let mut out = Vec::new();
    for &b in bounds {
        let mut k = 1;
        let mut r = ratio(k)?;
        while r <= b && k < 2048 {
            k *= 2;
            r = ratio(k)?;
        }
        out.push(UnboundednessPoint { bound: b, k, ratio: r, exceeded: r > b });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistencePoint {
    pub mu: f64,
    /// Accepted synthetic Pohozaev triples.
    pub triples: usize,
    /// Candidates rejected as Sobolev-inconsistent.
    pub rejected: usize,
    pub min_grad_ratio: f64,
    pub min_energy_ratio: f64,
    /// Every triple has A > S^{N/p} and E > S^{N/p}/N.
    pub bounds_hold: bool,
    pub probes: usize,
    /// Probes that ended at a certified stationary point with λ < 0.
    pub negative_lambda_hits: usize,
    pub probe_summary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceReport {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub points: Vec<NonexistencePoint>,
    /// Empirical search only; not a proof.
    pub note: String,
}

impl NonexistenceReport {
    pub fn all_ok(&self) -> bool {
        self.points.iter().all(|p| p.bounds_hold && p.negative_lambda_hits == 0)
    }
}

/// Random Pohozaev triples (A, B, C = A − μγB) consistent with the Sobolev
/// inequality C ≤ S^{−p*/p} A^{p*/p}. Returns accepted triples and the
/// number of rejections.
pub fn synthetic_pohozaev_triples(params: &Params, s: f64, count: usize, seed: u64) -> (Vec<NormTriple>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, ps) = (params.p, params.p_star());
    let lvl = s.powf(params.dim() / p);
    let g = params.gamma_q();
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count && rejected < 1000 * count {
        let a = lvl * 10f64.powf(rng.gen_range(-1.0..2.0));
        let b = 10f64.powf(rng.gen_range(-3.0..3.0));
        let c = a - params.mu * g * b;
        if c > 0.0 && c <= s.powf(-ps / p) * a.powf(ps / p) {
            out.push(NormTriple::new(a, b, c));
        } else {
            rejected += 1;
        }
    }
    (out, rejected)
}

/// μ < 0 scan: triple inequalities plus bounded descent probes from random
/// initial bumps, each checked for a certified stationary point with λ < 0.
pub fn nonexistence_scan(
    template: &Params,
    mu_negative: &[f64],
    c: &SweepConstants,
    triples: usize,
    probes: usize,
    seed: u64,
    opts: &SweepOptions,
) -> Result<NonexistenceReport> {
    template.validate()?;
    if mu_negative.iter().any(|m| !(*m < 0.0)) {
        return Err(crate::error::param_err!("nonexistence scan needs mu < 0"));
    }
    let lvl = c.s.powf(template.dim() / template.p);
    let mut points = Vec::new();
    for (idx, &mu) in mu_negative.iter().enumerate() {
        let params = template.with_mu(mu);
        let (tr, rejected) = synthetic_pohozaev_triples(&params, c.s, triples, seed.wrapping_add(idx as u64));
        let mut min_g = f64::INFINITY;
        let mut min_e = f64::INFINITY;
        for t in &tr {
            debug_assert!(pohozaev_of(t, &params).abs() <= 1e-9 * t.a);
            min_g = min_g.min(t.a / lvl);
            min_e = min_e.min(energy_of(t, &params) / (lvl / template.dim()));
        }
        let th = threshold_constants(&params, c.s, c.c_gn)?;
        let outcomes: Vec<(bool, String)> = par::map_range(opts.exec, probes, |k| {
            probe_once(&params, &th, &opts.solver, seed.wrapping_mul(31).wrapping_add(1000 * idx as u64 + k as u64))
        });
        let hits = outcomes.iter().filter(|o| o.0).count();
        points.push(NonexistencePoint {
            mu,
            triples: tr.len(),
            rejected,
            min_grad_ratio: min_g,
            min_energy_ratio: min_e,
            bounds_hold: tr.len() == triples && min_g > 1.0 && min_e > 1.0,
            probes,
            negative_lambda_hits: hits,
            probe_summary: outcomes.into_iter().map(|o| o.1).collect(),
        });
    }
    Ok(NonexistenceReport {
        n: template.n,
        p: template.p,
        q: template.q,
        points,
        note: "descent probes are empirical corroboration, not a proof".into(),
    })
}

fn probe_once(params: &Params, th: &ThresholdSet, opts: &SolverOptions, seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = match RadialGrid::new(params.n, opts.grid) {
        Ok(g) => Arc::new(g),
        Err(e) => return (false, e.to_string()),
    };
    let width = 10f64.powf(rng.gen_range(-0.5..1.0));
    let shift = rng.gen_range(0.0..2.0) * width;
    let mix = rng.gen_range(0.0..1.0);
    let init = RadialFunction::from_fn(grid, |r| {
        let x = (r - shift).max(0.0) / width;
        (-(r / width).powi(2)).exp() * mix + (1.0 - mix) / (1.0 + x * x).powi(2)
    });
    let init = match init.and_then(|u| mass_normalize(&u, params.p, params.a)) {
        Ok(u) => u,
        Err(e) => return (false, e.to_string()),
    };
    match probe_critical_point(params, th, &init, 300, opts) {
        Ok(r) => {
            let cert = certify(&r, params);
            let hit = r.converged && cert.passed && r.lambda < 0.0;
            (hit, format!("converged={} lambda={:.3e} P={:.2e}", r.converged, r.lambda, r.pohozaev_residual))
        }
        Err(e) => (false, format!("error: {e}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassMonotonicity {
    pub branch: ManifoldSign,
    pub masses: Vec<f64>,
    pub levels: Vec<f64>,
    pub converged: Vec<bool>,
    /// m(a_i) ≥ m(a_{i+1}) − 1e−4 for consecutive converged masses.
    pub non_increasing: bool,
}

/// Levels m^±(a, μ) over increasing masses a at fixed μ.
pub fn level_monotonicity_in_mass(template: &Params, masses: &[f64], branch: ManifoldSign, c: &SweepConstants, opts: &SolverOptions) -> MassMonotonicity {
    let mut ms: Vec<f64> = masses.to_vec();
    ms.sort_by(|a, b| a.total_cmp(b));
    let pts: Vec<Point> = ms.iter().map(|&a| solve_point(&template.with_a(a), c, branch, None, opts, None)).collect();
    let levels: Vec<f64> = pts.iter().map(|p| p.record.level).collect();
    let conv: Vec<bool> = pts.iter().map(|p| p.record.converged).collect();
    let good: Vec<f64> = levels.iter().zip(&conv).filter(|(_, c)| **c).map(|(l, _)| *l).collect();
    let non_increasing = good.len() >= 2 && good.windows(2).all(|w| w[0] >= w[1] - 1e-4);
    MassMonotonicity { branch, masses: ms, levels, converged: conv, non_increasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::shoot_ground_state;
    use crate::thresholds::gn_constant;
    use crate::thresholds::sobolev_constant;

    fn consts(n: usize, p: f64, q: f64) -> (f64, f64, GroundStateProfile) {
        let phi0 = shoot_ground_state(n, p, q).unwrap();
        (sobolev_constant(n, p).unwrap(), gn_constant(&phi0).unwrap(), phi0)
    }

    #[test]
    fn regression_drops_least_asymptotic_points_once() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        ys[0] = 40.0;
        ys[1] = -30.0;
        let c = regress_exponent("t", &xs, &ys, 2.0).unwrap();
        assert_eq!(c.dropped, 2);
        assert!(c.ok && (c.slope - 2.0).abs() < 1e-12);
        assert!(regress_exponent("t", &xs[..3], &ys[..3], 2.0).is_err());
    }

    #[test]
    fn mu_to_zero_exponents_and_gap() {
        let (s, c_gn, phi0) = consts(3, 2.0, 2.5);
        let template = Params::new(3, 2.0, 2.5, 1.0, 1.0).unwrap();
        let alpha = threshold_constants(&template, s, c_gn).unwrap().alpha.unwrap();
        let mus: Vec<f64> = (2..9).map(|k| alpha * 0.5f64.powi(k)).collect();
        let c = SweepConstants { s, c_gn, phi0: Some(&phi0) };
        let rep = sweep_mu_to_zero(&template, &mus, &c, &SweepOptions::default()).unwrap();
        for ch in &rep.checks {
            assert!(ch.ok, "{ch:?}");
        }
        assert!(rep.property("m_plus_to_zero").unwrap().passed);
        let gap = rep.property("limit_profile_gap").unwrap();
        assert!(gap.passed, "{gap:?}");
    }

    #[test]
    fn mu_to_alpha_bar_exponents() {
        let (s, c_gn, phi0) = consts(4, 2.0, 3.0);
        let template = Params::new(4, 2.0, 3.0, 1.0, 1.0).unwrap();
        let ab = threshold_constants(&template, s, c_gn).unwrap().alpha_bar.unwrap();
        let gaps: Vec<f64> = (3..10).map(|k| ab * 0.5f64.powi(k)).collect();
        let c = SweepConstants { s, c_gn, phi0: Some(&phi0) };
        let rep = sweep_mu_to_alpha_bar(&template, &gaps, &c, &SweepOptions::default()).unwrap();
        for ch in &rep.checks {
            assert!(ch.ok, "{ch:?}");
        }
        for name in ["m_minus_to_zero", "degenerate_beyond_alpha_bar", "grad_over_q_unbounded"] {
            assert!(rep.property(name).unwrap().passed, "{:?}", rep.property(name));
        }
    }

    #[test]
    fn mu_to_infinity_exponents() {
        let (s, c_gn, phi0) = consts(3, 2.0, 5.0);
        let template = Params::new(3, 2.0, 5.0, 1.0, 1.0).unwrap();
        let mus: Vec<f64> = (0..6).map(|k| 100.0 * 4f64.powi(k)).collect();
        let c = SweepConstants { s, c_gn, phi0: Some(&phi0) };
        let rep = sweep_mu_to_infinity(&template, &mus, &c, &SweepOptions::default()).unwrap();
        assert!(rep.all_ok(), "{:#?}", (&rep.checks, &rep.properties));
    }

    #[test]
    fn synthetic_triples_obey_negative_mu_bounds() {
        let s = sobolev_constant(3, 2.0).unwrap();
        for mu in [-1.0, -0.1] {
            let params = Params::new(3, 2.0, 2.5, 1.0, mu).unwrap();
            let (tr, _) = synthetic_pohozaev_triples(&params, s, 1000, 3);
            assert_eq!(tr.len(), 1000);
            let lvl = s.powf(1.5);
            assert!(tr.iter().all(|t| t.a > lvl && energy_of(t, &params) > lvl / 3.0));
        }
        // μ = 0: the bound degenerates to A ≥ S^{N/p}.
        let params = Params::new(3, 2.0, 2.5, 1.0, 0.0).unwrap();
        let (tr, _) = synthetic_pohozaev_triples(&params, s, 200, 4);
        assert!(tr.iter().all(|t| t.a >= s.powf(1.5) * (1.0 - 1e-12)));
    }

    #[test]
    fn level_non_increasing_in_mass() {
        let (s, c_gn, _) = consts(3, 2.0, 2.5);
        let template = Params::new(3, 2.0, 2.5, 1.0, 1.0).unwrap();
        let alpha = threshold_constants(&template, s, c_gn).unwrap().alpha.unwrap();
        // μ a^{q(1−γ)} must stay below α for every mass.
        let t = template.with_mu(0.3 * alpha / 1.2f64.powf(2.5 * 0.7));
        let c = SweepConstants { s, c_gn, phi0: None };
        for br in [ManifoldSign::Plus, ManifoldSign::Minus] {
            let m = level_monotonicity_in_mass(&t, &[0.8, 1.0, 1.2], br, &c, &SolverOptions::default());
            assert!(m.converged.iter().all(|&x| x), "{m:?}");
            assert!(m.non_increasing, "{m:?}");
        }
    }
}
