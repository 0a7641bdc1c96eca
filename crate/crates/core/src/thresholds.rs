//! Sharp constants: Sobolev S, Gagliardo–Nirenberg C_{N,p,q}, the existence
//! thresholds C′, C″, α and ᾱ, and the barrier functions h, h̃ with their
//! zeros R₀ < R₁.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::numerics::{find_root, integrate_log, smoothstep_down};
use crate::ode::GroundStateProfile;
use crate::params::{classify_regime, derive_exponents, Params, RegimeKind};

/// Sobolev constant from the explicit extremal U(r) = (1 + r^{p/(p−1)})^{(p−N)/p}
/// by log-spaced Gauss–Legendre quadrature plus the analytic power tail.
pub fn sobolev_constant(n: usize, p: f64) -> Result<f64> {
    sobolev_quotient(n, p, 1.0, 1.0)
}

/// S evaluated on c·U_ε (any c, ε give the same value up to quadrature error).
pub fn sobolev_quotient(n: usize, p: f64, eps: f64, scale: f64) -> Result<f64> {
    let (grad, crit) = bubble_norms_exact(n, p, eps, scale)?;
    let ps = n as f64 * p / (n as f64 - p);
    Ok(grad / crit.powf(p / ps))
}

/// (‖∇(cU_ε)‖_p^p, ‖cU_ε‖_{p*}^{p*}) for the unnormalized bubble
/// U_ε(r) = ε^{(N−p)/(p(p−1))}(ε^{p/(p−1)} + r^{p/(p−1)})^{(p−N)/p}.
pub fn bubble_norms_exact(n: usize, p: f64, eps: f64, scale: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return Err(param_err!("requires 1 < p < N, got p = {p}, N = {n}"));
    }
    let pp = p / (p - 1.0);
    let ps = nf * p / (nf - p);
    let omega = crate::numerics::sphere_area(n);
    let pref = scale * eps.powf((nf - p) / (p * (p - 1.0)));
    let ep = eps.powf(pp);
    let e_exp = (p - nf) / p;
    let u = |r: f64| pref * (ep + r.powf(pp)).powf(e_exp);
    let du = |r: f64| pref * e_exp * (ep + r.powf(pp)).powf(e_exp - 1.0) * pp * r.powf(pp - 1.0);
    let fa = |r: f64| omega * du(r).abs().powf(p) * r.powf(nf - 1.0);
    let fc = |r: f64| omega * u(r).powf(ps) * r.powf(nf - 1.0);
    // decay exponents of the integrands
    let beta_a = (nf - 1.0) / (p - 1.0);
    let beta_c = (nf + p - 1.0) / (p - 1.0);
    if beta_a - 1.0 < 1e-3 {
        return Err(Error::Numerical("insufficient decay margin for the tail correction".into()));
    }
    let lo = eps * 1e-12;
    let hi = eps * 1e12;
    let a = integrate_log(fa, lo, hi, 24) + fa(hi) * hi / (beta_a - 1.0);
    let c = integrate_log(fc, lo, hi, 24) + fc(hi) * hi / (beta_c - 1.0);
    Ok((a, c))
}

/// C_{N,p,q} from the GN quotient on the ground state:
/// C^q = ‖φ₀‖_q^q / (‖∇φ₀‖_p^{qγ} ‖φ₀‖_p^{q(1−γ)}).
pub fn gn_constant(phi0: &GroundStateProfile) -> Result<f64> {
    if !phi0.converged() {
        return Err(Error::Dependency(format!(
            "ground state not converged (residual {:.3e})",
            phi0.residual
        )));
    }
    let (g, _) = derive_exponents(phi0.n, phi0.p, phi0.q)?;
    Ok(gn_quotient(phi0.norms.a, phi0.norms.b, phi0.mass_p, phi0.p, phi0.q, g).powf(1.0 / phi0.q))
}

/// B / (A^{qγ/p} M^{q(1−γ)/p}) with A = ‖∇u‖_p^p, B = ‖u‖_q^q, M = ‖u‖_p^p.
pub fn gn_quotient(a: f64, b: f64, m: f64, p: f64, q: f64, gamma: f64) -> f64 {
    b / (a.powf(q * gamma / p) * m.powf(q * (1.0 - gamma) / p))
}

/// All thresholds that apply to an instance. Fields that do not apply to the
/// regime are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "C_gn")]
    pub c_gn: f64,
    #[serde(rename = "C_prime")]
    pub c_prime: Option<f64>,
    #[serde(rename = "C_dprime")]
    pub c_dprime: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_bar: Option<f64>,
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    pub t_bar: Option<f64>,
    pub regime: RegimeKind,
    /// Value of (qγ/p)^{p*−p}(p*/p)^{p−qγ} (≤ 1 makes α below the
    /// degenerate-manifold bound).
    pub empty_monotone: Option<f64>,
    /// Lower bound on μa^{q(1−γ)} for a degenerate fiber to exist.
    pub degenerate_bound: Option<f64>,
}

impl ThresholdSet {
    pub fn alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| param_err!("alpha(N,p,q) is defined only in the Subcritical regime (got {:?})", self.regime))
    }

    pub fn alpha_bar(&self) -> Result<f64> {
        self.alpha_bar
            .ok_or_else(|| param_err!("alpha_bar is defined only in the MassCritical regime (got {:?})", self.regime))
    }

    /// Whether μ satisfies the existence condition of its regime.
    pub fn mu_bound_ok(&self, params: &Params) -> bool {
        match self.regime {
            RegimeKind::Subcritical => self.alpha.is_some_and(|a| params.mu > 0.0 && params.scaled_mu() < a),
            RegimeKind::MassCritical => self.alpha_bar.is_some_and(|a| params.mu > 0.0 && params.mu < a),
            RegimeKind::Supercritical => params.mu > 0.0,
        }
    }

    pub fn regime(&self, params: &Params) -> crate::params::Regime {
        crate::params::Regime { kind: self.regime, mu_bound_ok: self.mu_bound_ok(params) }
    }
}

/// Evaluates C′, C″, α (Subcritical), ᾱ (MassCritical), t̄ and the zeros of h.
///
/// ᾱ = q/(p a^{p²/N} C^q), the value at which the GN bound makes
/// ‖∇u‖_p^p − μγ‖u‖_q^q lose its sign on the mass sphere.
pub fn threshold_constants(params: &Params, s: f64, c_gn: f64) -> Result<ThresholdSet> {
    if !(s > 0.0 && c_gn > 0.0) {
        return Err(param_err!("requires S > 0 and C_gn > 0"));
    }
    let regime = classify_regime(params);
    let mut th = ThresholdSet {
        s,
        c_gn,
        c_prime: None,
        c_dprime: None,
        alpha: None,
        alpha_bar: None,
        r0: None,
        r1: None,
        t_bar: None,
        regime,
        empty_monotone: None,
        degenerate_bound: None,
    };
    let (p, q, ps, nf) = (params.p, params.q, params.p_star(), params.dim());
    let g = params.gamma_q();
    let qg = params.q_gamma();
    let cq = c_gn.powf(q);
    match regime {
        RegimeKind::Subcritical => {
            let sp = s.powf(ps / p);
            let d = p - qg;
            let t_bar = (ps * sp * d / (p * (ps - qg))).powf(1.0 / (ps - p));
            let c1 = (ps * sp * d / (p * (ps - qg))).powf(d / (ps - p)) * q * (ps - p) / (p * cq * (ps - qg));
            let c2 = p * ps / (nf * g * cq * (ps - p)) * (qg * s.powf(nf / p) / d).powf(d / p);
            th.c_prime = Some(c1);
            th.c_dprime = Some(c2);
            th.alpha = Some(c1.min(c2));
            th.t_bar = Some(t_bar);
            th.empty_monotone = Some((qg / p).powf(ps - p) * (ps / p).powf(d));
            th.degenerate_bound = Some((d * sp / (ps - qg)).powf(d / (ps - p)) * (ps - p) / (cq * g * (ps - qg)));
            if params.mu >= 0.0 && params.scaled_mu() < c1 {
                let (r0, r1) = h_zeros(params, &th)?;
                th.r0 = Some(r0);
                th.r1 = Some(r1);
            }
        }
        RegimeKind::MassCritical => {
            th.alpha_bar = Some(q / (p * params.a.powf(p * p / nf) * cq));
        }
        RegimeKind::Supercritical => {}
    }
    Ok(th)
}

fn require_sub(params: &Params) -> Result<()> {
    let k = classify_regime(params);
    if k != RegimeKind::Subcritical {
        return Err(param_err!("h is defined for the Subcritical regime only, got {k:?}"));
    }
    Ok(())
}

/// K = (μ/q)C^q a^{q(1−γ)}, the coefficient of t^{qγ} in h.
fn h_coeff(params: &Params, th: &ThresholdSet) -> f64 {
    params.mu / params.q * th.c_gn.powf(params.q) * params.a.powf(params.q * (1.0 - params.gamma_q()))
}

/// h(t) = t^p/p − K t^{qγ} − t^{p*}/(p* S^{p*/p}).
pub fn h_function(t: f64, params: &Params, th: &ThresholdSet) -> Result<f64> {
    require_sub(params)?;
    Ok(h_raw(t, params, th))
}

fn h_raw(t: f64, params: &Params, th: &ThresholdSet) -> f64 {
    let (p, ps) = (params.p, params.p_star());
    t.powf(p) / p - h_coeff(params, th) * t.powf(params.q_gamma()) - t.powf(ps) / (ps * th.s.powf(ps / p))
}

/// φ(t) = t^{p−qγ}/p − t^{p*−qγ}/(p* S^{p*/p}), so that h = t^{qγ}(φ − K).
pub fn h_phi(t: f64, params: &Params, s: f64) -> f64 {
    let (p, ps, qg) = (params.p, params.p_star(), params.q_gamma());
    t.powf(p - qg) / p - t.powf(ps - qg) / (ps * s.powf(ps / p))
}

/// Zeros R₀ < R₁ of h. At μ = 0 the lower zero degenerates to 0.
pub fn h_zeros(params: &Params, th: &ThresholdSet) -> Result<(f64, f64)> {
    require_sub(params)?;
    let (p, ps, qg) = (params.p, params.p_star(), params.q_gamma());
    let sp = th.s.powf(ps / p);
    let t_bar = (ps * sp * (p - qg) / (p * (ps - qg))).powf(1.0 / (ps - p));
    let k = h_coeff(params, th);
    let phi = |t: f64| h_phi(t, params, th.s) - k;
    if !(phi(t_bar) > 0.0) {
        return Err(Error::Threshold(format!(
            "mu a^(q(1-gamma)) = {} >= C' : h has no positive region",
            params.scaled_mu()
        )));
    }
    if k < 0.0 {
        return Err(param_err!("h zeros require mu >= 0"));
    }
    let r0 = if k == 0.0 {
        0.0
    } else {
        let mut lo = t_bar * 0.5;
        while phi(lo) > 0.0 {
            lo *= 0.5;
        }
        find_root(phi, lo, t_bar, 1e-13)?
    };
    let mut hi = t_bar * 2.0;
    while phi(hi) > 0.0 {
        hi *= 2.0;
    }
    let r1 = find_root(phi, t_bar, hi, 1e-13)?;
    Ok((r0, r1))
}

/// h̃(t) = t^p/p − K t^{qγ} − τ(t) t^{p*}/(p* S^{p*/p}) with τ the cubic
/// smoothstep from 1 at R₀ to 0 at R₁.
pub fn htilde_function(t: f64, params: &Params, th: &ThresholdSet) -> Result<f64> {
    require_sub(params)?;
    let (r0, r1) = match (th.r0, th.r1) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Threshold("h-tilde needs R0 < R1 (mu below C')".into())),
    };
    let (p, ps) = (params.p, params.p_star());
    let tau = smoothstep_down(t, r0, r1);
    Ok(t.powf(p) / p - h_coeff(params, th) * t.powf(params.q_gamma()) - tau * t.powf(ps) / (ps * th.s.powf(ps / p)))
}

const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub grid_cells: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "C_gn")]
    pub c_gn: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    entries: Vec<CacheEntry>,
}

/// Parameter-keyed store of (S, C_gn). Many readers, one writer; optionally
/// persisted as pretty JSON.
#[derive(Debug, Default)]
pub struct ThresholdCache {
    path: Option<PathBuf>,
    map: RwLock<BTreeMap<String, CacheEntry>>,
}

fn cache_key(n: usize, p: f64, q: f64, grid_cells: usize) -> String {
    format!("N={n};p={p};q={q};M={grid_cells}")
}

impl ThresholdCache {
    pub fn in_memory() -> Self {
        ThresholdCache::default()
    }

    /// Opens (or starts) a cache file. A file with another version is ignored.
    pub fn open(path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let file: CacheFile = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if file.version == CACHE_VERSION {
                for e in file.entries {
                    map.insert(cache_key(e.n, e.p, e.q, e.grid_cells), e);
                }
            } else {
                log::warn!("ignoring threshold cache version {}", file.version);
            }
        }
        Ok(ThresholdCache { path: Some(path.to_path_buf()), map: RwLock::new(map) })
    }

    pub fn get(&self, n: usize, p: f64, q: f64, grid_cells: usize) -> Option<CacheEntry> {
        self.map.read().ok()?.get(&cache_key(n, p, q, grid_cells)).copied()
    }

    pub fn insert(&self, e: CacheEntry) -> Result<()> {
        let mut guard = self.map.write().map_err(|_| Error::Numerical("cache lock poisoned".into()))?;
        guard.insert(cache_key(e.n, e.p, e.q, e.grid_cells), e);
        if let Some(path) = &self.path {
            let file = CacheFile { version: CACHE_VERSION, entries: guard.values().copied().collect() };
            let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        Ok(())
    }

    /// Cached (S, C_gn, φ₀ if freshly computed).
    pub fn constants(&self, n: usize, p: f64, q: f64) -> Result<(f64, f64, Option<GroundStateProfile>)> {
        let opts = crate::ode::ShootOptions::default();
        if let Some(e) = self.get(n, p, q, opts.grid_cells) {
            return Ok((e.s, e.c_gn, None));
        }
        let s = sobolev_constant(n, p)?;
        let phi0 = crate::ode::shoot_ground_state_with(n, p, q, &opts)?;
        let c_gn = gn_constant(&phi0)?;
        self.insert(CacheEntry { n, p, q, grid_cells: opts.grid_cells, s, c_gn })?;
        Ok((s, c_gn, Some(phi0)))
    }
}
