//! Energy, Pohozaev functional, fiber map, Lagrange multiplier and the
//! truncated energy, plus the exact derivatives of the discrete energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{find_root, smoothstep_down, spow};
use crate::params::Params;
use crate::radial::{norm_triple, NormTriple, RadialFunction};
use crate::thresholds::ThresholdSet;

/// Denominator guard in the λ-identity residual.
pub const EPS_DEN: f64 = 1e-14;

/// E_μ = A/p − μB/q − C/p* from a norm triple.
pub fn energy_of(t: &NormTriple, params: &Params) -> f64 {
    t.a / params.p - params.mu * t.b / params.q - t.c / params.p_star()
}

/// P_μ = A − μγ_q B − C from a norm triple.
pub fn pohozaev_of(t: &NormTriple, params: &Params) -> f64 {
    t.a - params.mu * params.gamma_q() * t.b - t.c
}

pub fn energy(u: &RadialFunction, params: &Params) -> f64 {
    energy_of(&norm_triple(u, params), params)
}

pub fn pohozaev(u: &RadialFunction, params: &Params) -> f64 {
    pohozaev_of(&norm_triple(u, params), params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Ψ(s) = (A/p)e^{ps} − (μB/q)e^{qγs} − (C/p*)e^{p*s} and its first two
/// derivatives in `s`.
pub fn psi(t: &NormTriple, s: f64, params: &Params) -> PsiValue {
    let (p, q, ps) = (params.p, params.q, params.p_star());
    let g = params.gamma_q();
    let qg = q * g;
    let ea = (p * s).exp();
    let eb = (qg * s).exp();
    let ec = (ps * s).exp();
    let mu = params.mu;
    // d1 at s = 0 reduces to A − μγB − C, the same expression as pohozaev_of.
    PsiValue {
        value: t.a / p * ea - mu * t.b / q * eb - t.c / ps * ec,
        d1: t.a * ea - mu * g * t.b * eb - t.c * ec,
        d2: p * t.a * ea - mu * qg * g * t.b * eb - ps * t.c * ec,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberClass {
    TwoCritical,
    OneCritical,
    NoCritical,
}

/// Critical points and zeros of the fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberPoints {
    /// Local minimum (two-critical case only).
    pub s_u: Option<f64>,
    /// Global maximum.
    pub t_u: Option<f64>,
    /// Zero of Ψ between s_u and t_u.
    pub c_u: Option<f64>,
    /// Zero of Ψ beyond t_u.
    pub d_u: Option<f64>,
    pub classification: FiberClass,
}

impl FiberPoints {
    fn none() -> Self {
        FiberPoints { s_u: None, t_u: None, c_u: None, d_u: None, classification: FiberClass::NoCritical }
    }
}

/// Locates the critical points of Ψ. `Ψ′(s)e^{−ps}` is unimodal or monotone
/// in every regime, so brackets come from its turning point.
pub fn fiber_points(t: &NormTriple, params: &Params) -> Result<FiberPoints> {
    if !(t.a > 0.0) {
        return Err(Error::Degenerate("fiber map needs A > 0".into()));
    }
    let (p, ps) = (params.p, params.p_star());
    let g = params.gamma_q();
    let qg = params.q_gamma();
    let k = params.mu * g * t.b;
    // Ψ′(s)e^{−ps}
    let gfun = |s: f64| t.a - k * ((qg - p) * s).exp() - t.c * ((ps - p) * s).exp();
    let d1 = |s: f64| psi(t, s, params).d1;
    if t.c <= 0.0 && k >= 0.0 {
        return Ok(FiberPoints::none());
    }
    let rel = qg - p;
    let one_root = |lo_start: f64| -> Result<Option<f64>> {
        // gfun positive at lo_start side, negative far right.
        let mut lo = lo_start;
        let mut step = 1.0;
        while gfun(lo) <= 0.0 {
            lo -= step;
            step *= 2.0;
            if lo < -1e3 {
                return Ok(None);
            }
        }
        let mut hi = lo + 1.0;
        step = 1.0;
        while gfun(hi) > 0.0 {
            hi += step;
            step *= 2.0;
            if hi > 1e3 {
                return Ok(None);
            }
        }
        Ok(Some(polish(&d1, &params_d2(t, params), find_root(gfun, lo, hi, 1e-15)?)))
    };
    if k <= 0.0 || rel > MASS_TOL || (rel.abs() <= MASS_TOL && k > 0.0) {
        // Monotone or single-hump-from-positive cases: at most one root.
        if rel.abs() <= MASS_TOL && t.a - k <= 0.0 {
            return Ok(FiberPoints::none());
        }
        if t.c <= 0.0 {
            return Ok(FiberPoints::none());
        }
        let start = if rel.abs() <= MASS_TOL {
            ((t.a - k) / t.c).ln() / (ps - p) - 1.0
        } else {
            (t.a / t.c).ln() / (ps - p) - 1.0
        };
        let root = one_root(start)?;
        return Ok(match root {
            Some(tu) => FiberPoints {
                s_u: None,
                t_u: Some(tu),
                c_u: None,
                d_u: zero_after(t, params, tu),
                classification: FiberClass::OneCritical,
            },
            None => FiberPoints::none(),
        });
    }
    // Subcritical with μB > 0: gfun → −∞ at both ends with a single maximum.
    if t.c <= 0.0 {
        // gfun increasing from −∞ to A: one root, a minimum of Ψ.
        let mut lo = -1.0;
        while gfun(lo) > 0.0 {
            lo *= 2.0;
        }
        let mut hi = 1.0;
        while gfun(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e3 {
                return Ok(FiberPoints::none());
            }
        }
        let su = polish(&d1, &params_d2(t, params), find_root(gfun, lo, hi, 1e-15)?);
        return Ok(FiberPoints { s_u: Some(su), ..FiberPoints::none() });
    }
    let s_star = (k * (p - qg) / (t.c * (ps - p))).ln() / (ps - qg);
    if !(gfun(s_star) > 0.0) {
        return Ok(FiberPoints::none());
    }
    let mut lo = s_star - 1.0;
    let mut step = 1.0;
    while gfun(lo) > 0.0 {
        step *= 2.0;
        lo = s_star - step;
        if step > 1e4 {
            return Err(Error::Numerical("fiber minimum not bracketed".into()));
        }
    }
    let mut hi = s_star + 1.0;
    step = 1.0;
    while gfun(hi) > 0.0 {
        step *= 2.0;
        hi = s_star + step;
        if step > 1e4 {
            return Err(Error::Numerical("fiber maximum not bracketed".into()));
        }
    }
    let d2 = params_d2(t, params);
    let su = polish(&d1, &d2, find_root(gfun, lo, s_star, 1e-15)?);
    let tu = polish(&d1, &d2, find_root(gfun, s_star, hi, 1e-15)?);
    let val = |s: f64| psi(t, s, params).value;
    let c_u = if val(su) < 0.0 && val(tu) > 0.0 {
        Some(find_root(|s| val(s) * (-p * s).exp(), su, tu, 1e-15)?)
    } else {
        None
    };
    Ok(FiberPoints {
        s_u: Some(su),
        t_u: Some(tu),
        c_u,
        d_u: zero_after(t, params, tu),
        classification: FiberClass::TwoCritical,
    })
}

const MASS_TOL: f64 = 1e-9;

fn params_d2<'a>(t: &'a NormTriple, params: &'a Params) -> impl Fn(f64) -> f64 + 'a {
    move |s| psi(t, s, params).d2
}

/// Two Newton steps on Ψ′ to push |Ψ′| to rounding level.
fn polish(d1: &impl Fn(f64) -> f64, d2: &impl Fn(f64) -> f64, mut s: f64) -> f64 {
    for _ in 0..2 {
        let (f, df) = (d1(s), d2(s));
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let next = s - f / df;
        if (d1(next)).abs() < f.abs() {
            s = next;
        } else {
            break;
        }
    }
    s
}

/// Zero of Ψ beyond its maximum `tu`, when Ψ(tu) > 0.
fn zero_after(t: &NormTriple, params: &Params, tu: f64) -> Option<f64> {
    let p = params.p;
    let val = |s: f64| psi(t, s, params).value * (-p * s).exp();
    if !(val(tu) > 0.0) {
        return None;
    }
    let mut hi = tu + 1.0;
    let mut step = 1.0;
    while val(hi) > 0.0 {
        step *= 2.0;
        hi = tu + step;
        if step > 1e4 {
            return None;
        }
    }
    find_root(val, tu, hi, 1e-15).ok()
}

/// λ = (A − μB − C)/a^p and the identity residual
/// |λa^p − μ(γ_q−1)B| / (|λ|a^p + ε).
pub fn lagrange_multiplier_of(t: &NormTriple, params: &Params) -> (f64, f64) {
    let ap = params.mass();
    let lambda = (t.a - params.mu * t.b - t.c) / ap;
    let res = (lambda * ap - params.mu * (params.gamma_q() - 1.0) * t.b).abs() / (lambda.abs() * ap + EPS_DEN);
    (lambda, res)
}

pub fn lagrange_multiplier(u: &RadialFunction, params: &Params) -> (f64, f64) {
    lagrange_multiplier_of(&norm_triple(u, params), params)
}

/// E_τ = A/p − μB/q − τ(‖∇u‖_p)C/p* with τ the cubic smoothstep on [R₀, R₁].
pub fn truncated_energy(u: &RadialFunction, params: &Params, th: &ThresholdSet) -> Result<f64> {
    let (r0, r1) = match (th.r0, th.r1) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Dependency("truncated energy needs R0 < R1 from the thresholds".into())),
    };
    let t = norm_triple(u, params);
    let tau = smoothstep_down(t.a.powf(1.0 / params.p), r0, r1);
    Ok(t.a / params.p - params.mu * t.b / params.q - tau * t.c / params.p_star())
}

/// Exact derivatives of the discrete energy
/// `E = (1/p)Σ w_j φ_δ(D_j) − (μ/q)Σ w_j|ū_j|^q − (1/p*)Σ w_j|ū_j|^{p*}`
/// and of the discrete mass `M = Σ w_j |ū_j|^p`, with respect to nodal values.
/// φ_δ(D) = (D² + δ²)^{p/2} − δ^p regularizes p < 2; δ = 0 otherwise.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteFunctional {
    pub params: Params,
    pub delta: f64,
}

/// Output of [`DiscreteFunctional::components`].
#[derive(Debug, Clone)]
pub struct Components {
    pub triple: NormTriple,
    pub mass: f64,
    pub ga: Vec<f64>,
    pub gb: Vec<f64>,
    pub gc: Vec<f64>,
    pub gm: Vec<f64>,
}

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag { sub: vec![0.0; n.saturating_sub(1)], diag: vec![0.0; n], sup: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        crate::numerics::solve_tridiagonal(&self.sub, &self.diag, &self.sup, rhs)
    }
}

/// Floor applied to |ū| inside negative powers.
const TINY: f64 = 1e-300;

impl DiscreteFunctional {
    pub fn new(params: Params, r_max: f64) -> Self {
        let delta = if params.p < 2.0 { 1e-8 * params.a / r_max } else { 0.0 };
        DiscreteFunctional { params, delta }
    }

    #[inline]
    fn phi(&self, d: f64) -> f64 {
        let p = self.params.p;
        if self.delta == 0.0 {
            d.abs().powf(p)
        } else {
            (d * d + self.delta * self.delta).powf(0.5 * p) - self.delta.powf(p)
        }
    }

    #[inline]
    fn dphi(&self, d: f64) -> f64 {
        let p = self.params.p;
        if self.delta == 0.0 {
            p * spow(d, p - 1.0)
        } else {
            p * d * (d * d + self.delta * self.delta).powf(0.5 * p - 1.0)
        }
    }

    #[inline]
    fn d2phi(&self, d: f64) -> f64 {
        let p = self.params.p;
        if self.delta == 0.0 {
            if p == 2.0 {
                2.0
            } else {
                p * (p - 1.0) * d.abs().max(TINY).powf(p - 2.0)
            }
        } else {
            let s = d * d + self.delta * self.delta;
            p * s.powf(0.5 * p - 2.0) * ((p - 1.0) * d * d + self.delta * self.delta)
        }
    }

    /// Potential density F(ū) = −(μ/q)|ū|^q − (1/p*)|ū|^{p*} and derivatives.
    #[inline]
    fn pot(&self, v: f64) -> (f64, f64, f64) {
        let (q, ps, mu) = (self.params.q, self.params.p_star(), self.params.mu);
        let a = v.abs().max(TINY);
        let aq = a.powf(q - 2.0);
        let ap = a.powf(ps - 2.0);
        let f = -(mu / q) * aq * a * a - ap * a * a / ps;
        let df = -(mu * aq + ap) * v;
        let d2f = -mu * (q - 1.0) * aq - (ps - 1.0) * ap;
        (f, df, d2f)
    }

    #[inline]
    fn mass_density(&self, v: f64) -> (f64, f64, f64) {
        let p = self.params.p;
        let a = v.abs().max(TINY);
        let ap = a.powf(p - 2.0);
        (ap * a * a, p * ap * v, p * (p - 1.0) * ap)
    }

    /// Discrete energy (equal to [`energy`] when δ = 0).
    pub fn energy(&self, u: &RadialFunction) -> f64 {
        let g = u.grid();
        let w = g.cell_weights();
        let mut e = 0.0;
        for (j, wj) in w.iter().enumerate() {
            e += wj * (self.phi(u.slope(j)) / self.params.p + self.pot(u.centroid_value(j)).0);
        }
        e
    }

    pub fn mass(&self, u: &RadialFunction) -> f64 {
        u.integrate_potential(|v| self.mass_density(v).0)
    }

    /// Raw partial derivatives (∂E/∂u_i, ∂M/∂u_i) over all nodes.
    pub fn partials(&self, u: &RadialFunction) -> (Vec<f64>, Vec<f64>) {
        let g = u.grid();
        let (r, w, th) = (g.nodes(), g.cell_weights(), g.centroids());
        let n = r.len();
        let mut ge = vec![0.0; n];
        let mut gm = vec![0.0; n];
        let p = self.params.p;
        for j in 0..w.len() {
            let h = r[j + 1] - r[j];
            let dg = w[j] * self.dphi(u.slope(j)) / (p * h);
            ge[j] -= dg;
            ge[j + 1] += dg;
            let v = u.centroid_value(j);
            let (_, df, _) = self.pot(v);
            let (_, dm, _) = self.mass_density(v);
            ge[j] += w[j] * df * (1.0 - th[j]);
            ge[j + 1] += w[j] * df * th[j];
            gm[j] += w[j] * dm * (1.0 - th[j]);
            gm[j + 1] += w[j] * dm * th[j];
        }
        (ge, gm)
    }

    /// Values and raw partials of the separate terms `A = Σ w φ_δ(D)`,
    /// `B = Σ w|ū|^q`, `C = Σ w|ū|^{p*}` and `M = Σ w|ū|^p`.
    pub fn components(&self, u: &RadialFunction) -> Components {
        let g = u.grid();
        let (r, w, th) = (g.nodes(), g.cell_weights(), g.centroids());
        let n = r.len();
        let (q, ps) = (self.params.q, self.params.p_star());
        let mut out = Components {
            triple: NormTriple::new(0.0, 0.0, 0.0),
            mass: 0.0,
            ga: vec![0.0; n],
            gb: vec![0.0; n],
            gc: vec![0.0; n],
            gm: vec![0.0; n],
        };
        for j in 0..w.len() {
            let h = r[j + 1] - r[j];
            let d = u.slope(j);
            out.triple.a += w[j] * self.phi(d);
            let dg = w[j] * self.dphi(d) / h;
            out.ga[j] -= dg;
            out.ga[j + 1] += dg;
            let v = u.centroid_value(j);
            let av = v.abs().max(TINY);
            let bq = av.powf(q - 2.0);
            let bc = av.powf(ps - 2.0);
            let (m, dm, _) = self.mass_density(v);
            out.triple.b += w[j] * bq * av * av;
            out.triple.c += w[j] * bc * av * av;
            out.mass += w[j] * m;
            let (l, rr) = (w[j] * (1.0 - th[j]), w[j] * th[j]);
            let (db, dc) = (q * bq * v, ps * bc * v);
            out.gb[j] += l * db;
            out.gb[j + 1] += rr * db;
            out.gc[j] += l * dc;
            out.gc[j + 1] += rr * dc;
            out.gm[j] += l * dm;
            out.gm[j + 1] += rr * dm;
        }
        out
    }

    /// Tridiagonal Hessian of `(1/p)·A` alone over the free nodes.
    pub fn gradient_hessian(&self, u: &RadialFunction) -> Tridiag {
        let g = u.grid();
        let (r, w) = (g.nodes(), g.cell_weights());
        let m = w.len();
        let mut h = Tridiag::zeros(m + 1);
        let p = self.params.p;
        for j in 0..m {
            let hj = r[j + 1] - r[j];
            let c = w[j] * self.d2phi(u.slope(j)) / (p * hj * hj);
            h.diag[j] += c;
            h.diag[j + 1] += c;
            h.sup[j] -= c;
            h.sub[j] -= c;
        }
        h.diag.truncate(m);
        h.sup.truncate(m - 1);
        h.sub.truncate(m - 1);
        h
    }

    /// Tridiagonal Hessian of E − ℓM over the free nodes `0..M` (the last node
    /// is pinned to zero).
    pub fn lagrangian_hessian(&self, u: &RadialFunction, ell: f64) -> Tridiag {
        let g = u.grid();
        let (r, w, th) = (g.nodes(), g.cell_weights(), g.centroids());
        let m = w.len();
        let mut h = Tridiag::zeros(m + 1);
        let p = self.params.p;
        for j in 0..m {
            let hj = r[j + 1] - r[j];
            let c = w[j] * self.d2phi(u.slope(j)) / (p * hj * hj);
            h.diag[j] += c;
            h.diag[j + 1] += c;
            h.sup[j] -= c;
            h.sub[j] -= c;
            let v = u.centroid_value(j);
            let e = w[j] * (self.pot(v).2 - ell * self.mass_density(v).2);
            let t = th[j];
            h.diag[j] += e * (1.0 - t) * (1.0 - t);
            h.diag[j + 1] += e * t * t;
            h.sup[j] += e * t * (1.0 - t);
            h.sub[j] += e * t * (1.0 - t);
        }
        h.diag.truncate(m);
        h.sup.truncate(m - 1);
        h.sub.truncate(m - 1);
        h
    }
}

/// Gradient of the discrete energy under the lumped quadrature inner product,
/// `g_i = (∂E/∂u_i)/W_i`; the pinned last node gets 0.
pub fn discrete_energy_gradient(u: &RadialFunction, params: &Params) -> RadialFunction {
    let df = DiscreteFunctional::new(*params, u.grid().r_max());
    let (ge, _) = df.partials(u);
    let nw = u.grid().node_weights();
    let mut g: Vec<f64> = ge.iter().zip(nw).map(|(x, w)| x / w).collect();
    let last = g.len() - 1;
    g[last] = 0.0;
    u.with_values(g)
}
