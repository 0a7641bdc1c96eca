//! Radial shooting for the ground state φ₀ of −Δ_p u + u^{p−1} = u^{q−1},
//! and the change of variables that compares solver profiles with φ₀.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::numerics::{integrate_linear, spow};
use crate::params::{classify_regime, derive_exponents, Params, RegimeKind};
use crate::radial::{lr_norm, GridSpec, NormTriple, RadialFunction, RadialGrid};

const STATE: usize = 6;
type State = [f64; STATE];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_bisections: usize,
    pub beta_max: f64,
    /// Cells of the output grid.
    pub grid_cells: usize,
    pub grid_kappa: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { rtol: 1e-12, atol: 1e-16, max_bisections: 200, beta_max: 1e6, grid_cells: 2048, grid_kappa: 2.0 }
    }
}

/// Converged ground state with its norms.
#[derive(Debug, Clone)]
pub struct GroundStateProfile {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub profile: RadialFunction,
    pub beta_star: f64,
    /// (‖∇φ₀‖_p^p, ‖φ₀‖_q^q, ‖φ₀‖_{p*}^{p*}) from the integrated ODE.
    pub norms: NormTriple,
    /// ‖φ₀‖_p^p.
    pub mass_p: f64,
    /// Max local ODE residual, relative to the size of the nonlinear term.
    pub residual: f64,
    /// Radius up to which the shot trajectory is used; beyond it the
    /// asymptotic tail c·r^{−m}e^{−kr} is attached.
    pub r_cut: f64,
    pub bisections: usize,
}

impl GroundStateProfile {
    pub fn converged(&self) -> bool {
        self.residual <= 1e-6 && self.beta_star > 1.0
    }

    /// Pohozaev defect |(N−p)/(Np)A − ∫F| / ((N−p)/(Np)A) with F = −u^p/p + u^q/q.
    pub fn pohozaev_defect(&self) -> f64 {
        let nf = self.n as f64;
        let lhs = (nf - self.p) / (nf * self.p) * self.norms.a;
        let rhs = -self.mass_p / self.p + self.norms.b / self.q;
        (lhs - rhs).abs() / lhs.abs()
    }
}

/// One accepted integration step, kept for dense output.
#[derive(Debug, Clone, Copy)]
struct Node {
    r: f64,
    y: State,
    du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    /// u reached zero: β too large.
    Over,
    /// u′ turned positive while u > 0: β too small.
    Under,
    /// Ran to the end of the interval without either event.
    Neither,
}

struct Shooter {
    n: usize,
    p: f64,
    q: f64,
    omega: f64,
    opts: ShootOptions,
}

impl Shooter {
    fn f(&self, u: f64) -> f64 {
        spow(u, self.p - 1.0) - spow(u, self.q - 1.0)
    }

    fn du(&self, r: f64, v: f64) -> f64 {
        spow(v / r.powi(self.n as i32 - 1), 1.0 / (self.p - 1.0))
    }

    fn rhs(&self, r: f64, y: &State) -> State {
        let u = y[0];
        let du = self.du(r, y[1]);
        let rn = r.powi(self.n as i32 - 1);
        let ps = self.n as f64 * self.p / (self.n as f64 - self.p);
        let au = u.abs();
        [
            du,
            rn * self.f(u),
            self.omega * rn * du.abs().powf(self.p),
            self.omega * rn * au.powf(self.q),
            self.omega * rn * au.powf(ps),
            self.omega * rn * au.powf(self.p),
        ]
    }

    /// Series start at small r0: v ≈ f(β)r^N/N, u ≈ β − (p−1)/p |f(β)/N|^{1/(p−1)} r^{p/(p−1)}.
    fn start(&self, beta: f64, r0: f64) -> State {
        let nf = self.n as f64;
        let p = self.p;
        let ps = nf * p / (nf - p);
        let fb = self.f(beta);
        let c = (fb / nf).abs().powf(1.0 / (p - 1.0));
        let e = p / (p - 1.0);
        let u = beta - (p - 1.0) / p * c * r0.powf(e);
        let v = fb * r0.powi(self.n as i32) / nf;
        let vol = self.omega * r0.powi(self.n as i32) / nf;
        // ∫_0^{r0} |u′|^p r^{N−1}: u′ = −c r^{1/(p−1)}
        let ia = self.omega * c.powf(p) * r0.powf(e + nf) / (e + nf);
        [u, v, ia, vol * beta.powf(self.q), vol * beta.powf(ps), vol * beta.powf(p)]
    }

    fn integrate(&self, beta: f64, r_end: f64, keep: bool) -> Result<(Outcome, Vec<Node>)> {
        let r0 = 1e-4_f64.min(0.01 / (1.0 + self.f(beta).abs()).powf(0.5));
        let mut r = r0;
        let mut y = self.start(beta, r0);
        let mut h = r0;
        let mut nodes = Vec::new();
        if keep {
            nodes.push(Node { r, y, du: self.du(r, y[1]) });
        }
        let mut k1 = self.rhs(r, &y);
        let mut steps = 0usize;
        while r < r_end {
            steps += 1;
            if steps > 2_000_000 {
                return Err(Error::Solver("shooting integrator exceeded its step budget".into()));
            }
            h = h.min(r_end - r);
            let (y5, err, k7) = dopri_step(|rr, yy| self.rhs(rr, yy), r, &y, &k1, h);
            // error norm on (u, v) only; the quadrature channels follow.
            let sc = |i: usize| self.opts.atol + self.opts.rtol * y[i].abs().max(y5[i].abs());
            let en = ((err[0] / sc(0)).powi(2) + (err[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
            if !en.is_finite() {
                h *= 0.2;
                continue;
            }
            if en <= 1.0 {
                r += h;
                y = y5;
                k1 = k7;
                let du = k1[0];
                if keep {
                    nodes.push(Node { r, y, du });
                }
                if y[0] <= 0.0 {
                    return Ok((Outcome::Over, nodes));
                }
                if y[1] > 0.0 {
                    return Ok((Outcome::Under, nodes));
                }
                h *= (0.9 * en.powf(-0.2)).clamp(0.2, 5.0);
            } else {
                h *= (0.9 * en.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h < 1e-14 * r.max(1e-300) {
                return Err(Error::Solver(format!("shooting step size underflow at r = {r}")));
            }
        }
        Ok((Outcome::Neither, nodes))
    }
}

/// One Dormand–Prince 5(4) step. Returns the 5th-order solution, the error
/// estimate and the derivative at the new point (FSAL).
fn dopri_step<F: Fn(f64, &State) -> State>(f: F, t: f64, y: &State, k1: &State, h: f64) -> (State, State, State) {
    const C2: f64 = 1.0 / 5.0;
    const C3: f64 = 3.0 / 10.0;
    const C4: f64 = 4.0 / 5.0;
    const C5: f64 = 8.0 / 9.0;
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;
    let comb = |cs: &[(f64, &State)]| {
        let mut out = *y;
        for i in 0..STATE {
            let mut s = 0.0;
            for (c, k) in cs {
                s += c * k[i];
            }
            out[i] += h * s;
        }
        out
    };
    let k2 = f(t + C2 * h, &comb(&[(A21, k1)]));
    let k3 = f(t + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = comb(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; STATE];
    for i in 0..STATE {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err, k7)
}

/// Exponential decay rate of the linearized tail, k = (p−1)^{−1/p}.
pub fn tail_rate(p: f64) -> f64 {
    (p - 1.0).powf(-1.0 / p)
}

pub fn shoot_ground_state(n: usize, p: f64, q: f64) -> Result<GroundStateProfile> {
    shoot_ground_state_with(n, p, q, &ShootOptions::default())
}

pub fn shoot_ground_state_with(n: usize, p: f64, q: f64, opts: &ShootOptions) -> Result<GroundStateProfile> {
    let (_, p_star) = derive_exponents(n, p, q)?;
    if !(q > p && q < p_star) {
        return Err(param_err!("requires p < q < p* = {p_star}, got q = {q}"));
    }
    let sh = Shooter { n, p, q, omega: crate::numerics::sphere_area(n), opts: *opts };
    let k = tail_rate(p);
    let r_end = 400.0 / k;

    let classify = |beta: f64| sh.integrate(beta, r_end, false).map(|(o, _)| o);
    // β just above 1 undershoots; find an overshooting β by doubling.
    let mut lo = 1.0 + 1e-6;
    if classify(lo)? == Outcome::Over {
        return Err(Error::Solver("shooting: β = 1⁺ already overshoots".into()));
    }
    let mut hi = 2.0;
    let mut trace = Vec::new();
    loop {
        let o = classify(hi)?;
        trace.push((hi, o));
        if o == Outcome::Over {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.beta_max {
            return Err(Error::Solver(format!(
                "shooting bracket not found in [1, {}]; trace: {trace:?}",
                opts.beta_max
            )));
        }
    }
    let mut bisections = 0;
    while bisections < opts.max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        bisections += 1;
        match classify(mid)? {
            Outcome::Over => hi = mid,
            _ => lo = mid,
        }
    }
    let (_, under) = sh.integrate(lo, r_end, true)?;
    let (_, over) = sh.integrate(hi, r_end, true)?;
    let cut = reliable_cut(&under, &over);
    if cut < 4 {
        return Err(Error::Solver("shooting: trajectories diverge immediately".into()));
    }
    let nodes = &under[..=cut];
    let last = nodes[cut];
    let r_c = last.r;
    let u_c = last.y[0];
    let kappa_c = -last.du / u_c;
    let m_exp = ((kappa_c - k) * r_c).max(0.0);
    let tail = Tail { r_c, u_c, k, m: m_exp };

    // Tail integrals by quadrature of the asymptotic form.
    let ps = p_star;
    let omega = sh.omega;
    let r_far = r_c + 60.0 / k;
    let nm1 = n as i32 - 1;
    let ti = |g: &dyn Fn(f64, f64) -> f64| {
        integrate_linear(|r| omega * r.powi(nm1) * g(tail.u(r), tail.du(r)), r_c, r_far, 400)
    };
    let norms = NormTriple {
        a: last.y[2] + ti(&|_, du| du.abs().powf(p)),
        b: last.y[3] + ti(&|u, _| u.powf(q)),
        c: last.y[4] + ti(&|u, _| u.powf(ps)),
    };
    let mass_p = last.y[5] + ti(&|u, _| u.powf(p));

    let residual = ode_residual(&sh, nodes);

    let r_max = r_c + 25.0 / k;
    let grid = Arc::new(RadialGrid::new(n, GridSpec::new(opts.grid_cells, r_max, opts.grid_kappa))?);
    let beta = lo;
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if i + 1 == grid.nodes().len() {
                0.0
            } else if r <= nodes[0].r {
                sh.start(beta, r.max(1e-300))[0].min(beta)
            } else if r <= r_c {
                hermite(nodes, r)
            } else {
                tail.u(r)
            }
        })
        .collect();
    let profile = RadialFunction::new(grid, values)?;
    Ok(GroundStateProfile { n, p, q, profile, beta_star: beta, norms, mass_p, residual, r_cut: r_c, bisections })
}

#[derive(Debug, Clone, Copy)]
struct Tail {
    r_c: f64,
    u_c: f64,
    k: f64,
    m: f64,
}

impl Tail {
    fn u(&self, r: f64) -> f64 {
        self.u_c * (self.r_c / r).powf(self.m) * (-self.k * (r - self.r_c)).exp()
    }
    fn du(&self, r: f64) -> f64 {
        -(self.k + self.m / r) * self.u(r)
    }
}

/// Last index of `a` at which the two bracketing trajectories still agree to
/// 1e−7 relative and u is still decreasing.
fn reliable_cut(a: &[Node], b: &[Node]) -> usize {
    let mut cut = 0;
    for (i, nd) in a.iter().enumerate() {
        if nd.r > b.last().map(|x| x.r).unwrap_or(0.0) || nd.du >= 0.0 || nd.y[0] <= 0.0 {
            break;
        }
        let ub = hermite(b, nd.r);
        if (ub - nd.y[0]).abs() > 1e-7 * nd.y[0] {
            break;
        }
        cut = i;
    }
    cut
}

/// Cubic Hermite interpolation of u through the stored steps.
fn hermite(nodes: &[Node], r: f64) -> f64 {
    let i = nodes.partition_point(|n| n.r <= r).clamp(1, nodes.len() - 1) - 1;
    let (a, b) = (&nodes[i], &nodes[i + 1]);
    let h = b.r - a.r;
    let t = ((r - a.r) / h).clamp(0.0, 1.0);
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * a.y[0]
        + (t3 - 2.0 * t2 + t) * h * a.du
        + (-2.0 * t3 + 3.0 * t2) * b.y[0]
        + (t3 - t2) * h * b.du
}

/// max over steps of |Δv − Simpson(r^{N−1}f(u))| / (h · max|r^{N−1}f(u)|).
fn ode_residual(sh: &Shooter, nodes: &[Node]) -> f64 {
    let nm1 = sh.n as i32 - 1;
    let g = |r: f64, u: f64| r.powi(nm1) * sh.f(u);
    let scale = nodes.iter().fold(0.0f64, |m, nd| m.max(g(nd.r, nd.y[0]).abs()));
    let mut worst = 0.0f64;
    for w in nodes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let h = b.r - a.r;
        let rm = 0.5 * (a.r + b.r);
        let um = hermite(nodes, rm);
        let simpson = h / 6.0 * (g(a.r, a.y[0]) + 4.0 * g(rm, um) + g(b.r, b.y[0]));
        let res = ((b.y[1] - a.y[1]) - simpson).abs() / (h * scale);
        worst = worst.max(res);
    }
    worst
}

/// Which limit the solver profile is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitScaling {
    /// u⁺ as μ → 0⁺ (p < q < p + p²/N).
    MuToZeroPlus,
    /// u⁻ as μ → ᾱ (q = p + p²/N); needs ᾱ and the multiplier λ of `u`.
    MuToAlphaBar { alpha_bar: f64, lambda: f64 },
    /// u⁻ as μ → ∞ (q > p + p²/N).
    MuToInfinity,
}

/// σ₀ = (a^p/‖φ₀‖_p^p)^{p(q−p)/(p²−N(q−p))}.
pub fn sigma0(params: &Params, phi0_mass: f64) -> Result<f64> {
    let denom = params.p * params.p - params.dim() * (params.q - params.p);
    if denom.abs() < 1e-12 {
        return Err(param_err!("sigma0 formula is singular on the mass-critical line"));
    }
    Ok((params.mass() / phi0_mass).powf(params.p * (params.q - params.p) / denom))
}

/// (amplitude, spatial factor) with w(x) = amp·u(k·x).
fn limit_map(params: &Params, scaling: LimitScaling, phi0_mass: f64) -> Result<(f64, f64, f64)> {
    let kind = classify_regime(params);
    let (p, q) = (params.p, params.q);
    match scaling {
        LimitScaling::MuToZeroPlus | LimitScaling::MuToInfinity => {
            let want = if matches!(scaling, LimitScaling::MuToZeroPlus) {
                RegimeKind::Subcritical
            } else {
                RegimeKind::Supercritical
            };
            if kind != want {
                return Err(param_err!("{scaling:?} requires the {want:?} regime, got {kind:?}"));
            }
            if !(params.mu > 0.0) {
                return Err(param_err!("limit map requires mu > 0"));
            }
            let s0 = sigma0(params, phi0_mass)?;
            let d = p - params.q_gamma();
            let amp = s0.powf(1.0 / (p - q)) * params.mu.powf(-params.dim() / (p * d));
            let k = s0.powf(-1.0 / p) * params.mu.powf(-1.0 / d);
            Ok((amp, k, s0))
        }
        LimitScaling::MuToAlphaBar { alpha_bar, lambda } => {
            if kind != RegimeKind::MassCritical {
                return Err(param_err!("MuToAlphaBar requires the MassCritical regime, got {kind:?}"));
            }
            if !(params.mu < alpha_bar) || !(lambda < 0.0) {
                return Err(param_err!("MuToAlphaBar requires mu < alpha_bar and lambda < 0"));
            }
            let nf = params.dim();
            let s_mu = (alpha_bar - params.mu).powf(-(nf - p) / (p * p));
            let s0 = -lambda * s_mu.powf(p);
            let amp = (s0 / alpha_bar).powf(1.0 / (p - q)) * s_mu.powf(nf / p);
            let k = s0.powf(-1.0 / p) * s_mu;
            Ok((amp, k, s0))
        }
    }
}

/// Applies the limit change of variables to `u` and samples the result on
/// φ₀'s grid. Returns the rescaled profile and σ₀.
pub fn rescale_to_limit_profile(
    u: &RadialFunction,
    params: &Params,
    scaling: LimitScaling,
    phi0: &GroundStateProfile,
) -> Result<(RadialFunction, f64)> {
    let (amp, k, s0) = limit_map(params, scaling, phi0.mass_p)?;
    let target = phi0.profile.grid().clone();
    let pc = crate::numerics::Pchip::new(u.grid().nodes(), u.values());
    let rm = u.grid().r_max();
    let values = target
        .nodes()
        .iter()
        .map(|&x| {
            let y = k * x;
            if y >= rm {
                0.0
            } else {
                amp * pc.eval(y)
            }
        })
        .collect();
    Ok((RadialFunction::new(target, values)?, s0))
}

/// Inverse of [`rescale_to_limit_profile`]: the profile predicted by φ₀ for
/// this μ, sampled on `grid` and normalized to mass a^p.
pub fn limit_profile_guess(
    phi0: &GroundStateProfile,
    params: &Params,
    scaling: LimitScaling,
    grid: Arc<RadialGrid>,
) -> Result<RadialFunction> {
    let (amp, k, _) = limit_map(params, scaling, phi0.mass_p)?;
    let rm = phi0.profile.grid().r_max();
    let pc = crate::numerics::Pchip::new(phi0.profile.grid().nodes(), phi0.profile.values());
    let last = grid.nodes().len() - 1;
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let x = y / k;
            if i == last || x >= rm {
                0.0
            } else {
                pc.eval(x) / amp
            }
        })
        .collect();
    let u = RadialFunction::new(grid, values)?;
    crate::radial::mass_normalize(&u, params.p, params.a)
}

/// Stretch factor k of the predicted profile relative to φ₀ (w(x) = amp·u(kx)).
pub fn limit_length_scale(params: &Params, scaling: LimitScaling, phi0_mass: f64) -> Result<f64> {
    Ok(limit_map(params, scaling, phi0_mass)?.1)
}

/// sup|w − φ₀| / sup φ₀ on φ₀'s grid.
pub fn profile_gap(w: &RadialFunction, phi0: &GroundStateProfile) -> f64 {
    let d = w
        .values()
        .iter()
        .zip(phi0.profile.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    d / phi0.profile.sup_norm()
}

/// ‖φ₀‖_p^p recomputed on the grid (consistency diagnostic).
pub fn grid_mass(phi0: &GroundStateProfile) -> f64 {
    lr_norm(&phi0.profile, phi0.p).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{grad_lp_norm, norm_triple};

    #[test]
    fn ground_state_n3_p2_q4() {
        let g = shoot_ground_state(3, 2.0, 4.0).unwrap();
        assert!(g.converged(), "residual {}", g.residual);
        // known shooting height for the cubic NLS ground state in 3D
        assert!((g.beta_star - 4.3373).abs() < 1e-3, "beta = {}", g.beta_star);
        assert!(g.pohozaev_defect() < 1e-6, "{}", g.pohozaev_defect());
        let v = g.profile.values();
        assert!(v.windows(2).all(|w| w[1] - w[0] <= 1e-12));
        assert!(v.iter().all(|&x| x >= 0.0));
        assert!(v[v.len() - 2] < 1e-10);
        let params = Params::new(3, 2.0, 4.0, 1.0, 1.0).unwrap();
        let t = norm_triple(&g.profile, &params);
        assert!((t.a / g.norms.a - 1.0).abs() < 1e-3);
        assert!((t.b / g.norms.b - 1.0).abs() < 1e-3);
        assert!((grid_mass(&g) / g.mass_p - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ground_states_other_exponents() {
        for &(n, p, q) in &[(3usize, 2.0, 2.5), (4, 2.0, 3.0), (3, 2.0, 5.0), (3, 1.6, 2.5), (4, 2.5, 4.0)] {
            let g = shoot_ground_state(n, p, q).unwrap();
            assert!(g.converged(), "({n},{p},{q}) residual {}", g.residual);
            assert!(g.pohozaev_defect() < 1e-4, "({n},{p},{q}) defect {}", g.pohozaev_defect());
            let a = grad_lp_norm(&g.profile, p);
            assert!((a / g.norms.a - 1.0).abs() < 5e-3, "({n},{p},{q}) {a} vs {}", g.norms.a);
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(shoot_ground_state(3, 2.0, 6.0).is_err());
        assert!(shoot_ground_state(3, 2.0, 2.0).is_err());
    }

    #[test]
    fn sigma0_two_codings() {
        let params = Params::new(3, 2.0, 2.5, 1.0, 0.1).unwrap();
        let m = 3.7;
        let e = 2.0 * 0.5 / (4.0 - 1.5);
        let direct = (1.0f64 / m).powf(e);
        let coded = sigma0(&params, m).unwrap();
        assert!((direct - coded).abs() < 1e-14 * direct);
        assert!((e - 0.4).abs() < 1e-15);
        let mc = Params::new(4, 2.0, 3.0, 1.0, 0.1).unwrap();
        assert!(sigma0(&mc, m).is_err());
    }

    #[test]
    fn limit_map_round_trip() {
        let phi0 = shoot_ground_state(3, 2.0, 2.5).unwrap();
        let params = Params::new(3, 2.0, 2.5, 1.0, 0.05).unwrap();
        let ell = limit_length_scale(&params, LimitScaling::MuToZeroPlus, phi0.mass_p).unwrap();
        let r_max = (phi0.profile.grid().r_max() * ell).max(50.0);
        let grid = Arc::new(RadialGrid::new(3, GridSpec::new(4096, r_max, 3.0)).unwrap());
        let guess = limit_profile_guess(&phi0, &params, LimitScaling::MuToZeroPlus, grid).unwrap();
        // mass normalization is nearly a no-op: the map preserves mass
        let (back, _) = rescale_to_limit_profile(&guess, &params, LimitScaling::MuToZeroPlus, &phi0).unwrap();
        assert!(profile_gap(&back, &phi0) < 2e-3, "gap {}", profile_gap(&back, &phi0));
        let wrong = Params::new(3, 2.0, 5.0, 1.0, 0.05).unwrap();
        assert!(rescale_to_limit_profile(&guess, &wrong, LimitScaling::MuToZeroPlus, &phi0).is_err());
    }
}
