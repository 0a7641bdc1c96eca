//! Radial discretization of W^{1,p}(ℝ^N).
//!
//! Nodes follow a geometric law `r_i = R(e^{κi/M} − 1)/(e^κ − 1)`. Every
//! integral is a sum over cells `[r_j, r_{j+1}]` with the exact weight
//! `w_j = ω_{N−1}∫ s^{N−1} ds`; potential terms are sampled at the weighted
//! cell centroid (linear interpolation between the two end nodes), gradient
//! terms use the forward difference on the cell. The solvers differentiate
//! exactly these sums.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::numerics::{sphere_area, Pchip};
use crate::params::Params;

/// Fraction of mass allowed in the last decade of the grid before a warning.
pub const TAIL_MASS_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of cells (nodes are `0..=m`).
    pub m: usize,
    pub r_max: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    4.0
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { m: 1024, r_max: 50.0, kappa: 4.0 }
    }
}

impl GridSpec {
    pub fn new(m: usize, r_max: f64, kappa: f64) -> Self {
        GridSpec { m, r_max, kappa }
    }

    /// Same resolution with the domain scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        GridSpec { r_max: self.r_max * factor, ..*self }
    }

    /// Grid whose first cell is `r1` wide, keeping `m` and `r_max`.
    pub fn with_first_cell(m: usize, r_max: f64, r1: f64) -> Result<Self> {
        // r1/R = (e^{κ/M}−1)/(e^κ−1) is decreasing in κ; solve for κ.
        let target = r1 / r_max;
        let mf = m as f64;
        if !(target > 0.0 && target < 1.0 / mf) {
            return Err(param_err!("first cell {r1} must lie in (0, r_max/m)"));
        }
        let f = |k: f64| ((k / mf).exp_m1() / k.exp_m1()).ln() - target.ln();
        let kappa = crate::numerics::find_root(f, 1e-6, 700.0, 1e-12)?;
        Ok(GridSpec { m, r_max, kappa })
    }
}

/// Immutable radial grid with precomputed quadrature data.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    spec: GridSpec,
    r: Vec<f64>,
    /// Cell weights ω∫_{r_j}^{r_{j+1}} s^{N−1} ds.
    w: Vec<f64>,
    /// Relative centroid position of each cell in [0, 1].
    theta: Vec<f64>,
    /// Lumped node weights W_i = w_i(1−θ_i) + w_{i−1}θ_{i−1}.
    node_w: Vec<f64>,
    surface_const: f64,
}

impl RadialGrid {
    pub fn new(n: usize, spec: GridSpec) -> Result<Self> {
        if n < 2 {
            return Err(param_err!("requires N >= 2, got N = {n}"));
        }
        if spec.m < 64 {
            return Err(param_err!("requires M >= 64 cells, got {}", spec.m));
        }
        if !(spec.r_max.is_finite() && spec.r_max > 0.0) {
            return Err(param_err!("requires R_max > 0, got {}", spec.r_max));
        }
        if !(spec.kappa.is_finite() && spec.kappa > 0.0) {
            return Err(param_err!("requires kappa > 0, got {}", spec.kappa));
        }
        let m = spec.m;
        let denom = spec.kappa.exp_m1();
        let mut r: Vec<f64> = (0..=m)
            .map(|i| spec.r_max * (spec.kappa * i as f64 / m as f64).exp_m1() / denom)
            .collect();
        r[0] = 0.0;
        r[m] = spec.r_max;
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(param_err!("grid nodes not strictly increasing (kappa too large?)"));
        }
        let omega = sphere_area(n);
        let mut w = Vec::with_capacity(m);
        let mut theta = Vec::with_capacity(m);
        for j in 0..m {
            let (a, b) = (r[j], r[j + 1]);
            let h = b - a;
            // b^N − a^N = h Σ b^k a^{N−1−k}; same for N+1. No cancellation.
            let s_n = power_sum(a, b, n);
            let s_n1 = power_sum(a, b, n + 1);
            w.push(omega * h * s_n / n as f64);
            let centroid = n as f64 / (n as f64 + 1.0) * s_n1 / s_n;
            theta.push(((centroid - a) / h).clamp(0.0, 1.0));
        }
        let mut node_w = vec![0.0; m + 1];
        for j in 0..m {
            node_w[j] += w[j] * (1.0 - theta[j]);
            node_w[j + 1] += w[j] * theta[j];
        }
        Ok(RadialGrid { n, spec, r, w, theta, node_w, surface_const: omega })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn nodes(&self) -> &[f64] {
        &self.r
    }
    pub fn cells(&self) -> usize {
        self.spec.m
    }
    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }
    pub fn cell_weights(&self) -> &[f64] {
        &self.w
    }
    pub fn centroids(&self) -> &[f64] {
        &self.theta
    }
    pub fn node_weights(&self) -> &[f64] {
        &self.node_w
    }
    pub fn surface_const(&self) -> f64 {
        self.surface_const
    }
    /// Width of the first cell, r₁.
    pub fn first_cell(&self) -> f64 {
        self.r[1]
    }
    /// Largest admissible fiber parameter, ln(R_max/(10 r₁)).
    pub fn s_cap(&self) -> f64 {
        (self.spec.r_max / (10.0 * self.r[1])).ln()
    }

    /// Centroid abscissa of cell `j`.
    pub fn centroid_r(&self, j: usize) -> f64 {
        self.r[j] + self.theta[j] * (self.r[j + 1] - self.r[j])
    }
}

fn power_sum(a: f64, b: f64, n: usize) -> f64 {
    // Σ_{k=0}^{n−1} b^k a^{n−1−k}
    let mut s = 0.0;
    let mut bk = 1.0;
    for k in 0..n {
        s += bk * a.powi((n - 1 - k) as i32);
        bk *= b;
    }
    s
}

/// Nodal values of a radial profile on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl PartialEq for RadialFunction {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid) && self.values == other.values
    }
}

impl RadialFunction {
    /// Wraps nodal values. Values must be finite; decaying profiles are
    /// expected to vanish at R_max, which the solvers enforce.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.r.len() {
            return Err(param_err!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.r.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite profile value at node {i}")));
        }
        Ok(RadialFunction { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Result<Self> {
        let values = grid.r.iter().map(|&r| f(r)).collect();
        RadialFunction::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.r.len();
        RadialFunction { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Same grid, new values (length must match).
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        RadialFunction { grid: self.grid.clone(), values }
    }

    /// Value at the weighted centroid of cell `j`.
    #[inline]
    pub fn centroid_value(&self, j: usize) -> f64 {
        let t = self.grid.theta[j];
        (1.0 - t) * self.values[j] + t * self.values[j + 1]
    }

    /// Forward difference on cell `j`.
    #[inline]
    pub fn slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) / (self.grid.r[j + 1] - self.grid.r[j])
    }

    /// Pointwise evaluation by monotone cubic interpolation; zero beyond R_max.
    pub fn eval(&self, r: f64) -> f64 {
        if r > self.grid.r_max() {
            return 0.0;
        }
        Pchip::new(&self.grid.r, &self.values).eval(r)
    }

    /// Resamples onto another grid of the same dimension.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> Result<Self> {
        if grid.dim() != self.grid.dim() {
            return Err(param_err!("dimension mismatch in resample"));
        }
        let pc = Pchip::new(&self.grid.r, &self.values);
        let rm = self.grid.r_max();
        let values = grid.r.iter().map(|&r| if r >= rm { 0.0 } else { pc.eval(r) }).collect();
        RadialFunction::new(grid, values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// ∫ F(u) over ℝ^N using the centroid rule.
    pub fn integrate_potential<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let w = &self.grid.w;
        (0..w.len()).map(|j| w[j] * f(self.centroid_value(j))).sum()
    }

    /// ∫ G(|u′|) over ℝ^N using forward differences.
    pub fn integrate_gradient<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let w = &self.grid.w;
        (0..w.len()).map(|j| w[j] * g(self.slope(j).abs())).sum()
    }
}

/// (A, B, C) = (‖∇u‖_p^p, ‖u‖_q^q, ‖u‖_{p*}^{p*}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTriple {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl NormTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        NormTriple { a, b, c }
    }

    /// Discrete Sobolev check C ≤ S^{−p*/p}A^{p*/p}(1 + rtol).
    pub fn sobolev_consistent(&self, params: &Params, s: f64, rtol: f64) -> bool {
        let ps = params.p_star();
        self.c <= s.powf(-ps / params.p) * self.a.powf(ps / params.p) * (1.0 + rtol)
    }
}

/// ‖u‖_r^r = ω_{N−1}∫|u|^r s^{N−1} ds.
pub fn lr_norm(u: &RadialFunction, r_exp: f64) -> Result<f64> {
    if !(r_exp >= 1.0) {
        return Err(param_err!("requires r >= 1, got {r_exp}"));
    }
    Ok(u.integrate_potential(|v| v.abs().powf(r_exp)))
}

/// ‖∇u‖_p^p from forward differences; the same sum the solvers differentiate.
pub fn grad_lp_norm(u: &RadialFunction, p: f64) -> f64 {
    u.integrate_gradient(|d| d.powf(p))
}

/// (a/‖u‖_p)·u, so that the result has ‖·‖_p^p = a^p.
pub fn mass_normalize(u: &RadialFunction, p: f64, a: f64) -> Result<RadialFunction> {
    let m = lr_norm(u, p)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Degenerate("cannot normalize a zero profile".into()));
    }
    let v = u.scaled(a / m.powf(1.0 / p));
    // One correction pass removes the rounding left by the power.
    let m2 = lr_norm(&v, p)?;
    Ok(v.scaled((a.powf(p) / m2).powf(1.0 / p)))
}

/// s ⋆ u = e^{Ns/p} u(e^s ·), resampled on the same grid and re-normalized to
/// the original L^p mass.
pub fn fiber_rescale(u: &RadialFunction, s: f64, p: f64) -> Result<RadialFunction> {
    if !s.is_finite() {
        return Err(Error::Range(format!("fiber parameter must be finite, got {s}")));
    }
    if s == 0.0 {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let cap = grid.s_cap();
    if s.abs() > cap {
        return Err(Error::Range(format!("|s| = {} exceeds s_cap = {cap}", s.abs())));
    }
    let es = s.exp();
    let amp = (grid.dim() as f64 * s / p).exp();
    let pc = Pchip::new(grid.nodes(), u.values());
    let rm = grid.r_max();
    let mut values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let x = es * r;
            if x >= rm {
                0.0
            } else {
                amp * pc.eval(x)
            }
        })
        .collect();
    let last = values.len() - 1;
    values[last] = 0.0;
    let v = u.with_values(values);
    let mass = lr_norm(u, p)?;
    if mass == 0.0 {
        return Ok(v);
    }
    mass_normalize(&v, p, mass.powf(1.0 / p))
}

pub fn norm_triple(u: &RadialFunction, params: &Params) -> NormTriple {
    NormTriple {
        a: grad_lp_norm(u, params.p),
        b: u.integrate_potential(|v| v.abs().powf(params.q)),
        c: u.integrate_potential(|v| v.abs().powf(params.p_star())),
    }
}

/// Share of ‖u‖_p^p carried by the last decade r > R_max/10.
pub fn tail_mass_fraction(u: &RadialFunction, p: f64) -> f64 {
    let g = u.grid();
    let cut = g.r_max() / 10.0;
    let (mut tail, mut total) = (0.0, 0.0);
    for j in 0..g.cells() {
        let c = g.w[j] * u.centroid_value(j).abs().powf(p);
        total += c;
        if g.r[j] >= cut {
            tail += c;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Logs a warning when the tail carries more than [`TAIL_MASS_WARN`].
pub fn check_tail_mass(u: &RadialFunction, p: f64, label: &str) -> f64 {
    let f = tail_mass_fraction(u, p);
    if f > TAIL_MASS_WARN {
        log::warn!("{label}: last grid decade carries {f:.3e} of the mass; consider a larger R_max");
    }
    f
}

/// Writes the profile as CSV: `#` header lines with N, p and grid data,
/// then `r,u` rows. Floats round-trip exactly.
pub fn write_profile_csv(u: &RadialFunction, p: f64, path: &Path) -> Result<()> {
    let g = u.grid();
    let spec = g.spec();
    let mut s = String::new();
    let _ = writeln!(s, "# N={}", g.dim());
    let _ = writeln!(s, "# p={}", p);
    let _ = writeln!(s, "# M={}", spec.m);
    let _ = writeln!(s, "# r_max={}", spec.r_max);
    let _ = writeln!(s, "# kappa={}", spec.kappa);
    s.push_str("r,u\n");
    for (r, v) in g.nodes().iter().zip(u.values()) {
        let _ = writeln!(s, "{r},{v}");
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads a profile written by [`write_profile_csv`]; returns it with its `p`.
pub fn read_profile_csv(path: &Path) -> Result<(RadialFunction, f64)> {
    let f = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(f);
    let (mut n, mut p, mut m, mut r_max, mut kappa) = (None, None, None, None, None);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let bad = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let (k, v) = h
                .trim()
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header line {}", lineno + 1)))?;
            let v = v.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("header {k}: {e}")));
            match k.trim() {
                "N" => n = Some(v.parse::<usize>().map_err(|e| bad(format!("header N: {e}")))?),
                "p" => p = Some(num(v)?),
                "M" => m = Some(v.parse::<usize>().map_err(|e| bad(format!("header M: {e}")))?),
                "r_max" => r_max = Some(num(v)?),
                "kappa" => kappa = Some(num(v)?),
                other => return Err(bad(format!("unknown header key {other}"))),
            }
            continue;
        }
        if line == "r,u" {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("malformed row at line {}", lineno + 1)))?;
        let r: f64 = a.trim().parse().map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
        let v: f64 = b.trim().parse().map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
        rows.push((r, v));
    }
    let missing = |k: &str| bad(format!("missing header {k}"));
    let spec = GridSpec {
        m: m.ok_or_else(|| missing("M"))?,
        r_max: r_max.ok_or_else(|| missing("r_max"))?,
        kappa: kappa.ok_or_else(|| missing("kappa"))?,
    };
    let grid = RadialGrid::new(n.ok_or_else(|| missing("N"))?, spec).map_err(|e| bad(e.to_string()))?;
    if rows.len() != grid.nodes().len() {
        return Err(bad(format!("expected {} rows, found {}", grid.nodes().len(), rows.len())));
    }
    for (i, ((r, _), rg)) in rows.iter().zip(grid.nodes()).enumerate() {
        if (r - rg).abs() > 1e-12 * rg.abs().max(1e-300) {
            return Err(bad(format!("node {i} at r = {r} does not match the grid ({rg})")));
        }
    }
    let values = rows.into_iter().map(|(_, v)| v).collect();
    let u = RadialFunction::new(Arc::new(grid), values).map_err(|e| bad(e.to_string()))?;
    Ok((u, p.ok_or_else(|| missing("p"))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, m: usize, r_max: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(n, GridSpec::new(m, r_max, 4.0)).unwrap())
    }

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = grid(3, 200, 2.0);
        let vol: f64 = g.cell_weights().iter().sum();
        assert!((vol - 4.0 * PI / 3.0 * 8.0).abs() < 1e-11 * vol);
        let nw: f64 = g.node_weights().iter().sum();
        assert!((nw - vol).abs() < 1e-12 * vol);
        assert!(g.centroids().iter().all(|t| (0.0..=1.0).contains(t)));
    }

    #[test]
    fn rejects_small_grids() {
        assert!(RadialGrid::new(3, GridSpec::new(32, 10.0, 4.0)).is_err());
        assert!(RadialGrid::new(3, GridSpec::new(64, -1.0, 4.0)).is_err());
    }

    #[test]
    fn zero_function_norms() {
        let u = RadialFunction::zeros(grid(3, 128, 10.0));
        assert_eq!(lr_norm(&u, 2.0).unwrap(), 0.0);
        assert_eq!(grad_lp_norm(&u, 2.0), 0.0);
        assert!(matches!(mass_normalize(&u, 2.0, 1.0), Err(Error::Degenerate(_))));
        assert!(lr_norm(&u, 0.5).is_err());
    }

    #[test]
    fn hat_volume_and_cone_gradient() {
        // u = 1 on [0,1], then a steep ramp: ∫|u| ≈ 4π/3.
        let g = grid(3, 4000, 2.0);
        let u = RadialFunction::from_fn(g, |r| (1.0 - (r - 1.0).max(0.0) * 1e3).clamp(0.0, 1.0)).unwrap();
        let v = lr_norm(&u, 1.0).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 2e-3 * v, "{v}");

        let g2 = grid(2, 2000, 1.0);
        let cone = RadialFunction::from_fn(g2, |r| (1.0 - r).max(0.0)).unwrap();
        let a = grad_lp_norm(&cone, 2.0);
        assert!((a - PI).abs() < 1e-12, "{a}");
    }

    #[test]
    fn normalization_and_homogeneity() {
        let g = grid(3, 512, 30.0);
        let u = RadialFunction::from_fn(g, |r| (-(r * r) / 3.0).exp() * (1.0 + 0.3 * r)).unwrap();
        let v = mass_normalize(&u, 2.5, 1.3).unwrap();
        let m = lr_norm(&v, 2.5).unwrap();
        assert!((m - 1.3f64.powf(2.5)).abs() < 1e-12 * m);
        let v7 = mass_normalize(&u.scaled(7.0), 2.5, 1.3).unwrap();
        for (x, y) in v.values().iter().zip(v7.values()) {
            assert!((x - y).abs() < 1e-13);
        }
        let b = lr_norm(&u, 3.0).unwrap();
        let b2 = lr_norm(&u.scaled(-2.0), 3.0).unwrap();
        assert!((b2 - 8.0 * b).abs() < 1e-12 * b2);
    }

    #[test]
    fn gaussian_norms_match_closed_form() {
        // u = e^{-r²}: ‖u‖_2^2 = (π/2)^{3/2}, ‖∇u‖_2^2 = 3(π/2)^{3/2} in N=3.
        let g = grid(3, 2000, 12.0);
        let u = RadialFunction::from_fn(g, |r| (-r * r).exp()).unwrap();
        let m = lr_norm(&u, 2.0).unwrap();
        let exact = (PI / 2.0).powf(1.5);
        assert!((m - exact).abs() < 1e-5 * exact, "{m} vs {exact}");
        let a = grad_lp_norm(&u, 2.0);
        assert!((a - 3.0 * exact).abs() < 1e-5 * a, "{a}");
    }

    #[test]
    fn refinement_order_is_second() {
        let f = |r: f64| (-r * r).exp() * (1.0 + r);
        let vals: Vec<(f64, f64)> = [256, 512, 1024]
            .iter()
            .map(|&m| {
                let u = RadialFunction::from_fn(grid(3, m, 10.0), f).unwrap();
                (lr_norm(&u, 3.0).unwrap(), grad_lp_norm(&u, 2.0))
            })
            .collect();
        for k in 0..2 {
            let sel = |t: (f64, f64)| if k == 0 { t.0 } else { t.1 };
            let e1 = (sel(vals[0]) - sel(vals[1])).abs();
            let e2 = (sel(vals[1]) - sel(vals[2])).abs();
            let order = (e1 / e2).log2();
            assert!(order >= 1.8, "component {k}: order {order}");
        }
    }

    #[test]
    fn fiber_rescale_scales_norms() {
        let g = grid(3, 2000, 60.0);
        let u = RadialFunction::from_fn(g, |r| (-r * r / 4.0).exp()).unwrap();
        let params = Params::new(3, 2.0, 3.0, 1.0, 1.0).unwrap();
        let t0 = norm_triple(&u, &params);
        for &s in &[-1.0, -0.4, 0.3, 1.0] {
            let v = fiber_rescale(&u, s, 2.0).unwrap();
            let t = norm_triple(&v, &params);
            let qg = params.q_gamma();
            assert!((t.a / (t0.a * (2.0 * s).exp()) - 1.0).abs() < 1e-4, "A at s={s}");
            assert!((t.b / (t0.b * (qg * s).exp()) - 1.0).abs() < 1e-4, "B at s={s}");
            assert!((t.c / (t0.c * (6.0 * s).exp()) - 1.0).abs() < 1e-4, "C at s={s}");
            let back = fiber_rescale(&v, -s, 2.0).unwrap();
            let err = back.values().iter().zip(u.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-4, "round trip {err}");
        }
        assert_eq!(fiber_rescale(&u, 0.0, 2.0).unwrap(), u);
        assert!(matches!(fiber_rescale(&u, 50.0, 2.0), Err(Error::Range(_))));
    }

    #[test]
    fn first_cell_spec() {
        let s = GridSpec::with_first_cell(1000, 100.0, 1e-4).unwrap();
        let g = RadialGrid::new(3, s).unwrap();
        assert!((g.first_cell() / 1e-4 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let u = RadialFunction::from_fn(grid(4, 100, 7.0), |r| 1.0 / (1.0 + r * r) - 1.0 / 50.0).unwrap();
        write_profile_csv(&u, 1.7, &path).unwrap();
        let (v, p) = read_profile_csv(&path).unwrap();
        assert_eq!(p, 1.7);
        assert_eq!(u.values(), v.values());
        assert_eq!(u.grid().nodes(), v.grid().nodes());
    }

    #[test]
    fn tail_fraction() {
        let u = RadialFunction::from_fn(grid(3, 256, 100.0), |r| (-r * r).exp()).unwrap();
        assert!(tail_mass_fraction(&u, 2.0) < 1e-6);
        let g = grid(3, 256, 10.0);
        let flat = RadialFunction::from_fn(g, |r| 10.0 - r).unwrap();
        assert!(tail_mass_fraction(&flat, 2.0) > 1e-2);
    }
}
