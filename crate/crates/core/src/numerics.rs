//! Small numerical kernels shared across modules: bracketed root finding,
//! Gauss–Legendre quadrature, a pivoted tridiagonal solver, monotone cubic
//! interpolation and least-squares line fits.

use crate::error::{Error, Result};

/// Brent's method (bisection / secant / inverse quadratic hybrid) on a
/// bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rtol * b.abs().max(1e-300);
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!("non-finite function value at {b}")));
        }
    }
    Err(Error::Numerical("root finder exceeded iteration budget".into()))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ∫_lo^hi f(r) dr for 0 < lo < hi using composite Gauss–Legendre panels
/// uniform in log r. Power-law and exponentially decaying integrands are
/// integrated to near machine precision with a handful of panels per decade.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels_per_decade: usize) -> f64 {
    assert!(lo > 0.0 && hi > lo);
    let (x, w) = gauss_legendre(12);
    let (l0, l1) = (lo.ln(), hi.ln());
    let decades = (l1 - l0) / std::f64::consts::LN_10;
    let panels = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
    let dl = (l1 - l0) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = l0 + k as f64 * dl;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let t = a + 0.5 * dl * (xi + 1.0);
            let r = t.exp();
            s += wi * f(r) * r;
        }
        total += 0.5 * dl * s;
    }
    total
}

/// ∫_lo^hi f(r) dr on a finite interval using uniform Gauss–Legendre panels.
pub fn integrate_linear<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(12);
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = lo + k as f64 * h;
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(a + 0.5 * h * (xi + 1.0)))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

/// Solves a tridiagonal system with partial pivoting (LAPACK `gtsv` scheme).
/// `sub[i]` couples row `i+1` to column `i`, `sup[i]` couples row `i` to
/// column `i+1`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() + 1 == n && sup.len() + 1 == n && rhs.len() == n);
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::Numerical("singular tridiagonal system".into()));
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite tridiagonal solution".into()));
    }
    Ok(x)
}

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant through `(xs, ys)`.
#[derive(Debug, Clone)]
pub struct Pchip<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> Pchip<'a> {
    pub fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        slopes[n - 1] = end_slope(
            h[n - 2],
            if n > 2 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n > 2 { delta[n - 3] } else { delta[n - 2] },
        );
        Pchip { xs, ys, slopes }
    }

    /// Evaluates the interpolant; `x` is clamped to the data range. The last
    /// interval falls back to linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        if i + 2 == n {
            return self.ys[i] + t * (self.ys[i + 1] - self.ys[i]);
        }
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientData(format!("line fit needs >= 2 points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("line fit with identical abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept, r_squared, points: n })
}

/// Cubic smoothstep from 1 (t ≤ lo) down to 0 (t ≥ hi), non-increasing and C¹.
pub fn smoothstep_down(t: f64, lo: f64, hi: f64) -> f64 {
    if t <= lo {
        1.0
    } else if t >= hi {
        0.0
    } else {
        let x = (t - lo) / (hi - lo);
        1.0 - x * x * (3.0 - 2.0 * x)
    }
}

/// Derivative of [`smoothstep_down`] with respect to `t`.
pub fn smoothstep_down_deriv(t: f64, lo: f64, hi: f64) -> f64 {
    if t <= lo || t >= hi {
        0.0
    } else {
        let x = (t - lo) / (hi - lo);
        -6.0 * x * (1.0 - x) / (hi - lo)
    }
}

/// Surface area of the unit sphere in ℝ^N, ω_{N−1} = 2π^{N/2}/Γ(N/2).
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(N/2) for integer N via the half-integer recursion.
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 1e-12 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

/// Signed power |x|^{e-1}·x.
#[inline]
pub fn spow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(e - 1.0) * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_quadrature_power_law() {
        let v = integrate_log(|r| r.powf(-2.5), 1.0, 1e8, 8);
        let exact = (1.0 - 1e8f64.powf(-1.5)) / 1.5;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let sub = [1.0, -2.0, 0.5];
        let diag = [0.1, 3.0, -1.0, 2.0];
        let sup = [4.0, 1.0, 1.0];
        let x_true = [1.0, -2.0, 3.0, 0.5];
        let mut rhs = [0.0; 4];
        for i in 0..4 {
            rhs[i] = diag[i] * x_true[i];
            if i > 0 {
                rhs[i] += sub[i - 1] * x_true[i - 1];
            }
            if i < 3 {
                rhs[i] += sup[i] * x_true[i + 1];
            }
        }
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pchip_is_monotone_and_interpolates() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let p = Pchip::new(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-15);
        }
        let mut prev = f64::INFINITY;
        for k in 0..1000 {
            let v = p.eval(k as f64 * 0.0057);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.r_squared - 1.0).abs() < 1e-14);
    }
}
