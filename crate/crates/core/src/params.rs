//! Problem instances `(N, p, q, a, μ)` and their regime classification.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

/// Relative tolerance used to detect `q = p + p²/N`.
pub const MASS_CRITICAL_RTOL: f64 = 1e-9;

/// Problem instance. `mu` may be negative (nonexistence checks); existence
/// solvers reject that themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub mu: f64,
}

/// γ_q = N(q−p)/(pq) and p* = Np/(N−p).
///
/// Accepts the closed range `p ≤ q ≤ p*` so the endpoint identities
/// (γ = 0 at q = p, γ = 1 at q = p*) can be evaluated.
pub fn derive_exponents(n: usize, p: f64, q: f64) -> Result<(f64, f64)> {
    check_dimension(n, p)?;
    let nf = n as f64;
    let p_star = nf * p / (nf - p);
    if !(q.is_finite() && q >= p) {
        return Err(param_err!("requires p <= q, got p = {p}, q = {q}"));
    }
    if q > p_star * (1.0 + 1e-14) {
        return Err(param_err!("requires q <= p* = {p_star}, got q = {q}"));
    }
    Ok((nf * (q - p) / (p * q), p_star))
}

fn check_dimension(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(param_err!("requires N >= 2, got N = {n}"));
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(param_err!("requires 1 < p, got p = {p}"));
    }
    if p >= n as f64 {
        return Err(param_err!("requires p < N, got p = {p}, N = {n}"));
    }
    Ok(())
}

impl Params {
    pub fn new(n: usize, p: f64, q: f64, a: f64, mu: f64) -> Result<Self> {
        check_dimension(n, p)?;
        let p_star = n as f64 * p / (n as f64 - p);
        if !(q.is_finite() && q > p) {
            return Err(param_err!(
                "requires p < q (the range 2 < q <= p is unsupported), got p = {p}, q = {q}"
            ));
        }
        if q >= p_star {
            return Err(param_err!("requires q < p* = {p_star}, got q = {q}"));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(param_err!("requires a > 0, got a = {a}"));
        }
        if !mu.is_finite() {
            return Err(param_err!("requires finite mu, got {mu}"));
        }
        Ok(Params { n, p, q, a, mu })
    }

    pub fn validate(&self) -> Result<()> {
        Params::new(self.n, self.p, self.q, self.a, self.mu).map(|_| ())
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Params { mu, ..*self }
    }

    pub fn with_a(&self, a: f64) -> Self {
        Params { a, ..*self }
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    pub fn gamma_q(&self) -> f64 {
        self.dim() * (self.q - self.p) / (self.p * self.q)
    }

    pub fn p_star(&self) -> f64 {
        self.dim() * self.p / (self.dim() - self.p)
    }

    /// q γ_q, the fiber-scaling exponent of the ‖u‖_q^q term.
    pub fn q_gamma(&self) -> f64 {
        self.q * self.gamma_q()
    }

    /// The mass-critical exponent p + p²/N.
    pub fn mass_critical_q(&self) -> f64 {
        self.p + self.p * self.p / self.dim()
    }

    /// Prescribed L^p mass a^p.
    pub fn mass(&self) -> f64 {
        self.a.powf(self.p)
    }

    /// The scale-invariant coupling μ a^{q(1−γ_q)} compared against C′, C″, α.
    pub fn scaled_mu(&self) -> f64 {
        self.mu * self.a.powf(self.q * (1.0 - self.gamma_q()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// p < q < p + p²/N
    Subcritical,
    /// q = p + p²/N
    MassCritical,
    /// p + p²/N < q < p*
    Supercritical,
}

/// Regime of an instance together with whether μ satisfies the existence
/// condition that applies to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub mu_bound_ok: bool,
}

/// Classifies by the sign of q − (p + p²/N), with a relative tolerance for
/// the mass-critical line.
pub fn classify_regime(params: &Params) -> RegimeKind {
    let qc = params.mass_critical_q();
    let diff = params.q - qc;
    let kind = if diff.abs() <= MASS_CRITICAL_RTOL * qc {
        RegimeKind::MassCritical
    } else if diff < 0.0 {
        RegimeKind::Subcritical
    } else {
        RegimeKind::Supercritical
    };
    debug_assert!(
        kind == RegimeKind::MassCritical
            || (params.q_gamma() - params.p).signum() == diff.signum(),
        "sign(qγ − p) disagrees with sign(q − p − p²/N)"
    );
    kind
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_n3_p2_q4() {
        let (g, ps) = derive_exponents(3, 2.0, 4.0).unwrap();
        assert!((g - 0.75).abs() < 1e-15);
        assert!((ps - 6.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_endpoints() {
        assert_eq!(derive_exponents(3, 2.0, 2.0).unwrap().0, 0.0);
        let (g, _) = derive_exponents(5, 1.7, 5.0 * 1.7 / (5.0 - 1.7)).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
    }

    #[test]
    fn domain_violations_name_the_inequality() {
        let e = derive_exponents(3, 3.0, 4.0).unwrap_err().to_string();
        assert!(e.contains("p < N"), "{e}");
        let e = derive_exponents(3, 2.0, 7.0).unwrap_err().to_string();
        assert!(e.contains("q <= p*"), "{e}");
        let e = Params::new(3, 2.0, 1.9, 1.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("p < q"), "{e}");
        let e = Params::new(3, 2.0, 3.0, -1.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("a > 0"), "{e}");
        assert!(Params::new(1, 0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        let p = |n, q| Params::new(n, 2.0, q, 1.0, 1.0).unwrap();
        assert_eq!(classify_regime(&p(3, 3.0)), RegimeKind::Subcritical);
        assert_eq!(classify_regime(&p(4, 3.0)), RegimeKind::MassCritical);
        assert_eq!(classify_regime(&p(3, 5.0)), RegimeKind::Supercritical);
        // floating-point q on the critical line
        assert_eq!(classify_regime(&p(3, 2.0 + 4.0 / 3.0)), RegimeKind::MassCritical);
        assert_eq!(classify_regime(&p(3, 10.0 / 3.0 + 1e-6)), RegimeKind::Supercritical);
    }

    #[test]
    fn negative_mu_is_accepted() {
        assert!(Params::new(3, 2.0, 3.0, 1.0, -2.0).is_ok());
    }
}
