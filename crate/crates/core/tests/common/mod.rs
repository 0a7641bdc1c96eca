#![allow(dead_code)]

use std::sync::Arc;

use plap_norm::radial::{mass_normalize, GridSpec, RadialFunction, RadialGrid};
use plap_norm::thresholds::{gn_constant, sobolev_constant, threshold_constants, ThresholdSet};
use plap_norm::{ode::shoot_ground_state, Params};
use rand::Rng;
use statrs::function::gamma::gamma;

/// Talenti's sharp constant S in S‖u‖_{p*}^p ≤ ‖∇u‖_p^p, from the closed form
/// with Euler Γ.
pub fn talenti_s(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let c = std::f64::consts::PI.powf(-0.5)
        * nf.powf(-1.0 / p)
        * ((p - 1.0) / (nf - p)).powf(1.0 - 1.0 / p)
        * (gamma(1.0 + nf / 2.0) * gamma(nf) / (gamma(nf / p) * gamma(1.0 + nf - nf / p))).powf(1.0 / nf);
    c.powf(-p)
}

/// (S, C_gn) for (N, p, q).
pub fn constants(n: usize, p: f64, q: f64) -> (f64, f64) {
    let phi0 = shoot_ground_state(n, p, q).unwrap();
    (sobolev_constant(n, p).unwrap(), gn_constant(&phi0).unwrap())
}

pub fn thresholds(params: &Params, s: f64, c_gn: f64) -> ThresholdSet {
    threshold_constants(params, s, c_gn).unwrap()
}

pub fn grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(n, GridSpec::new(1024, 60.0, 6.0)).unwrap())
}

/// Random positive profile: a mixture of up to three Gaussian, algebraic and
/// compactly supported bumps with widths spread over two decades, normalized
/// to mass a^p.
pub fn random_profile<R: Rng>(rng: &mut R, grid: &Arc<RadialGrid>, p: f64, a: f64) -> RadialFunction {
    let terms = rng.gen_range(1..=3);
    let mut spec = Vec::new();
    for _ in 0..terms {
        let kind = rng.gen_range(0..3);
        let w = 10f64.powf(rng.gen_range(-0.7..0.8));
        let c = rng.gen_range(0.2..1.0);
        let shift = if rng.gen_bool(0.3) { rng.gen_range(0.0..2.0) * w } else { 0.0 };
        spec.push((kind, w, c, shift));
    }
    let r_max = grid.r_max();
    let u = RadialFunction::from_fn(grid.clone(), |r| {
        let v: f64 = spec
            .iter()
            .map(|&(kind, w, c, shift)| {
                let x = (r - shift).abs() / w;
                c * match kind {
                    0 => (-x * x).exp(),
                    1 => (1.0 + x * x).powf(-3.0),
                    _ => (1.0 - x * x).max(0.0).powi(3),
                }
            })
            .sum();
        v * (1.0 - r / r_max).powi(2)
    })
    .unwrap();
    mass_normalize(&u, p, a).unwrap()
}
