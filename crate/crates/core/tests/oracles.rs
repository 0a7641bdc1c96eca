//! Independent oracles for the sharp constants and the ground state.

mod common;

use plap_norm::ode::shoot_ground_state;
use plap_norm::radial::{grad_lp_norm, lr_norm};
use plap_norm::thresholds::{gn_constant, gn_quotient, sobolev_constant};
use plap_norm::derive_exponents;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sobolev_constant_matches_talenti_gamma_formula() {
    for &(n, p) in &[(3usize, 2.0), (4, 2.0), (5, 2.0), (3, 1.5), (4, 3.0), (6, 2.5), (3, 2.7)] {
        let s = sobolev_constant(n, p).unwrap();
        let t = common::talenti_s(n, p);
        assert!((s / t - 1.0).abs() < 1e-8, "(N,p)=({n},{p}): {s} vs {t}");
    }
    // p = 2: S = N(N−2)/4 · |S^N|^{2/N}.
    let n = 3.0f64;
    let sphere = 2.0 * std::f64::consts::PI.powf((n + 1.0) / 2.0) / statrs::function::gamma::gamma((n + 1.0) / 2.0);
    let s3 = n * (n - 2.0) / 4.0 * sphere.powf(2.0 / n);
    assert!((sobolev_constant(3, 2.0).unwrap() / s3 - 1.0).abs() < 1e-8);
}

// −Δ_pφ + φ^{p−1} = φ^{q−1} gives A + M = B (multiplier identity) and
// (N−p)/p·A + N/p·M = N/q·B (Pohozaev).
#[test]
fn ground_state_satisfies_both_integral_identities() {
    for &(n, p, q) in &[(3usize, 2.0, 2.5), (4, 2.0, 3.0), (3, 2.0, 5.0), (4, 3.0, 4.0)] {
        let phi = shoot_ground_state(n, p, q).unwrap();
        assert!(phi.converged());
        let u = &phi.profile;
        let a = grad_lp_norm(u, p);
        let m = lr_norm(u, p).unwrap();
        let b = lr_norm(u, q).unwrap();
        let nf = n as f64;
        assert!(((a + m) / b - 1.0).abs() < 5e-3, "({n},{p},{q}) multiplier: {a} + {m} vs {b}");
        let lhs = (nf - p) / p * a + nf / p * m;
        assert!((lhs / (nf / q * b) - 1.0).abs() < 5e-3, "({n},{p},{q}) pohozaev");
    }
}

// The GN quotient of any trial profile stays below C_gn^q.
#[test]
fn gn_constant_bounds_random_trial_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(n, p, q) in &[(3usize, 2.0, 2.5), (4, 2.0, 3.0), (3, 2.0, 5.0)] {
        let c = gn_constant(&shoot_ground_state(n, p, q).unwrap()).unwrap();
        let (g, _) = derive_exponents(n, p, q).unwrap();
        let grid = common::grid(n);
        let mut best: f64 = 0.0;
        for _ in 0..300 {
            let u = common::random_profile(&mut rng, &grid, p, 1.0);
            let quo = gn_quotient(grad_lp_norm(&u, p), lr_norm(&u, q).unwrap(), lr_norm(&u, p).unwrap(), p, q, g);
            best = best.max(quo);
        }
        assert!(best <= c.powf(q) * (1.0 + 1e-3), "({n},{p},{q}): {best} > {}", c.powf(q));
        assert!(best > 0.5 * c.powf(q));
    }
}
