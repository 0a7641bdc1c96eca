//! Property tests for the variational structure on random profiles and
//! random norm triples.

mod common;

use std::sync::OnceLock;

use plap_norm::asymptotics::synthetic_pohozaev_triples;
use plap_norm::functionals::{energy, energy_of, fiber_points, pohozaev_of, psi, truncated_energy, FiberClass};
use plap_norm::radial::{norm_triple, NormTriple};
use plap_norm::thresholds::{h_function, htilde_function};
use plap_norm::Params;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sub_setup() -> (Params, f64, f64, f64) {
    static CONSTS: OnceLock<(f64, f64)> = OnceLock::new();
    let &(s, c) = CONSTS.get_or_init(|| common::constants(3, 2.0, 2.5));
    let base = Params::new(3, 2.0, 2.5, 1.0, 1.0).unwrap();
    let alpha = common::thresholds(&base, s, c).alpha.unwrap();
    (base, s, c, alpha)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subcritical_fiber_has_two_ordered_critical_points(seed in any::<u64>(), frac in 0.02f64..0.98) {
        let (base, s, c, alpha) = sub_setup();
        let params = base.with_mu(frac * alpha);
        let th = common::thresholds(&params, s, c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::random_profile(&mut rng, &common::grid(3), 2.0, 1.0);
        let t = norm_triple(&u, &params);
        let f = fiber_points(&t, &params).unwrap();
        prop_assert_eq!(f.classification, FiberClass::TwoCritical);
        let (su, cu, tu, du) = (f.s_u.unwrap(), f.c_u.unwrap(), f.t_u.unwrap(), f.d_u.unwrap());
        prop_assert!(su < cu && cu < tu && tu < du);
        prop_assert!(psi(&t, su, &params).d2 > 0.0 && psi(&t, tu, &params).d2 < 0.0);
        prop_assert!(psi(&t, su, &params).value < 0.0);
        prop_assert!(energy(&u, &params) >= h_function(t.a.sqrt(), &params, &th).unwrap());
    }

    #[test]
    fn truncated_energy_dominates_htilde(seed in any::<u64>(), frac in 0.05f64..0.95) {
        let (base, s, c, alpha) = sub_setup();
        let params = base.with_mu(frac * alpha);
        let th = common::thresholds(&params, s, c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::random_profile(&mut rng, &common::grid(3), 2.0, 1.0);
        let g = norm_triple(&u, &params).a.sqrt();
        let et = truncated_energy(&u, &params, &th).unwrap();
        prop_assert!(et >= htilde_function(g, &params, &th).unwrap());
        if g <= th.r0.unwrap() {
            prop_assert_eq!(et, energy(&u, &params));
        }
    }

    #[test]
    fn one_critical_point_beyond_mass_critical(seed in any::<u64>(), mu in 0.01f64..1e3) {
        let params = Params::new(3, 2.0, 5.0, 1.0, mu).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::random_profile(&mut rng, &common::grid(3), 2.0, 1.0);
        let t = norm_triple(&u, &params);
        let f = fiber_points(&t, &params).unwrap();
        prop_assert_eq!(f.classification, FiberClass::OneCritical);
        prop_assert!(psi(&t, f.t_u.unwrap(), &params).d2 < 0.0);
    }

    // A triple on the Pohozaev manifold with μ < 0 that obeys the Sobolev
    // inequality sits above the Sobolev level in gradient and energy.
    #[test]
    fn negative_mu_pohozaev_triples_exceed_sobolev_level(seed in any::<u64>(), mu in -20.0f64..-1e-3) {
        let s = common::talenti_s(3, 2.0);
        let params = Params::new(3, 2.0, 2.5, 1.0, mu).unwrap();
        let (tr, _) = synthetic_pohozaev_triples(&params, s, 50, seed);
        let lvl = s.powf(1.5);
        for t in tr {
            prop_assert!(pohozaev_of(&t, &params).abs() <= 1e-9 * t.a);
            prop_assert!(t.a > lvl && energy_of(&t, &params) > lvl / 3.0);
        }
    }

    // No degenerate fiber: on the Pohozaev manifold Ψ″(0) stays away from 0
    // for triples obeying the Sobolev and GN inequalities below α.
    #[test]
    fn pohozaev_triples_are_nondegenerate(seed in any::<u64>(), frac in 0.02f64..0.98) {
        use rand::Rng;
        let (base, s, c, alpha) = sub_setup();
        let params = base.with_mu(frac * alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, ps, g, q) = (params.p, params.p_star(), params.gamma_q(), params.q);
        let a = 10f64.powf(rng.gen_range(-2.0..2.0));
        let b_max = c.powf(q) * a.powf(q * g / p);
        let b = rng.gen_range(0.0..1.0) * b_max;
        let cc = a - params.mu * g * b;
        prop_assume!(cc > 0.0 && cc <= s.powf(-ps / p) * a.powf(ps / p));
        let t = NormTriple::new(a, b, cc);
        let d2 = psi(&t, 0.0, &params).d2;
        prop_assert!(d2.abs() > 1e-6 * a, "d2 = {d2}, A = {a}");
    }
}
