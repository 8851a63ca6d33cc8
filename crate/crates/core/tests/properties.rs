use comb_nls::field::{eval_v, free_comb, pseudo_conformal_u, synthesize_v, FieldGrid};
use comb_nls::norms::{tilde_hsp_norm, window_spectrum, xsp_norm, WindowSamples, WindowSpec};
use comb_nls::resonance::{index_to_triple, triple_to_index};
use comb_nls::{dynamics, Sequence, C64};
use proptest::prelude::*;

fn seq(k: i64) -> impl Strategy<Value = Sequence> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * k + 1) as usize)
        .prop_map(move |v| Sequence::new(-k, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
}

proptest! {
    #[test]
    fn triple_bijection_round_trips(k in -50i64..50, z in -40i64..40, gap in -40i64..40) {
        prop_assume!(z != 0 && gap != 0);
        let m = 2 * z * gap;
        let (j1, j2, j3) = index_to_triple(k, m, z).unwrap();
        prop_assert_eq!(j1 - j2 + j3, k);
        prop_assert_eq!(k * k - j1 * j1 + j2 * j2 - j3 * j3, m);
        prop_assert_eq!(triple_to_index(k, j1, j2, j3).unwrap(), (m, z));
    }

    #[test]
    fn window_parseval(v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 256), nu in 0i64..40) {
        let w = WindowSpec::new(nu, 256).unwrap();
        let f: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let mean = f.iter().map(|z| z.norm_sqr()).sum::<f64>() / 256.0;
        let e = window_spectrum(&f, &w).unwrap().energy();
        prop_assert!((e - mean).abs() <= 1e-12 * mean.max(1e-300));
    }

    #[test]
    fn tilde_norm_is_homogeneous(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256), re in -3.0f64..3.0, im in -3.0f64..3.0, s in 0.0f64..0.99, p in 1.1f64..4.0) {
        let w = WindowSpec::new(2, 256).unwrap();
        let f: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let lam = C64::new(re, im);
        let g: Vec<C64> = f.iter().map(|z| z * lam).collect();
        let a = tilde_hsp_norm(&window_spectrum(&f, &w).unwrap(), s, p).unwrap();
        let b = tilde_hsp_norm(&window_spectrum(&g, &w).unwrap(), s, p).unwrap();
        prop_assert!((b - lam.norm() * a).abs() <= 1e-11 * (1.0 + b));
    }

    #[test]
    fn xsp_scales_linearly(amp in 0.01f64..10.0, decay in 0.1f64..2.0) {
        let windows: Vec<Vec<WindowSamples<f64>>> = (0..6)
            .map(|nu| {
                let w = WindowSpec::new(nu, 256).unwrap();
                vec![WindowSamples::from_fn(w, |t: f64| C64::from_polar(1.0 / (1.0 + t).powf(decay), 2.0 * t))]
            })
            .collect();
        let scaled: Vec<Vec<WindowSamples<f64>>> = windows
            .iter()
            .map(|ws| ws.iter().map(|s| {
                let w = s.window;
                WindowSamples::from_fn(w, |t: f64| C64::from_polar(amp / (1.0 + t).powf(decay), 2.0 * t))
            }).collect())
            .collect();
        let a = xsp_norm(&windows, 0.75, 2.0).unwrap();
        let b = xsp_norm(&scaled, 0.75, 2.0).unwrap();
        prop_assert!(a.is_finite());
        prop_assert!((b - amp * a).abs() <= 1e-10 * b);
    }

    #[test]
    fn field_parseval(state in seq(6)) {
        let grid = FieldGrid::new(32, 6).unwrap();
        let v = synthesize_v(&state, &grid).unwrap();
        let mean = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
        prop_assert!((mean - state.mass()).abs() <= 1e-12 * state.mass().max(1e-300));
    }

    #[test]
    fn pseudo_conformal_is_an_involution(state in seq(3), t in 0.1f64..5.0, x in -10.0f64..10.0) {
        // A time-dependent test field so both time arguments matter.
        let v = |s: f64, y: f64| eval_v(&state, y) * C64::from_polar(1.0, s * s);
        let once = |s: f64, y: f64| pseudo_conformal_u(v, s, y).unwrap();
        let twice = pseudo_conformal_u(once, t, x).unwrap();
        prop_assert!((twice - v(t, x)).norm() <= 1e-11 * (1.0 + v(t, x).norm()));
        let u = pseudo_conformal_u(v, t, x).unwrap();
        prop_assert!((u.norm() - v(1.0 / t, x / t).norm() / t.sqrt()).abs() <= 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn free_comb_is_transformed_free_field(alpha in seq(3), t in 0.05f64..4.0, x in -6.0f64..6.0) {
        // v(s, y) = w(s/4, y/2) with w(sigma, x) = sum conj(alpha_k) e^{ikx - ik^2 sigma}.
        let w = |s: f64, y: f64| {
            (-3i64..=3)
                .map(|k| alpha.get(k).conj() * C64::from_polar(1.0, k as f64 * y / 2.0 - (k * k) as f64 * s / 4.0))
                .sum::<C64>()
        };
        let direct = free_comb(t, x, &alpha).unwrap();
        let via = pseudo_conformal_u(w, t, x).unwrap();
        prop_assert!((direct - via).norm() <= 1e-11 * (1.0 + direct.norm()));
    }

    #[test]
    fn free_comb_is_linear(a in seq(2), b in seq(2), re in -2.0f64..2.0, t in 0.1f64..3.0, x in -4.0f64..4.0) {
        let lam = C64::new(re, 0.5);
        let sum = Sequence::from_fn(2, |k| a.get(k) + lam * b.get(k));
        let lhs = free_comb(t, x, &sum).unwrap();
        let rhs = free_comb(t, x, &a).unwrap() + lam * free_comb(t, x, &b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn gauge_preserves_moduli_and_inverts(a in seq(3), alpha in seq(3), t in 0.01f64..100.0) {
        let g = dynamics::gauge_apply(t, &a, &alpha).unwrap();
        prop_assert!((g.mass() - a.mass()).abs() <= 1e-14 * (1.0 + a.mass()));
        prop_assert!(dynamics::gauge_remove(t, &g, &alpha).unwrap().max_abs_diff(&a) <= 1e-14);
    }
}
