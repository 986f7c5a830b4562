use logdamp::oracle::{mode_relative_error, rk4_mode};
use logdamp::propagator::{mode_energy, mode_solution};
use logdamp::symbols::{roots, thresholds, DampingParams};
use logdamp::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn params(theta: f64) -> DampingParams {
    DampingParams::new(theta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn mode_energy_never_grows(
        r in 0.0f64..50.0,
        theta in 0.51f64..4.0,
        t1 in 0.0f64..200.0,
        dt in 0.0f64..200.0,
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
    ) {
        let p = params(theta);
        let u1 = Complex64::new(re, im);
        let e1 = mode_energy(&mode_solution(r, &p, t1, u1).unwrap());
        let e2 = mode_energy(&mode_solution(r, &p, t1 + dt, u1).unwrap());
        prop_assert!(e2 <= e1 + 1e-12);
    }

    #[test]
    fn initial_conditions(r in 0.0f64..1e4, theta in 0.51f64..4.0, re in -2.0f64..2.0) {
        let s = mode_solution(r, &params(theta), 0.0, Complex64::new(re, 1.0)).unwrap();
        prop_assert_eq!(s.u, Complex64::new(0.0, 0.0));
        prop_assert_eq!(s.v, Complex64::new(re, 1.0));
    }

    #[test]
    fn high_frequency_decay(k in 0.0f64..1.0, theta in prop::sample::select(vec![0.6, 0.75, 1.0, 1.5, 3.0]), t in 0.0f64..300.0) {
        let p = params(theta);
        let th = thresholds(&p).unwrap();
        let r = th.delta1 + k * 20.0;
        let s = mode_solution(r, &p, t, Complex64::new(1.0, 0.0)).unwrap();
        let (_, lm) = roots(r, &p).unwrap();
        let e = (-th.gamma * t).exp();
        prop_assert!(s.u.norm() <= t * e * (1.0 + 1e-9) + 1e-300);
        prop_assert!(s.v.norm() <= (1.0 + t * lm.norm()) * e * (1.0 + 1e-9) + 1e-300);
    }
}

#[test]
fn oracle_agrees_on_random_modes() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.random_range(0.0..10.0);
        let theta = [0.6, 1.0, 3.0][rng.random_range(0..3)];
        let t: f64 = rng.random_range(0.0..50.0);
        let p = params(theta);
        let dt = 1e-3 * (1.0f64).min(1.0 / r.max(1.0));
        let run = rk4_mode(r, &p, t, dt, Complex64::new(1.0, 0.0)).unwrap();
        let exact = mode_solution(r, &p, t, Complex64::new(1.0, 0.0)).unwrap();
        worst = worst.max(mode_relative_error(r, exact.u, exact.v, run.final_u, run.final_v));
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}
