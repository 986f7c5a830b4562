use logdamp::data_models::parse;
use logdamp::oracle::brute_quadrature;
use logdamp::propagator::mode_multipliers;
use logdamp::quadrature::{oscillatory_norm2, radial_integral, sphere_area, OscKind, RadialIntegrand, MAXK};
use logdamp::rates::{geometric_grid, norm_value, Quantity};
use logdamp::specfun::limit_checks;
use logdamp::specfun::LimitKind;
use logdamp::symbols::thresholds;
use logdamp::{DampingParams, ExecPolicy};

fn params(theta: f64) -> DampingParams {
    DampingParams::new(theta).unwrap()
}

fn curve(kind: OscKind, n: u32, theta: f64, grid: &[f64]) -> Vec<f64> {
    let p = params(theta);
    grid.iter()
        .map(|&t| oscillatory_norm2(kind, n, &p, t, 1e-9, ExecPolicy::Parallel).unwrap().value)
        .collect()
}

fn top_decade(grid: &[f64]) -> usize {
    let last = grid.last().unwrap().ln();
    grid.iter().position(|t| t.ln() >= last - std::f64::consts::LN_10 - 1e-9).unwrap()
}

fn variation(x: &[f64]) -> f64 {
    let hi = x.iter().cloned().fold(f64::MIN, f64::max);
    let lo = x.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo - 1.0
}

#[test]
fn sin2_envelope_sandwich_n3() {
    let grid = geometric_grid(1e3, 1e5, 9).unwrap();
    let m = curve(OscKind::Sin2OverR2, 3, 1.0, &grid);
    let scaled: Vec<f64> = grid.iter().zip(&m).map(|(t, v)| v * t.sqrt()).collect();
    assert!(scaled.iter().all(|&s| s > 0.0));
    assert!(variation(&scaled) < 0.01, "{scaled:?}");
}

#[test]
fn sin2_envelope_low_dimensions() {
    let grid = geometric_grid(1e3, 1e5, 9).unwrap();
    let k = top_decade(&grid);
    let m1 = curve(OscKind::Sin2OverR2, 1, 1.0, &grid);
    let r1: Vec<f64> = grid.iter().zip(&m1).map(|(t, v)| v / t).collect();
    assert!(variation(&r1[k..]) < 0.1, "{r1:?}");
    let m2 = curve(OscKind::Sin2OverR2, 2, 1.0, &grid);
    let r2: Vec<f64> = grid.iter().zip(&m2).map(|(t, v)| v / t.ln()).collect();
    assert!(variation(&r2[k..]) < 0.1, "{r2:?}");
}

#[test]
fn sine_and_cosine_weights_have_their_rates() {
    let grid = geometric_grid(1e2, 1e5, 13).unwrap();
    let i_sin = curve(OscKind::Sin2TimesA2OverR2, 3, 1.0, &grid);
    let s: Vec<f64> = grid.iter().zip(&i_sin).map(|(t, v)| v * t.powf(2.5)).collect();
    assert!(s.iter().all(|&x| x > 0.0) && variation(&s) < 0.05, "{s:?}");
    for (n, theta) in [(1u32, 1.0), (2, 1.0), (3, 0.75)] {
        let i_cos = curve(OscKind::Cos2, n, theta, &grid);
        let c: Vec<f64> = grid
            .iter()
            .zip(&i_cos)
            .map(|(t, v)| v * t.powf(n as f64 / (2.0 * theta)))
            .collect();
        assert!(c.iter().all(|&x| x > 0.0) && variation(&c) < 0.05, "n {n}: {c:?}");
    }
}

#[test]
fn high_frequency_profile_tail() {
    // ω_n ∫_{r ≥ δ₁} (1 + r^{2θ})^{−t} r^{n−1} dr ≤ C t^{−1} (1 + δ₁^{2θ})^{−t}
    for (n, theta) in [(1u32, 1.0), (3, 1.0), (2, 0.75)] {
        let p = params(theta);
        let d1 = thresholds(&p).unwrap().delta1;
        let rows = limit_checks(
            LimitKind::RadialShifted { eta: d1, p: n as f64 - 1.0, theta, eta2: f64::INFINITY },
            &[1e2, 1e3, 1e4],
        )
        .unwrap();
        // the rescaled tail converges, so t (1 + δ₁^{2θ})^t ∫ stays bounded
        let lhs: Vec<f64> = rows.iter().map(|r| r.lhs * sphere_area(n)).collect();
        assert!(variation(&lhs) < 0.05, "{lhs:?}");
    }
}

#[test]
fn gaussian_velocity_norm_at_time_zero() {
    for n in [1u32, 2, 3] {
        let d = parse("gaussian:sigma=1", n).unwrap();
        let v = norm_value(Quantity::UtL2, &d, n, &params(1.0), 0.0, 1e-10, ExecPolicy::Sequential).unwrap();
        assert!((v / d.norm_l2 - 1.0).abs() < 1e-8, "n {n}: {v} vs {}", d.norm_l2);
    }
}

#[test]
fn displacement_norm_matches_trapezoid() {
    // ‖u(10⁴)‖ for n = 3, θ = 1 and a unit Gaussian against a fine trapezoid in r
    let p = params(1.0);
    let d = parse("gaussian:sigma=1", 3).unwrap();
    let t = 1e4;
    let v = norm_value(Quantity::UL2, &d, 3, &p, t, 1e-10, ExecPolicy::Sequential).unwrap();
    let f = |r: f64| {
        let (mu, _) = mode_multipliers(r, &p, t).unwrap();
        (d.radial(r) * mu).powi(2) * r * r
    };
    let brute = brute_quadrature(f, 0.0, 0.3, 2_000_000);
    let reference = (2.0 * std::f64::consts::PI).powf(-1.5) * (sphere_area(3) * brute).sqrt();
    assert!((v / reference - 1.0).abs() < 1e-4, "{v} vs {reference}");
}

#[test]
fn plain_kind_matches_direct_integral() {
    let p = params(0.75);
    for t in [10.0, 1e3] {
        let a = oscillatory_norm2(OscKind::Plain, 2, &p, t, 1e-10, ExecPolicy::Sequential).unwrap();
        let f = |r: f64| (-t * r.powf(1.5).ln_1p()).exp();
        let tail = |r: f64| logdamp::quadrature::ln_power_tail(1.0, 0.75, t, r);
        let b = radial_integral(&f, &tail, t.powf(-1.0 / 1.5), 0.0, 2, 1e-10, ExecPolicy::Sequential).unwrap();
        assert!((a.value / b.value - 1.0).abs() < 1e-9);
    }
}

#[test]
fn domination_orders_norms() {
    // |e^{−r²}| ≤ |e^{−r²/2}| pointwise, hence in norm
    let small = |r: f64, out: &mut [f64; MAXK]| out[0] = (-2.0 * r * r).exp();
    let large = |r: f64, out: &mut [f64; MAXK]| out[0] = (-r * r).exp();
    let t_small = |r: f64, out: &mut [f64; MAXK]| out[0] = -2.0 * r * r;
    let t_large = |r: f64, out: &mut [f64; MAXK]| out[0] = -r * r;
    let a = logdamp::quadrature::spectral_l2(&RadialIntegrand::new(&small, 1, 1.0, &t_small), 2, 1e-10, ExecPolicy::Sequential).unwrap();
    let b = logdamp::quadrature::spectral_l2(&RadialIntegrand::new(&large, 1, 1.0, &t_large), 2, 1e-10, ExecPolicy::Sequential).unwrap();
    assert!(a < b);
}
