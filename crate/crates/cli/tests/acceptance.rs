//! One PASS/FAIL line per acceptance criterion; the test fails if any line does.

use std::process::Command;
use std::time::{Duration, Instant};

use logdamp::data_models::{decompose, parse, verify_moment_bounds};
use logdamp::oracle::{mode_relative_error, rk4_mode};
use logdamp::propagator::{mode_energy, mode_solution};
use logdamp::quadrature::{oscillatory_norm2, OscKind};
use logdamp::rates::{
    classify_growth, default_grid, energy_curves, fit_exponential, fit_power, geometric_grid, norm_curve, NormCurve,
    Tolerances,
};
use logdamp::specfun::{gautschi_ratio, hyp2f1, i_mu_quad, limit_checks, LimitKind};
use logdamp::symbols::{log_symbol, roots, thresholds, DampingParams};
use logdamp::{Complex64, ExecPolicy, GrowthModel, Quantity};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TOL: f64 = 1e-8;
const POLICY: ExecPolicy = ExecPolicy::Parallel;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn params(theta: f64) -> DampingParams {
    DampingParams::new(theta).unwrap()
}

fn window() -> f64 {
    Tolerances::default().window_fraction
}

fn curve(q: Quantity, datum: &str, n: u32, theta: f64) -> Result<NormCurve, String> {
    let d = parse(datum, n).map_err(|e| e.to_string())?;
    norm_curve(q, &d, n, &params(theta), &default_grid(), TOL, POLICY).map_err(|e| e.to_string())
}

fn exponent(q: Quantity, datum: &str, n: u32, theta: f64) -> Result<f64, String> {
    let c = curve(q, datum, n, theta)?;
    let fit = fit_power(&c, window()).map_err(|e| e.to_string())?;
    fit.exponent.ok_or_else(|| "no exponent".to_string())
}

/// OLS slope of `ln y` against `ln t`.
fn log_log_slope(t: &[f64], ln_y: &[f64]) -> f64 {
    let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, ln_y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(ln_y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn spread(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / mean
}

fn c1() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for mu in [0.5, 1.0, 1.7] {
        let row = limit_checks(LimitKind::Origin { mu, x2: f64::INFINITY }, &[1e4]).unwrap()[0];
        ok &= row.relerr < 0.01;
        notes.push(format!("mu {mu}: relerr {:.2e}", row.relerr));
        if mu == 1.0 {
            let exact = 1e4 / (1e4 - 1.0);
            let dev = (row.lhs / exact - 1.0).abs();
            ok &= dev < 1e-12;
            notes.push(format!("t/(t-1) deviation {dev:.1e}"));
        }
    }
    verdict(ok, notes.join(", "))
}

fn c2() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, theta) in [(2.0, 1.0), (0.0, 0.75), (1.0, 0.6)] {
        let row = limit_checks(LimitKind::Radial { p, theta, eta2: f64::INFINITY }, &[1e4]).unwrap()[0];
        ok &= row.relerr < 0.01;
        notes.push(format!("({p},{theta}): relerr {:.2e}", row.relerr));
    }
    verdict(ok, notes.join(", "))
}

fn c3() -> Verdict {
    let errs: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| gautschi_ratio(t, 0.5).unwrap().relerr)
        .collect();
    let ok = errs[2] < 1e-3 && errs[0] > errs[1] && errs[1] > errs[2];
    verdict(ok, format!("|ratio - 1| = {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]))
}

fn c4() -> Verdict {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst_series: f64 = 0.0;
    for _ in 0..20 {
        let mu: f64 = rng.random_range(0.2..3.0);
        let t: f64 = rng.random_range(0.5..20.0);
        let x2: f64 = rng.random_range(0.01..0.95);
        let lhs = i_mu_quad(mu, 0.0, x2, t).unwrap();
        let rhs = x2.powf(mu) / mu * hyp2f1(t, mu, mu + 1.0, -x2).unwrap();
        worst_series = worst_series.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    let mut worst_euler: f64 = 0.0;
    for _ in 0..20 {
        let a: f64 = rng.random_range(-2.0..3.0);
        let b: f64 = rng.random_range(-2.0..3.0);
        let c: f64 = rng.random_range(0.3..5.0);
        let z: f64 = rng.random_range(-0.9..0.6);
        let lhs = hyp2f1(a, b, c, z).unwrap();
        let rhs = (1.0 - z).powf(c - a - b) * hyp2f1(c - a, c - b, c, z).unwrap();
        worst_euler = worst_euler.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    verdict(
        worst_series < 1e-8 && worst_euler < 1e-10,
        format!("series residual {worst_series:.1e}, Euler residual {worst_euler:.1e}"),
    )
}

fn c5() -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.random_range(0.0..10.0);
        let theta = [0.6, 1.0, 3.0][rng.random_range(0..3)];
        let t: f64 = rng.random_range(0.0..50.0);
        let p = params(theta);
        let dt = 1e-3 * (1.0 / r.max(1.0));
        let one = Complex64::new(1.0, 0.0);
        let run = rk4_mode(r, &p, t, dt, one).unwrap();
        let exact = mode_solution(r, &p, t, one).unwrap();
        worst = worst.max(mode_relative_error(r, exact.u, exact.v, run.final_u, run.final_v));
    }
    verdict(worst <= 1e-6, format!("worst relative error {worst:.2e}"))
}

fn c6() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for theta in [0.75, 1.0, 1.5] {
        let want = -1.0 / (4.0 * theta);
        match exponent(Quantity::UL2, "gaussian:sigma=1", 3, theta) {
            Ok(a) => {
                ok &= (a - want).abs() <= 0.05;
                notes.push(format!("theta {theta}: {a:.4} vs {want:.4}"));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("theta {theta}: {e}"));
            }
        }
    }
    verdict(ok, notes.join(", "))
}

/// `v²/g(t)` on the top decade of the curve.
fn top_decade_ratio(c: &NormCurve, g: impl Fn(f64) -> f64) -> f64 {
    let t_hi = *c.t_values.last().unwrap();
    let v: Vec<f64> = c
        .t_values
        .iter()
        .zip(&c.ln_values)
        .filter(|(t, _)| **t >= t_hi / 10.0 * (1.0 - 1e-12))
        .map(|(t, ln)| (2.0 * ln).exp() / g(*t))
        .collect();
    spread(&v)
}

fn c7() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, want, g, label) in [
        (2u32, GrowthModel::LogSqrt, (|t: f64| t.ln()) as fn(f64) -> f64, "v^2/ln t"),
        (1, GrowthModel::SqrtT, |t: f64| t, "v^2/t"),
    ] {
        match curve(Quantity::UL2, "gaussian:sigma=1", n, 1.0) {
            Ok(c) => {
                let (model, _) = classify_growth(&c).unwrap();
                let s = top_decade_ratio(&c, g);
                ok &= model == want && s < 0.1;
                notes.push(format!("n {n}: {} with {label} spread {:.3}", model.as_str(), s));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("n {n}: {e}"));
            }
        }
    }
    verdict(ok, notes.join(", "))
}

fn c8() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, theta) in [(1u32, 1.0), (2, 0.75), (3, 1.0)] {
        let d = parse("gaussian:sigma=1", n).unwrap();
        let (_, _, e) = energy_curves(&d, n, &params(theta), &default_grid(), TOL, POLICY).unwrap();
        let norm_ln: Vec<f64> = e.ln_values.iter().map(|l| 0.5 * (std::f64::consts::LN_2 + l)).collect();
        let norm = NormCurve::from_ln(Quantity::Energy, e.t_values.clone(), norm_ln, n, theta, e.datum.clone()).unwrap();
        let a = fit_power(&norm, window()).unwrap().exponent.unwrap();
        let want = -(n as f64) / (4.0 * theta);
        ok &= (a - want).abs() <= 0.05;
        notes.push(format!("({n},{theta}): {a:.4} vs {want:.4}"));
    }
    verdict(ok, notes.join(", "))
}

fn c9() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, theta) in [(3u32, 1.0), (2, 0.6), (1, 0.7)] {
        let nf = n as f64;
        let bound = -nf / (4.0 * theta) + (6.0 - 8.0 * theta).max(0.0) / (4.0 * theta);
        match exponent(Quantity::ResidualU, "gaussian:sigma=1", n, theta) {
            Ok(a) => {
                let pass = a <= bound + 0.05;
                ok &= pass;
                notes.push(format!("({n},{theta}): {a:.4} vs <= {bound:.4}{}", if pass { "" } else { " (exceeds)" }));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("({n},{theta}): {e}"));
            }
        }
    }
    let theta = 0.55;
    let bound = 1.0 / theta - 1.5;
    let residual = exponent(Quantity::ResidualU, "gaussian:sigma=1", 1, theta);
    let profile = curve(Quantity::ProfileU, "gaussian:sigma=1", 1, theta).map(|c| {
        let (model, _) = classify_growth(&c).unwrap();
        (model, fit_power(&c, window()).unwrap().exponent.unwrap())
    });
    match (residual, profile) {
        (Ok(a), Ok((model, b))) => {
            let pass = a <= bound + 0.05 && (model == GrowthModel::SqrtT || (b - 0.5).abs() <= 0.05);
            ok &= pass;
            notes.push(format!(
                "(1,0.55): residual {a:.4} vs <= {bound:.4}, profile {} {b:.4}",
                model.as_str()
            ));
        }
        (r, p) => {
            ok = false;
            notes.push(format!("(1,0.55): {:?} {:?}", r.err(), p.err()));
        }
    }
    verdict(ok, notes.join(", "))
}

fn c10() -> Verdict {
    let grid = default_grid();
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, theta) in [(1u32, 1.0), (3, 1.0), (2, 0.75)] {
        let p = params(theta);
        let nf = n as f64;
        for (kind, want, label) in [
            (OscKind::Sin2TimesA2OverR2, -(nf + 4.0 * theta - 2.0) / (2.0 * theta), "I_sin"),
            (OscKind::Cos2, -nf / (2.0 * theta), "I_cos"),
        ] {
            let ln: Vec<f64> = grid
                .iter()
                .map(|&t| oscillatory_norm2(kind, n, &p, t, TOL, POLICY).unwrap().value.ln())
                .collect();
            let a = log_log_slope(&grid, &ln);
            ok &= (a - want).abs() <= 0.05;
            notes.push(format!("({n},{theta}) {label} {a:.4} vs {want:.4}"));
        }
    }
    verdict(ok, notes.join(", "))
}

fn c11() -> Verdict {
    let n = 3u32;
    let nf = n as f64;
    let mut ok = true;
    let mut notes = Vec::new();
    for (theta, want) in [(0.8, -(nf + 4.0 * 0.8 - 2.0) / (4.0 * 0.8)), (1.5, -(nf + 2.0) / (4.0 * 1.5))] {
        match exponent(Quantity::ResidualUt, "shifted_gaussian:sigma=1,shift=1", n, theta) {
            Ok(a) => {
                ok &= (a - want).abs() <= 0.07;
                notes.push(format!("theta {theta}: {a:.4} vs {want:.4}"));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("theta {theta}: {e}"));
            }
        }
    }
    verdict(ok, notes.join(", "))
}

fn c12() -> Verdict {
    let p = params(1.0);
    let gamma = thresholds(&p).unwrap().gamma;
    let d = parse("gaussian:sigma=1", 3).unwrap();
    let grid = geometric_grid(1e2, 1e3, 8).unwrap();
    let c = norm_curve(Quantity::HighfreqU, &d, 3, &p, &grid, TOL, POLICY).unwrap();
    let slope = log_log_slope(&c.t_values, &c.ln_values);
    let rate = fit_exponential(&c).unwrap().rate;
    let ok = slope < -10.0 && rate >= gamma / 2.0 && rate <= gamma * 2.0;
    verdict(ok, format!("power slope {slope:.1}, rate {rate:.4} vs gamma {gamma:.4}"))
}

fn c13() -> Verdict {
    const SAMPLES: usize = 1000;
    let mut rng = StdRng::seed_from_u64(13);
    let mut energy_ok = 0;
    let mut vieta_ok = 0;
    let mut positivity_ok = 0;
    let mut bounds_ok = 0;
    let mut reconstruction_ok = 0;
    for _ in 0..SAMPLES {
        let theta: f64 = rng.random_range(0.51..4.0);
        let p = params(theta);
        let r: f64 = 10f64.powf(rng.random_range(-6.0..4.0));
        let u1 = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let t1: f64 = rng.random_range(0.0..200.0);
        let t2 = t1 + rng.random_range(0.0..200.0);
        let e1 = mode_energy(&mode_solution(r, &p, t1, u1).unwrap());
        let e2 = mode_energy(&mode_solution(r, &p, t2, u1).unwrap());
        energy_ok += usize::from(e2 <= e1 + 1e-12);

        let l = log_symbol(r, &p).unwrap();
        let (lp, lm) = roots(r, &p).unwrap();
        let sum = (lp + lm + l).norm() / l.max(1e-300);
        let prod = (lp * lm - r * r).norm() / (r * r);
        vieta_ok += usize::from(sum <= 1e-12 && prod <= 1e-12);

        let rr: f64 = 10f64.powf(rng.random_range(-10.0..10.0));
        let power = rr.powf(2.0 * theta);
        positivity_ok += usize::from(power - log_symbol(rr, &p).unwrap() >= -1e-15 * power);
    }
    let grid: Vec<f64> = (1..=100).map(|k| 10.0 * k as f64 / 100.0).collect();
    let data = [
        ("gaussian:sigma=1", 1u32),
        ("gaussian:sigma=0.5", 2),
        ("gaussian:sigma=2", 3),
        ("shifted_gaussian:sigma=1,shift=1", 3),
        ("box:h=1", 1),
        ("ball:h=1", 3),
    ];
    for k in 0..SAMPLES {
        let (text, n) = data[k % data.len()];
        let d = parse(text, n).unwrap();
        let xi: f64 = rng.random_range(0.0..50.0);
        let dec = decompose(&d, xi);
        let back = Complex64::new(dec.p1 + dec.a1, -dec.b1);
        reconstruction_ok += usize::from((back - d.fourier_along(xi)).norm() <= 1e-14 * d.p1.abs().max(1.0));

        let kappa: f64 = rng.random_range(0.0..=1.0);
        let (k_hat, m_hat) = verify_moment_bounds(&d, kappa, &grid).unwrap();
        let zero = decompose(&d, 0.0);
        bounds_ok += usize::from(k_hat <= 2.0 && m_hat <= 1.0 && zero.a1 == 0.0 && zero.b1 == 0.0);
    }
    let all = [energy_ok, vieta_ok, positivity_ok, bounds_ok, reconstruction_ok];
    verdict(
        all.iter().all(|&c| c == SAMPLES),
        format!(
            "energy {energy_ok}/{SAMPLES}, Vieta {vieta_ok}/{SAMPLES}, r^(2 theta) >= L {positivity_ok}/{SAMPLES}, \
             A1/B1 bounds {bounds_ok}/{SAMPLES}, reconstruction {reconstruction_ok}/{SAMPLES}"
        ),
    )
}

fn run_cli(args: &[&str], threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_logdamp"))
        .args(args)
        .args(["--threads", &threads.to_string()])
        .output()
        .expect("run logdamp");
    out.stdout
}

fn c14() -> Verdict {
    let runs: [&[&str]; 3] = [
        &["curve", "--quantity", "residual_u", "--n", "3", "--theta", "1"],
        &["curve", "--quantity", "energy", "--n", "2", "--theta", "0.75"],
        &["report", "--n", "3", "--theta", "1", "--datum", "gaussian:sigma=1"],
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for args in runs {
        let one = run_cli(args, 1);
        let eight = run_cli(args, 8);
        let same = !one.is_empty() && one == eight;
        ok &= same;
        notes.push(format!("{} {}: {}", args[0], args[2], if same { "identical" } else { "differ" }));
    }
    verdict(ok, notes.join(", "))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Duration, fn() -> Verdict); 14] = [
        ("Beta integral limit t^mu I -> Gamma(mu)", Duration::from_secs(1), c1),
        ("radial integral limit", Duration::from_secs(5), c2),
        ("Gautschi ratio", Duration::from_secs(1), c3),
        ("hypergeometric identities", Duration::from_secs(1), c4),
        ("propagator against the oracle", Duration::from_secs(30), c5),
        ("u_l2 exponent for n = 3", Duration::from_secs(360), c6),
        ("log_sqrt and sqrt_t growth", Duration::from_secs(240), c7),
        ("energy-norm exponent", Duration::from_secs(360), c8),
        ("residual_u exponent bounds", Duration::from_secs(720), c9),
        ("I_sin and I_cos exponents", Duration::from_secs(180), c10),
        ("residual_ut exponent for n = 3", Duration::from_secs(360), c11),
        ("high-frequency exponential decay", Duration::from_secs(60), c12),
        ("invariant suites", Duration::from_secs(30), c13),
        ("thread-count determinism", Duration::from_secs(600), c14),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let pass = v.pass && took <= *budget;
        let status = if pass { "PASS" } else { "FAIL" };
        let over = if took > *budget { " (over time budget)" } else { "" };
        println!("criterion {:>2} {status} {name}: {} [{:.2}s]{over}", k + 1, v.detail, took.as_secs_f64());
        if !pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
